"""polycut: conic quadratic mixed 0-1 optimization with polymatroid cuts.

Modules:
    model       problem data model, feasibility checks, JSON format
    submodular  chain-difference coefficients and greedy separation
    cuts        every cut family, lifting, two-variable hull
    simplex     dense bounded-variable primal simplex with warm starts
    relax       outer-approximation relaxation of all cone blocks
    branchcut   branch-and-bound with root cut loops
    generators  seeded instance generators for the experiment families
    oracle      brute-force and closed-form references
    cli         gen / solve / verify / report front end
"""

__version__ = "0.1.0"
