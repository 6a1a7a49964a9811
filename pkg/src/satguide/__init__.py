"""Learning-guided saturation prover for first-order CNF.

A given-clause prover (binary resolution + positive factoring) whose clause
selection can be guided by gradient-boosted trees or a hypergraph message
passing network, both operating on symbol-independent clause features so
guidance survives consistent renaming of all symbols.
"""

__version__ = "0.1.0"

from .terms import Clause, Literal, Problem, Symbol  # noqa: F401
from .tptp import parse_problem  # noqa: F401
