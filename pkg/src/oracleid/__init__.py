"""oracleid: a desk-scale laboratory for the oracle identification problem.

Identify a hidden N-bit string promised to lie in a known class of M
strings, using as few oracle queries as possible.  The package implements
the halving-style identification loops with ideal and simulated-quantum
search engines, the greedy informative query ordering, feasibility
verification and composition of query-complexity SDP solutions, and the
exhaustive / LP-certified / closed-form cost bounds, plus a CLI harness.
"""

from .bitstrings import (
    BitString,
    ConceptClass,
    FunctionTable,
    GramMatrix,
    filter_by_disagreement,
    generate_class,
    gram_of_function,
    majority_string,
)
from .identify import (
    IdealFinder,
    PromiseViolation,
    QuantumFinder,
    RunTrace,
    classical_identify,
    identify_all,
    run_final,
    run_halving_basic,
    run_halving_improved,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .ordering import Ordering, first_disagreement_rank, hegedus_ordering, verify_ordering

__version__ = "0.1.0"

__all__ = [
    "BitString",
    "ConceptClass",
    "FunctionTable",
    "GramMatrix",
    "majority_string",
    "filter_by_disagreement",
    "gram_of_function",
    "generate_class",
    "Ordering",
    "hegedus_ordering",
    "verify_ordering",
    "first_disagreement_rank",
    "RunTrace",
    "PromiseViolation",
    "IdealFinder",
    "QuantumFinder",
    "run_halving_basic",
    "run_halving_improved",
    "run_final",
    "identify_all",
    "classical_identify",
    "KERNEL_BACKEND",
    "__version__",
]
