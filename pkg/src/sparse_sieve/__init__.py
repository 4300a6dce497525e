"""Large sieve with sparse sets of moduli: exact counting quantities,
bound evaluators and ratio sweeps."""

from .bounds import BoundParams, BoundReport, check_conditions, ratio_report, rhs_thm1_search
from .errors import CapacityExceeded, GridTooCoarse, InputFormatError, NotCoprimeError
from .expsum import CoefficientSequence, eval_S, full_residue_sum, norm_Z, sieve_lhs
from .farey import count_in_interval, dirichlet_approx, enumerate_farey, k_delta
from .moduli import ModuliSet, count_window_max, delta_squares, primes_up_to, squares_in_window, subset_t

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "BoundReport",
    "CapacityExceeded",
    "CoefficientSequence",
    "GridTooCoarse",
    "InputFormatError",
    "ModuliSet",
    "NotCoprimeError",
    "check_conditions",
    "count_in_interval",
    "count_window_max",
    "delta_squares",
    "dirichlet_approx",
    "enumerate_farey",
    "eval_S",
    "full_residue_sum",
    "k_delta",
    "norm_Z",
    "primes_up_to",
    "ratio_report",
    "rhs_thm1_search",
    "sieve_lhs",
    "squares_in_window",
    "subset_t",
]
