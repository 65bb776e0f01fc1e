"""Linear lambda calculus with tensor: inference, normalization, inhabitants and circuits."""

from .kernel import (BOOL_B, BOOL_MH, BOOL_PRIME, BOOL_RED, BOOL_TENSOR, App, Lam,
                     LetPair, Lolli, Pair, Tensor, TVar, Var, alpha_eq, parse_program,
                     parse_term, parse_type, print_term, print_type)
from .rewrite import beta_eta_eq, eta_long, normalize
from .typecheck import check_at, check_linear, infer, unify

__all__ = [
    "BOOL_B", "BOOL_MH", "BOOL_PRIME", "BOOL_RED", "BOOL_TENSOR", "App", "Lam", "LetPair",
    "Lolli", "Pair", "Tensor", "TVar", "Var", "alpha_eq", "parse_program", "parse_term",
    "parse_type", "print_term", "print_type", "beta_eta_eq", "eta_long", "normalize",
    "check_at", "check_linear", "infer", "unify",
]
__version__ = "0.1.0"
