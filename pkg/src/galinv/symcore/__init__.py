"""Self-contained symbolic engine over jet spaces.

Construction, total/partial differentiation, substitution, and exact or
floating evaluation of expressions in independents, dependents, derivative
coordinates, and opaque function symbols.
"""
from .expr import (Expr, Const, Ind, Jet, Sum, Prod, Pow, Opaque,
                   ZERO, ONE, I, const, ex_sum, ex_mul, ex_pow, opaque,
                   simplify_basic, compare)
from .space import JetSpace, JetPoint, MissingCoordinate, point_key, sym
from .calculus import (total_derivative, total_derivative_multi,
                       partial_derivative, substitute, evaluate,
                       evaluate_with_scale, collect_atoms, collect_opaque,
                       max_jet_order, max_formal_order,
                       EvaluationError, OrderOverflowError)
from .bindings import PolyFn, FunctionBinding, random_poly, random_binding
from .parse import parse_expr, print_infix, print_prefix, ParseError
from .scalars import QI

__all__ = [
    "Expr", "Const", "Ind", "Jet", "Sum", "Prod", "Pow", "Opaque",
    "ZERO", "ONE", "I", "const", "ex_sum", "ex_mul", "ex_pow", "opaque",
    "simplify_basic", "compare",
    "JetSpace", "JetPoint", "MissingCoordinate", "point_key", "sym",
    "total_derivative", "total_derivative_multi", "partial_derivative",
    "substitute", "evaluate", "evaluate_with_scale", "collect_atoms",
    "collect_opaque", "max_jet_order", "max_formal_order",
    "EvaluationError", "OrderOverflowError",
    "PolyFn", "FunctionBinding", "random_poly", "random_binding",
    "parse_expr", "print_infix", "print_prefix", "ParseError",
    "QI",
]
