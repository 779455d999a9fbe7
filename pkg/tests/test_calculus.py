"""Total/partial derivatives, substitution, and evaluation."""
import random
from fractions import Fraction

import pytest

from galinv.symcore import (JetSpace, JetPoint, parse_expr, sym, const,
                            total_derivative, total_derivative_multi,
                            partial_derivative, substitute, evaluate,
                            simplify_basic, collect_atoms, opaque,
                            EvaluationError, OrderOverflowError,
                            MissingCoordinate, PolyFn, FunctionBinding,
                            random_poly, ZERO, ONE, Jet)

SP = JetSpace(("t", "x"), ("R", "Theta"), order=3)
UU = JetSpace(("t", "x"), ("u", "ustar"), order=2)

NAMES = ["t", "x", "R", "Theta", "R_x", "Theta_x", "R_xx", "Theta_xx",
         "R_t", "Theta_t", "R_tx", "Theta_tx", "R_xxx", "Theta_xxx",
         "R_tt", "R_txx", "Theta_txx"]


def rand_point(rng, names=NAMES, space=SP):
    vals = {nm: Fraction(rng.randint(-12, 12), rng.randint(6, 12)) for nm in names}
    return JetPoint.from_names(space, vals)


def test_total_derivative_examples():
    assert total_derivative(sym(SP, "Theta"), 1, SP) == sym(SP, "Theta_x")
    assert total_derivative(sym(SP, "x") * sym(SP, "R_x"), 0, SP) == \
        sym(SP, "x") * sym(SP, "R_tx")


def test_chain_rule_through_opaque():
    phi = opaque("phi", [sym(UU, "u") * sym(UU, "ustar")])
    d = total_derivative(phi, 1, UU)
    expected = opaque("phi", [sym(UU, "u") * sym(UU, "ustar")], (1,)) * (
        sym(UU, "u_x") * sym(UU, "ustar") + sym(UU, "u") * sym(UU, "ustar_x"))
    assert simplify_basic(d) == simplify_basic(expected)


def test_order_overflow_only_when_extension_disabled():
    deep = sym(SP, "R_xxx")
    total_derivative(deep, 1, SP)   # auto-extends
    with pytest.raises(OrderOverflowError):
        total_derivative(deep, 1, SP, extend=False)


def test_leibniz_rule_exact_at_50_points():
    rng = random.Random(5)
    a = parse_expr("R*Theta_x + t*R_x^2", SP)
    b = parse_expr("Theta - x*R_xx", SP)
    lhs = total_derivative(a * b, 1, SP)
    rhs = a * total_derivative(b, 1, SP) + b * total_derivative(a, 1, SP)
    for _ in range(50):
        p = rand_point(rng)
        assert evaluate(lhs, p) == evaluate(rhs, p)


def test_total_derivatives_commute():
    e = parse_expr("R*Theta_x^2 + M(R;Theta_x)*x", SP)
    d1 = total_derivative(total_derivative(e, 0, SP), 1, SP)
    d2 = total_derivative(total_derivative(e, 1, SP), 0, SP)
    if simplify_basic(d1) != simplify_basic(d2):
        rng = random.Random(6)
        fb = FunctionBinding().bind("M", random_poly(2, rng))
        for _ in range(25):
            p = rand_point(rng)
            assert evaluate(d1, p, fb) == evaluate(d2, p, fb)


def test_partial_derivative_examples():
    R, Tx = sym(SP, "R"), sym(SP, "Theta_x")
    assert partial_derivative(R * Tx, Tx) == R
    assert partial_derivative(Tx ** 2, Tx) == 2 * Tx
    assert partial_derivative(sym(SP, "R_x"), sym(SP, "R")) == ZERO
    m = opaque("M", [sym(SP, "R")])
    assert partial_derivative(m, sym(SP, "R")) == opaque("M", [sym(SP, "R")], (1,))


def test_substitute_simultaneous_no_resubstitution():
    sp = JetSpace(("t", "x"), ("rho", "j1"), order=1)
    e = parse_expr("rho_t + j1_x", sp)
    out = substitute(e, {sp.atom("rho_t"): -sp.atom("j1_x")})
    assert out == ZERO
    # swap is simultaneous, not sequential
    a, b = sp.atom("rho"), sp.atom("j1")
    sw = substitute(a + 2 * b, {a: b, b: a})
    assert sw == b + 2 * a


def test_substitute_solved_form_removes_time_derivative():
    from galinv.catalog import phase_amplitude_system
    sys9 = phase_amplitude_system("zero", "zero", 1)
    key = (sys9.space.dep_index("R"), (0,))
    e = parse_expr("R_t^2 + Theta_x", sys9.space)
    out = substitute(e, {Jet(*key): sys9.solved_for[key]})
    assert sys9.space.atom("R_t") not in collect_atoms(out)


def test_evaluate_examples():
    sp = JetSpace(("t", "x"), ("rho", "j1"), order=1)
    p = JetPoint.from_names(sp, {"rho_t": 1, "j1_x": -1})
    assert evaluate(parse_expr("rho_t + j1_x", sp), p) == 0

    p2 = JetPoint.from_names(SP, {"x": 5})
    assert evaluate(parse_expr("2 + 3*x", SP), p2) == 17

    lam = Fraction(2, 7)
    fb = FunctionBinding().bind("phi", PolyFn.univariate([0, lam]))
    dphi = opaque("phi", [sym(UU, "u") * sym(UU, "ustar")], (1,))
    p3 = JetPoint.from_names(UU, {"u": Fraction(1, 3), "ustar": Fraction(1, 2)})
    assert evaluate(dphi, p3, fb) == lam


def test_evaluate_error_cases():
    p = JetPoint.from_names(SP, {"R": 0})
    with pytest.raises(EvaluationError):
        evaluate(sym(SP, "R") ** -1, p)
    with pytest.raises(EvaluationError):
        evaluate(opaque("mystery", [sym(SP, "R")]), p, FunctionBinding())
    with pytest.raises(MissingCoordinate):
        evaluate(sym(SP, "Theta"), p)


def test_float_mode_evaluation():
    p = JetPoint.from_names(SP, {"R": 0.5, "Theta_x": 2.0}, mode="float")
    v = evaluate(parse_expr("R*Theta_x^2", SP), p)
    assert abs(v - 2.0) < 1e-15


def test_polynomial_binding_derivatives():
    f = PolyFn(2, {(1, 0): Fraction(1), (1, 1): Fraction(2), (0, 3): Fraction(1, 2)})
    assert f.eval_deriv((1, 0), [Fraction(2), Fraction(3)]) == 1 + 2 * 3
    assert f.eval_deriv((0, 2), [Fraction(2), Fraction(3)]) == 3 * 3  # 3*(1/2)*2*b
    assert f.eval_deriv((2, 0), [Fraction(2), Fraction(3)]) == 0
