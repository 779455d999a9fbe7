"""Grammar round trips, error reporting, and the stable prefix form."""
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from galinv.symcore import (JetSpace, parse_expr, print_infix, print_prefix,
                            ParseError, Jet, const, ex_sum, ex_mul, ex_pow,
                            opaque, sym, QI)

SP = JetSpace(("t", "x"), ("rho", "j1"), order=3)
PH = JetSpace(("t", "x1", "x2"), ("R", "Theta"), order=3)


def test_suffix_form_examples():
    e = parse_expr("rho_t + j1_x", SP)
    assert e == SP.atom("rho_t") + SP.atom("j1_x")
    m = parse_expr("M(rho;j1)", SP)
    assert m.dorder == (0, 0)


def test_d_form_and_multichar_independents():
    assert parse_expr("D[Theta,{x1,1},{x2,1}]", PH) == PH.atom("Theta_x1x2")
    assert parse_expr("Theta_x1x2", PH) == PH.atom("Theta_x2x1")


def test_unknown_coordinate_reports_position():
    with pytest.raises(ParseError) as exc:
        parse_expr("rho_t + bogus", SP)
    assert "position" in str(exc.value)


def test_syntax_error_reports_position():
    with pytest.raises(ParseError):
        parse_expr("rho_t + ", SP)
    with pytest.raises(ParseError):
        parse_expr("rho_t @ j1", SP)


def test_imaginary_unit_and_rationals():
    e = parse_expr("-1/2*I*(j1_x - rho_x)", SP)
    assert parse_expr(print_infix(e, SP), SP) == e


def test_formal_derivative_call_forms():
    for text in ("M^(1,0)(rho;j1)", "M^(2)(rho)", "phi^(1)(rho*j1)*rho_x"):
        e = parse_expr(text, SP)
        assert parse_expr(print_infix(e, SP), SP) == e


def test_power_vs_derivative_index_disambiguation():
    assert parse_expr("rho^(2)", SP) == ex_pow(SP.atom("rho"), 2)
    assert parse_expr("rho^(-2)", SP) == ex_pow(SP.atom("rho"), -2)


def test_prefix_form_is_stable():
    e = parse_expr("rho_t + 1/2*j1_x^2", SP)
    assert print_prefix(e, SP) == "(+ (jet rho t) (* (q 1/2) (^ (jet j1 x) 2)))"


# ----------------------------------------------------------------------
# randomized round-trip corpus

def _rand_expr(space, rng, depth=3):
    if depth == 0 or rng.random() < 0.3:
        kind = rng.randrange(4)
        if kind == 0:
            return const(Fraction(rng.randint(-9, 9), rng.randint(1, 9)))
        if kind == 1:
            return const(QI(rng.randint(-3, 3), rng.randint(1, 3)))
        names = ["t", "x", "rho", "j1", "rho_x", "j1_t", "rho_tx", "j1_xx"]
        return space.atom(rng.choice(names))
    kind = rng.randrange(4)
    if kind == 0:
        return ex_sum(tuple(_rand_expr(space, rng, depth - 1)
                            for _ in range(rng.randint(2, 4))))
    if kind == 1:
        return ex_mul(tuple(_rand_expr(space, rng, depth - 1)
                            for _ in range(rng.randint(2, 3))))
    if kind == 2:
        base = space.atom(rng.choice(["rho", "j1", "rho_x", "x"]))
        return ex_pow(base + _rand_expr(space, rng, 0), rng.choice([-2, -1, 2, 3]))
    arity = rng.randint(1, 2)
    dorder = tuple(rng.randint(0, 2) for _ in range(arity))
    return opaque(rng.choice(["M", "N", "phi"]),
                  [_rand_expr(space, rng, depth - 1) for _ in range(arity)],
                  dorder)


def test_roundtrip_corpus_of_100():
    rng = random.Random(20260810)
    for k in range(100):
        e = _rand_expr(SP, rng)
        text = print_infix(e, SP)
        back = parse_expr(text, SP)
        assert back == e, f"corpus #{k}: {text}"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_roundtrip_hypothesis(seed):
    rng = random.Random(seed)
    e = _rand_expr(SP, rng)
    assert parse_expr(print_infix(e, SP), SP) == e
