"""Prolongation, on-shell reduction, invariance residuals, brackets."""
import itertools
import random
from fractions import Fraction

import pytest

from galinv.symcore import (JetSpace, JetPoint, parse_expr, sym, const,
                            simplify_basic, total_derivative, evaluate,
                            collect_atoms, ex_sum, ex_mul, Jet, Ind,
                            ZERO, ONE, FunctionBinding, random_poly)
from galinv.liesym import (VectorField, prolong, apply, on_shell_reduce,
                           on_shell_residual, residual_samples, lie_bracket,
                           closure_table, NonClosure, RankDeficient,
                           PdeSystem, SamplingError)
from galinv import catalog

PH = JetSpace(("t", "x"), ("R", "Theta"), order=3)


def phase_field(xi=None, eta=None, label=""):
    xiv = [ZERO, ZERO]
    etav = [ZERO, ZERO]
    for i, e in (xi or {}).items():
        xiv[i] = e
    for a, e in (eta or {}).items():
        etav[a] = e
    return VectorField(PH, tuple(xiv), tuple(etav), label=label)


def rand_phase_point(rng, extra=()):
    names = ["t", "x", "R", "Theta", "R_x", "Theta_x", "R_xx", "Theta_xx",
             "R_t", "Theta_t", "R_tx", "Theta_tx", "R_xxx", "Theta_xxx"]
    vals = {nm: Fraction(rng.randint(-12, 12), rng.randint(6, 12))
            for nm in list(names) + list(extra)}
    return JetPoint.from_names(PH, vals)


# ----------------------------------------------------------------------
# prolongation

def test_point_field_rejects_derivative_coordinates():
    with pytest.raises(ValueError):
        phase_field(eta={0: sym(PH, "R_x")})


def test_prolong_boost_coefficients():
    # boost t d_x + x d_Theta: first coefficients 1 and -Theta_x
    g = phase_field(xi={1: sym(PH, "t")}, eta={1: sym(PH, "x")})
    pv = prolong(g, 2)
    assert simplify_basic(pv.coeff(1, (1,))) == ONE
    assert simplify_basic(pv.coeff(1, (0,))) == -sym(PH, "Theta_x")


def test_prolong_translation_is_trivial():
    pt = phase_field(xi={0: ONE})
    pv = prolong(pt, 3)
    assert all(c == ZERO for c in pv.coeffs.values())


def test_prolong_amplitude_scaling_is_linear():
    iv = phase_field(eta={0: sym(PH, "R")})
    pv = prolong(iv, 2)
    assert pv.coeff(0, (1,)) == sym(PH, "R_x")
    assert pv.coeff(0, (1, 1)) == sym(PH, "R_xx")


def test_prolongation_path_independence():
    """eta^J computed along any index order agrees, up to |J| = 3."""
    rng = random.Random(3)
    v = phase_field(xi={0: sym(PH, "t") ** 2, 1: sym(PH, "t") * sym(PH, "x")},
                    eta={0: sym(PH, "R") * sym(PH, "x"), 1: sym(PH, "x") ** 2})
    pv = prolong(v, 3)
    nind = 2
    dxi = [[total_derivative(xx, i, PH) for i in range(nind)] for xx in v.xi]

    def eta_path(dep, path):
        # prolong along an explicit index sequence (unsorted)
        if not path:
            return v.eta[dep]
        i, rest = path[-1], path[:-1]
        parts = [total_derivative(eta_path(dep, rest), i, PH)]
        for m in range(nind):
            if dxi[m][i] is not ZERO:
                parts.append(ex_mul((const(-1), dxi[m][i],
                                     Jet(dep, tuple(sorted(rest + (m,)))))))
        return ex_sum(parts)

    paths = [(1, 0), (0, 1), (1, 1, 0), (0, 1, 1), (1, 0, 1)]
    extra = ["R_tt", "Theta_tt", "R_txx", "Theta_txx", "R_ttx", "Theta_ttx",
             "R_ttt", "Theta_ttt"]
    for dep in (0, 1):
        for path in paths:
            ref = pv.coeff(dep, tuple(sorted(path)))
            alt = eta_path(dep, path)
            for k in range(25):
                p = rand_phase_point(random.Random(100 + k), extra)
                assert evaluate(ref, p) == evaluate(alt, p)


# ----------------------------------------------------------------------
# apply

def test_apply_examples():
    sys1 = catalog.continuity_equation(1)
    pt = VectorField(sys1.space, (ONE, ZERO), (ZERO, ZERO))
    assert apply(prolong(pt, 1), sys1.equations[0]) == ZERO
    assert apply(prolong(pt, 1), const(5)) == ZERO


def test_apply_order_mismatch():
    g = phase_field(xi={1: sym(PH, "t")}, eta={1: sym(PH, "x")})
    pv = prolong(g, 1)
    with pytest.raises(ValueError):
        apply(pv, sym(PH, "R_xx"))


def test_apply_is_a_derivation():
    rng = random.Random(7)
    v = phase_field(xi={0: 2 * sym(PH, "t"), 1: sym(PH, "x")},
                    eta={0: -sym(PH, "R") / 2})
    pv = prolong(v, 2)
    a = parse_expr("R*Theta_x + R_xx", PH)
    b = parse_expr("Theta - R_x^2", PH)
    lhs = apply(pv, a * b)
    rhs = a * apply(pv, b) + b * apply(pv, a)
    for _ in range(25):
        p = rand_phase_point(rng)
        assert evaluate(lhs, p) == evaluate(rhs, p)


# ----------------------------------------------------------------------
# on-shell reduction

def test_reduce_single_time_derivative():
    sys1 = catalog.continuity_equation(1)
    e = sym(sys1.space, "rho_t")
    out = on_shell_reduce(sys1, e)
    assert out == -sym(sys1.space, "j1_x")


def test_reduce_mixed_derivative_matches_consequence_oracle():
    sys9 = catalog.phase_amplitude_system("zero", "zero", 1)
    sp = sys9.space
    reduced = on_shell_reduce(sys9, sym(sp, "R_tx"))
    oracle = total_derivative(sys9.solved_for[(sp.dep_index("R"), (0,))], 1, sp)
    rng = random.Random(9)
    names = ["t", "x", "R", "Theta", "R_x", "Theta_x", "R_xx", "Theta_xx",
             "R_xxx", "Theta_xxx"]
    for _ in range(25):
        vals = {nm: Fraction(rng.randint(1, 12), rng.randint(6, 12)) for nm in names}
        p = JetPoint.from_names(sp, vals)
        assert evaluate(reduced, p) == evaluate(oracle, p)


def test_reduce_without_time_derivatives_is_identity():
    sys9 = catalog.phase_amplitude_system("zero", "zero", 1)
    e = parse_expr("R_x*Theta_xx + x", sys9.space)
    assert on_shell_reduce(sys9, e) is e


def test_reduce_second_time_derivative_terminates():
    sys9 = catalog.phase_amplitude_system("zero", "zero", 1)
    out = on_shell_reduce(sys9, sym(sys9.space, "R_tt"), max_order=4)
    for a in collect_atoms(out):
        assert not (isinstance(a, Jet) and a.midx and a.midx[0] == 0)


def test_reduce_max_order_guard():
    sys9 = catalog.phase_amplitude_system("zero", "zero", 1)
    with pytest.raises(ValueError):
        on_shell_reduce(sys9, sym(sys9.space, "R_ttt"), max_order=3)


# ----------------------------------------------------------------------
# residuals

def test_residual_positive_and_negative():
    sys2 = catalog.continuity_equation(2)
    fam = catalog.galilei_algebra(2)
    rep = on_shell_residual(sys2, fam.members["G_1"], trials=5, seed=42)
    assert rep.exact_zero and rep.max_abs_residual == 0.0

    bad = catalog.bad_generator(1)
    rep = on_shell_residual(catalog.continuity_equation(1), bad, trials=25, seed=1)
    assert not rep.exact_zero
    assert rep.max_abs_residual >= 0.1


def test_residual_float_mode_tolerance():
    sys14 = catalog.schrodinger_full_algebra_system(1)
    v = catalog.schrodinger_full_algebra(1).members["A"]
    rep = on_shell_residual(sys14, v, trials=10, seed=3, mode="float")
    assert rep.passed and rep.max_rel_residual < 1e-9


def test_residual_report_roundtrips_to_json():
    import json
    sys1 = catalog.continuity_equation(1)
    rep = on_shell_residual(sys1, catalog.galilei_algebra(1).members["A"],
                            trials=3, seed=5)
    blob = json.loads(rep.to_json())
    assert blob["system"] == "continuity"
    assert blob["exact_zero"] is True
    assert blob["trials"] == 3 and blob["seed"] == 5


def test_residual_requires_positive_trials():
    sys1 = catalog.continuity_equation(1)
    with pytest.raises(ValueError):
        on_shell_residual(sys1, catalog.bad_generator(1), trials=0, seed=1)


def test_sampling_guard_exhaustion():
    sp = PH
    system = PdeSystem(sp, "impossible", (sym(sp, "R_t"),),
                       guards=((sym(sp, "R") ** 2 + 1, Fraction(10)),))
    v = phase_field(eta={0: sym(sp, "R")})
    with pytest.raises(SamplingError):
        on_shell_residual(system, v, trials=1, seed=1)


# ----------------------------------------------------------------------
# brackets and closure

def test_bracket_oracles():
    fam = catalog.amplitude_generators(1)
    br = lie_bracket(fam.members["P_t"], fam.members["A"])
    dt = fam.members["Dtilde"]
    assert all(simplify_basic(a) == simplify_basic(b)
               for a, b in zip(br.xi + br.eta, dt.xi + dt.eta))

    fam2 = catalog.amplitude_generators(2)
    br = lie_bracket(fam2.members["P_1"], fam2.members["G_1"])
    q = fam2.members["Q"]
    assert all(simplify_basic(a) == simplify_basic(b)
               for a, b in zip(br.xi + br.eta, q.xi + q.eta))
    z = lie_bracket(fam2.members["P_1"], fam2.members["G_2"])
    assert all(simplify_basic(c) == ZERO for c in z.xi + z.eta)


def test_bracket_antisymmetry():
    fam = catalog.amplitude_generators(1)
    a, d = fam.members["A"], fam.members["D"]
    assert all(simplify_basic(c) == ZERO
               for c in lie_bracket(a, a).xi + lie_bracket(a, a).eta)
    ad = lie_bracket(a, d)
    da = lie_bracket(d, a)
    assert all(simplify_basic(x + y) == ZERO
               for x, y in zip(ad.xi + ad.eta, da.xi + da.eta))


def test_bracket_space_mismatch():
    with pytest.raises(ValueError):
        lie_bracket(catalog.amplitude_generators(1).members["Q"],
                    catalog.galilei_algebra(1).members["P_t"])


def test_closure_full_family():
    tab = closure_table(dict(catalog.schrodinger_full_algebra(1).members), seed=2)
    assert tab.table[("P_t", "A")] == {"D": Fraction(1), "I": Fraction(-1, 2)}
    assert tab.table[("P_1", "G_1")] == {"Q": Fraction(1)}


def test_closure_non_closure_witness():
    fam = catalog.amplitude_generators(1)
    with pytest.raises(NonClosure):
        closure_table({"P_t": fam.members["P_t"], "G_1": fam.members["G_1"]}, seed=6)


def test_closure_commuting_pair_zero_table():
    fam = catalog.amplitude_generators(1)
    tab = closure_table({"P_t": fam.members["P_t"], "P_1": fam.members["P_1"]}, seed=7)
    assert tab.table == {("P_t", "P_1"): {}, ("P_1", "P_t"): {}}


def test_closure_rank_deficiency_detected():
    fam = catalog.amplitude_generators(1)
    with pytest.raises(RankDeficient):
        closure_table({"D": fam.members["D"], "I": fam.members["I"],
                       "Dtilde": fam.members["Dtilde"], "Q": fam.members["Q"]},
                      seed=8)


def test_jacobi_identity_on_phase_family():
    members = catalog.amplitude_generators(1).members
    for a, b, c in itertools.combinations(["P_t", "P_1", "G_1", "D", "I", "A", "Q"], 3):
        s1 = lie_bracket(members[a], lie_bracket(members[b], members[c]))
        s2 = lie_bracket(members[b], lie_bracket(members[c], members[a]))
        s3 = lie_bracket(members[c], lie_bracket(members[a], members[b]))
        for xa, xb, xc in zip(s1.xi + s1.eta, s2.xi + s2.eta, s3.xi + s3.eta):
            assert simplify_basic(ex_sum((xa, xb, xc))) == ZERO


def test_symmetry_of_symmetry():
    """Brackets of verified symmetries are again symmetries on the full family."""
    sys14 = catalog.schrodinger_full_algebra_system(1)
    fam = catalog.schrodinger_full_algebra(1).members
    for a, b in [("P_t", "A"), ("D", "G_1"), ("G_1", "A")]:
        w = lie_bracket(fam[a], fam[b])
        rep = on_shell_residual(sys14, w, trials=5, seed=11)
        assert rep.exact_zero, (a, b, rep.max_abs_residual)
