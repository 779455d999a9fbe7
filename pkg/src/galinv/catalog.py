"""Constructors for the cataloged systems and generator families.

Covers the continuity equation in density/current variables, the
wave-function density and current ansatz family, the Fokker-Planck form,
phase-amplitude systems with arbitrary nonlinearities, the fully
symmetric nonlinear family, and the associated generator algebras.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .symcore import (Expr, Ind, Jet, JetSpace, JetPoint, point_key, sym,
                      ZERO, ONE, const, ex_sum, ex_mul, ex_pow, opaque,
                      simplify_basic, total_derivative, partial_derivative,
                      substitute, evaluate, collect_atoms, QI,
                      FunctionBinding, PolyFn)
from .liesym import VectorField, PdeSystem
import random

I_CONST = const(QI(0, 1))
HALF = const(Fraction(1, 2))


# ----------------------------------------------------------------------
# jet spaces

def spatial_names(n: int) -> tuple[str, ...]:
    return ("x",) if n == 1 else tuple(f"x{a}" for a in range(1, n + 1))


def continuity_space(n: int) -> JetSpace:
    deps = ("rho",) + tuple(f"j{k}" for k in range(1, n + 1))
    return JetSpace(("t",) + spatial_names(n), deps, order=1)


def wave_space(n: int, order: int = 2) -> JetSpace:
    return JetSpace(("t",) + spatial_names(n), ("u", "ustar"), order=order)


def phase_space(n: int, order: int = 2) -> JetSpace:
    return JetSpace(("t",) + spatial_names(n), ("R", "Theta"), order=order)


def root_phase_space(n: int, order: int = 2) -> JetSpace:
    # amplitude-root variable W with R = W^n, for fractional amplitude powers
    return JetSpace(("t",) + spatial_names(n), ("W", "Theta"), order=order)


# ----------------------------------------------------------------------
# generator families

@dataclass
class GeneratorFamily:
    name: str
    space: JetSpace
    members: dict[str, VectorField]
    params: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.members.items())

    def subset(self, names, new_name=None) -> "GeneratorFamily":
        return GeneratorFamily(new_name or self.name, self.space,
                               {nm: self.members[nm] for nm in names}, dict(self.params))


def _vf(space: JetSpace, xi: dict, eta: dict, label: str) -> VectorField:
    xiv = [ZERO] * space.n_ind
    etav = [ZERO] * len(space.dependents)
    for nm, e in xi.items():
        xiv[space.ind_index(nm)] = e
    for nm, e in eta.items():
        etav[space.dep_index(nm)] = e
    return VectorField(space, tuple(xiv), tuple(etav), label=label)


# ----------------------------------------------------------------------
# continuity equation and its algebras

def continuity_equation(n: int) -> PdeSystem:
    """rho_t + sum_k d_k j^k = 0 with dependents (rho, j1..jn)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    sp = continuity_space(n)
    xs = spatial_names(n)
    div = ex_sum(tuple(sym(sp, f"j{k + 1}_{xs[k]}") for k in range(n)))
    eq = sym(sp, "rho_t") + div
    return PdeSystem(sp, "continuity", (eq,),
                     solved_for={(sp.dep_index("rho"), (0,)): ex_mul((const(-1), div))})


def theorem1_field(space_or_n, xi, C, b, label: str = "X") -> VectorField:
    """Infinite-family generator on the continuity space.

    ``xi`` is one expression per coordinate (functions of x only), ``C`` a
    rational constant, and ``b`` one expression per current component,
    required to solve the continuity equation (checked exactly).  The
    current coefficients are a^{mu,nu} j^nu + b^mu with
    a^{mu,nu} = d(xi^mu)/dx_nu - delta_{mu,nu} (div xi + C).
    """
    sp = space_or_n if isinstance(space_or_n, JetSpace) else continuity_space(space_or_n)
    n = sp.n
    xi = tuple(xi)
    b = tuple(b)
    if len(xi) != n + 1 or len(b) != n + 1:
        raise ValueError("need n+1 xi components and n+1 b components")
    for e in xi + b:
        for a in collect_atoms(e):
            if isinstance(a, Jet):
                raise ValueError("xi and b must be functions of the independents only")
    _check_b_solves_continuity(sp, b)
    C = Fraction(C)
    div_xi = ex_sum(tuple(total_derivative(xi[m], m, sp) for m in range(n + 1)))
    deps = ["rho"] + [f"j{k}" for k in range(1, n + 1)]
    eta = {}
    for mu in range(n + 1):
        terms = [b[mu]]
        for nu in range(n + 1):
            a_mn = total_derivative(xi[mu], nu, sp)
            if mu == nu:
                a_mn = a_mn - div_xi - const(C)
            terms.append(ex_mul((a_mn, Jet(nu))))
        eta[deps[mu]] = ex_sum(tuple(terms))
    return _vf(sp, {sp.independents[m]: xi[m] for m in range(n + 1)}, eta, label)


class NotASolutionError(ValueError):
    pass


def _check_b_solves_continuity(sp: JetSpace, b) -> None:
    div_b = ex_sum(tuple(total_derivative(b[m], m, sp) for m in range(sp.n + 1)))
    rng = random.Random(20260810)
    for _ in range(25):
        vals = {("i", m): Fraction(rng.randint(-12, 12), rng.randint(6, 12))
                for m in range(sp.n_ind)}
        if evaluate(div_b, JetPoint(vals, "exact")) != 0:
            raise NotASolutionError("b does not solve the continuity equation")


def galilei_algebra(n: int) -> GeneratorFamily:
    """Generalized Galilei family on (rho, j): P, J_ab, G_a, D1, A."""
    sp = continuity_space(n)
    xs = spatial_names(n)
    t = sym(sp, "t")
    rho = sym(sp, "rho")
    members: dict[str, VectorField] = {}
    members["P_t"] = _vf(sp, {"t": ONE}, {}, "P_t")
    for a in range(1, n + 1):
        members[f"P_{a}"] = _vf(sp, {xs[a - 1]: ONE}, {}, f"P_{a}")
    for a in range(1, n + 1):
        for bb in range(a + 1, n + 1):
            xa, xb = sym(sp, xs[a - 1]), sym(sp, xs[bb - 1])
            members[f"J_{a}{bb}"] = _vf(
                sp, {xs[bb - 1]: xa, xs[a - 1]: -xb},
                {f"j{bb}": sym(sp, f"j{a}"), f"j{a}": -sym(sp, f"j{bb}")},
                f"J_{a}{bb}")
    for a in range(1, n + 1):
        members[f"G_{a}"] = _vf(sp, {xs[a - 1]: t}, {f"j{a}": rho}, f"G_{a}")
    d1_eta = {"rho": const(-n) * rho}
    for a in range(1, n + 1):
        d1_eta[f"j{a}"] = const(-(n + 1)) * sym(sp, f"j{a}")
    members["D1"] = _vf(sp, {"t": 2 * t, **{xs[a - 1]: sym(sp, xs[a - 1])
                                            for a in range(1, n + 1)}},
                        d1_eta, "D1")
    a_eta = {"rho": const(-n) * t * rho}
    for a in range(1, n + 1):
        xa = sym(sp, xs[a - 1])
        a_eta[f"j{a}"] = xa * rho - const(n + 1) * t * sym(sp, f"j{a}")
    members["A"] = _vf(sp, {"t": t ** 2, **{xs[a - 1]: t * sym(sp, xs[a - 1])
                                            for a in range(1, n + 1)}},
                       a_eta, "A")
    return GeneratorFamily("galilei", sp, members, {"n": n})


def conformal_algebra(n: int) -> GeneratorFamily:
    """Conformal family on (rho, j): P, J_ab, J_0a, D2, K_mu."""
    sp = continuity_space(n)
    xs = spatial_names(n)
    t = sym(sp, "t")
    rho = sym(sp, "rho")
    gal = galilei_algebra(n).members
    members: dict[str, VectorField] = {}
    members["P_t"] = gal["P_t"]
    for a in range(1, n + 1):
        members[f"P_{a}"] = gal[f"P_{a}"]
    for a in range(1, n + 1):
        for bb in range(a + 1, n + 1):
            members[f"J_{a}{bb}"] = gal[f"J_{a}{bb}"]
    for a in range(1, n + 1):
        xa = sym(sp, xs[a - 1])
        members[f"J_0{a}"] = _vf(sp, {"t": xa, xs[a - 1]: t},
                                 {"rho": sym(sp, f"j{a}"), f"j{a}": rho},
                                 f"J_0{a}")
    d2_xi = {"t": t, **{xs[a - 1]: sym(sp, xs[a - 1]) for a in range(1, n + 1)}}
    d2_eta = {"rho": const(-n) * rho,
              **{f"j{a}": const(-n) * sym(sp, f"j{a}") for a in range(1, n + 1)}}
    members["D2"] = _vf(sp, d2_xi, d2_eta, "D2")

    # K_mu = 2 x_mu D2 - (x_nu x^nu) g_{mu i} d_i - 2 x^nu S_{mu nu}
    coords = [t] + [sym(sp, xs[a]) for a in range(n)]              # lower index
    upper = [t] + [-sym(sp, xs[a]) for a in range(n)]              # raised index
    xx = ex_sum((t * t,) + tuple(const(-1) * coords[a] * coords[a]
                                 for a in range(1, n + 1)))
    jdeps = [rho] + [sym(sp, f"j{k}") for k in range(1, n + 1)]
    xj = ex_sum(tuple(upper[nu] * jdeps[nu] for nu in range(n + 1)))
    g = [1] + [-1] * n
    dep_names = ["rho"] + [f"j{k}" for k in range(1, n + 1)]
    ind_names = ("t",) + xs
    for mu in range(n + 1):
        xm = coords[mu]
        xi = {}
        for i in range(n + 1):
            e = 2 * xm * coords[i]
            if i == mu:
                e = e - const(g[mu]) * xx
            xi[ind_names[i]] = simplify_basic(e)
        eta = {}
        for i in range(n + 1):
            e = const(-2 * n) * xm * jdeps[i] + 2 * coords[i] * jdeps[mu]
            if i == mu:
                e = e - const(2 * g[mu]) * xj
            eta[dep_names[i]] = simplify_basic(e)
        nm = "K_0" if mu == 0 else f"K_{mu}"
        members[nm] = _vf(sp, xi, eta, nm)
    return GeneratorFamily("conformal", sp, members, {"n": n})


METRIC = {"diag_time": 1, "diag_space": -1, "offdiag": 0}


def bad_generator(n: int) -> VectorField:
    """t d_rho: its current part fails the continuity equation, so the
    invariance residual is identically 1.  Used for expected-fail runs."""
    sp = continuity_space(n)
    return _vf(sp, {}, {"rho": sym(sp, "t")}, "bad-gfield")


# ----------------------------------------------------------------------
# instance certification against the infinite family

@dataclass
class Theorem1Match:
    xi: tuple
    C: Fraction
    b: tuple


class NotAnInstance(ValueError):
    pass


def certify_infinite_family_instance(v: VectorField, seed: int = 7,
                                     npoints: int = 25) -> Theorem1Match:
    """Coefficient-match a field against the infinite continuity family.

    Recovers (xi, C, b) such that eta^mu = a^{mu nu} j^nu + b^mu with the
    divergence-shifted Jacobian coefficients; every identity is certified
    by exact evaluation at random rational points.
    """
    sp = v.space
    n = sp.n
    nind = sp.n_ind
    rng = random.Random(seed)
    xi = v.xi
    for e in xi:
        for a in collect_atoms(e):
            if isinstance(a, Jet):
                raise NotAnInstance("xi depends on dependents")
    div_xi = ex_sum(tuple(total_derivative(xi[m], m, sp) for m in range(nind)))

    jatoms = [Jet(d) for d in range(nind)]
    ahat = [[partial_derivative(v.eta[mu], jatoms[nu]) for nu in range(nind)]
            for mu in range(nind)]
    # b = eta with all currents set to zero
    zero_j = {jatoms[nu]: ZERO for nu in range(nind)}
    b = tuple(simplify_basic(substitute(v.eta[mu], zero_j)) for mu in range(nind))

    def rand_point():
        vals = {}
        for m in range(nind):
            vals[("i", m)] = _rr(rng)
        for d in range(nind):
            vals[("j", d, ())] = _rr(rng)
        return JetPoint(vals, "exact")

    pts = [rand_point() for _ in range(npoints)]

    # linearity in j: the candidate a-coefficients must be j-independent,
    # and eta - ahat.j - b must vanish identically
    for mu in range(nind):
        for nu in range(nind):
            for d in range(nind):
                dd = partial_derivative(ahat[mu][nu], jatoms[d])
                if any(evaluate(dd, p) != 0 for p in pts):
                    raise NotAnInstance("eta is not affine in the currents")
        resid = v.eta[mu] - ex_sum(tuple(ex_mul((ahat[mu][nu], jatoms[nu]))
                                         for nu in range(nind))) - b[mu]
        if any(evaluate(resid, p) != 0 for p in pts):
            raise NotAnInstance("eta is not affine in the currents")

    # r^{mu nu} = ahat - d(xi^mu)/dx_nu + delta (div xi) must equal -delta C
    c_expr = ahat[0][0] - total_derivative(xi[0], 0, sp) + div_xi
    c_val = evaluate(c_expr, pts[0])
    if not isinstance(c_val, (int, Fraction)):
        raise NotAnInstance("shift constant is not rational")
    C = -Fraction(c_val)
    for mu in range(nind):
        for nu in range(nind):
            r = ahat[mu][nu] - total_derivative(xi[mu], nu, sp)
            if mu == nu:
                r = r + div_xi + const(C)
            if any(evaluate(r, p) != 0 for p in pts):
                raise NotAnInstance("coefficients do not match the divergence-shifted form")

    try:
        _check_b_solves_continuity(sp, b)
    except NotASolutionError as exc:
        raise NotAnInstance(str(exc)) from None
    return Theorem1Match(xi=xi, C=C, b=b)


def _rr(rng: random.Random) -> Fraction:
    den = rng.randint(6, 12)
    return Fraction(rng.randint(-den, den), den)


# ----------------------------------------------------------------------
# density / current ansatz over the wave function

@dataclass
class DensityCurrent:
    space: JetSpace
    rho: Expr
    j: tuple[Expr, ...]
    mode: str
    params: dict = field(default_factory=dict)


def density_current(mode: str = "classical", n: int = 1, lam=None) -> DensityCurrent:
    """Density and current over (u, ustar).

    ``classical``: rho = u u*, j^k = -(i/2)(u_k u* - u u*_k).
    ``galilei``:   classical current plus the gradient of an arbitrary
                   phi(u u*); with ``lam`` set, phi = lam * u u*.
    ``general``:   rho = f(u u*), current scaled by g(u u*), plus grad phi.
    """
    sp = wave_space(n)
    xs = spatial_names(n)
    u, us = sym(sp, "u"), sym(sp, "ustar")
    s = u * us
    classical = []
    for k in range(n):
        uk = sym(sp, f"u_{xs[k]}")
        usk = sym(sp, f"ustar_{xs[k]}")
        classical.append(ex_mul((const(QI(0, Fraction(-1, 2))), uk * us - u * usk)))
    if mode == "classical":
        return DensityCurrent(sp, s, tuple(classical), mode)
    if mode == "galilei":
        phi = opaque("phi", [s]) if lam is None else const(Fraction(lam)) * s
        j = tuple(classical[k] + total_derivative(phi, k + 1, sp) for k in range(n))
        return DensityCurrent(sp, s, j, mode, {"lam": lam})
    if mode == "general":
        phi = opaque("phi", [s])
        g = opaque("g", [s])
        f = opaque("f", [s])
        j = tuple(ex_mul((g, classical[k])) + total_derivative(phi, k + 1, sp)
                  for k in range(n))
        return DensityCurrent(sp, f, j, mode)
    raise ValueError(f"unknown mode {mode!r}")


_WAVE_GUARD = Fraction(1, 10)


def wave_continuity_system(dc: DensityCurrent, name: str) -> PdeSystem:
    """Continuity equation with the given density/current substituted in.

    A single equation in (u, ustar) admits no evolution solved form; the
    time derivatives of ustar are fixed per sample by a linear solve.
    """
    sp = dc.space
    eq = total_derivative(dc.rho, 0, sp)
    for k in range(sp.n):
        eq = eq + total_derivative(dc.j[k], k + 1, sp)
    u, us = sym(sp, "u"), sym(sp, "ustar")
    return PdeSystem(sp, name, (simplify_basic(eq),),
                     guards=((u * us, _WAVE_GUARD),),
                     principal=sp.dep_index("ustar"),
                     conjugate_float_pairs=((sp.dep_index("u"), sp.dep_index("ustar")),),
                     params=dict(dc.params, mode=dc.mode))


def theorem2_counterexample(kind: str, n: int = 1) -> PdeSystem:
    """Galilei-breaking ansatz: current scaled by g = u u*, or rho = (u u*)^2."""
    sp = wave_space(n)
    xs = spatial_names(n)
    u, us = sym(sp, "u"), sym(sp, "ustar")
    s = u * us
    classical = []
    for k in range(n):
        uk, usk = sym(sp, f"u_{xs[k]}"), sym(sp, f"ustar_{xs[k]}")
        classical.append(ex_mul((const(QI(0, Fraction(-1, 2))), uk * us - u * usk)))
    if kind == "g":
        rho, j = s, tuple(s * classical[k] for k in range(n))
    elif kind == "f":
        rho, j = s * s, tuple(classical)
    else:
        raise ValueError("kind must be 'g' or 'f'")
    dc = DensityCurrent(sp, rho, j, f"counterexample-{kind}")
    return wave_continuity_system(dc, f"counterexample-{kind}")


def fokker_planck_system(lam, n: int = 1) -> PdeSystem:
    """rho_t + div j + lam * Lap rho = 0 with the classical rho, j in (u, ustar)."""
    dc = density_current("classical", n)
    sp = dc.space
    lam = Fraction(lam)
    eq = total_derivative(dc.rho, 0, sp)
    for k in range(sp.n):
        eq = eq + total_derivative(dc.j[k], k + 1, sp)
        eq = eq + const(lam) * total_derivative(total_derivative(dc.rho, k + 1, sp),
                                                k + 1, sp)
    u, us = sym(sp, "u"), sym(sp, "ustar")
    return PdeSystem(sp, "fokker-planck", (simplify_basic(eq),),
                     guards=((u * us, _WAVE_GUARD),),
                     principal=sp.dep_index("ustar"),
                     conjugate_float_pairs=((sp.dep_index("u"), sp.dep_index("ustar")),),
                     params={"lam": lam})


def wave_galilei_algebra(n: int) -> GeneratorFamily:
    """Galilei boosts (and translations/rotations) on the wave function:
    G_a = t d_a + i x_a (u d_u - ustar d_ustar)."""
    sp = wave_space(n)
    xs = spatial_names(n)
    t = sym(sp, "t")
    u, us = sym(sp, "u"), sym(sp, "ustar")
    members: dict[str, VectorField] = {}
    members["P_t"] = _vf(sp, {"t": ONE}, {}, "P_t")
    for a in range(1, n + 1):
        members[f"P_{a}"] = _vf(sp, {xs[a - 1]: ONE}, {}, f"P_{a}")
    for a in range(1, n + 1):
        for bb in range(a + 1, n + 1):
            xa, xb = sym(sp, xs[a - 1]), sym(sp, xs[bb - 1])
            members[f"J_{a}{bb}"] = _vf(sp, {xs[bb - 1]: xa, xs[a - 1]: -xb}, {},
                                        f"J_{a}{bb}")
    for a in range(1, n + 1):
        xa = sym(sp, xs[a - 1])
        members[f"G_{a}"] = _vf(sp, {xs[a - 1]: t},
                                {"u": I_CONST * xa * u,
                                 "ustar": const(QI(0, -1)) * xa * us},
                                f"G_{a}")
    return GeneratorFamily("wave-galilei", sp, members, {"n": n})


# ----------------------------------------------------------------------
# phase-amplitude systems

_PHASE_GUARDS = lambda R, gradR2: ((R, Fraction(1, 10)), (gradR2, Fraction(1, 100)))


def _grad2(sp: JetSpace, dep: str) -> Expr:
    xs = spatial_names(sp.n)
    return ex_sum(tuple(sym(sp, f"{dep}_{x}") ** 2 for x in xs))


def _lap(sp: JetSpace, dep: str) -> Expr:
    xs = spatial_names(sp.n)
    return ex_sum(tuple(sym(sp, f"{dep}_{x}{x}") for x in xs))


def phase_amplitude_system(phi_mode="zero", f_mode="zero", n: int = 1,
                           lam=None) -> PdeSystem:
    """Amplitude/phase system for the wave equation with a phi-current term.

    phi_mode: "zero", "opaque" (arbitrary phi(R^2)), or "lambda-r2"
              (phi = lam R^2, lam rational).
    f_mode:   "zero", "opaque" (arbitrary F of (R^2, (grad R^2)^2, Lap R^2)),
              or "corollary" (F = Lap R / R * N(R Lap R / (grad R)^2)).
    """
    sp = phase_space(n)
    xs = spatial_names(n)
    R = sym(sp, "R")
    lapR = _lap(sp, "R")
    lapTheta = _lap(sp, "Theta")
    gradR2 = _grad2(sp, "R")
    rk_tk = ex_sum(tuple(sym(sp, f"R_{x}") * sym(sp, f"Theta_{x}") for x in xs))
    theta_k2 = _grad2(sp, "Theta")

    r2 = R * R
    if phi_mode == "zero":
        phi_term = ZERO
    else:
        if phi_mode == "opaque":
            phi = opaque("phi", [r2])
        elif phi_mode == "lambda-r2":
            phi = const(Fraction(lam if lam is not None else 1)) * r2
        else:
            raise ValueError(f"unknown phi_mode {phi_mode!r}")
        lap_phi = ex_sum(tuple(total_derivative(total_derivative(phi, k + 1, sp),
                                                k + 1, sp) for k in range(n)))
        phi_term = HALF * ex_pow(R, -1) * lap_phi

    if f_mode == "zero":
        f_term = ZERO
    elif f_mode == "opaque":
        grad_r2_sq = ex_sum(tuple(total_derivative(r2, k + 1, sp) ** 2
                                  for k in range(n)))
        lap_r2 = ex_sum(tuple(total_derivative(total_derivative(r2, k + 1, sp),
                                               k + 1, sp) for k in range(n)))
        f_term = opaque("F", [r2, grad_r2_sq, lap_r2])
    elif f_mode == "corollary":
        sigma = R * lapR * ex_pow(gradR2, -1)
        f_term = ex_pow(R, -1) * lapR * opaque("N", [sigma])
    else:
        raise ValueError(f"unknown f_mode {f_mode!r}")

    eq1 = sym(sp, "R_t") + rk_tk + HALF * R * lapTheta + phi_term
    eq2 = sym(sp, "Theta_t") + HALF * theta_k2 - HALF * ex_pow(R, -1) * lapR + f_term
    solved = {
        (sp.dep_index("R"), (0,)): simplify_basic(-(rk_tk + HALF * R * lapTheta + phi_term)),
        (sp.dep_index("Theta"), (0,)): simplify_basic(
            -(HALF * theta_k2 - HALF * ex_pow(R, -1) * lapR + f_term)),
    }
    name = f"free-phase[phi={phi_mode},F={f_mode}]"
    return PdeSystem(sp, name, (simplify_basic(eq1), simplify_basic(eq2)),
                     solved_for=solved,
                     guards=_PHASE_GUARDS(R, gradR2),
                     params={"phi_mode": phi_mode, "f_mode": f_mode, "lam": lam, "n": n})


def schrodinger_full_algebra_system(n: int = 1) -> PdeSystem:
    """The two-equation family invariant under the full algebra:
    amplitude equation with Lap R * M(sigma), phase equation with
    (Lap R / R) N(sigma), sigma = R Lap R / (grad R)^2."""
    sp = phase_space(n)
    xs = spatial_names(n)
    R = sym(sp, "R")
    lapR = _lap(sp, "R")
    lapTheta = _lap(sp, "Theta")
    gradR2 = _grad2(sp, "R")
    rk_tk = ex_sum(tuple(sym(sp, f"R_{x}") * sym(sp, f"Theta_{x}") for x in xs))
    theta_k2 = _grad2(sp, "Theta")
    sigma = R * lapR * ex_pow(gradR2, -1)

    m_term = lapR * opaque("M", [sigma])
    n_term = ex_pow(R, -1) * lapR * opaque("N", [sigma])
    eq1 = sym(sp, "R_t") + rk_tk + HALF * R * lapTheta - m_term
    eq2 = sym(sp, "Theta_t") + HALF * theta_k2 - HALF * ex_pow(R, -1) * lapR + n_term
    solved = {
        (sp.dep_index("R"), (0,)): simplify_basic(-(rk_tk + HALF * R * lapTheta - m_term)),
        (sp.dep_index("Theta"), (0,)): simplify_basic(
            -(HALF * theta_k2 - HALF * ex_pow(R, -1) * lapR + n_term)),
    }
    return PdeSystem(sp, "eq14", (simplify_basic(eq1), simplify_basic(eq2)),
                     solved_for=solved,
                     guards=_PHASE_GUARDS(R, gradR2),
                     params={"n": n})


def ag2_invariant_system(n: int = 1) -> PdeSystem:
    """Scaling-covariant family: amplitude equation with R^{1+4/n} M(args),
    phase equation with R^{4/n} N(args), args ((grad R)^2 / R^{2+4/n};
    Lap R / R^{1+4/n}).

    For n dividing 4 the amplitude powers are integers and the system is
    built in (R, Theta).  Otherwise it is built in the amplitude-root
    variable W = R^{1/n} (R = W^n), in which every power is an integer;
    use ``amplitude_generators(n, root=True)`` with it.
    """
    if 4 % n == 0:
        sp = phase_space(n)
        dep = "R"
        p1 = 1 + 4 // n          # R^{1+4/n}
        p2 = 4 // n              # R^{4/n}
        arg1_pow = -(2 + 4 // n)
        arg2_pow = -(1 + 4 // n)
        amp = sym(sp, "R")
    else:
        sp = root_phase_space(n)
        dep = "W"
        amp = None  # set below in W powers
    xs = spatial_names(n)
    lapTheta = _lap(sp, "Theta")
    theta_k2 = _grad2(sp, "Theta")

    if dep == "R":
        R = sym(sp, "R")
        lapR = _lap(sp, "R")
        gradR2 = _grad2(sp, "R")
        rk_tk = ex_sum(tuple(sym(sp, f"R_{x}") * sym(sp, f"Theta_{x}") for x in xs))
        arg1 = gradR2 * ex_pow(R, arg1_pow)
        arg2 = lapR * ex_pow(R, arg2_pow)
        m_term = ex_pow(R, p1) * opaque("M", [arg1, arg2])
        n_term = ex_pow(R, p2) * opaque("N", [arg1, arg2])
        eq1 = sym(sp, "R_t") + rk_tk + HALF * R * lapTheta - m_term
        eq2 = sym(sp, "Theta_t") + HALF * theta_k2 - HALF * ex_pow(R, -1) * lapR + n_term
        lead = "R"
        guards = _PHASE_GUARDS(R, gradR2)
    else:
        # R = W^n: R_k = n W^{n-1} W_k, Lap R = n(n-1) W^{n-2} (grad W)^2
        # + n W^{n-1} Lap W; the amplitude equation is divided by n W^{n-1}
        # so W_t is isolated.
        W = sym(sp, "W")
        lapW = _lap(sp, "W")
        gradW2 = _grad2(sp, "W")
        wk_tk = ex_sum(tuple(sym(sp, f"W_{x}") * sym(sp, f"Theta_{x}") for x in xs))
        lapR = const(n * (n - 1)) * ex_pow(W, n - 2) * gradW2 \
            + const(n) * ex_pow(W, n - 1) * lapW
        arg1 = const(n * n) * gradW2 * ex_pow(W, -6)
        arg2 = lapR * ex_pow(W, -(n + 4))
        m_args = opaque("M", [arg1, arg2])
        n_args = opaque("N", [arg1, arg2])
        eq1 = sym(sp, "W_t") + wk_tk + const(Fraction(1, 2 * n)) * W * lapTheta \
            - const(Fraction(1, n)) * ex_pow(W, 5) * m_args
        eq2 = sym(sp, "Theta_t") + HALF * theta_k2 \
            - HALF * ex_pow(W, -n) * lapR + ex_pow(W, 4) * n_args
        lead = "W"
        guards = ((W, Fraction(1, 10)), (gradW2, Fraction(1, 100)))

    eq1 = simplify_basic(eq1)
    eq2 = simplify_basic(eq2)
    lead_t = sym(sp, f"{lead}_t")
    solved = {
        (sp.dep_index(lead), (0,)): simplify_basic(eq1 - lead_t) * const(-1),
        (sp.dep_index("Theta"), (0,)): simplify_basic(eq2 - sym(sp, "Theta_t")) * const(-1),
    }
    solved = {k: simplify_basic(v) for k, v in solved.items()}
    return PdeSystem(sp, "ag2", (eq1, eq2), solved_for=solved, guards=guards,
                     params={"n": n, "dep": lead})


def amplitude_generators(n: int, root: bool = False) -> GeneratorFamily:
    """Phase-variable designations: P_mu, J_ab, G_a, Q, D, I, A, Dtilde.

    G_a carries the real coefficient x_a on the phase direction.  With
    ``root=True`` the family is conjugated to the amplitude-root variable
    W = R^{1/n} (so R d_R becomes (1/n) W d_W).
    """
    sp = root_phase_space(n) if root else phase_space(n)
    amp = "W" if root else "R"
    amp_scale = Fraction(1, n) if root else Fraction(1)
    xs = spatial_names(n)
    t = sym(sp, "t")
    Rv = sym(sp, amp)
    members: dict[str, VectorField] = {}
    members["P_t"] = _vf(sp, {"t": ONE}, {}, "P_t")
    for a in range(1, n + 1):
        members[f"P_{a}"] = _vf(sp, {xs[a - 1]: ONE}, {}, f"P_{a}")
    for a in range(1, n + 1):
        for bb in range(a + 1, n + 1):
            xa, xb = sym(sp, xs[a - 1]), sym(sp, xs[bb - 1])
            members[f"J_{a}{bb}"] = _vf(sp, {xs[bb - 1]: xa, xs[a - 1]: -xb}, {},
                                        f"J_{a}{bb}")
    for a in range(1, n + 1):
        xa = sym(sp, xs[a - 1])
        members[f"G_{a}"] = _vf(sp, {xs[a - 1]: t}, {"Theta": xa}, f"G_{a}")
    members["Q"] = _vf(sp, {}, {"Theta": ONE}, "Q")
    members["D"] = _vf(sp, {"t": 2 * t, **{xs[a - 1]: sym(sp, xs[a - 1])
                                           for a in range(1, n + 1)}}, {}, "D")
    members["I"] = _vf(sp, {}, {amp: const(amp_scale) * Rv}, "I")
    half_x2 = HALF * ex_sum(tuple(sym(sp, x) ** 2 for x in xs))
    members["A"] = _vf(sp, {"t": t ** 2, **{xs[a - 1]: t * sym(sp, xs[a - 1])
                                            for a in range(1, n + 1)}},
                       {amp: const(Fraction(-n, 2) * amp_scale) * t * Rv,
                        "Theta": half_x2}, "A")
    dt = members["D"]
    iv = members["I"]
    members["Dtilde"] = VectorField(
        sp,
        tuple(simplify_basic(a - const(Fraction(n, 2)) * b)
              for a, b in zip(dt.xi, iv.xi)),
        tuple(simplify_basic(a - const(Fraction(n, 2)) * b)
              for a, b in zip(dt.eta, iv.eta)),
        label="Dtilde")
    return GeneratorFamily("amplitude", sp, members, {"n": n, "root": root})


def phase_galilei_algebra(n: int) -> GeneratorFamily:
    """Invariance family of the free phase system with arbitrary phi."""
    fam = amplitude_generators(n)
    names = [nm for nm in fam.members if nm.startswith(("P_", "J_", "G_"))] + ["Q", "D"]
    return fam.subset(names, "phase-galilei")


def schrodinger_full_algebra(n: int) -> GeneratorFamily:
    """Full symmetry family: phase-Galilei plus amplitude scaling and the
    projective generator."""
    fam = amplitude_generators(n)
    names = [nm for nm in fam.members if nm.startswith(("P_", "J_", "G_"))] \
        + ["Q", "D", "I", "A"]
    return fam.subset(names, "schrodinger-full")


def ag2_phase_algebra(n: int, root: bool = False) -> GeneratorFamily:
    """Scaling-covariant family: P, J, G, Q, Dtilde, A."""
    fam = amplitude_generators(n, root=root)
    names = [nm for nm in fam.members if nm.startswith(("P_", "J_", "G_"))] \
        + ["Q", "Dtilde", "A"]
    return fam.subset(names, "ag2")
