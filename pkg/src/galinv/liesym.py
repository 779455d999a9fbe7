"""Point-symmetry machinery.

Prolongation of vector fields to jet space, on-shell reduction against an
evolution solved form, randomized exact/float invariance residuals, Lie
brackets, and structure-constant (closure) tables.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

from .symcore import (Expr, Ind, Jet, JetSpace, JetPoint, point_key,
                      ZERO, const, ex_sum, ex_mul, simplify_basic,
                      total_derivative, total_derivative_multi,
                      partial_derivative, substitute, evaluate,
                      evaluate_with_scale, collect_atoms, collect_opaque,
                      max_jet_order, FunctionBinding, random_binding)
from .symcore.scalars import abs2, abs_float, is_zero, to_complex

# float-mode thresholds: relative residual bound, and the band in which the
# exact rational mode arbitrates between "zero" and "tiny"
FLOAT_TOL = 1e-9
ARBITER_BAND = (1e-12, 1e-6)


class SamplingError(RuntimeError):
    """Raised when 100 consecutive samples violate the singularity guards."""


@dataclass(frozen=True)
class VectorField:
    """Point-symmetry generator: xi per independent, eta per dependent.

    Coefficients may depend on independents and dependents but never on
    derivative coordinates.
    """
    space: JetSpace
    xi: tuple[Expr, ...]
    eta: tuple[Expr, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.xi) != self.space.n_ind or len(self.eta) != len(self.space.dependents):
            raise ValueError("coefficient count mismatch")
        for e in self.xi + self.eta:
            for a in collect_atoms(e):
                if isinstance(a, Jet) and a.midx:
                    raise ValueError("point fields cannot reference derivative coordinates")

    def act(self, f: Expr) -> Expr:
        """First-order action on a function of (x, u)."""
        terms = []
        for i, x in enumerate(self.xi):
            if x is not ZERO:
                terms.append(ex_mul((x, partial_derivative(f, Ind(i)))))
        for a, e in enumerate(self.eta):
            if e is not ZERO:
                terms.append(ex_mul((e, partial_derivative(f, Jet(a)))))
        return ex_sum(terms)


@dataclass(frozen=True)
class ProlongedVectorField:
    """Prolongation of a point field: one coefficient per jet coordinate."""
    base: VectorField
    order: int
    coeffs: dict  # (dep, midx) -> Expr

    def coeff(self, dep: int, midx: tuple[int, ...]) -> Expr:
        return self.coeffs[(dep, tuple(sorted(midx)))]


def prolong(v: VectorField, order: int) -> ProlongedVectorField:
    """Standard recursive prolongation.

    eta^{J,i} = D_i(eta^J) - sum_m D_i(xi^m) u_{J,m}; the zero-order
    coefficient is eta itself.  Computed along sorted index paths, which is
    enough by Schwarz symmetry (property-tested against other paths).
    """
    if order < 0:
        raise ValueError("prolongation order must be >= 0")
    sp = v.space
    nind = sp.n_ind
    dxi = [[total_derivative(x, i, sp) for i in range(nind)] for x in v.xi]
    coeffs: dict = {}
    for dep in range(len(sp.dependents)):
        coeffs[(dep, ())] = v.eta[dep]
        for o in range(1, order + 1):
            for midx in combinations_with_replacement(range(nind), o):
                i, rest = midx[0], midx[1:]
                parts = [total_derivative(coeffs[(dep, rest)], i, sp)]
                for m in range(nind):
                    dxm = dxi[m][i]
                    if dxm is not ZERO:
                        parts.append(ex_mul((const(-1), dxm,
                                             Jet(dep, rest + (m,)))))
                coeffs[(dep, midx)] = ex_sum(parts)
    return ProlongedVectorField(v, order, coeffs)


def apply(pv: ProlongedVectorField, e: Expr) -> Expr:
    """Apply the prolonged field as a first-order operator on jet space."""
    terms = []
    for a in sorted(collect_atoms(e), key=lambda x: (x.kind, getattr(x, "index", 0),
                                                     getattr(x, "dep", 0),
                                                     getattr(x, "midx", ()))):
        if isinstance(a, Ind):
            c = pv.base.xi[a.index]
        else:
            if len(a.midx) > pv.order:
                raise ValueError(f"prolongation order {pv.order} too low for "
                                 f"order-{len(a.midx)} coordinate")
            c = pv.coeff(a.dep, a.midx)
        if c is ZERO:
            continue
        terms.append(ex_mul((c, partial_derivative(e, a))))
    return ex_sum(terms)


# ----------------------------------------------------------------------
# PDE systems and on-shell reduction

@dataclass(frozen=True)
class PdeSystem:
    """Equations (each == 0) plus an evolution solved form when one exists.

    ``solved_for`` maps a first-order time coordinate (dep, (0,)) to a
    right-hand side free of time derivatives.  Systems that admit no
    evolution form (single equations in u and its conjugate) leave it empty
    and name a ``principal`` dependent whose time derivatives are fixed by
    a linear solve at each sample point instead.
    """
    space: JetSpace
    name: str
    equations: tuple[Expr, ...]
    solved_for: dict = field(default_factory=dict)
    guards: tuple = ()          # (expr, lower bound on |expr|) pairs
    principal: int | None = None
    principal_eq: int = 0
    conjugate_float_pairs: tuple = ()   # (dep_u, dep_conj) for float sampling
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for (dep, midx), rhs in self.solved_for.items():
            if midx != (0,):
                raise ValueError("solved form must isolate first-order time derivatives")
            for a in collect_atoms(rhs):
                if isinstance(a, Jet) and a.midx and a.midx[0] == 0:
                    raise ValueError("solved right-hand side contains a time derivative")

    @property
    def order(self) -> int:
        return max(max_jet_order(eq) for eq in self.equations)


def on_shell_reduce(system: PdeSystem, e: Expr, max_order: int = 3) -> Expr:
    """Eliminate the solved dependents' time derivatives from ``e``.

    Substitutes the solved form and total-derivative consequences
    D_J(rhs) recursively until no reducible coordinate remains.  Jet order
    is extended as needed up to ``max_order``.
    """
    if not system.solved_for:
        return e
    solved_deps = {dep for (dep, _m) in system.solved_for}
    cache: dict = {}

    def consequence(dep: int, midx: tuple[int, ...]) -> Expr:
        # midx contains at least one time index; peel one off and push the
        # rest through total derivatives of the solved right-hand side
        key = (dep, midx)
        hit = cache.get(key)
        if hit is not None:
            return hit
        rest = list(midx)
        rest.remove(0)
        if len(midx) - 1 > max_order:
            raise ValueError(f"consequence order {len(midx) - 1} exceeds max_order={max_order}")
        rhs = system.solved_for[(dep, (0,))]
        out = total_derivative_multi(rhs, tuple(rest), system.space)
        cache[key] = out
        return out

    for _round in range(64):
        todo = {}
        for a in collect_atoms(e):
            if isinstance(a, Jet) and a.midx and a.midx[0] == 0 and a.dep in solved_deps:
                todo[a] = consequence(a.dep, a.midx)
        if not todo:
            return e
        e = substitute(e, todo)
    raise RuntimeError("on-shell reduction did not terminate")


# ----------------------------------------------------------------------
# randomized invariance residuals

@dataclass
class InvarianceReport:
    system: str
    generator: str
    trials: int
    mode: str                      # "rational-exact" | "float"
    seed: int
    per_equation: list             # max |residual| per equation (floats)
    max_abs_residual: float
    max_rel_residual: float
    exact_zero: bool | None = None  # rational mode: identically zero at all points
    arbiter_used: bool = False

    @property
    def passed(self) -> bool:
        if self.mode == "rational-exact":
            return bool(self.exact_zero)
        return self.max_rel_residual <= FLOAT_TOL

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "generator": self.generator,
            "trials": self.trials,
            "mode": self.mode,
            "seed": self.seed,
            "per_equation": self.per_equation,
            "max_abs_residual": self.max_abs_residual,
            "max_rel_residual": self.max_rel_residual,
            "exact_zero": self.exact_zero,
            "arbiter_used": self.arbiter_used,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _rand_rational(rng: random.Random) -> Fraction:
    den = rng.randint(6, 12)
    return Fraction(rng.randint(-den, den), den)


def sample_point(system: PdeSystem, atoms, rng: random.Random, mode: str,
                 principal_solves=(), fb=None, max_reject: int = 100) -> JetPoint:
    """Random jet point honoring guards; principal coordinates are then
    fixed by linear solves so the point lies on the solution manifold."""
    conj = dict(system.conjugate_float_pairs)
    conj_rev = {b: a for a, b in system.conjugate_float_pairs}
    free = [a for a in sorted(atoms, key=point_key)
            if not any(a == c for c, _eq, _de in principal_solves)]
    for _attempt in range(max_reject):
        p = JetPoint({}, "exact" if mode == "rational-exact" else "float")
        for a in free:
            if mode == "rational-exact":
                p.set_atom(a, _rand_rational(rng))
            else:
                if isinstance(a, Jet) and a.dep in conj_rev:
                    continue    # filled as a conjugate below
                if isinstance(a, Jet) and a.dep in conj:
                    z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                    p.set_atom(a, z)
                    p.values[("j", conj[a.dep], a.midx)] = z.conjugate()
                else:
                    p.set_atom(a, rng.uniform(-1, 1))
        # ensure conjugate partners referenced on their own are present
        if mode == "float":
            for a in free:
                if isinstance(a, Jet) and a.dep in conj_rev and point_key(a) not in p.values:
                    z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                    p.set_atom(a, z)
                    p.values[("j", conj_rev[a.dep], a.midx)] = z.conjugate()
        ok = True
        for g, bound in system.guards:
            try:
                gv = evaluate(g, p, fb)
            except Exception:
                ok = False
                break
            if abs2(gv) < Fraction(bound) * Fraction(bound):
                ok = False
                break
        if not ok:
            continue
        # place the point on the solution manifold
        solved_ok = True
        for coord, eqn, deqn in principal_solves:
            p.set_atom(coord, 0)
            den = evaluate(deqn, p, fb)
            if abs_float(den) < 1e-9:
                solved_ok = False
                break
            num = evaluate(eqn, p, fb)
            if p.mode == "exact":
                from .symcore.scalars import QI
                val = (QI(0) - num) * _invert(den)
            else:
                val = -num / den
            p.set_atom(coord, val)
        if not solved_ok:
            continue
        return p
    raise SamplingError(f"could not sample a nonsingular point for {system.name} "
                        f"after {max_reject} rejections")


def _invert(v):
    from .symcore.scalars import QI
    if isinstance(v, QI):
        return v.inverse()
    return Fraction(1) / Fraction(v)


def _principal_solves(system: PdeSystem, exprs) -> list:
    """Equations that fix the principal dependent's time derivatives."""
    if system.principal is None:
        return []
    needed = set()
    for e in exprs:
        for a in collect_atoms(e):
            if (isinstance(a, Jet) and a.dep == system.principal
                    and a.midx and a.midx[0] == 0):
                needed.add(a)
    solves = []
    base_eq = system.equations[system.principal_eq]
    for a in sorted(needed, key=lambda j: (len(j.midx), j.midx)):
        rest = list(a.midx)
        rest.remove(0)
        eqn = total_derivative_multi(base_eq, tuple(rest), system.space)
        deqn = partial_derivative(eqn, a)
        solves.append((a, eqn, deqn))
    return solves


def _prepare_residual(system: PdeSystem, v: VectorField, max_order: int):
    """Reduced criterion expressions plus everything sampling needs."""
    pv = prolong(v, system.order)
    exprs = [simplify_basic(on_shell_reduce(system, apply(pv, eq), max_order))
             for eq in system.equations]
    solves = _principal_solves(system, exprs)
    arities: dict[str, int] = {}
    for e in list(exprs) + [eq for _c, eq, _d in solves] + [g for g, _b in system.guards]:
        arities.update(collect_opaque(e))
    atoms = set()
    for e in exprs:
        atoms |= collect_atoms(e)
    for coord, eqn, deqn in solves:
        atoms |= collect_atoms(eqn) | collect_atoms(deqn)
        atoms.add(coord)
    for g, _b in system.guards:
        atoms |= collect_atoms(g)
    return exprs, solves, arities, atoms


def residual_samples(system: PdeSystem, v: VectorField, trials: int, seed: int,
                     fb=None, max_order: int = 3, poly_degree: int = 3) -> list:
    """Per-trial absolute residuals (one list per equation), exact mode."""
    exprs, solves, arities, atoms = _prepare_residual(system, v, max_order)
    rng = random.Random(seed)
    out = []
    for _trial in range(trials):
        fb_t = random_binding(arities, rng, poly_degree) if fb is None else fb
        p = sample_point(system, atoms, rng, "rational-exact", solves, fb_t)
        out.append([abs_float(evaluate(e, p, fb_t)) for e in exprs])
    return out


def on_shell_residual(system: PdeSystem, v: VectorField, trials: int, seed: int,
                      fb=None, mode: str = "rational-exact",
                      max_order: int = 3, poly_degree: int = 3) -> InvarianceReport:
    """Residual of the Lie invariance criterion on the solution manifold.

    Prolongs ``v`` to the system order, applies it to each equation,
    reduces on shell, and evaluates at ``trials`` random jet points.  With
    ``fb=None``, unbound opaque symbols get a fresh random polynomial
    instantiation per trial.  Float residuals inside the arbiter band are
    settled by a rational-exact recheck.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    exprs, solves, arities, atoms = _prepare_residual(system, v, max_order)

    rng = random.Random(seed)
    per_eq = [0.0] * len(exprs)
    max_abs = 0.0
    max_rel = 0.0
    all_zero = True
    arbiter_used = False
    for _trial in range(trials):
        if fb is None:
            fb_t = random_binding(arities, rng, poly_degree)
        else:
            fb_t = fb
        p = sample_point(system, atoms, rng, mode, solves, fb_t)
        for k, e in enumerate(exprs):
            if mode == "rational-exact":
                val = evaluate(e, p, fb_t)
                av = abs_float(val)
                if not is_zero(val):
                    all_zero = False
                per_eq[k] = max(per_eq[k], av)
                max_abs = max(max_abs, av)
                max_rel = max(max_rel, av)
            else:
                val, scale = evaluate_with_scale(e, p, fb_t)
                av = abs(to_complex(val))
                rel = av / max(scale, 1.0)
                if ARBITER_BAND[0] <= rel <= ARBITER_BAND[1]:
                    arbiter_used = True
                    sub = on_shell_residual(system, v, trials=5,
                                            seed=rng.randint(0, 2 ** 31),
                                            fb=fb, mode="rational-exact",
                                            max_order=max_order,
                                            poly_degree=poly_degree)
                    if sub.exact_zero:
                        av = 0.0
                        rel = 0.0
                per_eq[k] = max(per_eq[k], av)
                max_abs = max(max_abs, av)
                max_rel = max(max_rel, rel)

    return InvarianceReport(
        system=system.name,
        generator=v.label or "field",
        trials=trials,
        mode=mode,
        seed=seed,
        per_equation=per_eq,
        max_abs_residual=max_abs,
        max_rel_residual=max_rel,
        exact_zero=all_zero if mode == "rational-exact" else None,
        arbiter_used=arbiter_used,
    )


# ----------------------------------------------------------------------
# Lie brackets and closure

def lie_bracket(v: VectorField, w: VectorField) -> VectorField:
    """Commutator [v, w] = v(w) - w(v), componentwise on coefficients."""
    if v.space != w.space:
        raise ValueError("vector fields live on different spaces")
    xi = tuple(ex_sum((v.act(w.xi[i]), ex_mul((const(-1), w.act(v.xi[i])))))
               for i in range(v.space.n_ind))
    eta = tuple(ex_sum((v.act(w.eta[a]), ex_mul((const(-1), w.act(v.eta[a])))))
                for a in range(len(v.space.dependents)))
    return VectorField(v.space, xi, eta)


class ClosureError(RuntimeError):
    pass


class NonClosure(ClosureError):
    def __init__(self, pair, msg="bracket lies outside the span of the generators"):
        super().__init__(f"[{pair[0]}, {pair[1]}]: {msg}")
        self.pair = pair


class RankDeficient(ClosureError):
    def __init__(self, msg="generator coefficients are linearly dependent at the sample points"):
        super().__init__(msg)


@dataclass
class ClosureTable:
    names: list
    table: dict   # (name_i, name_j) -> {name_k: Fraction}

    def to_rows(self):
        rows = []
        for (a, b), coeffs in sorted(self.table.items()):
            rows.append([a, b] + [str(coeffs.get(k, Fraction(0))) for k in self.names])
        return rows


def closure_table(gens, seed: int = 1, fb=None, npoints: int = 8,
                  certify_points: int = 25) -> ClosureTable:
    """Expand every pairwise bracket over the given generators.

    Coefficients are matched exactly at random rational points; a found
    combination is then certified at fresh points.  Raises
    :class:`NonClosure` with a witness pair if some bracket leaves the
    span, and :class:`RankDeficient` if the matching system cannot pin the
    coefficients down.
    """
    items = list(gens.items()) if isinstance(gens, dict) else list(gens)
    if len(items) < 2:
        raise ValueError("need at least two generators")
    names = [nm for nm, _f in items]
    fields = [f for _nm, f in items]
    space = fields[0].space
    rng = random.Random(seed)

    atoms = [Ind(i) for i in range(space.n_ind)] + \
            [Jet(a) for a in range(len(space.dependents))]

    def coeff_vector(f: VectorField):
        return list(f.xi) + list(f.eta)

    def eval_at(e: Expr, vals) -> Fraction:
        p = JetPoint(dict(vals), "exact")
        return evaluate(e, p, fb)

    points = []
    for _ in range(npoints):
        points.append({point_key(a): _rand_rational(rng) for a in atoms})

    # basis matrix rows: one per (point, slot)
    basis = [coeff_vector(f) for f in fields]
    rows = []
    for vals in points:
        for s in range(len(atoms)):
            rows.append([eval_at(basis[k][s], vals) for k in range(len(fields))])

    certify = []
    for _ in range(certify_points):
        certify.append({point_key(a): _rand_rational(rng) for a in atoms})

    table: dict = {}
    for i in range(len(fields)):
        for j in range(len(fields)):
            if i == j:
                continue
            br = lie_bracket(fields[i], fields[j])
            bvec = coeff_vector(br)
            rhs = []
            for vals in points:
                for s in range(len(atoms)):
                    rhs.append(eval_at(bvec[s], vals))
            sol = _solve_exact(rows, rhs)
            if sol is None:
                raise NonClosure((names[i], names[j]))
            coeffs, unique = sol
            if not unique:
                raise RankDeficient()
            # certify bracket - sum_k c_k gen_k == 0 at fresh points
            for s in range(len(atoms)):
                resid = ex_sum((bvec[s],) + tuple(
                    ex_mul((const(-coeffs[k]), basis[k][s]))
                    for k in range(len(fields)) if coeffs[k] != 0))
                for vals in certify:
                    if not is_zero(eval_at(resid, vals)):
                        raise NonClosure((names[i], names[j]),
                                         "matched combination fails certification")
            table[(names[i], names[j])] = {
                names[k]: coeffs[k] for k in range(len(fields)) if coeffs[k] != 0}
    return ClosureTable(names, table)


def _solve_exact(rows, rhs):
    """Gaussian elimination over the rationals on [rows | rhs].

    Returns (solution, unique) or None when inconsistent.
    """
    m = len(rows)
    if m == 0:
        return None
    ncols = len(rows[0])
    a = [[Fraction(x) for x in row] + [Fraction(rhs[r])] for r, row in enumerate(rows)]
    piv_cols = []
    r = 0
    for c in range(ncols):
        piv = None
        for rr in range(r, m):
            if a[rr][c] != 0:
                piv = rr
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for rr in range(m):
            if rr != r and a[rr][c] != 0:
                f = a[rr][c]
                a[rr] = [x - f * y for x, y in zip(a[rr], a[r])]
        piv_cols.append(c)
        r += 1
        if r == m:
            break
    for rr in range(r, m):
        if a[rr][ncols] != 0:
            return None     # inconsistent
    sol = [Fraction(0)] * ncols
    for k, c in enumerate(piv_cols):
        sol[c] = a[k][ncols]
    return sol, len(piv_cols) == ncols
