"""Differentiation, substitution, and evaluation over jet expressions."""
from __future__ import annotations

from .expr import (Expr, Const, Ind, Jet, Sum, Prod, Pow, Opaque,
                   ZERO, ONE, const, ex_sum, ex_mul, ex_pow)
from .space import JetSpace, JetPoint, point_key
from .scalars import to_complex, is_exact


class EvaluationError(ArithmeticError):
    pass


class OrderOverflowError(ValueError):
    pass


# ----------------------------------------------------------------------
# total derivative D_i

def total_derivative(e: Expr, i: int, space: JetSpace | None = None,
                     extend: bool = True) -> Expr:
    """Total derivative with respect to independent coordinate ``i``.

    Linear, Leibniz over products, chain rule through integer powers and
    opaque functions (bumping formal derivative indices).  Jet coordinates
    gain one more index; when that exceeds ``space.order`` and ``extend``
    is false, :class:`OrderOverflowError` is raised.
    """
    memo: dict[int, Expr] = {}

    def rec(x: Expr) -> Expr:
        r = memo.get(id(x))
        if r is not None:
            return r
        if isinstance(x, Const):
            r = ZERO
        elif isinstance(x, Ind):
            r = ONE if x.index == i else ZERO
        elif isinstance(x, Jet):
            if space is not None and not extend and len(x.midx) + 1 > space.order:
                raise OrderOverflowError(
                    f"derivative order {len(x.midx) + 1} exceeds jet order {space.order}")
            r = Jet(x.dep, x.midx + (i,))
        elif isinstance(x, Sum):
            r = ex_sum(tuple(rec(t) for t in x.terms))
        elif isinstance(x, Prod):
            terms = []
            for m, f in enumerate(x.factors):
                df = rec(f)
                if df is ZERO:
                    continue
                terms.append(ex_mul(x.factors[:m] + (df,) + x.factors[m + 1:]))
            r = ex_sum(terms)
        elif isinstance(x, Pow):
            db = rec(x.base)
            r = ZERO if db is ZERO else ex_mul(
                (const(x.exp), ex_pow(x.base, x.exp - 1), db))
        elif isinstance(x, Opaque):
            terms = []
            for m, a in enumerate(x.args):
                da = rec(a)
                if da is ZERO:
                    continue
                bumped = list(x.dorder)
                bumped[m] += 1
                terms.append(ex_mul((Opaque(x.name, x.args, tuple(bumped)), da)))
            r = ex_sum(terms)
        else:
            raise TypeError(f"unknown node {type(x).__name__}")
        memo[id(x)] = r
        return r

    return rec(e)


def total_derivative_multi(e: Expr, midx, space: JetSpace | None = None) -> Expr:
    for i in midx:
        e = total_derivative(e, i, space)
    return e


# ----------------------------------------------------------------------
# partial derivative with respect to a single coordinate atom

def partial_derivative(e: Expr, coord: Expr) -> Expr:
    """Partial derivative treating every jet coordinate as an independent symbol."""
    if not isinstance(coord, (Ind, Jet)):
        raise TypeError("coordinate must be an independent or jet atom")
    memo: dict[int, Expr] = {}

    def rec(x: Expr) -> Expr:
        r = memo.get(id(x))
        if r is not None:
            return r
        if isinstance(x, (Const, Ind, Jet)):
            r = ONE if x == coord else ZERO
        elif isinstance(x, Sum):
            r = ex_sum(tuple(rec(t) for t in x.terms))
        elif isinstance(x, Prod):
            terms = []
            for m, f in enumerate(x.factors):
                df = rec(f)
                if df is ZERO:
                    continue
                terms.append(ex_mul(x.factors[:m] + (df,) + x.factors[m + 1:]))
            r = ex_sum(terms)
        elif isinstance(x, Pow):
            db = rec(x.base)
            r = ZERO if db is ZERO else ex_mul(
                (const(x.exp), ex_pow(x.base, x.exp - 1), db))
        elif isinstance(x, Opaque):
            terms = []
            for m, a in enumerate(x.args):
                da = rec(a)
                if da is ZERO:
                    continue
                bumped = list(x.dorder)
                bumped[m] += 1
                terms.append(ex_mul((Opaque(x.name, x.args, tuple(bumped)), da)))
            r = ex_sum(terms)
        else:
            raise TypeError(f"unknown node {type(x).__name__}")
        memo[id(x)] = r
        return r

    return rec(e)


# ----------------------------------------------------------------------
# substitution

def substitute(e: Expr, bindings: dict[Expr, Expr]) -> Expr:
    """Simultaneous substitution; inserted subtrees are not revisited."""
    if not bindings:
        return e
    memo: dict[int, Expr] = {}

    def rec(x: Expr) -> Expr:
        r = memo.get(id(x))
        if r is not None:
            return r
        hit = bindings.get(x)
        if hit is not None:
            memo[id(x)] = hit
            return hit
        if isinstance(x, (Const, Ind, Jet)):
            r = x
        elif isinstance(x, Sum):
            r = ex_sum(tuple(rec(t) for t in x.terms))
        elif isinstance(x, Prod):
            r = ex_mul(tuple(rec(f) for f in x.factors))
        elif isinstance(x, Pow):
            r = ex_pow(rec(x.base), x.exp)
        elif isinstance(x, Opaque):
            r = Opaque(x.name, tuple(rec(a) for a in x.args), x.dorder)
        else:
            raise TypeError(f"unknown node {type(x).__name__}")
        memo[id(x)] = r
        return r

    return rec(e)


# ----------------------------------------------------------------------
# evaluation

def evaluate(e: Expr, p: JetPoint, fb=None):
    """Evaluate at a jet point; exact in rational mode, IEEE otherwise.

    ``fb`` is a :class:`~galinv.symcore.bindings.FunctionBinding` and is
    required whenever the expression contains opaque nodes.
    """
    exact = p.mode == "exact"
    memo: dict[int, object] = {}

    def rec(x: Expr):
        v = memo.get(id(x))
        if v is not None:
            return v
        if isinstance(x, Const):
            v = x.value if exact else to_complex(x.value)
            if exact and not is_exact(v):
                raise EvaluationError("non-exact constant in rational mode")
        elif isinstance(x, (Ind, Jet)):
            v = p.get(point_key(x))
        elif isinstance(x, Sum):
            v = 0
            for t in x.terms:
                v = v + rec(t)
        elif isinstance(x, Prod):
            v = 1
            for f in x.factors:
                v = v * rec(f)
        elif isinstance(x, Pow):
            b = rec(x.base)
            try:
                v = b ** x.exp
            except ZeroDivisionError:
                raise EvaluationError("negative power of zero") from None
        elif isinstance(x, Opaque):
            if fb is None:
                raise EvaluationError(f"missing function binding for {x.name!r}")
            args = [rec(a) for a in x.args]
            v = fb.eval(x.name, x.dorder, args)
        else:
            raise TypeError(f"unknown node {type(x).__name__}")
        memo[id(x)] = v
        return v

    return rec(e)


def evaluate_with_scale(e: Expr, p: JetPoint, fb=None):
    """Value plus a magnitude scale: the sum of |top-level term values|."""
    terms = e.terms if isinstance(e, Sum) else (e,)
    total = 0
    scale = 0.0
    for t in terms:
        v = evaluate(t, p, fb)
        total = total + v
        scale += abs(to_complex(v))
    return total, scale


# ----------------------------------------------------------------------
# structure queries

def collect_atoms(e: Expr) -> set:
    """All coordinate atoms (Ind/Jet) occurring in the expression."""
    out: set = set()
    seen: set[int] = set()

    def rec(x: Expr):
        if id(x) in seen:
            return
        seen.add(id(x))
        if isinstance(x, (Ind, Jet)):
            out.add(x)
        elif isinstance(x, (Const,)):
            return
        else:
            for c in (x.children() if not isinstance(x, Pow) else (x.base,)):
                rec(c)

    rec(e)
    return out


def collect_opaque(e: Expr) -> dict[str, int]:
    """Opaque symbol names mapped to their arity."""
    out: dict[str, int] = {}
    seen: set[int] = set()

    def rec(x: Expr):
        if id(x) in seen or isinstance(x, (Const, Ind, Jet)):
            return
        seen.add(id(x))
        if isinstance(x, Opaque):
            out[x.name] = len(x.args)
            for a in x.args:
                rec(a)
        elif isinstance(x, Pow):
            rec(x.base)
        else:
            for c in x.children():
                rec(c)

    rec(e)
    return out


def max_jet_order(e: Expr) -> int:
    atoms = collect_atoms(e)
    return max((len(a.midx) for a in atoms if isinstance(a, Jet)), default=0)


def max_formal_order(e: Expr) -> dict[str, int]:
    """Highest total formal derivative order needed per opaque symbol."""
    out: dict[str, int] = {}
    seen: set[int] = set()

    def rec(x: Expr):
        if id(x) in seen or isinstance(x, (Const, Ind, Jet)):
            return
        seen.add(id(x))
        if isinstance(x, Opaque):
            out[x.name] = max(out.get(x.name, 0), sum(x.dorder))
            for a in x.args:
                rec(a)
        elif isinstance(x, Pow):
            rec(x.base)
        else:
            for c in x.children():
                rec(c)

    rec(e)
    return out
