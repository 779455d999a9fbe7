"""Immutable expression trees over jet-space coordinates.

Node kinds: exact constants (integers, rationals, Gaussian rationals, or
floats in numeric work), independent coordinates, jet coordinates indexed
by symmetric multi-indices, n-ary sums and products, integer powers, and
opaque-function applications carrying a formal derivative multi-index.

The constructors ``ex_sum``/``ex_mul``/``ex_pow`` always return a lightly
canonicalized tree: flattened, constant-folded, children sorted under a
deterministic total order, like terms collected in sums and equal bases
merged in products.  There is deliberately no full canonical form for
nonlinear expressions; exact-zero questions are settled by rational-point
evaluation (see :mod:`galinv.symcore.calculus`).
"""
from __future__ import annotations

import zlib
from fractions import Fraction
from functools import cmp_to_key

from .scalars import QI, is_zero, normalize_exact, scalar_key

_MASK = (1 << 61) - 1

# kind ranks fix the ordering between node classes
K_CONST, K_IND, K_JET, K_POW, K_OPAQUE, K_PROD, K_SUM = range(7)


def _mix(*parts) -> int:
    h = 0x345678
    for p in parts:
        h = ((h * 1000003) ^ (p & _MASK)) & _MASK
    return h


def _strh(s: str) -> int:
    # zlib.crc32 is stable across processes, unlike hash(str)
    return zlib.crc32(s.encode())


class Expr:
    __slots__ = ("_h",)
    kind: int = -1

    # Arithmetic sugar so catalog code reads like formulas.
    def __add__(self, other):
        return ex_sum((self, _coerce(other)))

    def __radd__(self, other):
        return ex_sum((_coerce(other), self))

    def __sub__(self, other):
        return ex_sum((self, ex_mul((const(-1), _coerce(other)))))

    def __rsub__(self, other):
        return ex_sum((_coerce(other), ex_mul((const(-1), self))))

    def __mul__(self, other):
        return ex_mul((self, _coerce(other)))

    def __rmul__(self, other):
        return ex_mul((_coerce(other), self))

    def __truediv__(self, other):
        return ex_mul((self, ex_pow(_coerce(other), -1)))

    def __rtruediv__(self, other):
        return ex_mul((_coerce(other), ex_pow(self, -1)))

    def __pow__(self, k):
        return ex_pow(self, k)

    def __neg__(self):
        return ex_mul((const(-1), self))

    def __hash__(self):
        return self._h

    def children(self) -> tuple:
        return ()

    def __repr__(self):
        from .parse import print_prefix
        return print_prefix(self)


class Const(Expr):
    __slots__ = ("value",)
    kind = K_CONST

    def __init__(self, value):
        self.value = value
        self._h = _mix(K_CONST, *(hash(k) for k in scalar_key(value)))

    def __eq__(self, other):
        return self is other or (type(other) is Const and
                                 scalar_key(self.value) == scalar_key(other.value))

    __hash__ = Expr.__hash__


class Ind(Expr):
    """Independent coordinate x_i (i = 0 is time)."""
    __slots__ = ("index",)
    kind = K_IND

    def __init__(self, index: int):
        self.index = index
        self._h = _mix(K_IND, index)

    def __eq__(self, other):
        return self is other or (type(other) is Ind and self.index == other.index)

    __hash__ = Expr.__hash__


class Jet(Expr):
    """Jet coordinate: dependent ``dep`` differentiated along multi-index ``midx``.

    ``midx`` is a sorted tuple of independent indices; the empty tuple is
    the dependent itself.  Sorting enforces Schwarz symmetry by construction.
    """
    __slots__ = ("dep", "midx")
    kind = K_JET

    def __init__(self, dep: int, midx: tuple[int, ...] = ()):
        self.dep = dep
        self.midx = tuple(sorted(midx))
        self._h = _mix(K_JET, dep, len(self.midx), *self.midx)

    def __eq__(self, other):
        return self is other or (type(other) is Jet and self.dep == other.dep
                                 and self.midx == other.midx)

    __hash__ = Expr.__hash__

    @property
    def order(self) -> int:
        return len(self.midx)


class Sum(Expr):
    __slots__ = ("terms",)
    kind = K_SUM

    def __init__(self, terms: tuple[Expr, ...]):
        self.terms = terms
        self._h = _mix(K_SUM, *(t._h for t in terms))

    def __eq__(self, other):
        return self is other or (type(other) is Sum and self._h == other._h
                                 and self.terms == other.terms)

    __hash__ = Expr.__hash__

    def children(self):
        return self.terms


class Prod(Expr):
    __slots__ = ("factors",)
    kind = K_PROD

    def __init__(self, factors: tuple[Expr, ...]):
        self.factors = factors
        self._h = _mix(K_PROD, *(f._h for f in factors))

    def __eq__(self, other):
        return self is other or (type(other) is Prod and self._h == other._h
                                 and self.factors == other.factors)

    __hash__ = Expr.__hash__

    def children(self):
        return self.factors


class Pow(Expr):
    __slots__ = ("base", "exp")
    kind = K_POW

    def __init__(self, base: Expr, exp: int):
        self.base = base
        self.exp = exp
        self._h = _mix(K_POW, exp, base._h)

    def __eq__(self, other):
        return self is other or (type(other) is Pow and self.exp == other.exp
                                 and self.base == other.base)

    __hash__ = Expr.__hash__

    def children(self):
        return (self.base,)


class Opaque(Expr):
    """Application ``name^(d1,..,dk)(a1; ..; ak)`` of an opaque function symbol.

    ``dorder[m]`` counts formal differentiations with respect to slot ``m``;
    the chain rule bumps these indices instead of expanding anything.
    """
    __slots__ = ("name", "dorder", "args")
    kind = K_OPAQUE

    def __init__(self, name: str, args: tuple[Expr, ...], dorder: tuple[int, ...] | None = None):
        self.name = name
        self.args = tuple(args)
        self.dorder = tuple(dorder) if dorder is not None else (0,) * len(self.args)
        if len(self.dorder) != len(self.args):
            raise ValueError("derivative index length must match argument count")
        self._h = _mix(K_OPAQUE, _strh(name), *self.dorder, *(a._h for a in self.args))

    def __eq__(self, other):
        return self is other or (type(other) is Opaque and self._h == other._h
                                 and self.name == other.name
                                 and self.dorder == other.dorder
                                 and self.args == other.args)

    __hash__ = Expr.__hash__

    def children(self):
        return self.args


# ----------------------------------------------------------------------
# deterministic total order (used to sort sum/product children)

def compare(a: Expr, b: Expr) -> int:
    if a is b:
        return 0
    if a.kind != b.kind:
        return -1 if a.kind < b.kind else 1
    if a.kind == K_CONST:
        ka, kb = scalar_key(a.value), scalar_key(b.value)
        return -1 if ka < kb else (1 if ka > kb else 0)
    if a.kind == K_IND:
        return (a.index > b.index) - (a.index < b.index)
    if a.kind == K_JET:
        ka, kb = (a.dep, a.midx), (b.dep, b.midx)
        return -1 if ka < kb else (1 if ka > kb else 0)
    if a.kind == K_POW:
        c = compare(a.base, b.base)
        if c:
            return c
        return (a.exp > b.exp) - (a.exp < b.exp)
    if a.kind == K_OPAQUE:
        if a.name != b.name:
            return -1 if a.name < b.name else 1
        if a.dorder != b.dorder:
            return -1 if a.dorder < b.dorder else 1
        return _compare_seq(a.args, b.args)
    return _compare_seq(a.children(), b.children())


def _compare_seq(xs, ys) -> int:
    for x, y in zip(xs, ys):
        c = compare(x, y)
        if c:
            return c
    return (len(xs) > len(ys)) - (len(xs) < len(ys))


_sort_key = cmp_to_key(compare)


# ----------------------------------------------------------------------
# canonicalizing constructors

ZERO: Expr
ONE: Expr


def _coerce(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction, QI, float, complex)):
        return const(v)
    raise TypeError(f"cannot coerce {type(v).__name__} to Expr")


def const(v) -> Const:
    if isinstance(v, (int, Fraction, QI)):
        v = normalize_exact(v)
    return Const(v)


def ex_sum(terms) -> Expr:
    """Sum with flattening, constant folding, and like-term collection."""
    acc = 0
    buckets: dict[Expr, object] = {}   # monomial -> coefficient
    order: list[Expr] = []

    def put(coeff, mono: Expr | None):
        nonlocal acc
        if mono is None:
            acc = acc + coeff
            return
        if mono in buckets:
            buckets[mono] = buckets[mono] + coeff
        else:
            buckets[mono] = coeff
            order.append(mono)

    def feed(e: Expr):
        if e.kind == K_SUM:
            for t in e.terms:
                feed(t)
        elif e.kind == K_CONST:
            put(e.value, None)
        elif e.kind == K_PROD and e.factors[0].kind == K_CONST:
            rest = e.factors[1:]
            mono = rest[0] if len(rest) == 1 else Prod(rest)
            put(e.factors[0].value, mono)
        else:
            put(1, e)

    for t in terms:
        feed(t)

    out: list[Expr] = []
    for mono in order:
        c = normalize_exact(buckets[mono]) if not isinstance(buckets[mono], (float, complex)) \
            else buckets[mono]
        if is_zero(c):
            continue
        if c == 1:
            out.append(mono)
        else:
            out.append(_attach_coeff(c, mono))
    if not is_zero(acc):
        out.append(const(acc))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=_sort_key)
    return Sum(tuple(out))


def _attach_coeff(c, mono: Expr) -> Expr:
    if mono.kind == K_PROD:
        return Prod((const(c),) + mono.factors)
    return Prod((const(c), mono))


def ex_mul(factors) -> Expr:
    """Product with flattening, constant folding, and base-exponent merging."""
    cacc = 1
    powers: dict[Expr, int] = {}
    order: list[Expr] = []

    def put(base: Expr, k: int):
        if base in powers:
            powers[base] += k
        else:
            powers[base] = k
            order.append(base)

    def feed(e: Expr):
        nonlocal cacc
        if e.kind == K_PROD:
            for f in e.factors:
                feed(f)
        elif e.kind == K_CONST:
            cacc = cacc * e.value
        elif e.kind == K_POW:
            put(e.base, e.exp)
        else:
            put(e, 1)

    for f in factors:
        feed(f)

    if is_zero(cacc):
        return ZERO
    out: list[Expr] = []
    for base in order:
        k = powers[base]
        if k == 0:
            continue
        out.append(base if k == 1 else _make_pow(base, k))
    if not out:
        return _coerce(normalize_exact(cacc) if not isinstance(cacc, (float, complex)) else cacc)
    if len(out) == 1 and out[0].kind == K_SUM and cacc != 1:
        # distribute a bare scalar over a sum so -(a+b) collects like a - b
        c = const(cacc)
        return ex_sum(tuple(ex_mul((c, t)) for t in out[0].terms))
    out.sort(key=_sort_key)
    cval = normalize_exact(cacc) if not isinstance(cacc, (float, complex)) else cacc
    if cval != 1:
        out.insert(0, const(cval))
    if len(out) == 1:
        return out[0]
    return Prod(tuple(out))


def _make_pow(base: Expr, k: int) -> Expr:
    # base is neither Const, Pow, nor Prod here (handled by ex_pow/ex_mul)
    return Pow(base, k)


def ex_pow(base, k) -> Expr:
    base = _coerce(base)
    if not isinstance(k, int):
        if isinstance(k, Fraction) and k.denominator == 1:
            k = int(k)
        elif isinstance(k, Const) and isinstance(k.value, int):
            k = k.value
        else:
            raise TypeError("only integer exponents are supported")
    if k == 0:
        return ONE
    if k == 1:
        return base
    if base.kind == K_CONST:
        v = base.value
        if is_zero(v):
            if k < 0:
                raise ZeroDivisionError("zero base with negative exponent")
            return ZERO
        if isinstance(v, int) and k < 0:
            return const(Fraction(1, v) ** (-k))
        return const(v ** k)
    if base.kind == K_POW:
        return ex_pow(base.base, base.exp * k)
    if base.kind == K_PROD:
        return ex_mul(tuple(ex_pow(f, k) for f in base.factors))
    return Pow(base, k)


def opaque(name: str, args, dorder=None) -> Opaque:
    return Opaque(name, tuple(_coerce(a) for a in args), dorder)


ZERO = Const(0)
ONE = Const(1)
I = Const(QI(0, 1))


def simplify_basic(e: Expr) -> Expr:
    """Rebuild a tree through the canonicalizing constructors.

    Performs constant folding, 0/1 identities, like-term collection over
    identical monomials, and canonical child ordering.  Not a decision
    procedure for zero; use rational-point certification for that.
    """
    if e.kind in (K_CONST, K_IND, K_JET):
        return e
    if e.kind == K_SUM:
        return ex_sum(tuple(simplify_basic(t) for t in e.terms))
    if e.kind == K_PROD:
        return ex_mul(tuple(simplify_basic(f) for f in e.factors))
    if e.kind == K_POW:
        return ex_pow(simplify_basic(e.base), e.exp)
    return Opaque(e.name, tuple(simplify_basic(a) for a in e.args), e.dorder)
