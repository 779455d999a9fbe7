"""Exact scalar arithmetic for expression evaluation.

Exact mode works over the Gaussian rationals: plain ``int``/``Fraction``
values for real quantities, and :class:`QI` when an imaginary part is
present (wave-function currents carry a factor of i).  Float mode uses
``float``/``complex``.
"""
from __future__ import annotations

from fractions import Fraction


class QI:
    """Gaussian rational ``re + im*i`` with exact components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        other = _as_qi(other)
        if other is NotImplemented:
            return NotImplemented
        return QI(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_qi(other)
        if other is NotImplemented:
            return NotImplemented
        return QI(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _as_qi(other)
        if other is NotImplemented:
            return NotImplemented
        return QI(other.re - self.re, other.im - self.im)

    def __mul__(self, other):
        other = _as_qi(other)
        if other is NotImplemented:
            return NotImplemented
        return QI(self.re * other.re - self.im * other.im,
                  self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def inverse(self):
        d = self.re * self.re + self.im * self.im
        if d == 0:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        return QI(self.re / d, -self.im / d)

    def __truediv__(self, other):
        other = _as_qi(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _as_qi(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = QI(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __neg__(self):
        return QI(-self.re, -self.im)

    # -- comparisons / conversions --------------------------------------
    def __eq__(self, other):
        other = _as_qi(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QI({self.re!r}, {self.im!r})"


I_UNIT = QI(0, 1)

EXACT_TYPES = (int, Fraction, QI)


def _as_qi(v):
    if isinstance(v, QI):
        return v
    if isinstance(v, (int, Fraction)):
        return QI(v)
    return NotImplemented


def is_exact(v) -> bool:
    return isinstance(v, EXACT_TYPES)


def normalize_exact(v):
    """Narrow a scalar to its simplest exact representation."""
    if isinstance(v, QI):
        if v.im == 0:
            v = v.re
        else:
            return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    return v


def to_complex(v) -> complex:
    if isinstance(v, QI):
        return complex(v)
    return complex(v)


def abs2(v):
    """Squared modulus; exact for exact inputs."""
    if isinstance(v, QI):
        return v.re * v.re + v.im * v.im
    if isinstance(v, (int, Fraction)):
        return v * v
    c = complex(v)
    return c.real * c.real + c.imag * c.imag


def abs_float(v) -> float:
    return abs(to_complex(v))


def is_zero(v) -> bool:
    if isinstance(v, QI):
        return v.re == 0 and v.im == 0
    return v == 0


def scalar_key(v):
    """Deterministic, hashable identity of a scalar (for expression hashing)."""
    if isinstance(v, QI):
        return (2, v.re.numerator, v.re.denominator, v.im.numerator, v.im.denominator)
    if isinstance(v, Fraction):
        return (1, v.numerator, v.denominator)
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, complex):
        return (4, v.real, v.imag)
    return (3, float(v))
