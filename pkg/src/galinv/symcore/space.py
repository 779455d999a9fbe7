"""Jet-space declarations, coordinate naming, and jet points."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .expr import Expr, Ind, Jet
from .scalars import QI, is_exact

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")


@dataclass(frozen=True)
class JetSpace:
    """Independent coordinates (x0 = t first), dependents, and a max order.

    ``order`` bounds the derivative coordinates of interest; operations that
    create deeper coordinates auto-extend unless told otherwise.  Derivative
    coordinates are indexed by sorted multi-indices, so u_{01} and u_{10}
    are the same coordinate by construction.
    """
    independents: tuple[str, ...]
    dependents: tuple[str, ...]
    order: int = 2

    def __post_init__(self):
        names = self.independents + self.dependents
        if len(set(names)) != len(names):
            raise ValueError("coordinate names must be unique")
        for nm in names:
            if not _NAME_RE.match(nm) or nm in ("I", "D"):
                raise ValueError(f"bad coordinate name {nm!r}")
        if self.order < 0:
            raise ValueError("order must be >= 0")
        if self.n < 1:
            raise ValueError("need at least one spatial dimension")

    @property
    def n(self) -> int:
        """Spatial dimension (independents minus time)."""
        return len(self.independents) - 1

    @property
    def n_ind(self) -> int:
        return len(self.independents)

    def ind_index(self, name: str) -> int:
        return self.independents.index(name)

    def dep_index(self, name: str) -> int:
        return self.dependents.index(name)

    # -- coordinate naming ------------------------------------------------
    def atom(self, name: str) -> Expr:
        """Coordinate atom from a name like ``t``, ``rho``, ``Theta_xx`` or ``R_tx``."""
        if "_" in name:
            base, suffix = name.split("_", 1)
            if base not in self.dependents:
                raise KeyError(f"unknown dependent {base!r}")
            return Jet(self.dep_index(base), self._parse_suffix(suffix))
        if name in self.independents:
            return Ind(self.ind_index(name))
        if name in self.dependents:
            return Jet(self.dep_index(name), ())
        raise KeyError(f"unknown coordinate {name!r}")

    def _parse_suffix(self, suffix: str) -> tuple[int, ...]:
        # greedy longest-name match so x1x2 and txx both tokenize
        by_len = sorted(self.independents, key=len, reverse=True)
        midx = []
        pos = 0
        while pos < len(suffix):
            for nm in by_len:
                if suffix.startswith(nm, pos):
                    midx.append(self.ind_index(nm))
                    pos += len(nm)
                    break
            else:
                raise KeyError(f"cannot read derivative suffix {suffix!r}")
        return tuple(sorted(midx))

    def coord_name(self, e: Expr) -> str:
        if isinstance(e, Ind):
            return self.independents[e.index]
        if isinstance(e, Jet):
            base = self.dependents[e.dep]
            if not e.midx:
                return base
            return base + "_" + "".join(self.independents[i] for i in e.midx)
        raise TypeError("not a coordinate atom")


def sym(space: JetSpace, name: str) -> Expr:
    """Shorthand for :meth:`JetSpace.atom`."""
    return space.atom(name)


@dataclass
class JetPoint:
    """Total assignment of scalars to the coordinates an evaluation touches.

    ``mode`` is ``"exact"`` (ints/Fractions/Gaussian rationals) or
    ``"float"`` (floats/complex).  Keys are ``("i", idx)`` for independents
    and ``("j", dep, midx)`` for jet coordinates.
    """
    values: dict = field(default_factory=dict)
    mode: str = "exact"

    def __post_init__(self):
        if self.mode not in ("exact", "float"):
            raise ValueError("mode must be 'exact' or 'float'")

    @classmethod
    def from_names(cls, space: JetSpace, assignment: dict, mode: str = "exact") -> "JetPoint":
        vals = {}
        for name, v in assignment.items():
            a = space.atom(name)
            vals[point_key(a)] = _coerce_scalar(v, mode)
        return cls(vals, mode)

    def get(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise MissingCoordinate(f"jet point has no value for coordinate key {key}") from None

    def set_atom(self, atom: Expr, value):
        self.values[point_key(atom)] = value


class MissingCoordinate(KeyError):
    pass


def point_key(atom: Expr):
    if isinstance(atom, Ind):
        return ("i", atom.index)
    if isinstance(atom, Jet):
        return ("j", atom.dep, atom.midx)
    raise TypeError("not a coordinate atom")


def _coerce_scalar(v, mode: str):
    if mode == "exact":
        if isinstance(v, str):
            return Fraction(v)
        if is_exact(v):
            return v
        raise TypeError(f"exact mode needs exact scalars, got {type(v).__name__}")
    if isinstance(v, QI):
        return complex(v)
    return complex(v) if isinstance(v, complex) else float(v)
