"""Concrete evaluators for opaque function symbols.

A binding maps each symbol name to an object that can produce the value
and any formal partial derivative at a point.  Multivariate polynomials
with rational coefficients are the workhorse: they are differentiated
analytically, evaluate exactly on rational inputs, and double as float
evaluators.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement


class PolyFn:
    """Multivariate polynomial ``sum_c coeffs[degs] * prod args[m]**degs[m]``."""

    def __init__(self, arity: int, coeffs: dict[tuple[int, ...], Fraction]):
        self.arity = arity
        self.coeffs = {tuple(d): Fraction(c) for d, c in coeffs.items() if c != 0}
        self._dcache: dict[tuple[int, ...], "PolyFn"] = {}

    @classmethod
    def univariate(cls, coeffs) -> "PolyFn":
        """From an ascending coefficient list: ``[c0, c1, c2]`` is c0 + c1 s + c2 s^2."""
        return cls(1, {(d,): Fraction(c) for d, c in enumerate(coeffs)})

    @classmethod
    def constant(cls, c, arity: int = 1) -> "PolyFn":
        return cls(arity, {(0,) * arity: Fraction(c)})

    def derivative(self, dorder: tuple[int, ...]) -> "PolyFn":
        dorder = tuple(dorder)
        if len(dorder) != self.arity:
            raise ValueError("derivative index arity mismatch")
        hit = self._dcache.get(dorder)
        if hit is not None:
            return hit
        coeffs = dict(self.coeffs)
        for slot, times in enumerate(dorder):
            for _ in range(times):
                nxt: dict[tuple[int, ...], Fraction] = {}
                for degs, c in coeffs.items():
                    d = degs[slot]
                    if d == 0:
                        continue
                    nd = degs[:slot] + (d - 1,) + degs[slot + 1:]
                    nxt[nd] = nxt.get(nd, Fraction(0)) + c * d
                coeffs = nxt
        out = PolyFn(self.arity, coeffs)
        self._dcache[dorder] = out
        return out

    def __call__(self, *args):
        if len(args) != self.arity:
            raise ValueError("argument count mismatch")
        total = 0
        for degs, c in self.coeffs.items():
            term = c
            for a, d in zip(args, degs):
                if d:
                    term = term * a ** d
            total = total + term
        return total

    def eval_deriv(self, dorder, args):
        return self.derivative(tuple(dorder))(*args)

    def __repr__(self):
        return f"PolyFn({self.arity}, {dict(self.coeffs)!r})"


@dataclass
class FunctionBinding:
    """Named evaluators for the opaque symbols of an expression."""
    table: dict[str, PolyFn] = field(default_factory=dict)

    def bind(self, name: str, fn: PolyFn) -> "FunctionBinding":
        self.table[name] = fn
        return self

    def eval(self, name: str, dorder, args):
        fn = self.table.get(name)
        if fn is None:
            from .calculus import EvaluationError
            raise EvaluationError(f"missing function binding for {name!r}")
        return fn.eval_deriv(dorder, args)

    def __contains__(self, name):
        return name in self.table


def random_poly(arity: int, rng: random.Random, max_degree: int = 3,
                max_coeff: int = 9) -> PolyFn:
    """Random polynomial with rational coefficients, total degree <= max_degree."""
    coeffs: dict[tuple[int, ...], Fraction] = {}
    for total in range(max_degree + 1):
        for combo in combinations_with_replacement(range(arity), total):
            degs = [0] * arity
            for slot in combo:
                degs[slot] += 1
            num = rng.randint(-max_coeff, max_coeff)
            den = rng.randint(1, max_coeff)
            coeffs[tuple(degs)] = Fraction(num, den)
    return PolyFn(arity, coeffs)


def random_binding(arities: dict[str, int], rng: random.Random,
                   max_degree: int = 3) -> FunctionBinding:
    fb = FunctionBinding()
    for name in sorted(arities):
        fb.bind(name, random_poly(arities[name], rng, max_degree))
    return fb
