"""Symbolic-numeric verification of point-symmetry algebras for
continuity-type and nonlinear Schrodinger-type systems, plus a 1-D
split-step spectral solver with conservation-law monitors."""

__version__ = "0.1.0"
