"""1-D split-step spectral solver for the nonlinear wave equation
``i u_t + 1/2 u_xx = (Lap|u|/|u|) (N(sigma) + i M(sigma)) u`` with
``sigma = |u| Lap|u| / (grad|u|)^2``, on a periodic domain [-L, L).

Strang splitting: exact spectral half-steps for the linear part around a
classical four-stage explicit (RK4) substep for the pointwise nonlinear
part, with spectral differentiation of |u| and floored denominators.
Monitors check the continuity and Fokker-Planck structure of the density
and current, and Galilei-boost covariance.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

EPS_FLOOR = 1e-12


class BlowUpError(RuntimeError):
    pass


class DomainError(ValueError):
    pass


@dataclass
class Grid:
    """Periodic grid on [-L, L) with m points (power of two) and a time step."""
    L: float
    m: int
    dt: float
    t: float = 0.0

    def __post_init__(self):
        if self.m < 16 or self.m & (self.m - 1):
            raise ValueError("m must be a power of two, at least 16")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.L <= 0:
            raise ValueError("L must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.m

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.m)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.m, d=self.dx)


@dataclass
class State:
    grid: Grid
    u: np.ndarray
    eps: float = EPS_FLOOR

    def copy_with(self, u=None, t=None) -> "State":
        g = replace(self.grid, t=self.grid.t if t is None else t)
        return State(g, self.u.copy() if u is None else u, self.eps)


@dataclass
class NonlinearSpec:
    """Nonlinearity selection.

    presets: ``free`` (no nonlinear term), ``general`` (callables or
    polynomial coefficient lists for M, N in sigma), ``case2`` (the
    combination Lap R * M = -lam (Lap R + (grad R)^2 / R), which closes the
    density equation into Fokker-Planck form), ``hamilton-jacobi``
    (N = 1/2, M = 0).

    Polynomials in sigma of degree >= 1 make the coefficient singular at
    critical points of |u| (sigma blows up where grad|u| = 0), so stable
    runs want constant M, N or one of the safe presets.
    """
    preset: str = "free"
    M: object = None            # callable sigma -> array, or None
    N: object = None
    lam: float = 0.0
    m_coeffs: tuple = ()
    n_coeffs: tuple = ()

    @classmethod
    def free(cls) -> "NonlinearSpec":
        return cls("free")

    @classmethod
    def general(cls, m_coeffs=(), n_coeffs=()) -> "NonlinearSpec":
        m_coeffs = tuple(float(c) for c in m_coeffs)
        n_coeffs = tuple(float(c) for c in n_coeffs)
        return cls("general",
                   M=_poly_callable(m_coeffs), N=_poly_callable(n_coeffs),
                   m_coeffs=m_coeffs, n_coeffs=n_coeffs)

    @classmethod
    def case2(cls, lam: float) -> "NonlinearSpec":
        return cls("case2", lam=float(lam))

    @classmethod
    def hamilton_jacobi(cls) -> "NonlinearSpec":
        return cls("hamilton-jacobi", N=lambda s: np.full_like(s, 0.5),
                   M=lambda s: np.zeros_like(s), n_coeffs=(0.5,), m_coeffs=())

    @property
    def is_free(self) -> bool:
        if self.preset == "free":
            return True
        if self.preset == "general":
            return not any(self.m_coeffs) and not any(self.n_coeffs)
        if self.preset == "case2":
            return self.lam == 0.0
        return False

    def describe(self) -> dict:
        return {"preset": self.preset, "lam": self.lam,
                "M": list(self.m_coeffs), "N": list(self.n_coeffs)}


def _poly_callable(coeffs):
    if not coeffs:
        return lambda s: np.zeros_like(s)
    c = np.asarray(coeffs, dtype=float)
    return lambda s: np.polynomial.polynomial.polyval(s, c)


@dataclass
class Trajectory:
    """Snapshots at a fixed output cadence plus monitor metadata."""
    times: list
    states: list
    masses: list
    spec: NonlinearSpec
    dt: float
    snap_every: int
    blown_up: bool = False

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("snapshot times must be strictly increasing")

    @property
    def dt_out(self) -> float:
        return self.dt * self.snap_every


# ----------------------------------------------------------------------
# fields and initial data

def gaussian_packet(grid: Grid, x0: float = 0.0, k0: float = 0.0, w: float = 1.0) -> State:
    """Normalized Gaussian (pi w^2)^{-1/4} exp(-(x-x0)^2/(2w^2) + i k0 x)."""
    if w <= 0:
        raise ValueError("w must be positive")
    x = grid.x
    u = (np.pi * w * w) ** (-0.25) * np.exp(-((x - x0) ** 2) / (2 * w * w) + 1j * k0 * x)
    s = State(grid, u)
    if abs(mass(s) - 1.0) > 1e-12:
        raise DomainError("packet too wide for the domain (mass tail above 1e-12)")
    return s


def free_gaussian_analytic(grid: Grid, t: float, x0: float = 0.0, k0: float = 0.0,
                           w: float = 1.0) -> np.ndarray:
    """Closed-form dispersing Gaussian for i u_t + 1/2 u_xx = 0."""
    x = grid.x
    z = 1.0 + 1j * t / (w * w)
    return ((np.pi * w * w) ** (-0.25) / np.sqrt(z)
            * np.exp(1j * (k0 * x - 0.5 * k0 * k0 * t))
            * np.exp(-((x - x0 - k0 * t) ** 2) / (2 * (w * w + 1j * t))))


def mass(s: State) -> float:
    """dx * sum |u|^2; conserved by the linear step and by M = 0 dynamics."""
    return float(s.grid.dx * np.sum(np.abs(s.u) ** 2))


def spectral_dx(u: np.ndarray, grid: Grid) -> np.ndarray:
    out = np.fft.ifft(1j * grid.k * np.fft.fft(u))
    return out.real if np.isrealobj(u) else out


def spectral_dxx(u: np.ndarray, grid: Grid) -> np.ndarray:
    out = np.fft.ifft(-(grid.k ** 2) * np.fft.fft(u))
    return out.real if np.isrealobj(u) else out


# ----------------------------------------------------------------------
# nonlinear coefficient and time stepping

TAIL_CUT = 1e-9     # relative amplitude below which the coefficient is zeroed


def _nonlinear_rhs(u: np.ndarray, grid: Grid, spec: NonlinearSpec, eps: float) -> np.ndarray:
    """du/dt for the pointwise substep i u_t = (Lap A / A)(N + iM) u, A = |u|.

    Denominators are floored at ``eps``.  Where the amplitude falls below
    TAIL_CUT relative to its maximum the coefficient is zeroed: there the
    spectral Lap A is pure roundoff over a floored denominator, and letting
    it rotate the tail feeds a spurious split-step resonance.
    """
    a = np.abs(u)
    af = np.maximum(a, eps)
    live = a >= TAIL_CUT * a.max()
    ax = spectral_dx(a, grid)
    axx = spectral_dxx(a, grid)
    if spec.preset == "case2":
        # Lap A * M = -lam (Lap A + (grad A)^2 / A): the full coefficient is
        # regular wherever A > 0, so it is assembled directly
        coef = -spec.lam * (axx / af + (ax / af) ** 2)
        return np.where(live, coef, 0.0) * u
    grad2 = np.maximum(ax * ax, eps)
    sigma = a * axx / grad2
    nval = spec.N(sigma) if spec.N is not None else 0.0
    mval = spec.M(sigma) if spec.M is not None else 0.0
    coef = -1j * (axx / af) * (nval + 1j * mval)
    return np.where(live, coef, 0.0) * u


def _rk4_substep(u: np.ndarray, grid: Grid, spec: NonlinearSpec, dt: float,
                 eps: float) -> np.ndarray:
    k1 = _nonlinear_rhs(u, grid, spec, eps)
    k2 = _nonlinear_rhs(u + 0.5 * dt * k1, grid, spec, eps)
    k3 = _nonlinear_rhs(u + 0.5 * dt * k2, grid, spec, eps)
    k4 = _nonlinear_rhs(u + dt * k3, grid, spec, eps)
    return u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def evolve(s: State, spec: NonlinearSpec, t_final: float, dt: float | None = None,
           snap_every: int = 100, c_stab: float = 0.5) -> Trajectory:
    """Integrate to ``t_final`` with Strang splitting.

    The nonlinear substep is CFL-limited: dt <= c_stab * dx^2 whenever the
    nonlinearity is active.  Non-finite values truncate the trajectory and
    set ``blown_up``.
    """
    grid = s.grid
    if dt is None:
        dt = grid.dt
    if dt <= 0:
        raise ValueError("dt must be positive")
    free = spec.is_free
    if not free and dt > c_stab * grid.dx ** 2 + 1e-15:
        raise ValueError(f"dt={dt} violates the nonlinear substep bound "
                         f"{c_stab}*dx^2={c_stab * grid.dx ** 2:.3e}")
    span = t_final - grid.t
    nsteps = int(round(span / dt))
    if abs(nsteps * dt - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError("t_final - t must be an integer number of steps")

    half = np.exp(-1j * (grid.k ** 2) * dt / 4.0)
    full = half * half
    u = s.u.copy()
    t = grid.t
    times = [t]
    states = [State(replace(grid, t=t), u.copy(), s.eps)]
    masses = [mass(states[0])]
    blown = False

    step = 0
    while step < nsteps:
        if free:
            u = np.fft.ifft(full * np.fft.fft(u))
        else:
            u = np.fft.ifft(half * np.fft.fft(u))
            u = _rk4_substep(u, grid, spec, dt, s.eps)
            u = np.fft.ifft(half * np.fft.fft(u))
        step += 1
        t = grid.t + step * dt
        if step % snap_every == 0 or step == nsteps:
            if not np.all(np.isfinite(u.view(float))):
                blown = True
                break
            st = State(replace(grid, t=t), u.copy(), s.eps)
            times.append(t)
            states.append(st)
            masses.append(mass(st))

    return Trajectory(times, states, masses, spec, dt, snap_every, blown_up=blown)


# ----------------------------------------------------------------------
# Galilei boosts

def galilei_boost(s: State, v: float) -> State:
    """Finite boost u'(t,x) = u(t, x - v t) exp(i(v x - v^2 t / 2)).

    The shift uses trigonometric interpolation; at t = 0 the boost reduces
    to multiplication by exp(i v x).
    """
    grid = s.grid
    t = grid.t
    shift = v * t
    u = s.u
    if shift != 0.0:
        u = np.fft.ifft(np.exp(-1j * grid.k * shift) * np.fft.fft(u))
    u = u * np.exp(1j * (v * grid.x - 0.5 * v * v * t))
    out = State(replace(grid, t=t), u, s.eps)
    _check_boundary(out)
    return out


def _check_boundary(s: State, frac: float = 0.05, tol: float = 1e-10) -> None:
    m = s.grid.m
    edge = max(1, int(frac * m))
    rho = np.abs(s.u) ** 2
    edge_mass = s.grid.dx * (np.sum(rho[:edge]) + np.sum(rho[-edge:]))
    if edge_mass > tol:
        raise DomainError(f"wrap-around contamination: boundary mass {edge_mass:.2e}")


def boost_covariance_error(s0: State, spec: NonlinearSpec, v: float, t_final: float,
                           dt: float | None = None, snap_every: int = 10 ** 9,
                           c_stab: float = 0.5) -> float:
    """Relative L2 distance between evolve-then-boost and boost-then-evolve."""
    traj_a = evolve(s0, spec, t_final, dt, snap_every, c_stab)
    if traj_a.blown_up:
        raise BlowUpError("evolution blew up on the unboosted path")
    ua = galilei_boost(traj_a.states[-1], v)
    sb0 = galilei_boost(s0, v)
    traj_b = evolve(sb0, spec, t_final, dt, snap_every, c_stab)
    if traj_b.blown_up:
        raise BlowUpError("evolution blew up on the boosted path")
    ub = traj_b.states[-1]
    _check_boundary(ub)
    num = np.linalg.norm(ua.u - ub.u)
    den = np.linalg.norm(ub.u)
    return float(num / den)


# ----------------------------------------------------------------------
# density, current, and residual monitors

def density_current_fields(s: State, mode: str = "classical", lam: float = 0.0):
    """rho = |u|^2 and the current; ``galilei`` adds lam * d_x rho."""
    rho = np.abs(s.u) ** 2
    ux = spectral_dx(s.u, s.grid)
    j = np.imag(np.conj(s.u) * ux)
    if mode == "galilei":
        j = j + lam * spectral_dx(rho, s.grid)
    elif mode != "classical":
        raise ValueError(f"unknown mode {mode!r}")
    return rho, j


def _case3_correction(s: State, spec: NonlinearSpec) -> np.ndarray:
    """Extra divergence 2 |u| Lap|u| M(sigma) carried by the amplitude equation."""
    a = np.abs(s.u)
    af = np.maximum(a, s.eps)
    ax = spectral_dx(a, s.grid)
    axx = spectral_dxx(a, s.grid)
    if spec.preset == "case2":
        return -2.0 * spec.lam * (a * axx + ax * ax)
    grad2 = np.maximum(ax * ax, s.eps)
    sigma = a * axx / grad2
    mval = spec.M(sigma) if spec.M is not None else np.zeros_like(a)
    return 2.0 * a * axx * mval


def _uniform_view(traj: Trajectory) -> Trajectory:
    """Drop a trailing off-cadence snapshot (the forced final state)."""
    dts = np.diff(traj.times)
    if len(dts) >= 2 and not np.isclose(dts[-1], dts[0], rtol=1e-8):
        traj = Trajectory(traj.times[:-1], traj.states[:-1], traj.masses[:-1],
                          traj.spec, traj.dt, traj.snap_every, traj.blown_up)
        dts = dts[:-1]
    if not np.allclose(dts, dts[0], rtol=1e-8):
        raise ValueError("snapshots must be uniformly spaced")
    return traj


def continuity_residual(traj: Trajectory, mode: str = "classical") -> list:
    """Relative L2 residual of rho_t + d_x j at interior snapshots.

    Time derivative by centered differences over the output cadence,
    current divergence spectrally.  ``case3`` subtracts the extra
    divergence produced by a nonzero M.
    """
    if len(traj.states) < 3:
        raise ValueError("need at least three snapshots")
    traj = _uniform_view(traj)
    dt_out = traj.times[1] - traj.times[0]
    fields = [density_current_fields(st) for st in traj.states]
    out = []
    for i in range(1, len(traj.states) - 1):
        rho_prev, _ = fields[i - 1]
        rho_next, _ = fields[i + 1]
        rho_i, j_i = fields[i]
        res = (rho_next - rho_prev) / (2 * dt_out) + spectral_dx(j_i, traj.states[i].grid)
        if mode == "case3":
            res = res - _case3_correction(traj.states[i], traj.spec)
        elif mode != "classical":
            raise ValueError(f"unknown mode {mode!r}")
        out.append(float(np.linalg.norm(res) / np.linalg.norm(rho_i)))
    return out


class PresetMismatch(ValueError):
    pass


def fokker_planck_residual(traj: Trajectory, lam: float) -> list:
    """Residual of rho_t + d_x j + lam * d_xx rho with the classical current."""
    if lam != 0.0:
        if traj.spec.preset != "case2" or traj.spec.lam != lam:
            raise PresetMismatch("trajectory was not produced with the matching "
                                 "case2 preset")
    if len(traj.states) < 3:
        raise ValueError("need at least three snapshots")
    traj = _uniform_view(traj)
    dt_out = traj.times[1] - traj.times[0]
    fields = [density_current_fields(st) for st in traj.states]
    out = []
    for i in range(1, len(traj.states) - 1):
        rho_prev, _ = fields[i - 1]
        rho_next, _ = fields[i + 1]
        rho_i, j_i = fields[i]
        grid = traj.states[i].grid
        res = ((rho_next - rho_prev) / (2 * dt_out) + spectral_dx(j_i, grid)
               + lam * spectral_dxx(rho_i, grid))
        out.append(float(np.linalg.norm(res) / np.linalg.norm(rho_i)))
    return out


def residual_richardson_ratios(traj: Trajectory, mode: str = "classical",
                               lam: float | None = None) -> list:
    """Residual ratios under output-cadence halving, via snapshot strides.

    Evaluates the residual of the same run at strides 4, 2, 1, anchored at
    one common interior time; second-order monitors give ratios near 4.
    """
    traj = _uniform_view(traj)
    ncommon = (len(traj.times) - 1) // 8 * 4     # interior index divisible by 4
    if ncommon < 4:
        raise ValueError("too few snapshots for a two-halving Richardson study")
    vals = []
    for stride in (4, 2, 1):
        sub = Trajectory(traj.times[::stride], traj.states[::stride],
                         traj.masses[::stride], traj.spec, traj.dt,
                         traj.snap_every * stride, traj.blown_up)
        series = (continuity_residual(sub, mode) if lam is None
                  else fokker_planck_residual(sub, lam))
        vals.append(series[ncommon // stride - 1])   # residual AT time index ncommon
    return [vals[0] / vals[1], vals[1] / vals[2]]
