"""Command-line harness.

Subcommands: ``verify`` (invariance suites), ``brackets`` (structure
constants), ``simulate`` / ``boost-test`` (solver runs with monitor CSVs),
and ``report`` (aggregate traceability table).  All randomized commands
require ``--seed`` and are byte-reproducible given one.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 numeric
blow-up.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction

from . import catalog
from .liesym import (on_shell_residual, closure_table, NonClosure,
                     RankDeficient, InvarianceReport)
from .symcore import FunctionBinding, PolyFn

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BLOWUP = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    system: str = ""
    algebra: str = ""
    generator: str = ""
    n: int = 1
    trials: int = 25
    seed: int | None = None
    tol: float = 1e-9
    mode: str = "exact"
    expect_fail: bool = False
    fail_floor: float = 0.01
    lam: Fraction = Fraction(0)
    phi: str = "random"
    m_coeffs: tuple = ()
    n_coeffs: tuple = ()
    # solver parameters
    m: int = 1024
    L: float = 20.0
    dt: float = 1e-3
    t_final: float = 1.0
    v: float = 1.0
    x0: float = 0.0
    k0: float = 0.0
    w: float = 1.0
    snap_every: int = 100
    preset: str = "free"
    out: str = ""

    def validate(self, needs_seed: bool) -> None:
        if needs_seed and self.seed is None:
            raise UsageError("--seed is required for randomized commands")
        if self.n < 1:
            raise UsageError("--n must be >= 1")
        if self.trials < 1:
            raise UsageError("--trials must be >= 1")
        if self.mode not in ("exact", "float"):
            raise UsageError("--mode must be exact or float")


class UsageError(ValueError):
    pass


# ----------------------------------------------------------------------
# registries

def _coeff_list(text: str) -> tuple:
    if not text:
        return ()
    return tuple(Fraction(part) for part in text.split(","))


def _system_builder(cfg: RunConfig):
    key = cfg.system
    n = cfg.n
    if key == "continuity":
        return catalog.continuity_equation(n)
    if key == "fokker-planck":
        return catalog.fokker_planck_system(cfg.lam, n)
    if key == "galilei-current":
        return catalog.wave_continuity_system(
            catalog.density_current("galilei", n), "galilei-current")
    if key == "counterexample-g":
        return catalog.theorem2_counterexample("g", n)
    if key == "counterexample-f":
        return catalog.theorem2_counterexample("f", n)
    if key == "free-phase":
        phi_mode = {"random": "opaque", "zero": "zero",
                    "lambda-r2": "lambda-r2"}.get(cfg.phi, "poly")
        if phi_mode == "poly":
            raise UsageError("--phi must be zero, random, or lambda-r2")
        return catalog.phase_amplitude_system(phi_mode, "zero", n, lam=cfg.lam)
    if key == "free-phase-corollary":
        return catalog.phase_amplitude_system("lambda-r2", "corollary", n, lam=cfg.lam)
    if key == "eq14":
        return catalog.schrodinger_full_algebra_system(n)
    if key == "ag2":
        return catalog.ag2_invariant_system(n)
    raise UsageError(f"unknown system key {key!r}")


def _algebra_builder(key: str, n: int, system=None):
    if key == "galilei":
        return catalog.galilei_algebra(n)
    if key == "conformal":
        return catalog.conformal_algebra(n)
    if key == "wave-galilei":
        return catalog.wave_galilei_algebra(n)
    if key == "phase-galilei":
        return catalog.phase_galilei_algebra(n)
    if key == "schrodinger-full":
        return catalog.schrodinger_full_algebra(n)
    if key == "ag2":
        root = bool(system is not None and system.params.get("dep") == "W")
        return catalog.ag2_phase_algebra(n, root=root)
    if key == "amplitude":
        return catalog.amplitude_generators(n)
    raise UsageError(f"unknown algebra key {key!r}")


SYSTEM_KEYS = ("continuity", "fokker-planck", "galilei-current",
               "counterexample-g", "counterexample-f", "free-phase",
               "free-phase-corollary", "eq14", "ag2")
ALGEBRA_KEYS = ("galilei", "conformal", "wave-galilei", "phase-galilei",
                "schrodinger-full", "ag2", "amplitude")


def _fixed_binding(cfg: RunConfig, system):
    """Fixed polynomial binding from CLI coefficient lists, if any."""
    fb = FunctionBinding()
    if cfg.m_coeffs:
        fb.bind("M", PolyFn(2, {(d, 0): c for d, c in enumerate(cfg.m_coeffs)})
                if system.name == "ag2" else PolyFn.univariate(cfg.m_coeffs))
    if cfg.n_coeffs:
        fb.bind("N", PolyFn(2, {(d, 0): c for d, c in enumerate(cfg.n_coeffs)})
                if system.name == "ag2" else PolyFn.univariate(cfg.n_coeffs))
    return fb if fb.table else None


# ----------------------------------------------------------------------
# output helpers

def _write_atomic(path: str, data: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(cfg: RunConfig, payload: dict) -> None:
    text = json.dumps(payload, sort_keys=True, indent=1, default=str) + "\n"
    if cfg.out:
        _write_atomic(cfg.out, text)
    sys.stdout.write(text)


# ----------------------------------------------------------------------
# commands

def cmd_verify(cfg: RunConfig) -> int:
    cfg.validate(needs_seed=True)
    system = _system_builder(cfg)
    if cfg.generator == "bad-gfield":
        fields = [("bad-gfield", catalog.bad_generator(cfg.n))]
    elif cfg.generator:
        fam = _algebra_builder(cfg.algebra, cfg.n, system)
        if cfg.generator not in fam.members:
            raise UsageError(f"unknown generator {cfg.generator!r} in {cfg.algebra!r}")
        fields = [(cfg.generator, fam.members[cfg.generator])]
    else:
        if not cfg.algebra:
            raise UsageError("need --algebra or --generator")
        fam = _algebra_builder(cfg.algebra, cfg.n, system)
        fields = list(fam.members.items())
    fb = _fixed_binding(cfg, system)
    mode = "rational-exact" if cfg.mode == "exact" else "float"
    reports = []
    for nm, v in fields:
        rep = on_shell_residual(system, v, trials=cfg.trials, seed=cfg.seed,
                                fb=fb, mode=mode)
        reports.append(rep)
    if cfg.expect_fail:
        ok = all(r.max_abs_residual >= cfg.fail_floor for r in reports)
    else:
        ok = all(r.passed and r.max_rel_residual <= max(cfg.tol, 0.0)
                 if r.mode == "float" else r.passed for r in reports)
    payload = {
        "command": "verify",
        "system": system.name,
        "algebra": cfg.algebra or cfg.generator,
        "n": cfg.n,
        "seed": cfg.seed,
        "mode": mode,
        "expect_fail": cfg.expect_fail,
        "reports": [r.to_dict() for r in reports],
        "pass": ok,
    }
    _emit(cfg, payload)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_brackets(cfg: RunConfig) -> int:
    cfg.validate(needs_seed=True)
    fam = _algebra_builder(cfg.algebra, cfg.n)
    members = dict(fam.members)
    if cfg.generator:
        names = cfg.generator.split(",")
        missing = [nm for nm in names if nm not in members]
        if missing:
            raise UsageError(f"unknown members {missing} in {cfg.algebra!r}")
        members = {nm: members[nm] for nm in names}
    try:
        table = closure_table(members, seed=cfg.seed)
    except NonClosure as exc:
        _emit(cfg, {"command": "brackets", "algebra": cfg.algebra,
                    "n": cfg.n, "seed": cfg.seed, "closed": False,
                    "witness": str(exc)})
        return EXIT_FAIL
    except RankDeficient as exc:
        _emit(cfg, {"command": "brackets", "algebra": cfg.algebra,
                    "n": cfg.n, "seed": cfg.seed, "closed": False,
                    "rank_deficient": True, "detail": str(exc)})
        return EXIT_FAIL
    lines = [",".join(["i", "j"] + table.names)]
    for row in table.to_rows():
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if cfg.out:
        _write_atomic(cfg.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def _solver_spec(cfg: RunConfig):
    from .simulator import NonlinearSpec
    if cfg.preset == "free":
        return NonlinearSpec.free()
    if cfg.preset == "general":
        return NonlinearSpec.general(cfg.m_coeffs, cfg.n_coeffs)
    if cfg.preset == "case2":
        return NonlinearSpec.case2(float(cfg.lam))
    if cfg.preset == "hamilton-jacobi":
        return NonlinearSpec.hamilton_jacobi()
    raise UsageError(f"unknown preset {cfg.preset!r}")


def _traj_csv(traj) -> str:
    from .simulator import density_current_fields
    lines = ["t,x,re_u,im_u,rho,j"]
    for t, st in zip(traj.times, traj.states):
        rho, j = density_current_fields(st)
        x = st.grid.x
        for i in range(st.grid.m):
            u = st.u[i]
            lines.append(f"{t!r},{x[i]!r},{u.real!r},{u.imag!r},{rho[i]!r},{j[i]!r}")
    return "\n".join(lines) + "\n"


def _monitor_csv(traj, lam: float) -> str:
    from .simulator import continuity_residual, fokker_planck_residual
    cont = [float("nan")] * len(traj.times)
    fp = [float("nan")] * len(traj.times)
    if len(traj.times) >= 3:
        mode = "case3" if (traj.spec.preset == "general"
                           and any(traj.spec.m_coeffs)) else "classical"
        series = continuity_residual(traj, mode)
        for i, vvv in enumerate(series):
            cont[i + 1] = vvv
        if traj.spec.preset == "case2":
            series = fokker_planck_residual(traj, traj.spec.lam)
            for i, vvv in enumerate(series):
                fp[i + 1] = vvv
    lines = ["t,mass,cont_res,fp_res"]
    for i, t in enumerate(traj.times):
        lines.append(f"{t!r},{traj.masses[i]!r},{cont[i]!r},{fp[i]!r}")
    return "\n".join(lines) + "\n"


def cmd_simulate(cfg: RunConfig) -> int:
    from .simulator import Grid, gaussian_packet, evolve, BlowUpError, DomainError
    cfg.validate(needs_seed=False)
    spec = _solver_spec(cfg)
    try:
        grid = Grid(L=cfg.L, m=cfg.m, dt=cfg.dt)
        s0 = gaussian_packet(grid, cfg.x0, cfg.k0, cfg.w)
        traj = evolve(s0, spec, cfg.t_final, cfg.dt, cfg.snap_every)
    except (DomainError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    outdir = cfg.out or "."
    os.makedirs(outdir, exist_ok=True)
    _write_atomic(os.path.join(outdir, "trajectory.csv"), _traj_csv(traj))
    _write_atomic(os.path.join(outdir, "monitors.csv"),
                  _monitor_csv(traj, float(cfg.lam)))
    summary = {
        "command": "simulate",
        "preset": cfg.preset,
        "spec": spec.describe(),
        "grid": {"L": cfg.L, "m": cfg.m, "dt": cfg.dt,
                 "snap_every": cfg.snap_every},
        "t_final": traj.times[-1],
        "mass_initial": traj.masses[0],
        "mass_final": traj.masses[-1],
        "blown_up": traj.blown_up,
        "snapshots": len(traj.times),
    }
    _write_atomic(os.path.join(outdir, "summary.json"),
                  json.dumps(summary, sort_keys=True, indent=1) + "\n")
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_BLOWUP if traj.blown_up else EXIT_OK


def cmd_boost_test(cfg: RunConfig) -> int:
    from .simulator import (Grid, gaussian_packet, boost_covariance_error,
                            BlowUpError, DomainError)
    cfg.validate(needs_seed=False)
    spec = _solver_spec(cfg)
    try:
        grid = Grid(L=cfg.L, m=cfg.m, dt=cfg.dt)
        s0 = gaussian_packet(grid, cfg.x0, cfg.k0, cfg.w)
        err = boost_covariance_error(s0, spec, cfg.v, cfg.t_final, cfg.dt)
    except BlowUpError as exc:
        sys.stderr.write(f"blow-up: {exc}\n")
        return EXIT_BLOWUP
    except (DomainError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    payload = {"command": "boost-test", "preset": cfg.preset,
               "v": cfg.v, "t_final": cfg.t_final,
               "m": cfg.m, "L": cfg.L, "dt": cfg.dt,
               "covariance_error": err}
    _emit(cfg, payload)
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    """Aggregate traceability run: one row per claim, pass/fail status."""
    cfg.validate(needs_seed=True)
    from .acceptance import run_all
    rows = run_all(seed=cfg.seed)
    ok = all(r["status"] == "pass" for r in rows)
    outdir = cfg.out or "."
    os.makedirs(outdir, exist_ok=True)
    lines = ["claim,check,status,detail"]
    for r in rows:
        lines.append(f"{r['claim']},{r['check']},{r['status']},{r['detail']}")
    _write_atomic(os.path.join(outdir, "traceability.csv"), "\n".join(lines) + "\n")
    _write_atomic(os.path.join(outdir, "traceability.json"),
                  json.dumps({"seed": cfg.seed, "rows": rows,
                              "pass": ok}, sort_keys=True, indent=1) + "\n")
    for r in rows:
        sys.stdout.write(f"[{r['status'].upper():4s}] {r['claim']}: {r['check']}\n")
    return EXIT_OK if ok else EXIT_FAIL


# ----------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="galinv",
                                 description="point-symmetry verification and "
                                             "spectral simulation toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--n", type=int, default=1)
        p.add_argument("--out", default="")

    pv = sub.add_parser("verify", help="invariance residual suites")
    common(pv)
    pv.add_argument("--system", required=True, choices=SYSTEM_KEYS)
    pv.add_argument("--algebra", default="", choices=ALGEBRA_KEYS + ("",))
    pv.add_argument("--generator", default="")
    pv.add_argument("--trials", type=int, default=25)
    pv.add_argument("--mode", default="exact", choices=("exact", "float"))
    pv.add_argument("--tol", type=float, default=1e-9)
    pv.add_argument("--expect-fail", action="store_true")
    pv.add_argument("--fail-floor", type=float, default=0.01)
    pv.add_argument("--lambda", dest="lam", default="0")
    pv.add_argument("--phi", default="random")
    pv.add_argument("--M", dest="m_coeffs", default="")
    pv.add_argument("--N", dest="n_coeffs", default="")

    pb = sub.add_parser("brackets", help="structure-constant table")
    common(pb)
    pb.add_argument("--algebra", required=True, choices=ALGEBRA_KEYS)
    pb.add_argument("--members", dest="generator", default="",
                    help="comma-separated member subset")

    for name in ("simulate", "boost-test"):
        ps = sub.add_parser(name, help=f"solver: {name}")
        common(ps)
        ps.add_argument("--preset", default="free",
                        choices=("free", "general", "case2", "hamilton-jacobi"))
        ps.add_argument("--M", dest="m_coeffs", default="")
        ps.add_argument("--N", dest="n_coeffs", default="")
        ps.add_argument("--lambda", dest="lam", default="0")
        ps.add_argument("--m", type=int, default=1024)
        ps.add_argument("--L", type=float, default=20.0)
        ps.add_argument("--dt", type=float, default=1e-3)
        ps.add_argument("--t-final", type=float, default=1.0)
        ps.add_argument("--v", type=float, default=1.0)
        ps.add_argument("--x0", type=float, default=0.0)
        ps.add_argument("--k0", type=float, default=0.0)
        ps.add_argument("--w", type=float, default=1.0)
        ps.add_argument("--snap-every", type=int, default=100)

    pr = sub.add_parser("report", help="aggregate traceability table")
    common(pr)
    return ap


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in vars(args):
        if name in ("command",):
            continue
        val = getattr(args, name)
        attr = {"t_final": "t_final", "snap_every": "snap_every"}.get(name, name)
        if attr in ("m_coeffs", "n_coeffs") and isinstance(val, str):
            val = _coeff_list(val)
        if attr == "lam" and isinstance(val, str):
            val = Fraction(val)
        if hasattr(cfg, attr):
            setattr(cfg, attr, val)
    return cfg


COMMANDS = {
    "verify": cmd_verify,
    "brackets": cmd_brackets,
    "simulate": cmd_simulate,
    "boost-test": cmd_boost_test,
    "report": cmd_report,
}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    cfg = config_from_args(args)
    try:
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
