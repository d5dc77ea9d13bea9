"""Command-line front end: profile generation, admissibility scans, mode
families, eigenvalue hunts, and field exports.

All outputs are deterministic (fixed quadrature orders and iteration
schedules, no wall clock); every file carries a metadata header with the
config hash and the paper-gap choices (delta0, window endpoints,
tolerances) so runs are auditable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .baseflow import BaseFlow, DomainError, ShootingError, solve_blasius, tanh_profile
from .eigensolver import (ConvergenceError, FloorError, Mode, find_eigenvalue,
                          reconstruct_fields, residual_check)
from .langer import MapError, build_langer_map
from .outer import outer_basis
from .rayleigh import PrecisionError, critical_window, homogeneous_phi
from .thermo import temperature_profile

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_NUMERICAL = 3

_DOMAIN_ERRORS = (DomainError, ValueError)
_NUMERICAL_ERRORS = (ShootingError, MapError, PrecisionError, FloorError,
                     ConvergenceError, RuntimeError)


@dataclass
class RunConfig:
    """Validated input for one CLI run; flags override file values."""

    profile: str = "blasius"
    ymax: float = 20.0
    n: int = 2000
    mach: float = 3.0
    gamma: float = 1.4
    cr: float = 0.8
    cr_min: float | None = None
    cr_max: float | None = None
    step: float = 1e-3
    alpha: float | None = None
    alpha_min: float = 10.0
    alpha_max: float = 60.0
    ci_seed: float = 1e-4
    sign_target: int = 1
    out: str = "out.dat"
    inp: str | None = None
    dump_langer: str | None = None
    dump_basis: str | None = None
    dump_phi: str | None = None
    quiet: bool = False
    json_log: bool = False
    threads: int = field(default_factory=lambda: max(
        1, int(os.environ.get("MACKSOLVE_THREADS", "1"))))

    _FIELDS = None

    def validate(self, command: str) -> None:
        if self.profile not in ("blasius", "tanh"):
            raise DomainError(f"unknown profile {self.profile!r}")
        if self.mach <= 1.0:
            raise DomainError("mach must exceed 1 (supersonic base flow)")
        if self.gamma <= 1.0:
            raise DomainError("gamma must exceed 1")
        if command in ("modes", "eigen") and not (1.0 - 1.0 / self.mach < self.cr < 1.0):
            raise DomainError(
                f"cr = {self.cr} outside the supersonic-mode window "
                f"({1.0 - 1.0 / self.mach:.6f}, 1)")
        if command == "scan-j" and self.step > 1e-3 + 1e-15:
            raise DomainError("scan step must be <= 1e-3")
        if command == "modes" and not (0 < self.alpha_min < self.alpha_max):
            raise DomainError("need 0 < alpha-min < alpha-max")
        if command == "eigen":
            if self.alpha is None or self.alpha <= 0:
                raise DomainError("eigen requires --alpha > 0")
            if self.ci_seed < 1e-13:
                raise FloorError("ci-seed below the 1e-13 double-precision floor")
        if command == "fields" and not self.inp:
            raise DomainError("fields requires --in mode.json")

    def hash(self) -> str:
        skip = {"out", "inp", "dump_langer", "dump_basis", "dump_phi",
                "quiet", "json_log", "threads"}
        blob = json.dumps({k: v for k, v in self.__dict__.items()
                           if not k.startswith("_") and k not in skip},
                          sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _load_config_file(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise DomainError("config file must hold a JSON object")
    known = set(RunConfig.__dataclass_fields__) - {"inp", "threads"}
    unknown = set(data) - known
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}")
    return data


def _log(cfg: RunConfig, message: str, **payload):
    if cfg.quiet:
        return
    if cfg.json_log:
        print(json.dumps({"msg": message, **payload}, sort_keys=True), file=sys.stderr)
    else:
        extra = " ".join(f"{k}={v}" for k, v in payload.items())
        print(f"[macksolve] {message}" + (f" {extra}" if extra else ""), file=sys.stderr)


def _atomic_write(path: str, writer) -> None:
    """Write via a temp file and rename; partial outputs never survive."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".macksolve-")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta_lines(cfg: RunConfig, command: str, **extra) -> list[str]:
    items = {
        "generator": f"macksolve {__version__}",
        "command": command,
        "config_hash": cfg.hash(),
        "profile": cfg.profile,
        "mach": repr(cfg.mach),
        "gamma": repr(cfg.gamma),
    }
    items.update({k: repr(v) if isinstance(v, float) else str(v)
                  for k, v in extra.items()})
    return [f"# {k}={v}" for k, v in items.items()]


def _make_flow(cfg: RunConfig) -> BaseFlow:
    if cfg.profile == "blasius":
        return solve_blasius(cfg.ymax, cfg.n)
    return tanh_profile(max(cfg.ymax, 10.0), cfg.n)


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_baseflow(cfg: RunConfig) -> int:
    flow = _make_flow(cfg)
    _log(cfg, "baseflow solved", kind=flow.kind, n=flow.grid.size,
         decay_rate=round(flow.decay_rate, 6))

    def writer(fh):
        obj = flow.to_json()
        obj["meta"] = {"config_hash": cfg.hash(), "generator": f"macksolve {__version__}"}
        json.dump(obj, fh, sort_keys=True)

    _atomic_write(cfg.out, writer)
    return EXIT_OK


def cmd_scan_j(cfg: RunConfig) -> int:
    from .dispersion import admissible_set_scan

    flow = _make_flow(cfg)
    thermo = temperature_profile(flow, cfg.mach, cfg.gamma)
    rep = admissible_set_scan(thermo, flow, cfg.cr_min, cfg.cr_max, cfg.step)
    _log(cfg, "scan complete", samples=rep.c_r.size, intervals=len(rep.intervals))

    def writer(fh):
        for line in _meta_lines(cfg, "scan-j", step=cfg.step,
                                noise_floor=rep.noise_floor,
                                window_lo=rep.window[0], window_hi=rep.window[1],
                                intervals=";".join(f"({a:.6f},{b:.6f})" for a, b in rep.intervals)):
            fh.write(line + "\n")
        fh.write("c_r,J,admissible\n")
        for c, j, ok in zip(rep.c_r, rep.j, rep.admissible):
            fh.write(f"{_fmt(c)},{_fmt(j)},{int(ok)}\n")

    _atomic_write(cfg.out, writer)
    return EXIT_OK


def cmd_modes(cfg: RunConfig) -> int:
    from .dispersion import (DispersionContext, real_dispersion_roots,
                             select_unstable_subsequence)

    flow = _make_flow(cfg)
    thermo = temperature_profile(flow, cfg.mach, cfg.gamma)
    ctx = DispersionContext(thermo, flow, cfg.cr)
    family = real_dispersion_roots(ctx, cfg.alpha_min, cfg.alpha_max)
    try:
        select_unstable_subsequence(family, cfg.sign_target)
    except DomainError:
        pass  # too few roots to select: still report the family
    selected = {r.alpha for r in family.selected}
    _log(cfg, "mode family", roots=len(family.roots), selected=len(selected),
         w_y0=round(ctx.w_y0, 8))

    lm = ctx.lmap
    spacing = np.pi / ctx.w_y0

    def writer(fh):
        for line in _meta_lines(cfg, "modes", delta0=lm.delta0,
                                window_y1s=lm.y1s, window_y2s=lm.y2s,
                                w_y0=ctx.w_y0, c0_re=ctx.c0_coefficient().real,
                                alpha_min=cfg.alpha_min, alpha_max=cfg.alpha_max,
                                root_tol=1e-8, sign_target=cfg.sign_target):
            fh.write(line + "\n")
        fh.write("k,alpha_k,selected,theta_phase,predicted_spacing\n")
        for k, r in enumerate(family.roots):
            fh.write(f"{k},{_fmt(r.alpha)},{int(r.alpha in selected)},"
                     f"{_fmt(r.theta_phase)},{_fmt(spacing)}\n")

    _atomic_write(cfg.out, writer)

    if cfg.dump_langer:
        ys = np.linspace(0.0, flow.y_max, 801)
        eta = np.real(lm.eta(ys))
        deta = np.real(lm.deta(ys))
        w0 = lm.w0(ys)

        def wl(fh):
            for line in _meta_lines(cfg, "modes/dump-langer", delta0=lm.delta0):
                fh.write(line + "\n")
            fh.write("Y,eta,deta,w0\n")
            for row in zip(ys, eta, deta, w0):
                fh.write(",".join(_fmt(v) for v in row) + "\n")

        _atomic_write(cfg.dump_langer, wl)

    if cfg.dump_basis:
        basis = outer_basis(lm.with_alpha(0.5 * (cfg.alpha_min + cfg.alpha_max)))
        ys = np.linspace(0.0, min(flow.y_max, lm.y2s + 2.0), 801)
        A, _, B, _, a_exp, b_exp = basis.eval(ys)
        A = A * np.exp(a_exp)
        B = B * np.exp(b_exp)

        def wb(fh):
            for line in _meta_lines(cfg, "modes/dump-basis",
                                    alpha=0.5 * (cfg.alpha_min + cfg.alpha_max)):
                fh.write(line + "\n")
            fh.write("Y,A_re,A_im,B_re,B_im\n")
            for row in zip(ys, A.real, A.imag, B.real, B.imag):
                fh.write(",".join(_fmt(v) for v in row) + "\n")

        _atomic_write(cfg.dump_basis, wb)
    return EXIT_OK


def cmd_eigen(cfg: RunConfig) -> int:
    flow = _make_flow(cfg)
    thermo = temperature_profile(flow, cfg.mach, cfg.gamma)
    mode = find_eigenvalue(flow, thermo, cfg.alpha, complex(cfg.cr, cfg.ci_seed))
    fields = reconstruct_fields(mode, flow, thermo)
    residuals = residual_check(mode, flow, thermo, fields)
    _log(cfg, "eigenvalue converged", alpha=cfg.alpha,
         c=f"{mode.c.real:.8f}{mode.c.imag:+.3e}i",
         boundary_residual=f"{mode.boundary_residual:.2e}")

    def writer(fh):
        obj = mode.to_json()
        obj["residuals"] = {k: float(v) for k, v in residuals.items()}
        obj["meta"] = {
            "config_hash": cfg.hash(), "generator": f"macksolve {__version__}",
            "profile": cfg.profile, "ymax": cfg.ymax, "n": cfg.n,
            "mach": cfg.mach, "gamma": cfg.gamma, "ci_seed": cfg.ci_seed,
        }
        json.dump(obj, fh, sort_keys=True)

    _atomic_write(cfg.out, writer)

    if cfg.dump_phi:
        lm = build_langer_map(thermo, flow, mode.c, mode.alpha)
        win = critical_window(lm)
        phi = homogeneous_phi(lm, win, mode.alpha)
        ys = np.linspace(win.y1s, win.y2s, 601)
        pv = phi.phi(ys)
        psv = np.abs(phi.psi(ys))

        def wp(fh):
            for line in _meta_lines(cfg, "eigen/dump-phi", delta0=lm.delta0,
                                    window_y1s=win.y1s, window_y2s=win.y2s):
                fh.write(line + "\n")
            fh.write("Y,phi_re,phi_im,abs_psi\n")
            for row in zip(ys, pv.real, pv.imag, psv):
                fh.write(",".join(_fmt(v) for v in row) + "\n")

        _atomic_write(cfg.dump_phi, wp)
    return EXIT_OK


def cmd_fields(cfg: RunConfig) -> int:
    with open(cfg.inp) as fh:
        obj = json.load(fh)
    meta = obj.get("meta")
    if not meta:
        raise DomainError("mode file lacks the meta block needed to rebuild fields")
    sub = RunConfig(profile=meta["profile"], ymax=meta["ymax"], n=meta["n"],
                    mach=meta["mach"], gamma=meta["gamma"])
    flow = _make_flow(sub)
    thermo = temperature_profile(flow, sub.mach, sub.gamma)
    alpha = float(obj["alpha"])
    c = complex(obj["c"][0], obj["c"][1])
    y = np.array(obj["profile"]["Y"])
    p = np.array(obj["profile"]["P_re"]) + 1j * np.array(obj["profile"]["P_im"])
    # the wall derivative profile is rebuilt by one shooting pass at the
    # stored eigenvalue (mode files keep only P for compactness)
    from .eigensolver import shoot_pressure
    res = shoot_pressure(flow, thermo, alpha, c)
    mode = Mode(alpha=alpha, c=c, y=res.y, p=res.p, dp=res.dp,
                boundary_residual=abs(res.dp_wall), iterations=0)
    fields = reconstruct_fields(mode, flow, thermo)
    _log(cfg, "fields rebuilt", alpha=alpha, nodes=res.y.size)

    def writer(fh):
        for line in _meta_lines(cfg, "fields", alpha=alpha, c_re=c.real, c_im=c.imag):
            fh.write(line + "\n")
        fh.write("Y," + ",".join(f"{q}_{p}" for q in ("P", "rho", "U", "V", "T")
                                 for p in ("re", "im")) + "\n")
        for i, yv in enumerate(fields["Y"]):
            row = [yv]
            for q in ("P", "rho", "U", "V", "T"):
                row += [fields[q][i].real, fields[q][i].imag]
            fh.write(",".join(_fmt(v) for v in row) + "\n")

    _atomic_write(cfg.out, writer)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="macksolve",
        description="Unstable acoustic modes of supersonic boundary layers")
    ap.add_argument("--config", help="JSON config file (flags override)")
    ap.add_argument("--quiet", action="store_true")
    ap.add_argument("--json-log", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("baseflow", help="generate a base-flow profile")
    p.add_argument("--profile", choices=("blasius", "tanh"))
    p.add_argument("--ymax", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--out")

    p = sub.add_parser("scan-j", help="admissibility scan of the J integral")
    p.add_argument("--profile", choices=("blasius", "tanh"))
    p.add_argument("--mach", type=float)
    p.add_argument("--cr-min", dest="cr_min", type=float)
    p.add_argument("--cr-max", dest="cr_max", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--out")

    p = sub.add_parser("modes", help="real dispersion roots at fixed c_r")
    p.add_argument("--profile", choices=("blasius", "tanh"))
    p.add_argument("--mach", type=float)
    p.add_argument("--cr", type=float)
    p.add_argument("--alpha-min", dest="alpha_min", type=float)
    p.add_argument("--alpha-max", dest="alpha_max", type=float)
    p.add_argument("--sign-target", dest="sign_target", type=int, choices=(-1, 1))
    p.add_argument("--out")
    p.add_argument("--dump-langer", dest="dump_langer")
    p.add_argument("--dump-basis", dest="dump_basis")

    p = sub.add_parser("eigen", help="complex eigenvalue hunt at one alpha")
    p.add_argument("--profile", choices=("blasius", "tanh"))
    p.add_argument("--mach", type=float)
    p.add_argument("--cr", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--ci-seed", dest="ci_seed", type=float)
    p.add_argument("--out")
    p.add_argument("--dump-phi", dest="dump_phi")

    p = sub.add_parser("fields", help="rebuild physical fields from a mode file")
    p.add_argument("--in", dest="inp")
    p.add_argument("--out")
    return ap


_COMMANDS = {
    "baseflow": cmd_baseflow,
    "scan-j": cmd_scan_j,
    "modes": cmd_modes,
    "eigen": cmd_eigen,
    "fields": cmd_fields,
}


def parse_config(argv) -> tuple[RunConfig, str]:
    ap = build_parser()
    ns = ap.parse_args(argv)
    file_values = _load_config_file(ns.config) if ns.config else {}
    cfg = RunConfig(**file_values)
    for key, val in vars(ns).items():
        if key in ("config", "command") or val is None or val is False:
            continue
        setattr(cfg, key, val)
    cfg.validate(ns.command)
    return cfg, ns.command


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg, command = parse_config(argv)
    except FloorError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    _log(cfg, "config resolved", command=command, hash=cfg.hash())
    try:
        return _COMMANDS[command](cfg)
    except FloorError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
