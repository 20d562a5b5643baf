"""Command-line front end.

    stokes-evans <command> [options]

Commands: stokes, dispersion, basis, coeffs, bf, resonance, ind2, trace,
verify.  Options may also come from a flat ``key=value`` file given with
``--config``; explicit flags win.  Exit status is 0 on success, 1 when an
internal consistency check fails and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import acceptance
from .algebra import AlgebraError
from .evans import (NEWTON_TOL, ODE_RTOL, EvansError, bf_branch, evans_expand_origin,
                    evans_expand_resonance, ind2, monodromy_expand, resonance_find, trace_spectrum)
from .operator import (TruncationError, UnsupportedRegimeError, dispersion, dispersion_roots,
                       spectral_basis)
from .reduction import ReductionError, reduce_system
from .stokes import HierarchyError, WaveParameters, stokes_expand, surface_profile
from .textio import format_series

CONSISTENCY_ERRORS = (EvansError, ReductionError, AlgebraError, HierarchyError, TruncationError,
                      UnsupportedRegimeError)


@dataclass
class RunConfig:
    kappa: float = 1.0
    g: float = 1.0
    order: int = 3                 # Stokes order
    mmax: int = 2                  # delta truncation
    nmax: int = 2                  # eps truncation
    eps: float = 0.01
    gamma_min: float = 0.002
    gamma_max: float = 0.01
    steps: Optional[int] = None   # trace: 10 points, dispersion: 121
    N: int = 2
    sigma: str = "0"
    ode_tol: float = ODE_RTOL
    newton_tol: float = NEWTON_TOL
    out: Optional[str] = None
    dump_reduction: bool = False
    json: bool = False

    @property
    def params(self) -> WaveParameters:
        return WaveParameters(self.kappa, self.g)

    @property
    def orders(self):
        top = max(self.mmax, self.nmax)
        return tuple((m, n) for m in range(self.mmax + 1) for n in range(self.nmax + 1)
                     if 0 < m + n <= top)


class UsageError(Exception):
    pass


def load_config(path: str) -> Dict[str, str]:
    """Flat key=value file; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


_CASTERS = {"kappa": float, "g": float, "order": int, "mmax": int, "nmax": int, "eps": float,
            "gamma_min": float, "gamma_max": float, "steps": int, "N": int, "sigma": str,
            "ode_tol": float, "newton_tol": float, "out": str,
            "dump_reduction": lambda v: str(v).lower() in ("1", "true", "yes", "on"),
            "json": lambda v: str(v).lower() in ("1", "true", "yes", "on")}


def _coerce(name: str, value):
    if name not in _CASTERS:
        raise UsageError(f"unknown configuration key '{name}'")
    return _CASTERS[name](value)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value configuration file")
    common.add_argument("--kappa", type=float)
    common.add_argument("--g", type=float)
    common.add_argument("--order", type=int, help="Stokes expansion order (default 3)")
    common.add_argument("--mmax", type=int, help="delta truncation (default 2)")
    common.add_argument("--nmax", type=int, help="eps truncation (default 2)")
    common.add_argument("--out", help="directory for CSV and JSON artifacts")
    common.add_argument("--json", action="store_const", const=True, help="print the JSON report")
    common.add_argument("--dump-reduction", dest="dump_reduction", action="store_const", const=True,
                        help="print w^(m,n) and A^(m,n)(x) in text syntax")
    p = argparse.ArgumentParser(prog="stokes-evans", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("stokes", parents=[common], help="Stokes expansion profiles")
    s.add_argument("--eps", type=float)
    s = sub.add_parser("dispersion", parents=[common], help="dispersion curves and roots")
    s.add_argument("--sigma")
    s.add_argument("--steps", type=int)
    s = sub.add_parser("basis", parents=[common], help="eigenfunctions and dual functions")
    s.add_argument("--sigma")
    s = sub.add_parser("coeffs", parents=[common], help="monodromy coefficient tables")
    s.add_argument("--sigma", help="0 or resonance:N")
    sub.add_parser("bf", parents=[common], help="Benjamin-Feir branch coefficients")
    s = sub.add_parser("resonance", parents=[common], help="resonance location and Evans coefficients")
    s.add_argument("--N", type=int)
    s = sub.add_parser("ind2", parents=[common], help="the index ind2 at a resonance")
    s.add_argument("--N", type=int)
    s = sub.add_parser("trace", parents=[common], help="trace the two unstable branches")
    s.add_argument("--eps", type=float)
    s.add_argument("--gamma-min", dest="gamma_min", type=float)
    s.add_argument("--gamma-max", dest="gamma_max", type=float)
    s.add_argument("--steps", type=int)
    sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    return p


def build_config(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(ns, "config", None):
        try:
            values.update({k: _coerce(k, v) for k, v in load_config(ns.config).items()})
        except (OSError, ValueError) as err:
            raise UsageError(str(err)) from None
    for f in fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig(**values)
    if cfg.kappa <= 0 or cfg.g <= 0:
        raise UsageError("--kappa and --g must be positive")
    if cfg.steps is not None and cfg.steps < 1:
        raise UsageError("--steps must be positive")
    return cfg


# ----------------------------------------------------------------------------
# formatting

def fnum(x: float) -> str:
    x = float(x)
    if abs(x) < 1e-13:
        x = 0.0
    return f"{x:.12g}"


def fcomplex(z: complex) -> str:
    """Compact complex format; parts below 1e-12 of |z| are printed as 0."""
    z = complex(z)
    cut = 1e-12 * max(1.0, abs(z))
    re = fnum(z.real if abs(z.real) > cut else 0.0)
    im = fnum(z.imag if abs(z.imag) > cut else 0.0)
    if im == "0":
        return re
    if re == "0":
        return f"{im}i"
    sign = "-" if im.startswith("-") else "+"
    return f"{re}{sign}{im.lstrip('-')}i"


def fmatrix(a: np.ndarray) -> List[str]:
    cells = [[fcomplex(v) for v in row] for row in np.asarray(a)]
    w = max(len(c) for row in cells for c in row)
    return ["  [ " + "  ".join(c.rjust(w) for c in row) + " ]" for row in cells]


def jcomplex(z):
    z = complex(z)
    return [z.real, z.imag]


class Report:
    """Text lines plus a JSON-serializable dictionary; written once at the end."""

    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.lines: List[str] = []
        self.data: Dict[str, object] = {"command": command,
                                        "config": {k: v for k, v in asdict(cfg).items()
                                                   if k not in ("out", "json", "dump_reduction")}}
        self.csv: Dict[str, tuple] = {}

    def add(self, line: str = ""):
        self.lines.append(line)

    def table(self, name, header, rows):
        self.csv[name] = (header, rows)

    def emit(self, stdout) -> None:
        if self.cfg.json:
            stdout.write(json.dumps(self.data, indent=2, sort_keys=True) + "\n")
        else:
            stdout.write("\n".join(self.lines) + "\n")
        if self.cfg.out:
            os.makedirs(self.cfg.out, exist_ok=True)
            with open(os.path.join(self.cfg.out, f"{self.data['command']}.json"), "w") as fh:
                json.dump(self.data, fh, indent=2, sort_keys=True)
                fh.write("\n")
            for name, (header, rows) in self.csv.items():
                with open(os.path.join(self.cfg.out, name), "w", newline="") as fh:
                    _write_csv(fh, header, rows)


def _write_csv(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fnum(v) if isinstance(v, float) else v for v in r])


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    _write_csv(buf, header, rows)
    return buf.getvalue().rstrip("\n")


# ----------------------------------------------------------------------------
# commands

def _parse_sigma(cfg: RunConfig):
    """'0', a number, or 'resonance:N' -> (sigma, ResonanceData or None)."""
    s = str(cfg.sigma).strip()
    if s.startswith("resonance:"):
        try:
            N = int(s.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad resonance specifier '{s}'") from None
        if N < 2:
            raise UsageError("resonance order must be >= 2")
        r = resonance_find(N, cfg.params)
        return r.sigma, r
    try:
        return float(s), None
    except ValueError:
        raise UsageError(f"--sigma expects a number or resonance:N, got '{s}'") from None


def cmd_stokes(cfg: RunConfig, rep: Report):
    exp = stokes_expand(cfg.params, cfg.order)
    rep.add(f"Stokes expansion: kappa={fnum(cfg.kappa)} g={fnum(cfg.g)} c0={fnum(cfg.params.c0)} "
            f"order={cfg.order}")
    orders = []
    for n in range(1, cfg.order + 1):
        rep.add(f"phi_{n} = {format_series(exp.phi[n])}")
        rep.add(f"eta_{n} = {format_series(exp.eta[n])}")
        orders.append({"n": n, "phi": format_series(exp.phi[n]), "eta": format_series(exp.eta[n])})
    rep.add("c = " + ", ".join(f"c_{n}={fnum(c)}" for n, c in enumerate(exp.c)))
    xs, eta = surface_profile(exp, cfg.eps)
    rows = [(float(x), float(e)) for x, e in zip(xs, eta)]
    rep.table("stokes_profile.csv", ("x", "eta"), rows)
    rep.data.update(orders=orders, c=list(exp.c), eps=cfg.eps)


def cmd_dispersion(cfg: RunConfig, rep: Report):
    p = cfg.params
    steps = 121 if cfg.steps is None else max(cfg.steps, 2)
    ks = np.linspace(-3 * p.kappa, 3 * p.kappa, steps)
    sp, sm = dispersion(p, ks)
    rows = [(float(k), float(a), float(b)) for k, a, b in zip(ks, sp, sm)]
    rep.table("dispersion.csv", ("k", "sigma_plus", "sigma_minus"), rows)
    sigma, _ = _parse_sigma(cfg)
    roots = dispersion_roots(p, sigma)
    rep.add(f"roots of (sigma - c0 k)^2 = g|k| at sigma={fnum(sigma)}:")
    rep.add("label,k,multiplicity")
    for j, k, mult in roots.roots:
        rep.add(f"{j},{fnum(k)},{mult}")
    if not cfg.out and not cfg.json:
        rep.add("")
        rep.add(_csv_text(("k", "sigma_plus", "sigma_minus"), rows))
    rep.data.update(sigma=sigma, roots=[list(r) for r in roots.roots])


def cmd_basis(cfg: RunConfig, rep: Report):
    sigma, _ = _parse_sigma(cfg)
    b = spectral_basis(cfg.params, sigma)
    rep.add(f"spectral basis at sigma={fnum(sigma)}: labels {list(b.labels)}")
    entries = []
    for lab, k, ph, ps in zip(b.labels, b.ks, b.phis, b.psis):
        rep.add(f"k_{lab} = {fnum(k)}")
        for name, st in (("phi", ph), ("psi", ps)):
            comps = [format_series(c) for c in st.components()]
            rep.add(f"  {name}_{lab} = ({comps[0]}; {comps[1]}; {comps[2]})")
        entries.append({"label": lab, "k": k, "phi": [format_series(c) for c in ph.components()],
                        "psi": [format_series(c) for c in ps.components()]})
    err = float(np.max(np.abs(b.gram() - np.eye(b.dim))))
    rep.add(f"max |<phi_j, psi_i> - delta_ij| = {err:.2e}")
    rep.data.update(sigma=sigma, basis=entries, biorthogonality_error=err)
    if err > 1e-10:
        raise EvansError("biorthogonality check failed")


def _reduce(cfg: RunConfig, sigma: float):
    st = stokes_expand(cfg.params, max(cfg.order, cfg.nmax))
    return reduce_system(st, sigma, orders=cfg.orders)


def _dump(rep: Report, red):
    rep.add("reduction dump:")
    for o, mats in sorted(red.A_terms.items()):
        for i, row in enumerate(mats):
            for j, e in enumerate(row):
                if e:
                    rep.add(f"  A^{o}[{i + 1},{j + 1}](x) = {format_series(e)}")
    for o, ws in sorted(red.w_terms.items()):
        for lab, w in zip(red.basis.labels, ws):
            comps = [format_series(c) for c in w.components()]
            rep.add(f"  w^{o}_{lab} = ({comps[0]}; {comps[1]}; {comps[2]})")


def cmd_coeffs(cfg: RunConfig, rep: Report):
    sigma, res = _parse_sigma(cfg)
    red = _reduce(cfg, sigma)
    mono = monodromy_expand(red)
    head = f"monodromy coefficients a^(m,n)(T) at sigma={fnum(sigma)}"
    if res is not None:
        head += f" (resonance N={res.N}: k2={fnum(res.k2)}, k4={fnum(res.k4)})"
    rep.add(head)
    rep.add(f"basis labels {list(red.basis.labels)}, k = {[fnum(k) for k in red.ks]}")
    table = {}
    for o in mono.orders:
        rep.add(f"a^{o}(T) =")
        for line in fmatrix(mono[o]):
            rep.add(line)
        table[f"{o[0]},{o[1]}"] = [[jcomplex(v) for v in row] for row in mono[o]]
    if cfg.dump_reduction:
        _dump(rep, red)
    rep.data.update(sigma=sigma, labels=list(red.basis.labels), ks=list(red.ks), a=table)


def _origin(cfg: RunConfig):
    return evans_expand_origin(monodromy_expand(_reduce(cfg, 0.0)))


def cmd_bf(cfg: RunConfig, rep: Report):
    ev = _origin(cfg)
    br = bf_branch(ev, cfg.params)
    rep.add(f"Benjamin-Feir branch at kappa={fnum(cfg.kappa)}, c0={fnum(cfg.params.c0)}")
    rep.add(f"alpha^(1,0) = {fcomplex(br.alpha10)}")
    rep.add(f"alpha^(1,1) = {fcomplex(br.alpha11[0])}, {fcomplex(br.alpha11[1])}")
    rep.add(f"rejected root of the cubic: {', '.join(fcomplex(r) for r in br.diagnostics['rejected_alpha10'])}")
    rep.add(f"gamma^2 eps^2 coefficient: {fcomplex(br.diagnostics['gamma2eps2'])}")
    rep.add("d^(l,m,n) (coefficient of delta^l gamma^m eps^n; unavailable = needs a^(1,2)):")
    d = {}
    for key, v in sorted(ev.d.items()):
        if v is None:
            rep.add(f"  d{key} = unavailable")
        elif abs(v) > 1e-10:
            rep.add(f"  d{key} = {fcomplex(v)}")
        d[",".join(map(str, key))] = None if v is None else jcomplex(v)
    rep.data.update(alpha10=jcomplex(br.alpha10), alpha11=[jcomplex(a) for a in br.alpha11],
                    rejected=[jcomplex(r) for r in br.diagnostics["rejected_alpha10"]], d=d)


def _resonance(cfg: RunConfig):
    if cfg.N < 2:
        raise UsageError("--N must be >= 2")
    res = resonance_find(cfg.N, cfg.params)
    mono = monodromy_expand(_reduce(cfg, res.sigma))
    return res, evans_expand_resonance(mono, res)


def cmd_resonance(cfg: RunConfig, rep: Report):
    res, ev = _resonance(cfg)
    rep.add(f"resonance N={res.N}: sigma={fnum(res.sigma)} k2={fnum(res.k2)} k4={fnum(res.k4)}")
    rep.add("coefficients of Delta(i sigma + delta, k4 + gamma; eps):")
    disp = ev.diagnostics["display"]
    for name, v in disp.items():
        rep.add(f"  {name}: {fcomplex(v)}")
    rep.data.update(N=res.N, sigma=res.sigma, k2=res.k2, k4=res.k4,
                    coefficients={k: jcomplex(v) for k, v in disp.items()})


def cmd_ind2(cfg: RunConfig, rep: Report):
    res, ev = _resonance(cfg)
    out = ind2(ev)
    rep.add(f"resonance N={res.N}: sigma={fnum(res.sigma)}")
    rep.add(f"ind2 = {fcomplex(out.ind2)}")
    rep.add(f"ratio = {fcomplex(out.diagnostics['ratio'])}")
    rep.add(f"alpha^(0,2) roots: {', '.join(fcomplex(r) for r in out.alpha02)}")
    rep.add(f"verdict: {out.diagnostics['verdict']}")
    rep.data.update(N=res.N, ind2=jcomplex(out.ind2), ratio=jcomplex(out.diagnostics["ratio"]),
                    alpha02=[jcomplex(r) for r in out.alpha02], verdict=out.diagnostics["verdict"])


def cmd_trace(cfg: RunConfig, rep: Report):
    gammas = list(np.linspace(cfg.gamma_min, cfg.gamma_max, 10 if cfg.steps is None else cfg.steps))
    try:
        red = _reduce(cfg, 0.0)
        rows = trace_spectrum(cfg.params, cfg.eps, gammas, reduced=red,
                              newton_tol=cfg.newton_tol, rtol=cfg.ode_tol)
    except ValueError as err:
        if isinstance(err, CONSISTENCY_ERRORS):
            raise
        raise UsageError(str(err)) from None
    header = ("gamma", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2")
    table = [(float(g), l1.real, l1.imag, l2.real, l2.imag) for g, l1, l2 in rows]
    rep.table("trace.csv", header, table)
    rep.add(_csv_text(header, table))
    rep.data.update(rows=[[float(v) for v in r] for r in table])


def cmd_verify(cfg: RunConfig, rep: Report):
    results = acceptance.run_all()
    for r in results:
        rep.add(r.line(timing=False))          # wall-clock times would break byte-identical reports
    failed = [r for r in results if not r.passed]
    rep.add(f"{len(results) - len(failed)}/{len(results)} acceptance checks passed")
    rep.data.update(checks=[{"number": r.number, "name": r.name, "passed": r.passed,
                             "detail": r.detail} for r in results])
    if failed:
        raise EvansError("failing checks: " + ", ".join(f"{r.number}. {r.name}" for r in failed))


COMMANDS = {"stokes": cmd_stokes, "dispersion": cmd_dispersion, "basis": cmd_basis, "coeffs": cmd_coeffs,
            "bf": cmd_bf, "resonance": cmd_resonance, "ind2": cmd_ind2, "trace": cmd_trace,
            "verify": cmd_verify}


def run_command(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:          # argparse already printed the usage message
        return int(e.code or 0)
    try:
        cfg = build_config(ns)
    except (UsageError, TypeError, ValueError) as err:
        stderr.write(f"usage error: {err}\n")
        return 2
    rep = Report(cfg, ns.command)
    code = 0
    try:
        COMMANDS[ns.command](cfg, rep)
    except UsageError as err:
        stderr.write(f"usage error: {err}\n")
        return 2
    except CONSISTENCY_ERRORS as err:
        rep.data["error"] = f"{type(err).__name__}: {err}"
        rep.add(f"error: {type(err).__name__}: {err}")
        stderr.write(f"consistency check failed: {type(err).__name__}: {err}\n")
        code = 1
    rep.data["exit_code"] = code
    rep.emit(stdout)
    return code


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
