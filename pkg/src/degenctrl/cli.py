"""Command line front end.

Exit status: 0 on success, 1 on usage errors, 2 when a certification step
(zero brackets, Gram residual, final state, mass consistency) fails.

Every flag may also be given in a ``--config`` file of ``key = value`` lines;
keys are the long flag names with or without the leading dashes, ``#``
starts a comment, and flags on the command line win over the file.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from typing import Dict, List, Optional

from . import __version__

FINAL_STATE_TOL = 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return "%.17g" % v


def _float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _mu(text: str):
    from .control import InitialData

    t = text.strip().lower()
    if t.startswith("e") and t[1:].isdigit() and int(t[1:]) >= 1:
        return InitialData.mode(int(t[1:]))
    try:
        return InitialData(tuple(_float_list(text)))
    except (ValueError, argparse.ArgumentTypeError):
        raise argparse.ArgumentTypeError(f"--mu takes eK or a comma separated list, got {text!r}")


def read_config(path: str) -> Dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            k, v = line.split("=", 1)
            out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return out


def _common(p):
    p.add_argument("--config", help="key = value file whose keys mirror the long flags")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.add_argument("--precision", choices=("double", "dd"),
                   help="starting precision of Gram solves (overrides DEGENCTRL_PRECISION)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="degenctrl", description="Spectral, moment and cost computations for "
                "u_t - (x^alpha u_x)_x on (0, ell), 1 <= alpha < 2.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("zeros", help="Bessel zeros with brackets and gap certificate")
    s.add_argument("--nu", type=float, required=True, help="Bessel order nu >= 0")
    s.add_argument("--n", type=int, default=10, help="number of zeros")
    _common(s)

    s = sub.add_parser("spectrum", help="eigenvalues, normalization and flux coefficients")
    s.add_argument("--alpha", type=float, required=True, help="degeneracy exponent in [1, 2)")
    s.add_argument("--ell", type=float, default=1.0, help="interval length")
    s.add_argument("--n-max", type=int, default=10, help="number of modes")
    _common(s)

    s = sub.add_parser("biortho", help="biorthogonal family and its residual certificate")
    s.add_argument("--alpha", type=float, required=True, help="degeneracy exponent in [1, 2)")
    s.add_argument("--ell", type=float, default=1.0, help="interval length")
    s.add_argument("--T", type=float, required=True, help="control time")
    s.add_argument("--N", type=int, default=8, help="number of controlled modes")
    s.add_argument("--tol", type=float, default=1e-8, help="residual tolerance")
    s.add_argument("--no-zero", action="store_true", help="leave out lambda_0 = 0")
    _common(s)

    for name, helptext in (("control-bd", "boundary control synthesis"),
                           ("control-loc", "distributed control on (a, b)")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--alpha", type=float, required=True, help="degeneracy exponent in [1, 2)")
        s.add_argument("--ell", type=float, default=1.0, help="interval length")
        s.add_argument("--T", type=float, required=True, help="control time")
        s.add_argument("--N", type=int, default=8, help="number of controlled modes")
        s.add_argument("--mu", type=_mu, default="e1",
                       help="initial data: eK for Phi_K or comma separated modal coefficients")
        s.add_argument("--tol", type=float, default=1e-8, help="Gram residual tolerance")
        s.add_argument("--samples", type=int, default=4097, help="time samples in the export")
        if name == "control-loc":
            s.add_argument("--a", type=float, default=0.3, help="left end of the control window")
            s.add_argument("--b", type=float, default=0.6, help="right end of the control window")
        _common(s)

    s = sub.add_parser("mass", help="eigenfunction mass on (a, b) over an alpha grid")
    s.add_argument("--alphas", type=_float_list, default=[1.0, 1.25, 1.5, 1.75, 1.9, 1.99],
                   help="comma separated alpha grid")
    s.add_argument("--m-max", type=int, default=20, help="largest mode index")
    s.add_argument("--a", type=float, default=0.3, help="left end")
    s.add_argument("--b", type=float, default=0.6, help="right end")
    s.add_argument("--ell", type=float, default=1.0, help="interval length")
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    _common(s)

    s = sub.add_parser("sweep", help="cost sweep over (alpha, T, ell) and rate fit")
    s.add_argument("--alphas", type=_float_list, default=[1.5, 1.6, 1.7, 1.8, 1.9, 1.95],
                   help="comma separated alpha grid")
    s.add_argument("--Ts", type=_float_list, default=[0.25, 0.5, 1.0], help="comma separated T grid")
    s.add_argument("--ells", type=_float_list, default=[1.0], help="comma separated ell grid")
    s.add_argument("--N", type=int, default=8, help="number of controlled modes")
    s.add_argument("--a", type=float, default=0.3, help="left end of the control window")
    s.add_argument("--b", type=float, default=0.6, help="right end of the control window")
    s.add_argument("--tol", type=float, default=1e-8, help="Gram residual tolerance")
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    _common(s)
    return p


def _subparser(parser, name):
    for act in parser._actions:
        if isinstance(act, argparse._SubParsersAction):
            return act.choices[name]
    raise KeyError(name)


def _parse(argv: List[str]) -> argparse.Namespace:
    parser = build_parser()
    # required flags may come from --config, so they are checked after merging
    required = {}
    for act in parser._actions:
        if isinstance(act, argparse._SubParsersAction):
            for name, sp in act.choices.items():
                required[name] = [a for a in sp._actions if a.required]
                for a in required[name]:
                    a.required = False
    ns = parser.parse_args(argv)
    sp = _subparser(parser, ns.command)
    if getattr(ns, "config", None):
        known = {a.dest: a for a in sp._actions if a.option_strings and a.dest not in ("help", "config")}
        conf = read_config(ns.config)
        given = {a.dest for a in sp._actions
                 if any(o in argv or any(x.startswith(o + "=") for x in argv) for o in a.option_strings)}
        for key, val in conf.items():
            if key not in known:
                raise UsageError(f"{ns.config}: unknown key {key!r} for {ns.command}")
            if key in given:
                continue
            act = known[key]
            if isinstance(act, argparse._StoreTrueAction):
                setattr(ns, key, val.lower() in ("1", "true", "yes", "on"))
                continue
            try:
                setattr(ns, key, act.type(val) if act.type else val)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{ns.config}: bad value for {key}: {exc}")
            if act.choices is not None and getattr(ns, key) not in act.choices:
                raise UsageError(f"{ns.config}: {key} must be one of {list(act.choices)}")
    missing = [a.option_strings[0] for a in required[ns.command] if getattr(ns, a.dest) is None]
    if missing:
        sp.error("the following arguments are required: " + ", ".join(missing))
    if isinstance(getattr(ns, "mu", None), str):
        ns.mu = _mu(ns.mu)
    return ns


class _Output:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.fh = open(self.path, "w", encoding="utf-8", newline="") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()
        else:
            self.fh.flush()
        return False


def _write_table(ns, header, rows):
    with _Output(ns.out) as fh:
        if ns.format == "json":
            import json
            json.dump([dict(zip(header, r)) for r in rows], fh, indent=1)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_zeros(ns) -> int:
    from .besselnu import gap_certificate, zero_bracket_lorch, zero_table

    if ns.nu < 0 or ns.n < 1:
        raise UsageError("need nu >= 0 and n >= 1")
    tab = zero_table(ns.nu, ns.n)
    rows = []
    inside = True
    for k, (z, br) in enumerate(zip(tab.zeros, tab.brackets), start=1):
        lb = zero_bracket_lorch(ns.nu, k)
        ok = lb.contains(z) and br.contains(z)
        inside &= ok
        rows.append((k, z, br.lo, br.hi, lb.lo, lb.hi, ok))
    _write_table(ns, ("n", "zero", "bracket_lo", "bracket_hi", "lorch_lo", "lorch_hi", "inside"), rows)
    ok = inside
    if ns.n >= 2:
        cert = gap_certificate(ns.nu, ns.n)
        _note(f"gap certificate: monotone={cert.monotone_ok} sturm={cert.sturm_ok} "
              f"limit_side={cert.limit_side_ok}")
        ok &= cert.passed
    if not ok:
        _note("certification failed: a zero lies outside its bracket or the gap test failed")
        return 2
    return 0


def cmd_spectrum(ns) -> int:
    from .spectrum import eigenpair, make_operator

    if ns.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    op = make_operator(ns.alpha, ns.ell)
    rows = []
    for n in range(1, ns.n_max + 1):
        e = eigenpair(op, n)
        rows.append((n, e.j, e.lam, e.norm_const, e.r, e.parity))
    _note(f"nu = {op.nu!r}, kappa = {op.kappa!r}")
    _write_table(ns, ("n", "j", "lambda", "norm_const", "r", "parity"), rows)
    return 0


def cmd_biortho(ns) -> int:
    from .moment import biorthogonal_solve, make_system
    from .spectrum import make_operator

    op = make_operator(ns.alpha, ns.ell)
    system = make_system(op, ns.T, ns.N, include_zero=not ns.no_zero)
    fam = biorthogonal_solve(system, ns.tol, raise_on_failure=False)
    rows = [(m, lam, nrm, float(max(abs(v) for v in fam.residuals[m])))
            for m, (lam, nrm) in enumerate(zip(fam.lambdas, fam.norms))]
    _write_table(ns, ("m", "lambda", "norm", "residual_row_max"), rows)
    _note(f"precision = {fam.precision_used}, residual_max = {fam.residual_max:.3e}, "
          f"tol = {ns.tol:.1e}, certified = {fam.certified}")
    return 0 if fam.certified else 2


def _final_summary(label, fam, fs, extra=""):
    _note(f"{label}: precision = {fam.precision_used}, residual_max = {fam.residual_max:.3e}, "
          f"max|beta_n(T)|, n<=N = {fs.max_controlled:.3e}{extra}")
    return fs.max_controlled <= FINAL_STATE_TOL and fam.certified


def cmd_control_bd(ns) -> int:
    from .control import export_boundary_csv, final_state_boundary, synthesize_boundary
    from .moment import CertificationError
    from .spectrum import make_operator

    op = make_operator(ns.alpha, ns.ell)
    try:
        ctrl = synthesize_boundary(op, ns.mu, ns.T, ns.N, tol=ns.tol, samples=ns.samples)
    except CertificationError as exc:
        fam = exc.family
        _note(f"certification failed: {exc}"
              + (f" (residual_max = {fam.residual_max:.3e})" if fam is not None else ""))
        return 2
    fs = final_state_boundary(op, ns.mu, ctrl)
    if ns.out:
        export_boundary_csv(ctrl, ns.out)
    else:
        with _Output(None) as fh:
            _dump_csv(fh, ("t", "K", "H"), zip(ctrl.time_grid, ctrl.K_samples, ctrl.H_samples))
    ok = _final_summary("control-bd", ctrl.family, fs,
                        f", ||H||_H1 = {ctrl.norm_h1:.6e}, ||H||_L2 = {ctrl.norm_l2:.6e}")
    return 0 if ok else 2


def cmd_control_loc(ns) -> int:
    from .control import export_distributed_csv, final_state_distributed, synthesize_distributed
    from .moment import CertificationError
    from .spectrum import make_operator

    op = make_operator(ns.alpha, ns.ell)
    try:
        ctrl = synthesize_distributed(op, ns.mu, ns.T, ns.N, ns.a, ns.b, tol=ns.tol, samples=ns.samples)
    except CertificationError as exc:
        fam = exc.family
        _note(f"certification failed: {exc}"
              + (f" (residual_max = {fam.residual_max:.3e})" if fam is not None else ""))
        return 2
    fs = final_state_distributed(op, ns.mu, ctrl)
    if ns.out:
        export_distributed_csv(ctrl, ns.out)
    else:
        with _Output(None) as fh:
            head = ("t",) + tuple(f"d_{m}" for m in range(1, ctrl.N + 1))
            _dump_csv(fh, head, zip(ctrl.time_grid, *ctrl.d_samples))
    ok = _final_summary("control-loc", ctrl.family, fs, f", ||f||_L2 = {ctrl.norm_l2:.6e}")
    return 0 if ok else 2


def _dump_csv(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(float(v)) for v in r])


def cmd_mass(ns) -> int:
    from .eigenmass import lower_bound_sweep, write_mass_csv

    if not (0 < ns.a < ns.b < ns.ell) or ns.m_max < 1:
        raise UsageError("need 0 < a < b < ell and m-max >= 1")
    if any(not (1.0 <= al < 2.0) for al in ns.alphas):
        raise UsageError("alpha values must lie in [1, 2)")
    sw = lower_bound_sweep(ns.a, ns.b, ns.ell, ns.alphas, ns.m_max, jobs=ns.jobs)
    if ns.out and ns.format == "csv":
        write_mass_csv(ns.out, sw.rows)
    else:
        _write_table(ns, ("alpha", "m", "mass_ode", "mass_quad", "ratio"),
                     [(r.alpha, r.m, r.mass_ode, r.mass_quad, r.ratio) for r in sw.rows])
    _note(f"min ratio = {sw.min_ratio:.6e}, max ratio = {sw.max_ratio:.6e}, "
          f"max rel diff = {sw.max_rel_diff:.3e}, envelope ok = {sw.envelope_ok}")
    ok = sw.positive and sw.envelope_ok and sw.max_rel_diff <= 1e-6
    return 0 if ok else 2


def cmd_sweep(ns) -> int:
    from .costlab import DegenerateDesignError, SweepConfig, emit, fit_rate, run_sweep

    try:
        cfg = SweepConfig(tuple(ns.alphas), tuple(ns.Ts), tuple(ns.ells), ns.N, ns.a, ns.b, ns.tol, ns.jobs)
    except ValueError as exc:
        raise UsageError(str(exc))
    pts = run_sweep(cfg)
    if ns.out:
        emit(pts, ns.out, ns.format)
    else:
        import tempfile
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "sweep")
            emit(pts, path, ns.format)
            with open(path, encoding="utf-8") as fh, _Output(None) as out:
                out.write(fh.read())
    bad = [p for p in pts if not p.certified(ns.tol)]
    for p in bad:
        _note(f"point alpha={p.alpha} T={p.T} ell={p.ell}: "
              f"{p.error or 'residual_max = %.3e' % p.residual_max}")
    try:
        fit = fit_rate(pts)
        _note(f"fit: A = {fit.A:.6g}, B = {fit.B:.6g}, r^2 = {fit.r_squared:.4f}")
    except DegenerateDesignError as exc:
        _note(f"fit skipped: {exc}")
    return 2 if bad else 0


COMMANDS = {
    "zeros": cmd_zeros,
    "spectrum": cmd_spectrum,
    "biortho": cmd_biortho,
    "control-bd": cmd_control_bd,
    "control-loc": cmd_control_loc,
    "mass": cmd_mass,
    "sweep": cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = _parse(argv)
        saved = os.environ.get("DEGENCTRL_PRECISION")
        if ns.precision:
            os.environ["DEGENCTRL_PRECISION"] = ns.precision
        try:
            return COMMANDS[ns.command](ns)
        finally:
            if saved is None:
                os.environ.pop("DEGENCTRL_PRECISION", None)
            else:
                os.environ["DEGENCTRL_PRECISION"] = saved
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:      # --help and --version
        return int(exc.code or 0)
    except (ValueError, OSError) as exc:
        print(f"degenctrl: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
