"""Command-line front end.

Exit codes: 0 Certified or success, 1 Rejected, 2 Inconclusive,
3 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys as _sys

import numpy as np

from . import expr as _expr
from .errors import ConfigError, DelayCertError
from .freqcheck import CERTIFIED, REJECTED, certify, circle_check, smith_check

EXIT_OK, EXIT_REJECTED, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt(value):
    if value is None:
        return "none"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(fmt(v) for v in value) + "]"
    return str(value)


def _emit(out, pairs):
    width = max(len(k) for k, _ in pairs)
    for key, val in pairs:
        out.write(f"{key.ljust(width)} : {fmt(val)}\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _verdict_exit(verdict):
    return {CERTIFIED: EXIT_OK, REJECTED: EXIT_REJECTED}.get(verdict, EXIT_INCONCLUSIVE)


def _linspec(text):
    """``start:stop:count`` -> numpy array."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) == 3:
            count = int(parts[2])
            if count < 1:
                raise ValueError
            return np.linspace(float(parts[0]), float(parts[1]), count)
    except ValueError:
        pass
    raise UsageError(f"bad range {text!r}; expected start:stop:count or a single value")


def _history(text, n):
    from .simulate import constant_history, expression_history
    if text.startswith("const:"):
        try:
            vals = [float(v) for v in text[len("const:"):].split(",")]
        except ValueError:
            raise UsageError(f"bad constant history {text!r}") from None
        if len(vals) not in (1, n):
            raise UsageError(f"constant history needs 1 or {n} values")
        return constant_history(vals if len(vals) == n else vals[0], n)
    return expression_history(text, n)


def _forcing(text, n):
    if text is None:
        return None
    tree = _expr.parse_expression(text, variables=("t",))

    def forcing(t):
        return np.full(n, float(_expr.evaluate(tree, t=float(t))))
    return forcing


# --- subcommands -------------------------------------------------------------

def cmd_check(args, out):
    from .sysio import load_system
    sys, nl = load_system(args.system)
    mode = args.mode
    kw = {"nodes": args.nodes}
    if mode == "smith":
        lam = args.lam if args.lam is not None else (nl.lipschitz[0] if nl and nl.lipschitz else None)
        if lam is None:
            raise UsageError("smith mode needs --lambda or a Lipschitz constant in the system file")
        cert = smith_check(sys, lam, args.nu, **kw)
    elif mode == "circle":
        if args.k1 is not None and args.k2 is not None:
            k1, k2 = args.k1, args.k2
        elif nl is not None and nl.sector is not None:
            k1, k2 = nl.sector
        else:
            raise UsageError("circle mode needs --k1 and --k2 or a sector in the system file")
        cert = circle_check(sys, k1, k2, args.nu, mode="msc", **kw)
    else:
        if nl is None:
            raise UsageError(f"{mode} mode needs a nonlinearity in the system file")
        cert = certify(sys, nl, args.nu, mode=mode, **kw)
    data = cert.to_dict()
    _emit(out, [(k, data[k]) for k in ("verdict", "kind", "check", "mode", "nu", "j", "delta",
                                      "worst_omega", "tail_bound_value", "gain_sup", "reason")]
          + [(f"sweep.{k}", v) for k, v in data["sweep"].items()])
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(_jsonable(data), fh, indent=2)
            fh.write("\n")
    return _verdict_exit(cert.verdict)


def cmd_spectrum(args, out):
    from .spectrum import count_roots_right_of
    from .sysio import load_system
    sys, _ = load_system(args.system)
    rc = count_roots_right_of(sys, args.nu)
    _emit(out, [("nu", rc.nu), ("j", rc.j), ("contour", [complex(x, y) for x, y in rc.contour]),
                ("winding_raw", rc.raw), ("winding_residual", rc.winding_residual),
                ("min_boundary_modulus", rc.min_boundary_modulus)])
    return EXIT_OK


def _write_trace(path, trace):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x_{i + 1}" for i in range(trace.states.shape[1])])
        for t, row in zip(trace.times, trace.states):
            writer.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])


def _figure_path(csv_path, explicit, default_ext=".png"):
    if explicit:
        return explicit
    return os.path.splitext(csv_path)[0] + default_ext


def cmd_simulate(args, out):
    from .simulate import integrate
    from .sysio import load_system
    sys, nl = load_system(args.system)
    if nl is None:
        raise UsageError("simulate needs a nonlinearity in the system file")
    trace = integrate(sys, nl, _history(args.history, sys.n), args.tend, args.step,
                      forcing=_forcing(args.forcing, sys.n))
    _write_trace(args.out, trace)
    pairs = [("step", trace.h), ("nodes", len(trace.times)), ("t_end", trace.t_end),
             ("x_final", list(trace.states[-1])), ("out", args.out)]
    if args.figure is not None:
        from .report import plot_trace
        path = _figure_path(args.out, args.figure)
        plot_trace(trace, path)
        pairs.append(("figure", path))
    _emit(out, pairs)
    return EXIT_OK


def cmd_smalldelay(args, out):
    from .smalldelay import small_delay_certificate
    rep = small_delay_certificate(args.n, args.r, args.lam, args.tau)
    pairs = list(rep.to_dict().items())
    if args.a is not None:
        from .smalldelay import shifted_plant
        plant = shifted_plant(args.n, args.a, [args.tau] * args.r, tau=args.tau)
        cert = smith_check(plant, args.lam + args.a, 1.0 / args.tau, nodes=args.nodes)
        pairs += [("finite_a", args.a), ("finite_a_verdict", cert.verdict),
                  ("finite_a_j", cert.j), ("finite_a_gain_sup", cert.gain_sup)]
    _emit(out, pairs)
    return EXIT_OK if rep.certified else EXIT_REJECTED


def cmd_goodwin_region(args, out):
    from .goodwin import region_scan, write_region_csv
    taus, lams = _linspec(args.tau), _linspec(args.lam)
    rows = region_scan(taus, lams, rho_grid_size=args.rho_grid, nodes=args.nodes,
                       workers=args.threads)
    write_region_csv(rows, args.out)
    certified = sum(r["certified"] for r in rows)
    pairs = [("nodes", len(rows)), ("certified", certified), ("out", args.out)]
    if not args.no_figure:
        from .report import plot_region
        path = _figure_path(args.out, args.figure)
        plot_region(rows, path)
        pairs.append(("figure", path))
    _emit(out, pairs)
    return EXIT_OK


def cmd_goodwin_point(args, out):
    from .goodwin import build_goodwin, goodwin_certify, goodwin_fixed_point
    pt = goodwin_certify(args.tau, args.lam, rho_grid_size=args.rho_grid, nodes=args.nodes)
    pairs = [("tau", pt.tau), ("lambda", pt.lam), ("theta", pt.theta), ("rho_cap", pt.rho_cap),
             ("fixed_point", list(pt.fixed_point)), ("certified", pt.certified),
             ("rho_star", pt.rho_star), ("margin", pt.margin), ("reason", pt.reason or "")]
    if pt.certificate is not None:
        pairs += [("j", pt.certificate.j), ("worst_omega", pt.certificate.worst_omega)]
    if args.simulate:
        from .simulate import constant_history, fit_decay_rate, integrate_batch
        rng = np.random.default_rng(args.seed)
        sys, nl = build_goodwin(args.tau, args.lam, 0.0)
        hist = [constant_history(rng.uniform(0.0, 2.0, 3), 3) for _ in range(2)]
        tr = integrate_batch(sys, nl, hist, args.tend, args.step)
        fit = fit_decay_rate(tr[0], tr[1], (0.25 * args.tend, args.tend))
        dist = tr[0].segment_sup(tr[1])
        fp = np.array(goodwin_fixed_point(args.lam))
        pairs += [("sim_contraction", float(dist[0] / dist[-1])), ("sim_decay_rate", fit.rate),
                  ("sim_fixed_point_error", float(np.abs(tr[0].states[-1] - fp).max()))]
    _emit(out, pairs)
    return EXIT_OK if pt.certified else EXIT_REJECTED


# --- parser ------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="delaycert", description="Frequency-domain certificates for delay systems.")
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: CPU count)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for random histories")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("check", help="frequency-domain certificate")
    c.add_argument("--system", required=True, help="system JSON file")
    c.add_argument("--mode", choices=("sc", "msc", "smith", "circle"), required=True, help="condition to check")
    c.add_argument("--nu", type=float, default=0.0, help="exponent: sweep the line Re p = -nu")
    c.add_argument("--lambda", dest="lam", type=float, help="Lipschitz constant (smith mode)")
    c.add_argument("--k1", type=float, help="lower sector slope (circle mode)")
    c.add_argument("--k2", type=float, help="upper sector slope (circle mode)")
    c.add_argument("--nodes", type=int, default=2048, help="frequency sweep nodes")
    c.add_argument("--out", help="write the certificate as JSON")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("spectrum", help="count roots right of Re p = -nu")
    s.add_argument("--system", required=True, help="system JSON file")
    s.add_argument("--nu", type=float, default=0.0, help="count roots with Re p > -nu")
    s.set_defaults(func=cmd_spectrum)

    m = sub.add_parser("simulate", help="integrate and write a trace CSV")
    m.add_argument("--system", required=True, help="system JSON file")
    m.add_argument("--history", required=True, help="const:v[,v...] or an expression in t")
    m.add_argument("--tend", type=float, required=True, help="final time")
    m.add_argument("--step", type=float, default=0.01, help="requested step (snapped to divide the lags)")
    m.add_argument("--forcing", help="expression in t added to every component")
    m.add_argument("--out", required=True, help="trace CSV path")
    m.add_argument("--figure", nargs="?", const="", default=None,
                   help="also plot the trace (default path: next to --out)")
    m.set_defaults(func=cmd_simulate)

    d = sub.add_parser("smalldelay", help="small-delay inertial manifold thresholds")
    d.add_argument("--n", type=int, required=True, help="state dimension")
    d.add_argument("--r", type=int, required=True, help="number of delayed measurements")
    d.add_argument("--lambda", dest="lam", type=float, required=True, help="Lipschitz constant of F")
    d.add_argument("--tau", type=float, required=True, help="delay")
    d.add_argument("--a", type=float, help="finite shift for a numerical Smith check")
    d.add_argument("--nodes", type=int, default=2048)
    d.set_defaults(func=cmd_smalldelay)

    g = sub.add_parser("goodwin", help="Goodwin delay chain")
    gs = g.add_subparsers(dest="goodwin_command", parser_class=_Parser)
    gs.required = True
    reg = gs.add_parser("region", help="scan a (tau, lambda) grid")
    reg.add_argument("--tau", default="0.05:4:41", help="start:stop:count grid of delays")
    reg.add_argument("--lambda", dest="lam", default="0.05:1:21", help="start:stop:count grid of decay rates")
    reg.add_argument("--rho-grid", type=int, default=64, help="rho values tried per node")
    reg.add_argument("--nodes", type=int, default=2048)
    reg.add_argument("--out", required=True)
    reg.add_argument("--figure", help="heatmap path (default: next to --out, .png)")
    reg.add_argument("--no-figure", action="store_true")
    reg.set_defaults(func=cmd_goodwin_region)
    pnt = gs.add_parser("point", help="certify one (tau, lambda)")
    pnt.add_argument("--tau", type=float, required=True)
    pnt.add_argument("--lambda", dest="lam", type=float, required=True)
    pnt.add_argument("--rho-grid", type=int, default=64)
    pnt.add_argument("--nodes", type=int, default=2048)
    pnt.add_argument("--simulate", action="store_true", help="also integrate from random positive histories")
    pnt.add_argument("--tend", type=float, default=60.0, help="final time for --simulate")
    pnt.add_argument("--step", type=float, default=0.01, help="step for --simulate")
    pnt.set_defaults(func=cmd_goodwin_point)
    return p


def run(argv=None, out=None, err=None):
    out = out or _sys.stdout
    err = err or _sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be positive")
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ConfigError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE
    except DelayCertError as exc:  # numerical failure: no verdict either way
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INCONCLUSIVE
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


def main():
    _sys.exit(run())


if __name__ == "__main__":
    main()
