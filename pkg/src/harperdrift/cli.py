"""Command-line surface: deterministic CSV/JSON export of every dataset.

Identical command lines produce byte-identical data files.  Floats are
written in shortest round-trip form, high-precision values at the requested
digit count, rows in a fixed order, and run metadata (which may carry a
timestamp) goes to a sidecar next to the data file, never into it.

Exit codes: 0 success, 1 check failure, 2 usage, 3 numerical failure,
4 domain precondition.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import gmpy2
import numpy as np

from . import __version__
from .diagnostics import classical_energy_grid
from .drift import DriftSchedule, refine_until_converged
from .errors import NumericalError, PrecisionBudgetExceeded, PrecisionWarning
from .mathieu import align_spectra, mathieu_characteristics, q_from_eps
from .operators import MACHINE, HarperParams, PrecisionContext
from .spectral import (
    compute_spectrum,
    min_spacing,
    min_spacing_model_log10,
    required_digits,
)
from .symmetry import ALL_CHECKS, run_battery, run_point


class UsageError(Exception):
    pass


def _context(digits: int) -> PrecisionContext:
    if digits < 15:
        raise UsageError("--digits must be at least 15")
    return MACHINE if digits <= 16 else PrecisionContext(digits)


def _fmt(x, digits=15) -> str:
    """Shortest round-trip for machine floats, fixed significant digits
    for high-precision values."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    # gmpy2.mpfr: assemble scientific notation from the raw digit string,
    # since mpfr values round-trip through neither repr nor format()
    mant, exp, _ = x.digits(10, digits)
    sign = "-" if mant.startswith("-") else ""
    m = mant.lstrip("-")
    if set(m) == {"0"}:
        return "0.0"
    return f"{sign}{m[0]}.{m[1:]}e{exp - 1:+03d}"


def _log10_str(sp, digits, ctx) -> str:
    if ctx.is_machine:
        v = float(sp)
        return repr(math.log10(v)) if v > 0 else "-inf"
    with ctx.gmpy_context():
        if sp <= 0:
            return "-inf"
        return _fmt(gmpy2.log10(sp), digits)


def _emit(text: str, args) -> None:
    out = getattr(args, "out", None)
    if not out:
        sys.stdout.write(text)
        return
    outdir = os.environ.get("HARPERDRIFT_OUTDIR")
    if outdir and not os.path.isabs(out):
        out = os.path.join(outdir, out)
    with open(out, "w", newline="") as f:
        f.write(text)
    meta = {
        "tool": "harperdrift",
        "version": __version__,
        "command": " ".join(args._argv),
        "units": "energies in units of a=1; durations as T/hbar",
        "generated_at": datetime.datetime.now(datetime.timezone.utc)
        .isoformat(),
    }
    with open(out + ".meta.json", "w", newline="") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- spectrum

def _spectrum_rows(p: HarperParams, ctx: PrecisionContext):
    spec = compute_spectrum(p, ctx)
    rows = []
    for i, (w, sp) in enumerate(zip(spec.eigenvalues, spec.spacings)):
        rows.append((str(i), _fmt(w, ctx.digits),
                     _log10_str(sp, ctx.digits, ctx)))
    return rows


def cmd_spectrum(args) -> int:
    ctx = _context(args.digits)
    p = HarperParams(args.n, args.a, args.b, args.eps)
    rows = _spectrum_rows(p, ctx)
    if args.format == "json":
        payload = {
            "params": {"n": p.n, "a": p.a, "b": p.b, "eps": p.eps},
            "digits": ctx.digits,
            "index": [int(r[0]) for r in rows],
            "eigenvalue": [r[1] for r in rows],
            "log10_nearest_spacing": [r[2] for r in rows],
        }
        _emit(json.dumps(payload, indent=2) + "\n", args)
    else:
        _emit(_csv(("index", "eigenvalue", "log10_nearest_spacing"), rows),
              args)
    return 0


# ------------------------------------------------------------------- sweep

def _sweep_values(args):
    if args.count < 2:
        raise UsageError("--count must be at least 2")
    if args.swept == "n":
        vals = [int(round(v))
                for v in np.linspace(args.start, args.stop, args.count)]
        if any(v < 2 for v in vals):
            raise UsageError("swept n values must be at least 2")
        return vals
    return [float(v) for v in np.linspace(args.start, args.stop, args.count)]


def _sweep_point(task):
    """One grid point, fully formatted; runs in worker processes."""
    swept, value, n, a, b, eps, path, digits = task
    ctx = _context(digits)
    if swept == "eps":
        p = HarperParams(n, a, b, float(value))
    elif swept == "b":
        p = HarperParams(n, a, float(value), eps)
    elif swept == "n":
        p = HarperParams(int(value), a, b, eps)
    else:
        # both_linear: value is the fraction along the straight path
        # (b0, eps0) -> (b1, eps1)
        b0, b1, e0, e1 = path
        t = float(value)
        p = HarperParams(n, a, b0 + (b1 - b0) * t, e0 + (e1 - e0) * t)
    sval = _fmt(value) if swept != "n" else str(int(value))
    return [(sval,) + row for row in _spectrum_rows(p, ctx)]


def cmd_sweep(args) -> int:
    _context(args.digits)
    values = _sweep_values(args)
    path = None
    if args.swept == "both_linear":
        endpoints = (args.b0, args.b1, args.eps0, args.eps1)
        if any(v is None for v in endpoints):
            raise UsageError(
                "both_linear needs --b0 --b1 --eps0 --eps1 path endpoints")
        path = tuple(float(v) for v in endpoints)
    tasks = [(args.swept, v, args.n, args.a, args.b, args.eps, path,
              args.digits) for v in values]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            chunks = list(pool.map(_sweep_point, tasks))
    else:
        chunks = [_sweep_point(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    _emit(_csv(("sweep_value", "index", "eigenvalue",
                "log10_nearest_spacing"), rows), args)
    return 0


# ------------------------------------------------------------------- drift

def cmd_drift(args) -> int:
    if args.duration_over_hbar <= 0:
        raise UsageError("--duration-over-hbar must be positive")
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    s = DriftSchedule(
        n=args.n, a=args.a, b0=args.b0, b1=args.b1,
        eps0=args.eps0, eps1=args.eps1,
        duration_T=args.duration_over_hbar * 2 * math.pi / args.n,
    )
    rep = refine_until_converged(s, tol=args.tol)
    d = rep.diagnostics
    payload = {
        "params0": {"n": s.n, "a": s.a, "b": s.b0, "eps": s.eps0},
        "params1": {"n": s.n, "a": s.a, "b": s.b1, "eps": s.eps1},
        "duration_over_hbar": args.duration_over_hbar,
        "steps": rep.convergence.steps,
        "amplitudes": [[float(x) for x in row] for row in rep.amplitudes],
        "labels_init": [l.value for l in rep.labels_init],
        "labels_final": [l.value for l in rep.labels_final],
        "boundary_indices": {"init": list(rep.boundary_init),
                             "final": list(rep.boundary_final)},
        "region_probs": [[float(x) for x in row] for row in rep.region_probs],
        "diagnostics": {
            "beta_ad": d.beta_ad,
            "gamma_q_ad": d.gamma_q_ad,
            "p_capture_raw": d.p_capture_raw,
            "p_capture": d.p_capture,
            "alpha": d.alpha,
            "de_min_half": d.de_min_half,
            "omega0": d.omega0,
        },
    }
    _emit(json.dumps(payload, indent=2) + "\n", args)
    return 0


# ---------------------------------------------------------------- symmetry

def cmd_symmetry_check(args) -> int:
    if args.seed is not None:
        reports = run_battery(seed=args.seed, count=args.count,
                              fault=args.perturb)
        # one table line per check: the draw with the worst margin
        worst = {}
        for r in reports:
            old = worst.get(r.check)
            if old is None or r.residual / r.tolerance > old.residual / old.tolerance:
                worst[r.check] = r
        lines = [worst[name] for name in ALL_CHECKS if name in worst]
    else:
        p = HarperParams(args.n, args.a, args.b, args.eps)
        reports = run_point(p, fault=args.perturb)
        lines = reports
    width = max(len(r.check) for r in lines)
    for r in lines:
        print(f"{r.check:<{width}}  {r.residual:12.3e}  {r.tolerance:9.1e}  "
              f"{'PASS' if r.passed else 'FAIL'}")
    return 0 if all(r.passed for r in reports) else 1


# ------------------------------------------------------------- mathieu

def cmd_mathieu_compare(args) -> int:
    p = HarperParams(args.n, 1.0, 0.0, args.eps)
    spec = compute_spectrum(p)
    chars = mathieu_characteristics(q_from_eps(args.eps, args.n), args.m_max)
    cmp_ = align_spectra(spec, chars)
    rows = []
    for i in range(cmp_.count):
        rows.append((str(i),
                     _fmt(cmp_.harper_eigenvalues[i]),
                     _fmt(cmp_.mathieu_scaled[i]),
                     _fmt(cmp_.differences[i]),
                     _fmt(cmp_.harper_spacings[i]),
                     _fmt(cmp_.mathieu_spacings[i])))
    _emit(_csv(("index", "harper_eigenvalue", "mathieu_scaled_eigenvalue",
                "difference", "harper_spacing", "mathieu_spacing"), rows),
          args)
    return 0


# ------------------------------------------------------------ min spacing

def _parse_list(text, cast):
    try:
        return [cast(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise UsageError(f"cannot parse list {text!r}")


def cmd_min_spacing(args) -> int:
    ns = _parse_list(args.n_list, int)
    epss = _parse_list(args.eps_list, float)
    ctx = _context(args.digits)
    # fail fast if any requested pair is beyond the precision budget
    for n in ns:
        for eps in epss:
            if n % 4 != 0 and required_digits(n, eps) > args.digits:
                raise PrecisionBudgetExceeded(
                    f"n={n}, eps={eps} needs {required_digits(n, eps)} "
                    f"digits, got {args.digits}")
    rows = []
    for n in ns:
        for eps in epss:
            p = HarperParams(n, 1.0, 0.0, eps)
            spec = compute_spectrum(p, ctx)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", PrecisionWarning)
                val, _ = min_spacing(spec)
            lg_model = min_spacing_model_log10(n, eps)
            with ctx.gmpy_context():
                floor = gmpy2.mpfr(10) ** (-(ctx.digits - 10))
                if lg_model == -math.inf:
                    # exact zero pair: measured is zero at this precision
                    measured = "0" if val <= floor else _fmt(val, ctx.digits)
                    model, ratio = "0", "nan"
                else:
                    measured = _fmt(val, ctx.digits)
                    model = _fmt(gmpy2.exp10(gmpy2.mpfr(lg_model)),
                                 ctx.digits)
                    if val <= floor:
                        ratio = "-inf"
                    else:
                        ratio = repr(float(gmpy2.log10(val)) - lg_model)
            rows.append((str(n), _fmt(eps), measured, model, ratio))
    _emit(_csv(("n", "eps", "measured_min_spacing", "model_min_spacing",
                "log10_ratio"), rows), args)
    return 0


# ------------------------------------------------------------ level curves

def cmd_level_curves(args) -> int:
    p = HarperParams(args.n, args.a, args.b, args.eps)
    grid = classical_energy_grid(p, args.resolution)
    lo, hi = grid.e_sep
    rows = []
    for i, pv in enumerate(grid.p):
        for j, phiv in enumerate(grid.phi):
            rows.append((_fmt(pv), _fmt(phiv), _fmt(grid.energy[i, j]),
                         _fmt(lo), _fmt(hi)))
    _emit(_csv(("p", "phi", "energy", "e_sep_lower", "e_sep_upper"), rows),
          args)
    return 0


# ------------------------------------------------------------------ parser

def _add_params(sp, with_b=True):
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--a", type=float, default=1.0)
    if with_b:
        sp.add_argument("--b", type=float, default=0.0)
    sp.add_argument("--eps", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harperdrift",
        description="Spectra, symmetry checks, and drifting-parameter "
                    "dynamics of the quantized pendulum on a torus.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="eigenvalues and nearest spacings")
    _add_params(sp)
    sp.add_argument("--digits", type=int, default=15)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("sweep", help="spectra along a parameter grid")
    _add_params(sp)
    sp.add_argument("--swept", choices=("eps", "b", "both_linear", "n"),
                    required=True)
    sp.add_argument("--start", type=float, required=True)
    sp.add_argument("--stop", type=float, required=True)
    sp.add_argument("--count", type=int, required=True)
    # path endpoints, used only by --swept both_linear
    sp.add_argument("--b0", type=float)
    sp.add_argument("--b1", type=float)
    sp.add_argument("--eps0", type=float)
    sp.add_argument("--eps1", type=float)
    sp.add_argument("--digits", type=int, default=15)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("drift", help="propagate a linear parameter drift")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--b0", type=float, required=True)
    sp.add_argument("--b1", type=float, required=True)
    sp.add_argument("--eps0", type=float, required=True)
    sp.add_argument("--eps1", type=float, required=True)
    sp.add_argument("--duration-over-hbar", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_drift)

    sp = sub.add_parser("symmetry-check", help="spectral identity residuals")
    _add_params(sp)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--count", type=int, default=50)
    sp.add_argument("--perturb", type=float, default=0.0)
    sp.set_defaults(func=cmd_symmetry_check)

    sp = sub.add_parser("mathieu-compare",
                        help="operator spectrum vs scaled Mathieu levels")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--m-max", type=int, default=12)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_mathieu_compare)

    sp = sub.add_parser("min-spacing",
                        help="measured vs modeled minimum spacing")
    sp.add_argument("--n-list", required=True)
    sp.add_argument("--eps-list", required=True)
    sp.add_argument("--digits", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_min_spacing)

    sp = sub.add_parser("level-curves",
                        help="classical energy surface on a grid")
    _add_params(sp)
    sp.add_argument("--resolution", type=int, default=64)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_level_curves)

    return parser


def run(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    args._argv = ["harperdrift"] + list(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"invalid domain: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(run())
