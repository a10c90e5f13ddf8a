"""Command-line front end.

    expburgers simulate CONFIG -o OUT
    expburgers exact CONFIG -o OUT
    expburgers extrapolate SPECTRUM.csv -o OUT [--stack Log,D,D,I,D]
    expburgers discrepancy SPECTRUM.csv -o OUT
    expburgers predict CONFIG -o OUT
    expburgers reproduce {fig1,fig2,fig3} -o OUT

Exit codes: 2 bad configuration, 3 solver failure, 4 term cap exceeded,
5 transform failure, 1 refusing to overwrite existing output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import mpmath as mp

from . import experiments
from .asymptotics import (
    LN2,
    BalanceError,
    PipelineError,
    Sequence,
    TransformError,
    check_decay_bound,
    format_number,
    naive_discrepancy,
    parse_stack,
    run_pipeline,
    solve_balance,
)
from .dissipation import DissipationSymbol
from .exact import (
    TermCapExceeded,
    compute_coefficients,
    consistency_check,
    evaluate,
)
from .solver import IntegrationError, MinusSine, SingleComplexMode, SolverConfig, noise_flags, run
from .spectral_core import PRODUCT_METHODS, Grid

log = logging.getLogger("expburgers")

EXIT_OVERWRITE = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_TERM_CAP = 4
EXIT_TRANSFORM = 5

DEFAULTS = {
    "family": "cosh",
    "mu": 1.0,
    "sigma": None,
    "k_d": None,
    "alpha": 1.0,
    "n_collocation": 64,
    "dealias_fraction": "2/3",
    "dt": 1e-3,
    "t_end": 1.0,
    "initial_condition": "minus_sine",
    "amplitude": [0.0, 1.0],
    "product_method": "fft",
    "K": 24,
    "t_eval": 1.0,
    "precision_bits": 256,
    "check_precision_bits": 384,
    "check_digits": 40,
    "term_cap": 20_000_000,
    "k_min": 10,
    "k_max": None,
    "decay_C": 0.70,
    "stack": "Log,D,D,I,D",
    "n_max": 20,
    "F1": 0.0,
}


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


class OutputExists(FileExistsError):
    pass


def load_config(path: str | Path | None) -> dict:
    cfg = dict(DEFAULTS)
    if path is None:
        return cfg
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError("<file>", "top level must be an object")
    for key, val in raw.items():
        if key not in DEFAULTS:
            raise ConfigError(key, "unknown key")
        if isinstance(val, (dict, list)) and key != "amplitude":
            raise ConfigError(key, "nested values are not allowed")
        cfg[key] = val
    return cfg


def _get(cfg: dict, key: str, conv):
    try:
        return conv(cfg[key])
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(key, str(exc)) from None


def symbol_from(cfg: dict) -> DissipationSymbol:
    try:
        return DissipationSymbol.from_dict(
            {k: cfg[k] for k in ("family", "mu", "sigma", "k_d", "alpha") if cfg[k] is not None}
        )
    except ValueError as exc:
        msg = str(exc)
        key = next((k for k in ("family", "sigma", "k_d", "mu", "alpha") if k in msg), "family")
        raise ConfigError(key, msg) from None


def solver_config_from(cfg: dict) -> SolverConfig:
    n = _get(cfg, "n_collocation", int)
    frac = _get(cfg, "dealias_fraction", Fraction)
    try:
        grid = Grid(n, frac)
    except ValueError as exc:
        raise ConfigError("n_collocation", str(exc)) from None
    ic_name = cfg["initial_condition"]
    if ic_name == "minus_sine":
        ic = MinusSine()
    elif ic_name == "single_complex_mode":
        re, im = _get(cfg, "amplitude", lambda a: (float(a[0]), float(a[1])))
        ic = SingleComplexMode(complex(re, im))
    else:
        raise ConfigError("initial_condition", f"unknown initial condition {ic_name!r}")
    method = cfg["product_method"]
    if method not in PRODUCT_METHODS:
        raise ConfigError("product_method", f"expected one of {PRODUCT_METHODS}")
    dt = _get(cfg, "dt", float)
    t_end = _get(cfg, "t_end", float)
    try:
        return SolverConfig(grid, symbol_from(cfg), dt, t_end, ic, method)
    except ValueError as exc:
        key = "t_end" if "t_end" in str(exc) else "dt"
        raise ConfigError(key, str(exc)) from None


def _check_free(paths: list[Path], force: bool) -> None:
    if force:
        return
    for p in paths:
        if p.exists():
            raise OutputExists(f"{p} exists; pass --force to overwrite")


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


@dataclass
class Outputs:
    directory: Path
    force: bool

    def prepare(self, *names: str) -> list[Path]:
        self.directory.mkdir(parents=True, exist_ok=True)
        paths = [self.directory / n for n in names]
        _check_free(paths, self.force)
        return paths


def _json_dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- commands ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    sc = solver_config_from(cfg)
    spec_path, summary_path = Outputs(Path(args.output), args.force).prepare(
        "spectrum.csv", "summary.json"
    )
    t0 = time.perf_counter()
    u = run(sc)
    wall = time.perf_counter() - t0
    k_hi = cfg["k_max"] if cfg["k_max"] is not None else sc.grid.k_max
    flags = noise_flags(u, 1, k_hi)
    rows = []
    for k in range(1, k_hi + 1):
        c = u[k]
        rows.append([k, repr(c.real), repr(c.imag), repr(abs(c)), int(flags[k])])
    spec_path.write_text(_csv_text(["k", "re_u", "im_u", "abs_u", "noise_flag"], rows))
    onset = next((k for k, f in flags.items() if f), None)
    _json_dump(
        summary_path,
        {
            "command": "simulate",
            "grid": {
                "n_collocation": sc.grid.n_collocation,
                "dealias_fraction": str(sc.grid.dealias_fraction),
                "k_max": sc.grid.k_max,
            },
            "symbol": sc.symbol.to_dict(),
            "dt": sc.dt,
            "t_end": sc.t_end,
            "product_method": sc.product_method,
            "noise_onset": onset,
            "wall_time_s": wall,
        },
    )
    print(f"wrote {spec_path} ({k_hi} modes, noise onset {onset})")
    return 0


def cmd_exact(args) -> int:
    cfg = load_config(args.config)
    sym = symbol_from(cfg)
    K = _get(cfg, "K", int)
    if K < 1:
        raise ConfigError("K", "must be >= 1")
    prec = args.precision_bits or _get(cfg, "precision_bits", int)
    cap = _get(cfg, "term_cap", int)
    t = _get(cfg, "t_eval", float)
    out_path, summary_path = Outputs(Path(args.output), args.force).prepare("exact.csv", "summary.json")
    t0 = time.perf_counter()
    sums = compute_coefficients(K, sym, prec, cap)
    rows = []
    for k, s in enumerate(sums, start=1):
        rows.append([k, format_number(evaluate(s, t), prec), len(s), prec])
    out_path.write_text(_csv_text(["k", "vhat", "terms", "precision_bits"], rows))
    summary = {
        "command": "exact",
        "symbol": sym.to_dict(),
        "K": K,
        "t_eval": t,
        "precision_bits": prec,
        "wall_time_s": time.perf_counter() - t0,
    }
    check_prec = cfg["check_precision_bits"]
    if check_prec:
        chk = consistency_check(K, sym, t, prec, int(check_prec), int(cfg["check_digits"]), cap)
        summary["consistency"] = {
            "check_precision_bits": int(check_prec),
            "agreeing_digits": chk.agreeing_digits if math.isfinite(chk.agreeing_digits) else "inf",
            "required_digits": chk.required_digits,
            "passed": chk.passed,
        }
        if not chk.passed:
            log.warning("vhat(%d) agrees to only %.1f digits at %d bits", K, chk.agreeing_digits, check_prec)
    _json_dump(summary_path, summary)
    print(f"wrote {out_path} (K={K}, {prec} bits)")
    return 0


def read_spectrum(path: str | Path) -> Sequence:
    """Load a spectrum CSV from ``simulate`` (abs_u, clean rows only) or ``exact`` (vhat)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    ks = [int(r["k"]) for r in rows]
    if ks != list(range(ks[0], ks[0] + len(ks))):
        raise ValueError(f"{path}: wavenumbers are not consecutive")
    if "vhat" in rows[0]:
        bits = [int(r["precision_bits"]) for r in rows]
        vals = []
        for r, b in zip(rows, bits):
            with mp.workprec(b):
                vals.append(mp.mpf(r["vhat"]))
        return Sequence(ks[0], tuple(vals), "vhat", tuple(bits))
    if "abs_u" in rows[0]:
        vals = []
        for r in rows:
            if int(r.get("noise_flag", 0)):
                break
            vals.append(float(r["abs_u"]))
        return Sequence(ks[0], tuple(vals), "|u|")
    raise ValueError(f"{path}: expected a 'vhat' or 'abs_u' column")


def write_report(report, directory: Path, force: bool) -> tuple[Path, Path]:
    rep_path, trace_path = Outputs(directory, force).prepare("report.json", "discrepancy.csv")
    _json_dump(rep_path, report.to_dict())
    term = report.terminal
    trace = report.discrepancy_trace
    rows = [
        [k, format_number(x, b), format_number(d, b)]
        for (k, x), d, b in zip(term.items(), trace.values, term.precision)
    ]
    last = report.stack[-1].value
    trace_path.write_text(_csv_text(["k", f"stage{len(report.stack)}_{last}", "discrepancy"], rows))
    return rep_path, trace_path


def cmd_extrapolate(args) -> int:
    seq = read_spectrum(args.spectrum)
    report = run_pipeline(seq, parse_stack(args.stack))
    rep_path, _ = write_report(report, Path(args.output), args.force)
    msg = f"wrote {rep_path}; terminal fit {format_number(report.terminal_fit, 64)}"
    if report.c_star is not None:
        msg += f", C* = {format_number(report.c_star, 64)} (1/ln 2 = {1 / LN2:.6f})"
    print(msg)
    return 0


def cmd_discrepancy(args) -> int:
    seq = read_spectrum(args.spectrum).window(2, None)
    d = naive_discrepancy(seq, args.k_d, args.t)
    disc_path, summary_path = Outputs(Path(args.output), args.force).prepare(
        "naive_discrepancy.csv", "decay_check.json"
    )
    rows = [[k, format_number(x, b), repr(float(x) * LN2)] for (k, x), b in zip(d.items(), d.precision)]
    disc_path.write_text(_csv_text(["k", "discr", "discr_relative"], rows))
    chk = check_decay_bound(seq, args.k_d, args.C, args.k_min)
    _json_dump(
        summary_path,
        {"C": args.C, "k_min": args.k_min, "passed": chk.passed, "first_violation": chk.first_violation},
    )
    print(f"wrote {disc_path}; decay bound C={args.C}: {'pass' if chk.passed else 'FAIL'}")
    return 0


def cmd_predict(args) -> int:
    cfg = load_config(args.config)
    sym = symbol_from(cfg)
    pred = solve_balance(sym, _get(cfg, "n_max", int), _get(cfg, "F1", float))
    (path,) = Outputs(Path(args.output), args.force).prepare("prediction.json")
    form = pred.closed_form
    _json_dump(
        path,
        {
            "symbol": sym.to_dict(),
            "F_dyadic": {str(k): v for k, v in pred.F_values.items()},
            "closed_form": {"kind": type(form).__name__, **form._asdict()},
            "minimum_condition": pred.minimum_condition,
        },
    )
    print(f"wrote {path}; {type(form).__name__} coefficient {form.coefficient:.12g}")
    return 0


def _seq_rows(seq: Sequence, *extra):
    return [
        [k, format_number(x, b), *(f(x) for f in extra)]
        for (k, x), b in zip(seq.items(), seq.precision)
    ]


def cmd_reproduce(args) -> int:
    out = Outputs(Path(args.output), args.force)
    if args.figure == "fig1":
        (path,) = out.prepare("fig1_discrepancy.csv")
        res = experiments.fig1(k_min=args.k_min)
        path.write_text(
            _csv_text(["k", "discr", "discr_relative"], _seq_rows(res.discrepancy, lambda x: repr(x * LN2)))
        )
        print(f"noise onset: k = {res.run.onset} (reported: about {experiments.HEADLINE_NOISE_ONSET})")
        print(
            f"min |Discr|/(1/ln 2) over k in [{res.k_min}, {res.run.last_clean}]: "
            f"{res.min_relative:.4f} at k={res.best_k} (reported: {res.headline})"
        )
    elif args.figure == "fig2":
        res = experiments.fig2()
        write_report(res.report, out.directory, args.force)
        lo, hi = res.headline
        print(
            f"best |u5 + ln 2| = {res.best_abs:.4g} at k={res.best_k} "
            f"({100 * res.best_relative:.2f}% of ln 2; reported: {lo}..{hi}, at most 0.7%)"
        )
    else:
        res = experiments.fig3(K=args.K, prec=args.precision_bits or 256)
        write_report(res.report, out.directory, args.force)
        k, v = res.min_discrepancy
        print(
            f"tail u5 + ln 2 = {float(res.tail_discrepancy):.4g}, most negative in tail half {float(v):.4g} at k={k} "
            f"(reported: {res.headline}); C* = {float(res.report.c_star):.6f}"
        )
    return 0


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="expburgers", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("config", nargs="?", help="JSON config file (defaults used if omitted)")
        sp.add_argument("-o", "--output", default=".", help="output directory")
        sp.add_argument("--force", action="store_true", help="overwrite existing outputs")

    sp = sub.add_parser("simulate", help="pseudo-spectral ETDRK4 run")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("exact", help="exact half-space coefficients")
    common(sp)
    sp.add_argument("--precision-bits", type=int, default=None)
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("extrapolate", help="asymptotic extrapolation of a spectrum CSV")
    sp.add_argument("spectrum")
    common(sp, config=False)
    sp.add_argument("--stack", default=DEFAULTS["stack"])
    sp.set_defaults(func=cmd_extrapolate)

    sp = sub.add_parser("discrepancy", help="naive k ln k discrepancy and decay-bound check")
    sp.add_argument("spectrum")
    common(sp, config=False)
    sp.add_argument("--k-d", type=float, default=1.0)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--C", type=float, default=DEFAULTS["decay_C"])
    sp.add_argument("--k-min", type=int, default=DEFAULTS["k_min"])
    sp.set_defaults(func=cmd_discrepancy)

    sp = sub.add_parser("predict", help="dominant-balance prediction of the decay law")
    common(sp)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("reproduce", help="rerun a reference experiment")
    sp.add_argument("figure", choices=["fig1", "fig2", "fig3"])
    common(sp, config=False)
    sp.add_argument("--k-min", type=int, default=DEFAULTS["k_min"])
    sp.add_argument("--K", type=int, default=24)
    sp.add_argument("--precision-bits", type=int, default=None)
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputExists as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERWRITE
    except IntegrationError as exc:
        print(f"error: solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except TermCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TERM_CAP
    except (TransformError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRANSFORM
    except BalanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
