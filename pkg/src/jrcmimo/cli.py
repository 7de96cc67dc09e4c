"""``jrc``: data files for waveform, density and capacity studies.

Every CSV starts with one ``#``-prefixed JSON line holding the parameters,
seed, library version and (unless ``--no-timestamp``) a UTC timestamp.
Options may also come from a JSON config file (``--config``); command-line
flags win over the file, the file wins over built-in defaults, and unknown
keys are rejected.  ``JRC_SEED`` sets the default seed.

Exit codes: 0 success, 1 a validation failed, 2 usage error, 3 numerical
or generation failure.
"""

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import pathlib
import sys

import numpy as np

from . import __version__
from .capacity import (OutageSpec, SnrConfig, approximation_table, awgn_methods,
                       capacity_fast_fading, optimal_outage, outage_capacity)
from .distributions import (FadingModel, TruncationWindow, amplitude_pdf_curve,
                            product_pdf_curve)
from .errors import ConvergenceError, IterationBudgetExceeded, SweepError
from .montecarlo import (ProductChannelModel, TruncatedRayleighModel,
                         goodness_of_fit, sample)
from .waveform import (ArrayConfig, ConstraintMode, ConstraintSpec,
                       generate_comm_fixed, generate_null_fixed)

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

AWGN_METHODS = ("stable", "single", "delta_1db", "delta_3db", "delta_6db", "none")
WINDOW_METHODS = ("single", "delta_1db", "delta_3db", "delta_6db", "none")
# flags whose values may start with "-"
_SIGNED_FLAGS = ("--theta-c", "--theta-n", "--snr-db")


class UsageError(Exception):
    pass


def parse_angle(text):
    """Radians from ``'-22deg'`` (degrees) or a bare number (radians)."""
    text = str(text).strip()
    try:
        if text.lower().endswith("deg"):
            return math.radians(float(text[:-3]))
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}") from None


def parse_grid(text):
    """``'a:b:step'`` (inclusive) or a comma list of numbers."""
    text = str(text)
    try:
        if ":" in text:
            a, b, step = (float(v) for v in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            return [round(a + k * step, 12) for k in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}") from None


def _upper(text):
    text = str(text).lower()
    if text in ("inf", "none"):
        return math.inf
    if text == "m":
        return "m"
    return float(text)


def _default_seed():
    env = os.environ.get("JRC_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"JRC_SEED must be an integer, got {env!r}") from None


def _common(p):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the timestamp from metadata headers")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _array_args(p):
    p.add_argument("--m", type=int, default=16, help="number of array elements")
    p.add_argument("--p0", type=float, default=0.1)
    p.add_argument("--delta-db", type=float, default=3.0)


def _fading_args(p):
    p.add_argument("--fading", choices=("rayleigh", "rician"), default=None)
    p.add_argument("--sigma-h", type=float, default=None)
    p.add_argument("--sigma-h2", type=float, default=None,
                   help="per-component variance (alternative to --sigma-h)")
    p.add_argument("--k", type=float, default=3.0, help="Rician K factor")


def build_parser():
    parser = argparse.ArgumentParser(prog="jrc", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None, help="JSON file of option values")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    w = sub.add_parser("waveform", help="generate a phase coding matrix")
    _common(w)
    w.add_argument("--m", type=int, default=16)
    w.add_argument("--l", type=int, default=256, help="sub-pulses per pulse")
    w.add_argument("--d", type=float, default=0.5, help="spacing in wavelengths")
    w.add_argument("--theta-c", type=parse_angle, required=True)
    w.add_argument("--theta-n", type=parse_angle, required=True)
    w.add_argument("--method", choices=("null", "comm"), default="null")
    w.add_argument("--constraint", choices=[m.value for m in ConstraintMode],
                   default="none")
    w.add_argument("--p0", type=float, default=0.1)
    w.add_argument("--delta-db", type=float, default=0.0)
    w.add_argument("--max-iterations", type=int, default=1_000_000)

    d = sub.add_parser("pdf", help="analytic density curves")
    _common(d)
    _array_args(d)
    _fading_args(d)
    d.add_argument("--window", choices=("none", "single", "double"), default="double")
    d.add_argument("--upper", type=_upper, default=math.inf,
                   help="upper amplitude limit for none/single windows: inf or M")
    d.add_argument("--modulation-only", action="store_true",
                   help="amplitude density without fading")
    d.add_argument("--points", type=int, default=None,
                   help="grid size (default 8001 for amplitudes, 2001 otherwise)")
    d.add_argument("--validate", action="store_true",
                   help="also write a Monte Carlo histogram and KS report")
    d.add_argument("--samples", type=int, default=10 ** 6)
    d.add_argument("--ks-limit", type=float, default=0.02)

    c = sub.add_parser("capacity", help="capacity sweeps and tables")
    _common(c)
    _array_args(c)
    _fading_args(c)
    c.add_argument("--regime", choices=("awgn", "fast", "outage"), default="awgn")
    c.add_argument("--snr-db", type=parse_grid, default=None,
                   help="grid 'a:b:step' or comma list (dB)")
    c.add_argument("--methods", default="all",
                   help="comma list of series, or 'all'")
    c.add_argument("--bandwidth", type=float, default=1.0)
    c.add_argument("--bits", action="store_true", help="report bits instead of nats")
    c.add_argument("--table2", action="store_true",
                   help="approximation-difference table")
    c.add_argument("--outage-scan", action="store_true",
                   help="rate versus outage probability with argmax")
    c.add_argument("--p-out", type=parse_grid, default=None,
                   help="outage probabilities for --outage-scan")

    v = sub.add_parser("validate", help="run the acceptance suite")
    _common(v)
    v.add_argument("--only", type=parse_grid, default=None,
                   help="comma list of criterion numbers")
    return parser


def _join_signed_values(argv):
    """Glue ``--theta-c -22deg`` into ``--theta-c=-22deg`` for argparse."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _SIGNED_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return
    try:
        data = json.loads(pathlib.Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    command = next((a for a in argv if not a.startswith("-")
                    and a in ("waveform", "pdf", "capacity", "validate")), None)
    if command is None:
        raise UsageError("config given without a command")
    subparser = parser._subparsers._group_actions[0].choices[command]
    actions = {a.dest: a for a in subparser._actions}
    unknown = sorted(k.replace("-", "_") for k in data
                     if k.replace("-", "_") not in actions or k == "help")
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
    defaults = {}
    for key, value in data.items():
        action = actions[key.replace("-", "_")]
        if action.type is not None and isinstance(value, str):
            value = action.type(value)
        defaults[action.dest] = value
        action.required = False
    subparser.set_defaults(**defaults)


def _metadata(args, extra=None):
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("out", "no_timestamp", "config", "format")}
    meta = {"command": args.command, "version": __version__, "seed": args.seed,
            "params": params}
    if extra:
        meta.update(extra)
    if not args.no_timestamp:
        meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(
            timespec="seconds")
    return meta


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return str(obj)


def _clean(obj):
    """Replace non-finite floats by strings so the output stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return str(float(obj))
    return obj


def _dumps(obj, **kwargs):
    return json.dumps(_clean(obj), sort_keys=True, default=_json_default,
                      allow_nan=False, **kwargs)


def _csv_text(meta, header, rows):
    buf = io.StringIO()
    buf.write("# " + _dumps(meta) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()


def _write_table(args, stem, meta, header, rows):
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        path = out / f"{stem}.json"
        doc = {"metadata": meta, "columns": list(header),
               "rows": [list(r) for r in rows]}
        path.write_text(_dumps(doc, indent=2) + "\n")
    else:
        path = out / f"{stem}.csv"
        path.write_text(_csv_text(meta, header, rows))
    return path


def _sigma_h(args):
    if args.sigma_h is not None and args.sigma_h2 is not None:
        raise UsageError("give --sigma-h or --sigma-h2, not both")
    if args.sigma_h2 is not None:
        return math.sqrt(args.sigma_h2)
    return 1.0 if args.sigma_h is None else args.sigma_h


def _fading(args, required=True):
    if args.fading is None:
        if required:
            raise UsageError("a fading model is required (--fading rayleigh|rician)")
        return None
    s = _sigma_h(args)
    if args.fading == "rayleigh":
        return FadingModel.rayleigh(s)
    return FadingModel.rician(s, args.k)


def _window(kind, m, p0, delta_db, upper=math.inf):
    upper = float(m) if upper == "m" else upper
    if kind == "none":
        return TruncationWindow.none(m, upper=upper)
    if kind == "single":
        return TruncationWindow.single_side(m, p0, upper=upper)
    return TruncationWindow.delta(m, p0, delta_db)


def _method_window(name, m, p0):
    """Window of a capacity series name (``single``, ``delta_3db``, ``none``)."""
    if name == "single":
        return TruncationWindow.single_side(m, p0, upper=float(m))
    if name == "none":
        return TruncationWindow.none(m, upper=float(m))
    return TruncationWindow.delta(m, p0, float(name[len("delta_"):-len("db")]))


def _methods(args, allowed):
    if args.methods == "all":
        return list(allowed)
    names = [s.strip() for s in args.methods.split(",") if s.strip()]
    bad = [n for n in names if n not in allowed]
    if bad or not names:
        raise UsageError(f"unknown methods {bad}; choose from {', '.join(allowed)}")
    return names


def cmd_waveform(args):
    cfg = ArrayConfig(args.m, args.l, args.theta_c, args.theta_n, d=args.d)
    if args.method == "comm":
        mat = generate_comm_fixed(cfg, args.p0, seed=args.seed,
                                  max_iterations=args.max_iterations)
    else:
        spec = ConstraintSpec(ConstraintMode(args.constraint), p0=args.p0,
                              delta_db=args.delta_db,
                              max_iterations=args.max_iterations)
        mat = generate_null_fixed(cfg, spec, seed=args.seed)
    meta = _metadata(args)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = mat.to_json_dict()
    doc["metadata"] = meta
    (out / "phase_matrix.json").write_text(_dumps(doc, indent=2) + "\n")
    args.format = "csv"
    _write_table(args, "amplitudes", meta, ("l", "amplitude", "correction"),
                 [(l + 1, a, c) for l, (a, c) in
                  enumerate(zip(mat.amplitudes, mat.corrections))])
    _write_table(args, "iterations", meta, ("l", "iterations"),
                 [(l + 1, int(n)) for l, n in enumerate(mat.iterations)])
    return EXIT_OK


def cmd_pdf(args):
    if args.modulation_only:
        win = _window(args.window, args.m, args.p0, args.delta_db, args.upper)
        curve = amplitude_pdf_curve(win, args.points or 8001)
        model = TruncatedRayleighModel(win)
    else:
        fading = _fading(args, required=True)
        win = _window(args.window, args.m, args.p0, args.delta_db, args.upper)
        curve = product_pdf_curve(win, fading, args.points or 2001)
        model = ProductChannelModel(win, fading)
    meta = _metadata(args, {"curve": curve.metadata, "total_mass": curve.total_mass})
    _write_table(args, "pdf", meta, ("x", "density"), curve.to_csv_rows())
    if not args.validate:
        return EXIT_OK
    batch = sample(model, args.samples, seed=args.seed)
    rep = goodness_of_fit(batch, curve)
    hi = float(min(curve.grid[-1], batch.values.max()))
    edges = np.linspace(curve.grid[0], hi, 101)
    hist, _ = np.histogram(batch.values, bins=edges)
    dens = hist / (len(batch) * np.diff(edges))
    _write_table(args, "histogram", meta, ("bin_center", "density"),
                 zip(0.5 * (edges[1:] + edges[:-1]), dens))
    report = json.loads(rep.to_json())
    report.update({"ks_limit": args.ks_limit, "passed": rep.ks_statistic < args.ks_limit,
                   "tag": batch.tag, "seed": args.seed})
    (pathlib.Path(args.out) / "gof.json").write_text(_dumps(report, indent=2) + "\n")
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def _unit(args, nats):
    return nats / math.log(2.0) if args.bits else nats


def cmd_capacity(args):
    unit = "bits" if args.bits else "nats"
    if args.table2:
        snr_db = args.snr_db or [10.0]
        rows = []
        for db in snr_db:
            for r in approximation_table(10.0 ** (db / 10.0), args.p0):
                rows.append((db, r["m"], _unit(args, r["no_window"]),
                             _unit(args, r["single_side"])))
        _write_table(args, "table2", _metadata(args, {"unit": unit}),
                     ("snr_db", "m", "no_window_diff", "single_side_diff"), rows)
        return EXIT_OK

    if args.outage_scan:
        return _outage_scan(args, unit)

    if args.regime == "awgn":
        names = _methods(args, AWGN_METHODS)
        grid = args.snr_db or parse_grid("-10:30:1")

        def point(db):
            res = awgn_methods(args.m, args.p0, SnrConfig.from_db(db, args.bandwidth))
            return [_unit(args, res[n].nats) for n in names]
    elif args.regime == "fast":
        fading = _fading(args)
        names = _methods(args, WINDOW_METHODS)
        grid = args.snr_db or parse_grid("-10:30:5")

        def point(db):
            snr = SnrConfig.from_db(db, args.bandwidth)
            return [_unit(args, capacity_fast_fading(
                snr, _method_window(n, args.m, args.p0), fading).nats) for n in names]
    else:
        fading = _fading(args)
        series = _methods(args, WINDOW_METHODS)
        grid = args.snr_db or parse_grid("-10:30:5")
        names = [c for n in series for c in (n, f"{n}_p_out")]

        def point(db):
            snr = SnrConfig.from_db(db, args.bandwidth)
            row = []
            for n in series:
                p, rate = optimal_outage(snr, _method_window(n, args.m, args.p0), fading)
                row += [_unit(args, rate.nats), p]
            return row

    rows = []
    for db in grid:
        try:
            rows.append([db] + point(db))
        except (ConvergenceError, ArithmeticError) as exc:
            raise SweepError({"snr_db": db}, exc) from exc
    _write_table(args, "capacity", _metadata(args, {"unit": unit}),
                 ["snr_db"] + list(names), rows)
    return EXIT_OK


def _outage_scan(args, unit):
    fading = _fading(args)
    names = _methods(args, WINDOW_METHODS)
    grid = args.snr_db or [10.0]
    p_grid = args.p_out or parse_grid("0.01:0.99:0.01")
    rows = []
    best = {}
    for db in grid:
        snr = SnrConfig.from_db(db, args.bandwidth)
        for n in names:
            win = _method_window(n, args.m, args.p0)
            for p in p_grid:
                cap, rate = outage_capacity(snr, win, fading, OutageSpec(p))
                rows.append((db, n, p, _unit(args, cap.nats), _unit(args, rate.nats), 0))
            p_opt, rate = optimal_outage(snr, win, fading)
            cap = outage_capacity(snr, win, fading, OutageSpec(p_opt))[0]
            rows.append((db, n, p_opt, _unit(args, cap.nats), _unit(args, rate.nats), 1))
            best[f"{db}:{n}"] = {"p_out": p_opt, "rate": _unit(args, rate.nats)}
    meta = _metadata(args, {"unit": unit, "argmax": best,
                            "fading": fading.to_dict()})
    _write_table(args, "outage_scan", meta,
                 ("snr_db", "method", "p_out", "capacity", "rate", "is_argmax"), rows)
    return EXIT_OK


def cmd_validate(args):
    from .validation import run_acceptance, write_results

    only = None if args.only is None else {int(v) for v in args.only}

    def report(res):
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] criterion {res.number}: {res.name} "
              f"({res.runtime_s:.1f} s)", flush=True)

    results = run_acceptance(seed=args.seed, only=only, progress=report)
    write_results(results, args.out, args.seed)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


COMMANDS = {"waveform": cmd_waveform, "pdf": cmd_pdf, "capacity": cmd_capacity,
            "validate": cmd_validate}


def main(argv=None):
    argv = _join_signed_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.seed is None:
            args.seed = _default_seed()
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"jrc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (IterationBudgetExceeded, ArithmeticError, SweepError, ValueError) as exc:
        print(f"jrc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
