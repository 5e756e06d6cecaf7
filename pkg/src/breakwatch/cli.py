"""``breakwatch`` command line: detect, synth, eval and bench.

Every command writes ``manifest.json`` into ``--out`` with the fully
resolved configuration.  Exit codes:

    0  success
    2  usage or invalid configuration
    3  file system error
    4  unparsable series or label file
    5  detector precondition failed (for example a series that is too short)
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from pathlib import Path

from . import __version__
from .baseline import SmootherSpec, smooth
from .core import BETWEEN_SELECTIONS, METHODS, DetectionConfig, TimeSeries, read_series_csv
from .errors import (
    BreakwatchError,
    InvalidConfig,
    InvalidSpec,
    MalformedLabels,
    ParseError,
    WindowTooLarge,
)
from .evalkit import SynthSpec, evaluate, load_dataset, summarize, synthesize, write_labeled, write_scoreboard
from .sigtest import detect, permutation_test

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_PARSE, EXIT_DETECTOR = 0, 2, 3, 4, 5

SMOOTHERS = {"none": None, "mean": "rolling_mean", "median": "rolling_median"}


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _method_list(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown or not methods:
        raise argparse.ArgumentTypeError(f"unknown method(s) {unknown}; choose from {', '.join(METHODS)}")
    return methods


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    d = DetectionConfig()
    p.add_argument("--alpha", type=float, default=d.alpha)
    p.add_argument("--delta", type=int, default=d.delta)
    p.add_argument("--tree-depth", type=int, default=d.tree_depth)
    p.add_argument("--between", choices=BETWEEN_SELECTIONS, default=d.between_selection)
    p.add_argument("--permutations", type=int, default=d.permutations)
    p.add_argument("--level", type=float, default=d.significance_level)
    p.add_argument("--seed", type=int, default=d.rng_seed)
    p.add_argument("--smooth", choices=tuple(SMOOTHERS), default="none")
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", type=Path, default=Path("."))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="breakwatch", description="Robust breakout detection.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="locate the breakout in one series")
    p.add_argument("input", type=Path)
    p.add_argument("--method", choices=METHODS, default="edm")
    _add_config_flags(p)

    p = sub.add_parser("synth", help="write a labeled synthetic series")
    p.add_argument("--lengths", type=_int_list, default=[200, 200])
    p.add_argument("--means", type=_float_list, default=[0.0, 1.0])
    p.add_argument("--sd", type=float, default=0.1)
    p.add_argument("--anomalies", type=int, default=0)
    p.add_argument("--magnitude", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1, help="number of series, seeds seed..seed+count-1")
    p.add_argument("--name", default="series")
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("eval", help="score methods on a labeled dataset directory")
    p.add_argument("dataset", type=Path)
    p.add_argument("--methods", type=_method_list, default=["edm", "edmx", "edivisive"])
    p.add_argument("--match-window", type=int, default=10)
    _add_config_flags(p)

    p = sub.add_parser("bench", help="time the detectors with full permutation tests")
    p.add_argument("--sizes", type=_int_list, default=[500, 1000, 2000])
    p.add_argument("--repeats", type=int, default=1)
    _add_config_flags(p)
    return parser


def _config(args) -> DetectionConfig:
    return DetectionConfig(
        alpha=args.alpha,
        delta=args.delta,
        tree_depth=args.tree_depth,
        between_selection=args.between,
        permutations=args.permutations,
        significance_level=args.level,
        rng_seed=args.seed,
    )


def _smoother(args):
    kind = SMOOTHERS[args.smooth]
    if kind is None:
        return None
    spec = SmootherSpec(kind, args.window)
    return lambda series: smooth(series, spec)


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n")


def _manifest(args, command: str, config: DetectionConfig | None, inputs, outputs, extra=None) -> dict:
    data = {
        "command": command,
        "version": __version__,
        "config": None if config is None else config.to_dict(),
        "inputs": [str(p) for p in inputs],
        "outputs": list(outputs),
    }
    if hasattr(args, "format"):
        data["format"] = args.format
        data["smooth"] = args.smooth
        data["window"] = args.window
    if extra:
        data.update(extra)
    return data


def cmd_detect(args) -> int:
    config = _config(args)
    transform = _smoother(args)
    series = read_series_csv(args.input)
    data = transform(series) if transform else series
    report = detect(data, config, args.method)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)

    with (out / "annotated.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "value", "is_breakout_estimate"])
        for i, v in enumerate(series.values, start=1):
            writer.writerow([i, repr(float(v)), int(i == report.tau_hat)])

    body = report.to_dict()
    body["config"] = config.to_dict()
    body["annotated"] = "annotated.csv"
    if args.format == "json":
        report_name = "report.json"
        _write_json(out / report_name, body)
    else:
        report_name = "report.csv"
        with (out / report_name).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            flat = {k: v for k, v in body.items() if k != "config"}
            writer.writerow(list(flat))
            writer.writerow([repr(v) if isinstance(v, float) else v for v in flat.values()])
    _write_json(out / "manifest.json", _manifest(
        args, "detect", config, [args.input], [report_name, "annotated.csv"], {"method": args.method}
    ))
    print(json.dumps(body, indent=2))
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.count < 1:
        raise InvalidSpec(f"--count must be >= 1, got {args.count}")
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    specs = [
        SynthSpec(tuple(args.lengths), tuple(args.means), args.sd, args.anomalies, args.magnitude, args.seed + k)
        for k in range(args.count)
    ]
    outputs = []
    for k, spec in enumerate(specs):
        stem = args.name if args.count == 1 else f"{args.name}_{k:03d}"
        sidecar = write_labeled(synthesize(spec), out / f"{stem}.csv")
        outputs += [f"{stem}.csv", sidecar.name]
    spec = specs[0]
    _write_json(out / "manifest.json", _manifest(args, "synth", None, [], outputs, {
        "synth": {
            "segment_lengths": list(spec.segment_lengths),
            "segment_means": list(spec.segment_means),
            "noise_sd": spec.noise_sd,
            "anomaly_count": spec.anomaly_count,
            "anomaly_magnitude": spec.anomaly_magnitude,
            "seed": args.seed,
            "count": args.count,
        }
    }))
    for name in outputs:
        print(out / name)
    return EXIT_OK


def cmd_eval(args) -> int:
    config = _config(args)
    if args.match_window < 0:
        raise InvalidConfig(f"--match-window must be >= 0, got {args.match_window}")
    dataset = load_dataset(args.dataset)
    rows = evaluate(dataset, args.methods, config, args.match_window, _smoother(args))
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_scoreboard(rows, out / "scoreboard.csv")
    summary = summarize(rows, args.match_window)
    _write_json(out / "summary.json", summary)
    _write_json(out / "manifest.json", _manifest(
        args, "eval", config, [args.dataset], ["scoreboard.csv", "summary.json"],
        {"methods": args.methods, "match_window": args.match_window},
    ))
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def bench_series(n: int, seed: int) -> TimeSeries:
    """Two-level series with a mid-point breakout and a few anomalies."""
    half = n // 2
    return synthesize(SynthSpec((half, n - half), (0.0, 1.0), 0.5, max(1, n // 200), 5.0, seed))


def run_bench(sizes, repeats: int, config: DetectionConfig) -> list[dict]:
    """Median wall time of a full permutation test per (size, method)."""
    warm = bench_series(4 * config.delta, config.rng_seed)
    for method in METHODS:
        permutation_test(warm, method, DetectionConfig(**{**config.to_dict(), "permutations": 1}))
    rows = []
    for n in sizes:
        series = bench_series(n, config.rng_seed)
        times = {}
        for method in METHODS:
            runs = []
            for _ in range(repeats):
                start = time.perf_counter()
                permutation_test(series, method, config)
                runs.append(time.perf_counter() - start)
            times[method] = (statistics.median(runs), runs)
        base = times["edivisive"][0]
        for method in METHODS:
            wall, runs = times[method]
            rows.append({
                "n": n,
                "method": method,
                "permutations": config.permutations,
                "repeats": repeats,
                "wall_time_s": wall,
                "min_s": min(runs),
                "max_s": max(runs),
                "speedup_vs_edivisive": base / wall if wall > 0 else float("inf"),
            })
    return rows


def cmd_bench(args) -> int:
    config = _config(args)
    if args.repeats < 1:
        raise InvalidConfig(f"--repeats must be >= 1, got {args.repeats}")
    if any(n < 2 * config.delta for n in args.sizes) or not args.sizes:
        raise InvalidConfig(f"every size must be >= 2*delta={2 * config.delta}")
    rows = run_bench(args.sizes, args.repeats, config)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        name = "bench.json"
        _write_json(out / name, rows)
    else:
        name = "bench.csv"
        with (out / name).open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    _write_json(out / "manifest.json", _manifest(
        args, "bench", config, [], [name], {"sizes": args.sizes, "repeats": args.repeats}
    ))
    for row in rows:
        print(f"n={row['n']:>6} {row['method']:<10} {row['wall_time_s']:9.3f}s "
              f"speedup {row['speedup_vs_edivisive']:6.2f}x")
    return EXIT_OK


COMMANDS = {"detect": cmd_detect, "synth": cmd_synth, "eval": cmd_eval, "bench": cmd_bench}


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ParseError, MalformedLabels)):
        return EXIT_PARSE
    if isinstance(exc, (InvalidConfig, InvalidSpec, WindowTooLarge, UsageError)):
        return EXIT_USAGE
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, BreakwatchError):
        return EXIT_DETECTOR
    raise exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (BreakwatchError, OSError, UsageError) as exc:
        print(f"breakwatch {args.command}: error: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
