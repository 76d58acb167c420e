"""Command-line front end: dimensioning queries, simulation sweeps, reports.

Exit codes: 0 success, 1 invalid input, 2 infeasible dimensioning target,
3 I/O failure.  Relative output paths are resolved against the directory
named by ``BLOOMSIG_OUT_DIR`` when that variable is set.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .decoder import write_trace
from .dimensioning import (
    DimensioningInput,
    FixedPointDivergence,
    InfeasibleTargetError,
    dimension,
)
from .ormac import ChannelParams
from .sim import (
    RESULT_COLUMNS,
    SCHEMES,
    ExperimentSpec,
    SimConfig,
    run_experiment,
    write_results,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3


class ConfigError(ValueError):
    pass


# config keys, their parsers and defaults; `seed` is deliberately without a
# default so published runs can never depend on silent entropy
def _parse_float_list(text: str) -> Tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _parse_str_list(text: str) -> Tuple[str, ...]:
    return tuple(x for x in text.replace(",", " ").split())


_CONFIG_SCHEMA: Dict[str, tuple] = {
    "seed": (int, None),
    "T": (int, 1000),
    "M": (int, 54),
    "G": (float, 0.99),
    "pd": (float, 0.99),
    "pf": (float, 1e-3),
    "N": (_parse_float_list, (100.0, 300.0, 500.0, 700.0, 900.0)),
    "schemes": (_parse_str_list, SCHEMES),
    "replications": (int, 100),
    "rao_period_ms": (float, 1.0),
    "backoff_window_ms": (float, 20.0),
    "max_attempts": (int, 10),
    "payload_bytes": (int, 100),
    "rar_window_ms": (float, 5.0),
    "processing_delay_ms": (float, 3.0),
    "grant_to_data_ms": (float, 5.0),
    "cr_timeout_ms": (float, 32.0),
    "mixer": (str, "mix64"),
}


def parse_config(text: str) -> Dict[str, object]:
    """Parse the flat key=value format; '#' starts a comment."""
    values: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _CONFIG_SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        parser, _ = _CONFIG_SCHEMA[key]
        try:
            values[key] = parser(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return values


def serialize_config(values: Dict[str, object]) -> str:
    lines = []
    for key in _CONFIG_SCHEMA:
        if key not in values:
            continue
        val = values[key]
        if isinstance(val, tuple):
            text = ",".join(str(v) for v in val)
        else:
            text = str(val)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def build_spec(values: Dict[str, object]) -> ExperimentSpec:
    merged: Dict[str, object] = {}
    for key, (_, default) in _CONFIG_SCHEMA.items():
        merged[key] = values.get(key, default)
    if merged["seed"] is None:
        raise ConfigError("config must set a master seed (key: seed)")
    channel = ChannelParams(float(merged["pd"]), float(merged["pf"]))
    base = SimConfig(
        T=int(merged["T"]),
        N=float(merged["N"][0]),
        M=int(merged["M"]),
        rao_period_ms=float(merged["rao_period_ms"]),
        backoff_window_ms=float(merged["backoff_window_ms"]),
        max_attempts=int(merged["max_attempts"]),
        payload_bytes=int(merged["payload_bytes"]),
        channel=channel,
        rar_window_ms=float(merged["rar_window_ms"]),
        processing_delay_ms=float(merged["processing_delay_ms"]),
        grant_to_data_ms=float(merged["grant_to_data_ms"]),
        cr_timeout_ms=float(merged["cr_timeout_ms"]),
        mixer=str(merged["mixer"]),
    )
    return ExperimentSpec(
        base=base,
        sweep_N=tuple(merged["N"]),
        schemes=tuple(merged["schemes"]),
        replications=int(merged["replications"]),
        G_hat=float(merged["G"]),
        master_seed=int(merged["seed"]),
    )


def _out_path(path_text: str) -> Path:
    path = Path(path_text)
    base = os.environ.get("BLOOMSIG_OUT_DIR")
    if base and not path.is_absolute():
        return Path(base) / path
    return path


def cmd_dimension(args: argparse.Namespace) -> int:
    try:
        inp = DimensioningInput(
            N=args.N,
            T=args.T,
            M=args.M,
            G_hat=args.G,
            channel=ChannelParams(args.pd, args.pf),
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        res = dimension(inp)
    except InfeasibleTargetError as exc:
        print(f"infeasible dimensioning target: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except FixedPointDivergence as exc:
        print(f"fixed point did not converge: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(
        f"signature weight K          : {res.K}\n"
        f"frame length L              : {res.L_hat}\n"
        f"target false-positive rate  : {res.p_fa_target:.6g}\n"
        f"predicted false-positive    : {res.p_fa_predicted:.6g}\n"
        f"predicted goodput           : {res.G_predicted:.6g}\n"
        f"fixed-point iterations      : {res.iterations}"
    )
    print(
        "RESULT "
        f"N={args.N:g} T={args.T} M={args.M} G_hat={args.G:g} "
        f"p_d={args.pd:g} p_f={args.pf:g} K={res.K} L={res.L_hat} "
        f"p_fa_target={res.p_fa_target!r} p_fa_predicted={res.p_fa_predicted!r} "
        f"G_predicted={res.G_predicted!r} iterations={res.iterations}"
    )
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        values = parse_config(text)
        for override in args.set or []:
            if "=" not in override:
                raise ConfigError(f"--set expects key=value, got {override!r}")
            values.update(parse_config(override))
        spec = build_spec(values)
    except (ConfigError, ValueError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID

    trace_path = _out_path(args.trace) if args.trace else None
    sink = None
    if trace_path is not None:
        def sink(trace, _path=trace_path):
            try:
                write_trace(trace, _path)
            except OSError as exc:
                raise SystemExit(f"cannot write trace {_path}: {exc}")

    try:
        rows = run_experiment(spec, trace_sink=sink)
    except InfeasibleTargetError as exc:
        print(f"infeasible dimensioning target: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except FixedPointDivergence as exc:
        print(f"fixed point did not converge: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    out_path = _out_path(args.out)
    try:
        write_results(rows, out_path)
    except OSError as exc:
        print(f"cannot write results {out_path}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(rows)} rows to {out_path}")
    return EXIT_OK


def _mean_ci(values: Sequence[float]) -> Tuple[Optional[float], Optional[float]]:
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    mean = sum(vals) / len(vals)
    if len(vals) < 2:
        return mean, None
    var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
    return mean, 1.96 * math.sqrt(var / len(vals))


def _fmt_ci(mean: Optional[float], ci: Optional[float], width: int = 18) -> str:
    if mean is None:
        return "-".ljust(width)
    if ci is None:
        return f"{mean:.4f}".ljust(width)
    return f"{mean:.4f} ±{ci:.4f}".ljust(width)


def read_results(path) -> List[Dict[str, object]]:
    """Parse a results CSV, aborting with all malformed line numbers listed."""
    rows: List[Dict[str, object]] = []
    bad: List[str] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(RESULT_COLUMNS):
            raise ConfigError(
                f"unexpected header {header!r}; expected {list(RESULT_COLUMNS)}"
            )
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(RESULT_COLUMNS):
                bad.append(f"line {lineno}: expected {len(RESULT_COLUMNS)} fields")
                continue
            row = dict(zip(RESULT_COLUMNS, rec))
            try:
                row["N"] = float(row["N"])
                row["arrivals"] = int(row["arrivals"])
                row["false_positives"] = int(row["false_positives"])
                for key in ("goodput", "det_prob", "mean_step1_ms", "mean_final_ms"):
                    row[key] = float(row[key]) if row[key] != "" else None
                if row["scheme"] not in SCHEMES:
                    raise ValueError(f"unknown scheme {row['scheme']!r}")
            except ValueError as exc:
                bad.append(f"line {lineno}: {exc}")
                continue
            rows.append(row)
    if bad:
        raise ConfigError("malformed rows:\n  " + "\n  ".join(bad))
    return rows


def summarize(rows: Sequence[Dict[str, object]]) -> List[Dict[str, object]]:
    groups: Dict[Tuple[str, float], List[Dict[str, object]]] = {}
    for row in rows:
        groups.setdefault((str(row["scheme"]), float(row["N"])), []).append(row)
    summary = []
    for (scheme, n_val) in sorted(groups, key=lambda k: (k[1], SCHEMES.index(k[0]))):
        members = groups[(scheme, n_val)]
        entry: Dict[str, object] = {
            "scheme": scheme,
            "N": n_val,
            "replications": len(members),
        }
        for key in ("goodput", "det_prob", "mean_step1_ms", "mean_final_ms"):
            mean, ci = _mean_ci([m[key] for m in members])
            entry[key] = mean
            entry[key + "_ci95"] = ci
        summary.append(entry)
    return summary


def cmd_report(args: argparse.Namespace) -> int:
    try:
        rows = read_results(args.results)
    except OSError as exc:
        print(f"cannot read {args.results}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"invalid results file: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if not rows:
        print("no data rows in results file", file=sys.stderr)
        return EXIT_INVALID

    summary = summarize(rows)
    print(
        "scheme     N      reps  goodput            det_prob           "
        "step1_ms           final_ms"
    )
    for entry in summary:
        print(
            f"{entry['scheme']:<10} {entry['N']:<6g} {entry['replications']:<5} "
            + _fmt_ci(entry["goodput"], entry["goodput_ci95"])
            + " "
            + _fmt_ci(entry["det_prob"], entry["det_prob_ci95"])
            + " "
            + _fmt_ci(entry["mean_step1_ms"], entry["mean_step1_ms_ci95"])
            + " "
            + _fmt_ci(entry["mean_final_ms"], entry["mean_final_ms_ci95"])
        )

    sweep = sorted({float(e["N"]) for e in summary})
    print("\ndetection probability [%]:")
    print("scheme     " + "".join(f"N={n:<8g}" for n in sweep))
    for scheme in SCHEMES:
        cells = []
        for n_val in sweep:
            match = [e for e in summary if e["scheme"] == scheme and e["N"] == n_val]
            if match and match[0]["det_prob"] is not None:
                cells.append(f"{100 * match[0]['det_prob']:<10.1f}")
            else:
                cells.append("-".ljust(10))
        if any(c.strip() != "-" for c in cells):
            print(f"{scheme:<10} " + "".join(cells))

    if args.out:
        out_path = _out_path(args.out)
        try:
            with open(out_path, "w", newline="", encoding="ascii") as fh:
                writer = csv.writer(fh)
                cols = [
                    "scheme", "N", "replications",
                    "goodput", "goodput_ci95",
                    "det_prob", "det_prob_ci95",
                    "mean_step1_ms", "mean_step1_ms_ci95",
                    "mean_final_ms", "mean_final_ms_ci95",
                ]
                writer.writerow(cols)
                for entry in summary:
                    writer.writerow(
                        ["" if entry[c] is None else entry[c] for c in cols]
                    )
        except OSError as exc:
            print(f"cannot write summary {out_path}: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"\nwrote summary to {out_path}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bloomsig",
        description="Bloom-filter signature random access: dimensioning and simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_dim = sub.add_parser("dimension", help="compute the (K, L) operating point")
    p_dim.add_argument("--N", type=float, required=True, help="expected arrivals")
    p_dim.add_argument("--T", type=int, required=True, help="population size")
    p_dim.add_argument("--M", type=int, default=54, help="preambles per RAO")
    p_dim.add_argument("--G", type=float, required=True, help="target goodput")
    p_dim.add_argument("--pd", type=float, default=0.99, help="detection probability")
    p_dim.add_argument("--pf", type=float, default=1e-3, help="false-alarm probability")
    p_dim.set_defaults(func=cmd_dimension)

    p_sim = sub.add_parser("simulate", help="run a simulation sweep from a config file")
    p_sim.add_argument("--config", required=True, help="flat key=value config file")
    p_sim.add_argument("--out", default="results.csv", help="results CSV path")
    p_sim.add_argument("--trace", default=None, help="decode-trace CSV path")
    p_sim.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config key (repeatable; flags win over the file)",
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("report", help="aggregate a results CSV")
    p_rep.add_argument("results", help="results CSV produced by `simulate`")
    p_rep.add_argument("--out", default=None, help="optional summary CSV path")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
