"""Render paper-style figures from the simulator's CSV outputs.

Four kinds are supported, consuming only the public CSV schemas (no import
of the simulator package):

* ``trace``           -- viable/decoded counts per RAO (decode-trace CSV)
* ``goodput``         -- mean goodput vs N, one series per scheme, CI bands
* ``latency``         -- mean final-step latency vs N, same layout
* ``detection-table`` -- detection probability [%] as a text table

Figure kinds write both a raster (PNG) and a vector (SVG) file.  Rendering
is a pure function of the input bytes: fixed styling, no timestamps.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

matplotlib.rcParams["svg.hashsalt"] = "bloomsig-figures"

KINDS = ("trace", "goodput", "latency", "detection-table")
SCHEME_ORDER = ("signature", "baseline", "random")
SCHEME_LABELS = {
    "signature": "signature-based",
    "baseline": "3GPP baseline",
    "random": "random construction",
}
SCHEME_COLORS = {
    "signature": "#1b6ca8",
    "baseline": "#c23b22",
    "random": "#5e8c61",
}
_SAVEFIG_META = {"png": {"Software": None}, "svg": {"Date": None}}


class RenderError(ValueError):
    """Bad figure spec or input data."""


def read_csv(path) -> Tuple[List[str], List[Dict[str, str]]]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise RenderError(f"{path}: empty file, no header")
        rows = [row for row in reader if any(v.strip() for v in row.values() if v)]
    return list(reader.fieldnames), rows


def require_columns(columns: Sequence[str], needed: Sequence[str], path) -> None:
    missing = [c for c in needed if c not in columns]
    if missing:
        raise RenderError(f"{path}: missing columns: {', '.join(missing)}")


def check_nonempty(rows: Sequence[dict], path) -> None:
    if not rows:
        raise RenderError(f"{path}: no data rows")


def mean_ci(values: Sequence[float]) -> Tuple[float, float]:
    mean = sum(values) / len(values)
    if len(values) < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
    return mean, 1.96 * math.sqrt(var / len(values))


def aggregate(
    rows: Sequence[Dict[str, str]], value_column: str
) -> Dict[str, List[Tuple[float, float, float]]]:
    """Per-scheme sorted series of (N, mean, ci95) for one metric column."""
    groups: Dict[Tuple[str, float], List[float]] = {}
    for row in rows:
        text = (row.get(value_column) or "").strip()
        if not text:
            continue  # metric undefined for this replication
        groups.setdefault((row["scheme"], float(row["N"])), []).append(float(text))
    series: Dict[str, List[Tuple[float, float, float]]] = {}
    for (scheme, n_val), values in sorted(groups.items()):
        series.setdefault(scheme, []).append((n_val, *mean_ci(values)))
    return series


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.4, 4.0), dpi=120)
    ax.grid(True, linewidth=0.4, alpha=0.5)
    return fig, ax


def _save(fig, out_base: Path) -> List[Path]:
    out_base.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for suffix in ("png", "svg"):
        target = out_base.with_suffix("." + suffix)
        fig.savefig(target, metadata=_SAVEFIG_META[suffix])
        written.append(target)
    plt.close(fig)
    return written


def _series_plot(rows, value_column, ylabel, out_base: Path) -> List[Path]:
    series = aggregate(rows, value_column)
    if not series:
        raise RenderError(f"no usable values in column {value_column!r}")
    fig, ax = _new_axes()
    for scheme in SCHEME_ORDER:
        if scheme not in series:
            continue
        pts = series[scheme]
        xs = [p[0] for p in pts]
        means = [p[1] for p in pts]
        cis = [p[2] for p in pts]
        color = SCHEME_COLORS[scheme]
        ax.plot(xs, means, marker="o", color=color, label=SCHEME_LABELS[scheme])
        ax.fill_between(
            xs,
            [m - c for m, c in zip(means, cis)],
            [m + c for m, c in zip(means, cis)],
            color=color,
            alpha=0.2,
            linewidth=0,
        )
    ax.set_xlabel("expected arrivals N")
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_base)


def render_goodput(rows, out_base: Path) -> List[Path]:
    return _series_plot(rows, "goodput", "mean goodput", out_base)


def render_latency(rows, out_base: Path) -> List[Path]:
    return _series_plot(
        rows, "mean_final_ms", "mean final-step latency [ms]", out_base
    )


def render_trace(rows, out_base: Path) -> List[Path]:
    recs = sorted((int(r["rao"]), int(r["viable"]), int(r["decoded"])) for r in rows)
    fig, ax = _new_axes()
    ax.plot([r[0] for r in recs], [r[1] for r in recs],
            color=SCHEME_COLORS["baseline"], label="potentially active")
    ax.plot([r[0] for r in recs], [r[2] for r in recs],
            color=SCHEME_COLORS["signature"], label="decoded")
    ax.set_xlabel("RAO index")
    ax.set_ylabel("signature count")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_base)


def render_detection_table(rows, out_path: Path) -> List[Path]:
    series = aggregate(rows, "det_prob")
    if not series:
        raise RenderError("no usable values in column 'det_prob'")
    sweep = sorted({n for pts in series.values() for n, _, _ in pts})
    lines = ["detection probability [%]", ""]
    header = f"{'N':<22}" + "".join(f"{n:>8g}" for n in sweep)
    lines.append(header)
    lines.append("-" * len(header))
    for scheme in SCHEME_ORDER:
        if scheme not in series:
            continue
        by_n = {n: mean for n, mean, _ in series[scheme]}
        cells = "".join(
            f"{100 * by_n[n]:>8.1f}" if n in by_n else f"{'-':>8}" for n in sweep
        )
        lines.append(f"{SCHEME_LABELS[scheme]:<22}" + cells)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return [out_path]


def render(kind: str, in_path, out_path) -> List[Path]:
    """Render one figure kind; returns the written paths."""
    if kind not in KINDS:
        raise RenderError(f"unknown kind {kind!r}; expected one of {KINDS}")
    columns, rows = read_csv(in_path)
    out = Path(out_path)
    if kind == "trace":
        require_columns(columns, ("rao", "viable", "decoded"), in_path)
        check_nonempty(rows, in_path)
        return render_trace(rows, out)
    if kind == "goodput":
        require_columns(columns, ("scheme", "N", "goodput"), in_path)
        check_nonempty(rows, in_path)
        return render_goodput(rows, out)
    if kind == "latency":
        require_columns(columns, ("scheme", "N", "mean_final_ms"), in_path)
        check_nonempty(rows, in_path)
        return render_latency(rows, out)
    require_columns(columns, ("scheme", "N", "det_prob"), in_path)
    check_nonempty(rows, in_path)
    return render_detection_table(rows, out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render figures/tables from simulation CSV outputs.",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="in_path", required=True, help="input CSV")
    parser.add_argument(
        "--out",
        required=True,
        help="output path; figure kinds write <out>.png and <out>.svg",
    )
    args = parser.parse_args(argv)
    try:
        written = render(args.kind, args.in_path, args.out)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
