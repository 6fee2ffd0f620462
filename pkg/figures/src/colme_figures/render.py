"""Render log-log average-MSE figures from simulator CSV output.

One panel per graph degree (the `r` column); inside a panel, simulated
curves are styled by rule (solid oracle, dotted moment test, dashdotted
optimistic distance) and colored by privacy level, while the analytic
local/ideal curves are dashed references.  The script only displays CSV
columns; it never recomputes a statistic.  Output is deterministic:
embedded timestamps are suppressed and the SVG id hash is salted with a
fixed string.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

CSV_COLUMNS = ["curve", "rule", "epsilon", "r", "M", "t",
               "mse_mean", "mse_stderr", "replicas", "seed"]

RULE_STYLES = {"oracle": "-", "bernstein": ":", "optimistic": "-.", "local": "--"}
THEORY_STYLES = {
    "theory-local": {"color": "tab:green", "linestyle": "--"},
    "theory-ideal": {"color": "darkgoldenrod", "linestyle": "--"},
    "theory-thm1": {"color": "dimgray", "linestyle": "--"},
}
EPSILON_PALETTE = ["tab:blue", "tab:orange", "tab:red", "tab:purple",
                   "tab:brown", "tab:cyan"]
SVG_HASHSALT = "colme-figures"


class MissingSeriesError(ValueError):
    """A requested (curve, epsilon, r) combination is absent from the CSV."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__("missing series: " + ", ".join(map(str, self.missing)))


@dataclass(frozen=True)
class FigureSpec:
    """What to plot and where to put it."""

    csv_paths: tuple[str, ...]
    out_path: str
    panel_key: str = "r"
    t_min: float | None = None
    t_max: float | None = None
    require: tuple[tuple, ...] = field(default_factory=tuple)  # (curve, epsilon, r)

    def __post_init__(self):
        if not self.csv_paths:
            raise ValueError("need at least one CSV path")
        if self.panel_key != "r":
            raise ValueError("only panel grouping by r is supported")


def load_rows(paths) -> list[dict]:
    rows = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CSV_COLUMNS:
                raise ValueError(f"{path}: unexpected CSV header {reader.fieldnames}")
            for rec in reader:
                rows.append({
                    "curve": rec["curve"],
                    "rule": rec["rule"],
                    "epsilon": math.inf if rec["epsilon"] == "inf" else float(rec["epsilon"]),
                    "r": int(rec["r"]),
                    "t": int(rec["t"]),
                    "mse_mean": float(rec["mse_mean"]),
                })
    return rows


def _epsilon_label(eps: float) -> str:
    return "inf" if math.isinf(eps) else f"{eps:g}"


def _series_key(row) -> tuple:
    return (row["curve"], row["rule"], row["epsilon"], row["r"])


def _sort_key(key) -> tuple:
    curve, rule, eps, r = key
    return (curve, rule, 1e300 if math.isinf(eps) else eps, r)


def render(spec: FigureSpec):
    """Build the figure, save it, and return the matplotlib Figure (the data
    model: every plotted line is introspectable via the axes)."""
    rows = load_rows(spec.csv_paths)
    if spec.t_min is not None:
        rows = [r for r in rows if r["t"] >= spec.t_min]
    if spec.t_max is not None:
        rows = [r for r in rows if r["t"] <= spec.t_max]
    if not rows:
        raise ValueError("no rows left to plot")

    present = {(r["curve"], r["epsilon"], r["r"]) for r in rows}
    missing = [combo for combo in spec.require if tuple(combo) not in present]
    if missing:
        raise MissingSeriesError(missing)

    series: dict[tuple, list] = {}
    for row in rows:
        series.setdefault(_series_key(row), []).append(row)

    bad = [k for k, pts in series.items() if any(p["mse_mean"] <= 0.0 for p in pts)]
    if bad:
        raise ValueError(f"non-positive mse on a log axis in series {bad}")

    eps_values = sorted({k[2] for k in series if k[0] == "sim"},
                        key=lambda e: 1e300 if math.isinf(e) else e)
    eps_color = {e: EPSILON_PALETTE[i % len(EPSILON_PALETTE)]
                 for i, e in enumerate(eps_values)}

    panels = sorted({k[3] for k in series})
    with plt.rc_context({"svg.hashsalt": SVG_HASHSALT}):
        fig, axes = plt.subplots(1, len(panels), squeeze=False, sharey=True,
                                 figsize=(5.4 * len(panels), 4.2))
        for ax, r_value in zip(axes[0], panels):
            for key in sorted(series, key=_sort_key):
                curve, rule, eps, r = key
                if r != r_value:
                    continue
                pts = sorted(series[key], key=lambda p: p["t"])
                ts = [p["t"] for p in pts]
                ys = [p["mse_mean"] for p in pts]
                if curve == "sim":
                    ax.plot(ts, ys, linestyle=RULE_STYLES.get(rule, "-"),
                            color=eps_color[eps],
                            label=f"{rule}, eps={_epsilon_label(eps)}")
                else:
                    ax.plot(ts, ys, label=curve, **THEORY_STYLES.get(
                        curve, {"color": "black", "linestyle": "--"}))
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel("t")
            ax.set_title(f"r = {r_value}")
            ax.legend(fontsize="small")
        axes[0][0].set_ylabel("average MSE")
        fig.tight_layout()
        fig.savefig(spec.out_path, metadata={"Date": None}
                    if spec.out_path.endswith(".svg") else None)
    return fig
