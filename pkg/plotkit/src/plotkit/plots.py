"""Render benchmark figures from the harness CSV files.

Consumes only the published CSV schemas (results.csv for the NMSE line
plots, params.csv for the parameter scatter); it has no dependency on the
estimation library. Rendering is deterministic for a fixed spec: SVG ids
are salted with a constant and the date metadata is suppressed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

LINE_KINDS = ("nmse_vs_snr", "nmse_vs_k")
KINDS = LINE_KINDS + ("param_scatter",)

LINE_COLUMNS = ("sweep_value", "method", "nmse")
SCATTER_COLUMNS = ("method", "kind", "true_theta_rad", "true_r_m",
                   "est_theta_rad", "est_r_m", "matched")

DEFAULT_STYLES = {
    "anm": {"color": "#1f77b4", "marker": "o"},
    "omp": {"color": "#d62728", "marker": "s"},
}

AXIS_LABELS = {"nmse_vs_snr": "SNR (dB)", "nmse_vs_k": "number of paths K"}


class SchemaError(ValueError):
    """CSV header does not carry the columns a figure kind needs."""


class EmptySelectionError(ValueError):
    """No rows (or no methods) survive filtering."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    kind: str                          # nmse_vs_snr | nmse_vs_k | param_scatter
    out_path: str
    methods: tuple = ()                # empty -> every method in the file
    styles: dict = field(default_factory=dict)
    title: str = ""

    @staticmethod
    def from_json(path) -> "PlotSpec":
        data = json.loads(Path(path).read_text())
        known = {"csv_path", "kind", "out_path", "methods", "styles", "title"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown spec keys {sorted(unknown)}")
        if "methods" in data:
            data["methods"] = tuple(data["methods"])
        return PlotSpec(**data)


def read_rows(csv_path, required):
    """Rows as dicts; raises SchemaError with the exact column diff."""
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(
                f"{csv_path}: missing columns {missing}; found {header}")
        return list(reader)


def aggregate_mean_nmse(rows, methods=()):
    """Mean NMSE per (method, sweep point); NaNs are excluded."""
    acc = {}
    for row in rows:
        m = row["method"]
        if methods and m not in methods:
            continue
        val = float(row["nmse"])
        if np.isnan(val):
            continue
        acc.setdefault(m, {}).setdefault(float(row["sweep_value"]), []).append(val)
    return {m: {p: float(np.mean(v)) for p, v in pts.items()}
            for m, pts in acc.items()}


def _style_for(spec, method, fallback_index):
    if method in spec.styles:
        return spec.styles[method]
    if method in DEFAULT_STYLES:
        return DEFAULT_STYLES[method]
    cycle = ("#2ca02c", "#9467bd", "#8c564b", "#e377c2")
    return {"color": cycle[fallback_index % len(cycle)], "marker": "^"}


def _deterministic_save(fig, out_path):
    matplotlib.rcParams["svg.hashsalt"] = "plotkit"
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    meta = {"Date": None} if out_path.suffix.lower() == ".svg" else {}
    fig.savefig(out_path, metadata=meta)
    plt.close(fig)


def render_lines(spec: PlotSpec):
    rows = read_rows(spec.csv_path, LINE_COLUMNS)
    means = aggregate_mean_nmse(rows, spec.methods)
    if not means:
        raise EmptySelectionError(
            f"no rows for methods {list(spec.methods) or 'any'} in {spec.csv_path}")
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for i, (method, pts) in enumerate(sorted(means.items())):
        xs = np.array(sorted(pts))
        ys = np.array([pts[x] for x in xs])
        st = _style_for(spec, method, i)
        ax.semilogy(xs, ys, label=method, color=st.get("color"),
                    marker=st.get("marker", "o"))
    ax.set_xlabel(AXIS_LABELS[spec.kind])
    ax.set_ylabel("NMSE")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout()
    _deterministic_save(fig, spec.out_path)


def render_param_scatter(spec: PlotSpec):
    rows = read_rows(spec.csv_path, SCATTER_COLUMNS)
    if spec.methods:
        rows = [r for r in rows if r["method"] in spec.methods]
    if not rows:
        raise EmptySelectionError(f"no rows selected from {spec.csv_path}")

    far = [r for r in rows if r["kind"] == "far"]
    near = [r for r in rows if r["kind"] == "near"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.4, 3.6))

    def _f(row, key):
        return float(row[key])

    if far:
        t = np.array([_f(r, "true_theta_rad") for r in far])
        e = np.array([_f(r, "est_theta_rad") for r in far])
        keep = np.isfinite(t) & np.isfinite(e)
        lo, hi = -np.pi / 2, np.pi / 2
        ax1.plot([lo, hi], [lo, hi], "k--", lw=0.8, alpha=0.5)
        ax1.plot(t[keep], e[keep], "o", ms=5, mfc="none", color="#1f77b4")
    ax1.set_xlabel("true angle (rad)")
    ax1.set_ylabel("estimated angle (rad)")
    ax1.set_title("far-field angles")
    ax1.grid(alpha=0.3)

    if near:
        tt = np.array([_f(r, "true_theta_rad") for r in near])
        tr = np.array([_f(r, "true_r_m") for r in near])
        et = np.array([_f(r, "est_theta_rad") for r in near])
        er = np.array([_f(r, "est_r_m") for r in near])
        truth_ok = np.isfinite(tt) & np.isfinite(tr)
        est_ok = np.isfinite(et) & np.isfinite(er)
        ax2.plot(tt[truth_ok], tr[truth_ok], "o", ms=7, mfc="none",
                 color="k", label="truth")
        ax2.plot(et[est_ok], er[est_ok], "x", ms=6, color="#d62728",
                 label="estimate")
        ax2.legend()
    ax2.set_xlabel("angle (rad)")
    ax2.set_ylabel("range (m)")
    ax2.set_title("near-field angle/range")
    ax2.grid(alpha=0.3)

    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    _deterministic_save(fig, spec.out_path)


def render(spec: PlotSpec):
    """Dispatch on figure kind; returns the output path."""
    if spec.kind not in KINDS:
        raise ValueError(f"unknown kind '{spec.kind}'; choose from {KINDS}")
    if spec.kind in LINE_KINDS:
        render_lines(spec)
    else:
        render_param_scatter(spec)
    return spec.out_path
