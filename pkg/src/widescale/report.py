"""Delimited output and figures for sweeps, regime maps and realizations.

CSV cells are written with repr formatting and a fixed row order, so two
runs of the same configuration produce byte-identical files.  Figures are
rendered headless to SVG next to the delimited output; they are for eyes,
not for diffing.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .harness import SweepResult  # noqa: E402
from .imh import ImhRealization  # noqa: E402
from .ish import IshRealization  # noqa: E402


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(float(value))  # plain-float repr even for numpy scalars
    return str(value)


def write_csv(path: str, header: list, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


ROWS_HEADER = ["n", "seed", "protocol", "feasible_rate", "regime",
               "overspread_fraction", "infeasible_route_fraction"]
SUMMARY_HEADER = ["protocol", "slope", "ci_low", "ci_high", "theory_slope", "pass"]


def write_sweep_rows(result: SweepResult, path: str) -> str:
    rows = [(r.n, r.seed, r.protocol, r.feasible_rate, r.regime,
             r.overspread_fraction, r.infeasible_route_fraction)
            for r in result.rows]
    return write_csv(path, ROWS_HEADER, rows)


def write_sweep_summary(result: SweepResult, path: str) -> str:
    rows = []
    for p in result.protocols:
        f = result.fits[p]
        rows.append((p, f.slope,
                     f.fit.ci_low if f.fit else math.nan,
                     f.fit.ci_high if f.fit else math.nan,
                     f.theory_slope, f.passed))
    return write_csv(path, SUMMARY_HEADER, rows)


def sweep_figure(result: SweepResult, path: str) -> str:
    """Log-log feasible rate against n: per-seed points, means, fit, theory."""
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    colors = {"ish": "tab:blue", "imh": "tab:red"}
    for p in result.protocols:
        f = result.fits[p]
        ns = np.array([r.n for r in result.rows if r.protocol == p and r.valid])
        ys = np.array([r.feasible_rate for r in result.rows
                       if r.protocol == p and r.valid])
        ax.plot(ns, ys, ".", color=colors[p], alpha=0.25, markersize=4)
        if f.n_used:
            ax.plot(f.n_used, f.geomeans, "o-", color=colors[p],
                    label=f"{p} (slope {f.slope:.3f}, theory {f.theory_slope:+.3f})")
        if f.fit and f.n_used:
            anchor_n = f.fit.window_n[0]
            anchor = f.geomeans[f.n_used.index(anchor_n)]
            ns_line = np.array(f.fit.window_n, dtype=float)
            ax.plot(ns_line, anchor * (ns_line / anchor_n) ** f.theory_slope,
                    "--", color=colors[p], alpha=0.7)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("nodes n")
    ax.set_ylabel("feasible per-node rate [bits/s]")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


REGIME_MAP_HEADER = ["psi_plus_gamma", "ish_exponent", "imh_exponent", "regime"]


def write_regime_map(curve: dict, path: str, measured: dict | None = None) -> str:
    """Analytic exponent curve, optionally joined with measured slopes.

    curve is the output of exponent_curve; measured maps protocol name to
    an array of fitted slopes aligned with curve["x"].
    """
    header = list(REGIME_MAP_HEADER)
    cols = [curve["x"], curve["ish"], curve["imh"], curve["regime"]]
    if measured:
        for p in sorted(measured):
            header.append(f"measured_{p}_slope")
            cols.append(measured[p])
    rows = [tuple(float(c[i]) if not isinstance(c[i], str) else c[i] for c in cols)
            for i in range(len(curve["x"]))]
    return write_csv(path, header, rows)


def regime_map_figure(curve: dict, path: str, measured: dict | None = None) -> str:
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    x = np.asarray(curve["x"], dtype=float)
    ax.plot(x, curve["ish"], "-", color="tab:blue", label="single-hop exponent")
    ax.plot(x, curve["imh"], "-", color="tab:red", label="multihop exponent")
    if measured:
        marks = {"ish": ("s", "tab:blue"), "imh": ("^", "tab:red")}
        for p, slopes in sorted(measured.items()):
            mark, color = marks.get(p, ("x", "gray"))
            ax.plot(x, slopes, mark, color=color, fillstyle="none",
                    label=f"measured {p}")
    for thr, style in ((curve["ish_threshold"], ":"),
                       (curve["imh_threshold"], "--")):
        ax.axvline(thr, color="gray", linestyle=style, alpha=0.7)
    ax.set_xlabel("bandwidth + antenna exponent")
    ax.set_ylabel("feasible-rate exponent")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


ISH_NODES_HEADER = ["node", "r_u", "W_u", "W_star", "branch", "rate"]
IMH_ROUTES_HEADER = ["destination", "hop_count", "bottleneck_hop",
                     "route_rate", "normalized_rate"]


def write_ish_nodes(real: IshRealization, path: str) -> str:
    rows = [(i, real.r_u[i], float(real.allocation.W_u[i]), real.W_star[i],
             "power" if real.power_limited[i] else "dof", real.rates[i])
            for i in range(len(real.rates))]
    return write_csv(path, ISH_NODES_HEADER, rows)


def write_imh_routes(real: ImhRealization, path: str) -> str:
    rows = [(i, int(real.hop_count[i]), int(real.bottleneck_hop[i]),
             float(real.route_rate[i]), float(real.rate_per_node[i]))
            for i in range(len(real.route_rate))]
    return write_csv(path, IMH_ROUTES_HEADER, rows)


def write_sweep_outputs(result: SweepResult, outdir: str,
                        figures: bool = True) -> list:
    os.makedirs(outdir, exist_ok=True)
    paths = [write_sweep_rows(result, os.path.join(outdir, "rows.csv")),
             write_sweep_summary(result, os.path.join(outdir, "summary.csv"))]
    if figures:
        paths.append(sweep_figure(result, os.path.join(outdir, "rates.svg")))
    return paths
