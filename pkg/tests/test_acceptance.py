"""Acceptance gates: slope recovery, oracles, regime structure, determinism.

One shared measurement run powers most gates: both protocols over the full
size grid, ten seeds, twelve bandwidth-growth exponents, with geometry
cached across exponents.  Each gate records a PASS/FAIL line for the
terminal summary before asserting.
"""

import math

import numpy as np
import pytest

from conftest import record_criterion
from widescale.channel import ish_interference_psd_all, ish_ring_bound_psd
from widescale.exponents import ScalingConfig
from widescale.geometry import generate_network
from widescale.harness import regime_map_measured, run_sweep
from widescale.linkrate import dof_fraction_predicted
from widescale.report import write_sweep_outputs

E = ScalingConfig()
N_VALUES = [256, 512, 1024, 2048, 4096, 8192, 16384]
SEEDS = range(10)
PSI_GRID = [0.25 * k for k in range(1, 13)]


def _check(name, passed, detail=""):
    record_criterion(name, passed, detail)
    assert passed, f"{name}: {detail}"


@pytest.fixture(scope="module")
def measured():
    cache = {}
    slopes, results = regime_map_measured(E, PSI_GRID, N_VALUES, SEEDS,
                                          cache=cache)
    return slopes, results, cache


def _fit(results, psi, protocol):
    return results[PSI_GRID.index(psi)].fits[protocol]


def test_single_hop_slope_bandwidth_limited(measured):
    _, results, _ = measured
    f = _fit(results, 0.25, "ish")
    assert f.theory_slope == -0.25
    _check("single-hop slope, bandwidth-limited family",
           abs(f.slope - (-0.25)) <= 0.15,
           f"slope {f.slope:+.4f}, theory -0.25, tol 0.15")


def test_single_hop_slope_power_limited(measured):
    _, results, cache = measured
    base = _fit(results, 2.0, "ish")
    doubled = run_sweep(ScalingConfig(psi=2.0, W0=2.0e6), N_VALUES, SEEDS,
                        protocols=("ish",), cache=cache).fits["ish"]
    ratios = [doubled.geomeans[doubled.n_used.index(n)]
              / base.geomeans[base.n_used.index(n)]
              for n in base.fit.window_n]
    drift = max(abs(r - 1.0) for r in ratios)
    _check("single-hop slope saturates in the power-limited family",
           abs(base.slope - 0.5) <= 0.15 and drift < 0.01,
           f"slope {base.slope:+.4f} vs 0.5; doubling W0 moves fitted rates "
           f"by {drift:.2e} (< 1% required)")


def test_multihop_slope_and_gap(measured):
    _, results, _ = measured
    ish = _fit(results, 2.0, "ish")
    imh = _fit(results, 2.0, "imh")
    gap = imh.slope - ish.slope
    _check("multihop keeps the bandwidth slope; protocol gap",
           abs(imh.slope - 1.5) <= 0.15 and gap >= 0.7,
           f"multihop slope {imh.slope:+.4f} vs 1.5; gap {gap:.4f} (>= 0.7)")


def _plateau_onset(slopes, step=0.1):
    # first grid point from which every later move stays below the step
    diffs = np.abs(np.diff(slopes))
    big = np.flatnonzero(diffs >= step)
    return PSI_GRID[int(big[-1]) + 1] if len(big) else PSI_GRID[0]


def test_slope_plateaus(measured):
    slopes, _, _ = measured
    ish_on = _plateau_onset(slopes["ish"])
    imh_on = _plateau_onset(slopes["imh"])
    _check("slope plateaus start at the predicted thresholds",
           abs(ish_on - 1.0) <= 0.25 and abs(imh_on - 2.0) <= 0.25,
           f"single-hop plateau from psi={ish_on:g} (predicted 1), "
           f"multihop from psi={imh_on:g} (predicted 2)")


def _non_overspread(results, psi):
    rows = [r for r in results[PSI_GRID.index(psi)].rows if r.protocol == "ish"]
    return [float(np.mean([1.0 - r.overspread_fraction for r in rows
                           if r.n == n])) for n in N_VALUES]


def test_overspread_fraction_envelope(measured):
    _, results, _ = measured
    ok, details = True, []
    for psi, rising in ((0.5, True), (1.5, False)):
        fr = _non_overspread(results, psi)
        pred = dof_fraction_predicted(E.with_psi(psi), N_VALUES[-1], E.N0)
        steps = np.diff(fr)
        if rising:
            trend = bool(np.all(steps >= -0.02)) and fr[-1] > fr[0]
        else:
            trend = bool(np.all(steps <= 0.02)) and fr[-1] < fr[0]
        close = abs(fr[-1] - pred) <= 0.1
        ok = ok and trend and close
        details.append(f"psi={psi:g}: {fr[0]:.3f}->{fr[-1]:.3f}, "
                       f"predicted {pred:.3f}")
    _check("non-overspread fraction follows the clamped envelope",
           ok, "; ".join(details))


def test_interference_oracles():
    inst = generate_network(E, 1024, 0)
    e = inst.params
    psd = ish_interference_psd_all(inst)
    worst = 0.0
    for u in range(inst.n):
        x, y = inst.node_positions[u]
        acc = 0.0
        for c in range(inst.m):
            if c == inst.cell_of_node[u]:
                continue
            bx, by = inst.bs_positions[c]
            best = math.inf
            for sx in (-inst.side, 0.0, inst.side):
                for sy in (-inst.side, 0.0, inst.side):
                    best = min(best, math.hypot(x - bx - sx, y - by - sy))
            acc += best ** -e.alpha
        ref = e.N0 + e.P_BS * acc / (inst.W * inst.l)
        worst = max(worst, abs(psd[u] - ref) / ref)

    bound = ish_ring_bound_psd(1.0, 3.0, 1.0, 1.0, 1, 0.0)
    k = np.arange(1, 1_000_001, dtype=float)
    series = float(np.sum(6.0 * k * (2.0 * k) ** -3.0)) + 0.75 / (1.0e6 + 0.5)
    closed = 0.75 * math.pi ** 2 / 6.0
    ok = worst < 1e-12 and abs(bound - series) < 1e-9 \
        and abs(bound - closed) < 1e-9
    _check("interference PSD oracle and ring-sum bound", ok,
           f"max node mismatch {worst:.2e}; ring bound {bound:.6f} vs "
           f"truncated series {series:.6f}")


def test_first_hop_bottleneck(measured):
    _, results, _ = measured
    rows = [r for r in results[PSI_GRID.index(2.0)].rows
            if r.protocol == "imh" and r.valid]
    frac = float(np.mean([r.modal_bottleneck == 1 for r in rows]))
    _check("first hop is the modal bottleneck when power-limited",
           len(rows) > 0 and frac >= 0.9,
           f"modal hop 1 in {frac:.1%} of {len(rows)} realizations")


def test_rerun_byte_identical(tmp_path):
    dirs = []
    for tag in ("a", "b"):
        res = run_sweep(E, N_VALUES, SEEDS, cache={})
        out = tmp_path / tag
        write_sweep_outputs(res, str(out), figures=False)
        dirs.append(out)
    same = all((dirs[0] / f).read_bytes() == (dirs[1] / f).read_bytes()
               for f in ("rows.csv", "summary.csv"))
    _check("reruns produce byte-identical delimited output", same,
           "rows.csv and summary.csv, full sweep run twice from scratch")


def test_multihop_never_trails_single_hop(measured):
    # fit-noise slack 0.05; holds at every swept exponent with beta < 1
    slopes, _, _ = measured
    for psi, si, sm in zip(PSI_GRID, slopes["ish"], slopes["imh"]):
        if math.isfinite(si) and math.isfinite(sm):
            assert sm >= si - 0.05, (
                f"psi={psi:g}: multihop slope {sm:.3f} trails "
                f"single-hop {si:.3f}")
