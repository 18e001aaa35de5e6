"""Monte-Carlo sweeps over network size and the slope fit against theory.

A sweep runs both protocols over a grid of sizes n and a set of seeds,
reduces per-(n, seed) feasible rates to a geometric mean per n, fits an
ordinary least-squares line to (ln n, ln rate) over the upper part of the
size grid, and compares the fitted slope to the closed-form exponent.

Geometry work dominates the cost and is bandwidth-free, so realizations
are cached per (n, seed) and re-priced when only the bandwidth scaling
changes, as in sweeps over the bandwidth exponent.

Everything runs serially with per-(seed, n) generator seeding: results are
reproducible bit for bit regardless of sweep composition or ordering.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ish_interference_sums
from .exponents import (ISH, IMH, PROTOCOLS, ScalingConfig, classify_regime,
                        ish_rate_exponent, imh_rate_exponent)
from .geometry import NetworkInstance, build_routing_grid, generate_network
from .imh import ImhLinkSet, build_links, build_schedule, rates_from_links
from .ish import ALLOCATION_MODES, ish_allocate
from .linkrate import DEFAULT_LAW, RateLawConstants, critical_bandwidth, link_rates

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 0.15

# Two-sided 97.5% Student-t quantiles; between listed df use the next lower
# entry (slightly wider interval), beyond 30 the normal value.
_T975 = {1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571, 6: 2.447,
         7: 2.365, 8: 2.306, 9: 2.262, 10: 2.228, 12: 2.179, 15: 2.131,
         20: 2.086, 25: 2.060, 30: 2.042}


def _t_quantile(df: int) -> float:
    if df > 30:
        return 1.960
    while df not in _T975:
        df -= 1
    return _T975[df]


@dataclass
class FitResult:
    slope: float
    stderr: float
    ci_low: float
    ci_high: float
    df: int
    window_n: list


def fit_exponent(n_values, values, start_n: float | None = None) -> FitResult:
    """OLS slope of ln(values) against ln(n) over the upper size window.

    Uses the largest-n half of the grid, widened to at least three points
    so the slope keeps a confidence interval; small n carries the
    pre-asymptotic bend and would bias the slope estimate.  An explicit
    start_n pins the window lower edge instead, which keeps the window
    anchored to the full sweep grid when some sizes lost their samples.
    """
    n_values = np.asarray(n_values, dtype=float)
    values = np.asarray(values, dtype=float)
    if n_values.ndim != 1 or n_values.shape != values.shape:
        raise ValueError("n_values and values must be matching 1-D arrays")
    if len(n_values) < 3:
        raise ValueError(f"need at least 3 points to fit, got {len(n_values)}")
    if np.any(values <= 0.0) or np.any(n_values <= 0.0):
        raise ValueError("slope fit needs positive sizes and values")
    order = np.argsort(n_values)
    n_values, values = n_values[order], values[order]
    if start_n is None:
        start = min(len(n_values) // 2, len(n_values) - 3)
    else:
        start = int(np.searchsorted(n_values, start_n))
        if len(n_values) - start < 3:
            raise ValueError("fewer than 3 points at or above start_n")
    xw = np.log(n_values[start:])
    yw = np.log(values[start:])
    k = len(xw)
    xc = xw - xw.mean()
    sxx = float(np.dot(xc, xc))
    if sxx == 0.0:
        raise ValueError("all sizes in the fit window are equal; slope is undefined")
    slope = float(np.dot(xc, yw) / sxx)
    intercept = float(yw.mean() - slope * xw.mean())
    resid = yw - (intercept + slope * xw)
    df = k - 2
    if df > 0:
        stderr = math.sqrt(float(np.dot(resid, resid)) / df / sxx)
    else:
        stderr = 0.0
    half = _t_quantile(df) * stderr if df > 0 else 0.0
    return FitResult(slope=slope, stderr=stderr, ci_low=slope - half,
                     ci_high=slope + half, df=df,
                     window_n=[int(v) for v in n_values[start:]])


# -- realization cache ----------------------------------------------------


def geometry_key(e: ScalingConfig, wraparound: bool, c_occupancy: float) -> tuple:
    """Parameters that shape cached geometry and link budgets.

    The bandwidth scaling (psi, W0) and the rate-law constants are absent
    on purpose: they only enter at pricing time.
    """
    return (e.nu, e.beta, e.gamma, e.alpha, e.A0, e.m0, e.l0,
            e.P, e.P_BS, e.N0, wraparound, c_occupancy)


@dataclass
class RealizationBundle:
    """Bandwidth-free artifacts of one (n, seed) realization."""

    inst: NetworkInstance
    r_u: np.ndarray
    ish_sums: np.ndarray
    links: ImhLinkSet | None     # None when the routing grid cannot build
    imh_error: str | None


def prepare_bundle(e: ScalingConfig, n: int, seed: int, need_imh: bool,
                   wraparound: bool = True,
                   c_occupancy: float = 1.5) -> RealizationBundle:
    inst = generate_network(e, n, seed, wraparound)
    r_u = inst.serving_distances()
    sums = ish_interference_sums(inst)
    links, err = None, None
    if need_imh:
        try:
            grid = build_routing_grid(inst, c_occupancy)
            links = build_links(inst, grid, build_schedule(inst, grid))
        except ValueError as exc:
            err = str(exc)
    return RealizationBundle(inst=inst, r_u=r_u, ish_sums=sums,
                             links=links, imh_error=err)


def eval_ish(bundle: RealizationBundle, W: float, mode: str = "closed_form",
             law: RateLawConstants = DEFAULT_LAW) -> dict:
    """Single-hop feasible rate of a bundle at an explicit total bandwidth."""
    inst = bundle.inst
    e = inst.params
    if mode == "closed_form":
        W_u = np.full(inst.n, W * inst.l * inst.m / inst.n)
        P_u = np.full(inst.n, e.P_BS * inst.m / inst.n)
    else:
        alloc = ish_allocate(inst, mode)
        W_u = alloc.W_u * (W / inst.W)  # shares scale linearly with W
        P_u = alloc.P_u
    N_I = e.N0 + e.P_BS * bundle.ish_sums / (W * inst.l)
    P_r = P_u * bundle.r_u ** (-e.alpha)
    rates = link_rates(W_u, P_r, N_I, law)
    overspread = W_u >= critical_bandwidth(P_r, N_I, law)
    return {"feasible_rate": float(rates.min()),
            "overspread_fraction": float(overspread.mean())}


# -- sweep driver ---------------------------------------------------------


@dataclass
class SweepRow:
    n: int
    seed: int
    protocol: str
    feasible_rate: float
    regime: str
    overspread_fraction: float          # NaN for the multihop protocol
    infeasible_route_fraction: float    # NaN for the single-hop protocol
    valid: bool
    modal_bottleneck: int               # 0 for the single-hop protocol
    first_hop_bottleneck_fraction: float


@dataclass
class ProtocolFit:
    protocol: str
    n_used: list
    geomeans: list
    fit: FitResult | None
    theory_slope: float
    tolerance: float

    @property
    def slope(self) -> float:
        return self.fit.slope if self.fit else math.nan

    @property
    def passed(self) -> bool:
        return bool(self.fit) and abs(self.fit.slope - self.theory_slope) <= self.tolerance


@dataclass
class SweepResult:
    params: ScalingConfig
    n_values: list
    seeds: list
    protocols: tuple
    tolerance: float
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    dropped: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(f.passed for f in self.fits.values())


def run_sweep(e: ScalingConfig, n_values, seeds, protocols=PROTOCOLS,
              law: RateLawConstants = DEFAULT_LAW,
              allocation_mode: str = "closed_form",
              wraparound: bool = True, c_occupancy: float = 1.5,
              infeasible_threshold: float = 0.01,
              tolerance: float = DEFAULT_TOLERANCE,
              cache: dict | None = None,
              min_points: int = 4, min_seeds: int = 5) -> SweepResult:
    """Measure feasible rates over a size grid and fit both slopes.

    Sizes that violate a protocol's preconditions are dropped for that
    protocol with a warning; multihop realizations whose unroutable-node
    fraction exceeds infeasible_threshold stay in the row log but are
    excluded from the fit.  Passing the same dict as cache across sweeps
    that share geometry parameters skips regeneration.
    """
    n_values = sorted(set(int(v) for v in n_values))
    seeds = sorted(set(int(s) for s in seeds))
    protocols = tuple(p for p in PROTOCOLS if p in protocols)
    if len(n_values) < min_points:
        raise ValueError(f"need at least {min_points} distinct n values, got {len(n_values)}")
    if len(seeds) < min_seeds:
        raise ValueError(f"need at least {min_seeds} seeds, got {len(seeds)}")
    if not protocols:
        raise ValueError(f"protocols must include at least one of {PROTOCOLS}")
    if allocation_mode not in ALLOCATION_MODES:
        raise ValueError(f"unknown allocation mode {allocation_mode!r}")

    regime = classify_regime(e).value
    key = geometry_key(e, wraparound, c_occupancy)
    result = SweepResult(params=e, n_values=n_values, seeds=seeds,
                         protocols=protocols, tolerance=tolerance)
    result.dropped = {p: [] for p in protocols}
    samples = {p: {} for p in protocols}  # protocol -> n -> list of rates

    for n in n_values:
        W = e.bandwidth(n)
        for seed in seeds:
            bundle = None
            if cache is not None:
                hit = cache.get((n, seed))
                if hit is not None and hit[0] == key:
                    bundle = hit[1]
                    if IMH in protocols and bundle.links is None \
                            and bundle.imh_error is None:
                        # cached by an ISH-only sweep; add the routing links
                        try:
                            grid = build_routing_grid(bundle.inst, c_occupancy)
                            bundle.links = build_links(
                                bundle.inst, grid,
                                build_schedule(bundle.inst, grid))
                        except ValueError as exc:
                            bundle.imh_error = str(exc)
            if bundle is None:
                try:
                    bundle = prepare_bundle(e, n, seed, IMH in protocols,
                                            wraparound, c_occupancy)
                except ValueError as exc:
                    if seed == seeds[0]:
                        logger.warning("dropping n=%d: %s", n, exc)
                        for p in protocols:
                            result.dropped[p].append((n, str(exc)))
                    break
                if cache is not None:
                    cache[(n, seed)] = (key, bundle)
            if ISH in protocols:
                out = eval_ish(bundle, W, allocation_mode, law)
                result.rows.append(SweepRow(
                    n=n, seed=seed, protocol=ISH,
                    feasible_rate=out["feasible_rate"], regime=regime,
                    overspread_fraction=out["overspread_fraction"],
                    infeasible_route_fraction=math.nan, valid=True,
                    modal_bottleneck=0,
                    first_hop_bottleneck_fraction=math.nan))
                samples[ISH].setdefault(n, []).append(out["feasible_rate"])
            if IMH in protocols:
                if bundle.links is None:
                    if seed == seeds[0]:
                        logger.warning("dropping n=%d for %s: %s",
                                       n, IMH, bundle.imh_error)
                        result.dropped[IMH].append((n, bundle.imh_error))
                    continue
                real = rates_from_links(bundle.links, W, law, infeasible_threshold)
                ok = real.valid and math.isfinite(real.feasible_rate)
                if not ok:
                    logger.warning(
                        "excluding n=%d seed=%d from the %s fit: "
                        "unroutable fraction %.3f", n, seed, IMH,
                        real.infeasible_fraction)
                result.rows.append(SweepRow(
                    n=n, seed=seed, protocol=IMH,
                    feasible_rate=real.feasible_rate, regime=regime,
                    overspread_fraction=math.nan,
                    infeasible_route_fraction=real.infeasible_fraction,
                    valid=ok, modal_bottleneck=real.modal_bottleneck,
                    first_hop_bottleneck_fraction=real.first_hop_bottleneck_fraction))
                if ok:
                    samples[IMH].setdefault(n, []).append(real.feasible_rate)

    # The fit window is the upper half of the requested grid (at least
    # three sizes), regardless of which sizes kept usable samples.
    window_start = n_values[min(len(n_values) // 2, len(n_values) - 3)]
    theory = {ISH: ish_rate_exponent(e), IMH: imh_rate_exponent(e)}
    for p in protocols:
        n_used = sorted(samples[p])
        geomeans = [float(np.exp(np.mean(np.log(samples[p][n])))) for n in n_used]
        fit = None
        if sum(n >= window_start for n in n_used) >= 3:
            fit = fit_exponent(n_used, geomeans, start_n=window_start)
        else:
            logger.warning("not enough usable sizes to fit %s (%d in window)",
                           p, sum(n >= window_start for n in n_used))
        result.fits[p] = ProtocolFit(protocol=p, n_used=n_used,
                                     geomeans=geomeans, fit=fit,
                                     theory_slope=theory[p],
                                     tolerance=tolerance)
    return result


def regime_map_measured(e: ScalingConfig, psi_values, n_values, seeds,
                        protocols=PROTOCOLS, **sweep_kwargs):
    """Fitted slopes per protocol along a bandwidth-exponent sweep.

    Runs one sweep per psi with a shared realization cache; only the
    pricing step repeats, the geometry is generated once per (n, seed).

    Returns:
        (slopes, results): slopes maps protocol to a list aligned with
        psi_values; results holds the full SweepResult per psi.
    """
    cache = sweep_kwargs.pop("cache", {})
    slopes = {p: [] for p in protocols}
    results = []
    for psi in psi_values:
        res = run_sweep(e.with_psi(psi), n_values, seeds,
                        protocols=protocols, cache=cache, **sweep_kwargs)
        results.append(res)
        for p in protocols:
            slopes[p].append(res.fits[p].slope)
    return slopes, results
