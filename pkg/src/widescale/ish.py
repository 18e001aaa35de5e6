"""Single-hop downlink: every node served directly by its station.

Each station multiplexes l spatial streams.  System-wide there are m*l
streams for n nodes, so a node's stream is time-shared by roughly n/(m*l)
users; equivalently each node gets bandwidth W_u = W*l*m/n and transmit
power P_u = P_BS*m/n on average.  The closed-form allocation uses exactly
those averages for every node, which matches the aggregate resource budget
and keeps the per-node rate independent of how crowded its particular cell
happens to be; the per-cell mode divides each station's actual resources
among its actual users instead.

The feasible rate of a realization is the minimum per-node rate: the
protocol must serve everyone at the common rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ish_interference_psd, ish_interference_psd_all, ish_interference_sums
from .geometry import NetworkInstance
from .linkrate import (DEFAULT_LAW, LinkBudget, RateLawConstants,
                       critical_bandwidth, link_rate, link_rates)

ALLOCATION_MODES = ("closed_form", "per_cell")


@dataclass
class IshAllocation:
    """Per-node bandwidth/power shares and stream assignment."""

    mode: str
    W_u: np.ndarray          # (n,) bandwidth share per node [Hz]
    P_u: np.ndarray          # (n,) transmit power share per node [W]
    stream_of_node: np.ndarray  # (n,) stream index within the serving station
    users_per_stream: float  # nominal n / (m*l)


def ish_allocate(inst: NetworkInstance, mode: str = "closed_form") -> IshAllocation:
    if mode not in ALLOCATION_MODES:
        raise ValueError(f"unknown allocation mode {mode!r}, expected one of {ALLOCATION_MODES}")
    e = inst.params
    n, m, l = inst.n, inst.m, inst.l
    if mode == "closed_form":
        W_u = np.full(n, inst.W * l * m / n)
        P_u = np.full(n, e.P_BS * m / n)
    else:
        counts = np.bincount(inst.cell_of_node, minlength=m).astype(float)
        per_node = counts[inst.cell_of_node]
        # A station with fewer users than streams still spends everything.
        W_u = inst.W * np.minimum(l / per_node, 1.0)
        P_u = e.P_BS / per_node
    rank = _rank_within_cell(inst.cell_of_node, m)
    return IshAllocation(mode=mode, W_u=W_u, P_u=P_u,
                         stream_of_node=rank % l, users_per_stream=n / (m * l))


def _rank_within_cell(cell_of_node: np.ndarray, m: int) -> np.ndarray:
    order = np.argsort(cell_of_node, kind="stable")
    rank = np.empty_like(order)
    counts = np.bincount(cell_of_node, minlength=m)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    rank[order] = np.arange(len(order)) - starts[cell_of_node[order]]
    return rank


@dataclass
class IshRealization:
    """Per-node link outcomes of one single-hop realization."""

    allocation: IshAllocation
    r_u: np.ndarray            # (n,) node-to-station distance [m]
    N_I: np.ndarray            # (n,) interference-plus-noise PSD [W/Hz]
    P_r: np.ndarray            # (n,) received stream power [W]
    W_star: np.ndarray         # (n,) critical bandwidth per node [Hz]
    rates: np.ndarray          # (n,) per-node rate [bits/s]
    power_limited: np.ndarray  # (n,) bool, power branch active
    feasible_rate: float       # min over nodes [bits/s]
    overspread_fraction: float


def ish_realize(inst: NetworkInstance, mode: str = "closed_form",
                law: RateLawConstants = DEFAULT_LAW) -> IshRealization:
    """Allocate, price every link and take the worst node.

    The received power is the node's power share through the path loss,
    P_u * r^(-alpha), matching the bandwidth share W_u: a node holding one
    of l streams for a fraction l*m/n of the time sees average power
    (P_BS/l) * (l*m/n) = P_u.  Ideal multi-stream beamforming removes
    intra-station cross-talk, so a node's own station contributes no
    interference and other stations contribute at full load.
    """
    e = inst.params
    alloc = ish_allocate(inst, mode)
    r_u = inst.serving_distances()
    N_I = ish_interference_psd_all(inst)
    P_r = alloc.P_u * r_u ** (-e.alpha)
    W_star = critical_bandwidth(P_r, N_I, law)
    rates = link_rates(alloc.W_u, P_r, N_I, law)
    power_limited = alloc.W_u >= W_star
    return IshRealization(
        allocation=alloc, r_u=r_u, N_I=N_I, P_r=P_r, W_star=W_star,
        rates=rates, power_limited=power_limited,
        feasible_rate=float(rates.min()),
        overspread_fraction=float(power_limited.mean()),
    )


def ish_node_rate(inst: NetworkInstance, node: int, mode: str = "closed_form",
                  law: RateLawConstants = DEFAULT_LAW) -> float:
    """Rate of a single node via scalar arithmetic, no batching.

    Independent of ish_realize on purpose: a realize/loop mismatch in a
    test points at the vectorization, not the physics.
    """
    if mode not in ALLOCATION_MODES:
        raise ValueError(f"unknown allocation mode {mode!r}, expected one of {ALLOCATION_MODES}")
    e = inst.params
    if mode == "closed_form":
        W_u = inst.W * inst.l * inst.m / inst.n
        P_u = e.P_BS * inst.m / inst.n
    else:
        count = int(np.sum(inst.cell_of_node == inst.cell_of_node[node]))
        W_u = inst.W * min(inst.l / count, 1.0)
        P_u = e.P_BS / count
    delta = inst.node_positions[node] - inst.bs_positions[inst.cell_of_node[node]]
    if inst.wraparound:
        delta = delta - inst.side * np.round(delta / inst.side)
    r = float(np.hypot(delta[0], delta[1]))
    P_r = P_u * r ** (-e.alpha)
    N_I = ish_interference_psd(inst, node)
    return float(link_rate(LinkBudget(W_u=W_u, P_r=P_r, N_I=N_I), law))


def ish_feasible_rate(inst: NetworkInstance, mode: str = "closed_form",
                      law: RateLawConstants = DEFAULT_LAW) -> float:
    return ish_realize(inst, mode, law).feasible_rate


def ish_rates_under_bandwidth(inst: NetworkInstance, W: float,
                              sums: np.ndarray | None = None,
                              law: RateLawConstants = DEFAULT_LAW) -> np.ndarray:
    """Per-node rates if the same realization ran with total bandwidth W.

    Re-prices cached geometry without touching positions: the interference
    sums are W-free, only the PSD and the per-node share change.  Used by
    bandwidth sweeps and the linearity check of the DoF-limited regime.
    """
    e = inst.params
    if sums is None:
        sums = ish_interference_sums(inst)
    r_u = inst.serving_distances()
    N_I = e.N0 + e.P_BS * sums / (W * inst.l)
    P_r = (e.P_BS * inst.m / inst.n) * r_u ** (-e.alpha)
    W_u = W * inst.l * inst.m / inst.n
    return link_rates(W_u, P_r, N_I, law)
