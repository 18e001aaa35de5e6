"""Multihop downlink: station to destination via relays on the routing grid.

A packet leaves the serving station toward the routing sub-cell of its
destination, staircasing across the global grid one adjacent tile at a
time, horizontal leg first, then a last hop from the destination tile's
relay to the destination itself.  The first hop uses one of the station's
l streams at power P_BS/l; relay hops use node power P.  Each hop
transmits in the slot of its source tile under the 4-color reuse pattern
(color = 2*(i mod 2) + (j mod 2) in tile indices), stations taking the
slot of the tile they sit in.  Adjacent tiles never share a color, so a
relay receives and forwards in different slots, and every hop runs at
duty 1/K over the full band.

Interference is priced under full load: every elected relay network-wide
counts as active in its color's slot, as does every station.  A route
that crosses a tile with no relay, whether empty or occupied by a
station, is infeasible; realizations where that happens for more than a
configurable sliver of nodes are flagged invalid rather than patched.

Per-node throughput: the m stations push l routes each concurrently, so a
route's bottleneck rate is scaled by l*m/n to give the per-node share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import NetworkInstance, RoutingGrid, build_routing_grid, torus_delta
from .linkrate import DEFAULT_LAW, RateLawConstants

K_COLORS = 4
_TX_CHUNK = 2048


def subcell_color(i, j):
    """Reuse color of tile (i, j); works on scalars and arrays."""
    return 2 * np.mod(i, 2) + np.mod(j, 2)


def tile_displacement(src, dst, G: int, wraparound: bool = True) -> np.ndarray:
    """Signed tile offset from src to dst, minimal image when wrapping."""
    d = np.asarray(dst, dtype=np.int64) - np.asarray(src, dtype=np.int64)
    if wraparound:
        half = G // 2
        d = (d + half) % G - half
    return d


def chain_subcells(src, dst, G: int, wraparound: bool = True) -> list[tuple[int, int]]:
    """Staircase of tiles from src (exclusive) to dst (inclusive)."""
    di, dj = tile_displacement(src, dst, G, wraparound)
    si = 1 if di > 0 else -1
    sj = 1 if dj > 0 else -1
    i0, j0 = int(src[0]), int(src[1])
    path = [((i0 + si * t) % G, j0) for t in range(1, abs(di) + 1)]
    ie = (i0 + di) % G
    path += [(ie, (j0 + sj * u) % G) for u in range(1, abs(dj) + 1)]
    return path


@dataclass
class ImhSchedule:
    """Co-active transmitter sets of the 4-color reuse pattern, full load."""

    K: int
    tx_pos: list      # per color: (Nc, 2) positions
    tx_weight: list   # per color: (Nc,) PSD weights [W]; P_BS/l for stations


def build_schedule(inst: NetworkInstance, grid: RoutingGrid) -> ImhSchedule:
    e = inst.params
    pos = [[] for _ in range(K_COLORS)]
    wgt = [[] for _ in range(K_COLORS)]
    for b, (i, j) in enumerate(grid.bs_subcell):
        col = int(subcell_color(i, j))
        pos[col].append(inst.bs_positions[b])
        wgt[col].append(e.P_BS / inst.l)
    for (i, j), node in grid.relays.items():
        col = int(subcell_color(i, j))
        pos[col].append(inst.node_positions[node])
        wgt[col].append(e.P)
    return ImhSchedule(
        K=K_COLORS,
        tx_pos=[np.array(p).reshape(-1, 2) for p in pos],
        tx_weight=[np.array(w) for w in wgt],
    )


def _class_interference(inst: NetworkInstance, schedule: ImhSchedule,
                        rx: np.ndarray, color: int) -> np.ndarray:
    """Sum of w * d^(-alpha) over a color class, all transmitters included.

    The receiver's own-link transmitter belongs to the class; callers
    subtract its single term, which they already know from the hop itself.
    """
    alpha = inst.params.alpha
    tx = schedule.tx_pos[color]
    w = schedule.tx_weight[color]
    out = np.zeros(len(rx))
    if len(tx) == 0:
        return out
    for lo in range(0, len(rx), _TX_CHUNK):
        hi = min(lo + _TX_CHUNK, len(rx))
        d = rx[lo:hi, None, :] - tx[None, :, :]
        if inst.wraparound:
            d -= inst.side * np.round(d / inst.side)
        dist = np.hypot(d[..., 0], d[..., 1])
        out[lo:hi] = (w * dist ** (-alpha)).sum(axis=1)
    return out


@dataclass
class ImhLinkSet:
    """Bandwidth-free geometry of every route in one realization.

    Chain hops are deduplicated across routes sharing a tile pair, which
    relay-to-relay hops do even across cells; the per-destination final
    hop is kept separate.  Everything here survives a change of total
    bandwidth, so sweeps over the bandwidth exponent can re-price a cached
    link set instead of rebuilding routes.
    """

    n: int
    K: int
    N0: float
    norm: float                # l*m/n, route rate to per-node share
    subcells: np.ndarray       # (S, 3) int: cell, tile i, tile j
    chain_len: np.ndarray      # (S,) staircase hop count T
    route_ok: np.ndarray       # (S,) bool: every staircase tile has a relay
    pair_sid: np.ndarray       # chain membership: sub-cell id per entry
    pair_hid: np.ndarray       # chain membership: hop id per entry
    pair_pos: np.ndarray       # chain membership: 1-based hop position
    hop_P_r: np.ndarray        # (H,) received power per unique hop [W]
    hop_J: np.ndarray          # (H,) co-channel sum w*d^-a, self excluded [W]
    hop_dist: np.ndarray       # (H,) [m]
    hop_is_bs: np.ndarray      # (H,) bool: station transmits
    dest_sid: np.ndarray       # (n,) sub-cell id of each node
    fin_P_r: np.ndarray        # (n,)
    fin_J: np.ndarray          # (n,)
    fin_dist: np.ndarray       # (n,)
    fin_is_bs: np.ndarray      # (n,) bool: destination shares its station's tile
    fin_skip: np.ndarray       # (n,) bool: destination is its own relay


def build_links(inst: NetworkInstance, grid: RoutingGrid,
                schedule: ImhSchedule) -> ImhLinkSet:
    e = inst.params
    side = inst.metric_side
    G = grid.G
    p_first = e.P_BS / inst.l

    sid_of = {}
    subcells = []
    keys = np.stack([inst.cell_of_node,
                     grid.node_subcell[:, 0], grid.node_subcell[:, 1]], axis=1)
    for c, i, j in sorted({tuple(int(v) for v in k) for k in keys}):
        sid_of[(c, i, j)] = len(subcells)
        subcells.append((c, i, j))
    subcells = np.array(subcells, dtype=np.int64).reshape(-1, 3)
    S = len(subcells)
    dest_sid = np.array([sid_of[tuple(int(v) for v in k)] for k in keys],
                        dtype=np.int64)

    hid_of = {}
    hop_tx, hop_rx, hop_w, hop_color, hop_bs = [], [], [], [], []
    chain_len = np.zeros(S, dtype=np.int64)
    route_ok = np.ones(S, dtype=bool)
    pair_sid, pair_hid, pair_pos = [], [], []
    for sid, (c, i, j) in enumerate(subcells):
        start = grid.bs_subcell[c]
        path = chain_subcells(start, (int(i), int(j)), G, inst.wraparound)
        chain_len[sid] = len(path)
        if any(grid.relay_of(ci, cj) is None for ci, cj in path):
            route_ok[sid] = False
            continue
        prev = (int(start[0]), int(start[1]))
        for pos_1b, (ci, cj) in enumerate(path, start=1):
            from_bs = pos_1b == 1
            key = (("b", int(c), ci, cj) if from_bs
                   else ("r", prev[0], prev[1], ci, cj))
            hid = hid_of.get(key)
            if hid is None:
                hid = len(hop_tx)
                hid_of[key] = hid
                if from_bs:
                    hop_tx.append(inst.bs_positions[c])
                    hop_w.append(p_first)
                    hop_bs.append(True)
                else:
                    hop_tx.append(inst.node_positions[grid.relay_of(*prev)])
                    hop_w.append(e.P)
                    hop_bs.append(False)
                hop_rx.append(inst.node_positions[grid.relay_of(ci, cj)])
                hop_color.append(int(subcell_color(prev[0], prev[1])))
            pair_sid.append(sid)
            pair_hid.append(hid)
            pair_pos.append(pos_1b)
            prev = (ci, cj)

    hop_tx = np.array(hop_tx).reshape(-1, 2)
    hop_rx = np.array(hop_rx).reshape(-1, 2)
    hop_w = np.array(hop_w)
    hop_color = np.array(hop_color, dtype=np.int64)
    hop_is_bs = np.array(hop_bs, dtype=bool)
    d = torus_delta(hop_rx, hop_tx, side)
    hop_dist = np.hypot(d[:, 0], d[:, 1])
    hop_P_r = hop_w * hop_dist ** (-e.alpha)
    hop_J = np.zeros(len(hop_w))
    for col in range(K_COLORS):
        sel = hop_color == col
        if sel.any():
            total = _class_interference(inst, schedule, hop_rx[sel], col)
            hop_J[sel] = total - hop_w[sel] * hop_dist[sel] ** (-e.alpha)

    # Final hops, transmitted in the destination tile's own slot: its relay
    # to the destination, or the station itself when they share a tile.
    ii, jj = subcells[dest_sid, 1], subcells[dest_sid, 2]
    own_bs_tile = grid.bs_subcell[inst.cell_of_node]
    fin_is_bs = (own_bs_tile[:, 0] == ii) & (own_bs_tile[:, 1] == jj)
    relay_node = np.array(
        [grid.relays.get((int(i), int(j)), -1) for c, i, j in subcells],
        dtype=np.int64)[dest_sid]
    fin_skip = (relay_node == np.arange(inst.n)) & ~fin_is_bs
    fin_tx = np.where(fin_is_bs[:, None],
                      inst.bs_positions[inst.cell_of_node],
                      inst.node_positions[np.maximum(relay_node, 0)])
    fin_w = np.where(fin_is_bs, p_first, e.P)
    fin_color = np.asarray(subcell_color(ii, jj))
    d = torus_delta(inst.node_positions, fin_tx, side)
    fin_dist = np.hypot(d[:, 0], d[:, 1])
    live = ~fin_skip & (fin_is_bs | (relay_node >= 0))
    fin_P_r = np.zeros(inst.n)
    fin_J = np.zeros(inst.n)
    fin_P_r[live] = fin_w[live] * fin_dist[live] ** (-e.alpha)
    for col in range(K_COLORS):
        sel = live & (fin_color == col)
        if sel.any():
            total = _class_interference(inst, schedule, inst.node_positions[sel], col)
            fin_J[sel] = total - fin_P_r[sel]

    return ImhLinkSet(
        n=inst.n, K=schedule.K, N0=e.N0, norm=inst.l * inst.m / inst.n,
        subcells=subcells, chain_len=chain_len, route_ok=route_ok,
        pair_sid=np.array(pair_sid, dtype=np.int64),
        pair_hid=np.array(pair_hid, dtype=np.int64),
        pair_pos=np.array(pair_pos, dtype=np.int64),
        hop_P_r=hop_P_r, hop_J=hop_J, hop_dist=hop_dist, hop_is_bs=hop_is_bs,
        dest_sid=dest_sid, fin_P_r=fin_P_r, fin_J=fin_J, fin_dist=fin_dist,
        fin_is_bs=fin_is_bs, fin_skip=fin_skip,
    )


@dataclass
class ImhRealization:
    """Route outcomes of one multihop realization at a concrete bandwidth."""

    W: float
    route_rate: np.ndarray      # (n,) bottleneck hop rate, duty included [bits/s]
    rate_per_node: np.ndarray   # (n,) route_rate * l*m/n; NaN if no route
    hop_count: np.ndarray       # (n,)
    bottleneck_hop: np.ndarray  # (n,) 1-based; 0 where no route
    has_route: np.ndarray       # (n,) bool
    infeasible_fraction: float
    valid: bool                 # infeasible_fraction within tolerance
    feasible_rate: float        # min per-node rate over routed nodes [bits/s]
    first_hop_bottleneck_fraction: float
    modal_bottleneck: int


def rates_from_links(links: ImhLinkSet, W: float,
                     law: RateLawConstants = DEFAULT_LAW,
                     infeasible_threshold: float = 0.01) -> ImhRealization:
    """Price every route at total bandwidth W and reduce to per-node rates.

    Hop rate is (1/K) * min(kappa_dof*W, kappa_pow*P_r/(N0 + J/W)); the
    route rate is the worst hop on the staircase plus the final hop.  Ties
    along a route resolve to the earliest hop.
    """
    if W <= 0.0:
        raise ValueError(f"W must be positive, got {W}")
    duty = 1.0 / links.K

    def price(P_r, J):
        return duty * np.minimum(law.kappa_dof * W,
                                 law.kappa_pow * P_r / (links.N0 + J / W))

    hop_rate = price(links.hop_P_r, links.hop_J)
    S = len(links.subcells)
    chain_min = np.full(S, np.inf)
    np.minimum.at(chain_min, links.pair_sid, hop_rate[links.pair_hid])
    attains = hop_rate[links.pair_hid] <= chain_min[links.pair_sid]
    chain_pos = np.full(S, np.inf)
    np.minimum.at(chain_pos, links.pair_sid[attains],
                  links.pair_pos[attains].astype(float))

    fin_rate = price(links.fin_P_r, links.fin_J)
    cm = chain_min[links.dest_sid]
    cp = chain_pos[links.dest_sid]
    fin_eff = np.where(links.fin_skip, np.inf, fin_rate)
    fin_pos = links.chain_len[links.dest_sid] + 1.0
    route = np.minimum(cm, fin_eff)
    bottleneck = np.where(fin_eff < cm, fin_pos, cp)

    ok = links.route_ok[links.dest_sid]
    route_rate = np.where(ok, route, np.nan)
    rate_per_node = route_rate * links.norm
    hop_count = links.chain_len[links.dest_sid] + np.where(links.fin_skip, 0, 1)
    bottleneck_hop = np.where(ok, bottleneck, 0.0).astype(np.int64)

    infeasible = 1.0 - float(ok.mean())
    routed = rate_per_node[ok]
    bn = bottleneck_hop[ok]
    counts = np.bincount(bn) if len(bn) else np.array([1])
    return ImhRealization(
        W=W, route_rate=route_rate, rate_per_node=rate_per_node,
        hop_count=hop_count, bottleneck_hop=bottleneck_hop, has_route=ok,
        infeasible_fraction=infeasible,
        valid=infeasible <= infeasible_threshold,
        feasible_rate=float(routed.min()) if len(routed) else math.nan,
        first_hop_bottleneck_fraction=float((bn == 1).mean()) if len(bn) else math.nan,
        modal_bottleneck=int(counts.argmax()),
    )


def imh_realize(inst: NetworkInstance, c_occupancy: float = 1.5,
                law: RateLawConstants = DEFAULT_LAW,
                infeasible_threshold: float = 0.01) -> ImhRealization:
    """Build grid, schedule and links for one realization, then price it."""
    grid = build_routing_grid(inst, c_occupancy)
    schedule = build_schedule(inst, grid)
    links = build_links(inst, grid, schedule)
    return rates_from_links(links, inst.W, law, infeasible_threshold)


def imh_feasible_rate(inst: NetworkInstance, c_occupancy: float = 1.5,
                      law: RateLawConstants = DEFAULT_LAW) -> float:
    return imh_realize(inst, c_occupancy, law).feasible_rate


def imh_hop_rate(inst: NetworkInstance, grid: RoutingGrid, schedule: ImhSchedule,
                 rx_pos, *, from_subcell: tuple[int, int] | None = None,
                 from_station: int | None = None, W: float | None = None,
                 law: RateLawConstants = DEFAULT_LAW) -> float:
    """Rate of one hop, summed transmitter by transmitter.

    Standalone scalar path kept deliberately separate from build_links so
    the batched interference accounting has an independent witness.  Pass
    from_subcell=(i, j) for a relay transmitter, or from_station=cell for
    a station; either way the slot is the transmitter tile's color.
    """
    e = inst.params
    if (from_subcell is None) == (from_station is None):
        raise ValueError("pass exactly one of from_subcell, from_station")
    if from_station is not None:
        tx_pos = inst.bs_positions[from_station]
        p_tx = e.P_BS / inst.l
        ti, tj = (int(v) for v in grid.bs_subcell[from_station])
    else:
        ti, tj = int(from_subcell[0]), int(from_subcell[1])
        node = grid.relay_of(ti, tj)
        if node is None:
            raise ValueError(f"sub-cell ({ti}, {tj}) has no relay")
        tx_pos = inst.node_positions[node]
        p_tx = e.P
    color = int(subcell_color(ti, tj))
    if W is None:
        W = inst.W
    rx_pos = np.asarray(rx_pos, dtype=float)
    delta = torus_delta(rx_pos, tx_pos, inst.metric_side)
    d_hop = float(np.hypot(delta[0], delta[1]))
    P_r = p_tx * d_hop ** (-e.alpha)
    acc = 0.0
    for t_pos, t_w in zip(schedule.tx_pos[color], schedule.tx_weight[color]):
        delta = torus_delta(rx_pos, t_pos, inst.metric_side)
        acc += t_w * float(np.hypot(delta[0], delta[1])) ** (-e.alpha)
    J = acc - P_r
    N_I = e.N0 + J / W
    return (1.0 / schedule.K) * min(law.kappa_dof * W, law.kappa_pow * P_r / N_I)
