"""Network realizations: station lattice, node placement, cells, routing grid.

Base stations sit on a rank-1 lattice on the unit torus (scaled to the
simulation area).  For any station count m the generator is searched so the
packing is as close to hexagonal quality as possible; all Voronoi cells of
such a lattice are congruent, which keeps the worst-case cell geometry
stable across the station counts produced by m0 * n^beta rounding.

Nodes are placed uniformly at random and served by the nearest station.
Distances use wraparound (torus) metric by default; a finite-border mode is
available for border-effect comparisons.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from functools import lru_cache

import numpy as np

from .exponents import ScalingConfig

_RX_CHUNK = 2048  # rows per block in pairwise distance computations


def torus_delta(a: np.ndarray, b: np.ndarray, side: float | None) -> np.ndarray:
    """Displacement a - b, reduced to the minimal image when side is given."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    if side is not None:
        d = d - side * np.round(d / side)
    return d


def pairwise_distances(a: np.ndarray, b: np.ndarray, side: float | None) -> np.ndarray:
    """Distance matrix of shape (len(a), len(b)), chunked over rows."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    out = np.empty((a.shape[0], b.shape[0]))
    for lo in range(0, a.shape[0], _RX_CHUNK):
        hi = min(lo + _RX_CHUNK, a.shape[0])
        d = a[lo:hi, None, :] - b[None, :, :]
        if side is not None:
            d -= side * np.round(d / side)
        out[lo:hi] = np.hypot(d[..., 0], d[..., 1])
    return out


def _lattice_points(m: int, g: int) -> np.ndarray:
    k = np.arange(m, dtype=float)
    pts = np.stack([k / m, (k * g % m) / m], axis=1)
    return pts


def _min_lattice_distance(m: int, g: int) -> float:
    pts = _lattice_points(m, g)[1:]
    d = pts - np.round(pts)
    return float(np.min(np.hypot(d[:, 0], d[:, 1])))


def _covering_radius(points: np.ndarray, probes: np.ndarray) -> float:
    d = pairwise_distances(probes, points, side=1.0)
    return float(np.max(np.min(d, axis=1)))


@lru_cache(maxsize=256)
def bs_lattice_unit(m: int) -> np.ndarray:
    """Station positions on the unit torus, first station at the center.

    The generator of the rank-1 lattice is chosen in two stages: rank all
    candidates by minimal point spacing (packing quality), then among the
    best few pick the one with the smallest covering radius.  Covering
    radius is what bounds the worst node-to-station distance, which in turn
    drives the power-limited feasible rate.
    """
    if m < 1:
        raise ValueError(f"m >= 1 required, got m={m}")
    if m == 1:
        out = np.array([[0.5, 0.5]])
        out.setflags(write=False)
        return out
    gs = np.arange(1, m)
    spacing = np.array([_min_lattice_distance(m, int(g)) for g in gs])
    order = np.argsort(-spacing)
    shortlist = gs[order[: min(8, len(gs))]]
    side = np.linspace(0.0, 1.0, 97, endpoint=False)
    probes = np.stack(np.meshgrid(side, side), axis=-1).reshape(-1, 2)
    best_g, best_cov = None, np.inf
    for g in shortlist:
        cov = _covering_radius(_lattice_points(m, int(g)), probes)
        if cov < best_cov - 1e-12:
            best_g, best_cov = int(g), cov
    pts = (_lattice_points(m, best_g) + np.array([0.5, 0.5])) % 1.0
    pts.setflags(write=False)
    return pts


@dataclass
class NetworkInstance:
    """One random network realization at a concrete size n."""

    params: ScalingConfig
    n: int
    m: int                      # station count
    l: int                      # antennas per station
    seed: int
    area: float                 # [m^2]
    side: float                 # torus side length [m]
    W: float                    # total bandwidth [Hz]
    r_cell: float               # hexagon-equivalent cell circumradius [m]
    wraparound: bool
    bs_positions: np.ndarray    # (m, 2)
    node_positions: np.ndarray  # (n, 2)
    cell_of_node: np.ndarray    # (n,) station index serving each node

    @property
    def metric_side(self) -> float | None:
        return self.side if self.wraparound else None

    def nodes_of_cell(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.cell_of_node == c)

    def serving_distances(self) -> np.ndarray:
        d = torus_delta(self.node_positions, self.bs_positions[self.cell_of_node],
                        self.metric_side)
        return np.hypot(d[:, 0], d[:, 1])

    def to_json(self) -> str:
        doc = {
            "params": asdict(self.params),
            "n": self.n, "m": self.m, "l": self.l, "seed": self.seed,
            "area": self.area, "side": self.side, "W": self.W,
            "r_cell": self.r_cell, "wraparound": self.wraparound,
            "bs_positions": self.bs_positions.tolist(),
            "node_positions": self.node_positions.tolist(),
            "cell_of_node": self.cell_of_node.tolist(),
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "NetworkInstance":
        doc = json.loads(text)
        return cls(
            params=ScalingConfig(**doc["params"]),
            n=doc["n"], m=doc["m"], l=doc["l"], seed=doc["seed"],
            area=doc["area"], side=doc["side"], W=doc["W"],
            r_cell=doc["r_cell"], wraparound=doc["wraparound"],
            bs_positions=np.array(doc["bs_positions"]),
            node_positions=np.array(doc["node_positions"]),
            cell_of_node=np.array(doc["cell_of_node"], dtype=np.int64),
        )


def generate_network(e: ScalingConfig, n: int, seed: int,
                     wraparound: bool = True) -> NetworkInstance:
    """Draw one network realization.

    Deterministic for fixed (e, n, seed): node placement consumes a
    dedicated seeded generator and the station lattice is seed-free.

    Raises:
        ValueError: if n cannot host the station array (n < m * l), so the
            single-hop protocol could not allocate one stream per node.
    """
    if n < 1:
        raise ValueError(f"n >= 1 required, got n={n}")
    m = e.bs_count(n)
    l = e.antennas(n)
    if n < m * l:
        raise ValueError(
            f"n={n} too small for the station array: need n >= m*l = {m * l} "
            f"(m={m} stations, l={l} antennas)")
    area = e.area(n)
    side = math.sqrt(area)
    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
    nodes = rng.uniform(0.0, side, size=(n, 2))
    bs = bs_lattice_unit(m) * side
    metric_side = side if wraparound else None
    d = pairwise_distances(nodes, bs, metric_side)
    cell = np.argmin(d, axis=1).astype(np.int64)
    return NetworkInstance(
        params=e, n=n, m=m, l=l, seed=seed, area=area, side=side,
        W=e.bandwidth(n), r_cell=e.cell_radius(n), wraparound=wraparound,
        bs_positions=bs, node_positions=nodes, cell_of_node=cell,
    )


# -- routing grid ---------------------------------------------------------


@dataclass
class RoutingGrid:
    """Global square grid of routing sub-cells covering the whole area.

    One grid for the entire torus, G tiles per side with G even, so the
    four-color reuse pattern (2x2 in tile indices) is consistent across
    the wraparound seam and no two adjacent sub-cells ever share a slot.
    The tile count is the largest even subdivision whose tile area still
    meets the occupancy target c_occupancy * (A/m) * 2*log(q)/q (q = mean
    nodes per cell), so tiles stay non-empty with high probability.

    The relay of a sub-cell is its node nearest the sub-cell center.
    Sub-cells containing a station elect no relay: the station itself owns
    that sub-cell's transmission slot.
    """

    pitch: float                 # tile edge length [m]
    G: int                       # tiles per torus side (even, or 1 collapsed)
    subcell_area: float          # pitch^2 [m^2]
    r_subcell: float             # half the tile diagonal [m]
    c_occupancy: float           # safety factor over the occupancy bound
    occupancy_bound: float       # minimal reliable tile area [m^2]
    node_subcell: np.ndarray     # (n, 2) int tile index of each node, in [0, G)
    bs_subcell: np.ndarray       # (m, 2) int tile index of each station
    relays: dict                 # (i, j) -> relay node index, non-empty tiles
    empty_fraction: float        # tiles holding no node, over all G^2

    def relay_of(self, i: int, j: int) -> int | None:
        return self.relays.get((int(i), int(j)))

    def tile_center(self, i: int, j: int) -> np.ndarray:
        return (np.array([i, j], dtype=float) + 0.5) * self.pitch

    def to_json(self) -> str:
        doc = {
            "pitch": self.pitch, "G": self.G,
            "subcell_area": self.subcell_area, "r_subcell": self.r_subcell,
            "c_occupancy": self.c_occupancy,
            "occupancy_bound": self.occupancy_bound,
            "node_subcell": self.node_subcell.tolist(),
            "bs_subcell": self.bs_subcell.tolist(),
            "relays": [[i, j, r] for (i, j), r in sorted(self.relays.items())],
            "empty_fraction": self.empty_fraction,
        }
        return json.dumps(doc, indent=1)


def grid_side_count(side: float, cell_area: float, q: float,
                    c_occupancy: float) -> tuple[int, float]:
    """Tiles per torus side and the bare occupancy bound on tile area.

    G is the largest even count whose tile area still meets the full
    occupancy target c_occupancy * bound, so the configured safety factor
    is never eroded by rounding.  Even G keeps the 2x2 coloring seam-free;
    G collapses to 1 when even a 2x2 grid would dip under the bare bound.
    """
    if q < 2:
        raise ValueError(f"need at least 2 nodes per cell on average, got {q:.3g}")
    bound = cell_area * 2.0 * math.log(q) / q
    g_star = side / math.sqrt(c_occupancy * bound)
    g_even_max = 2 * math.floor(side / math.sqrt(bound) / 2.0)
    if g_even_max < 2:
        return 1, bound
    return int(min(max(2 * math.floor(g_star / 2.0), 2), g_even_max)), bound


def build_routing_grid(inst: NetworkInstance, c_occupancy: float = 1.5) -> RoutingGrid:
    if c_occupancy <= 1.0:
        raise ValueError(f"c_occupancy > 1 required, got {c_occupancy}")
    G, bound = grid_side_count(inst.side, inst.area / inst.m,
                               inst.n / inst.m, c_occupancy)
    pitch = inst.side / G

    def tiles_of(pos: np.ndarray) -> np.ndarray:
        return np.minimum(np.floor(pos / pitch).astype(np.int64), G - 1)

    node_subcell = tiles_of(inst.node_positions)
    bs_subcell = tiles_of(inst.bs_positions)
    bs_tiles = {(int(i), int(j)) for i, j in bs_subcell}

    # Relay election: per tile, the node nearest the tile center;
    # station tiles are skipped (the station owns their slot).
    centers = (node_subcell + 0.5) * pitch
    off = inst.node_positions - centers
    center_dist = np.hypot(off[:, 0], off[:, 1])
    order = np.lexsort((center_dist, node_subcell[:, 1], node_subcell[:, 0]))
    sorted_tiles = node_subcell[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = np.any(sorted_tiles[1:] != sorted_tiles[:-1], axis=1)
    occupied = 0
    relays = {}
    for idx in np.flatnonzero(first):
        i, j = sorted_tiles[idx]
        occupied += 1
        if (int(i), int(j)) not in bs_tiles:
            relays[(int(i), int(j))] = int(order[idx])

    return RoutingGrid(
        pitch=pitch, G=G, subcell_area=pitch * pitch,
        r_subcell=pitch * math.sqrt(2.0) / 2.0, c_occupancy=c_occupancy,
        occupancy_bound=bound, node_subcell=node_subcell,
        bs_subcell=bs_subcell, relays=relays,
        empty_fraction=1.0 - occupied / (G * G),
    )
