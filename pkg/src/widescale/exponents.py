"""Closed-form rate scaling exponents and operating-regime classification.

A network family is indexed by the node count n.  Bandwidth, area, base
station count and base station antennas all grow as powers of n; the
per-node feasible downlink rate then grows (or shrinks) as n^E where E has
a closed form for each protocol:

    ISH (single hop):   E = beta - 1 + min(psi + gamma, (alpha/2) * (beta - nu))
    IMH (multihop):     E = beta - 1 + min(psi + gamma, (alpha/2) * (1 - nu))

The min() picks between a degrees-of-freedom-limited branch (rate follows
the per-node bandwidth) and a receive-power-limited branch (rate follows
the worst-case link SNR).  Which branch binds for which protocol defines
three regimes; both protocols coincide below the first threshold and the
multihop protocol keeps the bandwidth branch up to the second one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

ISH = "ish"
IMH = "imh"
PROTOCOLS = (ISH, IMH)


class Regime(enum.Enum):
    """Operating regime of a scaling configuration (both protocols jointly)."""

    BOTH_DOF_LIMITED = "both_dof_limited"
    ISH_POWER_IMH_DOF = "ish_power_imh_dof"
    BOTH_POWER_LIMITED = "both_power_limited"


@dataclass(frozen=True)
class ScalingConfig:
    """Growth exponents and base constants of a simulated network family.

    Each quantity scales as base * n^exponent: bandwidth W0 * n^psi, area
    A0 * n^nu, base stations m0 * n^beta, antennas per base station
    l0 * n^gamma.  Powers and the noise floor stay fixed with n.
    """

    psi: float = 0.25   # bandwidth growth exponent
    nu: float = 0.0     # area growth exponent
    beta: float = 0.5   # base station count growth exponent
    gamma: float = 0.0  # antennas-per-base-station growth exponent
    alpha: float = 4.0  # path loss exponent, > 2

    W0: float = 1.0e6   # base bandwidth [Hz]
    A0: float = 1.0e6   # base area [m^2]
    m0: float = 1.0     # base station count prefactor
    l0: float = 4.0     # antenna count prefactor
    P: float = 1.0e3    # relay node transmit power [power units]
    P_BS: float = 4.0   # base station transmit power [power units]
    N0: float = 1.5e-17 # noise power spectral density [power units / Hz]

    def __post_init__(self):
        if not self.alpha > 2:
            raise ValueError(f"alpha > 2 required, got alpha={self.alpha}")
        if self.psi < 0:
            raise ValueError(f"psi >= 0 required, got psi={self.psi}")
        if not 0 <= self.nu <= 1:
            raise ValueError(f"0 <= nu <= 1 required, got nu={self.nu}")
        if not 0 <= self.beta <= 1:
            raise ValueError(f"0 <= beta <= 1 required, got beta={self.beta}")
        if self.gamma < 0:
            raise ValueError(f"gamma >= 0 required, got gamma={self.gamma}")
        if self.beta + self.gamma > 1 + 1e-12:
            raise ValueError(
                f"beta + gamma <= 1 required (one antenna per node at most), "
                f"got beta+gamma={self.beta + self.gamma}"
            )
        for name in ("W0", "A0", "m0", "l0", "P", "P_BS", "N0"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} > 0 required, got {getattr(self, name)}")

    # -- derived sizes at a concrete n ------------------------------------

    def bandwidth(self, n: int) -> float:
        return self.W0 * n ** self.psi

    def area(self, n: int) -> float:
        return self.A0 * n ** self.nu

    def bs_count(self, n: int) -> int:
        # rounded to nearest integer, floored at one station
        return max(1, round(self.m0 * n ** self.beta))

    def antennas(self, n: int) -> int:
        return max(1, round(self.l0 * n ** self.gamma))

    def cell_radius(self, n: int) -> float:
        """Circumradius of the regular hexagon with the mean cell area."""
        cell_area = self.area(n) / self.bs_count(n)
        return math.sqrt(2.0 * cell_area / (3.0 * math.sqrt(3.0)))

    def with_psi(self, psi: float) -> "ScalingConfig":
        return replace(self, psi=psi)


def ish_rate_exponent(e: ScalingConfig) -> float:
    """Growth exponent of the per-node single-hop feasible rate."""
    return e.beta - 1.0 + min(e.psi + e.gamma, 0.5 * e.alpha * (e.beta - e.nu))


def imh_rate_exponent(e: ScalingConfig) -> float:
    """Growth exponent of the per-node multihop feasible rate."""
    return e.beta - 1.0 + min(e.psi + e.gamma, 0.5 * e.alpha * (1.0 - e.nu))


def dof_threshold_ish(e: ScalingConfig) -> float:
    """Value of psi + gamma where the ISH rate stops following bandwidth."""
    return 0.5 * e.alpha * (e.beta - e.nu)


def dof_threshold_imh(e: ScalingConfig) -> float:
    """Value of psi + gamma where the IMH rate stops following bandwidth."""
    return 0.5 * e.alpha * (1.0 - e.nu)


def classify_regime(e: ScalingConfig) -> Regime:
    """Classify which rate branch binds for each protocol.

    Boundary ties go to the power-limited side: at the threshold both
    branches scale identically and the power branch is the binding one in
    the worst-case cell geometry.
    """
    x = e.psi + e.gamma
    if x < dof_threshold_ish(e):
        return Regime.BOTH_DOF_LIMITED
    if x < dof_threshold_imh(e):
        return Regime.ISH_POWER_IMH_DOF
    return Regime.BOTH_POWER_LIMITED


def is_trivially_linear(e: ScalingConfig) -> bool:
    """True when every node hosts its own base station (beta=1, gamma=0).

    Both closed forms then coincide for every psi, so the protocols are
    indistinguishable at the scaling level.
    """
    return e.beta == 1.0 and e.gamma == 0.0


def exponent_curve(e: ScalingConfig, x_grid: np.ndarray) -> dict:
    """Analytic exponent curves along a psi + gamma sweep.

    gamma is held at e.gamma; the grid positions are total psi + gamma
    values, so the swept psi is x - gamma (negative grid points below
    gamma are rejected).

    Args:
        e: scaling configuration providing the fixed exponents.
        x_grid: increasing array of psi + gamma values.

    Returns:
        dict with keys "x", "ish", "imh", "regime" (label strings) plus
        the two threshold locations.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.ndim != 1 or x_grid.size == 0:
        raise ValueError("x_grid must be a non-empty 1-D array")
    if np.any(x_grid < e.gamma - 1e-12):
        raise ValueError("x_grid values must be >= gamma (psi >= 0)")
    ish = np.empty_like(x_grid)
    imh = np.empty_like(x_grid)
    labels = []
    for i, x in enumerate(x_grid):
        cfg = e.with_psi(max(float(x) - e.gamma, 0.0))
        ish[i] = ish_rate_exponent(cfg)
        imh[i] = imh_rate_exponent(cfg)
        labels.append(classify_regime(cfg).value)
    return {
        "x": x_grid,
        "ish": ish,
        "imh": imh,
        "regime": labels,
        "ish_threshold": dof_threshold_ish(e),
        "imh_threshold": dof_threshold_imh(e),
    }
