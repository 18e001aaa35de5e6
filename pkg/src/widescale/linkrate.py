"""Two-branch link rate law and the induced critical quantities.

A link with bandwidth W_u, received power P_r and interference-plus-noise
PSD N_I carries

    R = min(kappa_dof * W_u,  kappa_pow * P_r / N_I)

bits/s: linear in bandwidth while degrees of freedom are scarce, flat once
the received SNR per hertz is too thin to use more spectrum.  The crossover
bandwidth is W* = (kappa_pow / kappa_dof) * P_r / N_I; a link given more
than W* is overspread and sits on the power-limited branch.

With kappa_dof = 1 and kappa_pow = 1/ln 2 the two branches match the
low-SNR and high-SNR faces of Shannon's log2(1 + SNR) up to bounded
constants, which is all a scaling exponent can see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exponents import ScalingConfig


@dataclass(frozen=True)
class RateLawConstants:
    kappa_dof: float = 1.0              # bits/s per Hz on the DoF branch
    kappa_pow: float = 1.0 / math.log(2.0)  # bits/s per unit SNR-power ratio

    def __post_init__(self):
        if self.kappa_dof <= 0.0 or self.kappa_pow <= 0.0:
            raise ValueError("rate law constants must be positive")


DEFAULT_LAW = RateLawConstants()


@dataclass(frozen=True)
class LinkBudget:
    """Everything the rate law needs about one link."""

    W_u: float   # bandwidth available to this link [Hz]
    P_r: float   # received signal power [W]
    N_I: float   # interference-plus-noise PSD at the receiver [W/Hz]

    def __post_init__(self):
        if self.W_u < 0.0 or self.P_r < 0.0 or self.N_I <= 0.0:
            raise ValueError("need W_u >= 0, P_r >= 0 and N_I > 0")


def link_rate(budget: LinkBudget, law: RateLawConstants = DEFAULT_LAW) -> float:
    """Rate of one link in bits/s.  Boundary W_u == W* lands on the power branch."""
    return min(law.kappa_dof * budget.W_u, law.kappa_pow * budget.P_r / budget.N_I)


def link_rates(W_u, P_r, N_I, law: RateLawConstants = DEFAULT_LAW) -> np.ndarray:
    """Vectorized rate law over broadcastable arrays."""
    return np.minimum(law.kappa_dof * np.asarray(W_u, dtype=float),
                      law.kappa_pow * np.asarray(P_r, dtype=float) / np.asarray(N_I, dtype=float))


def critical_bandwidth(P_r, N_I, law: RateLawConstants = DEFAULT_LAW):
    """W* beyond which extra bandwidth stops paying: (kappa_pow/kappa_dof)*P_r/N_I."""
    return (law.kappa_pow / law.kappa_dof) * np.asarray(P_r, dtype=float) / np.asarray(N_I, dtype=float)


def is_power_limited(W_u, P_r, N_I, law: RateLawConstants = DEFAULT_LAW):
    """True where the power branch is active (W_u >= W*, ties included)."""
    return np.asarray(W_u, dtype=float) >= critical_bandwidth(P_r, N_I, law)


def critical_distance(e: ScalingConfig, n: int, N_I: float,
                      law: RateLawConstants = DEFAULT_LAW) -> float:
    """Station-to-node distance at which a full-bandwidth stream goes overspread.

    A node at distance r from its station receives P_BS/l * r^(-alpha) on
    its stream; setting the power branch equal to the DoF branch at the
    total system bandwidth W gives

        r* = ((kappa_pow/kappa_dof) * P_BS / (l * N_I * W)) ** (1/alpha).

    Nodes beyond r* cannot use bandwidth proportional to W, which is what
    caps the single-hop protocol in the power-limited regime.
    """
    if N_I <= 0.0:
        raise ValueError("N_I must be positive")
    W = e.bandwidth(n)
    l = e.antennas(n)
    ratio = law.kappa_pow / law.kappa_dof
    return (ratio * e.P_BS / (l * N_I * W)) ** (1.0 / e.alpha)


def dof_fraction_predicted(e: ScalingConfig, n: int, N_I: float,
                           law: RateLawConstants = DEFAULT_LAW) -> float:
    """Predicted fraction of nodes inside the critical distance, clamped to [0, 1].

    Nodes closer to their station than r* still ride the DoF branch; the
    rest are overspread.  Uses the disc-to-cell area ratio
    2*pi*r*^2 / cell_area with the nominal cell_area =
    (A0/m0) * n^(nu - beta); the factor 2 absorbs cell-shape and edge
    effects at the envelope level, so this is an upper envelope rather
    than an unbiased estimate.
    """
    r_star = critical_distance(e, n, N_I, law)
    cell_area = (e.A0 / e.m0) * float(n) ** (e.nu - e.beta)
    return min(2.0 * math.pi * r_star * r_star / cell_area, 1.0)
