"""Scaling-law simulator for wideband cellular downlinks.

Two protocols over the same random networks: direct single-hop service
from multi-antenna stations, and multihop relaying over a per-cell routing
grid.  The package measures Monte-Carlo feasible rates, fits log-log
slopes over a size sweep, and checks them against the closed-form
exponents of both protocols.
"""

from .exponents import (IMH, ISH, PROTOCOLS, Regime, ScalingConfig,
                        classify_regime, dof_threshold_imh, dof_threshold_ish,
                        exponent_curve, imh_rate_exponent, ish_rate_exponent,
                        is_trivially_linear)
from .geometry import (NetworkInstance, RoutingGrid, bs_lattice_unit,
                       build_routing_grid, generate_network, grid_side_count)
from .channel import (ish_interference_psd, ish_interference_psd_all,
                      ish_ring_bound_psd, pathloss_gain, zeta)
from .linkrate import (DEFAULT_LAW, LinkBudget, RateLawConstants,
                       critical_bandwidth, critical_distance, link_rate,
                       link_rates, dof_fraction_predicted)
from .ish import (IshAllocation, IshRealization, ish_allocate,
                  ish_feasible_rate, ish_node_rate, ish_realize)
from .imh import (ImhLinkSet, ImhRealization, ImhSchedule, build_links,
                  build_schedule, chain_subcells, imh_feasible_rate,
                  imh_hop_rate, imh_realize, rates_from_links, subcell_color)
from .harness import (FitResult, ProtocolFit, SweepResult, SweepRow,
                      fit_exponent, prepare_bundle, regime_map_measured,
                      run_sweep)
from .config import DEFAULTS, load_config, params_from_config

__version__ = "0.1.0"

__all__ = [
    "IMH", "ISH", "PROTOCOLS", "Regime", "ScalingConfig", "classify_regime",
    "dof_threshold_imh", "dof_threshold_ish", "exponent_curve",
    "imh_rate_exponent", "ish_rate_exponent", "is_trivially_linear",
    "NetworkInstance", "RoutingGrid", "bs_lattice_unit", "build_routing_grid",
    "generate_network", "grid_side_count",
    "ish_interference_psd", "ish_interference_psd_all", "ish_ring_bound_psd",
    "pathloss_gain", "zeta",
    "DEFAULT_LAW", "LinkBudget", "RateLawConstants", "critical_bandwidth",
    "critical_distance", "link_rate", "link_rates",
    "dof_fraction_predicted",
    "IshAllocation", "IshRealization", "ish_allocate", "ish_feasible_rate",
    "ish_node_rate", "ish_realize",
    "ImhLinkSet", "ImhRealization", "ImhSchedule", "build_links",
    "build_schedule", "chain_subcells", "imh_feasible_rate", "imh_hop_rate",
    "imh_realize", "rates_from_links", "subcell_color",
    "FitResult", "ProtocolFit", "SweepResult", "SweepRow", "fit_exponent",
    "prepare_bundle", "regime_map_measured", "run_sweep",
    "DEFAULTS", "load_config", "params_from_config",
]
