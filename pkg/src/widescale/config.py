"""JSON run configuration: defaults, loading, merging, validation.

A configuration is a plain nested dict.  User files override the defaults
key by key; unknown sections or keys are rejected so typos fail loudly
instead of silently running the defaults.

The default constants are calibrated so the benchmark size range
n = 256 .. 16384 actually exhibits all three operating regimes across a
bandwidth-exponent sweep; they are abstract knobs of the scaling model,
not a radio planning profile.
"""

from __future__ import annotations

import copy
import json
import math

from .exponents import PROTOCOLS, ScalingConfig
from .ish import ALLOCATION_MODES
from .linkrate import RateLawConstants

DEFAULTS = {
    "exponents": {
        "psi": 0.25,    # bandwidth grows as n^psi
        "nu": 0.0,      # area grows as n^nu
        "beta": 0.5,    # stations grow as n^beta
        "gamma": 0.0,   # antennas grow as n^gamma
        "alpha": 4.0,   # path loss
    },
    "constants": {
        "W0": 1.0e6,
        "A0": 1.0e6,
        "m0": 1.0,
        "l0": 4.0,
        "P": 1.0e3,
        "P_BS": 4.0,
        "N0": 1.5e-17,
    },
    "rate_law": {
        "kappa_dof": 1.0,
        "kappa_pow": 1.0 / math.log(2.0),
    },
    "sweep": {
        "n_values": [256, 512, 1024, 2048, 4096, 8192, 16384],
        "seed_count": 10,
        "seeds": None,              # explicit list overrides seed_count
        "protocols": list(PROTOCOLS),
        "tolerance": 0.15,
        "allocation_mode": "closed_form",
        "c_occupancy": 1.5,
        "wraparound": True,
        "infeasible_threshold": 0.01,
    },
    "regime_map": {
        "psi_values": [0.25 * k for k in range(1, 13)],
        "measured": False,
    },
    "output": {
        "figures": True,
    },
}


def load_config(path: str | None = None) -> dict:
    """Defaults merged with an optional JSON file, validated."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        if not isinstance(user, dict):
            raise ValueError(f"{path}: top level must be a JSON object")
        for section, payload in user.items():
            if section not in cfg:
                raise ValueError(f"{path}: unknown section {section!r}")
            if not isinstance(payload, dict):
                raise ValueError(f"{path}: section {section!r} must be an object")
            for key, value in payload.items():
                if key not in cfg[section]:
                    raise ValueError(f"{path}: unknown key {section}.{key}")
                cfg[section][key] = value
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    sweep = cfg["sweep"]
    if sweep["seeds"] is not None and not sweep["seeds"]:
        raise ValueError("sweep.seeds must be a non-empty list or null")
    bad = [p for p in sweep["protocols"] if p not in PROTOCOLS]
    if bad:
        raise ValueError(f"unknown protocols {bad}, expected subset of {PROTOCOLS}")
    if sweep["allocation_mode"] not in ALLOCATION_MODES:
        raise ValueError(f"unknown allocation mode {sweep['allocation_mode']!r}")
    psi = cfg["exponents"]["psi"]
    psis = psi if isinstance(psi, list) else [psi]
    for value in psis:
        params_from_config(cfg, psi=value)  # delegates range checks
    law_from_config(cfg)


def params_from_config(cfg: dict, psi: float | None = None) -> ScalingConfig:
    exp = dict(cfg["exponents"])
    if psi is not None:
        exp["psi"] = psi
    elif isinstance(exp["psi"], list):
        raise ValueError("exponents.psi is a list; pick one value per run")
    return ScalingConfig(**exp, **cfg["constants"])


def law_from_config(cfg: dict) -> RateLawConstants:
    return RateLawConstants(**cfg["rate_law"])


def seeds_from_config(cfg: dict, seed_base: int = 0) -> list:
    sweep = cfg["sweep"]
    if sweep["seeds"] is not None:
        return [seed_base + int(s) for s in sweep["seeds"]]
    return [seed_base + i for i in range(int(sweep["seed_count"]))]


def psi_list(cfg: dict) -> list:
    psi = cfg["exponents"]["psi"]
    return list(psi) if isinstance(psi, list) else [psi]
