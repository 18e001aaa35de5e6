"""Command line front end.

Subcommands:
    exponents   closed-form exponents and regime for the configured point
    regime-map  analytic exponent curves over a bandwidth-exponent grid,
                optionally with measured slopes next to them
    simulate    one realization at a fixed size, with per-node and
                per-route dumps
    sweep       Monte-Carlo size sweep, slope fit and pass/fail verdict

All output lands under --out; delimited files are byte-stable across runs
of the same configuration.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import (law_from_config, load_config, params_from_config,
                     psi_list, seeds_from_config)
from .exponents import (IMH, ISH, PROTOCOLS, classify_regime,
                        dof_threshold_imh, dof_threshold_ish, exponent_curve,
                        imh_rate_exponent, ish_rate_exponent,
                        is_trivially_linear)
from .geometry import build_routing_grid, generate_network
from .harness import regime_map_measured, run_sweep
from .imh import imh_realize
from .ish import ish_realize
from . import report

logger = logging.getLogger(__name__)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", default=None, metavar="PATH",
                     help="JSON configuration file merged over the defaults")
    sub.add_argument("--out", default=None, metavar="DIR",
                     help="output directory (default: out)")
    sub.add_argument("--seed-base", type=int, default=0,
                     help="offset added to every configured seed")
    sub.add_argument("--protocol", choices=("ish", "imh", "both"),
                     default="both", help="which protocol(s) to run")
    sub.add_argument("--tolerance", type=float, default=None,
                     help="slope acceptance tolerance (default: from config)")


def _protocols(args) -> tuple:
    return PROTOCOLS if args.protocol == "both" else (args.protocol,)


def _outdir(args) -> str:
    path = args.out if args.out is not None else "out"
    os.makedirs(path, exist_ok=True)
    return path


def _sweep_kwargs(args, cfg) -> dict:
    sweep = cfg["sweep"]
    tol = args.tolerance if args.tolerance is not None else sweep["tolerance"]
    return dict(
        protocols=tuple(p for p in sweep["protocols"] if p in _protocols(args)),
        law=law_from_config(cfg),
        allocation_mode=sweep["allocation_mode"],
        wraparound=sweep["wraparound"],
        c_occupancy=sweep["c_occupancy"],
        infeasible_threshold=sweep["infeasible_threshold"],
        tolerance=tol,
    )


def _print_fits(result) -> None:
    for p in result.protocols:
        f = result.fits[p]
        if f.fit is None:
            print(f"{p}: no fit (insufficient usable sizes)")
            continue
        verdict = "PASS" if f.passed else "FAIL"
        print(f"{p}: slope={f.slope:+.4f} theory={f.theory_slope:+.4f} "
              f"ci=[{f.fit.ci_low:+.4f}, {f.fit.ci_high:+.4f}] "
              f"tol={f.tolerance:.2f} {verdict}")


def cmd_exponents(args, cfg) -> int:
    gamma = cfg["exponents"]["gamma"]
    lines = []
    for psi in psi_list(cfg):
        e = params_from_config(cfg, psi)
        note = " (trivially linear)" if is_trivially_linear(e) else ""
        lines.append((psi + gamma, ish_rate_exponent(e), imh_rate_exponent(e),
                      classify_regime(e).value + note))
    e0 = params_from_config(cfg, psi_list(cfg)[0])
    print(f"thresholds: single-hop at psi+gamma={dof_threshold_ish(e0):g}, "
          f"multihop at psi+gamma={dof_threshold_imh(e0):g}")
    print(f"{'psi+gamma':>10} {'ish':>8} {'imh':>8}  regime")
    for x, ei, em, label in lines:
        print(f"{x:>10.3f} {ei:>+8.3f} {em:>+8.3f}  {label}")
    return 0


def cmd_regime_map(args, cfg) -> int:
    gamma = cfg["exponents"]["gamma"]
    psis = cfg["regime_map"]["psi_values"]
    e = params_from_config(cfg, psis[0])
    curve = exponent_curve(e, [p + gamma for p in psis])
    measured = None
    if cfg["regime_map"]["measured"]:
        kwargs = _sweep_kwargs(args, cfg)
        slopes, _ = regime_map_measured(
            e, psis, cfg["sweep"]["n_values"],
            seeds_from_config(cfg, args.seed_base),
            **kwargs)
        measured = slopes
    outdir = _outdir(args)
    path = report.write_regime_map(curve, os.path.join(outdir, "regime_map.csv"),
                                   measured)
    print(f"wrote {path}")
    if cfg["output"]["figures"]:
        fig = report.regime_map_figure(
            curve, os.path.join(outdir, "regime_map.svg"), measured)
        print(f"wrote {fig}")
    return 0


def cmd_simulate(args, cfg) -> int:
    e = params_from_config(cfg)
    seed = args.seed_base + args.seed
    inst = generate_network(e, args.n, seed, cfg["sweep"]["wraparound"])
    law = law_from_config(cfg)
    outdir = _outdir(args)
    print(f"n={inst.n} m={inst.m} l={inst.l} W={inst.W:g} Hz "
          f"area={inst.area:g} m^2 seed={seed}")
    if ISH in _protocols(args):
        real = ish_realize(inst, cfg["sweep"]["allocation_mode"], law)
        path = report.write_ish_nodes(real, os.path.join(outdir, "ish_nodes.csv"))
        print(f"ish: feasible_rate={real.feasible_rate:.6g} bits/s "
              f"overspread_fraction={real.overspread_fraction:.4f}")
        print(f"wrote {path}")
    if IMH in _protocols(args):
        try:
            real = imh_realize(inst, cfg["sweep"]["c_occupancy"], law,
                               cfg["sweep"]["infeasible_threshold"])
        except ValueError as exc:
            print(f"imh: not runnable at n={args.n}: {exc}")
            return 1
        path = report.write_imh_routes(real, os.path.join(outdir, "imh_routes.csv"))
        print(f"imh: feasible_rate={real.feasible_rate:.6g} bits/s "
              f"infeasible_route_fraction={real.infeasible_fraction:.4f} "
              f"modal_bottleneck_hop={real.modal_bottleneck}")
        print(f"wrote {path}")
    return 0


def cmd_sweep(args, cfg) -> int:
    psis = psi_list(cfg)
    seeds = seeds_from_config(cfg, args.seed_base)
    kwargs = _sweep_kwargs(args, cfg)
    outdir = _outdir(args)
    figures = cfg["output"]["figures"]
    cache: dict = {}
    all_ok = True
    for psi in psis:
        e = params_from_config(cfg, psi)
        subdir = outdir if len(psis) == 1 else os.path.join(outdir, f"psi_{psi:g}")
        result = run_sweep(e, cfg["sweep"]["n_values"], seeds,
                           cache=cache, **kwargs)
        paths = report.write_sweep_outputs(result, subdir, figures)
        if len(psis) > 1:
            print(f"psi={psi:g}:")
        _print_fits(result)
        for path in paths:
            print(f"wrote {path}")
        all_ok = all_ok and result.all_passed
    return 0 if all_ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="widescale",
        description="Scaling-law simulator for wideband cellular downlinks")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("exponents", help="closed-form exponents and regime")
    _add_common(p)
    p.set_defaults(func=cmd_exponents)

    p = subs.add_parser("regime-map", help="exponent curves over psi grid")
    _add_common(p)
    p.set_defaults(func=cmd_regime_map)

    p = subs.add_parser("simulate", help="single realization with dumps")
    _add_common(p)
    p.add_argument("--n", type=int, required=True, help="network size")
    p.add_argument("--seed", type=int, default=0, help="realization seed")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("sweep", help="size sweep, slope fit, verdict")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config)
    return args.func(args, cfg)


if __name__ == "__main__":
    sys.exit(main())
