"""Single-hop allocation, pricing and feasible rate."""

import math

import numpy as np
import pytest

from widescale.exponents import ScalingConfig
from widescale.geometry import generate_network
from widescale.ish import (ish_allocate, ish_node_rate, ish_realize,
                           ish_rates_under_bandwidth)

E = ScalingConfig()


def test_closed_form_shares_are_exact_averages():
    inst = generate_network(E, 1024, 0)
    alloc = ish_allocate(inst, "closed_form")
    np.testing.assert_allclose(alloc.W_u * inst.n, inst.W * inst.l * inst.m, rtol=1e-15)
    np.testing.assert_allclose(alloc.P_u * inst.n, E.P_BS * inst.m, rtol=1e-15)
    assert alloc.users_per_stream == inst.n / (inst.m * inst.l)


def test_per_cell_budgets_add_up():
    inst = generate_network(E, 1024, 2)
    alloc = ish_allocate(inst, "per_cell")
    for c in range(inst.m):
        members = inst.nodes_of_cell(c)
        if len(members) == 0:
            continue
        # stations spend their whole power budget, never more spectrum
        # than their l streams span
        assert np.sum(alloc.P_u[members]) == pytest.approx(E.P_BS, rel=1e-12)
        assert np.sum(alloc.W_u[members]) <= inst.W * inst.l * (1 + 1e-12)
        assert np.all(alloc.W_u[members] == alloc.W_u[members][0])


def test_stream_assignment_is_balanced():
    inst = generate_network(E, 1024, 6)
    alloc = ish_allocate(inst)
    assert inst.m == 32 and inst.l == 4
    assert alloc.users_per_stream == 8.0
    assert np.all((alloc.stream_of_node >= 0) & (alloc.stream_of_node < inst.l))
    for c in range(inst.m):
        members = inst.nodes_of_cell(c)
        per_stream = np.bincount(alloc.stream_of_node[members], minlength=inst.l)
        lo, hi = len(members) // inst.l, -(-len(members) // inst.l)
        assert per_stream.min() >= lo and per_stream.max() <= hi


def test_mode_validation():
    inst = generate_network(E, 256, 0)
    with pytest.raises(ValueError, match="allocation mode"):
        ish_allocate(inst, "fair")
    with pytest.raises(ValueError, match="allocation mode"):
        ish_node_rate(inst, 0, "fair")


def test_scalar_witness_matches_batch():
    inst = generate_network(E, 256, 11)
    for mode in ("closed_form", "per_cell"):
        real = ish_realize(inst, mode)
        for u in range(inst.n):
            assert ish_node_rate(inst, u, mode) == pytest.approx(
                real.rates[u], rel=1e-9)


def test_realization_pinned_and_cross_checked():
    e = ScalingConfig(psi=2.0)
    inst = generate_network(e, 4096, 5)
    real = ish_realize(inst)
    # frozen outputs; any drift in geometry, pricing or reduction shows here
    assert real.feasible_rate == pytest.approx(163979733.815464, rel=1e-12)
    assert real.overspread_fraction == 0.9873046875

    # independent repricing from a full station-to-node distance matrix
    delta = inst.node_positions[None, :, :] - inst.bs_positions[:, None, :]
    delta -= inst.side * np.round(delta / inst.side)
    d = np.hypot(delta[..., 0], delta[..., 1])
    cols = np.arange(inst.n)
    gains = d ** (-e.alpha)
    sums = gains.sum(axis=0) - gains[inst.cell_of_node, cols]
    N_I = e.N0 + e.P_BS * sums / (inst.W * inst.l)
    P_r = (e.P_BS * inst.m / inst.n) * d[inst.cell_of_node, cols] ** (-e.alpha)
    rates = np.minimum(inst.W * inst.l * inst.m / inst.n,
                       (1.0 / math.log(2.0)) * P_r / N_I)
    np.testing.assert_allclose(rates, real.rates, rtol=1e-9)


def test_bandwidth_doubling_by_regime():
    # doubling W at most doubles any node's rate; whether the minimum
    # follows tells the two regimes apart
    for psi, lo, hi in ((0.25, 1.99, 2.0 + 1e-12), (2.0, 1.0, 1.001)):
        inst = generate_network(ScalingConfig(psi=psi), 2048, 0)
        r1 = ish_rates_under_bandwidth(inst, inst.W)
        r2 = ish_rates_under_bandwidth(inst, 2.0 * inst.W)
        ratio = r2 / r1
        assert np.all(ratio >= 1.0 - 1e-12) and np.all(ratio <= 2.0 + 1e-12)
        assert lo <= r2.min() / r1.min() <= hi


def test_overspread_fraction_by_regime():
    assert ish_realize(generate_network(
        ScalingConfig(psi=0.25), 2048, 0)).overspread_fraction == 0.04150390625
    assert ish_realize(generate_network(
        ScalingConfig(psi=2.0), 2048, 0)).overspread_fraction == 0.98388671875


def test_repricing_at_own_bandwidth_is_identity():
    inst = generate_network(E, 512, 3)
    real = ish_realize(inst)
    np.testing.assert_array_equal(
        ish_rates_under_bandwidth(inst, inst.W), real.rates)
    from widescale.channel import ish_interference_sums
    sums = ish_interference_sums(inst)
    np.testing.assert_array_equal(
        ish_rates_under_bandwidth(inst, inst.W, sums=sums), real.rates)


def test_single_station_rates_fall_with_distance():
    # one station, no interference: rate is a nonincreasing function of
    # the serving distance
    e = ScalingConfig(beta=0.0, psi=1.0)
    inst = generate_network(e, 512, 4, wraparound=False)
    assert inst.m == 1
    real = ish_realize(inst)
    np.testing.assert_array_equal(real.N_I, e.N0)
    order = np.argsort(real.r_u)
    assert np.all(np.diff(real.rates[order]) <= 1e-9)
