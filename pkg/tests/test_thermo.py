import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liecat import thermo
from liecat.errors import (
    BadDimension,
    BoundaryConfiguration,
    DimensionMismatch,
    InvalidConfiguration,
    NonFinite,
)
from liecat.numerics import fd_jacobian

# hand-evaluated: -0.9 ln 0.9 - 0.1 ln 0.1
S_09 = -0.9 * math.log(0.9) - 0.1 * math.log(0.1)


def simplex_points(n):
    return st.lists(st.floats(0.01, 1.0), min_size=n + 1, max_size=n + 1).map(
        lambda w: np.asarray(w) / np.sum(w))


def test_entropy_examples():
    assert thermo.entropy([0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)
    assert thermo.entropy([1.0, 0.0]) == 0.0
    assert thermo.entropy([0.9, 0.1]) == pytest.approx(0.325083, abs=1e-6)
    assert thermo.entropy([0.9, 0.1]) == pytest.approx(S_09, abs=1e-15)


def test_configuration_validation():
    for bad in ([0.5, 0.6], [1.2, -0.2], [1.0], [np.nan, 1.0]):
        with pytest.raises(InvalidConfiguration):
            thermo.entropy(bad)


def test_delta_S_examples():
    assert thermo.delta_S([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert thermo.delta_S([0.5, 0.5], [0.9, 0.1]) == pytest.approx(0.368064, abs=1e-6)
    q, p = [0.2, 0.8], [0.6, 0.4]
    assert thermo.delta_S(q, p) == -thermo.delta_S(p, q)
    with pytest.raises(DimensionMismatch):
        thermo.delta_S([0.5, 0.5], [0.2, 0.3, 0.5])


def test_feasibility():
    assert thermo.is_feasible([0.5, 0.5], [0.9, 0.1])
    assert not thermo.is_feasible([0.9, 0.1], [0.5, 0.5])
    assert thermo.is_feasible([0.3, 0.7], [0.3, 0.7])
    assert thermo.is_feasible([0.9, 0.1], [0.5, 0.5], slack=1.0)


def test_microcanonical():
    assert np.allclose(thermo.microcanonical(2), [1 / 3] * 3)
    assert np.array_equal(thermo.microcanonical(1), [0.5, 0.5])
    assert thermo.entropy(thermo.microcanonical(3)) == pytest.approx(math.log(4), abs=1e-15)
    with pytest.raises(BadDimension):
        thermo.microcanonical(0)


def test_entropy_gradient_examples():
    assert np.all(thermo.entropy_gradient(thermo.microcanonical(4)) == 0)
    assert thermo.entropy_gradient([0.5, 0.5]) == pytest.approx([0.0])
    assert thermo.entropy_gradient([0.75, 0.25]) == pytest.approx([math.log(3)], abs=1e-15)
    with pytest.raises(BoundaryConfiguration):
        thermo.entropy_gradient([1.0, 0.0])


@given(simplex_points(3))
@settings(max_examples=100, deadline=None)
def test_entropy_gradient_matches_fd(p):
    fd = fd_jacobian(lambda c: thermo.entropy(thermo.from_chart(c)), thermo.to_chart(p))[0]
    assert np.allclose(thermo.entropy_gradient(p), fd, atol=1e-6)


@given(simplex_points(2), simplex_points(2), simplex_points(2))
@settings(max_examples=100, deadline=None)
def test_delta_S_functor(r, q, p):
    assert abs(thermo.delta_S(r, p) - (thermo.delta_S(r, q) + thermo.delta_S(q, p))) <= 1e-12


def test_entropy_maximum_at_uniform(rng):
    for n in (1, 2, 3, 5):
        top = thermo.entropy(thermo.microcanonical(n))
        for p in rng.dirichlet(np.ones(n + 1), size=500):
            assert thermo.entropy(p) < top


def test_is_valid_object():
    assert thermo.is_valid_object([0.5, 0.3, 0.2], 2)
    assert not thermo.is_valid_object(thermo.microcanonical(2), 2)
    assert not thermo.is_valid_object([1.0, 0.0, 0.0], 2)
    assert not thermo.is_valid_object([0.5, 0.5], 2)


def test_gibbs_examples():
    sol = thermo.gibbs_equilibrium(thermo.EnergyModel((0.0, 0.0), 3.0))
    assert np.allclose(sol.p_eq, [0.5, 0.5], atol=1e-15)
    sol = thermo.gibbs_equilibrium(thermo.EnergyModel((0.0, math.log(2)), 1.0))
    assert np.allclose(sol.p_eq, [2 / 3, 1 / 3], atol=1e-12, rtol=0)
    assert sol.Z == pytest.approx(1.5, rel=1e-12)
    assert sol.lambda1 == -1.0


def test_gibbs_partition_function_and_sum(rng):
    for _ in range(50):
        E = rng.uniform(-5, 5, size=rng.integers(2, 7))
        T, k = rng.uniform(0.2, 5), rng.uniform(0.5, 2)
        sol = thermo.gibbs_equilibrium(thermo.EnergyModel(tuple(E), T, k))
        assert abs(sol.p_eq.sum() - 1) <= 1e-12
        assert sol.Z == pytest.approx(np.exp(-E / (k * T)).sum(), rel=1e-12)
        assert sol.lambda1 == pytest.approx(-1 / (k * T))


def test_gibbs_shift_keeps_precision():
    # raw weights are subnormal here; the shifted ones are not
    sol = thermo.gibbs_equilibrium(thermo.EnergyModel((740.0, 741.0, 745.0), 1.0))
    w = np.exp(-np.array([0.0, 1.0, 5.0]))
    assert np.allclose(sol.p_eq, w / w.sum(), rtol=1e-14, atol=0)
    assert sol.Z > 0


def test_gibbs_unrepresentable_partition_function():
    with pytest.raises(NonFinite):
        thermo.gibbs_equilibrium(thermo.EnergyModel((-1000.0, -999.0), 1.0))


def test_gibbs_infinite_temperature_limit(rng):
    E = rng.uniform(0, 3, size=4)
    kT = 1e6 * np.ptp(E)
    sol = thermo.gibbs_equilibrium(thermo.EnergyModel(tuple(E), kT))
    assert np.max(np.abs(sol.p_eq - thermo.microcanonical(3))) <= 1e-6


def test_gibbs_monotone_temperature_limit(rng):
    E = tuple(rng.uniform(0, 3, size=3))
    dists = [np.max(np.abs(thermo.gibbs_equilibrium(thermo.EnergyModel(E, T)).p_eq - thermo.microcanonical(2)))
             for T in np.geomspace(0.1, 1e4, 25)]
    assert all(a > b for a, b in zip(dists, dists[1:]))


def test_gibbs_projected_gradient_vanishes(rng):
    for _ in range(50):
        n = rng.integers(1, 6)
        E = rng.uniform(0, 3, size=n + 1)
        p = thermo.gibbs_equilibrium(thermo.EnergyModel(tuple(E), rng.uniform(0.5, 3))).p_eq
        grad = thermo.entropy_gradient(p)
        a = E[1:] - E[0]
        proj = grad - a * (a @ grad) / (a @ a)
        assert np.linalg.norm(proj) <= 1e-8


def test_bruteforce_oracle_examples():
    model = thermo.EnergyModel((0.0, math.log(2)), 1.0)
    assert np.max(np.abs(thermo.gibbs_bruteforce_oracle(model) - [2 / 3, 1 / 3])) <= 1e-4
    flat = thermo.EnergyModel((1.0, 1.0, 1.0), 2.0)
    assert np.max(np.abs(thermo.gibbs_bruteforce_oracle(flat) - thermo.microcanonical(2))) <= 1e-4
    with pytest.raises(BadDimension):
        thermo.gibbs_bruteforce_oracle(thermo.EnergyModel((0, 1, 2, 3, 4), 1.0))


def test_bruteforce_oracle_n1_exact(rng):
    for _ in range(5):
        model = thermo.EnergyModel(tuple(rng.uniform(0, 3, size=2)), rng.uniform(0.5, 2))
        assert np.allclose(thermo.gibbs_bruteforce_oracle(model), thermo.gibbs_equilibrium(model).p_eq, atol=1e-9)


def test_can_reach():
    target = thermo.gibbs_equilibrium(thermo.EnergyModel((0.0, math.log(2)), 1.0)).p_eq
    assert thermo.can_reach(target, [0.9, 0.1])
    assert thermo.can_reach(target, target)
    assert not thermo.can_reach([0.95, 0.05], [0.7, 0.3])
    with pytest.raises(InvalidConfiguration):
        thermo.can_reach([0.5, 0.5], [0.9, 0.1])
