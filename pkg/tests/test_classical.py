from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epsilon_lab.errors import ResourceCapError
from epsilon_lab.measures.classical import (
    block_entropies,
    crypticity,
    entropy_rate,
    entropy_rate_estimates,
    excess_entropy,
    markov_order,
    statistical_complexity,
)
from epsilon_lab.processes import (
    biased_coins,
    golden_mean,
    iid,
    nemo,
    period_cycle,
    random_machine,
    rk_golden_mean,
)


def binary_entropy(p: float) -> float:
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.666, 0.9])
def test_biased_coins_measures(p):
    m = biased_coins(p)
    assert statistical_complexity(m) == pytest.approx(1.0, abs=1e-12)
    assert entropy_rate(m) == pytest.approx(binary_entropy(p), abs=1e-12)
    ee = excess_entropy(m)
    assert ee.status == "converged"
    assert ee.value == pytest.approx(1.0 - binary_entropy(p), abs=1e-12)
    assert crypticity(m) == pytest.approx(binary_entropy(p), abs=1e-12)


def test_golden_mean_measures():
    m = golden_mean(0.5)
    assert statistical_complexity(m) == pytest.approx(binary_entropy(2 / 3), abs=1e-12)
    assert entropy_rate(m) == pytest.approx(2 / 3, abs=1e-12)
    assert markov_order(m) == 1


def test_iid_has_no_structure():
    m = iid([0.5, 0.5])
    assert statistical_complexity(m) == 0.0
    assert entropy_rate(m) == pytest.approx(1.0)
    assert markov_order(m) == 0
    assert excess_entropy(m).value == pytest.approx(0.0, abs=1e-12)
    assert block_entropies(m, 5) == pytest.approx([0, 1, 2, 3, 4, 5])


def test_period_cycle_excess_entropy():
    m = period_cycle(4)
    assert entropy_rate(m) == 0.0
    assert markov_order(m) == 3
    assert excess_entropy(m).value == pytest.approx(2.0, abs=1e-12)


def test_markov_orders_of_examples():
    assert markov_order(biased_coins(0.666)) == 1
    assert markov_order(rk_golden_mean(4, 3, 0.505)) == 4
    assert math.isinf(markov_order(nemo(0.666)))


def test_markov_order_budget_reports_unknown():
    assert markov_order(rk_golden_mean(4, 3, 0.505), budget=1) is None


@pytest.mark.parametrize("R,k", [(R, k) for R in range(1, 7) for k in range(1, R + 1)])
def test_rk_golden_mean_markov_order(R, k):
    for p in (0.1, 0.5, 0.9):
        assert markov_order(rk_golden_mean(R, k, p)) == R


def test_golden_mean_excess_entropy_is_exact_at_markov_order(gm43):
    ee = excess_entropy(gm43)
    assert ee.status == "converged"
    assert ee.horizon == 4
    H = block_entropies(gm43, 8)
    h = entropy_rate(gm43)
    for L in range(4, 9):
        assert H[L] - L * h == pytest.approx(ee.value, abs=1e-10)


def test_nemo_excess_entropy_is_a_lower_bound(nemo666):
    ee = excess_entropy(nemo666, max_L=10)
    assert ee.status in ("converged", "truncated")
    assert 0.0 <= ee.value <= statistical_complexity(nemo666)
    deeper = excess_entropy(nemo666, max_L=14)
    assert deeper.value >= ee.value - 1e-12


def test_excess_entropy_horizon_cap(nemo666):
    with pytest.raises(ResourceCapError):
        excess_entropy(nemo666, max_L=20, cap=16)


def test_block_entropy_cap(gm43):
    with pytest.raises(ResourceCapError):
        block_entropies(gm43, 17)


@given(n=st.integers(1, 6), seed=st.integers(0, 10_000))
def test_entropy_rate_estimates_decrease_to_rate(n, seed):
    m = random_machine(n, 2, seed=seed)
    est = entropy_rate_estimates(m, 8)
    h = entropy_rate(m)
    assert all(b <= a + 1e-12 for a, b in zip(est, est[1:]))
    assert all(e >= h - 1e-12 for e in est)


@given(n=st.integers(1, 6), seed=st.integers(0, 10_000))
def test_excess_entropy_bounded_by_statistical_complexity(n, seed):
    m = random_machine(n, 2, seed=seed)
    ee = excess_entropy(m, max_L=10)
    assert -1e-12 <= ee.value <= statistical_complexity(m) + 1e-9


def test_block_entropies_are_concave(gm43):
    H = np.array(block_entropies(gm43, 10))
    assert np.all(np.diff(H, 2) <= 1e-12)
