import math

import numpy as np
import pytest
from scipy import stats

from conftest import P0, P1, random_scenario, tilted_scenario
from weakctx.hilbert import State, expectation
from weakctx.montecarlo import (
    SampleBatch,
    estimate_p_minus,
    estimate_p_minus_conditional,
    estimate_pass_rate,
    sample,
)
from weakctx.pointer import Scenario, disturbance, p_minus

N = 10**6


def within(est, target, k=4.0):
    return abs(est.value - target) <= k * est.std_error


class TestSampler:
    def test_reproducible(self, zw2):
        a = sample(zw2, 5000, seed=7)
        b = sample(zw2, 5000, seed=7)
        assert a.x.tobytes() == b.x.tobytes()
        assert a.passed.tobytes() == b.passed.tobytes()
        assert sample(zw2, 5000, seed=8).x.tobytes() != a.x.tobytes()

    def test_sharded_reproducible(self, zw2):
        a = sample(zw2, 10001, seed=7, shards=4)
        b = sample(zw2, 10001, seed=7, shards=4)
        assert a.n == 10001
        assert a.x.tobytes() == b.x.tobytes()

    def test_shifted_eigenstate(self):
        e1 = State.basis(2, 1)
        s = Scenario(e1, e1, P1, 3.0)
        b = sample(s, 200_000, seed=1)
        se = (3.0 / math.sqrt(2)) / math.sqrt(b.n)
        assert abs(b.x.mean() - 1.0) < 4 * se
        # variance sigma^2 / 2, not sigma^2
        assert b.x.var() == pytest.approx(4.5, rel=0.02)

    def test_weak_limit_pass_rate(self, rng):
        psi = State(np.array([1.0, 1j, 0.5]) / 1.5)
        s = Scenario(psi, psi, np.diag([1.0, 0.0, 0.0]), 50.0)
        pm = disturbance(s)
        expected = 1 - pm.p_d + pm.p_d * expectation(pm.E_d, psi).real
        est = estimate_pass_rate(sample(s, 200_000, seed=2))
        assert expected > 0.999
        assert within(est, expected)

    def test_marginal_ks(self, zw2):
        b = sample(zw2, N, seed=11)
        w1 = expectation(zw2.pi, zw2.psi).real
        scale = zw2.sigma / math.sqrt(2)
        cdf = lambda x: w1 * stats.norm.cdf(x, loc=1.0, scale=scale) + (1 - w1) * stats.norm.cdf(x, scale=scale)
        d = stats.kstest(b.x, cdf).statistic
        # 1% level; a documented ~1-in-100 false failure for a fresh seed
        assert d < 1.63 / math.sqrt(N)

    def test_csv(self, zw2):
        text = sample(zw2, 3, seed=1).to_csv()
        lines = text.strip().split("\n")
        assert lines[0] == "x,passed"
        assert len(lines) == 4
        assert all(line.split(",")[1] in ("0", "1") for line in lines[1:])


class TestEstimators:
    def test_no_passes(self, zw2):
        b = SampleBatch(seed=0, x=np.array([-1.0, -2.0, 3.0]), passed=np.zeros(3, dtype=bool))
        est = estimate_p_minus(b, zw2)
        assert est.value == 0.0 and est.std_error > 0

    def test_std_error_formula(self, zw2):
        b = SampleBatch(seed=0, x=np.array([-1.0, -1.0, 1.0, 1.0]), passed=np.array([True, False, True, False]))
        est = estimate_p_minus(b, zw2)
        assert est.value == pytest.approx(0.25 / 0.25)
        assert est.std_error == pytest.approx(math.sqrt(0.25 * 0.75 / 4) / 0.25)

    def test_zw2_sigma10(self, zw2):
        b = sample(zw2, N, seed=2014)
        pm = p_minus(zw2)
        assert within(estimate_p_minus(b, zw2), pm.exact)
        assert within(estimate_p_minus_conditional(b), pm.conditional)
        assert within(estimate_pass_rate(b), disturbance(zw2).postselection_rate())

    def test_scenario_suite(self, rng):
        scenarios = [tilted_scenario(0.5, 2.0), tilted_scenario(0.2, 30.0), Scenario(State.basis(2, 0), State.basis(2, 0), P0, 1.0)]
        scenarios += [random_scenario(rng) for _ in range(4)]
        for k, s in enumerate(scenarios):
            b = sample(s, 300_000, seed=100 + k)
            assert within(estimate_p_minus(b, s), p_minus(s).exact)
            assert within(estimate_pass_rate(b), disturbance(s).postselection_rate())
