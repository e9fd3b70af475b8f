"""Event-level simulation of the pre-selected, weakly measured, post-selected system.

Each run yields a pointer reading x and a pass/fail post-selection flag.
x is drawn from <psi|E_x|psi>, a two-component mixture of Gaussians with
variance sigma^2/2 (not sigma^2) centred at 1 and 0 with weights
<psi|pi|psi> and <psi|I-pi|psi>.  The run then passes with probability
|<phi|M_x|psi>|^2 / <psi|E_x|psi>.

Random numbers come from numpy's PCG64 generator (period 2^128).  Shard k
of a batch seeded with ``seed`` is driven by ``SeedSequence([seed, k])``;
Gaussians use numpy's ziggurat sampler.  Shards are concatenated in
index order, so a batch depends only on (scenario, n, seed, shards).
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .hilbert import expectation
from .pointer import Scenario, kraus_coefficients

DEFAULT_SEED = 20141112


@dataclass(frozen=True, eq=False)
class SampleBatch:
    seed: int
    x: np.ndarray
    passed: np.ndarray

    @property
    def n(self) -> int:
        return self.x.size

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,passed\n")
        for xv, pv in zip(self.x.tolist(), self.passed.tolist()):
            buf.write(f"{xv!r},{int(pv)}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n_effective: int

    def as_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error, "n_effective": self.n_effective}


def _shard(s: Scenario, n: int, seed: int, index: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))
    w_shift = min(max(expectation(s.pi, s.psi).real, 0.0), 1.0)
    shifted = rng.random(n) < w_shift
    x = rng.standard_normal(n) * (s.sigma / math.sqrt(2.0)) + shifted
    a, b = kraus_coefficients(s.sigma, x)
    phi_pi_psi = complex(np.vdot(s.phi.amplitudes, s.pi.matrix @ s.psi.amplitudes))
    phi_rest_psi = complex(np.vdot(s.phi.amplitudes, s.psi.amplitudes)) - phi_pi_psi
    joint = np.abs(a * phi_pi_psi + b * phi_rest_psi) ** 2
    marginal = a * a * w_shift + b * b * (1.0 - w_shift)
    with np.errstate(divide="ignore", invalid="ignore"):
        p_pass = np.where(marginal > 0, joint / marginal, 0.0)
    passed = rng.random(n) < p_pass
    return x, passed


def sample(s: Scenario, n: int, seed: int = DEFAULT_SEED, shards: int = 1) -> SampleBatch:
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    if shards < 1:
        raise ValueError(f"need at least one shard, got {shards}")
    sizes = [n // shards + (1 if k < n % shards else 0) for k in range(shards)]
    parts = [_shard(s, m, seed, k) for k, m in enumerate(sizes) if m]
    return SampleBatch(
        seed=seed,
        x=np.concatenate([p[0] for p in parts]),
        passed=np.concatenate([p[1] for p in parts]),
    )


def _binomial(k: int, n: int, scale: float = 1.0) -> Estimate:
    if n == 0:
        return Estimate(math.nan, math.nan, 0)
    q = k / n
    se = math.sqrt(q * (1.0 - q) / n) if n > 1 else math.inf
    if n > 1 and se == 0.0:
        # k = 0 or k = n: use the rule-of-three style floor so the error stays positive
        se = 1.0 / n
    return Estimate(q / scale, se / scale, n)


def estimate_p_minus(batch: SampleBatch, s: Scenario) -> Estimate:
    """#(x < 0 and passed) / n / p_phi, with the exact p_phi."""
    k = int(np.count_nonzero((batch.x < 0) & batch.passed))
    return _binomial(k, batch.n, s.p_phi)


def estimate_p_minus_conditional(batch: SampleBatch) -> Estimate:
    """#(x < 0 and passed) / #(passed)."""
    m = int(np.count_nonzero(batch.passed))
    k = int(np.count_nonzero((batch.x < 0) & batch.passed))
    return _binomial(k, m)


def estimate_pass_rate(batch: SampleBatch) -> Estimate:
    return _binomial(int(np.count_nonzero(batch.passed)), batch.n)
