"""Condition checking and the noncontextual bound on p_minus.

``check_conditions`` evaluates the four hypotheses that together rule out a
measurement-noncontextual, outcome-deterministic model of a pre- and
post-selected Gaussian-pointer measurement.  ``nc_bound_lp`` computes the
largest p_minus any such model can produce on a discretized pointer axis,
by linear programming over four deterministic ontic classes.

LP layout
---------
Classes c = (pi_bit, phi_bit) record the deterministic responses to the two
sharp measurements {pi, I - pi} and {|phi><phi|, I - |phi><phi|}.  With
class weights w_c and joint masses t_c[b] = w_c * s_c[b] (s_c[b] being the
class response to "pointer in bin b and post-selection passes"):

    t_c[b]        <= w_c * (n1[b] if pi_bit else n0[b])
    sum_b t_c[b]  <= w_c * ((1 - p_d) * phi_bit + p_d)
    sum_c w_c      = 1
    sum_{phi_bit=1} w_c = p_phi
    maximize  (1 / p_phi) * sum_c sum_{b < 0} t_c[b]

The first row says the post-selected response never exceeds the response
to the pointer effect alone, which is fixed by the projector-plus-noise
form of the POVM.  The second caps the total post-selected response using
the disturbance decomposition of S, with the response to E_d relaxed to 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError
from .hilbert import Operator, State, max_norm
from .pointer import (
    TAIL_SIGMAS,
    Scenario,
    disturbance,
    kraus_batch,
    noise_density,
    p_minus,
)
from .simplex import linprog_max
from .special import gauss_cdf

RESIDUAL_TOL = 1e-10
BOUND_TOL = 1e-9
ONTIC_CLASSES = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class ConditionReport:
    p_phi: float
    p_d: float
    p_minus: float
    threshold: float
    margins: tuple[float, float, float, float]
    p_minus_conditional: float = math.nan

    @property
    def all_hold(self) -> bool:
        return all(m > 0 for m in self.margins)

    @property
    def holds(self) -> tuple[bool, bool, bool, bool]:
        return tuple(m > 0 for m in self.margins)

    def as_dict(self) -> dict:
        return {
            "p_phi": self.p_phi,
            "p_d": self.p_d,
            "p_minus": self.p_minus,
            "p_minus_conditional": self.p_minus_conditional,
            "threshold": self.threshold,
            "margins": list(self.margins),
            "holds": list(self.holds),
            "all_hold": self.all_hold,
        }


def noise_residual(s: Scenario, n_points: int = 65, span: float = 6.0) -> float:
    """How far the POVM is from "projector plus unbiased noise".

    Max-norm gap between M_x^dag M_x and p_n(x-1) pi + p_n(x)(I - pi) over a
    grid of pointer readings, together with the gap between the noise
    median and zero.
    """
    x = np.linspace(-span * s.sigma, 1.0 + span * s.sigma, n_points)
    m = kraus_batch(s, x)
    e = np.conj(np.transpose(m, (0, 2, 1))) @ m
    model = (
        noise_density(x - 1.0, s.sigma)[:, None, None] * s.pi.matrix
        + noise_density(x, s.sigma)[:, None, None] * s.pi_tilde.matrix
    )
    median_gap = abs(gauss_cdf(0.0, 0.0, s.sigma) - 0.5)
    return max(max_norm(e - model), median_gap)


def disturbance_residual(s: Scenario) -> float:
    """Decomposition error of S plus the idempotence error of E_d."""
    pm = disturbance(s)
    e = pm.E_d.matrix
    return max(pm.decomposition_residual(), max_norm(e @ e - e))


def check_conditions(s: Scenario, tol: float = RESIDUAL_TOL) -> ConditionReport:
    """Margins of the four conditions; a condition holds when its margin is positive.

    Conditions 2 and 3 are identities, so their margins are ``tol`` minus
    the reconstruction residual.
    """
    pm = disturbance(s)
    pmin = p_minus(s)
    threshold = 0.5 + pm.p_d / s.p_phi
    margins = (
        s.p_phi,
        tol - noise_residual(s),
        tol - disturbance_residual(s),
        pmin.exact - threshold,
    )
    return ConditionReport(
        p_phi=s.p_phi,
        p_d=pm.p_d,
        p_minus=pmin.exact,
        threshold=threshold,
        margins=margins,
        p_minus_conditional=pmin.conditional,
    )


@dataclass(frozen=True)
class ScanResult:
    rows: tuple[tuple[float, ConditionReport], ...]

    @property
    def sigmas(self) -> list[float]:
        return [s for s, _ in self.rows]

    @property
    def sigma_threshold(self) -> Optional[float]:
        """Smallest grid sigma at which every condition holds."""
        return next((s for s, r in self.rows if r.all_hold), None)

    def to_csv(self) -> str:
        lines = ["sigma,p_minus,p_d,threshold,margin,all_hold"]
        for s, r in self.rows:
            lines.append(f"{s!r},{r.p_minus!r},{r.p_d!r},{r.threshold!r},{r.margins[3]!r},{str(r.all_hold).lower()}")
        return "\n".join(lines) + "\n"


def sigma_scan(
    psi: State, phi: State, pi: Operator, sigma_grid: Sequence[float], tol: float = RESIDUAL_TOL
) -> ScanResult:
    grid = [float(v) for v in sigma_grid]
    if not grid:
        raise ValidationError("sigma grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("sigma grid must be strictly increasing")
    base = Scenario(psi, phi, pi, grid[0])
    return ScanResult(tuple((sg, check_conditions(base.with_sigma(sg), tol)) for sg in grid))


@dataclass(frozen=True, eq=False)
class NCBoundProblem:
    """Discretized pointer axis and the operational data the LP needs.

    ``n0[b]`` and ``n1[b]`` are the masses of p_n(x) and p_n(x - 1) in bin
    b; one bin edge sits exactly at x = 0.
    """

    edges: np.ndarray
    n0: np.ndarray
    n1: np.ndarray
    p_phi: float
    p_d: float
    classes: tuple[tuple[int, int], ...] = ONTIC_CLASSES
    p_minus: Optional[float] = None
    negative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        n0 = np.asarray(self.n0, dtype=float)
        n1 = np.asarray(self.n1, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValidationError("bin edges must be strictly increasing")
        if not np.any(edges == 0.0):
            raise ValidationError("bin edges must include 0 exactly")
        if n0.shape != (edges.size - 1,) or n1.shape != n0.shape:
            raise ValidationError("noise masses must have one entry per bin")
        if np.any(n0 < 0) or np.any(n1 < 0):
            raise ValidationError("noise masses must be nonnegative")
        if not (0 < self.p_phi <= 1) or not (0 <= self.p_d <= 1):
            raise ValidationError("p_phi must lie in (0, 1] and p_d in [0, 1]")
        if not self.classes or any(c not in ONTIC_CLASSES for c in self.classes):
            raise ValidationError(f"ontic classes must be drawn from {ONTIC_CLASSES}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "n0", n0)
        object.__setattr__(self, "n1", n1)
        object.__setattr__(self, "negative", edges[1:] <= 0.0)

    @property
    def n_bins(self) -> int:
        return self.n0.size

    @property
    def analytic_bound(self) -> float:
        return 0.5 + self.p_d / self.p_phi

    def noise_for(self, cls: tuple[int, int]) -> np.ndarray:
        return self.n1 if cls[0] else self.n0

    def cap_for(self, cls: tuple[int, int]) -> float:
        return (1.0 - self.p_d) * cls[1] + self.p_d


def bin_edges(sigma: float, n_bins: int, tail_sigmas: float = TAIL_SIGMAS) -> np.ndarray:
    """Edges over [-tail*sigma, 1 + tail*sigma], split at 0 in proportion to length."""
    lo, hi = -tail_sigmas * sigma, 1.0 + tail_sigmas * sigma
    n_neg = min(max(1, round(n_bins * (-lo) / (hi - lo))), n_bins - 1)
    neg = np.linspace(lo, 0.0, n_neg + 1)
    pos = np.linspace(0.0, hi, n_bins - n_neg + 1)
    neg[-1] = 0.0
    return np.concatenate([neg, pos[1:]])


def build_nc_problem(s: Scenario, n_bins: int, tail_sigmas: float = TAIL_SIGMAS) -> NCBoundProblem:
    if n_bins < 4:
        raise ValidationError(f"need at least 4 bins, got {n_bins}")
    edges = bin_edges(s.sigma, n_bins, tail_sigmas)
    cdf0 = np.array([gauss_cdf(e, 0.0, s.sigma) for e in edges])
    cdf1 = np.array([gauss_cdf(e, 1.0, s.sigma) for e in edges])
    # the truncated tails are folded into the outermost bins
    cdf0[0] = cdf1[0] = 0.0
    cdf0[-1] = cdf1[-1] = 1.0
    return NCBoundProblem(
        edges=edges,
        n0=np.diff(cdf0),
        n1=np.diff(cdf1),
        p_phi=s.p_phi,
        p_d=disturbance(s).p_d,
        p_minus=p_minus(s).exact,
    )


@dataclass(frozen=True, eq=False)
class NCBoundResult:
    """LP optimum with the class weights and per-bin responses that attain it."""

    lp_optimum: float
    analytic_bound: float
    p_minus: Optional[float]
    weights: np.ndarray
    responses: np.ndarray
    classes: tuple[tuple[int, int], ...]
    iterations: int = 0

    @property
    def sound(self) -> bool:
        return self.lp_optimum <= self.analytic_bound + BOUND_TOL

    @property
    def gap_to_quantum(self) -> Optional[float]:
        return None if self.p_minus is None else self.p_minus - self.lp_optimum

    def certificate(self) -> dict:
        return {
            "classes": [list(c) for c in self.classes],
            "weights": self.weights.tolist(),
            "responses": self.responses.tolist(),
        }


def _lp_arrays(problem: NCBoundProblem):
    k, nb = len(problem.classes), problem.n_bins
    nv = k + k * nb

    def t(c, b):
        return k + c * nb + b

    rows_ub = []
    for c, cls in enumerate(problem.classes):
        noise = problem.noise_for(cls)
        block = np.zeros((nb, nv))
        block[np.arange(nb), k + c * nb + np.arange(nb)] = 1.0
        block[:, c] = -noise
        rows_ub.append(block)
    caps = np.zeros((k, nv))
    for c, cls in enumerate(problem.classes):
        caps[c, t(c, 0) : t(c, 0) + nb] = 1.0
        caps[c, c] = -problem.cap_for(cls)
    A_ub = np.vstack(rows_ub + [caps])
    b_ub = np.zeros(A_ub.shape[0])
    A_eq = np.zeros((2, nv))
    A_eq[0, :k] = 1.0
    A_eq[1, :k] = [float(cls[1]) for cls in problem.classes]
    b_eq = np.array([1.0, problem.p_phi])
    obj = np.zeros(nv)
    for c in range(k):
        obj[t(c, 0) : t(c, 0) + nb] = problem.negative / problem.p_phi
    return obj, A_ub, b_ub, A_eq, b_eq


def _responses(problem: NCBoundProblem, w: np.ndarray, joint: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(w[:, None] > 0, joint / w[:, None], 0.0)
    # clip rounding noise back into [0, p(E_b | c)]
    upper = np.array([problem.noise_for(cls) for cls in problem.classes])
    return np.clip(s, 0.0, upper)


def nc_bound_lp(problem: NCBoundProblem) -> NCBoundResult:
    """Maximal p_minus over noncontextual, outcome-deterministic models."""
    obj, A_ub, b_ub, A_eq, b_eq = _lp_arrays(problem)
    res = linprog_max(obj, A_ub, b_ub, A_eq, b_eq)
    k = len(problem.classes)
    w = np.clip(res.x[:k], 0.0, None)
    joint = res.x[k:].reshape(k, problem.n_bins)
    return NCBoundResult(
        lp_optimum=res.objective,
        analytic_bound=problem.analytic_bound,
        p_minus=problem.p_minus,
        weights=w,
        responses=_responses(problem, w, joint),
        classes=problem.classes,
        iterations=res.iterations,
    )


def model_objective(problem: NCBoundProblem, weights, responses) -> float:
    """p_minus produced by a given noncontextual model."""
    w = np.asarray(weights, dtype=float)
    s = np.asarray(responses, dtype=float)
    return float(np.sum(w[:, None] * s[:, problem.negative]) / problem.p_phi)


def model_violations(problem: NCBoundProblem, weights, responses) -> float:
    """Largest constraint violation of a model (0 for a feasible one)."""
    w = np.asarray(weights, dtype=float)
    s = np.asarray(responses, dtype=float)
    worst = [max(0.0, -float(w.min())), abs(w.sum() - 1.0)]
    worst.append(abs(sum(wc for wc, cls in zip(w, problem.classes) if cls[1]) - problem.p_phi))
    for c, cls in enumerate(problem.classes):
        worst.append(max(0.0, -float(s[c].min())))
        worst.append(max(0.0, float(np.max(s[c] - problem.noise_for(cls)))))
        worst.append(max(0.0, float(s[c].sum()) - problem.cap_for(cls)))
    return max(worst)


def optimal_model(problem: NCBoundProblem) -> tuple[np.ndarray, np.ndarray]:
    """An explicit optimal noncontextual model, built by hand.

    All post-selected weight p_phi goes to the class (pi=0, phi=1) and the
    rest to (pi=0, phi=0).  The first answers every negative bin with the
    full unshifted noise mass (half the total by the median condition);
    the second spreads its disturbance budget min(p_d, 1/2) over the
    negative bins in proportion to that mass.
    """
    classes = problem.classes
    try:
        c_pass = classes.index((0, 1))
        c_fail = classes.index((0, 0))
    except ValueError as exc:
        raise ValidationError("optimal_model needs the classes (0, 1) and (0, 0)") from exc
    w = np.zeros(len(classes))
    s = np.zeros((len(classes), problem.n_bins))
    w[c_pass] = problem.p_phi
    w[c_fail] = 1.0 - problem.p_phi
    neg_mass = problem.n0 * problem.negative
    s[c_pass] = neg_mass
    total = neg_mass.sum()
    if total > 0:
        s[c_fail] = neg_mass * min(1.0, problem.p_d / total)
    return w, s


def model_bound(p_phi: float, p_d: float) -> float:
    """Closed-form optimum of the LP: 1/2 + (1 - p_phi) min(p_d, 1/2) / p_phi."""
    return 0.5 + (1.0 - p_phi) * min(p_d, 0.5) / p_phi
