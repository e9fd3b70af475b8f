"""Gaussian-pointer measurement of a projector.

A probe prepared in a Gaussian of width ``sigma`` is shifted by one unit of
length when the system is found in the range of ``pi``, then read out in
position.  On the system this is the Kraus family

    M_x = N exp(-(x-1)^2 / 2 sigma^2) pi + N exp(-x^2 / 2 sigma^2) (I - pi),
    N = (pi sigma^2)^(-1/4),

and every quantity below (POVM elements, the averaged post-selection effect
S, the negative-reading probability p_minus) has a closed form in terms of
``erf``.  Each closed form is paired with a direct quadrature of its
defining integral so the two can be checked against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .hilbert import (
    Operator,
    OperatorLike,
    State,
    StateLike,
    as_matrix,
    expectation,
    inner,
    max_norm,
    validate_projector,
)
from .quadrature import DEFAULT_TOL, adaptive_simpson
from .special import erfc
from .weakvalues import ORTHOGONALITY_TOL, weak_value

TAIL_SIGMAS = 12.0
SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Pre-selection ``psi``, post-selection ``phi``, measured projector ``pi``, pointer width ``sigma``."""

    psi: State
    phi: State
    pi: Operator
    sigma: float
    p_phi: float = field(init=False)

    def __post_init__(self):
        psi = self.psi if isinstance(self.psi, State) else State(self.psi)
        phi = self.phi if isinstance(self.phi, State) else State(self.phi)
        if psi.dim != phi.dim:
            raise ValidationError(f"psi has dimension {psi.dim} but phi has {phi.dim}")
        pi = self.pi if isinstance(self.pi, Operator) else Operator(self.pi)
        if pi.dim != psi.dim:
            raise ValidationError(f"projector is {pi.dim}x{pi.dim} but states have dimension {psi.dim}")
        if not validate_projector(pi):
            raise ValidationError("pi is not a projector")
        sigma = float(self.sigma)
        if not (sigma > 0 and math.isfinite(sigma)):
            raise ValidationError(f"sigma must be positive and finite, got {self.sigma!r}")
        p_phi = abs(inner(phi, psi)) ** 2
        if p_phi <= ORTHOGONALITY_TOL:
            raise ValidationError(f"pre- and post-selection are orthogonal (p_phi = {p_phi:.3g})")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "pi", Operator(pi.matrix, hermitian=True))
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "p_phi", p_phi)

    @property
    def dim(self) -> int:
        return self.psi.dim

    @property
    def pi_tilde(self) -> Operator:
        return Operator(np.eye(self.dim) - self.pi.matrix, hermitian=True)

    @property
    def pi_w(self) -> complex:
        return weak_value(self.pi, self.psi, self.phi).value

    @property
    def pi_tilde_w(self) -> complex:
        return weak_value(self.pi_tilde, self.psi, self.phi).value

    def with_sigma(self, sigma: float) -> "Scenario":
        return Scenario(self.psi, self.phi, self.pi, sigma)


def norm_sq(sigma: float) -> float:
    """N^2 = (pi sigma^2)^(-1/2)."""
    return 1.0 / (SQRT_PI * sigma)


def noise_density(x, sigma: float):
    """p_n(x) = N^2 exp(-x^2 / sigma^2); a centred Gaussian of variance sigma^2/2."""
    x = np.asarray(x, dtype=float)
    return norm_sq(sigma) * np.exp(-(x * x) / (sigma * sigma))


def kraus_coefficients(sigma: float, x):
    """Coefficients of ``pi`` and ``I - pi`` in M_x."""
    x = np.asarray(x, dtype=float)
    n = norm_sq(sigma) ** 0.5
    s2 = 2.0 * sigma * sigma
    return n * np.exp(-((x - 1.0) ** 2) / s2), n * np.exp(-(x * x) / s2)


def kraus_batch(s: Scenario, x) -> np.ndarray:
    """M_x for every entry of ``x``, stacked along the first axis."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a, b = kraus_coefficients(s.sigma, x)
    return a[:, None, None] * s.pi.matrix + b[:, None, None] * s.pi_tilde.matrix


def kraus(s: Scenario, x: float) -> Operator:
    return Operator(kraus_batch(s, x)[0], hermitian=True)


def povm_element(s: Scenario, x: float) -> Operator:
    """E_x = p_n(x-1) pi + p_n(x) (I - pi)."""
    e = noise_density(x - 1.0, s.sigma) * s.pi.matrix + noise_density(x, s.sigma) * s.pi_tilde.matrix
    return Operator(e, hermitian=True)


def overlap_coefficient(sigma: float) -> float:
    """Delta = integral of sqrt(p_n(x-1) p_n(x)) = exp(-1 / 4 sigma^2)."""
    return math.exp(-1.0 / (4.0 * sigma * sigma))


@dataclass(frozen=True, eq=False)
class PointerMeasurement:
    """Closed-form disturbance data for a scenario.

    ``S`` is the averaged post-selection effect, built term by term, and
    ``decomposition()`` rebuilds it as (1 - p_d)|phi><phi| + p_d E_d.
    """

    scenario: Scenario
    delta: float
    p_d: float
    E_d: Operator
    S: Operator
    norm_sq: float

    def decomposition(self) -> np.ndarray:
        return (1.0 - self.p_d) * self.scenario.phi.projector().matrix + self.p_d * self.E_d.matrix

    def decomposition_residual(self) -> float:
        return max_norm(self.S.matrix - self.decomposition())

    def postselection_rate(self) -> float:
        """<psi|S|psi> = (1 - p_d) p_phi + p_d <psi|E_d|psi>."""
        s = self.scenario
        return (1.0 - self.p_d) * s.p_phi + self.p_d * expectation(self.E_d, s.psi).real


def disturbance(s: Scenario) -> PointerMeasurement:
    delta = overlap_coefficient(s.sigma)
    pi, pit = s.pi.matrix, s.pi_tilde.matrix
    proj_phi = s.phi.projector().matrix
    S = pi @ proj_phi @ pi + pit @ proj_phi @ pit + delta * (pi @ proj_phi @ pit + pit @ proj_phi @ pi)
    reflection = pi - pit
    E_d = reflection @ proj_phi @ reflection
    return PointerMeasurement(
        scenario=s,
        delta=delta,
        # (1 - Delta)/2 loses all digits once Delta ~ 1
        p_d=-0.5 * math.expm1(-1.0 / (4.0 * s.sigma * s.sigma)),
        E_d=Operator(0.5 * (E_d + E_d.conj().T), hermitian=True),
        S=Operator(0.5 * (S + S.conj().T), hermitian=True),
        norm_sq=norm_sq(s.sigma),
    )


@dataclass(frozen=True)
class ABCIntegrals:
    A: float
    B: float
    C: float


def abc(sigma: float) -> ABCIntegrals:
    """Half-line integrals of the shifted, unshifted and geometric-mean noise densities.

    A = int_{-inf}^0 p_n(x-1) dx = erfc(1/sigma)/2
    B = int_{-inf}^0 p_n(x) dx = 1/2
    C = int_{-inf}^0 sqrt(p_n(x-1) p_n(x)) dx = exp(-1/4sigma^2) erfc(1/2sigma)/2
    """
    sigma = float(sigma)
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValidationError(f"sigma must be positive and finite, got {sigma!r}")
    return ABCIntegrals(
        A=0.5 * erfc(1.0 / sigma),
        B=0.5,
        C=0.5 * overlap_coefficient(sigma) * erfc(1.0 / (2.0 * sigma)),
    )


def abc_quadrature(sigma: float, tol: float = DEFAULT_TOL, tail_sigmas: float = TAIL_SIGMAS) -> ABCIntegrals:
    def integrand(x):
        return np.stack(
            [
                noise_density(x - 1.0, sigma),
                noise_density(x, sigma),
                np.sqrt(noise_density(x - 1.0, sigma) * noise_density(x, sigma)),
            ],
            axis=1,
        )

    r = adaptive_simpson(integrand, -tail_sigmas * sigma, 0.0, tol=tol)
    return ABCIntegrals(*(float(v) for v in r.value))


@dataclass(frozen=True)
class PMinus:
    """Negative-reading statistics under pre- and post-selection.

    ``exact`` divides by p_phi (the quantity the classical bound is about),
    ``conditional`` divides by the actual post-selection rate <psi|S|psi>,
    and ``asymptotic`` is the first-order large-sigma expansion.
    """

    exact: float
    conditional: float
    asymptotic: float

    @property
    def outside_unit_interval(self) -> bool:
        return not (0.0 <= self.exact <= 1.0)


def p_minus(s: Scenario) -> PMinus:
    ints = abc(s.sigma)
    pw, ptw = s.pi_w, s.pi_tilde_w
    exact = ints.A * abs(pw) ** 2 + ints.B * abs(ptw) ** 2 + 2.0 * ints.C * (pw * ptw.conjugate()).real
    rate = disturbance(s).postselection_rate()
    return PMinus(
        exact=exact,
        conditional=exact * s.p_phi / rate,
        asymptotic=0.5 - pw.real / (SQRT_PI * s.sigma),
    )


def _domain(s: Scenario, tail_sigmas: float) -> tuple[float, float]:
    return -tail_sigmas * s.sigma, 1.0 + tail_sigmas * s.sigma


def postselected_density(s: Scenario, x) -> np.ndarray:
    """|<phi|M_x|psi>|^2 / p_phi evaluated from the Kraus operators."""
    m = kraus_batch(s, x)
    amp = np.einsum("i,kij,j->k", s.phi.amplitudes.conj(), m, s.psi.amplitudes)
    return np.abs(amp) ** 2 / s.p_phi


def p_minus_quadrature(
    s: Scenario,
    upper: float = 0.0,
    tol: float = DEFAULT_TOL,
    tail_sigmas: float = TAIL_SIGMAS,
) -> float:
    """Integral of |<phi|M_x|psi>|^2 / p_phi from the lower truncation to ``upper``.

    ``upper=0`` gives p_minus; ``upper=math.inf`` runs to the upper
    truncation and gives <psi|S|psi> / p_phi.
    """
    lo, hi = _domain(s, tail_sigmas)
    upper = min(float(upper), hi)

    def integrand(x):
        v = postselected_density(s, x)
        if np.any(v < 0.0):
            raise AssertionError("negative post-selected density")
        return v

    return float(adaptive_simpson(integrand, lo, upper, tol=tol, breakpoints=(0.0, 1.0)).value)


def disturbance_quadrature(s: Scenario, tol: float = DEFAULT_TOL, tail_sigmas: float = TAIL_SIGMAS) -> np.ndarray:
    """S = int M_x^dag |phi><phi| M_x dx by quadrature."""
    proj_phi = s.phi.projector().matrix

    def integrand(x):
        m = kraus_batch(s, x)
        return np.conj(np.transpose(m, (0, 2, 1))) @ proj_phi @ m

    lo, hi = _domain(s, tail_sigmas)
    return adaptive_simpson(integrand, lo, hi, tol=tol, breakpoints=(0.0, 1.0)).value


def povm_total_quadrature(s: Scenario, tol: float = DEFAULT_TOL, tail_sigmas: float = TAIL_SIGMAS) -> np.ndarray:
    """int E_x dx over the truncated domain; the identity up to quadrature error."""

    def integrand(x):
        m = kraus_batch(s, x)
        return np.conj(np.transpose(m, (0, 2, 1))) @ m

    lo, hi = _domain(s, tail_sigmas)
    return adaptive_simpson(integrand, lo, hi, tol=tol, breakpoints=(0.0, 1.0)).value


def as_scenario(psi: StateLike, phi: StateLike, pi: OperatorLike, sigma: float) -> Scenario:
    return Scenario(
        psi if isinstance(psi, State) else State(psi),
        phi if isinstance(phi, State) else State(phi),
        pi if isinstance(pi, Operator) else Operator(as_matrix(pi)),
        sigma,
    )
