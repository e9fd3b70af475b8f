"""Weak values, their reduction to spectral projectors, and anomaly detection."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericalError, ValidationError
from .hilbert import (
    HERMITIAN_TOL,
    Operator,
    OperatorLike,
    StateLike,
    as_matrix,
    as_vector,
    hermitian_residual,
    inner,
    spectral_decompose,
)

ORTHOGONALITY_TOL = 1e-14
ANOMALY_TOL = 1e-12


@dataclass(frozen=True)
class WeakValue:
    value: complex
    label: str = "A"

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag


@dataclass(frozen=True)
class AnomalyReport:
    """Whether re(A_w) escapes the eigenvalue interval of A.

    When it does, ``witness_projector`` is the spectral projector with the
    most negative real weak value (ties go to the smaller eigenvalue).
    """

    eigen_range: tuple[float, float]
    weak_value: WeakValue
    anomalous: bool
    witness_projector: Optional[Operator] = None
    witness_eigenvalue: Optional[float] = None
    witness_weak_value: Optional[WeakValue] = None

    @property
    def re_weak_value(self) -> float:
        return self.weak_value.real


def postselection_probability(psi: StateLike, phi: StateLike) -> float:
    """p_phi = |<phi|psi>|^2."""
    return abs(inner(phi, psi)) ** 2


def _overlap(psi: StateLike, phi: StateLike) -> complex:
    ov = inner(phi, psi)
    if abs(ov) ** 2 <= ORTHOGONALITY_TOL:
        raise ValidationError(f"pre- and post-selection are orthogonal (|<phi|psi>|^2 = {abs(ov) ** 2:.3g})")
    return ov


def weak_value(a: OperatorLike, psi: StateLike, phi: StateLike, label: str = "A") -> WeakValue:
    """<phi|A|psi> / <phi|psi>."""
    m = as_matrix(a)
    v, w = as_vector(psi), as_vector(phi)
    if m.shape != (v.size, v.size):
        raise ValidationError(f"operator shape {m.shape} does not match state dimension {v.size}")
    ov = _overlap(psi, phi)
    return WeakValue(complex(np.vdot(w, m @ v)) / ov, label)


def projector_weak_values(a: OperatorLike, psi: StateLike, phi: StateLike) -> list[tuple[float, WeakValue]]:
    """Weak value of every spectral projector of the Hermitian operator ``a``."""
    m = as_matrix(a)
    if hermitian_residual(m) > HERMITIAN_TOL:
        raise ValidationError("projector weak values need a Hermitian observable")
    _overlap(psi, phi)
    return [
        (eig, weak_value(p, psi, phi, label=f"Pi({eig:.6g})"))
        for eig, p in spectral_decompose(m)
    ]


def detect_anomaly(a: OperatorLike, psi: StateLike, phi: StateLike) -> AnomalyReport:
    m = as_matrix(a)
    if hermitian_residual(m) > HERMITIAN_TOL:
        raise ValidationError("anomaly detection needs a Hermitian observable")
    aw = weak_value(m, psi, phi)
    spectrum = spectral_decompose(m)
    lo, hi = spectrum.eigenvalues[0], spectrum.eigenvalues[-1]
    anomalous = aw.real < lo - ANOMALY_TOL or aw.real > hi + ANOMALY_TOL
    if not anomalous:
        return AnomalyReport((lo, hi), aw, False)

    parts = [(eig, p, weak_value(p, psi, phi, label=f"Pi({eig:.6g})")) for eig, p in spectrum]
    # min() keeps the first of equal keys, i.e. the smaller eigenvalue
    eig, proj, wv = min(parts, key=lambda item: item[2].real)
    if wv.real >= 0.0:
        raise NumericalError(
            f"re(A_w) = {aw.real!r} lies outside [{lo!r}, {hi!r}] but no projector has a negative real weak value"
        )
    return AnomalyReport((lo, hi), aw, True, proj, eig, wv)
