"""Small dense complex linear algebra: states, operators, projectors.

Everything here works on d x d matrices with d at most a few dozen, so the
routines favour accuracy and transparency over speed.  The Hermitian
eigensolver is a cyclic complex Jacobi iteration.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .errors import NumericalError, ValidationError

NORM_TOL = 1e-6
HERMITIAN_TOL = 1e-12
PROJECTOR_TOL = 1e-10
CLUSTER_TOL = 1e-8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class State:
    """Normalized pure state.

    Amplitudes whose norm is within ``NORM_TOL`` of one are rescaled to unit
    norm; anything further off is rejected rather than silently fixed.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex)
        if v.ndim != 1 or v.size < 2:
            raise ValidationError(f"state must be a vector of dimension >= 2, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("state has non-finite amplitudes")
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm {norm:.12g} deviates from 1 by more than {NORM_TOL:g}")
        object.__setattr__(self, "amplitudes", _frozen(v / norm))

    @classmethod
    def basis(cls, dim: int, k: int) -> "State":
        v = np.zeros(dim, dtype=complex)
        v[k] = 1.0
        return cls(v)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> "Operator":
        """|self><self| as an Operator."""
        v = self.amplitudes
        return Operator(np.outer(v, v.conj()), hermitian=True)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense d x d complex matrix, optionally certified Hermitian."""

    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"operator must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("operator has non-finite entries")
        if self.hermitian and hermitian_residual(m) > HERMITIAN_TOL:
            raise ValidationError(f"operator is not Hermitian (residual {hermitian_residual(m):.3g})")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def identity(cls, dim: int) -> "Operator":
        return cls(np.eye(dim), hermitian=True)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return hermitian_residual(self.matrix) <= tol

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


StateLike = Union[State, np.ndarray, list]
OperatorLike = Union[Operator, np.ndarray, list]


def as_vector(u: StateLike) -> np.ndarray:
    return u.amplitudes if isinstance(u, State) else np.asarray(u, dtype=complex)


def as_matrix(a: OperatorLike) -> np.ndarray:
    return a.matrix if isinstance(a, Operator) else np.asarray(a, dtype=complex)


def hermitian_residual(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def max_norm(m) -> float:
    return float(np.max(np.abs(np.asarray(m))))


def inner(u: StateLike, v: StateLike) -> complex:
    """<u|v>, conjugate-linear in ``u``."""
    a, b = as_vector(u), as_vector(v)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def expectation(a: OperatorLike, u: StateLike) -> complex:
    v = as_vector(u)
    return complex(np.vdot(v, as_matrix(a) @ v))


def validate_projector(p: OperatorLike) -> bool:
    """True iff ``p`` is Hermitian and idempotent within tolerance."""
    try:
        m = as_matrix(p)
    except (TypeError, ValueError):
        return False
    if m.ndim != 2 or m.shape[0] != m.shape[1] or not np.all(np.isfinite(m)):
        return False
    if hermitian_residual(m) > HERMITIAN_TOL:
        return False
    return max_norm(m @ m - m) <= PROJECTOR_TOL


def jacobi_eigh(m: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, V)`` with eigenvalues ascending and the columns
    of the unitary ``V`` the matching eigenvectors.
    """
    a = np.array(m, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(max_norm(a), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(np.triu(a, 1)) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                # unit phase that makes the (p, q) entry real before the real rotation
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # G = D R with D = diag(1, .., conj(phase) at q, ..)
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * np.conj(phase) * cq
                a[:, q] = s * cp + c * np.conj(phase) * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * phase * rq
                a[q, :] = s * rp + c * phase * rq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(phase) * vq
                v[:, q] = s * vp + c * np.conj(phase) * vq
    else:
        raise NumericalError("Jacobi iteration did not converge")
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct eigenvalues (strictly increasing) with their eigenprojectors."""

    pairs: tuple[tuple[float, Operator], ...]

    def __iter__(self) -> Iterator[tuple[float, Operator]]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def eigenvalues(self) -> list[float]:
        return [a for a, _ in self.pairs]

    @property
    def projectors(self) -> list[Operator]:
        return [p for _, p in self.pairs]

    def reconstruct(self) -> np.ndarray:
        return sum(a * p.matrix for a, p in self.pairs)


def spectral_decompose(a: OperatorLike, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomposition:
    """Group the eigenvectors of a Hermitian operator into eigenprojectors.

    Eigenvalues closer than ``cluster_tol`` to their neighbour are treated
    as one degenerate eigenvalue (reported as the cluster mean).
    """
    m = as_matrix(a)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"operator must be square, got shape {m.shape}")
    if hermitian_residual(m) > HERMITIAN_TOL:
        raise ValidationError("spectral_decompose requires a Hermitian operator")
    m = 0.5 * (m + m.conj().T)
    w, vecs = jacobi_eigh(m)
    clusters: list[list[int]] = [[0]]
    for i in range(1, w.size):
        if w[i] - w[clusters[-1][-1]] <= cluster_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    pairs = []
    for idx in clusters:
        block = vecs[:, idx]
        proj = block @ block.conj().T
        proj = 0.5 * (proj + proj.conj().T)
        pairs.append((float(np.mean(w[idx])), Operator(proj, hermitian=True)))
    return SpectralDecomposition(tuple(pairs))


def complement(p: OperatorLike) -> Operator:
    """I - P."""
    m = as_matrix(p)
    return Operator(np.eye(m.shape[0]) - m)
