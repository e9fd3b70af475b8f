"""Adaptive Simpson quadrature for vectorized, possibly array-valued integrands.

The integrand takes a 1-d array of abscissae and returns an array whose
leading axis matches it, so a whole refinement level is evaluated in one
call.  Panel acceptance uses the max norm over the trailing axes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError

DEFAULT_TOL = 1e-12
MAX_DEPTH = 60
MAX_EVALS = 2_000_000


@dataclass(frozen=True)
class QuadratureResult:
    value: np.ndarray | float
    error: float
    evaluations: int
    panels: int


def adaptive_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    breakpoints: Sequence[float] = (),
    initial_panels: int = 16,
    max_depth: int = MAX_DEPTH,
    max_evals: int = MAX_EVALS,
) -> QuadratureResult:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    The interval is first cut at ``breakpoints`` and into ``initial_panels``
    equal pieces so that narrow features are not stepped over by the
    coarsest Simpson rule.  Each panel gets a share of ``tol`` proportional
    to its width; a panel is accepted when its two halves agree with the
    whole to within 15 times its share, and the Richardson-corrected value
    is kept.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("integration limits must be finite")
    if a == b:
        probe = np.asarray(f(np.array([a])))
        return QuadratureResult(np.zeros(probe.shape[1:]) if probe.ndim > 1 else 0.0, 0.0, 1, 0)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    cuts = sorted({a, b, *(float(p) for p in breakpoints if a < p < b)})
    edges = np.concatenate(
        [np.linspace(lo, hi, initial_panels + 1)[:-1] for lo, hi in zip(cuts[:-1], cuts[1:])] + [[b]]
    )
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    fx = np.asarray(f(np.concatenate([edges, mid])))
    n_e = edges.size
    f_lo, f_hi, f_mid = fx[: n_e - 1], fx[1:n_e], fx[n_e:]
    evals = fx.shape[0]
    width = b - a
    tols = tol * (hi - lo) / width

    def simpson(h, fa, fm, fb):
        return (h / 6.0)[(...,) + (None,) * (fa.ndim - 1)] * (fa + 4.0 * fm + fb)

    whole = simpson(hi - lo, f_lo, f_mid, f_hi)
    total = np.zeros(fx.shape[1:])
    err_total = 0.0
    accepted = 0
    depth = 0
    while lo.size:
        if depth > max_depth or evals > max_evals:
            raise QuadratureError(
                f"adaptive Simpson did not reach tol={tol:g} on [{a:g}, {b:g}] "
                f"({evals} evaluations, depth {depth}, {lo.size} open panels)"
            )
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        fq = np.asarray(f(np.concatenate([lm, rm])))
        evals += fq.shape[0]
        f_lm, f_rm = fq[: lo.size], fq[lo.size:]
        left = simpson(mid - lo, f_lo, f_lm, f_mid)
        right = simpson(hi - mid, f_mid, f_rm, f_hi)
        diff = left + right - whole
        dev = np.abs(diff).reshape(lo.size, -1).max(axis=1)
        ok = dev <= 15.0 * tols
        if np.any(ok):
            total = total + np.sum((left + right + diff / 15.0)[ok], axis=0)
            err_total += float(np.sum(dev[ok]) / 15.0)
            accepted += int(np.count_nonzero(ok))
        keep = ~ok
        lo, mid, hi = lo[keep], mid[keep], hi[keep]
        f_lo, f_mid, f_hi = f_lo[keep], f_mid[keep], f_hi[keep]
        f_lm, f_rm = f_lm[keep], f_rm[keep]
        left, right, tols = left[keep], right[keep], tols[keep]
        lm, rm = lm[keep], rm[keep]
        # split every open panel into its two halves
        lo, mid, hi = np.concatenate([lo, mid]), np.concatenate([lm, rm]), np.concatenate([mid, hi])
        f_lo, f_mid, f_hi = (
            np.concatenate([f_lo, f_mid]),
            np.concatenate([f_lm, f_rm]),
            np.concatenate([f_mid, f_hi]),
        )
        whole = np.concatenate([left, right])
        tols = np.concatenate([tols, tols]) / 2.0
        depth += 1
    value = sign * total
    if np.ndim(value) == 0:
        value = float(value)
    return QuadratureResult(value, err_total, evals, accepted)
