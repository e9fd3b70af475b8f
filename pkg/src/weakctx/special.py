"""Error function to near machine precision.

``erf`` uses the all-positive-term series

    erf(z) = 2/sqrt(pi) * exp(-z^2) * sum_n (2 z^2)^n z / (1*3*...*(2n+1))

for |z| <= 3, which has no cancellation, and ``erfc`` switches to the
Laplace continued fraction (evaluated by the modified Lentz method) above 3.
"""
import math

SERIES_LIMIT = 3.0
_EPS = 1e-17
_TINY = 1e-300


def _erf_series(z: float) -> float:
    z2 = z * z
    term = z
    total = z
    n = 0
    while abs(term) > _EPS * abs(total):
        n += 1
        term *= 2.0 * z2 / (2 * n + 1)
        total += term
        if n > 500:
            break
    return 2.0 / math.sqrt(math.pi) * math.exp(-z2) * total


def _erfc_cf(z: float) -> float:
    # erfc(z) = exp(-z^2)/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    f = z
    c = z
    d = 0.0
    for k in range(1, 5000):
        a = 0.5 * k
        d = z + a * d
        d = _TINY if d == 0.0 else d
        c = z + a / c
        c = _TINY if c == 0.0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-z * z) / math.sqrt(math.pi) / f


def erf(z: float) -> float:
    z = float(z)
    if math.isnan(z):
        return z
    if abs(z) <= SERIES_LIMIT:
        return _erf_series(z)
    r = 1.0 - _erfc_cf(abs(z))
    return r if z > 0 else -r


def erfc(z: float) -> float:
    z = float(z)
    if math.isnan(z):
        return z
    if z > SERIES_LIMIT:
        return _erfc_cf(z)
    if z < -SERIES_LIMIT:
        return 2.0 - _erfc_cf(-z)
    return 1.0 - _erf_series(z)


def gauss_cdf(x: float, centre: float, sigma: float) -> float:
    """CDF of the density (pi sigma^2)^(-1/2) exp(-(x - centre)^2 / sigma^2).

    Note the variance of that density is sigma^2 / 2.
    """
    u = (x - centre) / sigma
    return 0.5 * erfc(-u) if u < 0 else 1.0 - 0.5 * erfc(u)
