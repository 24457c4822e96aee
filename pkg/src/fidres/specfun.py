"""Scalar special functions: log-Beta, digamma and the Gauss hypergeometric 2F1.

All functions are pure and operate on Python floats.
"""

import math

from .exceptions import DomainError, NumericError

EULER_GAMMA = 0.57721566490153286061

_SERIES_RTOL = 1e-16
_SERIES_QUIET_TERMS = 3
_SERIES_MAX_TERMS = 10_000
_CONNECTION_MAX_EXCESS = 3.0

# Bernoulli numbers B_2k / (2k) for the digamma asymptotic expansion.
_DIGAMMA_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def ln_beta(a, b):
    """Natural logarithm of the Beta function B(a, b) for a, b > 0."""
    a = float(a)
    b = float(b)
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"ln_beta requires positive arguments, got ({a}, {b})")
    # Sorting makes the result bitwise symmetric in (a, b).
    lo, hi = sorted((a, b))
    return math.lgamma(lo) + math.lgamma(hi) - math.lgamma(lo + hi)


def digamma(x):
    """Digamma function psi(x) = d/dx ln Gamma(x) for x > 0.

    Shifts the argument above 10 with the recurrence psi(x) = psi(x + 1) - 1/x
    and then sums the asymptotic expansion.
    """
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"digamma requires a finite positive argument, got {x}")
    shift = 0.0
    while x < 10.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    for coeff in reversed(_DIGAMMA_ASYMPTOTIC):
        tail = (tail + coeff) * inv2
    return shift + math.log(x) - 0.5 / x - tail


def _signed_lgamma(x):
    """Return (sign, log|Gamma(x)|); sign is 0 at the poles x = 0, -1, -2, ..."""
    if x <= 0.0 and x == math.floor(x):
        return 0, -math.inf
    if x > 0.0:
        return 1, math.lgamma(x)
    sign = -1 if int(math.floor(-x)) % 2 == 0 else 1
    return sign, math.lgamma(x)


def _gamma_ratio(num, den):
    """prod Gamma(num) / prod Gamma(den), with 1/Gamma vanishing at poles."""
    sign = 1
    log_val = 0.0
    for x in den:
        s, lg = _signed_lgamma(x)
        if s == 0:
            return 0.0
        sign *= s
        log_val -= lg
    for x in num:
        s, lg = _signed_lgamma(x)
        if s == 0:
            raise NumericError(f"Gamma pole at {x} in hypergeometric connection formula")
        sign *= s
        log_val += lg
    return sign * math.exp(log_val)


def _hyp2f1_series(a, b, c, z):
    total = 1.0
    term = 1.0
    quiet = 0
    for k in range(_SERIES_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        total += term
        if term == 0.0:
            return total
        if abs(term) <= _SERIES_RTOL * abs(total):
            quiet += 1
            if quiet >= _SERIES_QUIET_TERMS:
                return total
        else:
            quiet = 0
    raise NumericError(
        f"2F1({a}, {b}; {c}; {z}) series did not converge in {_SERIES_MAX_TERMS} terms"
    )


def gauss_2f1(a, b, c, z):
    """Gauss hypergeometric function F(a, b; c; z) for real z in [0, 1).

    For z <= 0.5 the defining power series is summed directly. Above 0.5 the
    value is assembled from two series in 1 - z via the standard connection
    formula, which converges geometrically with ratio at most one half. When
    c - a - b is an integer the connection formula degenerates, and when it is
    large the direct series is both fast and free of cancellation; both cases
    fall back to the direct series, which converges for c - a - b > 0.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if not 0.0 <= z < 1.0:
        raise DomainError(f"gauss_2f1 requires z in [0, 1), got {z}")
    if not c > 0.0:
        raise DomainError(f"gauss_2f1 requires c > 0, got {c}")
    if z == 0.0:
        return 1.0
    s = c - a - b
    # Large s: the direct series decays like k**(-s-1) even at z = 1, while the
    # connection formula suffers cancellation.
    if z <= 0.5 or s >= _CONNECTION_MAX_EXCESS or abs(s - round(s)) < 1e-9:
        return _hyp2f1_series(a, b, c, z)
    w = 1.0 - z
    first = _gamma_ratio((c, s), (c - a, c - b))
    if first != 0.0:
        first *= _hyp2f1_series(a, b, 1.0 - s, w)
    second = _gamma_ratio((c, -s), (a, b))
    if second != 0.0:
        second *= w**s * _hyp2f1_series(c - a, c - b, 1.0 + s, w)
    return first + second


def gauss_2f1_at_one(a, b, c):
    """Gauss summation F(a, b; c; 1) = Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b))."""
    if not c - a - b > 0.0:
        raise DomainError("F(a, b; c; 1) diverges unless c - a - b > 0")
    return _gamma_ratio((c, c - a - b), (c - a, c - b))
