"""Real-argument Mittag-Leffler functions.

.. math::

    E_{\\alpha,\\mu}(z) = \\sum_{n=0}^\\infty \\frac{z^n}{\\Gamma(\\alpha n + \\mu)},
    \\qquad E_\\alpha = E_{\\alpha,1}.

Evaluation is split in two branches:

* :func:`ml_series` -- the Taylor series, summed in log space for ``z >= 0``.
  For ``z < 0`` the alternating series loses digits to cancellation, so once
  the sum of absolute terms dwarfs the result it hands over to the real-line
  integral representation (``alpha < 1``) or to Kummer's transformation of
  the confluent series (``alpha = 1``).
* :func:`ml_asymptotic` -- ``(1/alpha) z^{(1-mu)/alpha} exp(z^{1/alpha})``
  plus the algebraic tail ``-sum_k z^{-k} / Gamma(mu - alpha k)`` for
  ``z > 0``; the algebraic tail alone for ``z < 0``.

:func:`ml_two` dispatches: series for ``|z| <= 10`` and asymptotic for
``z > 10``, or for any ``z > 0`` whose series peak ``z^{1/alpha}`` exceeds
``PEAK_SWITCH`` (there the leading exponential swamps the tail). For ``z < -10`` the algebraic tail is not accurate enough near
``alpha = 1`` (it misses the ``exp(-|z|)``-type contributions), so negative
arguments always go through the series branch and its integral fallback.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate, special

__all__ = [
    "MittagLefflerDomainError",
    "ml_one",
    "ml_two",
    "ml_log",
    "ml_series",
    "ml_asymptotic",
    "SERIES_RADIUS",
    "PEAK_SWITCH",
    "Z_MAX",
]

#: Switching radius between the series and the asymptotic branch.
SERIES_RADIUS = 10.0
#: Series peak ``z^{1/alpha}`` beyond which positive ``z`` use the asymptotic branch.
PEAK_SWITCH = 60.0
#: Largest supported ``|z|``.
Z_MAX = 200.0
#: Largest supported ``mu``.
MU_MAX = 5.0

_LOG_DBL_MAX = math.log(np.finfo(np.float64).max)
_CHUNK = 512


class MittagLefflerDomainError(ValueError):
    """Raised for parameters outside the supported evaluation region."""


def _check_domain(alpha: float, mu: float, z: float) -> None:
    region = (
        "supported region: 0 < alpha <= 1 with |z| <= 200, or 1 < alpha <= 2 "
        "with |z| <= 10; 0 < mu <= 5; z real and finite"
    )
    if not (0.0 < alpha <= 2.0):
        raise MittagLefflerDomainError(f"alpha={alpha!r} outside the {region}")
    if not (0.0 < mu <= MU_MAX):
        raise MittagLefflerDomainError(f"mu={mu!r} outside the {region}")
    if not math.isfinite(z) or abs(z) > Z_MAX:
        raise MittagLefflerDomainError(f"z={z!r} outside the {region}")
    if alpha > 1.0 and abs(z) > SERIES_RADIUS:
        raise MittagLefflerDomainError(
            f"alpha={alpha!r} > 1 requires |z| <= 10 ({region})"
        )


def _rgamma(x: float) -> float:
    return float(special.rgamma(x))


# {{{ series branch


def _log_terms(alpha: float, mu: float, logz: float, start: int, stop: int) -> np.ndarray:
    n = np.arange(start, stop, dtype=np.float64)
    return n * logz - special.gammaln(alpha * n + mu)


def _positive_series_logs(alpha: float, mu: float, z: float) -> np.ndarray:
    """Log of every Taylor term that matters, for ``z > 0``."""
    logz = math.log(z)
    chunks = []
    start = 0
    while True:
        lt = _log_terms(alpha, mu, logz, start, start + _CHUNK)
        # 1/Gamma vanishes at non-positive integers; only n = 0 can hit that
        chunks.append(lt)
        start += _CHUNK
        top = max(np.max(c) for c in chunks)
        # terms are log-concave in n: once decreasing and negligible, stop
        if lt[-1] < lt[-2] and lt[-1] < top + math.log(1.0e-18):
            break
        if start > 200_000:
            raise MittagLefflerDomainError(
                f"series for alpha={alpha}, z={z} did not converge"
            )
    return np.concatenate(chunks)


def _logsumexp(lt: np.ndarray) -> float:
    top = float(np.max(lt))
    return top + math.log(math.fsum(np.exp(lt - top)))


def _kummer_alpha_one(mu: float, z: float) -> float:
    """``E_{1,mu}(z)`` for ``z < 0`` with positive terms only.

    ``E_{1,mu}(z) = 1F1(1; mu; z) / Gamma(mu) = exp(z) 1F1(mu - 1; mu; -z) / Gamma(mu)``.
    """
    x = -z
    terms = [1.0]
    term = 1.0
    n = 0
    while True:
        term *= (mu - 1.0 + n) / (mu + n) * x / (n + 1.0)
        n += 1
        terms.append(term)
        if term == 0.0 or (n > x and term < 1.0e-18 * terms[0]):
            break
    return math.exp(z) * math.fsum(terms) * _rgamma(mu)


def _integral_negative(alpha: float, mu: float, x: float) -> float:
    """``E_{alpha,mu}(-x)`` for ``0 < alpha < 1``, ``0 < mu <= 1``, ``x > 0``."""
    s1 = math.sin(math.pi * (1.0 - mu))
    s2 = math.sin(math.pi * (1.0 - mu + alpha))
    ca = math.cos(math.pi * alpha)
    p = (1.0 - mu) / alpha
    inv = 1.0 / alpha
    scale = 1.0 / (alpha * math.pi)

    def smooth(r):
        return (
            math.exp(-(r**inv))
            * (r * s1 + x * s2)
            / (r * r + 2.0 * r * x * ca + x * x)
        )

    def full(r):
        return r**p * smooth(r)

    opts = {"epsabs": 0.0, "epsrel": 1.0e-13, "limit": 400}
    # quad sometimes cannot certify epsrel near roundoff; the values still
    # agree with high-precision references to ~1e-11 or better
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        # r**p has a branch point at 0: let QUADPACK weight it exactly
        head, _ = integrate.quad(smooth, 0.0, 1.0, weight="alg", wvar=(p, 0.0), **opts)
        # past r = 50**alpha the factor exp(-r**(1/alpha)) is below e^-50
        cut = max(50.0**alpha, 1.0 + 1.0e-3)
        # for alpha > 1/2 the denominator dips to x^2 sin^2(pi alpha) at r = -x cos(pi alpha)
        dip = -x * ca
        points = [dip] if 1.0 < dip < cut else None
        mid, _ = integrate.quad(full, 1.0, cut, points=points, **opts)
        tail, _ = integrate.quad(full, cut, np.inf, **opts)
    return scale * (head + mid + tail)


def _negative_fallback(alpha: float, mu: float, z: float) -> float:
    if alpha == 1.0:
        return _kummer_alpha_one(mu, z)
    if alpha > 1.0:
        raise MittagLefflerDomainError(
            f"alpha={alpha} > 1 with z={z}: series cancellation too severe"
        )

    # shift mu into (0, 1] with E_{a,m}(z) = (E_{a,m-a}(z) - 1/Gamma(m-a)) / z;
    # there the power r^((1-mu)/alpha) in the integrand is bounded at r = 0
    shifts = []
    m = mu
    while m > 1.0:
        m -= alpha
        shifts.append(m)

    value = _integral_negative(alpha, m, -z)
    for m in reversed(shifts):
        value = (value - _rgamma(m)) / z
    return value


def ml_series(alpha: float, mu: float, z: float, *, log: bool = False) -> float:
    """Series branch of :math:`E_{\\alpha,\\mu}(z)`.

    With ``log=True`` (only for ``z >= 0``) returns :math:`\\log E_{\\alpha,\\mu}(z)`,
    which stays finite where the value itself overflows.
    """
    alpha, mu, z = float(alpha), float(mu), float(z)

    if z == 0.0:
        value = _rgamma(mu)
        return math.log(value) if log else value

    # the terms peak near n = |z|**(1/alpha) / alpha, with log size ~ |z|**(1/alpha)
    peak = abs(z) ** (1.0 / alpha)

    if z > 0.0:
        if not log and peak > _LOG_DBL_MAX + 50.0:
            raise OverflowError(f"E_{{{alpha},{mu}}}({z}) exceeds double range")
        lt = _positive_series_logs(alpha, mu, z)
        if log:
            return _logsumexp(lt)
        if np.max(lt) > _LOG_DBL_MAX - 10.0:
            total = _logsumexp(lt)
            if total > _LOG_DBL_MAX:
                raise OverflowError(f"E_{{{alpha},{mu}}}({z}) exceeds double range")
        return math.fsum(np.exp(lt))

    if log:
        raise ValueError("log evaluation needs z >= 0")

    # alternating series; keep it only while the cancellation is mild
    if peak < 300.0:
        lt = _positive_series_logs(alpha, mu, -z)
        mags = np.exp(lt)
        signs = np.where(np.arange(lt.size) % 2 == 0, 1.0, -1.0)
        value = math.fsum(signs * mags)
        if value != 0.0 and math.fsum(mags) <= 100.0 * abs(value):
            return value

    return _negative_fallback(alpha, mu, z)


# }}}


# {{{ asymptotic branch


def _algebraic_tail(alpha: float, mu: float, z: float, kmin: int = 5) -> tuple[float, float]:
    """``-sum_{k >= 1} z^{-k} / Gamma(mu - alpha k)``, optimally truncated.

    At least *kmin* terms are used; further terms are added while they keep
    shrinking in magnitude and stay above ``1e-17`` of the running sum.
    Returns the sum and the magnitude of the last term kept, a crude bound
    on the truncation error.
    """
    terms = []
    prev = math.inf
    for k in range(1, 400):
        t = z ** (-k) * _rgamma(mu - alpha * k)
        a = abs(t)
        if a == 0.0:
            continue
        if k > kmin and a > prev:
            break
        terms.append(t)
        prev = a
        if k >= kmin and a < 1.0e-17 * abs(math.fsum(terms)):
            break
    return -math.fsum(terms), (prev if terms else 0.0)


def _asymptotic(alpha: float, mu: float, z: float, log: bool) -> tuple[float, float]:
    if not 0.0 < alpha <= 1.0:
        raise MittagLefflerDomainError(f"asymptotic branch needs 0 < alpha <= 1, got {alpha}")
    if z == 0.0:
        raise ValueError("asymptotic branch is undefined at z = 0")

    tail, err = _algebraic_tail(alpha, mu, z)
    if z < 0.0:
        if log:
            raise ValueError("log evaluation needs z >= 0")
        return tail, err

    exponent = z ** (1.0 / alpha)
    log_prefactor = ((1.0 - mu) / alpha) * math.log(z) - math.log(alpha)
    log_lead = exponent + log_prefactor
    if log:
        return log_lead + math.log1p(tail * math.exp(-log_lead)), err * math.exp(-log_lead)
    if log_lead > _LOG_DBL_MAX:
        raise OverflowError(f"E_{{{alpha},{mu}}}({z}) exceeds double range")
    return math.exp(log_prefactor) * math.exp(exponent) + tail, err


def ml_asymptotic(alpha: float, mu: float, z: float, *, log: bool = False) -> float:
    """Large-``|z|`` expansion of :math:`E_{\\alpha,\\mu}(z)` for ``0 < alpha <= 1``."""
    return _asymptotic(float(alpha), float(mu), float(z), log)[0]


# }}}


# {{{ public


def _prefer_asymptotic(alpha: float, z: float) -> bool:
    return alpha <= 1.0 and z > 0.0 and (z > SERIES_RADIUS or z ** (1.0 / alpha) > PEAK_SWITCH)


def ml_two(alpha: float, mu: float, z: float) -> float:
    """Two-parameter Mittag-Leffler function :math:`E_{\\alpha,\\mu}(z)`.

    :raises MittagLefflerDomainError: outside ``0 < alpha <= 1, |z| <= 200``
        (or ``1 < alpha <= 2, |z| <= 10``), ``0 < mu <= 5``.
    :raises OverflowError: if the value is not representable as a double.
    """
    alpha, mu, z = float(alpha), float(mu), float(z)
    _check_domain(alpha, mu, z)
    if _prefer_asymptotic(alpha, z):
        value, err = _asymptotic(alpha, mu, z, log=False)
        # close to alpha = 1 with fractional mu the divergent tail can stall
        # above 1e-14; the positive series has no cancellation, so use it
        if err <= 1.0e-14 * abs(value):
            return value
    return ml_series(alpha, mu, z)


def ml_one(alpha: float, z: float) -> float:
    """One-parameter Mittag-Leffler function :math:`E_\\alpha(z) = E_{\\alpha,1}(z)`."""
    return ml_two(alpha, 1.0, z)


def ml_log(alpha: float, mu: float, z: float) -> float:
    """:math:`\\log E_{\\alpha,\\mu}(z)` for ``z >= 0`` (overflow-free)."""
    alpha, mu, z = float(alpha), float(mu), float(z)
    _check_domain(alpha, mu, z)
    if z < 0.0:
        raise ValueError("ml_log needs z >= 0")
    if _prefer_asymptotic(alpha, z):
        value, err = _asymptotic(alpha, mu, z, log=True)
        if err <= 1.0e-14:
            return value
    return ml_series(alpha, mu, z, log=True)


# }}}
