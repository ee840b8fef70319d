"""Discrete fractional operators on a uniform time grid.

Everything here acts on samples ``v[n] = v(n * tau)``, ``n = 0, ..., Nt``:

* :func:`caputo_l1` -- L1 approximation of the Caputo derivative of order
  :math:`0 < \\alpha < 1`;
* :func:`caputo_l1_wave` -- order :math:`1 + \\alpha`, realised as the L1
  operator acting on backward-difference velocities;
* :func:`rl_integral` -- Riemann-Liouville integral by piecewise-linear
  product integration (exact for linear data).

Output entry 0 is always 0. Convolution sums run in ascending history index
with Neumaier compensation, vectorised over the output index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "FracOrder",
    "UniformGrid",
    "TimeSeries",
    "gamma_fn",
    "l1_weights",
    "rl_weights",
    "caputo_l1",
    "caputo_l1_wave",
    "rl_integral",
    "rl_integral_iterated",
    "history_sum",
    "solve_linear_l1",
]


# {{{ types


@dataclass(frozen=True)
class FracOrder:
    """Fractional order :math:`\\alpha`, strictly inside :math:`(0, 1)`."""

    alpha: float

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not (0.0 < a < 1.0) or not math.isfinite(a):
            raise ValueError(f"fractional order must lie in (0, 1), got alpha={a!r}")
        object.__setattr__(self, "alpha", a)

    def __float__(self) -> float:
        return self.alpha


AlphaLike = Union[float, FracOrder]


def _as_alpha(alpha: AlphaLike) -> float:
    return FracOrder(float(alpha)).alpha


@dataclass(frozen=True)
class UniformGrid:
    """Space-time mesh on :math:`[0, l] \\times [0, T]`."""

    l: float
    T: float
    nx: int
    nt: int

    def __post_init__(self) -> None:
        if not self.l > 0 or not self.T > 0:
            raise ValueError(f"domain sizes must be positive: l={self.l}, T={self.T}")
        if int(self.nx) != self.nx or self.nx < 2:
            raise ValueError(f"nx must be an integer >= 2, got {self.nx}")
        if int(self.nt) != self.nt or self.nt < 1:
            raise ValueError(f"nt must be an integer >= 1, got {self.nt}")
        object.__setattr__(self, "l", float(self.l))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "nt", int(self.nt))

    @property
    def h(self) -> float:
        return self.l / self.nx

    @property
    def tau(self) -> float:
        return self.T / self.nt

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx + 1) * self.h

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.nt + 1) * self.tau

    def refine(self, space: int = 2, time: int = 2) -> UniformGrid:
        return UniformGrid(self.l, self.T, self.nx * space, self.nt * time)


@dataclass(frozen=True)
class TimeSeries:
    """Real samples on the time axis of a grid, one per node ``t_n``."""

    grid: UniformGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.nt + 1,):
            raise ValueError(
                f"expected {self.grid.nt + 1} samples for nt={self.grid.nt}, "
                f"got shape {v.shape}"
            )
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: UniformGrid, fn) -> TimeSeries:
        return cls(grid, np.asarray(fn(grid.t), dtype=np.float64) * np.ones(grid.nt + 1))

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def _like(self, values: np.ndarray) -> TimeSeries:
        return TimeSeries(self.grid, values)

    def __add__(self, other):
        return self._like(self.values + _values_of(self, other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._like(self.values - _values_of(self, other))

    def __mul__(self, other):
        return self._like(self.values * _values_of(self, other))

    __rmul__ = __mul__

    def __neg__(self):
        return self._like(-self.values)

    def __pow__(self, p):
        return self._like(self.values**p)


def _values_of(ts: TimeSeries, other) -> np.ndarray | float:
    if isinstance(other, TimeSeries):
        _check_same_grid(ts, other)
        return other.values
    return other


def _check_same_grid(a: TimeSeries, b: TimeSeries) -> None:
    if a.grid.nt != b.grid.nt or a.grid.T != b.grid.T:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


# }}}


# {{{ gamma

# Lanczos approximation with g = 7 and 9 coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_GAMMA_XMAX = 171.6


def gamma_fn(x: float) -> float:
    """Gamma function for positive real arguments.

    :raises ValueError: for ``x <= 0``.
    :raises OverflowError: for ``x > 171.6``, where the result is not
        representable in double precision.
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"gamma_fn is defined here for x > 0 only, got x={x!r}")
    if x > _GAMMA_XMAX:
        raise OverflowError(f"gamma_fn({x}) exceeds the double precision range")

    if x < 0.5:
        # Gamma(x) = Gamma(x + 1) / x keeps the Lanczos sum in its accurate range.
        return gamma_fn(x + 1.0) / x

    if x == math.floor(x) and x <= 23.0:
        return float(math.factorial(int(x) - 1))

    if x >= 11.0:
        # the g = 7 fit drifts to ~1e-13 near x = 170; climb from [10, 11)
        # with the recurrence instead, at most ~160 roundings
        k = int(math.floor(x)) - 10
        base = x - k
        out = gamma_fn(base)
        for i in range(k):
            out *= base + i
        return out

    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[i] / (z + i)

    t = z + _LANCZOS_G + 0.5
    # t**(z + 1/2) overflows near the top of the range, so split the power
    half = math.pow(t, 0.5 * (z + 0.5))
    return _SQRT_2PI * half * (math.exp(-t) * half) * acc


# }}}


# {{{ weights


def l1_weights(alpha: AlphaLike, n: int) -> np.ndarray:
    """L1 weights ``b_m = (m + 1)**(1 - alpha) - m**(1 - alpha)``, ``m < n``."""
    a = _as_alpha(alpha)
    b = np.empty(n)
    if n == 0:
        return b
    b[0] = 1.0
    m = np.arange(1, n, dtype=np.float64)
    # m**p * expm1(p * log1p(1/m)) avoids the cancellation of the plain difference
    p = 1.0 - a
    b[1:] = m**p * np.expm1(p * np.log1p(1.0 / m))
    return b


def _second_difference_power(p: float, m: np.ndarray) -> np.ndarray:
    """``(m + 1)**p - 2 m**p + (m - 1)**p`` for ``m >= 1`` without cancellation."""
    out = (m + 1.0) ** p - 2.0 * m**p + (m - 1.0) ** p

    large = m >= 8.0
    if np.any(large):
        ml = m[large]
        # 2 m^p sum_{k even >= 2} binom(p, k) m^{-k}
        acc = np.zeros_like(ml)
        coeff = 1.0
        inv = 1.0 / ml
        for k in range(1, 40):
            coeff *= (p - k + 1) / k
            if k % 2 == 0:
                term = coeff * inv**k
                acc += term
                if np.all(np.abs(term) <= 1.0e-18 * np.abs(acc)):
                    break
        out[large] = 2.0 * ml**p * acc

    return out


def _rl_start_weight(order: float, n: np.ndarray) -> np.ndarray:
    """Weight of ``v[0]``: ``(n - 1)**(p) - (n - 1 - order) n**order``, ``p = order + 1``."""
    p = order + 1.0
    out = (n - 1.0) ** p - (n - 1.0 - order) * n**order

    large = n >= 8.0
    if np.any(large):
        nl = n[large]
        # n^order * sum_{k >= 2} binom(p, k) (-1)^k n^{-(k - 1)}
        acc = np.zeros_like(nl)
        coeff = 1.0
        inv = 1.0 / nl
        for k in range(1, 60):
            coeff *= (p - k + 1) / k
            if k >= 2:
                term = coeff * (-1.0) ** k * inv ** (k - 1)
                acc += term
                if np.all(np.abs(term) <= 1.0e-18 * np.abs(acc)):
                    break
        out[large] = nl**order * acc

    return out


def rl_weights(order: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Product-integration weights for the Riemann-Liouville integral.

    Returns ``(c, a0)`` such that, up to the factor ``tau**order / Gamma(order + 2)``,

    .. math::

        I^{order} v(t_n) \\approx a_0[n] v_0 + \\sum_{j=1}^n c_{n-j} v_j.

    ``c`` has length ``n`` and ``a0`` has length ``n + 1`` (``a0[0] = 0``).
    """
    order = float(order)
    if not order > 0:
        raise ValueError(f"integration order must be positive, got {order}")

    c = np.empty(n)
    if n > 0:
        c[0] = 1.0
        c[1:] = _second_difference_power(order + 1.0, np.arange(1, n, dtype=np.float64))

    a0 = np.zeros(n + 1)
    if n > 0:
        a0[1:] = _rl_start_weight(order, np.arange(1, n + 1, dtype=np.float64))

    return c, a0


# }}}


# {{{ convolution


def history_sum(weights: np.ndarray, d: np.ndarray, init=None) -> np.ndarray:
    """Compensated discrete convolution.

    Computes ``out[n] = init[n] + sum_{j=0}^{n-1} weights[n-1-j] * d[j]`` for
    ``n = 0, ..., N`` where ``N = d.shape[0]``. Trailing axes of *d* are batch
    axes. Terms are accumulated in ascending ``j`` with Neumaier compensation,
    so the result does not depend on how the batch is laid out.
    """
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if weights.shape[0] < n:
        raise ValueError("not enough weights for the history length")

    shape = (n + 1,) + d.shape[1:]
    s = np.zeros(shape) if init is None else np.array(init, dtype=np.float64)
    if s.shape != shape:
        raise ValueError(f"init has shape {s.shape}, expected {shape}")
    comp = np.zeros(shape)

    w = weights.reshape((-1,) + (1,) * (d.ndim - 1))
    for j in range(n):
        x = w[: n - j] * d[j]
        sj = s[j + 1 :]
        t = sj + x
        comp[j + 1 :] += np.where(np.abs(sj) >= np.abs(x), (sj - t) + x, (x - t) + sj)
        s[j + 1 :] = t

    return s + comp


def _caputo_l1_array(v: np.ndarray, alpha: float, tau: float) -> np.ndarray:
    n = v.shape[0] - 1
    b = l1_weights(alpha, n)
    out = history_sum(b, np.diff(v, axis=0))
    return out * (tau**-alpha / gamma_fn(2.0 - alpha))


def _caputo_l1_wave_array(v: np.ndarray, v1, alpha: float, tau: float) -> np.ndarray:
    n = v.shape[0] - 1
    w = np.empty_like(v)
    w[0] = v1
    w[1:] = np.diff(v, axis=0) / tau
    b = l1_weights(alpha, n)
    out = history_sum(b, np.diff(w, axis=0))
    return out * (tau**-alpha / gamma_fn(2.0 - alpha))


def _rl_integral_array(v: np.ndarray, order: float, tau: float) -> np.ndarray:
    n = v.shape[0] - 1
    c, a0 = rl_weights(order, n)
    init = a0.reshape((-1,) + (1,) * (v.ndim - 1)) * v[0]
    out = history_sum(c, v[1:], init=init)
    return out * (tau**order / gamma_fn(order + 2.0))


# }}}


# {{{ operators


def caputo_l1(v: TimeSeries, alpha: AlphaLike) -> TimeSeries:
    """L1 approximation of the Caputo derivative of order *alpha*.

    .. math::

        (\\partial^\\alpha v)^n = \\frac{\\tau^{-\\alpha}}{\\Gamma(2 - \\alpha)}
            \\sum_{j=0}^{n-1} b_{n-j-1} (v^{j+1} - v^j).

    Exact for piecewise-linear *v*; :math:`O(\\tau^{2-\\alpha})` for smooth *v*.
    """
    a = _as_alpha(alpha)
    if v.grid.nt < 1:
        raise ValueError("caputo_l1 needs at least 2 samples")
    return TimeSeries(v.grid, _caputo_l1_array(v.values, a, v.grid.tau))


def caputo_l1_wave(v: TimeSeries, alpha: AlphaLike, v1: float = 0.0) -> TimeSeries:
    """Caputo derivative of order ``1 + alpha`` with initial velocity *v1*.

    The velocities ``w[j + 1/2] = (v[j+1] - v[j]) / tau`` are prefixed by
    ``w[-1/2] = v1`` and then differentiated with the order-*alpha* L1 weights.
    """
    a = _as_alpha(alpha)
    if v.grid.nt < 2:
        raise ValueError("caputo_l1_wave needs at least 3 samples")
    return TimeSeries(v.grid, _caputo_l1_wave_array(v.values, float(v1), a, v.grid.tau))


def rl_integral(v: TimeSeries, alpha: AlphaLike | float) -> TimeSeries:
    """Riemann-Liouville integral :math:`D^{-\\alpha} v` by product integration.

    *alpha* may be a :class:`FracOrder` or any positive real; the kernel
    :math:`(t_n - s)^{\\alpha - 1} / \\Gamma(\\alpha)` is integrated exactly
    against the piecewise-linear interpolant of *v*.
    """
    order = float(alpha)
    if not order > 0:
        raise ValueError(f"integration order must be positive, got {order}")
    return TimeSeries(v.grid, _rl_integral_array(v.values, order, v.grid.tau))


def rl_integral_iterated(v: TimeSeries, alpha: AlphaLike) -> TimeSeries:
    """:math:`D^{-2\\alpha} v`, with the same product-integration kernel."""
    return rl_integral(v, 2.0 * _as_alpha(alpha))




def solve_linear_l1(rate: float, source: TimeSeries, alpha: AlphaLike, y0: float = 0.0) -> TimeSeries:
    """Implicit L1 time-stepping of ``d^a y = rate * y + source``, ``y(0) = y0``.

    Each step solves ``L1(y)^n = rate * y^n + source^n`` for ``y^n``; the
    returned series satisfies the discrete equation to rounding.
    """
    a = _as_alpha(alpha)
    g = source.grid
    coef = g.tau**-a / gamma_fn(2.0 - a)
    if coef == rate:
        raise ValueError("time step makes the implicit L1 step singular")
    b = l1_weights(a, g.nt)
    y = np.empty(g.nt + 1)
    d = np.empty(g.nt)
    y[0] = y0
    for n in range(1, g.nt + 1):
        hist = math.fsum(b[n - 1 - j] * d[j] for j in range(n - 1)) if n > 1 else 0.0
        y[n] = (source.values[n] + coef * (y[n - 1] - hist)) / (coef - rate)
        d[n - 1] = y[n] - y[n - 1]
    return TimeSeries(g, y)


# }}}
