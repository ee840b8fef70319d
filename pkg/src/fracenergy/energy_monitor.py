"""Norm traces and numerical checks of the a priori energy estimates.

Every check returns an :class:`EstimateReport` holding ``lhs`` and ``rhs``
time traces of an inequality ``lhs <= rhs``. The report passes when
``rhs[n] - lhs[n] >= -tol[n]`` for every ``n``, with the scale-aware default
``tol[n] = 1e-8 * max(1, max_{m <= n} rhs[m])``.

For the estimates whose constants are not explicit (Theorems 2-4 in the
estimate catalog below) ``rhs`` is ``constant * rhs1``, and the report also
carries ``empirical_constant = max_{n >= 1} lhs[n] / rhs1[n]``. The constants
are fixed by :func:`calibrate`: twice the largest empirical constant observed
on a designated calibration set.

Estimate catalog (``lhs <= constant * rhs1``, ``D^{-a}`` the Riemann-Liouville
integral, ``W = ||u||_0^2 + ||u_x||_0^2``):

===========  ======================================  =========================================================
name         lhs                                     rhs1
===========  ======================================  =========================================================
theorem1     ``||u||^2 + D^{-a} ||u_x||^2``          ``D^{-a} ||f||^2 + ||u0||^2`` (constant from ``l``, ``c1``)
theorem2     same                                    ``D^{-a}(||f||^2 + mu1^2 + mu2^2) + ||u0||^2``
theorem3     ``D^{a-1} ||u_t||^2 + W``               ``int_0^t ||f||^2 + ||u1||^2 + W(u0)``
theorem4     same                                    theorem3 + ``int_0^t (mu1'^2 + mu2'^2) + max mu1^2 + max mu2^2``
===========  ======================================  =========================================================
"""

from __future__ import annotations

import functools
import io
import math
from dataclasses import dataclass, field

import numpy as np

from fracenergy.fractional_ops import (
    AlphaLike,
    TimeSeries,
    UniformGrid,
    _as_alpha,
    caputo_l1,
    gamma_fn,
    rl_integral,
)
from fracenergy.mittag_leffler import ml_one, ml_two
from fracenergy.problem_spec import (
    BCKind,
    EquationKind,
    ProblemSpec,
    eval_field,
    eval_space,
    eval_time,
    manufactured,
    validate,
)
from fracenergy.solver import SolutionField, solve

__all__ = [
    "NormTrace",
    "EstimateReport",
    "norms",
    "velocity_sq",
    "forcing_sq",
    "check_lemma1",
    "check_lemma2",
    "check_theorem1",
    "check_theorem2",
    "check_theorem3",
    "check_theorem4",
    "check_theorem",
    "check_poincare",
    "check_trace",
    "check_ordering",
    "check_auxiliary",
    "theorem1_constant",
    "calibrate",
    "CALIBRATION_SET",
    "DEFAULT_TOL",
]

#: Relative tolerance of the default scale-aware report tolerance.
DEFAULT_TOL = 1.0e-8


# {{{ norms


@dataclass(frozen=True)
class NormTrace:
    grid: UniformGrid
    l2_sq: TimeSeries
    grad_sq: TimeSeries
    w21: TimeSeries
    left_sq: TimeSeries
    right_sq: TimeSeries


def _trapz(values: np.ndarray, h: float) -> np.ndarray:
    return np.trapezoid(values, dx=h, axis=-1)


def _gradient(u: np.ndarray, h: float) -> np.ndarray:
    """Centered differences inside, second-order one-sided at both ends."""
    return np.gradient(u, h, axis=-1, edge_order=2)


def l2_sq(u: np.ndarray, h: float) -> np.ndarray:
    return _trapz(u * u, h)


def grad_sq(u: np.ndarray, h: float) -> np.ndarray:
    ux = _gradient(u, h)
    return _trapz(ux * ux, h)


def norms(field: SolutionField) -> NormTrace:
    """Squared norms of every time row of *field* (trapezoid in space)."""
    g = field.grid
    u = field.values
    a = l2_sq(u, g.h)
    b = grad_sq(u, g.h)
    return NormTrace(
        g,
        TimeSeries(g, a),
        TimeSeries(g, b),
        TimeSeries(g, a + b),
        TimeSeries(g, u[:, 0] ** 2),
        TimeSeries(g, u[:, -1] ** 2),
    )


def velocity_sq(field: SolutionField, u1) -> TimeSeries:
    """``||u_t||_0^2`` with backward differences; entry 0 is ``||u1||_0^2``."""
    g = field.grid
    out = np.empty(g.nt + 1)
    out[0] = l2_sq(eval_space(u1, g.x), g.h)
    out[1:] = l2_sq(np.diff(field.values, axis=0) / g.tau, g.h)
    return TimeSeries(g, out)


def forcing_sq(spec: ProblemSpec, grid: UniformGrid) -> TimeSeries:
    """``||f(., t_n)||_0^2`` sampled on the grid."""
    T, X = np.meshgrid(grid.t, grid.x, indexing="ij")
    f = eval_field(spec.coefficients.f, X, T)
    return TimeSeries(grid, l2_sq(f, grid.h))


def _cumulative_trapz(v: np.ndarray, dt: float) -> np.ndarray:
    out = np.zeros_like(v)
    out[1:] = np.cumsum(0.5 * dt * (v[1:] + v[:-1]))
    return out


# }}}


# {{{ reports


@dataclass
class EstimateReport:
    name: str
    lhs: TimeSeries
    rhs: TimeSeries
    constant_used: float
    tol: np.ndarray = field(repr=False)
    #: ``rhs`` before multiplication by the constant (equal to ``rhs`` if none)
    rhs1: TimeSeries | None = field(default=None, repr=False)
    #: additional traces reported for information only
    extras: dict[str, TimeSeries] = field(default_factory=dict, repr=False)
    #: hypothesis flags (e.g. the discrete inequality assumed by Lemma 2)
    hypotheses: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def margin(self) -> np.ndarray:
        return self.rhs.values - self.lhs.values

    @property
    def min_margin(self) -> float:
        return float(np.min(self.margin))

    @property
    def hypotheses_ok(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def estimate_ok(self) -> bool:
        return bool(np.all(self.margin >= -self.tol))

    @property
    def passed(self) -> bool:
        return self.hypotheses_ok and self.estimate_ok

    @property
    def empirical_constant(self) -> float:
        """``max_{n >= 1} lhs / rhs1``; 0/0 entries are skipped."""
        base = self.rhs1 if self.rhs1 is not None else self.rhs
        lhs = self.lhs.values[1:]
        rhs = base.values[1:]
        ratios = []
        for a, b in zip(lhs, rhs):
            if b > 0:
                ratios.append(a / b)
            elif a > 0:
                ratios.append(math.inf)
        return max(ratios) if ratios else 0.0

    def summary(self) -> dict[str, str]:
        return {
            "name": self.name,
            "constant_used": f"{self.constant_used:.17g}",
            "empirical_constant": f"{self.empirical_constant:.17g}",
            "min_margin": f"{self.min_margin:.17g}",
            "pass": str(self.passed).lower(),
        }

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write("n, t, lhs, rhs, margin\n")
        t = self.lhs.t
        margin = self.margin
        for n in range(t.size):
            buf.write(
                f"{n}, {t[n]:.17g}, {self.lhs.values[n]:.17g}, "
                f"{self.rhs.values[n]:.17g}, {margin[n]:.17g}\n"
            )
        for key, value in self.summary().items():
            buf.write(f"## {key} = {value}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def _running_tol(rhs: np.ndarray, scale: float) -> np.ndarray:
    return scale * np.maximum.accumulate(np.maximum(np.abs(rhs), 1.0))


def _report(name, lhs, rhs1, constant, tol, **kwargs) -> EstimateReport:
    rhs = TimeSeries(rhs1.grid, constant * rhs1.values)
    return EstimateReport(
        name, lhs, rhs, float(constant), _running_tol(rhs.values, tol), rhs1=rhs1, **kwargs
    )


# }}}


# {{{ lemmas


def check_lemma1(v: TimeSeries, alpha: AlphaLike, tol: float = 1.0e-10) -> EstimateReport:
    """Discrete form of ``v d^a v >= (1/2) d^a (v^2)`` with L1 derivatives.

    ``lhs = (1/2) L1(v^2)``, ``rhs = v L1(v)``. Uses an absolute tolerance,
    since both sides may be negative or vanish.
    """
    a = _as_alpha(alpha)
    lhs = 0.5 * caputo_l1(v * v, a)
    rhs = v * caputo_l1(v, a)
    return EstimateReport("lemma1", lhs, rhs, 1.0, np.full(len(v), tol), rhs1=rhs)


def check_lemma2(
    y: TimeSeries,
    c1: float,
    c2: TimeSeries,
    alpha: AlphaLike,
    tol: float = DEFAULT_TOL,
    hypothesis_tol: float = 1.0e-10,
) -> EstimateReport:
    """Fractional Gronwall bound.

    If ``L1(y) <= c1 y + c2`` (checked on the grid), then
    ``y(t) <= y(0) E_a(c1 t^a) + Gamma(a) E_{a,a}(c1 t^a) D^{-a} c2(t)``.
    """
    a = _as_alpha(alpha)
    t = y.t
    z = c1 * t**a
    e1 = np.array([ml_one(a, zi) for zi in z])
    e2 = np.array([ml_two(a, a, zi) for zi in z])
    bound = y.values[0] * e1 + gamma_fn(a) * e2 * rl_integral(c2, a).values
    rhs1 = TimeSeries(y.grid, bound)

    dy = caputo_l1(y, a).values[1:]
    allowed = c1 * y.values[1:] + c2.values[1:]
    scale = np.maximum(1.0, np.abs(allowed))
    hyp = {
        "y >= 0": bool(np.all(y.values >= 0)),
        "c1 > 0": bool(c1 > 0),
        "c2 >= 0": bool(np.all(c2.values >= 0)),
        "L1(y) <= c1 y + c2": bool(np.all(dy <= allowed + hypothesis_tol * scale)),
    }
    return _report("lemma2", y, rhs1, 1.0, tol, hypotheses=hyp)


# }}}


# {{{ theorems


def _expect(field: SolutionField, spec: ProblemSpec, kind: EquationKind, bc: BCKind) -> None:
    if field.kind is not kind or field.bc_kind is not bc:
        raise ValueError(
            f"expected a {kind.value}/{bc.value} field, got {field.kind.value}/{field.bc_kind.value}"
        )
    if spec.kind is not kind or spec.bc.kind is not bc:
        raise ValueError(f"expected a {kind.value}/{bc.value} problem")


def _c1(spec: ProblemSpec, grid: UniformGrid) -> float:
    if spec.coefficients.c1 is not None:
        return float(spec.coefficients.c1)
    return validate(spec, grid).constants["c1"]


def theorem1_constant(l: float, c1: float) -> float:
    """``M = max(l^2 / (2 c1), 1) / min(1, c1)``."""
    return max(l * l / (2.0 * c1), 1.0) / min(1.0, c1)


def _diffusion_lhs(field: SolutionField, alpha: float) -> TimeSeries:
    nt = norms(field)
    return nt.l2_sq + rl_integral(nt.grad_sq, alpha)


def check_theorem1(
    field: SolutionField, spec: ProblemSpec, constant: float | None = None, tol: float = DEFAULT_TOL
) -> EstimateReport:
    """Estimate for the Dirichlet diffusion problem with the explicit constant."""
    _expect(field, spec, EquationKind.Diffusion, BCKind.Dirichlet)
    g = field.grid
    a = spec.alpha
    M = theorem1_constant(spec.l, _c1(spec, g)) if constant is None else constant

    lhs = _diffusion_lhs(field, a)
    u0 = l2_sq(field.values[0], g.h)
    rhs1 = rl_integral(forcing_sq(spec, g), a) + u0
    return _report("theorem1", lhs, rhs1, M, tol)


def check_theorem2(
    field: SolutionField, spec: ProblemSpec, constant: float | None = None, tol: float = DEFAULT_TOL
) -> EstimateReport:
    """Estimate for the Robin diffusion problem (calibrated constant)."""
    _expect(field, spec, EquationKind.Diffusion, BCKind.Robin)
    g = field.grid
    a = spec.alpha
    if constant is None:
        constant = calibrate()["theorem2"]

    lhs = _diffusion_lhs(field, a)
    mu1 = TimeSeries(g, eval_time(spec.bc.mu1, g.t) ** 2)
    mu2 = TimeSeries(g, eval_time(spec.bc.mu2, g.t) ** 2)
    data = forcing_sq(spec, g) + mu1 + mu2
    rhs1 = rl_integral(data, a) + l2_sq(field.values[0], g.h)
    return _report("theorem2", lhs, rhs1, constant, tol)


def _wave_parts(field: SolutionField, spec: ProblemSpec):
    g = field.grid
    a = spec.alpha
    nt = norms(field)
    ut = velocity_sq(field, spec.init.u1)
    lhs = rl_integral(ut, 1.0 - a) + nt.w21
    printed = rl_integral(nt.l2_sq, 1.0 - a) + nt.w21
    base = (
        _cumulative_trapz(forcing_sq(spec, g).values, g.tau)
        + ut.values[0]
        + nt.w21.values[0]
    )
    return lhs, printed, base


_PRINTED_NOTE = (
    "printed left side uses D^(a-1)||u||^2; the derivation bounds "
    "D^(a-1)||u_t||^2, which is the one checked"
)


def check_theorem3(
    field: SolutionField, spec: ProblemSpec, constant: float | None = None, tol: float = DEFAULT_TOL
) -> EstimateReport:
    """Estimate for the Dirichlet wave problem (calibrated constant).

    The checked left side is ``D^{a-1}||u_t||^2 + ||u||_{W}^2``; the variant
    with ``||u||`` in place of ``||u_t||`` is kept in ``extras["printed_lhs"]``.
    """
    _expect(field, spec, EquationKind.Wave, BCKind.Dirichlet)
    if constant is None:
        constant = calibrate()["theorem3"]
    lhs, printed, base = _wave_parts(field, spec)
    rhs1 = TimeSeries(field.grid, base)
    rep = _report("theorem3", lhs, rhs1, constant, tol, extras={"printed_lhs": printed})
    rep.notes.append(_PRINTED_NOTE)
    return rep


def check_theorem4(
    field: SolutionField, spec: ProblemSpec, constant: float | None = None, tol: float = DEFAULT_TOL
) -> EstimateReport:
    """Estimate for the Robin wave problem (calibrated constant)."""
    _expect(field, spec, EquationKind.Wave, BCKind.Robin)
    g = field.grid
    if constant is None:
        constant = calibrate()["theorem4"]
    lhs, printed, base = _wave_parts(field, spec)

    mu1 = eval_time(spec.bc.mu1, g.t)
    mu2 = eval_time(spec.bc.mu2, g.t)
    dmu1 = np.gradient(mu1, g.tau, edge_order=2)
    dmu2 = np.gradient(mu2, g.tau, edge_order=2)
    base = (
        base
        + _cumulative_trapz(dmu1**2 + dmu2**2, g.tau)
        + np.max(mu1**2)
        + np.max(mu2**2)
    )
    rhs1 = TimeSeries(g, base)
    rep = _report("theorem4", lhs, rhs1, constant, tol, extras={"printed_lhs": printed})
    rep.notes.append(_PRINTED_NOTE)
    return rep


def check_theorem(
    field: SolutionField, spec: ProblemSpec, constant: float | None = None, tol: float = DEFAULT_TOL
) -> EstimateReport:
    """Run the estimate matching the problem's equation and boundary kind."""
    fn = {
        "theorem1": check_theorem1,
        "theorem2": check_theorem2,
        "theorem3": check_theorem3,
        "theorem4": check_theorem4,
    }[spec.theorem]
    return fn(field, spec, constant=constant, tol=tol)


# }}}


# {{{ auxiliary inequalities


def _forward_grad_sq(u: np.ndarray, h: float) -> np.ndarray:
    d = np.diff(u, axis=-1) / h
    return h * np.sum(d * d, axis=-1)


def check_poincare(field: SolutionField, tol: float = 1.0e-12) -> EstimateReport:
    """``||u||^2 <= (l^2 / 2) ||u_x||^2`` on every row of a Dirichlet field.

    ``u_x`` is the forward difference here: with it (and the trapezoid rule
    for ``||u||``) the discrete inequality holds for every grid function
    vanishing at both ends.
    """
    g = field.grid
    u = field.values
    lhs = TimeSeries(g, l2_sq(u, g.h))
    rhs = TimeSeries(g, 0.5 * g.l**2 * _forward_grad_sq(u, g.h))
    ends = float(np.max(np.abs(u[:, [0, -1]])))
    hyp = {"u(0) = u(l) = 0": ends <= 1.0e-14 * max(1.0, float(np.max(np.abs(u))))}
    return EstimateReport(
        "poincare", lhs, rhs, 0.5 * g.l**2, _running_tol(rhs.values, tol), hypotheses=hyp
    )


def check_trace(u: np.ndarray, l: float, eps: float, tol: float = 1.0e-12) -> dict[str, float]:
    """``u(0)^2, u(l)^2 <= eps ||u_x||^2 + (1/eps + 1/l) ||u||^2`` for grid functions.

    *u* may be one grid function or a stack of them (last axis is space).
    Returns the worst margin and whether it is within tolerance.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    h = l / (u.shape[-1] - 1)
    lhs = np.maximum(u[:, 0] ** 2, u[:, -1] ** 2)
    rhs = eps * _forward_grad_sq(u, h) + (1.0 / eps + 1.0 / l) * l2_sq(u, h)
    margin = rhs - lhs
    scale = np.maximum(1.0, rhs)
    return {
        "min_margin": float(np.min(margin)),
        "passed": bool(np.all(margin >= -tol * scale)),
    }


def check_ordering(hs: TimeSeries, alpha: AlphaLike, tol: float = 1.0e-9) -> EstimateReport:
    """``D^{-2a} h <= (t^a Gamma(a) / Gamma(2a)) D^{-a} h`` for ``h >= 0``."""
    a = _as_alpha(alpha)
    lhs = rl_integral(hs, 2.0 * a)
    factor = hs.t**a * gamma_fn(a) / gamma_fn(2.0 * a)
    rhs = TimeSeries(hs.grid, factor * rl_integral(hs, a).values)
    hyp = {"h >= 0": bool(np.all(hs.values >= 0))}
    return EstimateReport("ordering", lhs, rhs, 1.0, np.full(len(hs), tol), hypotheses=hyp)


def check_auxiliary(field: SolutionField, eps_values=(0.1, 1.0, 10.0)) -> dict:
    """Poincare (Dirichlet fields) and trace inequalities on every row of *field*."""
    out = {}
    if field.bc_kind is BCKind.Dirichlet:
        out["poincare"] = check_poincare(field)
    for eps in eps_values:
        out[f"trace(eps={eps:g})"] = check_trace(field.values, field.grid.l, eps)
    return out


# }}}


# {{{ calibration

#: Problems whose empirical constants fix the frozen constants.
CALIBRATION_SET = {
    "theorem2": "diffusion-robin-poly",
    "theorem3": "wave-dirichlet-poly",
    "theorem4": "wave-robin-poly",
}
CALIBRATION_ALPHA = 0.5
CALIBRATION_GRID = (64, 128)
CALIBRATION_FACTOR = 2.0


@functools.lru_cache(maxsize=8)
def calibrate(
    alpha: float = CALIBRATION_ALPHA,
    nx: int = CALIBRATION_GRID[0],
    nt: int = CALIBRATION_GRID[1],
    factor: float = CALIBRATION_FACTOR,
) -> dict[str, float]:
    """Frozen constants: ``factor`` times the empirical constant on the calibration set."""
    out = {}
    for theorem, name in CALIBRATION_SET.items():
        spec, _ = manufactured(name, alpha)
        field = solve(spec, spec.grid(nx, nt))
        rep = check_theorem(field, spec, constant=1.0)
        out[theorem] = factor * rep.empirical_constant
    return out


# }}}
