"""Boundary value problems, their hypotheses, and a manufactured-solution catalog.

A :class:`ProblemSpec` bundles the coefficients ``k, q, f``, the boundary
condition (homogeneous Dirichlet or Robin ``k u_x = beta_1 u - mu_1`` at
``x = 0``, ``-k u_x = beta_2 u - mu_2`` at ``x = l``), and the initial data.
All evaluables are plain vectorised callables: ``fn(x, t)`` for fields,
``fn(t)`` for boundary data, ``fn(x)`` for initial data.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import sympy as sp

from fracenergy.fractional_ops import FracOrder, UniformGrid, gamma_fn

__all__ = [
    "EquationKind",
    "BCKind",
    "Coefficients",
    "BoundaryCondition",
    "InitialData",
    "ProblemSpec",
    "HypothesisCheck",
    "ValidationReport",
    "validate",
    "manufactured",
    "CATALOG",
    "eval_field",
    "eval_time",
    "eval_space",
]

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]
TimeFn = Callable[[np.ndarray], np.ndarray]
SpaceFn = Callable[[np.ndarray], np.ndarray]


class EquationKind(enum.Enum):
    Diffusion = "diffusion"
    Wave = "wave"


class BCKind(enum.Enum):
    Dirichlet = "dirichlet"
    Robin = "robin"


def eval_field(fn: Field, x, t) -> np.ndarray:
    x, t = np.broadcast_arrays(np.asarray(x, dtype=np.float64), np.asarray(t, dtype=np.float64))
    return np.broadcast_to(np.asarray(fn(x, t), dtype=np.float64), x.shape).copy()


def eval_time(fn: TimeFn, t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return np.broadcast_to(np.asarray(fn(t), dtype=np.float64), t.shape).copy()


def eval_space(fn: SpaceFn, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.broadcast_to(np.asarray(fn(x), dtype=np.float64), x.shape).copy()


def _zero_field(x, t):
    return np.zeros(np.broadcast(x, t).shape)


# {{{ data types


@dataclass(frozen=True)
class Coefficients:
    """Coefficients and their declared bounds.

    Undeclared bounds (``None``) are inferred by :func:`validate` from samples.
    """

    k: Field
    q: Field
    f: Field
    c1: float | None = None
    c2: float | None = None
    m1: float | None = None
    m2: float | None = None
    c3: float | None = None


@dataclass(frozen=True)
class BoundaryCondition:
    kind: BCKind = BCKind.Dirichlet
    beta1: TimeFn | None = None
    beta2: TimeFn | None = None
    mu1: TimeFn | None = None
    mu2: TimeFn | None = None
    #: cap on ``|beta_i|`` (diffusion) or lower bound of ``beta_i`` (wave)
    beta: float | None = None
    #: cap on ``|beta_i'|`` (wave)
    c4: float | None = None

    def __post_init__(self) -> None:
        if self.kind is BCKind.Robin:
            missing = [n for n in ("beta1", "beta2", "mu1", "mu2") if getattr(self, n) is None]
            if missing:
                raise ValueError(f"Robin condition is missing {', '.join(missing)}")


@dataclass(frozen=True)
class InitialData:
    u0: SpaceFn
    u1: SpaceFn | None = None


@dataclass(frozen=True)
class ProblemSpec:
    kind: EquationKind
    order: FracOrder
    l: float
    T: float
    coefficients: Coefficients
    bc: BoundaryCondition
    init: InitialData
    #: free-form provenance (catalog name and parameters, or problem file text)
    source: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.order, FracOrder):
            object.__setattr__(self, "order", FracOrder(self.order))
        if not (self.l > 0 and self.T > 0):
            raise ValueError(f"domain sizes must be positive: l={self.l}, T={self.T}")
        has_u1 = self.init.u1 is not None
        if has_u1 != (self.kind is EquationKind.Wave):
            raise ValueError("u1 must be given for wave problems and only for them")

    @property
    def alpha(self) -> float:
        return self.order.alpha

    @property
    def theorem(self) -> str:
        return {
            (EquationKind.Diffusion, BCKind.Dirichlet): "theorem1",
            (EquationKind.Diffusion, BCKind.Robin): "theorem2",
            (EquationKind.Wave, BCKind.Dirichlet): "theorem3",
            (EquationKind.Wave, BCKind.Robin): "theorem4",
        }[self.kind, self.bc.kind]

    @property
    def digest(self) -> str:
        return hashlib.sha256(f"{self.source}|alpha={self.alpha!r}".encode()).hexdigest()[:16]

    def grid(self, nx: int, nt: int) -> UniformGrid:
        return UniformGrid(self.l, self.T, nx, nt)

    def scaled(self, s: float) -> ProblemSpec:
        """Multiply all data (``f``, ``mu_i``, ``u0``, ``u1``) by *s*."""
        c = self.coefficients
        coeffs = replace(c, f=lambda x, t, f=c.f: s * eval_field(f, x, t))
        bc = self.bc
        if bc.kind is BCKind.Robin:
            bc = replace(
                bc,
                mu1=lambda t, g=bc.mu1: s * eval_time(g, t),
                mu2=lambda t, g=bc.mu2: s * eval_time(g, t),
            )
        init = InitialData(
            u0=lambda x, g=self.init.u0: s * eval_space(g, x),
            u1=None if self.init.u1 is None else (lambda x, g=self.init.u1: s * eval_space(g, x)),
        )
        return replace(
            self, coefficients=coeffs, bc=bc, init=init, source=f"{self.source}|scaled={s!r}"
        )

    def with_data(self, *, f=None, u0=None, u1=None, mu1=None, mu2=None, tag: str = "") -> ProblemSpec:
        """Copy with some data replaced (coefficients and bounds kept)."""
        coeffs = self.coefficients if f is None else replace(self.coefficients, f=f)
        bc = self.bc
        if mu1 is not None or mu2 is not None:
            bc = replace(bc, mu1=mu1 or bc.mu1, mu2=mu2 or bc.mu2)
        init = InitialData(
            u0=self.init.u0 if u0 is None else u0,
            u1=self.init.u1 if u1 is None else u1,
        )
        return replace(self, coefficients=coeffs, bc=bc, init=init, source=f"{self.source}|{tag}")

    def with_order(self, alpha: float) -> ProblemSpec:
        return replace(self, order=FracOrder(alpha), source=f"{self.source}|alpha={alpha!r}")


# }}}


# {{{ validation


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    #: value at the worst node (the one closest to violating)
    worst_value: float = math.nan
    #: ``(x, t)`` (or ``(nan, t)`` for boundary data) of the worst node
    worst_node: tuple[float, float] = (math.nan, math.nan)
    bound: float = math.nan


@dataclass
class ValidationReport:
    theorem: str
    checks: list[HypothesisCheck] = field(default_factory=list)
    #: effective constants (declared, or inferred from samples)
    constants: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> HypothesisCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        lines = [f"hypotheses for {self.theorem}:"]
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            lines.append(
                f"  [{mark}] {c.name}: worst {c.worst_value:.6g} at "
                f"(x={c.worst_node[0]:.6g}, t={c.worst_node[1]:.6g}), bound {c.bound:.6g}"
            )
        return "\n".join(lines)


def _time_derivative(values: np.ndarray, dt: float) -> np.ndarray:
    """Centered differences along axis 0, one-sided second order at the ends."""
    return np.gradient(values, dt, axis=0, edge_order=2)


def _lower(name, values, X, Tm, bound, strict_positive=False) -> HypothesisCheck:
    i = np.unravel_index(np.argmin(values), values.shape)
    worst = float(values[i])
    ok = worst >= bound - 1.0e-12 * max(1.0, abs(bound))
    if strict_positive:
        ok = ok and bound > 0
    return HypothesisCheck(name, bool(ok), worst, (float(X[i]), float(Tm[i])), float(bound))


def _upper(name, values, X, Tm, bound) -> HypothesisCheck:
    i = np.unravel_index(np.argmax(values), values.shape)
    worst = float(values[i])
    ok = worst <= bound + 1.0e-12 * max(1.0, abs(bound))
    return HypothesisCheck(name, bool(ok), worst, (float(X[i]), float(Tm[i])), float(bound))


def validate(spec: ProblemSpec, grid: UniformGrid, oversample: int = 4) -> ValidationReport:
    """Sample every hypothesis of the matching theorem on a refined grid.

    Violations become report entries; nothing is raised.
    """
    dense = UniformGrid(spec.l, spec.T, grid.nx * oversample, grid.nt * oversample)
    x, t = dense.x, dense.t
    Tm, X = np.meshgrid(t, x, indexing="ij")
    c = spec.coefficients
    report = ValidationReport(spec.theorem)
    consts = report.constants

    k = eval_field(c.k, X, Tm)
    q = eval_field(c.q, X, Tm)

    c1 = float(np.min(k)) if c.c1 is None else float(c.c1)
    consts["c1"] = c1
    report.checks.append(_lower("k >= c1 > 0", k, X, Tm, c1, strict_positive=True))

    if spec.kind is EquationKind.Diffusion:
        report.checks.append(_lower("q >= 0", q, X, Tm, 0.0))
    else:
        c2 = float(np.max(k)) if c.c2 is None else float(c.c2)
        m1 = float(np.min(q)) if c.m1 is None else float(c.m1)
        m2 = float(np.max(q)) if c.m2 is None else float(c.m2)
        kt = np.abs(_time_derivative(k, dense.tau))
        qt = np.abs(_time_derivative(q, dense.tau))
        c3 = float(max(np.max(kt), np.max(qt))) if c.c3 is None else float(c.c3)
        consts.update(c2=c2, m1=m1, m2=m2, c3=c3)
        report.checks.append(_upper("k <= c2", k, X, Tm, c2))
        report.checks.append(_lower("q >= m1 > 0", q, X, Tm, m1, strict_positive=True))
        report.checks.append(_upper("q <= m2", q, X, Tm, m2))
        report.checks.append(_upper("|k_t| <= c3", kt, X, Tm, c3))
        report.checks.append(_upper("|q_t| <= c3", qt, X, Tm, c3))

    bc = spec.bc
    if bc.kind is BCKind.Robin:
        nanx = np.full_like(t, math.nan)
        b1 = eval_time(bc.beta1, t)
        b2 = eval_time(bc.beta2, t)
        if spec.kind is EquationKind.Diffusion:
            babs = np.maximum(np.abs(b1), np.abs(b2))
            beta = float(np.max(babs)) if bc.beta is None else float(bc.beta)
            consts["beta"] = beta
            report.checks.append(_upper("|beta_i| <= beta", babs, nanx, t, beta))
        else:
            bmin = np.minimum(b1, b2)
            beta = float(np.min(bmin)) if bc.beta is None else float(bc.beta)
            d1 = np.abs(_time_derivative(b1, dense.tau))
            d2 = np.abs(_time_derivative(b2, dense.tau))
            dmax = np.maximum(d1, d2)
            c4 = float(np.max(dmax)) if bc.c4 is None else float(bc.c4)
            consts.update(beta=beta, c4=c4)
            report.checks.append(_lower("beta_i >= beta > 0", bmin, nanx, t, beta, strict_positive=True))
            report.checks.append(_upper("|beta_i'| <= c4", dmax, nanx, t, c4))
    else:
        ends = eval_space(spec.init.u0, np.array([0.0, spec.l]))
        worst = float(np.max(np.abs(ends)))
        report.checks.append(
            HypothesisCheck(
                "u0(0) = u0(l) = 0", worst <= 1.0e-12, worst,
                (0.0 if abs(ends[0]) >= abs(ends[1]) else spec.l, 0.0), 1.0e-12,
            )
        )

    # data must at least be finite on the grid
    fvals = eval_field(c.f, X, Tm)
    finite = bool(np.all(np.isfinite(fvals)) and np.all(np.isfinite(k)) and np.all(np.isfinite(q)))
    report.checks.append(HypothesisCheck("coefficients finite", finite, math.nan))

    return report


# }}}


# {{{ manufactured solutions

_x, _t = sp.symbols("x t", real=True)


@dataclass(frozen=True)
class _Entry:
    kind: EquationKind
    bc: BCKind
    #: coefficients of the time profile, lowest power first
    time_poly: tuple[float, ...]
    space: Callable[[sp.Expr], sp.Expr]
    k: Callable[[sp.Expr], sp.Expr]
    q: Callable[[sp.Expr], sp.Expr]
    beta: float = 1.0
    c1: float = 1.0
    description: str = ""


def _sin_mode(l):
    return sp.sin(sp.pi * _x / l)


def _bump(l):
    return 1 + _x * (l - _x)


CATALOG: dict[str, _Entry] = {
    "diffusion-dirichlet-poly": _Entry(
        EquationKind.Diffusion, BCKind.Dirichlet, (1.0, 0.0, 1.0),
        _sin_mode, lambda l: sp.Integer(1), lambda l: sp.Integer(1),
        description="u = (1 + t^2) sin(pi x / l), k = 1, q = 1",
    ),
    "diffusion-robin-poly": _Entry(
        EquationKind.Diffusion, BCKind.Robin, (1.0, 0.0, 1.0),
        _bump, lambda l: sp.Integer(1), lambda l: sp.Integer(1),
        description="u = (1 + t^2)(1 + x (l - x)), k = 1, q = 1, beta_i = 1",
    ),
    "wave-dirichlet-poly": _Entry(
        EquationKind.Wave, BCKind.Dirichlet, (1.0, 0.0, 1.0),
        _sin_mode, lambda l: sp.Integer(1), lambda l: sp.Integer(1),
        description="u = (1 + t^2) sin(pi x / l), k = 1, q = 1, u1 = 0",
    ),
    "wave-robin-poly": _Entry(
        EquationKind.Wave, BCKind.Robin, (1.0, 0.0, 1.0),
        _bump, lambda l: sp.Integer(1), lambda l: sp.Integer(1),
        description="u = (1 + t^2)(1 + x (l - x)), k = 1, q = 1, beta_i = 1, u1 = 0",
    ),
    "diffusion-varcoef": _Entry(
        EquationKind.Diffusion, BCKind.Dirichlet, (1.0, 0.0, 1.0),
        _sin_mode,
        lambda l: 1 + sp.Rational(1, 2) * sp.sin(sp.pi * _x / l) * sp.exp(-_t),
        lambda l: _x * _t,
        description="u = (1 + t^2) sin(pi x / l), k = 1 + sin(pi x / l) e^-t / 2, q = x t",
    ),
}


def _caputo_of_poly(coeffs, alpha: float, wave: bool) -> sp.Expr:
    """Caputo derivative of ``sum_j coeffs[j] t^j`` of order ``alpha`` (``1 + alpha`` if wave).

    Uses ``d^a t^b = Gamma(b + 1) / Gamma(b + 1 - a) t^(b - a)``; the powers
    annihilated by the integer part of the derivative drop out.
    """
    order = 1.0 + alpha if wave else alpha
    first = 2 if wave else 1
    out = sp.Integer(0)
    for j, cj in enumerate(coeffs):
        if j < first or cj == 0:
            continue
        factor = gamma_fn(j + 1.0) / gamma_fn(j + 1.0 - order)
        out += sp.Float(cj * factor, 17) * _t ** sp.Float(j - order, 17)
    return out


def _lambdify_xt(expr) -> Field:
    fn = sp.lambdify((_x, _t), expr, modules="numpy")
    return lambda x, t: fn(np.asarray(x, dtype=np.float64), np.asarray(t, dtype=np.float64))


def _lambdify_t(expr) -> TimeFn:
    fn = sp.lambdify(_t, expr, modules="numpy")
    return lambda t: fn(np.asarray(t, dtype=np.float64))


def _lambdify_x(expr) -> SpaceFn:
    fn = sp.lambdify(_x, expr, modules="numpy")
    return lambda x: fn(np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class ManufacturedSolution:
    """Closed-form solution of a catalog problem, with the derivatives used by tests."""

    u: Field
    u_t: Field
    u_x: Field
    expr: sp.Expr = field(repr=False)

    def __call__(self, x, t):
        return eval_field(self.u, x, t)


def manufactured(
    name: str, alpha: float | FracOrder, l: float = 1.0, T: float = 1.0
) -> tuple[ProblemSpec, ManufacturedSolution]:
    """Build a catalog problem whose exact solution is known in closed form.

    The forcing is ``f = d_t^order u - (k u_x)_x + q u``, formed symbolically
    with the analytic Caputo rule for powers of ``t``; for Robin entries
    ``mu_1 = beta_1 u(0,t) - k u_x(0,t)`` and ``mu_2 = beta_2 u(l,t) + k u_x(l,t)``.
    """
    if name not in CATALOG:
        raise KeyError(f"unknown catalog problem {name!r}; available: {', '.join(CATALOG)}")
    entry = CATALOG[name]
    order = alpha if isinstance(alpha, FracOrder) else FracOrder(alpha)
    a = order.alpha
    wave = entry.kind is EquationKind.Wave

    L = sp.Float(l, 17)
    profile = sum(sp.Float(c, 17) * _t**j for j, c in enumerate(entry.time_poly))
    space = entry.space(L)
    u = profile * space
    k = entry.k(L)
    q = entry.q(L)

    f = _caputo_of_poly(entry.time_poly, a, wave) * space - sp.diff(k * sp.diff(u, _x), _x) + q * u

    coeffs = Coefficients(
        k=_lambdify_xt(k), q=_lambdify_xt(q), f=_lambdify_xt(f), c1=entry.c1,
    )
    if entry.bc is BCKind.Robin:
        beta = sp.Float(entry.beta, 17)
        ux = sp.diff(u, _x)
        mu1 = sp.simplify((beta * u - k * ux).subs(_x, 0))
        mu2 = sp.simplify((beta * u + k * ux).subs(_x, L))
        bc = BoundaryCondition(
            BCKind.Robin,
            beta1=_lambdify_t(beta), beta2=_lambdify_t(beta),
            mu1=_lambdify_t(mu1), mu2=_lambdify_t(mu2),
            beta=entry.beta,
        )
    else:
        bc = BoundaryCondition(BCKind.Dirichlet)

    init = InitialData(
        u0=_lambdify_x(u.subs(_t, 0)),
        u1=_lambdify_x(sp.diff(u, _t).subs(_t, 0)) if wave else None,
    )
    spec = ProblemSpec(
        entry.kind, order, float(l), float(T), coeffs, bc, init,
        source=f"catalog:{name}|l={l!r}|T={T!r}",
    )
    exact = ManufacturedSolution(
        u=_lambdify_xt(u),
        u_t=_lambdify_xt(sp.diff(u, _t)),
        u_x=_lambdify_xt(sp.diff(u, _x)),
        expr=u,
    )
    return spec, exact


# }}}
