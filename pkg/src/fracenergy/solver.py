"""Implicit finite-difference solvers for the diffusion and diffusion-wave problems.

Both solvers march ``t_1, ..., t_Nt`` with one tridiagonal solve per step:

* time: L1 history for ``d^alpha u`` (diffusion) or for the velocity chain
  ``w^{j+1/2} = (u^{j+1} - u^j) / tau``, ``w^{-1/2} = u_1`` (wave);
* space: conservative flux ``(a_i (u_{i+1} - u_i) - a_{i-1} (u_i - u_{i-1})) / h^2``
  with ``a_i = k(x_i + h/2, t)``; at the new level ``t_n`` for diffusion, and
  averaged over levels ``n - 1, n`` at ``t_{n-1/2}`` for the wave problem;
* Robin ends: the equation integrated over the half cells ``[0, h/2]`` and
  ``[l - h/2, l]`` with the boundary flux taken from the Robin condition.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np

from fracenergy.errors import HypothesisError, NumericalError
from fracenergy.fractional_ops import UniformGrid, gamma_fn, l1_weights
from fracenergy.problem_spec import (
    BCKind,
    EquationKind,
    ProblemSpec,
    eval_field,
    eval_space,
    eval_time,
    validate,
)

__all__ = [
    "TridiagonalSystem",
    "SolutionField",
    "thomas_solve",
    "solve",
    "solve_diffusion",
    "solve_wave",
]


@dataclass
class TridiagonalSystem:
    """Rows ``sub[i] u[i-1] + diag[i] u[i] + sup[i] u[i+1] = rhs[i]``.

    All arrays have the full length; ``sub[0]`` and ``sup[-1]`` are ignored.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def dominance_gap(self) -> float:
        """``min_i |diag_i| - |sub_i| - |sup_i|`` (positive if strictly dominant)."""
        off = np.abs(self.sub).copy()
        off[0] = 0.0
        up = np.abs(self.sup).copy()
        up[-1] = 0.0
        return float(np.min(np.abs(self.diag) - off - up))

    def matvec(self, u: np.ndarray) -> np.ndarray:
        out = self.diag * u
        out[1:] += self.sub[1:] * u[:-1]
        out[:-1] += self.sup[:-1] * u[1:]
        return out


def thomas_solve(sys: TridiagonalSystem) -> np.ndarray:
    """Solve a tridiagonal system by forward elimination and back substitution.

    :raises NumericalError: on a zero pivot, with its row index.
    """
    a, b, c, d = sys.sub, sys.diag, sys.sup, sys.rhs
    n = b.size
    cp = np.empty(n)
    dp = np.empty(n)

    # overflow surfaces as non-finite output, which callers report per step
    with np.errstate(over="ignore", invalid="ignore"):
        if b[0] == 0.0:
            raise NumericalError("zero pivot in tridiagonal solve at row 0", index=0)
        cp[0] = c[0] / b[0]
        dp[0] = d[0] / b[0]
        for i in range(1, n):
            m = b[i] - a[i] * cp[i - 1]
            if m == 0.0:
                raise NumericalError(f"zero pivot in tridiagonal solve at row {i}", index=i)
            cp[i] = c[i] / m
            dp[i] = (d[i] - a[i] * dp[i - 1]) / m

        x = np.empty(n)
        x[-1] = dp[-1]
        for i in range(n - 2, -1, -1):
            x[i] = dp[i] - cp[i] * x[i + 1]
    return x


# {{{ solution field


@dataclass
class SolutionField:
    grid: UniformGrid
    values: np.ndarray = field(repr=False)
    kind: EquationKind
    alpha: float
    bc_kind: BCKind
    scheme: str
    spec_hash: str = ""

    @property
    def u0(self) -> np.ndarray:
        return self.values[0]

    def __sub__(self, other: SolutionField) -> SolutionField:
        if self.values.shape != other.values.shape:
            raise ValueError("cannot subtract fields on different grids")
        return SolutionField(
            self.grid, self.values - other.values, self.kind, self.alpha,
            self.bc_kind, self.scheme, f"{self.spec_hash}-{other.spec_hash}",
        )

    def metadata(self) -> dict[str, str]:
        g = self.grid
        return {
            "kind": self.kind.value,
            "bc": self.bc_kind.value,
            "alpha": f"{self.alpha:.17g}",
            "l": f"{g.l:.17g}",
            "T": f"{g.T:.17g}",
            "nx": str(g.nx),
            "nt": str(g.nt),
            "scheme": self.scheme,
            "spec_hash": self.spec_hash,
        }

    def to_csv(self, path=None) -> str:
        """One ``t, x, u`` row per node, then ``## key = value`` metadata lines."""
        buf = io.StringIO()
        buf.write("# t, x, u\n")
        t, x = self.grid.t, self.grid.x
        for n in range(t.size):
            tn = f"{t[n]:.17g}"
            for i in range(x.size):
                buf.write(f"{tn}, {x[i]:.17g}, {self.values[n, i]:.17g}\n")
        for key, value in self.metadata().items():
            buf.write(f"## {key} = {value}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text: str | os.PathLike) -> SolutionField:
        """Read a field from CSV text or from a file path."""
        if isinstance(path_or_text, str) and "\n" in path_or_text:
            text = path_or_text
        else:
            with open(path_or_text, encoding="utf-8") as fh:
                text = fh.read()
        meta = {}
        rows = []
        for line in text.splitlines():
            if line.startswith("##"):
                key, _, value = line[2:].partition("=")
                meta[key.strip()] = value.strip()
            elif line.startswith("#") or not line.strip():
                continue
            else:
                rows.append([float(v) for v in line.split(",")])
        grid = UniformGrid(float(meta["l"]), float(meta["T"]), int(meta["nx"]), int(meta["nt"]))
        u = np.array(rows)[:, 2].reshape(grid.nt + 1, grid.nx + 1)
        return cls(
            grid, u, EquationKind(meta["kind"]), float(meta["alpha"]),
            BCKind(meta["bc"]), meta["scheme"], meta.get("spec_hash", ""),
        )


# }}}


# {{{ assembly


def _check_inputs(spec: ProblemSpec, grid: UniformGrid, kind: EquationKind, check: bool) -> None:
    if spec.kind is not kind:
        raise ValueError(f"expected a {kind.value} problem, got {spec.kind.value}")
    if grid.nx < 4 or grid.nt < 4:
        raise ValueError(f"grid too coarse: nx={grid.nx}, nt={grid.nt} (need >= 4)")
    if abs(grid.l - spec.l) > 1e-14 * spec.l or abs(grid.T - spec.T) > 1e-14 * spec.T:
        raise ValueError("grid domain does not match the problem domain")
    if check:
        report = validate(spec, grid)
        if not report.passed:
            raise HypothesisError(report)


def _spatial_system(spec: ProblemSpec, grid: UniformGrid, tn: float, mass: float) -> TridiagonalSystem:
    """Rows for ``mass * u - (k u_x)_x + q u = f`` at time *tn* (rhs holds ``f``).

    Robin rows are the half-cell balances scaled by ``2 / h``.
    """
    h = grid.h
    x = grid.x
    c = spec.coefficients
    a = eval_field(c.k, x[:-1] + 0.5 * h, tn)
    q = eval_field(c.q, x, tn)
    f = eval_field(c.f, x, tn)

    n = x.size
    sub = np.zeros(n)
    sup = np.zeros(n)
    diag = mass + q
    h2 = h * h
    sub[1:-1] = -a[:-1] / h2
    sup[1:-1] = -a[1:] / h2
    diag[1:-1] += (a[:-1] + a[1:]) / h2
    rhs = f.copy()

    bc = spec.bc
    if bc.kind is BCKind.Dirichlet:
        diag[0] = diag[-1] = 1.0
        sup[0] = sub[-1] = 0.0
        rhs[0] = rhs[-1] = 0.0
    else:
        b1 = float(eval_time(bc.beta1, tn))
        b2 = float(eval_time(bc.beta2, tn))
        m1 = float(eval_time(bc.mu1, tn))
        m2 = float(eval_time(bc.mu2, tn))
        diag[0] += 2.0 * a[0] / h2 + 2.0 * b1 / h
        sup[0] = -2.0 * a[0] / h2
        rhs[0] += 2.0 * m1 / h
        diag[-1] += 2.0 * a[-1] / h2 + 2.0 * b2 / h
        sub[-1] = -2.0 * a[-1] / h2
        rhs[-1] += 2.0 * m2 / h

    return TridiagonalSystem(sub, diag, sup, rhs)


def _history(weights: np.ndarray, diffs: np.ndarray, n: int) -> np.ndarray:
    """``sum_{j=0}^{n-2} weights[n-1-j] * diffs[j]`` (zero for ``n = 1``)."""
    if n < 2:
        return np.zeros(diffs.shape[1])
    return weights[n - 1 : 0 : -1] @ diffs[: n - 1]


def _finish_step(sys: TridiagonalSystem, n: int, bc: BCKind) -> np.ndarray:
    u = thomas_solve(sys)
    if not np.all(np.isfinite(u)):
        raise NumericalError(f"non-finite values at time step {n}", step=n)
    if bc is BCKind.Dirichlet:
        u[0] = u[-1] = 0.0
    return u


def solve_diffusion(spec: ProblemSpec, grid: UniformGrid, *, check: bool = True) -> SolutionField:
    """Fully implicit L1 scheme for the time-fractional diffusion problem."""
    _check_inputs(spec, grid, EquationKind.Diffusion, check)
    alpha = spec.alpha
    tau = grid.tau
    coef = tau**-alpha / gamma_fn(2.0 - alpha)
    b = l1_weights(alpha, grid.nt)

    u = np.empty((grid.nt + 1, grid.nx + 1))
    u[0] = eval_space(spec.init.u0, grid.x)
    if spec.bc.kind is BCKind.Dirichlet:
        u[0, 0] = u[0, -1] = 0.0
    du = np.empty((grid.nt, grid.nx + 1))

    t = grid.t
    for n in range(1, grid.nt + 1):
        sys = _spatial_system(spec, grid, t[n], coef)
        hist = _history(b, du, n)
        sys.rhs += coef * (u[n - 1] - hist)
        if spec.bc.kind is BCKind.Dirichlet:
            sys.rhs[0] = sys.rhs[-1] = 0.0
        u[n] = _finish_step(sys, n, spec.bc.kind)
        du[n - 1] = u[n] - u[n - 1]

    return SolutionField(grid, u, spec.kind, alpha, spec.bc.kind, "l1-implicit", spec.digest)


def solve_wave(spec: ProblemSpec, grid: UniformGrid, *, check: bool = True) -> SolutionField:
    """Implicit scheme for the diffusion-wave problem (order ``1 + alpha``).

    The L1 sum over the velocities ``w^{j+1/2}`` approximates the derivative at
    ``t_{n-1/2}``, so the spatial operator is the average of levels ``n - 1``
    and ``n`` with ``k, q, f`` and the boundary data taken at ``t_{n-1/2}``.
    Multiplying a step by ``u^n - u^{n-1}`` then telescopes the ``k u_x^2``
    and ``q u^2`` terms exactly, as in the continuous energy identity.
    """
    _check_inputs(spec, grid, EquationKind.Wave, check)
    if spec.init.u1 is None:
        raise ValueError("wave problems need the initial velocity u1")
    alpha = spec.alpha
    tau = grid.tau
    coef = tau**-alpha / gamma_fn(2.0 - alpha)
    b = l1_weights(alpha, grid.nt)

    u = np.empty((grid.nt + 1, grid.nx + 1))
    u[0] = eval_space(spec.init.u0, grid.x)
    if spec.bc.kind is BCKind.Dirichlet:
        u[0, 0] = u[0, -1] = 0.0
    # w[k] is the velocity w^{k - 1/2}; w[0] = u1
    w = np.empty((grid.nt + 1, grid.nx + 1))
    w[0] = eval_space(spec.init.u1, grid.x)
    dw = np.empty((grid.nt, grid.nx + 1))

    t = grid.t
    for n in range(1, grid.nt + 1):
        # the velocity-chain operator is centred at t_{n-1/2}; so is the space part
        space = _spatial_system(spec, grid, t[n] - 0.5 * tau, 0.0)
        hist = _history(b, dw, n)
        rhs = space.rhs - 0.5 * space.matvec(u[n - 1]) + coef * (u[n - 1] / tau + w[n - 1] - hist)
        sys = TridiagonalSystem(0.5 * space.sub, 0.5 * space.diag + coef / tau, 0.5 * space.sup, rhs)
        if spec.bc.kind is BCKind.Dirichlet:
            sys.diag[0] = sys.diag[-1] = 1.0
            sys.sup[0] = sys.sub[-1] = 0.0
            sys.rhs[0] = sys.rhs[-1] = 0.0
        u[n] = _finish_step(sys, n, spec.bc.kind)
        w[n] = (u[n] - u[n - 1]) / tau
        dw[n - 1] = w[n] - w[n - 1]

    return SolutionField(grid, u, spec.kind, alpha, spec.bc.kind, "l1-velocity-implicit", spec.digest)


def solve(spec: ProblemSpec, grid: UniformGrid, *, check: bool = True) -> SolutionField:
    """Dispatch on the equation kind."""
    if spec.kind is EquationKind.Diffusion:
        return solve_diffusion(spec, grid, check=check)
    return solve_wave(spec, grid, check=check)


# }}}
