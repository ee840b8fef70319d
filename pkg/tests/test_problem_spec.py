from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest

from fracenergy.fractional_ops import UniformGrid, caputo_l1, caputo_l1_wave, TimeSeries
from fracenergy.problem_spec import (
    CATALOG,
    BCKind,
    BoundaryCondition,
    Coefficients,
    EquationKind,
    InitialData,
    ProblemSpec,
    eval_field,
    eval_space,
    eval_time,
    manufactured,
    validate,
)


def zero(x, t):
    return 0.0 * x * t


def dirichlet_diffusion(k, q=lambda x, t: 0.0 * x):
    return ProblemSpec(
        EquationKind.Diffusion, 0.5, 1.0, 1.0, Coefficients(k=k, q=q, f=zero),
        BoundaryCondition(BCKind.Dirichlet), InitialData(lambda x: np.sin(np.pi * x)),
    )


def test_validate_constant_coefficients():
    rep = validate(dirichlet_diffusion(lambda x, t: 1.0 + 0 * x), UniformGrid(1, 1, 8, 8))
    assert rep.passed
    assert rep.constants["c1"] == 1.0
    assert rep.theorem == "theorem1"


def test_validate_sign_violation():
    spec = replace_c1(dirichlet_diffusion(lambda x, t: x - 0.5 + 0 * t), 0.1)
    rep = validate(spec, UniformGrid(1, 1, 8, 8))
    check = rep["k >= c1 > 0"]
    assert not check.passed
    assert check.worst_node[0] == pytest.approx(0.0)
    assert check.worst_value == pytest.approx(-0.5)


def test_validate_inferred_nonpositive_c1_fails():
    rep = validate(dirichlet_diffusion(lambda x, t: x - 0.5 + 0 * t), UniformGrid(1, 1, 8, 8))
    assert not rep["k >= c1 > 0"].passed


def replace_c1(spec, c1):
    from dataclasses import replace

    return replace(spec, coefficients=replace(spec.coefficients, c1=c1))


def test_validate_robin_wave_negative_beta():
    one = lambda t: 1.0 + 0 * t
    spec = ProblemSpec(
        EquationKind.Wave, 0.5, 1.0, 1.0,
        Coefficients(k=lambda x, t: 1.0 + 0 * x, q=lambda x, t: 1.0 + 0 * x, f=zero),
        BoundaryCondition(BCKind.Robin, beta1=lambda t: -1.0 + 0 * t, beta2=one, mu1=one, mu2=one),
        InitialData(lambda x: 0 * x, lambda x: 0 * x),
    )
    rep = validate(spec, UniformGrid(1, 1, 8, 8))
    assert not rep["beta_i >= beta > 0"].passed
    assert "beta_i >= beta > 0" in rep.summary()


def test_validate_dirichlet_compatibility():
    spec = ProblemSpec(
        EquationKind.Diffusion, 0.5, 1.0, 1.0,
        Coefficients(k=lambda x, t: 1.0 + 0 * x, q=zero, f=zero),
        BoundaryCondition(BCKind.Dirichlet), InitialData(lambda x: 1.0 + 0 * x),
    )
    assert not validate(spec, UniformGrid(1, 1, 8, 8))["u0(0) = u0(l) = 0"].passed


def test_wave_hypotheses_listed():
    spec, _ = manufactured("wave-robin-poly", 0.5)
    rep = validate(spec, spec.grid(8, 8))
    names = {c.name for c in rep.checks}
    assert {"k <= c2", "q >= m1 > 0", "q <= m2", "|k_t| <= c3", "|q_t| <= c3",
            "beta_i >= beta > 0", "|beta_i'| <= c4"} <= names


def test_validate_never_mutates():
    spec, _ = manufactured("diffusion-varcoef", 0.5)
    before = spec.digest
    validate(spec, spec.grid(8, 8))
    assert spec.digest == before


def test_u1_iff_wave():
    c = Coefficients(k=zero, q=zero, f=zero)
    with pytest.raises(ValueError):
        ProblemSpec(EquationKind.Wave, 0.5, 1, 1, c, BoundaryCondition(), InitialData(lambda x: x))
    with pytest.raises(ValueError):
        ProblemSpec(EquationKind.Diffusion, 0.5, 1, 1, c, BoundaryCondition(),
                    InitialData(lambda x: x, lambda x: x))


def test_robin_needs_data():
    with pytest.raises(ValueError, match="mu1"):
        BoundaryCondition(BCKind.Robin, beta1=lambda t: t, beta2=lambda t: t, mu2=lambda t: t)


def test_eval_helpers_broadcast():
    assert eval_field(lambda x, t: 2.0, np.zeros(3), 0.0).shape == (3,)
    assert eval_time(lambda t: 1.0, np.zeros(4)).shape == (4,)
    assert eval_space(lambda x: 1.0, np.zeros(5)).shape == (5,)


# {{{ catalog


def test_unknown_name_lists_catalog():
    with pytest.raises(KeyError) as info:
        manufactured("diffusion-dirichlet-pol", 0.5)
    for name in CATALOG:
        assert name in str(info.value)


def test_d1_forcing_value():
    spec, _ = manufactured("diffusion-dirichlet-poly", 0.5)
    ref = 2.0 / math.gamma(2.5) + (math.pi**2 + 1.0) * 2.0
    assert float(spec.coefficients.f(0.5, 1.0)) == pytest.approx(ref, rel=1e-14)


def test_d1_forcing_quadrature_oracle():
    # Caputo integral of the time profile 1 + t^2 by quadrature
    a = 0.5
    with mp.workdps(30):
        cap = mp.quad(lambda s: 2 * s * (1 - s) ** (-a), [0, 1]) / mp.gamma(1 - a)
    ref = float(cap) + (math.pi**2 + 1.0) * 2.0
    spec, _ = manufactured("diffusion-dirichlet-poly", a)
    assert float(spec.coefficients.f(0.5, 1.0)) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("name", list(CATALOG))
def test_initial_consistency(name):
    spec, exact = manufactured(name, 0.4)
    x = np.linspace(0, spec.l, 17)
    assert np.array_equal(exact(x, 0.0), eval_space(spec.init.u0, x))
    if spec.kind is EquationKind.Wave:
        assert np.array_equal(eval_field(exact.u_t, x, 0.0), eval_space(spec.init.u1, x))
        assert np.all(eval_space(spec.init.u1, x) == 0.0)


@pytest.mark.parametrize("name", list(CATALOG))
@pytest.mark.parametrize("alpha", [0.3, 0.8])
def test_catalog_validates(name, alpha):
    spec, _ = manufactured(name, alpha)
    assert validate(spec, spec.grid(16, 16)).passed


@pytest.mark.parametrize("name", ["diffusion-robin-poly", "wave-robin-poly"])
def test_robin_data_from_exact(name):
    spec, exact = manufactured(name, 0.5, l=1.7)
    t = np.linspace(0, 1, 9)
    l = spec.l
    mu1 = 1.0 * exact(0.0, t) - eval_field(exact.u_x, 0.0, t)
    mu2 = 1.0 * exact(l, t) + eval_field(exact.u_x, l, t)
    assert np.allclose(eval_time(spec.bc.mu1, t), mu1, rtol=1e-13, atol=1e-13)
    assert np.allclose(eval_time(spec.bc.mu2, t), mu2, rtol=1e-13, atol=1e-13)


def residual(name, alpha, n):
    """Residual of the exact solution in the discrete equation.

    Diffusion: max over interior nodes and steps, evaluated at t_n.
    Wave: the scheme balances the operator at t_{n-1/2} against the average
    of levels n-1 and n; the first velocity interval leaves an O(tau^(1-alpha))
    start-up defect at step 1 only, so the residual is integrated in time and
    then maximised over x.
    """
    spec, exact = manufactured(name, alpha)
    g = spec.grid(n, n)
    x, t, h = g.x, g.t, g.h
    U = exact(x[None, :], t[:, None])
    wave = spec.kind is EquationKind.Wave
    if wave:
        u1 = eval_space(spec.init.u1, x)
        d = np.stack([caputo_l1_wave(TimeSeries(g, U[:, i]), alpha, u1[i]).values for i in range(x.size)], 1)
        times, level = t[1:] - 0.5 * g.tau, 0.5 * (U[1:] + U[:-1])
    else:
        d = np.stack([caputo_l1(TimeSeries(g, U[:, i]), alpha).values for i in range(x.size)], 1)
        times, level = t[1:], U[1:]
    T, X = np.meshgrid(times, x[1:-1], indexing="ij")
    kp = eval_field(spec.coefficients.k, X + h / 2, T)
    km = eval_field(spec.coefficients.k, X - h / 2, T)
    flux = (kp * (level[:, 2:] - level[:, 1:-1]) - km * (level[:, 1:-1] - level[:, :-2])) / h**2
    q = eval_field(spec.coefficients.q, X, T)
    f = eval_field(spec.coefficients.f, X, T)
    r = np.abs(d[1:, 1:-1] - flux + q * level[:, 1:-1] - f)
    if wave:
        return float(np.max(g.tau * r.sum(axis=0)))
    return float(np.max(r))


@pytest.mark.parametrize("name", list(CATALOG))
@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_residual_converges(name, alpha):
    errs = [residual(name, alpha, n) for n in (16, 32, 64, 128)]
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(orders >= 1.0)


def test_scaled_and_with_order():
    spec, _ = manufactured("wave-robin-poly", 0.5)
    s = spec.scaled(3.0)
    x = np.linspace(0, 1, 5)
    assert np.allclose(eval_field(s.coefficients.f, x, 0.3), 3 * eval_field(spec.coefficients.f, x, 0.3))
    assert np.allclose(eval_time(s.bc.mu1, x), 3 * eval_time(spec.bc.mu1, x))
    assert s.digest != spec.digest
    assert spec.with_order(0.3).alpha == 0.3


# }}}
