import math

import numpy as np
import pytest

from dnlswave.continuum import (default_u_grid, energy_bound_check, eps_solve, eps_sweep,
                                lattice_positions, limit_profile, ramp_competitor,
                                scaled_energy)
from dnlswave.errors import HypothesisViolated, QuadratureFailure, WindowNotCovered
from dnlswave.lattice import Setting
from dnlswave.minimizer import FlowConfig, minimize


@pytest.fixture(scope="module")
def sol(cubic):
    return limit_profile(cubic, 1.0)


def test_tanh_oracle_by_residual():
    """tanh(xi / sqrt(2 beta)) solves 2 beta u'' = F'(u) for the cubic F."""
    for beta in (0.5, 1.0, 3.0):
        xi = np.linspace(-3, 3, 61)
        a = 1 / math.sqrt(2 * beta)
        u = np.tanh(a * xi)
        upp = -2 * a * a * u * (1 - u * u)
        assert np.max(np.abs(2 * beta * upp - 2 * u * (u * u - 1))) < 1e-14


def test_quadrature_matches_artanh(cubic, sol):
    u = np.array([0.1, 0.5, 0.9, 0.99])
    direct = limit_profile(cubic, 1.0, u)
    np.testing.assert_allclose(direct.xi_grid[-4:], math.sqrt(2) * np.arctanh(u), atol=1e-9)
    np.testing.assert_allclose(sol.xi_of(u), math.sqrt(2) * np.arctanh(u), atol=1e-9)


def test_profile_against_tanh(sol):
    xi = np.linspace(-8, 8, 801)
    assert np.max(np.abs(sol(xi) - np.tanh(xi / math.sqrt(2)))) < 1e-8
    assert sol(1.0) == pytest.approx(0.60886, abs=1e-5)
    # far tails use the exponential continuation
    assert sol(15.0) == pytest.approx(1 - 2 * np.exp(-15 * math.sqrt(2)), rel=1e-12)
    assert sol(15.0) < 1.0 and sol(-40.0) == -1.0


def test_phase_pinning_and_oddness(sol):
    assert sol(0.0) == 0.0
    np.testing.assert_array_equal(sol.xi_grid, -sol.xi_grid[::-1])
    np.testing.assert_array_equal(sol.u_values, -sol.u_values[::-1])
    assert np.all(np.diff(sol.u_values) > 0) and np.all(np.diff(sol.xi_grid) > 0)
    xi = np.linspace(0, 12, 97)
    np.testing.assert_array_equal(sol(-xi), -sol(xi))


def test_beta_scaling(cubic):
    u = np.array([0.2, 0.6, 0.95])
    a = limit_profile(cubic, 1.0, u)
    b = limit_profile(cubic, 2.0, u)
    np.testing.assert_allclose(b.xi_grid, math.sqrt(2) * a.xi_grid, rtol=1e-12)


def test_first_integral(cubic, sol):
    assert np.max(np.abs(sol.first_integral_residual(cubic))) < 1e-5


def test_ode_residual_second_order(cubic, sol):
    errs = []
    for h in (0.1, 0.05):
        xi = np.arange(-4, 4 + h / 2, h)
        u = sol(xi)
        r = 2 * (u[2:] + u[:-2] - 2 * u[1:-1]) / h ** 2 - cubic.F_prime(u[1:-1])
        errs.append(np.max(np.abs(r)))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_other_potential_first_integral():
    from dnlswave.potential import get_potential
    pot = get_potential("power:3")
    s = limit_profile(pot, 0.7)
    assert np.max(np.abs(s.first_integral_residual(pot))) < 1e-4
    assert s.tail_rate == pytest.approx(math.sqrt(pot.f_second_at_1 / 1.4))


def test_hypothesis_guards(cubic, doublewell):
    with pytest.raises(HypothesisViolated):
        limit_profile(doublewell, 1.0)
    with pytest.raises(QuadratureFailure):
        limit_profile(cubic, 1.0, [0.5, 1.0])
    with pytest.raises(ValueError):
        limit_profile(cubic, 0.0)
    with pytest.raises(ValueError):
        limit_profile(cubic, 1.0, [0.0])


def test_default_grid():
    g = default_u_grid()
    assert g[0] > 0 and g[-1] == pytest.approx(1 - 1e-6, abs=1e-15)
    assert np.all(np.diff(g) > 0)


def test_eps_one_is_plain_solve(cubic, sol):
    cfg = FlowConfig(0.05, 20000, 1e-11)
    run = eps_solve(cubic, 1.0, 1.0, n=14, cfg=cfg, window=6, margin=6, limit=sol)
    plain = minimize(Setting.INTER_SITE, 14, cubic, 1.0, cfg)
    np.testing.assert_array_equal(run.profile.values, plain.profile.values)


def test_piecewise_constant_identification(cubic, sol):
    run = eps_solve(cubic, 1.0, 0.5, cfg=FlowConfig(0.1, 20000, 1e-11), limit=sol)
    np.testing.assert_allclose(run.positions, 0.5 * run.profile.indices[:run.positions.size])
    np.testing.assert_array_equal(lattice_positions(run.profile, 0.5), 0.5 * run.profile.indices)
    assert run.profile.n == 24
    assert np.all(np.abs(run.positions) <= 6)
    assert run.sup_error_on_window == pytest.approx(np.max(np.abs(run.u_eps - run.u_limit)))
    assert run.sup_error_on_window >= 0


def test_window_not_covered(cubic, sol):
    with pytest.raises(WindowNotCovered):
        eps_solve(cubic, 1.0, 0.5, n=10, window=6, margin=6, limit=sol)
    with pytest.raises(ValueError):
        eps_solve(cubic, 1.0, 0.0, limit=sol)


def test_short_sweep_converges(cubic):
    runs = eps_sweep(cubic, 1.0, [0.8, 0.4, 0.2], workers=3)
    errs = [r.sup_error_on_window for r in runs]
    assert errs[0] > errs[1] > errs[2]
    # second order in eps: each halving divides the error by about 4
    assert 3 < errs[0] / errs[1] < 5 and 3 < errs[1] / errs[2] < 5


def test_energy_bounds(cubic):
    runs = eps_sweep(cubic, 1.0, [0.8, 0.4, 0.2])
    totals = []
    for run in runs:
        b = energy_bound_check(run, cubic, 1.0)
        assert b.below_competitor
        assert b.total == b.f_part + b.d_eps_part
        totals.append(b.total)
    # uniformly bounded by the limit competitor value 8/15 + 2 beta + O(eps)
    assert max(totals) < 8 / 15 + 2 + 0.5


def test_competitor_energy_converges(cubic):
    target = 8 / 15 + 2.0
    gaps = []
    for eps in (0.1, 0.05, 0.025):
        f, d = scaled_energy(ramp_competitor(Setting.INTER_SITE, eps), cubic, 1.0, eps)
        gaps.append(abs(f + d - target))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[0] < 0.1 and gaps[1] / gaps[0] < 0.75
