import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dnlswave.analysis import (arccosh1p, decay_rate, decay_report, default_window,
                               fit_tail, kappa_sequence, plateau_diagnostics,
                               plateau_family_energy, plateau_family_slope, root_residual,
                               tail_bounds)
from dnlswave.errors import (DegenerateTail, NoExponentialTail, NoPlateauCandidates,
                             WindowTooSmall)
from dnlswave.lattice import Profile, Setting, shock_profile
from dnlswave.minimizer import FlowConfig, minimize

LAMBDA_2 = math.log(2 + math.sqrt(3))
KAPPA_2 = 2 - math.sqrt(3)


def geometric(c, lam, n, setting=Setting.ON_SITE):
    p = Profile(setting, np.ones(n))
    return Profile(setting, 1 - c * np.exp(-lam * p.indices))


def test_closed_form_example():
    est = decay_rate(1.0, 4.0)
    assert est.lambda_exact == pytest.approx(LAMBDA_2, rel=1e-15)
    assert est.lambda_exact == pytest.approx(1.316958, abs=1e-6)
    assert est.kappa_inf == pytest.approx(KAPPA_2, rel=1e-14)
    assert est.delta == 2.0


@settings(max_examples=200, deadline=None)
@given(beta=st.floats(1e-4, 1e6), f2=st.floats(1e-3, 1e3))
def test_root_identities(beta, f2):
    est = decay_rate(beta, f2)
    assert root_residual(est) < 1e-12
    assert -math.log(est.kappa_inf) == pytest.approx(est.lambda_exact, rel=1e-12)
    assert 0 < est.kappa_inf < 1


def test_monotone_in_beta():
    lams = [decay_rate(b, 4.0).lambda_exact for b in np.geomspace(1e-3, 1e4, 60)]
    assert all(b < a for a, b in zip(lams, lams[1:]))


def test_continuum_expansion():
    # delta -> 0: lambda / sqrt(delta) - 1 = O(delta)
    ratios = []
    for beta in np.geomspace(200, 1e8, 20):
        est = decay_rate(beta, 4.0)
        assert est.delta <= 1e-2
        ratios.append(abs(est.lambda_exact / math.sqrt(est.delta) - 1) / est.delta)
    assert max(ratios) < 0.1
    assert math.isfinite(decay_rate(1e14, 4.0).lambda_exact)


def test_anti_continuum_expansion():
    # delta -> infinity: lambda - ln(delta) stays bounded (tends to 0)
    gaps = [decay_rate(b, 4.0).lambda_exact - math.log(decay_rate(b, 4.0).delta)
            for b in np.geomspace(1e-2, 1e-9, 20)]
    assert max(abs(g) for g in gaps) < 0.02
    assert abs(gaps[-1]) < abs(gaps[0])


def test_arccosh1p_small_argument():
    for y in (1e-20, 1e-12, 1e-9, 1e-6):
        ref = math.sqrt(2 * y) * (1 - y / 12)
        assert arccosh1p(y) == pytest.approx(ref, rel=1e-12)
    assert arccosh1p(1.0) == pytest.approx(math.acosh(2.0), rel=1e-15)


def test_no_exponential_tail():
    with pytest.raises(NoExponentialTail):
        decay_rate(1.0, 0.0)
    with pytest.raises(ValueError):
        decay_rate(0.0, 1.0)


def test_geometric_kappa_and_fit():
    p = geometric(0.4, 0.7, 30)
    # 1 - u_j carries round-off relative to w_j, so stay where w_j is not tiny
    np.testing.assert_allclose(kappa_sequence(p, (1, 15)), math.exp(-0.7), rtol=1e-9)
    lam, r2 = fit_tail(p, (2, 15))
    assert lam == pytest.approx(0.7, rel=1e-9)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    q = geometric(0.4, 0.7, 30, Setting.INTER_SITE)
    assert fit_tail(q, (1.5, 15.5))[0] == pytest.approx(0.7, rel=1e-9)


def test_degenerate_tails():
    with pytest.raises(DegenerateTail):
        kappa_sequence(shock_profile(Setting.ON_SITE, 5))
    with pytest.raises(DegenerateTail):
        default_window(shock_profile(Setting.ON_SITE, 5))
    sat = geometric(1.0, 2.0, 30)
    with pytest.raises(DegenerateTail):
        fit_tail(sat, (10, 25))


def test_window_guards():
    p = geometric(1.0, 0.5, 20)
    with pytest.raises(WindowTooSmall):
        fit_tail(p, (3, 5))
    with pytest.raises(ValueError):
        fit_tail(p, (3, 40))


def test_converged_tail(cubic, cubic_n40):
    p = cubic_n40.profile
    win = default_window(p)
    assert win[0] == 12
    est = decay_report(p, cubic, 1.0, win)
    assert abs(est.lambda_fit - LAMBDA_2) / LAMBDA_2 < 0.02
    kap = kappa_sequence(p, win)
    assert np.all((kap > 0) & (kap < 1))
    assert np.max(np.abs(kap / KAPPA_2 - 1)) < 0.01
    # a fixed window [10, 30] reaches the round-off floor of 1 - u_j in float64
    assert np.min(1 - p.values[9:30]) < 1e-15


def test_tail_bounds(cubic_n40):
    p = cubic_n40.profile
    lo, hi = tail_bounds(p, LAMBDA_2 * 0.95, LAMBDA_2 * 1.05)
    j = p.indices
    w = 1 - p.values
    win = default_window(p)
    m = (j >= win[0]) & (j <= win[1])
    assert np.all(lo * np.exp(-LAMBDA_2 * 1.05 * j[m]) <= w[m] * (1 + 1e-12))
    assert np.all(w[m] <= hi * np.exp(-LAMBDA_2 * 0.95 * j[m]) * (1 + 1e-12))
    assert lo > 0 and hi > 0


def test_plateau_requires_candidates(cubic, cubic_n40):
    with pytest.raises(NoPlateauCandidates):
        plateau_diagnostics(cubic_n40.profile, cubic)


@pytest.mark.parametrize("setting", [Setting.ON_SITE, Setting.INTER_SITE])
def test_doublewell_plateau(doublewell, setting):
    res = minimize(setting, 40, doublewell, 2.0, FlowConfig(0.05, 1000))
    rep = plateau_diagnostics(res.profile, doublewell)
    assert rep.eta_stars == pytest.approx((0.0,), abs=1e-12)
    assert rep.found and rep.best.run_length >= 3 and rep.best.height_error < 1e-3


def test_plateau_family(doublewell):
    slope, es = plateau_family_slope(Setting.ON_SITE, doublewell, 2.0, 0.0)
    assert slope == pytest.approx(2 * doublewell.F(0.0), abs=1e-12)
    assert np.all(np.diff(es) < 0)
    # explicit K = 1 value: F(0) + 2F(0) + 2 beta (bond 0 -> 1 on each side)
    assert plateau_family_energy("onsite", doublewell, 2.0, 0.0, 1) == pytest.approx(
        3 * -0.125 + 2 * 2.0)
