import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dnlswave.lattice import (InadmissibleProfile, Profile, Setting, energy, energy_gradient,
                              energy_parts, gateaux_gradient, gradient_array, residual_field,
                              residual_sup, shock_profile, stagger_values, staggering_transform)
from dnlswave.potential import get_potential

SETTINGS = [Setting.ON_SITE, Setting.INTER_SITE]


def random_profile(rng, setting, n):
    return Profile(setting, np.sort(rng.uniform(0, 1, n)))


def full_energy(p, pot, beta, margin=3):
    """Direct sum over the explicitly reflected lattice."""
    _, u = p.full(margin)
    f = math.fsum(pot.F(u))
    d = math.fsum(np.diff(u) ** 2)
    return f + beta * d


def full_gradient(p, pot, beta, margin=3):
    """G on the reflected lattice, tails excluded from the output."""
    j, u = p.full(margin)
    lap = u[2:] + u[:-2] - 2 * u[1:-1]
    g = 0.5 * pot.F_prime(u[1:-1]) - beta * lap
    return j[1:-1], g


def test_setting_parse():
    assert Setting.parse("onsite") is Setting.ON_SITE
    assert Setting.parse("Inter-Site") is Setting.INTER_SITE
    assert Setting.parse("offsite") is Setting.INTER_SITE
    assert Setting.parse(Setting.ON_SITE) is Setting.ON_SITE
    with pytest.raises(ValueError):
        Setting.parse("diagonal")


def test_shock_profile():
    p = shock_profile(Setting.ON_SITE, 3)
    np.testing.assert_array_equal(p.values, [1, 1, 1])
    np.testing.assert_array_equal(p.indices, [1, 2, 3])
    q = shock_profile("intersite", 2)
    np.testing.assert_array_equal(q.values, [1, 1])
    np.testing.assert_array_equal(q.indices, [0.5, 1.5])
    with pytest.raises(ValueError):
        shock_profile(Setting.ON_SITE, 0)


@pytest.mark.parametrize("values", [[0.5, 0.4], [-0.1, 0.5], [0.5, 1.2], [np.nan], []])
def test_profile_rejects(values):
    with pytest.raises(InadmissibleProfile):
        Profile(Setting.ON_SITE, values)


def test_profile_immutable_and_equal():
    p = Profile(Setting.ON_SITE, [0.2, 0.6])
    with pytest.raises(ValueError):
        p.values[0] = 0.3
    assert p == Profile("onsite", np.array([0.2, 0.6]))
    assert p != Profile("intersite", [0.2, 0.6])
    assert Profile.unchecked(Setting.ON_SITE, [0.9, 0.1]).values[0] == 0.9


def test_full_reflection():
    j, u = Profile(Setting.ON_SITE, [0.3, 0.8]).full(1)
    np.testing.assert_array_equal(j, [-3, -2, -1, 0, 1, 2, 3])
    np.testing.assert_array_equal(u, [-1, -0.8, -0.3, 0, 0.3, 0.8, 1])
    j, u = Profile(Setting.INTER_SITE, [0.3]).full(1)
    np.testing.assert_array_equal(j, [-1.5, -0.5, 0.5, 1.5])
    np.testing.assert_array_equal(u, [-1, -0.3, 0.3, 1])


def test_shock_energy_examples(cubic):
    e = energy(shock_profile(Setting.ON_SITE, 4), cubic, 0.25)
    assert (e.f_part, e.d_part, e.total) == pytest.approx((0.5, 2.0, 1.0))
    e = energy(shock_profile(Setting.INTER_SITE, 4), cubic, 0.25)
    assert (e.f_part, e.d_part, e.total) == pytest.approx((0.0, 4.0, 1.0))
    assert energy(shock_profile(Setting.ON_SITE, 4), cubic, 0.0).total == pytest.approx(0.5)


def test_shock_gradient(cubic):
    for beta in (0.1, 0.25, 3.0):
        g = gateaux_gradient(shock_profile(Setting.ON_SITE, 5), cubic, beta)
        np.testing.assert_allclose(g.values, [beta, 0, 0, 0, 0], atol=1e-15)
        assert g.sup_norm == pytest.approx(beta)
    assert residual_sup(shock_profile(Setting.ON_SITE, 5), cubic, 0.25) == pytest.approx(0.5)


def test_constant_one_has_zero_gradient(cubic, doublewell):
    # u == 1 as a raw sequence on the whole lattice (no odd reflection)
    u = np.ones(9)
    for pot in (cubic, doublewell):
        g = 0.5 * pot.F_prime(u[1:-1]) - 0.7 * (u[2:] + u[:-2] - 2 * u[1:-1])
        np.testing.assert_array_equal(g, 0.0)
        # beyond the first stored site the Ritz closure sees the same constant
        np.testing.assert_array_equal(gradient_array(np.ones(4), Setting.ON_SITE, pot, 0.7)[1:], 0)


def test_gradient_field_sup(cubic):
    p = Profile(Setting.INTER_SITE, [0.1, 0.5, 0.9])
    g = gateaux_gradient(p, cubic, 0.7)
    assert g.sup_norm == np.max(np.abs(g.values))
    np.testing.assert_allclose(residual_field(p, cubic, 0.7), 2 * g.values)


@pytest.mark.parametrize("setting", SETTINGS)
def test_reflection_consistency(cubic, doublewell, setting):
    rng = np.random.default_rng(3)
    for pot in (cubic, doublewell):
        for n in (1, 2, 5, 9):
            p = random_profile(rng, setting, n)
            for beta in (0.0, 0.3, 4.0):
                assert energy(p, pot, beta).total == pytest.approx(
                    full_energy(p, pot, beta), rel=1e-13, abs=1e-14)


@pytest.mark.parametrize("setting", SETTINGS)
def test_gradient_matches_full_lattice_and_is_odd(cubic, setting):
    rng = np.random.default_rng(4)
    p = random_profile(rng, setting, 7)
    j, g = full_gradient(p, cubic, 1.3)
    np.testing.assert_allclose(g, -g[::-1], atol=1e-14)
    mine = gateaux_gradient(p, cubic, 1.3).values
    np.testing.assert_allclose(g[j > 0][:p.n], mine, atol=1e-14)


@pytest.mark.parametrize("setting", SETTINGS)
def test_gradient_vs_central_differences(cubic, setting):
    rng = np.random.default_rng(5)
    h = 1e-6
    for _ in range(10):
        p = random_profile(rng, setting, 8)
        for beta in (0.1, 1.0, 10.0):
            g = energy_gradient(p, cubic, beta)
            fd = np.empty(p.n)
            for k in range(p.n):
                up, dn = p.values.copy(), p.values.copy()
                up[k] += h
                dn[k] -= h
                fp = sum(w * c for w, c in zip((1, beta), energy_parts(up, setting, cubic)))
                fm = sum(w * c for w, c in zip((1, beta), energy_parts(dn, setting, cubic)))
                fd[k] = (fp - fm) / (2 * h)
            assert np.max(np.abs(g - fd)) / np.max(np.abs(fd)) < 1e-6


def test_directional_derivative(cubic):
    """sum_j v_j G_j over the full lattice equals dE/dt / 2."""
    rng = np.random.default_rng(6)
    p = random_profile(rng, Setting.ON_SITE, 6)
    v = rng.normal(size=6)
    t = 1e-7
    e0 = energy(p, cubic, 0.8).total
    f, d = energy_parts(p.values + t * v, Setting.ON_SITE, cubic)
    dE = (f + 0.8 * d - e0) / t
    g = gateaux_gradient(p, cubic, 0.8).values
    # odd extension doubles the pairing
    assert 2 * np.sum(2 * v * g) == pytest.approx(dE, rel=1e-6)


def test_energy_additivity(cubic):
    p = Profile(Setting.ON_SITE, [0.25, 0.7, 0.95])
    e = energy(p, cubic, 2.5)
    assert e.total == e.f_part + e.beta * e.d_part
    assert e.f_part >= 0 and e.d_part >= 0


def test_staggering():
    p = Profile(Setting.ON_SITE, [0.2, 0.5, 0.9])
    np.testing.assert_array_equal(staggering_transform(p), [-0.2, 0.5, -0.9])
    q = Profile(Setting.INTER_SITE, [0.2, 0.5, 0.9])
    np.testing.assert_array_equal(staggering_transform(q), [0.2, -0.5, 0.9])
    np.testing.assert_array_equal(staggering_transform(shock_profile(Setting.ON_SITE, 4)),
                                  [-1, 1, -1, 1])


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SETTINGS),
       arrays(np.float64, st.integers(1, 12), elements=st.floats(-5, 5)))
def test_staggering_involution(setting, v):
    np.testing.assert_array_equal(stagger_values(stagger_values(v, setting), setting), v)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SETTINGS),
       arrays(np.float64, st.integers(1, 15), elements=st.floats(0, 1)),
       st.floats(0, 20))
def test_energy_properties(setting, raw, beta):
    pot = get_potential("cubic")
    p = Profile(setting, np.sort(raw))
    e = energy(p, pot, beta)
    assert e.total == e.f_part + beta * e.d_part
    assert e.total >= 0
    assert e.total == pytest.approx(full_energy(p, pot, beta), rel=1e-12, abs=1e-13)
    j, g = full_gradient(p, pot, beta)
    np.testing.assert_allclose(g, -g[::-1], atol=1e-12)
