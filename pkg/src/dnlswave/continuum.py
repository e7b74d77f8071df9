"""Continuum limit: the heteroclinic of 2 beta u'' = F'(u) and eps-scaled lattices.

The limit profile is computed from the first integral beta (u')^2 = F(u),

    xi(u) = integral_0^u sqrt(beta / F(s)) ds,

tabulated up to ``u_max = 1 - 1e-6`` and continued by the linear tail
1 - u ~ exp(-sqrt(F''(1) / (2 beta)) xi) beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import HypothesisViolated, QuadratureFailure, WindowNotCovered
from .lattice import Profile, Setting, energy
from .minimizer import FlowConfig, MinimizeResult, minimize
from .potential import NormalizedPotential

U_MAX = 1.0 - 1e-6
QUAD_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ContinuumSolution:
    """Odd heteroclinic tabulated as (xi, u) with u strictly increasing."""

    xi_grid: np.ndarray
    u_values: np.ndarray
    beta: float
    quadrature_tol: float
    tail_rate: float

    def __post_init__(self):
        object.__setattr__(self, "_interp", PchipInterpolator(self.xi_grid, self.u_values))
        object.__setattr__(self, "_inverse", PchipInterpolator(self.u_values, self.xi_grid))

    def __call__(self, xi):
        """u(xi), exponential tails outside the tabulated range.

        Evaluated as sgn(xi) u(|xi|) so the oddness is exact.
        """
        xi = np.asarray(xi, dtype=float)
        a = np.abs(xi)
        x1 = self.xi_grid[-1]
        u = self._interp(np.minimum(a, x1))
        w_end = 1.0 - self.u_values[-1]
        with np.errstate(over="ignore"):
            u = np.where(a > x1, 1.0 - w_end * np.exp(-self.tail_rate * (a - x1)), u)
        return np.copysign(u, xi)

    def xi_of(self, u):
        """Inverse map on the tabulated range."""
        u = np.asarray(u, dtype=float)
        return np.copysign(self._inverse(np.abs(u)), u)

    def first_integral_residual(self, pot: NormalizedPotential) -> np.ndarray:
        """beta (u')^2 - F(u) on the grid, u' from centered differences."""
        du = np.gradient(self.u_values, self.xi_grid)
        return self.beta * du * du - pot.F(self.u_values)


def default_u_grid(points: int = 4001, u_max: float = U_MAX) -> np.ndarray:
    """Positive u values spaced uniformly in artanh(u), dense near u = 1."""
    s = np.linspace(0.0, math.atanh(u_max), points)
    return np.tanh(s)[1:]


def limit_profile(pot: NormalizedPotential, beta: float, u_grid=None,
                  tol: float = QUAD_TOL) -> ContinuumSolution:
    """Tabulate the heteroclinic connecting -1 to 1 with u(0) = 0."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    if not pot.f_second_at_1 > 0:
        raise HypothesisViolated("F''(1) <= 0: the heteroclinic has no exponential tail")
    u = np.unique(np.abs(np.asarray(default_u_grid() if u_grid is None else u_grid,
                                    dtype=float)))
    u = u[u > 0.0]
    if u.size == 0:
        raise ValueError("u_grid needs at least one nonzero value")
    if u[-1] >= 1.0:
        raise QuadratureFailure("xi(u) diverges as u -> 1; keep grid values below 1")
    probe = np.linspace(0.0, u[-1], 2001)
    fvals = pot.F(probe)
    if np.any(fvals <= 0.0):
        bad = probe[np.argmax(fvals <= 0.0)]
        raise HypothesisViolated(f"F <= 0 at u = {bad:.6g}; no monotone heteroclinic")

    # u = tanh(t) makes the integrand bounded as u -> 1:
    # sqrt(beta / F(tanh t)) sech^2 t tends to sqrt(8 beta / F''(1))
    t_edges = np.concatenate([[0.0], np.arctanh(u)])
    lo, width = t_edges[:-1], np.diff(t_edges)

    def integrate_segments(order):
        x, wts = np.polynomial.legendre.leggauss(order)
        t = lo[:, None] + 0.5 * (x[None, :] + 1.0) * width[:, None]
        fv = pot.F(np.tanh(t))
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.sqrt(beta / fv) / np.cosh(t) ** 2
        return 0.5 * width * (vals @ wts)

    pieces = integrate_segments(40)
    err = np.abs(pieces - integrate_segments(20))
    if not np.all(np.isfinite(pieces)):
        raise QuadratureFailure(f"integrand not integrable on (0, {u[-1]:.6g}]")
    # F is evaluated by cancellation near u = 1, which caps the attainable
    # relative accuracy of the outermost segments around 1e-5
    if np.any(err > tol * np.maximum(1.0, pieces) + 1e-4 * pieces):
        k = int(np.argmax(err))
        raise QuadratureFailure(
            f"quadrature did not converge on segment ending at u = {u[k]:.6g} "
            f"(error estimate {err[k]:g})")
    xi = np.cumsum(pieces)
    xi_full = np.concatenate([-xi[::-1], [0.0], xi])
    u_full = np.concatenate([-u[::-1], [0.0], u])
    rate = math.sqrt(pot.f_second_at_1 / (2.0 * beta))
    return ContinuumSolution(xi_full, u_full, beta, tol, rate)


@dataclass
class EpsRun:
    eps: float
    profile: Profile
    sup_error_on_window: float
    window_half_width: float
    positions: np.ndarray
    u_eps: np.ndarray
    u_limit: np.ndarray
    result: MinimizeResult


def lattice_positions(p: Profile, eps: float) -> np.ndarray:
    return eps * p.indices


def eps_solve(pot: NormalizedPotential, beta: float, eps: float, n: int | None = None,
              cfg: FlowConfig | None = None, window: float = 6.0, margin: float = 6.0,
              setting: Setting | str = Setting.INTER_SITE,
              limit: ContinuumSolution | None = None) -> EpsRun:
    """Minimize the eps-scaled energy (coupling beta / eps^2) and compare with the limit.

    The flow step is capped at 0.8 of the explicit Euler threshold for the
    scaled coupling, and the step budget is raised accordingly.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    setting = Setting.parse(setting)
    if n is None:
        n = math.ceil((window + margin) / eps)
    if eps * n < window + margin:
        raise WindowNotCovered(
            f"eps*N = {eps * n:g} does not cover window {window:g} + margin {margin:g}")
    b_eps = beta / eps ** 2
    base = cfg or FlowConfig(max_steps=400_000)
    tau = min(base.tau, 0.8 * pot.stable_tau(b_eps))
    res = minimize(setting, n, pot, b_eps, replace(base, tau=tau))
    limit = limit or limit_profile(pot, beta)
    prof = res.profile
    xi = lattice_positions(prof, eps)
    mask = xi <= window
    err = np.abs(prof.values[mask] - limit(xi[mask]))
    # the on-site center u_0 = 0 = u(0) contributes no error
    sup_err = float(err.max()) if err.size else 0.0
    return EpsRun(eps, prof, sup_err, window, xi[mask], prof.values[mask],
                  limit(xi[mask]), res)


def eps_sweep(pot, beta, eps_list, cfg=None, window=6.0, margin=6.0,
              setting=Setting.INTER_SITE, workers: int = 1) -> list[EpsRun]:
    limit = limit_profile(pot, beta)

    def run(e):
        return eps_solve(pot, beta, e, None, cfg, window, margin, setting, limit)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, eps_list))
    return [run(e) for e in eps_list]


@dataclass(frozen=True)
class EnergyBound:
    f_part: float
    d_eps_part: float
    total: float
    competitor_total: float

    @property
    def below_competitor(self) -> bool:
        return self.total <= self.competitor_total


def ramp_competitor(setting: Setting, eps: float) -> Profile:
    """v(eps j) = eps j for eps |j| < 1, sgn j beyond."""
    n = math.ceil(1.0 / eps) + 1
    j = np.arange(1, n + 1, dtype=float)
    if setting is Setting.INTER_SITE:
        j -= 0.5
    v = np.where(eps * j < 1.0, eps * j, 1.0)
    return Profile(setting, v)


def scaled_energy(p: Profile, pot: NormalizedPotential, beta: float, eps: float):
    """E_eps = eps sum F(u_j) + (beta / eps) sum (u_{j+1} - u_j)^2."""
    e = energy(p, pot, beta / eps ** 2)
    return eps * e.f_part, beta / eps * e.d_part


def energy_bound_check(run: EpsRun, pot: NormalizedPotential, beta: float) -> EnergyBound:
    f_part, d_part = scaled_energy(run.profile, pot, beta, run.eps)
    cf, cd = scaled_energy(ramp_competitor(run.profile.setting, run.eps), pot, beta, run.eps)
    return EnergyBound(f_part, d_part, f_part + d_part, cf + cd)
