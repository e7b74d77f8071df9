"""Exponential tails and plateau diagnostics for computed profiles.

Linearizing the wave equation at u = 1 gives the decay rate lambda > 0 with

    4 beta (cosh(lambda) - 1) = F''(1),

equivalently lambda = -ln(kappa) where kappa in (0, 1) is the small root of
kappa^2 - (2 + delta) kappa + 1 = 0 and delta = F''(1) / (2 beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DegenerateTail, NoExponentialTail, NoPlateauCandidates, WindowTooSmall
from .lattice import Profile, Setting, energy_parts
from .potential import NormalizedPotential, negative_minima

TAIL_FLOOR = 1e-12
DEGENERATE_FLOOR = 100.0 * np.finfo(float).eps
PLATEAU_TOL = 1e-3
PLATEAU_MIN_RUN = 3


@dataclass(frozen=True)
class DecayEstimate:
    lambda_exact: float
    kappa_inf: float
    delta: float
    beta: float
    f_second_at_1: float
    lambda_fit: float | None = None
    fit_window: tuple[float, float] | None = None
    fit_r2: float | None = None


def arccosh1p(y: float) -> float:
    """arccosh(1 + y) without cancellation for small y >= 0."""
    return math.log1p(y + math.sqrt(y * (y + 2.0)))


def decay_rate(beta: float, f_second_at_1: float) -> DecayEstimate:
    if not f_second_at_1 > 0:
        raise NoExponentialTail(
            f"F''(1) = {f_second_at_1:g} <= 0: no exponential tail")
    if not beta > 0:
        raise ValueError("beta must be positive")
    delta = f_second_at_1 / (2.0 * beta)
    lam = arccosh1p(delta / 2.0)
    root = math.sqrt(delta) * math.sqrt(4.0 + delta)
    kappa = (2.0 + delta - root) / 2.0
    # the same root via the product of roots (= 1); cancellation-free for large delta
    kappa_alt = 2.0 / (2.0 + delta + root)
    if abs(kappa - kappa_alt) > 8.0 * np.finfo(float).eps * (2.0 + delta):
        raise ArithmeticError("inconsistent decay rate roots")
    return DecayEstimate(lambda_exact=lam, kappa_inf=kappa_alt, delta=delta,
                         beta=beta, f_second_at_1=f_second_at_1)


def root_residual(est: DecayEstimate) -> float:
    """Relative residual of 4 beta (cosh lambda - 1) = F''(1)."""
    lhs = 8.0 * est.beta * math.sinh(est.lambda_exact / 2.0) ** 2
    return abs(lhs - est.f_second_at_1) / est.f_second_at_1


def _tail(p: Profile, window: tuple[float, float] | None):
    j = p.indices
    w = 1.0 - p.values
    if window is not None:
        lo, hi = window
        if lo < j[0] or hi > j[-1]:
            raise ValueError(f"window {window} outside stored range [{j[0]}, {j[-1]}]")
        mask = (j >= lo) & (j <= hi)
        j, w = j[mask], w[mask]
    return j, w


def default_window(p: Profile, floor: float = TAIL_FLOOR) -> tuple[float, float]:
    """From ceil(0.3 N) to the last index whose tail 1 - u_j exceeds ``floor``."""
    j = p.indices
    w = 1.0 - p.values
    start = math.ceil(0.3 * p.n)
    if p.setting is Setting.INTER_SITE:
        start -= 0.5
    above = np.nonzero(w > floor)[0]
    if above.size == 0:
        raise DegenerateTail("profile has no tail above the floor")
    end = float(j[above[-1]])
    lo = max(float(j[0]), start)
    return lo, max(lo, end)


def kappa_sequence(p: Profile, window: tuple[float, float] | None = None) -> np.ndarray:
    """Ratios kappa_j = w_j / w_{j-1} of the tail w_j = 1 - u_j."""
    _, w = _tail(p, window)
    if np.any(w <= DEGENERATE_FLOOR):
        raise DegenerateTail("tail values at round-off level; ratios are meaningless")
    return w[1:] / w[:-1]


def fit_tail(p: Profile, window: tuple[float, float] | None = None) -> tuple[float, float]:
    """Least-squares rate of ln(1 - u_j) against j; returns (lambda_fit, r^2)."""
    if window is None:
        window = default_window(p)
    j, w = _tail(p, window)
    if j.size < 4:
        raise WindowTooSmall(f"need at least 4 points in the fit window, got {j.size}")
    if np.any(w <= DEGENERATE_FLOOR):
        raise DegenerateTail("tail values at round-off level inside the fit window")
    fit = stats.linregress(j, np.log(w))
    return float(-fit.slope), float(fit.rvalue ** 2)


def decay_report(p: Profile, pot: NormalizedPotential, beta: float,
                 window: tuple[float, float] | None = None) -> DecayEstimate:
    est = decay_rate(beta, pot.f_second_at_1)
    window = window or default_window(p)
    lam, r2 = fit_tail(p, window)
    return DecayEstimate(est.lambda_exact, est.kappa_inf, est.delta, beta,
                         est.f_second_at_1, lam, window, r2)


def tail_bounds(p: Profile, lam_lo: float, lam_hi: float,
                window: tuple[float, float] | None = None) -> tuple[float, float]:
    """Constants (c_lo, c_hi) with c_lo e^{-lam_hi j} <= w_j <= c_hi e^{-lam_lo j}."""
    j, w = _tail(p, window or default_window(p))
    return float(np.min(w * np.exp(lam_hi * j))), float(np.max(w * np.exp(lam_lo * j)))


# -- non-convex potentials ----------------------------------------------------------

@dataclass(frozen=True)
class Plateau:
    height: float
    run_length: int
    start: float | None
    stop: float | None
    height_error: float | None

    @property
    def found(self) -> bool:
        return self.run_length >= PLATEAU_MIN_RUN


@dataclass(frozen=True)
class PlateauReport:
    eta_stars: tuple[float, ...]
    plateaus: tuple[Plateau, ...]

    @property
    def found(self) -> bool:
        return any(pl.found for pl in self.plateaus)

    @property
    def best(self) -> Plateau:
        return max(self.plateaus, key=lambda pl: pl.run_length)


def _longest_run(mask: np.ndarray) -> tuple[int, int]:
    best, best_start, run = 0, -1, 0
    for k, hit in enumerate(mask):
        run = run + 1 if hit else 0
        if run > best:
            best, best_start = run, k - run + 1
    return best, best_start


def plateau_diagnostics(p: Profile, pot: NormalizedPotential,
                        tol: float = PLATEAU_TOL) -> PlateauReport:
    """Find runs of the stored profile sitting at a negative minimum eta* of F.

    By oddness a run at +eta* on the stored half mirrors one at -eta*.
    ``height_error`` is |mean(run) - eta*|.
    """
    stars = tuple(r for r in negative_minima(pot) if r >= 0.0)
    if not stars:
        raise NoPlateauCandidates("F has no interior minimum with F < 0")
    j, v = p.indices, p.values
    plateaus = []
    for eta in stars:
        length, start = _longest_run(np.abs(v - eta) < tol)
        if length == 0:
            plateaus.append(Plateau(eta, 0, None, None, None))
            continue
        seg = v[start:start + length]
        plateaus.append(Plateau(eta, length, float(j[start]), float(j[start + length - 1]),
                                float(abs(seg.mean() - eta))))
    return PlateauReport(stars, tuple(plateaus))


def plateau_family_energy(setting: Setting | str, pot: NormalizedPotential, beta: float,
                          eta_star: float, k: int) -> float:
    """Energy of u_j = eta* sgn j for |j| <= k and u_j = sgn j beyond."""
    setting = Setting.parse(setting)
    vals = np.full(k, float(eta_star))
    f_part, d_part = energy_parts(vals, setting, pot)
    return f_part + beta * d_part


def plateau_family_slope(setting, pot, beta, eta_star, ks=range(1, 51)) -> tuple[float, np.ndarray]:
    """Least-squares slope of the plateau family energy in k (expected 2 F(eta*))."""
    ks = np.asarray(list(ks), dtype=float)
    es = np.array([plateau_family_energy(setting, pot, beta, eta_star, int(k)) for k in ks])
    return float(stats.linregress(ks, es).slope), es
