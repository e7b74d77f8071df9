"""Explicit Euler gradient flow of the lattice energy on the Ritz set.

One flow step is

    u_j <- u_j - tau (F'(u_j) - 2 beta (u_{j+1} + u_{j-1} - 2 u_j)),

followed (by default) by the Euclidean projection back onto the set of
non-decreasing profiles with values in [0, 1].
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import isotonic_regression

from .errors import NonFiniteValue
from .lattice import (EnergyBreakdown, Profile, Setting, energy, energy_parts,
                      gradient_array, shock_profile)
from .potential import NormalizedPotential

STRICT_FLOOR = 10.0 * np.finfo(float).eps


@dataclass(frozen=True)
class FlowConfig:
    tau: float = 0.1
    max_steps: int = 5000
    residual_tol: float = 1e-10
    enforce_monotone: bool = True
    clamp_to_unit: bool = True

    def __post_init__(self):
        if not self.tau >= 0 or not math.isfinite(self.tau):
            raise ValueError(f"tau must be non-negative, got {self.tau}")
        if self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")


@dataclass
class MinimizeResult:
    profile: Profile
    energy: EnergyBreakdown
    residual: float
    steps_taken: int
    energy_trace: list[float]
    residual_trace: list[float]
    converged: bool
    strictly_increasing: bool
    beta: float
    config: FlowConfig = field(default_factory=FlowConfig)


def project(values: np.ndarray, monotone: bool = True, clamp: bool = True) -> np.ndarray:
    """Nearest non-decreasing sequence in [0, 1] (isotonic fit, then clip)."""
    if monotone and values.size > 1:
        values = isotonic_regression(values).x
    if clamp:
        values = np.clip(values, 0.0, 1.0)
    return values


def _step(values, setting, pot, beta, tau, monotone, clamp):
    new = values - 2.0 * tau * gradient_array(values, setting, pot, beta)
    if not np.all(np.isfinite(new)):
        raise NonFiniteValue(f"non-finite iterate (tau={tau:g} probably too large)")
    return project(new, monotone, clamp)


def flow_step(p: Profile, pot: NormalizedPotential, beta: float, tau: float,
              enforce_monotone: bool = True, clamp_to_unit: bool = True) -> Profile:
    """Apply one explicit Euler step of the gradient flow."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    new = _step(p.values, p.setting, pot, beta, tau, enforce_monotone, clamp_to_unit)
    if enforce_monotone and clamp_to_unit:
        return Profile(p.setting, new)
    return Profile.unchecked(p.setting, new)


def is_strictly_increasing(p: Profile, floor: float = STRICT_FLOOR) -> bool:
    """Strict increase of the whole chain u_0 (or -u_{1/2}) < u_1 < ... < u_N < 1."""
    v = p.values
    start = 0.0 if p.setting is Setting.ON_SITE else -v[0]
    chain = np.concatenate([[start], v, [1.0]])
    gaps = np.diff(chain)
    return bool(np.all(gaps > floor * np.maximum(1.0, np.abs(chain[:-1]))))


def minimize(setting: Setting | str, n: int, pot: NormalizedPotential, beta: float,
             cfg: FlowConfig | None = None, initial: Profile | None = None) -> MinimizeResult:
    """Run the gradient flow from the shock profile until the residual is small.

    Stops when ``sup |F'(u) - 2 beta Lap u| <= cfg.residual_tol`` or after
    ``cfg.max_steps`` steps; in the latter case ``converged`` is False.
    """
    cfg = cfg or FlowConfig()
    setting = Setting.parse(setting)
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if cfg.tau >= pot.stable_tau(beta):
        warnings.warn(
            f"tau={cfg.tau:g} exceeds the explicit Euler threshold "
            f"{pot.stable_tau(beta):.4g}; energy descent is not guaranteed",
            RuntimeWarning, stacklevel=2)
    p0 = initial if initial is not None else shock_profile(setting, n)
    u = np.array(p0.values, dtype=float)
    monotone, clamp = cfg.enforce_monotone, cfg.clamp_to_unit

    def measure(vals):
        g = gradient_array(vals, setting, pot, beta)
        f_part, d_part = energy_parts(vals, setting, pot)
        return 2.0 * float(np.max(np.abs(g))), f_part + beta * d_part

    res, e = measure(u)
    residuals, energies = [res], [e]
    steps = 0
    while res > cfg.residual_tol and steps < cfg.max_steps:
        u = _step(u, setting, pot, beta, cfg.tau, monotone, clamp)
        steps += 1
        res, e = measure(u)
        residuals.append(res)
        energies.append(e)

    if monotone and clamp:
        prof = Profile(setting, u)
    else:
        prof = Profile.unchecked(setting, u)
    return MinimizeResult(
        profile=prof, energy=energy(prof, pot, beta), residual=res,
        steps_taken=steps, energy_trace=energies, residual_trace=residuals,
        converged=res <= cfg.residual_tol,
        strictly_increasing=is_strictly_increasing(prof),
        beta=beta, config=cfg)


@dataclass
class SweepResult:
    ns: list[int]
    energies: list[float]
    differences: list[float]
    monotone: bool
    results: list[MinimizeResult]

    @property
    def rows(self) -> list[tuple[int, float]]:
        return list(zip(self.ns, self.energies))


def n_sweep(setting: Setting | str, n_list, pot: NormalizedPotential, beta: float,
            cfg: FlowConfig | None = None, workers: int = 1,
            noise: float = 1e-12) -> SweepResult:
    """Minimum energies on nested Ritz sets M_N for increasing N.

    Since M_N1 is contained in M_N2 for N1 < N2, the minima must be
    non-increasing; ``monotone`` reports whether this holds up to ``noise``.
    """
    ns = [int(k) for k in n_list]
    if any(b < a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_list must be non-decreasing")
    cfg = cfg or FlowConfig()

    def run(k):
        return minimize(setting, k, pot, beta, cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, ns))
    else:
        results = [run(k) for k in ns]
    energies = [r.energy.total for r in results]
    diffs = [a - b for a, b in zip(energies, energies[1:])]
    return SweepResult(ns, energies, diffs, all(d >= -noise for d in diffs), results)


def with_tau(cfg: FlowConfig, tau: float, **kw) -> FlowConfig:
    return replace(cfg, tau=tau, **kw)
