"""Oscillator potentials, their normalization, and the existence hypotheses.

A potential enters the standing wave problem only through

    F(eta) = Psi(eta^2) - Psi(1) - Psi'(1) (eta^2 - 1)

after rescaling so that the asymptotic states are +-1 and the frequency
sigma = Psi'(1) equals one.  Potentials can be supplied either as Psi (with
its first two derivatives) or directly as F.  All callables must accept and
return numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidPotential, NonPositiveFrequency, OutOfDomain

Func = Callable[[np.ndarray], np.ndarray]

DOMAIN_SLACK = 1e-6
HYPOTHESIS_SAMPLES = 10_000


class Mode(enum.Enum):
    FROM_PSI = "psi"
    FROM_F = "f"


@dataclass(frozen=True)
class PotentialSpec:
    """User supplied potential.

    In ``FROM_PSI`` mode ``psi``, ``psi_prime`` and ``psi_second`` describe
    Psi on ``[0, u_inf**2]``.  In ``FROM_F`` mode ``f``, ``f_prime`` (and
    optionally ``f_second``) give the already normalized F on ``[-1, 1]``.
    """

    mode: Mode
    psi: Func | None = None
    psi_prime: Func | None = None
    psi_second: Func | None = None
    f: Func | None = None
    f_prime: Func | None = None
    f_second: Func | None = None
    u_inf: float = 1.0
    name: str = "custom"
    # None disables the finite-difference consistency check (tabulated data)
    consistency_rtol: float | None = 1e-5

    @classmethod
    def from_psi(cls, psi, psi_prime, psi_second, u_inf=1.0, name="custom", **kw):
        return cls(Mode.FROM_PSI, psi=psi, psi_prime=psi_prime,
                   psi_second=psi_second, u_inf=float(u_inf), name=name, **kw)

    @classmethod
    def from_f(cls, f, f_prime, f_second=None, name="custom", **kw):
        return cls(Mode.FROM_F, f=f, f_prime=f_prime, f_second=f_second,
                   name=name, **kw)

    def validate(self, samples: int = 257) -> None:
        """Sample the supplied functions and raise InvalidPotential on failure."""
        if self.mode is Mode.FROM_PSI:
            if None in (self.psi, self.psi_prime, self.psi_second):
                raise InvalidPotential("psi, psi_prime and psi_second are required")
            if not (self.u_inf > 0 and math.isfinite(self.u_inf)):
                raise InvalidPotential(f"u_inf must be positive, got {self.u_inf}")
            x_inf = self.u_inf ** 2
            x = np.linspace(0.0, x_inf, samples)
            # psi'' may be singular at x = 0 for sub-quadratic power laws
            checks = [(self.psi, x), (self.psi_prime, x), (self.psi_second, x[1:])]
            g, gp = self.psi, self.psi_prime
            lo = 0.0
        else:
            if None in (self.f, self.f_prime):
                raise InvalidPotential("f and f_prime are required")
            x = np.linspace(-1.0, 1.0, samples)
            checks = [(self.f, x), (self.f_prime, x)]
            if self.f_second is not None:
                checks.append((self.f_second, x))
            g, gp = self.f, self.f_prime
            x_inf, lo = 1.0, -1.0
        with np.errstate(all="ignore"):
            for fn, pts in checks:
                vals = np.asarray(fn(pts), dtype=float)
                if not np.all(np.isfinite(vals)):
                    raise InvalidPotential(f"{self.name}: non-finite values on the sample grid")
            if self.consistency_rtol is None:
                return
            h = 1e-5 * max(1.0, x_inf)
            pts = x[(x > lo + 2 * h) & (x < x_inf - 2 * h)]
            fd = (np.asarray(g(pts + h)) - np.asarray(g(pts - h))) / (2 * h)
            exact = np.asarray(gp(pts), dtype=float)
        err = np.abs(fd - exact) / np.maximum(1.0, np.abs(exact))
        if err.size and err.max() > self.consistency_rtol:
            k = int(np.argmax(err))
            raise InvalidPotential(
                f"{self.name}: derivative inconsistent with finite differences "
                f"at x={pts[k]:.6g} (relative error {err[k]:.3g})")


@dataclass(frozen=True)
class NormalizedPotential:
    """Potential after rescaling to sigma = Psi(1) = Psi'(1) = 1, u_inf = 1.

    ``scale_eta`` is the amplitude scale (physical u = scale_eta * normalized
    u), ``scale_tau`` the time scale and ``beta_factor`` the multiplier that
    converts a physical coupling to the normalized one (equal to tau).
    """

    f: Func
    f_prime: Func
    f_second: Func
    psi_hat: Func
    psi_hat_prime: Func
    f_second_at_1: float
    scale_eta: float = 1.0
    scale_tau: float = 1.0
    shift_delta: float = 0.0
    beta_factor: float = 1.0
    sigma: float = 1.0
    name: str = "custom"
    psi_hat_second: Func | None = field(default=None, repr=False)
    slack: float = DOMAIN_SLACK

    def _check(self, eta):
        eta = np.asarray(eta, dtype=float)
        if np.any(~np.isfinite(eta)) or np.any(np.abs(eta) > 1.0 + self.slack):
            bad = eta[~(np.abs(eta) <= 1.0 + self.slack)].ravel()[0]
            raise OutOfDomain(f"eta={bad!r} outside [-1, 1] (slack {self.slack:g})")
        return eta

    def F(self, eta):
        eta = self._check(eta)
        return self.f(eta)

    def F_prime(self, eta):
        eta = self._check(eta)
        return self.f_prime(eta)

    def F_second(self, eta):
        eta = self._check(eta)
        return self.f_second(eta)

    def psi_nonlinearity(self, eta):
        """psi(eta) = Psi'(eta^2) eta, the nonlinearity of the wave equation."""
        eta = self._check(eta)
        return self.psi_hat_prime(eta * eta) * eta

    @cached_property
    def f_second_max(self) -> float:
        eta = np.linspace(-1.0, 1.0, 2001)
        return float(np.max(self.f_second(eta)))

    def stable_tau(self, beta: float) -> float:
        """Explicit Euler threshold 1 / (max F''/2 + 4 beta) for the gradient flow."""
        return 1.0 / (max(self.f_second_max, 0.0) / 2.0 + 4.0 * beta)

    def as_spec(self) -> PotentialSpec:
        if self.psi_hat_second is not None:
            return PotentialSpec.from_psi(self.psi_hat, self.psi_hat_prime,
                                          self.psi_hat_second, 1.0, name=self.name)
        return PotentialSpec.from_f(self.f, self.f_prime, self.f_second, name=self.name)


def normalize(spec: PotentialSpec) -> NormalizedPotential:
    """Rescale a potential so that sigma = Psi(1) = Psi'(1) = 1 and u_inf = 1."""
    spec.validate()
    if spec.mode is Mode.FROM_F:
        return _from_f(spec)

    eta = spec.u_inf
    x_inf = eta * eta
    sigma = float(spec.psi_prime(np.asarray(x_inf)))
    if not sigma > 0:
        raise NonPositiveFrequency(
            f"Psi'(u_inf^2) = {sigma:g} <= 0; no positive frequency normalization")
    tau = 1.0 / sigma
    delta = 1.0 - tau * float(spec.psi(np.asarray(x_inf))) / x_inf
    psi, dpsi, ddpsi = spec.psi, spec.psi_prime, spec.psi_second

    def psi_hat(x):
        return tau / x_inf * psi(x_inf * np.asarray(x)) + delta

    def psi_hat_prime(x):
        return tau * dpsi(x_inf * np.asarray(x))

    def psi_hat_second(x):
        return tau * x_inf * ddpsi(x_inf * np.asarray(x))

    def f(u):
        s = u * u
        return psi_hat(s) - s

    def f_prime(u):
        return 2.0 * u * (psi_hat_prime(u * u) - 1.0)

    def f_second(u):
        s = u * u
        with np.errstate(invalid="ignore"):
            curv = np.where(s > 0.0, 4.0 * s * psi_hat_second(s), 0.0)
        return 2.0 * (psi_hat_prime(s) - 1.0) + curv

    return NormalizedPotential(
        f=f, f_prime=f_prime, f_second=f_second,
        psi_hat=psi_hat, psi_hat_prime=psi_hat_prime, psi_hat_second=psi_hat_second,
        f_second_at_1=4.0 * float(psi_hat_second(np.asarray(1.0))),
        scale_eta=eta, scale_tau=tau, shift_delta=delta, beta_factor=tau,
        name=spec.name)


def _from_f(spec: PotentialSpec) -> NormalizedPotential:
    f, fp = spec.f, spec.f_prime
    ends = np.array([-1.0, 1.0])
    tol = 1e-10
    if np.max(np.abs(f(ends))) > tol or np.max(np.abs(fp(ends))) > tol:
        raise InvalidPotential(f"{spec.name}: F(+-1) and F'(+-1) must vanish")
    fpp = spec.f_second
    if fpp is None:
        h = 1e-5

        def fpp(u):
            u = np.asarray(u, dtype=float)
            # one-sided near the ends so the stencil stays inside [-1, 1]
            c = np.clip(u, -1.0 + h, 1.0 - h)
            return (fp(c + h) - fp(c - h)) / (2 * h)

    def psi_hat(x):
        x = np.asarray(x, dtype=float)
        return f(np.sqrt(x)) + x

    def psi_hat_prime(x):
        x = np.asarray(x, dtype=float)
        s = np.sqrt(x)
        small = s < 1e-8
        ratio = np.divide(fp(s), 2.0 * s, out=np.zeros_like(s), where=~small)
        # F odd-derivative limit: F'(s)/(2s) -> F''(0)/2
        ratio = np.where(small, 0.5 * fpp(np.zeros_like(s)), ratio)
        return 1.0 + ratio

    return NormalizedPotential(
        f=f, f_prime=fp, f_second=fpp, psi_hat=psi_hat, psi_hat_prime=psi_hat_prime,
        f_second_at_1=float(fpp(np.asarray(1.0))), name=spec.name)


# -- evaluation helpers ------------------------------------------------------

def eval_F(pot: NormalizedPotential, eta):
    return pot.F(eta)


def eval_F_prime(pot: NormalizedPotential, eta):
    return pot.F_prime(eta)


def eval_F_second_at_1(pot: NormalizedPotential) -> float:
    return pot.f_second_at_1


def psi_nonlinearity(pot: NormalizedPotential, eta):
    return pot.psi_nonlinearity(eta)


# -- hypotheses ---------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisReport:
    f_positive_interior: bool
    f_second_at_1_positive: bool
    min_f_interior: float
    argmin_eta: float
    eta_star_roots: tuple[float, ...]

    @property
    def holds(self) -> bool:
        return self.f_positive_interior and self.f_second_at_1_positive


def _interior_grid(samples: int) -> np.ndarray:
    k = np.arange(1, samples + 1)
    return -1.0 + 2.0 * k / (samples + 1)


def negative_minima(pot: NormalizedPotential, samples: int = HYPOTHESIS_SAMPLES) -> list[float]:
    """Interior local minima eta* of F with F(eta*) < 0, sorted ascending.

    These are the plateau heights of non-convex potentials.  Local maxima of
    F are skipped even when F < 0 there, since a profile cannot settle on them.
    """
    eta = _interior_grid(samples)
    fp = pot.F_prime(eta)
    roots = []
    for k in range(len(eta) - 1):
        a, b = fp[k], fp[k + 1]
        if a == 0.0 and k > 0 and fp[k - 1] < 0.0 < b:
            r = eta[k]
        elif a < 0.0 < b:
            r = brentq(pot.F_prime, eta[k], eta[k + 1], xtol=1e-15, rtol=1e-15)
        else:
            continue
        if pot.F(r) < 0.0:
            roots.append(float(r))
    return roots


def check_hypotheses(pot: NormalizedPotential, samples: int = HYPOTHESIS_SAMPLES,
                     floor: float = 1e-6) -> HypothesisReport:
    """Check F > 0 on (-1, 1) and F''(1) > 0 by dense sampling.

    Positivity passes when every sample exceeds ``floor * h**2`` (h the grid
    spacing); F behaves like F''(1)/2 (1 - |eta|)^2 near the ends, so the
    threshold scales with the resolution there.
    """
    if samples < 3:
        raise ValueError("samples must be >= 3")
    eta = _interior_grid(samples)
    vals = pot.F(eta)
    k = int(np.argmin(vals))
    h = 2.0 / (samples + 1)
    positive = bool(np.all(vals > floor * h * h))
    return HypothesisReport(
        f_positive_interior=positive,
        f_second_at_1_positive=bool(pot.f_second_at_1 > 0.0),
        min_f_interior=float(vals[k]),
        argmin_eta=float(eta[k]),
        eta_star_roots=() if positive else tuple(negative_minima(pot, samples)),
    )


# -- built-in potentials ---------------------------------------------------------

def cubic_spec() -> PotentialSpec:
    """Psi(x) = x^2/2 + 1/2, i.e. F(eta) = (eta^2 - 1)^2 / 2."""
    return PotentialSpec.from_psi(
        lambda x: 0.5 * np.asarray(x) ** 2 + 0.5,
        lambda x: np.asarray(x, dtype=float),
        lambda x: np.ones_like(np.asarray(x, dtype=float)),
        name="cubic")


def power_spec(d: float) -> PotentialSpec:
    """Power law with psi(eta) = eta^(1+d) / (1+d)."""
    if not d > 0:
        raise InvalidPotential(f"power exponent d must be positive, got {d}")
    p = d / 2.0 + 1.0
    c = 1.0 / (1.0 + d)

    def ddpsi(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return c * (d / 2.0) * x ** (d / 2.0 - 1.0)

    return PotentialSpec.from_psi(
        lambda x: c / p * np.asarray(x, dtype=float) ** p,
        lambda x: c * np.asarray(x, dtype=float) ** (d / 2.0),
        ddpsi, name=f"power:{d:g}")


def doublewell_spec() -> PotentialSpec:
    """Non-convex F(eta) = (eta^2 - 1)^2 (eta^2 - 1/4) / 2 with F(0) = -1/8."""

    def f(u):
        s = np.asarray(u) ** 2
        return 0.5 * (s - 1.0) ** 2 * (s - 0.25)

    def fp(u):
        u = np.asarray(u)
        s = u * u
        return u * (s - 1.0) * (3.0 * s - 1.5)

    def fpp(u):
        s = np.asarray(u) ** 2
        return (s - 1.0) * (3.0 * s - 1.5) + 2.0 * s * (3.0 * s - 1.5) + 6.0 * s * (s - 1.0)

    return PotentialSpec.from_f(f, fp, fpp, name="doublewell")


def table_spec(path: str | Path) -> PotentialSpec:
    """Tabulated F from a whitespace/comma separated file of (eta, F, F') rows.

    Values are linearly interpolated.  A table covering only eta >= 0 is
    extended by evenness of F.
    """
    path = Path(path)
    try:
        data = np.loadtxt(path, delimiter=None if path.suffix != ".csv" else ",",
                          comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise InvalidPotential(f"cannot read potential table {path}: {exc}") from exc
    if data.shape[1] != 3 or data.shape[0] < 2:
        raise InvalidPotential(f"{path}: expected at least two rows of (eta, F, F')")
    order = np.argsort(data[:, 0])
    eta, fv, fpv = data[order].T
    if np.any(np.diff(eta) <= 0):
        raise InvalidPotential(f"{path}: duplicate eta values")
    half = eta[0] >= 0.0
    if half:
        eta = np.concatenate([-eta[::-1], eta])
        fv = np.concatenate([fv[::-1], fv])
        fpv = np.concatenate([-fpv[::-1], fpv])
        eta, idx = np.unique(eta, return_index=True)
        fv, fpv = fv[idx], fpv[idx]
    if eta[0] > -1.0 or eta[-1] < 1.0:
        raise InvalidPotential(f"{path}: table must cover [-1, 1] (or [0, 1])")
    slopes = np.diff(fpv) / np.diff(eta)

    def f(u):
        return np.interp(u, eta, fv)

    def fp(u):
        return np.interp(u, eta, fpv)

    def fpp(u):
        u = np.asarray(u, dtype=float)
        k = np.clip(np.searchsorted(eta, u, side="right") - 1, 0, len(slopes) - 1)
        # the segment ending at +1 defines F''(1)
        k = np.where(u >= eta[-1], len(slopes) - 1, k)
        return slopes[k]

    return PotentialSpec.from_f(f, fp, fpp, name=str(path), consistency_rtol=None)


def get_spec(name: str) -> PotentialSpec:
    """Resolve a CLI potential name ("cubic", "power:d", "doublewell" or a path)."""
    if name == "cubic":
        return cubic_spec()
    if name == "doublewell":
        return doublewell_spec()
    if name.startswith("power:"):
        try:
            d = float(name.split(":", 1)[1])
        except ValueError as exc:
            raise InvalidPotential(f"bad power exponent in {name!r}") from exc
        return power_spec(d)
    if Path(name).is_file():
        return table_spec(name)
    raise InvalidPotential(f"unknown potential {name!r}")


def get_potential(name: str) -> NormalizedPotential:
    return normalize(get_spec(name))


BUILTIN_NAMES = ("cubic", "power:2", "power:3", "doublewell")
