"""Odd monotone lattice profiles on the Ritz set and the energy they carry.

Only the strictly positive half of a profile is stored.  The negative half
follows from oddness, ``u_0 = 0`` is implicit in the on-site setting, and
``u_j = 1`` for every ``j > N`` (the Ritz truncation).  All sums below are
over the full reflected lattice.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DNLSError
from .potential import NormalizedPotential


class Setting(enum.Enum):
    ON_SITE = "onsite"
    INTER_SITE = "intersite"

    @classmethod
    def parse(cls, text: "str | Setting") -> "Setting":
        if isinstance(text, cls):
            return text
        key = str(text).lower().replace("-", "").replace("_", "")
        aliases = {"onsite": cls.ON_SITE, "intersite": cls.INTER_SITE,
                   "offsite": cls.INTER_SITE}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown setting {text!r}") from None


class InadmissibleProfile(DNLSError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Profile:
    """Stored half of an odd, non-decreasing profile with values in [0, 1]."""

    setting: Setting
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "setting", Setting.parse(self.setting))
        if v.size < 1:
            raise InadmissibleProfile("a profile needs at least one stored value")
        if not self.is_admissible():
            raise InadmissibleProfile(
                "profile values must be finite, lie in [0, 1] and be non-decreasing")

    @classmethod
    def unchecked(cls, setting: Setting, values) -> "Profile":
        """Build a profile without the admissibility check (raw iterates)."""
        obj = object.__new__(cls)
        v = np.array(values, dtype=float).ravel()
        v.setflags(write=False)
        object.__setattr__(obj, "setting", Setting.parse(setting))
        object.__setattr__(obj, "values", v)
        return obj

    def is_admissible(self) -> bool:
        v = self.values
        return bool(np.all(np.isfinite(v)) and v.min() >= 0.0 and v.max() <= 1.0
                    and np.all(np.diff(v) >= 0.0))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def indices(self) -> np.ndarray:
        """Lattice positions of the stored values (1..N or 1/2..N-1/2)."""
        j = np.arange(1, self.n + 1, dtype=float)
        return j if self.setting is Setting.ON_SITE else j - 0.5

    def full(self, margin: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Reflected profile on ``|j| <= N + margin`` as (positions, values)."""
        pos = np.concatenate([self.values, np.ones(margin)])
        jpos = np.concatenate([self.indices, self.indices[-1] + np.arange(1, margin + 1)])
        if self.setting is Setting.ON_SITE:
            j = np.concatenate([-jpos[::-1], [0.0], jpos])
            u = np.concatenate([-pos[::-1], [0.0], pos])
        else:
            j = np.concatenate([-jpos[::-1], jpos])
            u = np.concatenate([-pos[::-1], pos])
        return j, u

    def __eq__(self, other):
        if not isinstance(other, Profile):
            return NotImplemented
        return self.setting is other.setting and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class EnergyBreakdown:
    total: float
    f_part: float
    d_part: float
    beta: float


@dataclass(frozen=True)
class GradientField:
    values: np.ndarray
    sup_norm: float


def shock_profile(setting: Setting | str, n: int) -> Profile:
    """u_j = sgn j, the exact minimizer at zero coupling."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Profile(Setting.parse(setting), np.ones(n))


# -- array level kernels (no admissibility checks) -----------------------------

def neighbors(values: np.ndarray, setting: Setting) -> tuple[np.ndarray, np.ndarray]:
    """Left and right neighbours with odd reflection and the +1 tail closure."""
    right = np.empty_like(values)
    right[:-1] = values[1:]
    right[-1] = 1.0
    left = np.empty_like(values)
    left[1:] = values[:-1]
    left[0] = 0.0 if setting is Setting.ON_SITE else -values[0]
    return left, right


def laplacian(values: np.ndarray, setting: Setting) -> np.ndarray:
    left, right = neighbors(values, setting)
    return left + right - 2.0 * values


def gradient_array(values, setting, pot: NormalizedPotential, beta: float) -> np.ndarray:
    """G(u)_j = F'(u_j)/2 - beta (u_{j+1} + u_{j-1} - 2 u_j) on stored indices."""
    values = np.asarray(values, dtype=float)
    return 0.5 * pot.F_prime(values) - beta * laplacian(values, setting)


def energy_parts(values, setting, pot: NormalizedPotential) -> tuple[float, float]:
    """(sum_j F(u_j), sum_j (u_{j+1} - u_j)^2) over the reflected lattice."""
    v = np.asarray(values, dtype=float)
    fv = pot.F(v)
    bonds = np.diff(v)
    tail = (1.0 - v[-1]) ** 2
    inner = math.fsum(bonds * bonds) + tail
    if setting is Setting.ON_SITE:
        f_part = float(pot.F(0.0)) + 2.0 * math.fsum(fv)
        d_part = 2.0 * (v[0] * v[0] + inner)
    else:
        f_part = 2.0 * math.fsum(fv)
        d_part = 4.0 * v[0] * v[0] + 2.0 * inner
    return f_part, d_part


# -- profile level operations ----------------------------------------------------

def energy(p: Profile, pot: NormalizedPotential, beta: float) -> EnergyBreakdown:
    f_part, d_part = energy_parts(p.values, p.setting, pot)
    return EnergyBreakdown(total=f_part + beta * d_part, f_part=f_part,
                           d_part=d_part, beta=beta)


def gateaux_gradient(p: Profile, pot: NormalizedPotential, beta: float) -> GradientField:
    """The field G(u) whose zeros are the standing waves.

    Note that G is half of the lattice derivative of E: for an odd
    perturbation v, d/dt E(u + t v) = 2 sum_{j in Z} v_j G(u)_j, which is
    ``4 * G`` per stored coordinate (see :func:`energy_gradient`).
    """
    g = gradient_array(p.values, p.setting, pot, beta)
    g.setflags(write=False)
    return GradientField(g, float(np.max(np.abs(g))))


def energy_gradient(p: Profile, pot: NormalizedPotential, beta: float) -> np.ndarray:
    """Partial derivatives of the reflected energy w.r.t. the stored values."""
    return 4.0 * gradient_array(p.values, p.setting, pot, beta)


def residual_sup(p: Profile, pot: NormalizedPotential, beta: float) -> float:
    """sup_j |F'(u_j) - 2 beta (u_{j+1} + u_{j-1} - 2 u_j)|."""
    return 2.0 * gateaux_gradient(p, pot, beta).sup_norm


def residual_field(p: Profile, pot: NormalizedPotential, beta: float) -> np.ndarray:
    return 2.0 * gradient_array(p.values, p.setting, pot, beta)


def stagger_values(values, setting: Setting) -> np.ndarray:
    """Multiply stored values by (-1)^j; an involution on raw sequences."""
    values = np.asarray(values, dtype=float)
    sign = np.where(np.arange(values.size) % 2 == 0, 1.0, -1.0)
    if Setting.parse(setting) is Setting.ON_SITE:
        sign = -sign
    return sign * values


def staggering_transform(p: Profile) -> np.ndarray:
    """(-1)^j u_j on stored indices.

    On the half-integer lattice the sign is (-1)^(j - 1/2), so the value at
    j = 1/2 keeps its sign.  The output is generally not monotone and is
    returned as a plain array.
    """
    return stagger_values(p.values, p.setting)
