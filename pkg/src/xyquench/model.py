"""Closed-form statics of the transverse-field XY chain.

Mode grid, Bogoliubov angle, mode gap, per-mode and total geometric phases,
the linear quench field law and the finite-size adiabatic threshold.

All functions are pure; totals are accumulated with ``math.fsum`` so the
result does not depend on evaluation order or on how callers parallelize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import DomainError, GaplessPointError

TWO_PI = 2.0 * math.pi

#: Gaps at or below this value are treated as level crossings.
GAP_FLOOR = 1e-12

#: "tau_q >> N^2 / (2 pi^3)" is read as tau_q >= ADIABATIC_MARGIN * threshold.
ADIABATIC_MARGIN = 10.0


class PhaseConvention(str, Enum):
    RAW = "raw"
    MOD_2PI = "mod2pi"


def wrap_phase(x: float) -> float:
    """Reduce a phase to [0, 2*pi)."""
    r = math.fmod(x, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:
        r -= TWO_PI
    return r


def circular_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle, in [0, pi]."""
    d = wrap_phase(a - b)
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class ChainSpec:
    """Chain of ``N = 2M + 1`` sites with anisotropy ``alpha``."""

    N: int
    alpha: float

    def __post_init__(self) -> None:
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise DomainError(f"N must be an integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if self.N < 3 or self.N % 2 == 0:
            raise DomainError(f"N must be odd and >= 3, got {self.N}")
        if not (0.0 <= self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha!r}")

    @property
    def M(self) -> int:
        return (self.N - 1) // 2


@dataclass(frozen=True)
class QuenchSchedule:
    """Linear ramp ``B(t) = -t / tau_q``, switched off at ``t = 0``."""

    tau_q: float

    def __post_init__(self) -> None:
        if not (self.tau_q > 0.0) or not math.isfinite(self.tau_q):
            raise DomainError(f"tau_q must be positive and finite, got {self.tau_q!r}")


@dataclass(frozen=True)
class ModeGrid:
    """Positive pseudomomenta in ascending order; the full grid is ``{+k, -k}``."""

    momenta: tuple[float, ...]

    @classmethod
    def custom(cls, momenta: Sequence[float]) -> "ModeGrid":
        """Arbitrary positive grid. Meant for tests, not for physics runs."""
        ks = tuple(float(k) for k in momenta)
        if any(not (0.0 < k < math.pi) for k in ks):
            raise DomainError("custom momenta must lie strictly inside (0, pi)")
        if list(ks) != sorted(ks):
            raise DomainError("custom momenta must be ascending")
        return cls(ks)

    def __len__(self) -> int:
        return len(self.momenta)

    def __iter__(self):
        return iter(self.momenta)


@dataclass(frozen=True)
class PhaseReport:
    per_mode: tuple[tuple[float, float], ...]
    total_raw: float
    total_mod: float
    convention: PhaseConvention

    def to_dict(self) -> dict:
        return {
            "convention": self.convention.value,
            "per_mode": [[k, g] for k, g in self.per_mode],
            "total_mod": self.total_mod,
            "total_raw": self.total_raw,
        }


def single_spin_phase(theta: float) -> float:
    """Berry phase of the spin-up state of a spin-1/2 in a field at polar angle ``theta``.

    The spin-down state picks up the negative of this value.
    """
    if not (0.0 <= theta <= math.pi):
        raise DomainError(f"theta must lie in [0, pi], got {theta!r}")
    return math.pi * (1.0 - math.cos(theta))


def momentum_grid(spec: ChainSpec) -> ModeGrid:
    N = spec.N
    return ModeGrid(tuple((2 * j - 1) * math.pi / N for j in range(1, spec.M + 1)))


def energy_gap(k: float, B: float, alpha: float) -> float:
    return math.hypot(math.cos(k) - B, alpha * math.sin(k))


def bogoliubov_angle_cos(k: float, B: float, alpha: float) -> float:
    """cos(theta_k) = (cos k - B) / Lambda_k."""
    gap = energy_gap(k, B, alpha)
    if gap <= GAP_FLOOR:
        raise GaplessPointError(k, B, alpha, gap)
    c = (math.cos(k) - B) / gap
    # hypot can round a hair below |numerator| when the off-diagonal is tiny
    return max(-1.0, min(1.0, c))


def _apply_convention(phase: float, convention: PhaseConvention) -> float:
    if PhaseConvention(convention) is PhaseConvention.MOD_2PI:
        return wrap_phase(phase)
    return phase


def mode_phase(
    k: float, B: float, alpha: float, convention: PhaseConvention = PhaseConvention.RAW
) -> float:
    """Geometric phase pi * (1 - cos theta_k) of one mode."""
    return _apply_convention(math.pi * (1.0 - bogoliubov_angle_cos(k, B, alpha)), convention)


def total_phase(
    spec: ChainSpec, B: float, convention: PhaseConvention = PhaseConvention.RAW
) -> PhaseReport:
    """Per-mode phases on the positive grid and the total over the full +-k grid.

    Gamma_{-k} = Gamma_k, so the total is twice the positive-k sum. The mod-2pi
    total is reduced in units of whole turns (total / 2pi = sum of (1 - cos theta_k))
    which keeps exact multiples of 2pi at exactly zero.
    """
    convention = PhaseConvention(convention)
    grid = momentum_grid(spec)
    one_minus_cos = [1.0 - bogoliubov_angle_cos(k, B, spec.alpha) for k in grid]
    raw = [math.pi * x for x in one_minus_cos]
    turns = math.fsum(one_minus_cos)
    return PhaseReport(
        per_mode=tuple((k, _apply_convention(g, convention)) for k, g in zip(grid, raw)),
        total_raw=2.0 * math.fsum(raw),
        total_mod=wrap_phase(TWO_PI * (turns - math.floor(turns))),
        convention=convention,
    )


def field_at(t: float, schedule: QuenchSchedule) -> float:
    if t >= 0.0:
        return 0.0
    return -t / schedule.tau_q


def mode_phase_at_time(
    k: float,
    t: float,
    schedule: QuenchSchedule,
    alpha: float,
    convention: PhaseConvention = PhaseConvention.RAW,
) -> float:
    return mode_phase(k, field_at(t, schedule), alpha, convention)


def critical_mode_phase(k: float, alpha: float) -> float:
    """Mode phase at the critical instant t = -tau_q, where B = 1."""
    a = math.cos(k) + 1.0
    return math.pi * (1.0 - a / math.hypot(a, alpha * math.sin(k)))


def adiabatic_threshold(N: int) -> float:
    """Lower bound N^2 / (2 pi^3) on tau_q for a one-pair final state."""
    if N < 3:
        raise DomainError(f"N must be >= 3, got {N}")
    return N * N / (2.0 * math.pi**3)


def is_adiabatic(N: int, tau_q: float, margin: float = ADIABATIC_MARGIN) -> bool:
    return tau_q >= margin * adiabatic_threshold(N)
