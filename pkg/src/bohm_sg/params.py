"""Model parameters, shared state records and their validation.

Everything here lives in dimensionless units: positions of the spin particle
are measured in units of its initial packet width, pointer positions in units
of the pointer packet width, and time in units of ``m a**2 / hbar``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

NORMALIZATION_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when a parameter set violates its invariants."""


class NormalizationError(ValidationError):
    pass


class RangeError(ValidationError):
    pass


@dataclass(frozen=True)
class SpinWeights:
    """Probabilities of the two spin components, ``|alpha|**2`` and ``|beta|**2``."""

    w_plus: float
    w_minus: float

    @classmethod
    def from_polarization(cls, sigma: float) -> SpinWeights:
        return cls((1.0 + sigma) / 2.0, (1.0 - sigma) / 2.0)

    @property
    def sigma(self) -> float:
        return polarization(self)


@dataclass(frozen=True)
class ModelParams:
    v_prime: float
    V_prime: float
    eta: float
    n_pointer: int
    spin: SpinWeights

    @property
    def sqrt_n(self) -> float:
        return math.sqrt(self.n_pointer)

    @property
    def pointer_speed(self) -> float:
        """Drift speed of a fictitious pointer in dZ'/dt' units, ``eta*sqrt(N)*V'``."""
        return self.eta * self.sqrt_n * self.V_prime


@dataclass(frozen=True)
class ReducedState:
    t_prime: float
    q: float
    zhat1: float
    zhat2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.q, self.zhat1, self.zhat2], dtype=float)


@dataclass(frozen=True)
class FullState:
    t_prime: float
    q: float
    z_p: tuple[float, ...]
    z_n: tuple[float, ...]

    def __post_init__(self):
        if len(self.z_p) != len(self.z_n):
            raise RangeError(
                f"pointer sizes differ: {len(self.z_p)} vs {len(self.z_n)}"
            )
        object.__setattr__(self, "z_p", tuple(float(z) for z in self.z_p))
        object.__setattr__(self, "z_n", tuple(float(z) for z in self.z_n))

    @property
    def n_pointer(self) -> int:
        return len(self.z_p)

    def as_array(self) -> np.ndarray:
        return np.concatenate(([self.q], self.z_p, self.z_n)).astype(float)

    @classmethod
    def from_array(cls, t_prime: float, y: np.ndarray) -> FullState:
        n = (len(y) - 1) // 2
        return cls(float(t_prime), float(y[0]), tuple(y[1 : n + 1]), tuple(y[n + 1 :]))


@dataclass
class Trajectory:
    """Dense time series of one integrated state.

    ``t`` has shape ``(K,)`` and starts at 0; ``y`` has shape ``(K, d)`` with the
    state coordinates in the model's order (``q, zhat1, zhat2`` for the reduced
    system, ``q, z_p..., z_n...`` for the full one).
    """

    t: np.ndarray
    y: np.ndarray
    tol: float
    n_steps: int
    extra: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]

    def reduced_samples(self) -> list[ReducedState]:
        return [ReducedState(float(t), *map(float, row)) for t, row in zip(self.t, self.y)]


def validate_params(p: ModelParams) -> ModelParams:
    s = p.spin
    for name, w in (("w_plus", s.w_plus), ("w_minus", s.w_minus)):
        if not math.isfinite(w) or w < 0.0:
            raise RangeError(f"{name} must be a finite probability, got {w!r}")
    if abs(s.w_plus + s.w_minus - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(
            f"spin weights sum to {s.w_plus + s.w_minus!r}, expected 1"
        )
    if not (math.isfinite(p.v_prime) and p.v_prime > 0.0):
        raise RangeError(f"v_prime must be > 0, got {p.v_prime!r}")
    if not (math.isfinite(p.V_prime) and p.V_prime >= 0.0):
        raise RangeError(f"V_prime must be >= 0, got {p.V_prime!r}")
    if not (math.isfinite(p.eta) and p.eta > 0.0):
        raise RangeError(f"eta must be > 0, got {p.eta!r}")
    if isinstance(p.n_pointer, bool) or int(p.n_pointer) != p.n_pointer or p.n_pointer < 1:
        raise RangeError(f"n_pointer must be an integer >= 1, got {p.n_pointer!r}")
    return p


def rapidity(p: ModelParams) -> float:
    """Ratio of spin-packet to pointer-packet separation times, ``eta V'/v'``."""
    return p.eta * p.V_prime / p.v_prime


def effective_rapidity(p: ModelParams) -> float:
    # fictitious pointers move sqrt(N) times faster
    return p.sqrt_n * rapidity(p)


def polarization(s: SpinWeights) -> float:
    return s.w_plus - s.w_minus
