"""Velocity field of the reduced system (Q', Zhat1', Zhat2').

Each pointer of N identical particles is replaced by one fictitious particle
at ``sum(Z)/sqrt(N)`` moving with speed ``sqrt(N) V'``.  The spin particle's
velocity is a weighted average of its two packet velocities, the weight of the
up branch being a logistic function of the summed branch exponents.

The weight is never formed from raw exponentials: at N = 1e6 the exponents
reach 1e5 within t' ~ 1e-3 and exp() would overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy.special import expit

from .params import ModelParams, ReducedState, SpinWeights

SpinBranch = Literal["plus", "minus"]
PointerBranch = Literal["moving_plus", "moving_minus", "static"]

VelocityField = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BranchExponents:
    r1: float
    r2: float


@dataclass(frozen=True)
class BranchWeight:
    w: float


def log_odds(s: SpinWeights) -> float:
    """``ln w_plus - ln w_minus``, infinite for a fully polarized spin."""
    if s.w_plus == 0.0:
        return -math.inf
    if s.w_minus == 0.0:
        return math.inf
    return math.log(s.w_plus) - math.log(s.w_minus)


def branch_shares(x):
    """Return ``(w, 1 - w)`` for log-odds ``x``, both computed without cancellation."""
    return expit(x), expit(-x)


def spin_phase_gradient(q, t, branch: SpinBranch, v_prime: float):
    sign = _spin_sign(branch)
    return (sign * v_prime + 4.0 * t * q) / (1.0 + 4.0 * t * t)


def pointer_phase_gradient(zhat, t, branch: PointerBranch, p: ModelParams):
    """Contribution of one pointer branch to dZhat'/dt' (``eta`` prefactor included)."""
    den = 1.0 + 4.0 * p.eta**2 * t * t
    spread = 4.0 * p.eta**2 * t * zhat / den
    if branch == "static":
        return spread
    if branch == "moving_plus":
        return p.pointer_speed / den + spread
    if branch == "moving_minus":
        return -p.pointer_speed / den + spread
    raise ValueError(f"unknown pointer branch {branch!r}")


def branch_exponents(state: ReducedState, p: ModelParams) -> BranchExponents:
    t = state.t_prime
    a = 4.0 * p.v_prime * t / (1.0 + 4.0 * t * t)
    b = 4.0 * p.eta * p.sqrt_n * p.V_prime * t / (1.0 + 4.0 * p.eta**2 * t * t)
    return BranchExponents(a * state.q + b * state.zhat1, a * state.q + b * state.zhat2)


def branch_weight(ex: BranchExponents, s: SpinWeights) -> BranchWeight:
    w, _ = branch_shares((ex.r1 + ex.r2) + log_odds(s))
    return BranchWeight(float(w))


def reduced_field(p: ModelParams) -> VelocityField:
    """Vectorized field ``f(t, y)`` with ``t`` of shape (M,) and ``y`` of shape (M, 3).

    The arithmetic is arranged so that the mirror map
    ``(q, z1, z2, w+, w-) -> (-q, -z2, -z1, w-, w+)`` negates the result bit for bit.
    """
    v = p.v_prime
    eta = p.eta
    speed = p.sqrt_n * p.V_prime
    coupling = 4.0 * eta * speed
    lo = log_odds(p.spin)

    def field(t: np.ndarray, y: np.ndarray) -> np.ndarray:
        q, z1, z2 = y[:, 0], y[:, 1], y[:, 2]
        den_s = 1.0 + 4.0 * t * t
        den_p = 1.0 + 4.0 * eta**2 * t * t
        a = 4.0 * v * t / den_s
        b = coupling * t / den_p
        r1 = a * q + b * z1
        r2 = a * q + b * z2
        w, wb = branch_shares((r1 + r2) + lo)
        out = np.empty_like(y)
        out[:, 0] = w * spin_phase_gradient(q, t, "plus", v) + wb * spin_phase_gradient(
            q, t, "minus", v
        )
        c = 4.0 * eta * t
        out[:, 1] = eta * (w * speed + c * z1) / den_p
        out[:, 2] = eta * (-(wb * speed) + c * z2) / den_p
        return out

    return field


def reduced_velocity(state: ReducedState, p: ModelParams) -> tuple[float, float, float]:
    f = reduced_field(p)
    out = f(np.array([state.t_prime]), state.as_array()[None, :])[0]
    return float(out[0]), float(out[1]), float(out[2])


def _spin_sign(branch: str) -> float:
    if branch == "plus":
        return 1.0
    if branch == "minus":
        return -1.0
    raise ValueError(f"unknown spin branch {branch!r}")
