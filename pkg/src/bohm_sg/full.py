"""Velocity field of the full system: one spin particle and 2N pointer particles.

This is the brute-force model that the reduced system is checked against. Branch
log-densities are built straight from the squared moduli of every Gaussian
packet, so no cancellation between branches is assumed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import FullState, ModelParams, ReducedState
from .reduced import VelocityField, branch_shares

FULL_MODEL_MAX_N = 1000


@dataclass(frozen=True)
class FullLogWeights:
    l_plus: float
    l_minus: float


def _log(w: float) -> float:
    return math.log(w) if w > 0.0 else -math.inf


def _log_weights(t, q, zp, zn, p: ModelParams):
    """Row-wise branch log-densities; ``zp``/``zn`` have shape (M, N)."""
    v = p.v_prime
    shift = p.eta * p.V_prime * t
    den_s = 1.0 + 4.0 * t * t
    den_p = (1.0 + 4.0 * p.eta**2 * t * t)[:, None]
    sh = shift[:, None]
    l_plus = (
        _log(p.spin.w_plus)
        - 2.0 * (q - v * t) ** 2 / den_s
        + np.sum(-2.0 * (zp - sh) ** 2 / den_p, axis=1)
        + np.sum(-2.0 * zn**2 / den_p, axis=1)
    )
    l_minus = (
        _log(p.spin.w_minus)
        - 2.0 * (q + v * t) ** 2 / den_s
        + np.sum(-2.0 * zp**2 / den_p, axis=1)
        + np.sum(-2.0 * (zn + sh) ** 2 / den_p, axis=1)
    )
    return l_plus, l_minus


def full_log_weights(state: FullState, p: ModelParams) -> FullLogWeights:
    lp, lm = _log_weights(
        np.array([state.t_prime]),
        np.array([state.q]),
        np.array([state.z_p]),
        np.array([state.z_n]),
        p,
    )
    return FullLogWeights(float(lp[0]), float(lm[0]))


def full_field(p: ModelParams) -> VelocityField:
    """Vectorized field over rows ``y = [q, z_p (N), z_n (N)]`` of shape (M, 2N+1)."""
    n = p.n_pointer
    v = p.v_prime
    eta = p.eta
    V = p.V_prime

    def field(t: np.ndarray, y: np.ndarray) -> np.ndarray:
        q = y[:, 0]
        zp = y[:, 1 : n + 1]
        zn = y[:, n + 1 :]
        lp, lm = _log_weights(t, q, zp, zn, p)
        w, wb = branch_shares(lp - lm)
        den_s = 1.0 + 4.0 * t * t
        # unsimplified two-term gradients of the packet phases
        grad_plus = v + 4.0 * t * (q - v * t) / den_s
        grad_minus = -v + 4.0 * t * (q + v * t) / den_s
        out = np.empty_like(y)
        out[:, 0] = w * grad_plus + wb * grad_minus
        den_p = (1.0 + 4.0 * eta**2 * t * t)[:, None]
        c = (4.0 * eta * t)[:, None]
        out[:, 1 : n + 1] = eta * ((w * V)[:, None] + c * zp) / den_p
        out[:, n + 1 :] = eta * (-(wb * V)[:, None] + c * zn) / den_p
        return out

    return field


def full_velocity(state: FullState, p: ModelParams) -> tuple[float, np.ndarray, np.ndarray]:
    n = state.n_pointer
    if n != p.n_pointer:
        raise ValueError(f"state has {n} particles per pointer, params say {p.n_pointer}")
    out = full_field(p)(np.array([state.t_prime]), state.as_array()[None, :])[0]
    return float(out[0]), out[1 : n + 1].copy(), out[n + 1 :].copy()


def reduce_full_state(state: FullState) -> ReducedState:
    root = math.sqrt(state.n_pointer)
    return ReducedState(
        state.t_prime,
        state.q,
        math.fsum(state.z_p) / root,
        math.fsum(state.z_n) / root,
    )


def aggregate(y: np.ndarray, n: int) -> np.ndarray:
    """Map full-state rows ``(..., 2N+1)`` onto reduced rows ``(..., 3)``."""
    root = math.sqrt(n)
    return np.stack(
        [y[..., 0], y[..., 1 : n + 1].sum(axis=-1) / root, y[..., n + 1 :].sum(axis=-1) / root],
        axis=-1,
    )


def free_spin_field(p: ModelParams) -> VelocityField:
    """Spin particle alone, guided by its two packets; the pointers are absent.

    Rows are 1-d ``[q]``. The packet weights come from the full squared moduli.
    """
    v = p.v_prime
    lw_plus = _log(p.spin.w_plus)
    lw_minus = _log(p.spin.w_minus)

    def field(t: np.ndarray, y: np.ndarray) -> np.ndarray:
        q = y[:, 0]
        den = 1.0 + 4.0 * t * t
        x = (lw_plus - 2.0 * (q - v * t) ** 2 / den) - (lw_minus - 2.0 * (q + v * t) ** 2 / den)
        w, wb = branch_shares(x)
        grad_plus = v + 4.0 * t * (q - v * t) / den
        grad_minus = -v + 4.0 * t * (q + v * t) / den
        return (w * grad_plus + wb * grad_minus)[:, None]

    return field
