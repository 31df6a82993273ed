"""Initial conditions: figure grids and quantum-equilibrium draws.

At t' = 0 every packet is a real Gaussian ``exp(-z'**2)`` in its own width
units, so the equilibrium density ``exp(-2 z'**2)`` is a normal law with
standard deviation 1/2 for Q' and for each pointer particle.  Because
``Zhat = sum(Z)/sqrt(N)`` the fictitious pointers inherit the same law.

Random streams: run ``i`` under master seed ``s`` draws from
``Philox(SeedSequence(s, spawn_key=(i,)))``.  A run's numbers therefore depend
only on ``(s, i)``, never on how runs are scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .full import FULL_MODEL_MAX_N
from .params import FullState, ModelParams, ReducedState

EQUILIBRIUM_STD = 0.5
SEED_MAX = 2**64 - 1

Mode = Literal["grid", "equilibrium", "fixed"]


@dataclass(frozen=True)
class InitialConditionSpec:
    """How to build the initial states of a batch.

    ``zhat0`` is either a fixed ``(zhat1, zhat2)`` pair or the string
    ``"sampled"``.  In equilibrium mode Q'(0) is always drawn; in grid and
    fixed mode it runs over ``q0_values``.
    """

    mode: Mode
    q0_values: tuple[float, ...] = ()
    zhat0: tuple[float, float] | str = (0.0, 0.0)
    seed: int = 0
    count: int = 1

    def __post_init__(self):
        if self.mode not in ("grid", "equilibrium", "fixed"):
            raise ValueError(f"unknown initial-condition mode {self.mode!r}")
        object.__setattr__(self, "q0_values", tuple(float(q) for q in self.q0_values))
        if self.mode in ("grid", "fixed") and not self.q0_values:
            raise ValueError(f"{self.mode} mode needs at least one q0 value")
        if self.mode == "equilibrium" and self.count < 1:
            raise ValueError("equilibrium mode needs count >= 1")
        if isinstance(self.zhat0, str):
            if self.zhat0 != "sampled":
                raise ValueError(f"zhat0 must be a pair or 'sampled', got {self.zhat0!r}")
        else:
            z1, z2 = self.zhat0
            object.__setattr__(self, "zhat0", (float(z1), float(z2)))
        if not (0 <= int(self.seed) <= SEED_MAX):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    @property
    def n_runs(self) -> int:
        return self.count if self.mode == "equilibrium" else len(self.q0_values)


def grid_initial_positions(n: int, half_range: float) -> list[float]:
    if n < 1 or not half_range > 0.0:
        raise ValueError("need n >= 1 and half_range > 0")
    if n == 1:
        return [0.0]
    # integer numerators keep the grid exactly symmetric, with an exact 0 for odd n
    return [half_range * (2 * i - (n - 1)) / (n - 1) for i in range(n)]


def substream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def sample_equilibrium(p: ModelParams, seed: int, count: int) -> list[ReducedState]:
    states = []
    for i in range(count):
        q, z1, z2 = substream(seed, i).normal(0.0, EQUILIBRIUM_STD, size=3)
        states.append(ReducedState(0.0, float(q), float(z1), float(z2)))
    return states


def full_equilibrium_sample(p: ModelParams, seed: int) -> FullState:
    n = p.n_pointer
    if n > FULL_MODEL_MAX_N:
        raise ValueError(f"full model is capped at N = {FULL_MODEL_MAX_N}, got {n}")
    draws = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed))).normal(
        0.0, EQUILIBRIUM_STD, size=2 * n + 1
    )
    return FullState.from_array(0.0, draws)


def initial_states(p: ModelParams, ic: InitialConditionSpec) -> np.ndarray:
    """Rows ``[q0, zhat1_0, zhat2_0]`` for every run described by ``ic``."""
    if ic.mode == "equilibrium":
        draws = np.array([s.as_array() for s in sample_equilibrium(p, ic.seed, ic.count)])
        if ic.zhat0 != "sampled":
            draws[:, 1:] = ic.zhat0
        return draws
    q0 = np.asarray(ic.q0_values, dtype=float)
    y0 = np.empty((len(q0), 3))
    y0[:, 0] = q0
    if ic.zhat0 == "sampled":
        for i in range(len(q0)):
            y0[i, 1:] = substream(ic.seed, i).normal(0.0, EQUILIBRIUM_STD, size=3)[1:]
    else:
        y0[:, 1:] = ic.zhat0
    return y0

