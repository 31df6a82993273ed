"""Batches of reduced-model runs, outcome labels and Born-rule statistics."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .integrator import BatchResult, IntegrationConfig, StepFailure, integrate_batch
from .params import ModelParams, ReducedState, Trajectory
from .reduced import branch_exponents, branch_weight, reduced_field
from .sampling import InitialConditionSpec, initial_states

log = logging.getLogger(__name__)

AMBIGUITY_THRESHOLD = 1e-6
MIN_SEPARATION = 10.0
BAND_SIGMAS = 3.0


class AmbiguousOutcome(ValueError):
    def __init__(self, message: str, run_index: int | None = None):
        super().__init__(message)
        self.run_index = run_index


@dataclass(frozen=True)
class Outcome:
    label: Literal["up", "down"]
    q_final: float
    z1_final: float
    z2_final: float
    w_final: float | None = None


@dataclass(frozen=True)
class EnsembleSummary:
    n_runs: int
    n_up: int
    fraction_up: float
    expected_fraction: float
    binomial_std: float
    seed: int
    params: ModelParams
    outcomes: tuple[Outcome, ...] = field(default=(), repr=False, compare=False)

    def within_band(self, k: float = BAND_SIGMAS) -> bool:
        return abs(self.fraction_up - self.expected_fraction) <= k * self.binomial_std


def _label(t_final: float, row: np.ndarray, p: ModelParams | None, run_index=None) -> Outcome:
    q, z1, z2 = (float(v) for v in row[:3])
    if abs(q) < AMBIGUITY_THRESHOLD:
        raise AmbiguousOutcome(
            f"final Q'={q!r} is within {AMBIGUITY_THRESHOLD} of 0; increase t_max",
            run_index=run_index,
        )
    w = None
    if p is not None:
        w = branch_weight(branch_exponents(ReducedState(t_final, q, z1, z2), p), p.spin).w
    return Outcome("up" if q > 0.0 else "down", q, z1, z2, w)


def classify_outcome(traj: Trajectory, p: ModelParams | None = None) -> Outcome:
    """Label a reduced trajectory by the sign of its final Q'.

    With ``p`` given, the final up-branch weight is recorded and a warning is
    logged when the spin packets have not separated by ``t_max``.
    """
    t_final = float(traj.t[-1])
    if p is not None:
        _check_separation(p, t_final)
    return _label(t_final, traj.final, p)


def _check_separation(p: ModelParams, t_max: float) -> None:
    if 2.0 * p.v_prime * t_max < MIN_SEPARATION:
        log.warning(
            "packet separation 2 v' t_max = %.3g < %g; outcomes may not be settled",
            2.0 * p.v_prime * t_max,
            MIN_SEPARATION,
        )


def _integrate_chunk(p: ModelParams, y0: np.ndarray, cfg: IntegrationConfig, offset: int):
    try:
        return integrate_batch(reduced_field(p), y0, cfg)
    except StepFailure as exc:
        run = offset + (exc.run_index or 0)
        raise StepFailure(f"run {run}: {exc}", run_index=run, t=exc.t) from exc


def integrate_runs(
    p: ModelParams,
    y0: np.ndarray,
    cfg: IntegrationConfig,
    chunk_size: int = 1024,
    workers: int = 1,
) -> list[tuple[int, BatchResult]]:
    """Integrate the rows of ``y0`` in chunks; returns ``(first_row, result)`` in row order."""
    starts = list(range(0, len(y0), chunk_size))
    blocks = [y0[lo : lo + chunk_size] for lo in starts]
    if workers > 1 and len(blocks) > 1:
        n = len(blocks)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_integrate_chunk, [p] * n, blocks, [cfg] * n, starts))
    else:
        results = [_integrate_chunk(p, blk, cfg, lo) for lo, blk in zip(starts, blocks)]
    return list(zip(starts, results))


def run_trajectories(
    p: ModelParams, ic: InitialConditionSpec, cfg: IntegrationConfig, **kw
) -> list[Trajectory]:
    trajs = []
    for _, res in integrate_runs(p, initial_states(p, ic), cfg, **kw):
        trajs.extend(res.trajectory(i, cfg.rel_tol) for i in range(res.y.shape[0]))
    return trajs


def run_ensemble(
    p: ModelParams,
    ic: InitialConditionSpec,
    cfg: IntegrationConfig,
    chunk_size: int = 1024,
    workers: int = 1,
) -> EnsembleSummary:
    _check_separation(p, cfg.t_max)
    y0 = initial_states(p, ic)
    outcomes: list[Outcome] = []
    for lo, res in integrate_runs(p, y0, cfg, chunk_size=chunk_size, workers=workers):
        t_final = float(res.t[-1])
        for i in range(res.y.shape[0]):
            outcomes.append(_label(t_final, res.y[i, -1], p, run_index=lo + i))
    n = len(outcomes)
    n_up = sum(o.label == "up" for o in outcomes)
    w = p.spin.w_plus
    return EnsembleSummary(
        n_runs=n,
        n_up=n_up,
        fraction_up=n_up / n,
        expected_fraction=w,
        binomial_std=math.sqrt(w * p.spin.w_minus / n),
        seed=ic.seed,
        params=p,
        outcomes=tuple(outcomes),
    )
