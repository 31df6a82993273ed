"""Cross-check of the reduced system against the full 2N+1 particle system."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .full import aggregate, full_field, reduce_full_state
from .integrator import IntegrationConfig, integrate
from .params import ModelParams
from .reduced import reduced_field
from .sampling import full_equilibrium_sample


@dataclass(frozen=True)
class ReductionReport:
    n_pointer: int
    seed: int
    max_dev_q: float
    max_dev_zhat1: float
    max_dev_zhat2: float
    seconds: float

    @property
    def max_deviation(self) -> float:
        return max(self.max_dev_q, self.max_dev_zhat1, self.max_dev_zhat2)


def compare_reduction(p: ModelParams, seed: int, cfg: IntegrationConfig) -> ReductionReport:
    """Integrate both models from one equilibrium draw and compare on the sample grid."""
    start = time.perf_counter()
    full0 = full_equilibrium_sample(p, seed)
    full = integrate(full_field(p), full0, cfg)
    red = integrate(reduced_field(p), reduce_full_state(full0), cfg)
    dev = np.max(np.abs(aggregate(full.y, p.n_pointer) - red.y), axis=0)
    return ReductionReport(
        p.n_pointer, seed, float(dev[0]), float(dev[1]), float(dev[2]), time.perf_counter() - start
    )
