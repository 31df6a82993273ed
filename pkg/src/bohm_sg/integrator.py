"""Adaptive Dormand-Prince 5(4) integration with per-row step control.

``integrate_batch`` advances M independent initial conditions at once.  Every
row keeps its own time, step size and controller memory; the only thing rows
share is the numpy call that evaluates the field.  A row's trajectory is
therefore the same whether it is integrated alone or inside a batch.

Output is sampled on a fixed time grid with the pair's own fourth-order
continuous extension, which reuses the stage derivatives of each accepted step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import FullState, ModelParams, ReducedState, Trajectory
from .reduced import VelocityField

H_MIN = 1e-14
ONSET_GROWTH = 0.1
_H_START_MIN = 1e-10

# step-size controller (Hairer, Norsett & Wanner, DOPRI5 defaults)
_SAFE = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - 0.75 * _BETA
_FAC_MIN_INV = 5.0
_FAC_MAX_INV = 0.1

_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_A71, _A73, _A74, _A75, _A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


# continuous extension
_D1 = -12715105075 / 11282082432
_D3 = 87487479700 / 32700410799
_D4 = -10690763975 / 1880347072
_D5 = 701980252875 / 199316789632
_D6 = -1453857185 / 822651844
_D7 = 69997945 / 29380423


class StepFailure(RuntimeError):
    def __init__(self, message: str, run_index: int | None = None, t: float | None = None):
        super().__init__(message)
        self.run_index = run_index
        self.t = t


@dataclass(frozen=True)
class IntegrationConfig:
    """Integration settings.

    ``onset_step``, when set, is the step ceiling at t' = 0; the ceiling then
    relaxes as ``ONSET_GROWTH * t'`` until it reaches ``max_step``.
    """

    t_max: float = 1.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = 1e-2
    sample_interval: float = 0.01
    onset_step: float | None = None

    def __post_init__(self):
        if not (self.t_max > 0.0 and math.isfinite(self.t_max)):
            raise ValueError(f"t_max must be > 0, got {self.t_max!r}")
        if not (0.0 < self.rel_tol <= 1e-3):
            raise ValueError(f"rel_tol must lie in (0, 1e-3], got {self.rel_tol!r}")
        if not self.abs_tol > 0.0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol!r}")
        if not self.max_step > 0.0:
            raise ValueError(f"max_step must be > 0, got {self.max_step!r}")
        if not (0.0 < self.sample_interval <= self.t_max):
            raise ValueError(
                f"sample_interval must lie in (0, t_max], got {self.sample_interval!r}"
            )
        if self.onset_step is not None and not self.onset_step > 0.0:
            raise ValueError(f"onset_step must be > 0, got {self.onset_step!r}")

    @classmethod
    def for_params(cls, p: ModelParams, **overrides) -> IntegrationConfig:
        """Defaults with an onset ceiling that resolves the branch-weight switch."""
        overrides.setdefault("onset_step", 0.1 / (1.0 + p.pointer_speed))
        return cls(**overrides)

    def step_ceiling(self, t: np.ndarray) -> np.ndarray:
        if self.onset_step is None:
            return np.full_like(t, self.max_step)
        return np.minimum(self.max_step, np.maximum(self.onset_step, ONSET_GROWTH * t))

    def sample_times(self) -> np.ndarray:
        n = int(math.floor(self.t_max / self.sample_interval + 1e-9))
        times = self.sample_interval * np.arange(n + 1, dtype=float)
        if times[-1] >= self.t_max * (1.0 - 1e-12):
            times[-1] = self.t_max
        else:
            times = np.append(times, self.t_max)
        return times


@dataclass
class BatchResult:
    t: np.ndarray  # (K,)
    y: np.ndarray  # (M, K, d)
    n_steps: np.ndarray  # (M,)
    n_rejected: np.ndarray  # (M,)

    def trajectory(self, row: int, tol: float) -> Trajectory:
        return Trajectory(
            self.t.copy(),
            self.y[row].copy(),
            tol,
            int(self.n_steps[row]),
            {"n_rejected": int(self.n_rejected[row])},
        )


def _rms(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.mean(x * x, axis=1))


def _initial_step(field, t, y, f, cfg: IntegrationConfig) -> np.ndarray:
    sk = cfg.abs_tol + cfg.rel_tol * np.abs(y)
    dnf = _rms(f / sk)
    dny = _rms(y / sk)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where((dnf <= 1e-5) | (dny <= 1e-5), 1e-6, 0.01 * dny / dnf)
    ceiling = np.minimum(cfg.step_ceiling(t), cfg.t_max)
    h = np.minimum(h, ceiling)
    f1 = field(t + h, y + h[:, None] * f)
    der2 = _rms((f1 - f) / sk) / h
    der12 = np.maximum(der2, dnf)
    with np.errstate(divide="ignore"):
        h1 = np.where(
            der12 <= 1e-15,
            np.maximum(1e-6, h * 1e-3),
            (0.01 / der12) ** (1.0 / 5.0),
        )
    # the estimate degenerates for tiny but nonzero |y0|; it is only a first guess
    h0 = np.maximum(np.minimum(100.0 * h, h1), _H_START_MIN)
    return np.minimum(h0, ceiling)


def integrate_batch(
    field: VelocityField, y0: np.ndarray, cfg: IntegrationConfig
) -> BatchResult:
    """Integrate rows of ``y0`` (shape (M, d)) from t' = 0 to ``cfg.t_max``."""
    y = np.array(y0, dtype=float, copy=True)
    if y.ndim != 2:
        raise ValueError(f"y0 must have shape (M, d), got {y.shape}")
    m, d = y.shape
    grid = cfg.sample_times()
    k_out = len(grid)
    out = np.empty((m, k_out, d))
    out[:, 0, :] = y
    nxt = np.ones(m, dtype=np.int64)
    n_steps = np.zeros(m, dtype=np.int64)
    n_rejected = np.zeros(m, dtype=np.int64)
    if m == 0:
        return BatchResult(grid, out, n_steps, n_rejected)

    t_end = cfg.t_max
    t = np.zeros(m)
    f = field(t, y)
    bad = ~np.all(np.isfinite(f), axis=1)
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        raise StepFailure(f"non-finite velocity at the initial state of row {j}", run_index=j, t=0.0)
    h = _initial_step(field, t, y, f, cfg)
    # a non-finite trial evaluation leaves h undefined; start small and let the controller recover
    h = np.where(np.isfinite(h), h, _H_START_MIN)
    facold = np.full(m, 1e-4)
    was_rejected = np.zeros(m, dtype=bool)
    done = np.zeros(m, dtype=bool)

    while True:
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        ti, yi, k1 = t[idx], y[idx], f[idx]
        hi = np.minimum(h[idx], cfg.step_ceiling(ti))
        last = ti + 1.01 * hi >= t_end
        hi = np.where(last, t_end - ti, hi)
        bad = hi < H_MIN
        if bad.any():
            j = int(idx[np.flatnonzero(bad)[0]])
            raise StepFailure(
                f"step size underflow (h={h[j]:.3e}) at t'={t[j]!r} in row {j}",
                run_index=j,
                t=float(t[j]),
            )
        hc = hi[:, None]

        k2 = field(ti + _C2 * hi, yi + hc * (_A21 * k1))
        k3 = field(ti + _C3 * hi, yi + hc * (_A31 * k1 + _A32 * k2))
        k4 = field(ti + _C4 * hi, yi + hc * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = field(ti + _C5 * hi, yi + hc * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        t_new = np.where(last, t_end, ti + hi)
        k6 = field(
            ti + hi,
            yi + hc * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
        )
        y_new = yi + hc * (_A71 * k1 + _A73 * k3 + _A74 * k4 + _A75 * k5 + _A76 * k6)
        k7 = field(t_new, y_new)

        err_vec = hc * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        sk = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(yi), np.abs(y_new))
        err = _rms(err_vec / sk)
        finite = np.isfinite(err) & np.all(np.isfinite(y_new), axis=1)
        err = np.where(finite, err, np.inf)

        fac11 = err**_EXPO1
        fac = fac11 / facold[idx] ** _BETA
        fac = np.clip(fac / _SAFE, _FAC_MAX_INV, _FAC_MIN_INV)
        h_grow = hi / fac
        accept = err <= 1.0

        if accept.any():
            sel = np.flatnonzero(accept)
            rows = idx[sel]
            h_acc = np.where(was_rejected[rows], np.minimum(h_grow[sel], hi[sel]), h_grow[sel])
            hs = hc[sel]
            ydiff = y_new[sel] - yi[sel]
            bspl = hs * k1[sel] - ydiff
            cont = (
                yi[sel],
                ydiff,
                bspl,
                ydiff - hs * k7[sel] - bspl,
                hs * (_D1 * k1[sel] + _D3 * k3[sel] + _D4 * k4[sel]
                      + _D5 * k5[sel] + _D6 * k6[sel] + _D7 * k7[sel]),
            )
            _dense_output(out, nxt, grid, rows, ti[sel], t_new[sel], hi[sel], cont)
            facold[rows] = np.maximum(err[sel], 1e-4)
            t[rows] = t_new[sel]
            y[rows] = y_new[sel]
            f[rows] = k7[sel]
            h[rows] = h_acc
            n_steps[rows] += 1
            was_rejected[rows] = False
            done[rows] = last[sel]

        if not accept.all():
            sel = np.flatnonzero(~accept)
            rows = idx[sel]
            with np.errstate(invalid="ignore"):
                shrink = np.minimum(_FAC_MIN_INV, fac11[sel] / _SAFE)
            shrink = np.where(np.isfinite(shrink), shrink, _FAC_MIN_INV)
            h[rows] = hi[sel] / shrink
            was_rejected[rows] = True
            n_rejected[rows] += 1

    return BatchResult(grid, out, n_steps, n_rejected)


def _dense_output(out, nxt, grid, rows, t0, t1, h, cont) -> None:
    c1, c2, c3, c4, c5 = cont
    k_out = len(grid)
    local = np.arange(len(rows))
    while True:
        pos = nxt[rows[local]]
        has = pos < k_out
        local = local[has]
        if local.size == 0:
            return
        pos = pos[has]
        due = grid[pos] <= t1[local]
        local, pos = local[due], pos[due]
        if local.size == 0:
            return
        s = ((grid[pos] - t0[local]) / h[local])[:, None]
        s1 = 1.0 - s
        out[rows[local], pos, :] = c1[local] + s * (
            c2[local] + s1 * (c3[local] + s * (c4[local] + s1 * c5[local]))
        )
        nxt[rows[local]] = pos + 1


def integrate(field: VelocityField, initial, cfg: IntegrationConfig) -> Trajectory:
    """Integrate one initial condition (a state record or a 1-d array at t' = 0)."""
    if isinstance(initial, (ReducedState, FullState)):
        if initial.t_prime != 0.0:
            raise ValueError("initial state must be at t' = 0")
        y0 = initial.as_array()
    else:
        y0 = np.asarray(initial, dtype=float)
    res = integrate_batch(field, y0[None, :], cfg)
    return res.trajectory(0, cfg.rel_tol)
