"""CSV, JSON and SVG writers.

Floats are written with ``repr`` (shortest round-trip form), so the files are
byte-identical for identical inputs.
"""
from __future__ import annotations

import contextlib
import csv
import io
import json
import math
import sys
from typing import IO, Iterable, Sequence

from .ensemble import EnsembleSummary
from .params import ModelParams, Trajectory

CSV_COLUMNS = ("run_id", "t_prime", "q", "zhat1", "zhat2")
SUMMARY_KEYS = (
    "n_runs", "n_up", "fraction_up", "expected_fraction", "binomial_std", "seed", "params",
)


class IoError(OSError):
    pass


@contextlib.contextmanager
def _open(path_or_file, mode="w"):
    if path_or_file == "-":
        yield sys.stdout
        return
    if hasattr(path_or_file, "write"):
        yield path_or_file
        return
    try:
        fh = open(path_or_file, mode, newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path_or_file}: {exc}") from exc
    with fh:
        yield fh


def write_trajectories_csv(trajs: Sequence[Trajectory], path: str | IO[str]) -> None:
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for run_id, tr in enumerate(trajs):
            for t, row in zip(tr.t, tr.y):
                w.writerow((run_id, repr(float(t)), *(repr(float(v)) for v in row[:3])))


def params_dict(p: ModelParams) -> dict:
    return {
        "v_prime": p.v_prime,
        "V_prime": p.V_prime,
        "eta": p.eta,
        "n_pointer": p.n_pointer,
        "w_plus": p.spin.w_plus,
        "w_minus": p.spin.w_minus,
    }


def summary_dict(s: EnsembleSummary) -> dict:
    return {
        "n_runs": s.n_runs,
        "n_up": s.n_up,
        "fraction_up": s.fraction_up,
        "expected_fraction": s.expected_fraction,
        "binomial_std": s.binomial_std,
        "seed": s.seed,
        "params": params_dict(s.params),
    }


def write_summary_json(summary: EnsembleSummary, path: str | IO[str]) -> None:
    with _open(path) as fh:
        fh.write(json.dumps(summary_dict(summary), indent=2))
        fh.write("\n")


# --- SVG ------------------------------------------------------------------

_PANEL_W, _PANEL_H = 320, 260
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 58, 14, 30, 44
_PALETTE = ("#1f77b4", "#d62728")


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    raw = span / max(n - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    k = 0
    while first + k * step <= hi + 1e-9 * step:
        ticks.append(first + k * step)
        k += 1
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _panel(out: io.StringIO, x0: float, series, t_max: float, label: str) -> None:
    ys = [v for _, col in series for v in col]
    lo, hi = (min(ys), max(ys)) if ys else (-1.0, 1.0)
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    pw = _PANEL_W - _MARGIN_L - _MARGIN_R
    ph = _PANEL_H - _MARGIN_T - _MARGIN_B
    left, top = x0 + _MARGIN_L, _MARGIN_T

    def sx(t):
        return left + pw * t / t_max

    def sy(v):
        return top + ph * (hi - v) / (hi - lo)

    out.write(f'<g class="panel">\n<text x="{_fmt(left + pw / 2)}" y="18" text-anchor="middle" font-size="13">{label}</text>\n')
    out.write(f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(pw)}" height="{_fmt(ph)}" fill="none" stroke="#000"/>\n')
    for tk in _nice_ticks(0.0, t_max):
        out.write(f'<text x="{_fmt(sx(tk))}" y="{_fmt(top + ph + 16)}" text-anchor="middle" font-size="10">{tk:g}</text>\n')
    for tk in _nice_ticks(lo, hi):
        out.write(f'<line x1="{_fmt(left - 4)}" y1="{_fmt(sy(tk))}" x2="{_fmt(left)}" y2="{_fmt(sy(tk))}" stroke="#000"/>\n')
        out.write(f'<text x="{_fmt(left - 6)}" y="{_fmt(sy(tk) + 3)}" text-anchor="end" font-size="10">{tk:.4g}</text>\n')
    out.write(f'<text x="{_fmt(left + pw / 2)}" y="{_fmt(_PANEL_H - 8)}" text-anchor="middle" font-size="12">t′</text>\n')
    out.write(
        f'<text x="{_fmt(x0 + 14)}" y="{_fmt(top + ph / 2)}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 {_fmt(x0 + 14)} {_fmt(top + ph / 2)})">position</text>\n'
    )
    for t, col in series:
        colour = _PALETTE[0] if col and col[-1] >= 0 else _PALETTE[1]
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(t, col))
        out.write(f'<polyline fill="none" stroke="{colour}" stroke-width="0.8" points="{pts}"/>\n')
    out.write("</g>\n")


def render_svg(
    trajs: Sequence[Trajectory],
    path: str | IO[str],
    include_pointers: bool = True,
    title: str | None = None,
) -> None:
    """One panel per coordinate (Q', and optionally both pointers); one polyline per run."""
    labels: Iterable[tuple[int, str]] = [(0, "Q′")]
    if include_pointers:
        labels = [(0, "Q′"), (1, "Ẑ₁′"), (2, "Ẑ₂′")]
    t_max = max((float(tr.t[-1]) for tr in trajs), default=1.0)
    width = _PANEL_W * len(labels)
    height = _PANEL_H + (20 if title else 0)
    buf = io.StringIO()
    buf.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">\n'
    )
    if title:
        buf.write(f'<text x="{width / 2:.1f}" y="{height - 4}" text-anchor="middle" font-size="12">{title}</text>\n')
    for k, (col, label) in enumerate(labels):
        series = [(tr.t.tolist(), tr.y[:, col].tolist()) for tr in trajs]
        _panel(buf, k * _PANEL_W, series, t_max, label)
    buf.write("</svg>\n")
    with _open(path) as fh:
        fh.write(buf.getvalue())
