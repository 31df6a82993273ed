"""Run configuration: flat ``section.key=value`` text and the figure presets.

Entries are separated by newlines, commas or semicolons; ``#`` starts a
comment.  List values (``ic.q0_values``, ``ic.zhat0``) are whitespace
separated.  Unknown keys are rejected.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .integrator import IntegrationConfig
from .params import ModelParams, SpinWeights, ValidationError, validate_params
from .sampling import InitialConditionSpec, grid_initial_positions

GRID_N = 41
GRID_HALF_RANGE = 1.5


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class UnknownFigure(KeyError):
    pass


@dataclass(frozen=True)
class OutputPaths:
    csv_path: str | None = None
    summary_path: str | None = None
    svg_path: str | None = None

    def any(self) -> bool:
        return any((self.csv_path, self.summary_path, self.svg_path))


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    ic: InitialConditionSpec
    integration: IntegrationConfig
    outputs: OutputPaths = field(default_factory=OutputPaths)


_FLOAT_KEYS = {
    "spin.sigma", "spin.w_plus", "spin.w_minus",
    "model.v_prime", "model.V_prime", "model.eta",
    "ic.grid_half_range",
    "integration.t_max", "integration.rel_tol", "integration.abs_tol",
    "integration.max_step", "integration.sample_interval",
}
_INT_KEYS = {"model.n", "ic.grid_n", "ic.seed", "ic.count"}
_STR_KEYS = {
    "ic.mode", "ic.q0_values", "ic.zhat0", "integration.onset_step",
    "output.csv", "output.summary", "output.svg",
}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS

_SPLIT = re.compile(r"[,;]")


def _entries(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        for chunk in _SPLIT.split(line):
            chunk = chunk.strip()
            if chunk:
                yield lineno, chunk


def _convert(key: str, value: str, lineno: int):
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
    except ValueError:
        raise ParseError(f"{key}: cannot parse {value!r}", lineno) from None
    return value


def _floats(key: str, value: str, lineno: int) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in value.split())
    except ValueError:
        raise ParseError(f"{key}: expected whitespace-separated numbers, got {value!r}", lineno) from None


def parse_config(text: str) -> RunConfig:
    raw: dict[str, tuple[object, int]] = {}
    for lineno, entry in _entries(text):
        if "=" not in entry:
            raise ParseError(f"expected key=value, got {entry!r}", lineno)
        key, value = (s.strip() for s in entry.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ParseError(f"duplicate key {key!r}", lineno)
        raw[key] = (_convert(key, value, lineno), lineno)

    def get(key, default=None):
        return raw[key][0] if key in raw else default

    def line(key):
        return raw[key][1] if key in raw else None

    if "spin.sigma" in raw:
        if "spin.w_plus" in raw or "spin.w_minus" in raw:
            raise ParseError("give either spin.sigma or spin.w_plus/w_minus, not both", line("spin.sigma"))
        spin = SpinWeights.from_polarization(get("spin.sigma"))
    elif "spin.w_plus" in raw or "spin.w_minus" in raw:
        w_plus = get("spin.w_plus")
        w_minus = get("spin.w_minus")
        if w_plus is None:
            w_plus = 1.0 - w_minus
        if w_minus is None:
            w_minus = 1.0 - w_plus
        spin = SpinWeights(w_plus, w_minus)
    else:
        spin = SpinWeights(0.5, 0.5)

    params = validate_params(
        ModelParams(
            v_prime=get("model.v_prime", 10.0),
            V_prime=get("model.V_prime", 10.0),
            eta=get("model.eta", 1.0),
            n_pointer=get("model.n", 1),
            spin=spin,
        )
    )

    mode = get("ic.mode", "grid")
    if "ic.q0_values" in raw:
        q0 = _floats("ic.q0_values", get("ic.q0_values"), line("ic.q0_values"))
    elif mode == "grid":
        q0 = tuple(grid_initial_positions(get("ic.grid_n", GRID_N), get("ic.grid_half_range", GRID_HALF_RANGE)))
    else:
        q0 = ()
    zraw = get("ic.zhat0", "0 0")
    if zraw.strip() == "sampled":
        zhat0 = "sampled"
    else:
        zhat0 = _floats("ic.zhat0", zraw, line("ic.zhat0"))
        if len(zhat0) != 2:
            raise ParseError("ic.zhat0 needs two numbers or 'sampled'", line("ic.zhat0"))
    try:
        ic = InitialConditionSpec(
            mode=mode, q0_values=q0, zhat0=zhat0, seed=get("ic.seed", 0), count=get("ic.count", 1000)
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    overrides = {k.split(".", 1)[1]: v for k, (v, _) in raw.items() if k.startswith("integration.")}
    if "onset_step" in overrides:
        s = overrides["onset_step"].strip()
        overrides["onset_step"] = None if s.lower() == "none" else _convert("integration.max_step", s, line("integration.onset_step"))
    try:
        integration = IntegrationConfig.for_params(params, **overrides)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    outputs = OutputPaths(get("output.csv"), get("output.summary"), get("output.svg"))
    return RunConfig(params, ic, integration, outputs)


def serialize_config(cfg: RunConfig) -> str:
    p, ic, ig, out = cfg.params, cfg.ic, cfg.integration, cfg.outputs
    lines = [
        f"spin.w_plus={p.spin.w_plus!r}",
        f"spin.w_minus={p.spin.w_minus!r}",
        f"model.v_prime={p.v_prime!r}",
        f"model.V_prime={p.V_prime!r}",
        f"model.eta={p.eta!r}",
        f"model.n={p.n_pointer}",
        f"ic.mode={ic.mode}",
    ]
    if ic.q0_values:
        lines.append("ic.q0_values=" + " ".join(repr(q) for q in ic.q0_values))
    zhat = ic.zhat0 if isinstance(ic.zhat0, str) else " ".join(repr(z) for z in ic.zhat0)
    lines += [
        f"ic.zhat0={zhat}",
        f"ic.seed={ic.seed}",
        f"ic.count={ic.count}",
        f"integration.t_max={ig.t_max!r}",
        f"integration.rel_tol={ig.rel_tol!r}",
        f"integration.abs_tol={ig.abs_tol!r}",
        f"integration.max_step={ig.max_step!r}",
        f"integration.sample_interval={ig.sample_interval!r}",
        f"integration.onset_step={'none' if ig.onset_step is None else repr(ig.onset_step)}",
    ]
    for key, value in (("csv", out.csv_path), ("summary", out.summary_path), ("svg", out.svg_path)):
        if value is not None:
            lines.append(f"output.{key}={value}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Preset:
    sigma: float
    V_prime: float
    n_pointer: int
    zhat0: tuple[float, float]
    caption: str


# shared by every figure: eta = 1, v' = 10, 41 starts over +-1.5
PRESETS: dict[str, Preset] = {
    "fig2": Preset(0.0, 0.0, 1, (0.2, 0.1), "V'=0, uncoupled pointers, Z1(0)=0.2, Z2(0)=0.1"),
    "fig3": Preset(0.0, 10.0, 1, (0.2, 0.1), "V'/v'=1, one particle per pointer"),
    "fig4": Preset(0.0, 10.0, 1, (0.6, 0.4), "V'/v'=1, Z1(0)=0.6, Z2(0)=0.4"),
    "fig5": Preset(0.0, 10.0, 25, (0.2, 0.1), "25 particles per pointer"),
    "fig6": Preset(0.0, 10.0, 10**4, (0.02, 0.02), "N=1e4, small positive offset"),
    "fig7": Preset(0.5, 10.0, 25, (0.1, 0.1), "sigma=0.5, pointers favour up"),
    "fig8": Preset(0.5, 10.0, 25, (-0.2, -0.2), "sigma=0.5, pointers favour down"),
    "fig9": Preset(0.01, 10.0, 10**6, (0.0, 0.0), "sigma=0.01, N=1e6, neutral pointers"),
    "fig10": Preset(0.01, 10.0, 10**6, (-0.01, -0.01), "sigma=0.01, N=1e6, slightly negative pointers"),
    "fig9-uncoupled": Preset(0.01, 0.0, 10**6, (0.0, 0.0), "right panel of fig9, V'=0"),
    "fig10-uncoupled": Preset(0.01, 0.0, 10**6, (-0.01, -0.01), "right panel of fig10, V'=0"),
}


def figure_preset(fig_id: str) -> RunConfig:
    try:
        pr = PRESETS[fig_id]
    except KeyError:
        raise UnknownFigure(f"unknown figure preset {fig_id!r}; choose from {', '.join(PRESETS)}") from None
    params = validate_params(
        ModelParams(
            v_prime=10.0,
            V_prime=pr.V_prime,
            eta=1.0,
            n_pointer=pr.n_pointer,
            spin=SpinWeights.from_polarization(pr.sigma),
        )
    )
    ic = InitialConditionSpec(
        mode="grid",
        q0_values=tuple(grid_initial_positions(GRID_N, GRID_HALF_RANGE)),
        zhat0=pr.zhat0,
    )
    return RunConfig(params, ic, IntegrationConfig.for_params(params))


def with_outputs(cfg: RunConfig, **paths) -> RunConfig:
    """Override output paths, ignoring ``None`` values."""
    current = cfg.outputs
    merged = replace(current, **{k: v for k, v in paths.items() if v is not None})
    return replace(cfg, outputs=merged)
