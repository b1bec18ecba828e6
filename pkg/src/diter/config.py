"""Experiment configuration: a flat ``section.key = value`` text document.

Example::

    # 2 workers on the first example, sharing after two local cycles
    input.example = A1
    sim.variant = v1
    sim.workers = 2
    sim.threshold = off
    sim.share_every = 2
    sim.update = 5:Aprime
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from diter.errors import ConfigError


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_int(text: str) -> int | None:
    return None if text.lower() in ("off", "none", "") else int(text)


def _opt_float(text: str) -> float | None:
    return None if text.lower() in ("none", "") else float(text)


def _names(text: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _owners(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in _names(text))


def _latency(text: str) -> tuple[float, float | None]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return float(lo), float(hi)
    return float(text), None


def _updates(text: str) -> tuple[tuple[float, str], ...]:
    out = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        t, sep, target = item.partition(":")
        if not sep or not target.strip():
            raise ValueError(f"matrix update must read 'time:target', got {item!r}")
        out.append((float(t), target.strip()))
    return tuple(out)


def _fmt_float(x: float | None) -> str:
    return "none" if x is None else repr(float(x))


def _fmt_latency(v: tuple[float, float | None]) -> str:
    lo, hi = v
    return repr(lo) if hi is None else f"{lo!r}..{hi!r}"


def _fmt_updates(v) -> str:
    return "; ".join(f"{t!r}:{target}" for t, target in v)


@dataclass
class ExperimentConfig:
    example: str | None = None
    matrix: str | None = None
    vector: str | None = None
    form: str = "A"
    out: str | None = None

    method: str = "d-iteration"
    strategy: str = "cyclic"
    tol: float = 1e-12
    max_steps: int = 10**6

    variant: str = "v1"
    workers: int = 1
    partition: tuple[int, ...] = ()
    sim_strategy: str = "cyclic"
    threshold: bool = True
    t0: float | None = None
    alpha: float = 2.0
    share_every: int | None = 1
    receive_trigger: bool = True
    latency: tuple[float, float | None] = (0.0, None)
    seed: int = 0
    slot: int = 1
    sim_tol: float = 1e-12
    max_time: float = 1e6
    eliminate_diagonal: bool = False
    updates: tuple[tuple[float, str], ...] = ()

    compare_examples: tuple[str, ...] = ("A1", "A2", "A3")
    compare_methods: tuple[str, ...] = ("jacobi", "gauss-seidel", "d-iteration", "1pid", "2pid")
    target: float = 1e-8

    def check_input(self) -> None:
        has_paths = self.matrix is not None or self.vector is not None
        if has_paths == (self.example is not None):
            raise ConfigError(0, "give exactly one of input.example or input.matrix/input.vector")
        if has_paths and (self.matrix is None or self.vector is None):
            raise ConfigError(0, "input.matrix and input.vector must be given together")
        if self.form not in ("A", "P"):
            raise ConfigError(0, f"input.form must be A or P, got {self.form!r}")


# key -> (attribute, parse, format)
_KEYS: dict[str, tuple[str, Callable, Callable]] = {
    "input.example": ("example", str, str),
    "input.matrix": ("matrix", str, str),
    "input.vector": ("vector", str, str),
    "input.form": ("form", str, str),
    "output.csv": ("out", str, str),
    "solve.method": ("method", str, str),
    "solve.strategy": ("strategy", str, str),
    "solve.tol": ("tol", float, repr),
    "solve.max_steps": ("max_steps", int, str),
    "sim.variant": ("variant", str, str),
    "sim.workers": ("workers", int, str),
    "sim.partition": ("partition", _owners, lambda v: ",".join(map(str, v))),
    "sim.strategy": ("sim_strategy", str, str),
    "sim.threshold": ("threshold", _bool, lambda v: "on" if v else "off"),
    "sim.threshold.t0": ("t0", _opt_float, _fmt_float),
    "sim.threshold.alpha": ("alpha", float, repr),
    "sim.share_every": ("share_every", _opt_int, lambda v: "off" if v is None else str(v)),
    "sim.receive_trigger": ("receive_trigger", _bool, lambda v: "on" if v else "off"),
    "sim.latency": ("latency", _latency, _fmt_latency),
    "sim.seed": ("seed", int, str),
    "sim.slot": ("slot", int, str),
    "sim.tol": ("sim_tol", float, repr),
    "sim.max_time": ("max_time", float, repr),
    "sim.eliminate_diagonal": ("eliminate_diagonal", _bool, lambda v: "on" if v else "off"),
    "sim.update": ("updates", _updates, _fmt_updates),
    "compare.examples": ("compare_examples", _names, ",".join),
    "compare.methods": ("compare_methods", _names, ",".join),
    "compare.target": ("target", float, repr),
}


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    seen: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(lineno, f"expected 'key = value', got {stripped!r}")
        if key not in _KEYS:
            raise ConfigError(lineno, f"unknown key {key!r}")
        if key in seen:
            raise ConfigError(lineno, f"duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = lineno
        attr, parse, _ = _KEYS[key]
        try:
            setattr(cfg, attr, parse(value))
        except ValueError as exc:
            raise ConfigError(lineno, f"bad value for {key}: {exc}") from None
    return cfg


def serialize_config(cfg: ExperimentConfig) -> str:
    """Every non-default field, one ``key = value`` line each."""
    default = ExperimentConfig()
    lines = []
    for key, (attr, _, fmt) in _KEYS.items():
        value = getattr(cfg, attr)
        if value != getattr(default, attr):
            lines.append(f"{key} = {fmt(value)}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())

