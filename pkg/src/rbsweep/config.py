"""Flat key-value run configuration.

The format is one ``section.key = value`` assignment per line; ``#`` starts a
comment.  Unknown keys are rejected outright rather than ignored, because a
silently misspelled tolerance is the most expensive failure mode a config
file has.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError
from .fom import (
    FrequencyBand,
    FullOrderModel,
    import_model,
    make_helmholtz_cavity,
    make_resonator_chain,
)
from .greedy import STRATEGIES, GreedyConfig

_KNOWN_KEYS = {
    "model.kind": str,
    "model.n": int,
    "model.coupling": float,
    "model.dim": int,
    "model.elements": int,
    "model.port": int,
    "model.k_file": str,
    "model.m_file": str,
    "model.b_file": str,
    "band.omega_min": float,
    "band.omega_max": float,
    "band.grid_size": int,
    "greedy.tol": float,
    "greedy.max_iters": int,
    "greedy.seed": int,
    "greedy.strategy": str,  # comma-separated list of strategy names
    "greedy.oracle": bool,
    "greedy.alg1_stopping": str,
    "sweep.mode_budget": str,
}

_DEFAULTS = {
    "model.kind": "chain",
    "model.n": 20,
    "model.coupling": 1.0,
    "model.dim": 2,
    "model.elements": 8,
    "model.port": 0,
    "band.omega_min": 0.55,
    "band.omega_max": 1.03,
    "band.grid_size": 1001,
    "greedy.tol": 2e-7,
    "greedy.seed": 0,
    "greedy.strategy": "algorithm2",
    "greedy.oracle": False,
    "greedy.alg1_stopping": "state",
    "sweep.mode_budget": "all",
}


@dataclass(frozen=True)
class RunConfig:
    """Parsed assignments plus the path they came from."""

    values: dict
    source: str

    def get(self, key, default=None):
        return self.values.get(key, _DEFAULTS.get(key, default))


def _coerce(key: str, raw: str, lineno: int, source: str):
    kind = _KNOWN_KEYS[key]
    if kind is bool:
        lowered = raw.lower()
        if lowered in ("true", "yes", "1", "on"):
            return True
        if lowered in ("false", "no", "0", "off"):
            return False
        raise ParseError(f"{source}:{lineno}: {key} expects a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError as exc:
        raise ParseError(
            f"{source}:{lineno}: {key} expects {kind.__name__}, got {raw!r}"
        ) from exc


def parse_config(path) -> RunConfig:
    """Read assignments from ``path``; unknown keys and bad values raise."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'section.key = value'")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in _KNOWN_KEYS:
            raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
        if not raw_value:
            raise ParseError(f"{path}:{lineno}: empty value for {key!r}")
        values[key] = _coerce(key, raw_value, lineno, str(path))
    return RunConfig(values=values, source=str(path))


def default_config() -> RunConfig:
    return RunConfig(values={}, source="<defaults>")


def build_band(cfg: RunConfig) -> FrequencyBand:
    return FrequencyBand(
        omega_min=cfg.get("band.omega_min"),
        omega_max=cfg.get("band.omega_max"),
        grid_size=cfg.get("band.grid_size"),
    )


def build_model(cfg: RunConfig) -> FullOrderModel:
    band = build_band(cfg)
    kind = cfg.get("model.kind")
    if kind == "chain":
        return make_resonator_chain(cfg.get("model.n"), cfg.get("model.coupling"), band)
    if kind == "cavity":
        return make_helmholtz_cavity(
            cfg.get("model.dim"), cfg.get("model.elements"), band, cfg.get("model.port")
        )
    if kind == "import":
        for key in ("model.k_file", "model.m_file", "model.b_file"):
            if cfg.get(key) is None:
                raise ParseError(f"{cfg.source}: model.kind=import requires {key}")
        base = Path(cfg.source).parent if cfg.source != "<defaults>" else Path(".")
        paths = [
            Path(cfg.get(key))
            if Path(cfg.get(key)).is_absolute()
            else base / cfg.get(key)
            for key in ("model.k_file", "model.m_file", "model.b_file")
        ]
        return import_model(*paths, band)
    raise ParseError(f"{cfg.source}: unknown model.kind {kind!r}")


def strategy_list(cfg: RunConfig, override: list[str] | None = None) -> list[str]:
    """Strategies to run: CLI repeats win over the comma-separated config value."""
    if override:
        names = list(override)
    else:
        names = [s.strip() for s in cfg.get("greedy.strategy").split(",") if s.strip()]
    if not names:
        raise ParseError(f"{cfg.source}: greedy.strategy names no strategies")
    for name in names:
        if name not in STRATEGIES:
            raise ParseError(f"{cfg.source}: unknown greedy.strategy {name!r}")
    return names


def build_greedy_config(
    cfg: RunConfig,
    model: FullOrderModel,
    strategy: str,
    seed: int | None = None,
    oracle: bool | None = None,
) -> GreedyConfig:
    """Greedy settings from the config, with CLI overrides layered on top."""
    if strategy not in STRATEGIES:
        raise ParseError(f"{cfg.source}: unknown greedy.strategy {strategy!r}")
    return GreedyConfig(
        grid=model.band.grid(),
        tol=cfg.get("greedy.tol"),
        max_iters=cfg.get("greedy.max_iters"),
        seed=seed if seed is not None else cfg.get("greedy.seed"),
        strategy=strategy,
        oracle=oracle if oracle is not None else cfg.get("greedy.oracle"),
        alg1_stopping=cfg.get("greedy.alg1_stopping"),
    )
