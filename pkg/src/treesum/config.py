"""Run configuration: one serializable record per CLI invocation.

A config can come from command-line flags, from a flat ``key = value`` text
file, or both (flags override the file). Every run echoes its effective
config into the output directory so results can be reproduced exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .corpus import Corpus
from .embedding import provider_builtin_tfidf, provider_file, provider_remote
from .rouge import METRIC_IDS
from .scoring import Hyperparams
from .selection import Budget
from .variants import METHODS


class ConfigError(Exception):
    """Raised for unusable run configurations."""


@dataclass(frozen=True)
class RunConfig:
    input: str = ""
    layout: str = "topic-dirs"
    method: str = "ours_final"
    budget_unit: str = "words"
    budget_limit: int = 100
    embedder: str = "builtin:128"
    seed: int = 0
    k_first: int = 3
    k_rest: int = 2
    delta: float = 0.9
    alpha: float = 0.8
    beta: float = 0.1
    gamma: float = 0.1
    max_nodes: int | None = None
    metrics: tuple[str, ...] = METRIC_IDS
    report: str = "recall"
    out: str = "out"
    workers: int = 1

    def hyperparams(self) -> Hyperparams:
        try:
            return Hyperparams(
                delta=self.delta,
                alpha=self.alpha,
                beta=self.beta,
                gamma=self.gamma,
                k_first=self.k_first,
                k_rest=self.k_rest,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def budget(self) -> Budget:
        try:
            return Budget(unit=self.budget_unit, limit=self.budget_limit)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def make_provider(self, corpus: Corpus):
        """Build the embedding provider described by the ``embedder`` spec.

        Specs: ``file:<path>``, ``builtin:<dim>`` or ``remote:<url>``.
        """
        kind, _, arg = self.embedder.partition(":")
        if not arg:
            raise ConfigError(f"malformed embedder spec {self.embedder!r}")
        if kind == "file":
            return provider_file(arg)
        if kind == "builtin":
            try:
                dim = int(arg)
            except ValueError as exc:
                raise ConfigError(f"builtin embedder dim must be an integer: {arg!r}") from exc
            if dim < 2:
                raise ConfigError("builtin embedder dim must be >= 2")
            return provider_builtin_tfidf(corpus, dim, self.seed)
        if kind == "remote":
            return provider_remote(arg)
        raise ConfigError(f"unknown embedder kind {kind!r}")


# File keys mirror the CLI flag names; the budget is stored under whichever
# of budget-words / budget-bytes matches its unit.
_SIMPLE_KEYS = {
    "input": ("input", str),
    "layout": ("layout", str),
    "method": ("method", str),
    "embedder": ("embedder", str),
    "seed": ("seed", int),
    "k-first": ("k_first", int),
    "k-rest": ("k_rest", int),
    "delta": ("delta", float),
    "alpha": ("alpha", float),
    "beta": ("beta", float),
    "gamma": ("gamma", float),
    "max-nodes": ("max_nodes", int),
    "report": ("report", str),
    "out": ("out", str),
    "workers": ("workers", int),
}


def config_to_text(config: RunConfig) -> str:
    lines = [
        f"input = {config.input}",
        f"layout = {config.layout}",
        f"method = {config.method}",
        f"budget-{config.budget_unit} = {config.budget_limit}",
        f"embedder = {config.embedder}",
        f"seed = {config.seed}",
        f"k-first = {config.k_first}",
        f"k-rest = {config.k_rest}",
        f"delta = {config.delta}",
        f"alpha = {config.alpha}",
        f"beta = {config.beta}",
        f"gamma = {config.gamma}",
    ]
    if config.max_nodes is not None:
        lines.append(f"max-nodes = {config.max_nodes}")
    lines += [
        f"metrics = {','.join(config.metrics)}",
        f"report = {config.report}",
        f"out = {config.out}",
        f"workers = {config.workers}",
    ]
    return "\n".join(lines) + "\n"


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def config_from_mapping(values: dict[str, str], base: RunConfig | None = None) -> RunConfig:
    config = base or RunConfig()
    updates: dict = {}
    for key, raw in values.items():
        try:
            if key in _SIMPLE_KEYS:
                attr, cast = _SIMPLE_KEYS[key]
                updates[attr] = cast(raw)
            elif key == "budget-words":
                updates["budget_unit"] = "words"
                updates["budget_limit"] = int(raw)
            elif key == "budget-bytes":
                updates["budget_unit"] = "bytes"
                updates["budget_limit"] = int(raw)
            elif key == "metrics":
                updates["metrics"] = tuple(m.strip() for m in raw.split(",") if m.strip())
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    config = replace(config, **updates)
    if config.method.replace("-", "_") not in METHODS:
        raise ConfigError(f"unknown method {config.method!r}")
    unknown = set(config.metrics) - set(METRIC_IDS)
    if unknown:
        raise ConfigError(f"unknown metrics: {sorted(unknown)}")
    if config.report not in ("recall", "f1"):
        raise ConfigError(f"report must be 'recall' or 'f1', got {config.report!r}")
    if config.workers < 1:
        raise ConfigError("workers must be >= 1")
    return config


def load_config_file(path: str | Path) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {p} does not exist")
    return parse_config_text(p.read_text(encoding="utf-8"), source=str(p))


def write_config(config: RunConfig, out_dir: str | Path) -> Path:
    """Echo the effective config into the run's output directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "config.txt"
    path.write_text(config_to_text(config), encoding="utf-8")
    return path
