"""Run configuration resolved from defaults, config file, env, and flags."""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, fields


class ConfigError(ValueError):
    pass


ENV_PREFIX = "KGQA_"

_INT_FIELDS = {"width", "relation_keep", "candidate_cap", "workers",
               "max_tokens_intermediate", "max_tokens_final", "result_cap"}
_FLOAT_FIELDS = {"timeout_s", "temperature"}
_CHOICES = {
    "llm": ("scripted", "http"),
    "kg": ("local", "remote", "none"),
    "method": ("pdrr", "pdr", "io", "cot"),
    "type_source": ("predicted", "gold"),
    "rendering": ("triples", "sentences"),
    "kg_format": ("tsv-triples", "n-triples-subset"),
}
# Output locations do not change what an experiment computes, so they are
# left out of the config digest.
_DIGEST_EXCLUDED = {"trace_dir", "cache_path"}


@dataclass
class RunConfig:
    llm: str = "http"
    script: str = ""
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "KGQA_API_KEY"
    kg: str = "local"
    kg_path: str = ""
    kg_format: str = "tsv-triples"
    kg_endpoint: str = ""
    method: str = "pdrr"
    type_source: str = "predicted"
    width: int = 2
    relation_keep: int = 5
    candidate_cap: int = 60
    rendering: str = "triples"
    template_dir: str = ""
    cache_path: str = ""
    trace_dir: str = ""
    workers: int = 1
    timeout_s: float = 120.0
    temperature: float = 0.1
    max_tokens_intermediate: int = 256
    max_tokens_final: int = 1024
    result_cap: int = 2000

    def validate(self) -> "RunConfig":
        for name, allowed in _CHOICES.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(
                    f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        if self.width < 1:
            raise ConfigError("width must be >= 1")
        if self.relation_keep < 1:
            raise ConfigError("relation_keep must be >= 1")
        if not 0.0 <= self.temperature <= 1.0:
            raise ConfigError("temperature must be in [0, 1]")
        if self.llm == "scripted" and not self.script:
            raise ConfigError("scripted llm backend requires a script path")
        if self.llm == "http" and not self.endpoint:
            raise ConfigError("http llm backend requires an endpoint")
        if self.kg == "local" and not self.kg_path:
            raise ConfigError("local kg backend requires a kg path")
        if self.kg == "remote" and not self.kg_endpoint:
            raise ConfigError("remote kg backend requires an endpoint URL")
        return self

    def digest(self) -> str:
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name in _DIGEST_EXCLUDED:
                continue
            lines.append(f"{f.name}={getattr(self, f.name)}")
        return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


def _coerce(name: str, value):
    if isinstance(value, str):
        try:
            if name in _INT_FIELDS:
                return int(value)
            if name in _FLOAT_FIELDS:
                return float(value)
        except ValueError as e:
            raise ConfigError(f"bad value for {name}: {value!r}") from e
    return value


def parse_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    known = {f.name for f in fields(RunConfig)}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in known:
                raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
            values[key] = value.strip()
    return values


def resolve_config(flag_values: dict | None = None, config_file: str | None = None,
                   env: dict | None = None) -> RunConfig:
    """Apply precedence: flag > environment > config file > default."""
    env = os.environ if env is None else env
    merged: dict = {}
    if config_file:
        merged.update(parse_config_file(config_file))
    for f in fields(RunConfig):
        env_key = ENV_PREFIX + f.name.upper()
        if env_key in env:
            merged[f.name] = env[env_key]
    for key, value in (flag_values or {}).items():
        if value is not None:
            merged[key] = value
    merged = {k: _coerce(k, v) for k, v in merged.items()}
    try:
        return RunConfig(**merged).validate()
    except TypeError as e:
        raise ConfigError(str(e)) from e
