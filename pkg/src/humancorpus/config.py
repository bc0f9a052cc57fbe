"""Pipeline configuration: one TOML file with a section per stage.

Thresholds default to the strict readings of the selection gates
(side > 128, conf > 0.98, p > 0.85, kept labels > 5); ``strict = false``
flips every gate to inclusive for users who prefer the >= reading.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ImportError:  # pragma: no cover
    import tomli as tomllib

DEFAULT_REFUSAL_PATTERNS = (
    "i cannot", "i can't", "i'm sorry", "as an ai", "unable to assist",
)

DEFAULT_REWRITE_PROMPT = (
    "Rewrite the following short sentences describing a person's appearance "
    "into one fluent, natural paragraph. Keep every stated detail and do not "
    "add new facts.\n\n{raw}"
)

CONFIG_ENV_VAR = "HUMANCORPUS_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FilterConfig:
    min_face_side: float = 128.0
    min_face_conf: float = 0.98
    min_attr_prob: float = 0.85
    min_valid_attrs: int = 5
    strict: bool = True

    def __post_init__(self):
        if self.min_face_side <= 0:
            raise ConfigError("min_face_side must be positive")
        if not 0.0 <= self.min_face_conf <= 1.0:
            raise ConfigError("min_face_conf must lie in [0, 1]")
        if not 0.0 <= self.min_attr_prob <= 1.0:
            raise ConfigError("min_attr_prob must lie in [0, 1]")
        if self.min_valid_attrs < 0:
            raise ConfigError("min_valid_attrs must be non-negative")


@dataclass(frozen=True)
class CleanConfig:
    min_caption_words: int = 10
    refusal_patterns: tuple[str, ...] = DEFAULT_REFUSAL_PATTERNS
    text_field: str = "caption"

    def __post_init__(self):
        if self.min_caption_words < 0:
            raise ConfigError("min_caption_words must be non-negative")
        if not self.refusal_patterns:
            raise ConfigError("refusal_patterns must be non-empty")


@dataclass(frozen=True)
class SynthConfig:
    fallback_pronoun: str = "they"
    grammar_file: str = ""
    phrase_file: str = ""

    def __post_init__(self):
        if self.fallback_pronoun not in ("they", "she", "he"):
            raise ConfigError("fallback_pronoun must be one of they/she/he")


@dataclass(frozen=True)
class MergeConfig:
    connective: str = ""


@dataclass(frozen=True)
class LlmEndpointConfig:
    base_url: str = ""
    model: str = "qwen-7b-chat"
    temperature: float = 0.7
    max_inflight: int = 4
    retries: int = 3
    timeout: float = 30.0
    mock: bool = True
    backoff_base: float = 0.5
    backoff_cap: float = 8.0
    rewrite_prompt: str = DEFAULT_REWRITE_PROMPT

    def __post_init__(self):
        if self.retries < 0:
            raise ConfigError("retries must be >= 0")
        if self.max_inflight < 1:
            raise ConfigError("max_inflight must be >= 1")
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")
        if "{raw}" not in self.rewrite_prompt:
            raise ConfigError("rewrite_prompt must contain a {raw} slot")


@dataclass(frozen=True)
class StatsConfig:
    ngram_n: int = 4
    sample_pct: float = 100.0

    def __post_init__(self):
        if self.ngram_n < 1:
            raise ConfigError("ngram_n must be >= 1")
        if not 0.0 < self.sample_pct <= 100.0:
            raise ConfigError("sample_pct must lie in (0, 100]")


@dataclass(frozen=True)
class QualityConfig:
    kernel_size: int = 7
    kernel_sigma: float = 7.0 / 6.0
    c: float = 1.0
    alpha_lo: float = 0.1
    alpha_hi: float = 10.0
    logit_scale: float = 100.0
    bins: int = 10
    model_file: str = ""

    def __post_init__(self):
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise ConfigError("kernel_size must be odd and >= 3")
        if self.kernel_sigma <= 0 or self.c <= 0:
            raise ConfigError("kernel_sigma and c must be positive")
        if not 0 < self.alpha_lo < self.alpha_hi:
            raise ConfigError("alpha bracket must satisfy 0 < lo < hi")
        if self.bins < 1:
            raise ConfigError("bins must be >= 1")


@dataclass(frozen=True)
class PipelineConfig:
    filter: FilterConfig = field(default_factory=FilterConfig)
    clean: CleanConfig = field(default_factory=CleanConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    merge: MergeConfig = field(default_factory=MergeConfig)
    llm: LlmEndpointConfig = field(default_factory=LlmEndpointConfig)
    stats: StatsConfig = field(default_factory=StatsConfig)
    quality: QualityConfig = field(default_factory=QualityConfig)
    rng_seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if not -(2**63) <= self.rng_seed < 2**64:
            raise ConfigError("rng_seed must fit in 64 bits")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if dataclasses.is_dataclass(value):
                out[f.name] = {
                    sf.name: _plain(getattr(value, sf.name))
                    for sf in fields(value)
                }
            else:
                out[f.name] = value
        return out


def _plain(value):
    return list(value) if isinstance(value, tuple) else value


_SECTIONS = {
    "filter": FilterConfig,
    "clean": CleanConfig,
    "synth": SynthConfig,
    "merge": MergeConfig,
    "llm": LlmEndpointConfig,
    "stats": StatsConfig,
    "quality": QualityConfig,
}
_TUPLE_FIELDS = {("clean", "refusal_patterns")}


def config_from_dict(data: dict) -> PipelineConfig:
    kwargs = {}
    for section, cls in _SECTIONS.items():
        raw = dict(data.get(section, {}))
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
        for key in list(raw):
            if (section, key) in _TUPLE_FIELDS:
                raw[key] = tuple(raw[key])
        try:
            kwargs[section] = cls(**raw)
        except TypeError as exc:
            raise ConfigError(f"[{section}]: {exc}") from exc
    run = data.get("run", {})
    unknown = set(run) - {"seed", "jobs"}
    if unknown:
        raise ConfigError(f"unknown keys in [run]: {sorted(unknown)}")
    return PipelineConfig(
        rng_seed=run.get("seed", 0), jobs=run.get("jobs", 1), **kwargs)


def load_config(path: str | Path) -> PipelineConfig:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        escaped = (value.replace("\\", "\\\\").replace('"', '\\"')
                   .replace("\n", "\\n").replace("\t", "\\t"))
        return f'"{escaped}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize {value!r} to TOML")


def dump_config(config: PipelineConfig) -> str:
    """Serialize to TOML; ``load`` of the result reproduces the config."""
    lines = ["[run]", f"seed = {config.rng_seed}", f"jobs = {config.jobs}", ""]
    for section in _SECTIONS:
        sub = getattr(config, section)
        lines.append(f"[{section}]")
        for f in fields(sub):
            lines.append(f"{f.name} = {_toml_value(getattr(sub, f.name))}")
        lines.append("")
    return "\n".join(lines)


def save_config(config: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(config), encoding="utf-8")
