import dataclasses

import pytest

from humancorpus.config import (
    ConfigError, FilterConfig, LlmEndpointConfig, PipelineConfig,
    config_from_dict, dump_config, load_config, save_config,
)

try:
    import tomllib
except ImportError:
    import tomli as tomllib


def test_defaults_match_stated_thresholds():
    cfg = PipelineConfig()
    assert cfg.filter.min_face_side == 128.0
    assert cfg.filter.min_face_conf == 0.98
    assert cfg.filter.min_attr_prob == 0.85
    assert cfg.filter.min_valid_attrs == 5
    assert cfg.filter.strict is True
    assert cfg.clean.min_caption_words == 10


def test_toml_roundtrip_lossless(tmp_path):
    cfg = PipelineConfig(
        filter=FilterConfig(min_face_side=96, min_attr_prob=0.8, strict=False),
        llm=LlmEndpointConfig(base_url="http://h:1/v1", temperature=0.25,
                              retries=5),
        rng_seed=123456789,
        jobs=8,
    )
    path = tmp_path / "c.toml"
    save_config(cfg, path)
    assert load_config(path) == cfg


def test_dump_parses_as_valid_toml():
    text = dump_config(PipelineConfig())
    parsed = tomllib.loads(text)
    assert parsed["filter"]["min_face_conf"] == 0.98
    assert "{raw}" in parsed["llm"]["rewrite_prompt"]


def test_partial_file_fills_defaults(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text("[filter]\nmin_face_side = 64\n[run]\nseed = 9\n")
    cfg = load_config(path)
    assert cfg.filter.min_face_side == 64
    assert cfg.filter.min_face_conf == 0.98
    assert cfg.rng_seed == 9


@pytest.mark.parametrize("data", [
    {"filter": {"min_face_conf": 1.5}},
    {"filter": {"nope": 1}},
    {"clean": {"refusal_patterns": []}},
    {"llm": {"retries": -1}},
    {"llm": {"max_inflight": 0}},
    {"run": {"jobs": 0}},
    {"stats": {"sample_pct": 0}},
    {"quality": {"kernel_size": 4}},
])
def test_validation_rejects_bad_values(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_config_is_immutable():
    cfg = PipelineConfig()
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.jobs = 3
