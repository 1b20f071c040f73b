import json

import pytest

from seganforge import __version__
from seganforge.config import Settings
from seganforge.exceptions import ConfigError
from seganforge.models.schemas import SynthCommandConfig, TrainCommandConfig
from seganforge.utils.config_files import (
    apply_overrides,
    config_hash,
    describe_model,
    load_toml,
    parse_override,
    validate_document,
    write_effective_config,
    write_provenance,
)


@pytest.mark.parametrize(
    ("text", "keys", "value"),
    [
        ("train.epochs=3", ["train", "epochs"], 3),
        ("train.lr = 0.001", ["train", "lr"], 0.001),
        ("plan.durations_s=[24, 60]", ["plan", "durations_s"], [24, 60]),
        ("train.freeze_discriminator=true", ["train", "freeze_discriminator"], True),
        ('data.manifest="runs/train.tsv"', ["data", "manifest"], "runs/train.tsv"),
        ("data.manifest=runs/train.tsv", ["data", "manifest"], "runs/train.tsv"),
    ],
)
def test_parse_override(text, keys, value):
    assert parse_override(text) == (keys, value)


@pytest.mark.parametrize("text", ["train.epochs", "=3", "train..epochs=1"])
def test_malformed_override_is_rejected(text):
    with pytest.raises(ConfigError):
        parse_override(text)


def test_overrides_build_tables_without_touching_the_input():
    document = {"train": {"epochs": 30}}

    merged = apply_overrides(document, ["train.epochs=2", "data.manifest=m.tsv", "train.epochs=4"])

    assert merged == {"train": {"epochs": 4}, "data": {"manifest": "m.tsv"}}
    assert document == {"train": {"epochs": 30}}
    with pytest.raises(ConfigError, match="non-table"):
        apply_overrides({"train": 3}, ["train.epochs=1"])


def test_validation_error_names_the_dotted_key():
    with pytest.raises(ConfigError, match=r"train\.epochs"):
        validate_document(TrainCommandConfig, {"data": {"manifest": "m"}, "train": {"epochs": -1}})
    with pytest.raises(ConfigError, match="data"):
        validate_document(TrainCommandConfig, {})


def test_load_toml(tmp_path):
    assert load_toml(None) == {}

    good = tmp_path / "good.toml"
    good.write_text('[train]\nprofile = "tiny"\nepochs = 2\n', encoding="utf-8")
    assert load_toml(good) == {"train": {"profile": "tiny", "epochs": 2}}

    bad = tmp_path / "bad.toml"
    bad.write_text("[train]\nepochs = \n", encoding="utf-8")
    with pytest.raises(ConfigError, match="line 2"):
        load_toml(bad)
    with pytest.raises(ConfigError, match="not found"):
        load_toml(tmp_path / "absent.toml")


def test_provenance_is_reproducible(tmp_path):
    config = SynthCommandConfig.model_validate({"synth": {"seed": 4}})

    first = write_provenance(config, tmp_path / "a", "synth", {"synth": 4}).read_bytes()
    second = write_provenance(config, tmp_path / "b", "synth", {"synth": 4}).read_bytes()

    assert first == second
    record = json.loads(first)
    assert record == {
        "tool_version": __version__,
        "command": "synth",
        "config_sha256": config_hash(config),
        "seeds": {"synth": 4},
    }
    other = SynthCommandConfig.model_validate({"synth": {"seed": 5}})
    assert config_hash(other) != config_hash(config)


def test_effective_config_holds_defaults(tmp_path):
    config = validate_document(TrainCommandConfig, {"data": {"manifest": "m.tsv"}})

    written = json.loads(write_effective_config(config, tmp_path).read_text(encoding="utf-8"))

    assert written["data"]["manifest"] == "m.tsv"
    assert written["train"]["lambda_l1"] == 100.0
    assert written["train"]["profile"] == "desk"


def test_describe_model_lists_nested_keys():
    lines = describe_model(TrainCommandConfig)
    by_key = {line.split()[0]: line for line in lines}

    assert "required" in by_key["data.manifest"]
    assert "default 30" in by_key["train.epochs"]
    assert "float" in by_key["data.duration_s"]


def test_settings_validation(monkeypatch):
    options = Settings()
    monkeypatch.setattr(options, "JOBS", "1")
    monkeypatch.setattr(options, "PESQ_COMMAND", None)
    assert options.validate() == (True, None)
    assert options.jobs == 1

    monkeypatch.setattr(options, "JOBS", "0")
    assert options.validate()[0] is False
    monkeypatch.setattr(options, "JOBS", "four")
    assert "integer" in options.validate()[1]

    monkeypatch.setattr(options, "JOBS", "2")
    monkeypatch.setattr(options, "PESQ_COMMAND", "pesq {clean}")
    assert "{degraded}" in options.validate()[1]
