# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

from pathlib import Path

import pytest

from prompt_rewriter.module_utils.api_spec.generator import GeneratorSpec
from prompt_rewriter.module_utils.api_spec.split import SplitSpec
from prompt_rewriter.module_utils.api_spec.synth import SynthSpec
from prompt_rewriter.module_utils.config import build_params, load_config
from prompt_rewriter.module_utils.exceptions import ConfigError
from prompt_rewriter.module_utils.runner import ModuleFailure, ModuleUsageError, PipelineModule

SHIPPED_CONFIG = Path(__file__).parents[3] / "config" / "pipeline.cfg"


def test_missing_config_file(tmp_path):
    assert load_config(None) == {}
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.cfg"))


def test_invalid_config_file(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("seed = 3\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_precedence_defaults_config_cli():
    config = {"workspace": {"seed": "3", "domain": "Email"}, "split": {"ratios": "80,10,10"}}
    params = build_params(SplitSpec.spec(), config, "split", overrides={"seed": 7, "workdir": None})
    validated = PipelineModule(SplitSpec.spec(), params).params
    assert validated["seed"] == 7
    assert validated["domain"] == "Email"
    assert validated["ratios"] == [80, 10, 10]
    assert validated["context_budget_tokens"] == 30


def test_shared_keys_are_taken_only_when_declared():
    config = {"workspace": {"domain": "Social", "unknown": "x"}}
    params = build_params(GeneratorSpec.module_spec(), config, "eval")
    assert "domain" not in params
    assert "unknown" not in params


def test_generator_flags_override_section():
    config = {"generator": {"model_name": "m", "budget_calls": "10"}}
    params = build_params(
        GeneratorSpec.module_spec(), config, "label", generator_overrides={"budget": 5, "endpoint": None}
    )
    assert params["generator"] == {"model_name": "m", "budget_calls": 5}
    generator = PipelineModule(GeneratorSpec.module_spec(), params).params["generator"]
    assert generator["budget_calls"] == 5
    assert generator["backend"] == "simulated"


def test_typo_in_module_section_is_reported():
    params = build_params(SynthSpec.spec(), {"synth": {"num_user": "3"}}, "synth")
    with pytest.raises(ModuleUsageError) as exc:
        PipelineModule(SynthSpec.spec(), params)
    assert "num_user" in str(exc.value)


def test_remote_backend_needs_endpoint():
    with pytest.raises(ModuleUsageError):
        PipelineModule(GeneratorSpec.module_spec(), {"generator": {"backend": "remote"}})


def test_shipped_config_validates_for_synth():
    config = load_config(str(SHIPPED_CONFIG))
    params = PipelineModule(SynthSpec.spec(), build_params(SynthSpec.spec(), config, "synth")).params
    assert params["num_users"] > 0


def test_fail_and_exit_json():
    module = PipelineModule(SynthSpec.spec(), {})
    with pytest.raises(ModuleFailure) as exc:
        module.fail_json(msg="broken", error_code="SchemaError")
    assert exc.value.result == {"failed": True, "msg": "broken", "error_code": "SchemaError"}
    assert exc.value.error_code == "SchemaError"
    assert module.exit_json(users=3) == {"users": 3, "changed": False}
