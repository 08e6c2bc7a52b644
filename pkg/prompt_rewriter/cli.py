# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Command line entry point.

Every subcommand is one pipeline module. Its options come from the module's
argument spec, so ``--num-users 50`` on ``synth`` sets ``num_users`` and
``--no-shuffle-sections`` turns a boolean option off. Values are merged as
spec defaults < config file section < command line and then validated by the
module itself.

Exit codes: 0 on success, 1 on usage errors, 2 when a module fails.
"""

import importlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import click
import typer
import yaml
from rich.console import Console

from prompt_rewriter import __version__
from prompt_rewriter.module_utils.api_spec.ablate import AblateSpec
from prompt_rewriter.module_utils.api_spec.eval import EvalSpec
from prompt_rewriter.module_utils.api_spec.ingest import IngestSpec
from prompt_rewriter.module_utils.api_spec.label import LabelSpec
from prompt_rewriter.module_utils.api_spec.prompts import PromptsSpec
from prompt_rewriter.module_utils.api_spec.report import ReportSpec
from prompt_rewriter.module_utils.api_spec.rewrite import RewriteSpec
from prompt_rewriter.module_utils.api_spec.split import SplitSpec
from prompt_rewriter.module_utils.api_spec.synth import SynthSpec
from prompt_rewriter.module_utils.api_spec.train_rl import TrainRlSpec
from prompt_rewriter.module_utils.api_spec.train_sl import TrainSlSpec
from prompt_rewriter.module_utils.api_spec.variants import VariantsSpec
from prompt_rewriter.module_utils.config import GENERATOR_SECTION, build_params, load_config
from prompt_rewriter.module_utils.exceptions import ConfigError
from prompt_rewriter.module_utils.log import configure_logging
from prompt_rewriter.module_utils.runner import ModuleFailure, ModuleUsageError
from prompt_rewriter.modules import (
    ablate,
    eval as eval_,
    ingest,
    label,
    prompts,
    report,
    rewrite,
    split,
    synth,
    train_rl,
    train_sl,
    variants,
)

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

# Options owned by the global callback; subcommands reject them.
GLOBAL_KEYS = frozenset({"workdir", "seed", "log_level", GENERATOR_SECTION})

# command -> (module, argument spec class); pipeline order
COMMANDS = {
    "synth": (synth, SynthSpec),
    "ingest": (ingest, IngestSpec),
    "split": (split, SplitSpec),
    "prompts": (prompts, PromptsSpec),
    "variants": (variants, VariantsSpec),
    "label": (label, LabelSpec),
    "train-sl": (train_sl, TrainSlSpec),
    "train-rl": (train_rl, TrainRlSpec),
    "rewrite": (rewrite, RewriteSpec),
    "eval": (eval_, EvalSpec),
    "ablate": (ablate, AblateSpec),
    "report": (report, ReportSpec),
}

# Stages run on demand when their artifact is missing.
PRODUCER_STAGES = ("synth", "ingest", "split", "prompts", "variants", "label")

app = typer.Typer(
    name="prompt-rewriter",
    help="Rewrite retrieval-augmented prompts for personalized text generation.",
    no_args_is_help=True,
    add_completion=False,
)

console = Console()
err_console = Console(stderr=True)


class CliState:
    """Global options shared by every subcommand of one invocation."""

    def __init__(
        self,
        config_path: Optional[Path] = None,
        overrides: Optional[Mapping[str, Any]] = None,
        generator_overrides: Optional[Mapping[str, Any]] = None,
    ):
        self.config_path = config_path
        self.overrides = dict(overrides or {})
        self.generator_overrides = dict(generator_overrides or {})
        self._config: Optional[Dict[str, Dict[str, str]]] = None

    @property
    def config(self) -> Dict[str, Dict[str, str]]:
        if self._config is None:
            self._config = load_config(str(self.config_path) if self.config_path else None)
        return self._config

    def params_for(self, command: str, flags: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
        _, spec_class = COMMANDS[command]
        merged = dict(self.overrides)
        merged.update(flags or {})
        return build_params(
            spec_class.spec(),
            self.config,
            command.replace("-", "_"),
            overrides=merged,
            generator_overrides=self.generator_overrides,
        )

    def producers(self) -> Dict[str, Any]:
        """Stage callables that run with config and global options only."""

        def make(stage):
            def produce():
                module, _ = COMMANDS[stage]
                return module.main(self.params_for(stage), producers=self.producers())

            return produce

        return {stage: make(stage) for stage in PRODUCER_STAGES}


def short_description(module) -> str:
    return yaml.safe_load(module.DOCUMENTATION).get("short_description", "")


def parse_module_flags(args: List[str], argument_spec: Mapping[str, Any]) -> Dict[str, Any]:
    """Turn ``--some-option value`` tokens into ``{"some_option": "value"}``.

    Boolean options take no value (``--lenient`` / ``--no-lenient``); list
    options take one comma separated value. Values stay strings and are coerced
    when the module validates its parameters.

    Raises:
        click.UsageError: On unknown options, missing values or stray arguments.
    """
    flags: Dict[str, Any] = {}
    tokens = list(args)
    while tokens:
        token = tokens.pop(0)
        if not token.startswith("--") or token == "--":
            raise click.UsageError(f"Got unexpected extra argument ({token})")
        name, has_value, inline = token[2:].partition("=")
        key = name.replace("-", "_")

        if key.startswith("no_") and key[3:] in argument_spec and not has_value:
            spec = argument_spec[key[3:]]
            if spec.get("type") == "bool" and key[3:] not in GLOBAL_KEYS:
                flags[key[3:]] = False
                continue

        if key not in argument_spec or key in GLOBAL_KEYS:
            raise click.UsageError(f"No such option: {token.split('=', 1)[0]}")

        if has_value:
            flags[key] = inline
        elif argument_spec[key].get("type") == "bool":
            flags[key] = True
        elif tokens and not tokens[0].startswith("--"):
            flags[key] = tokens.pop(0)
        else:
            raise click.UsageError(f"Option '--{name}' requires an argument.")
    return flags


def emit(result: Mapping[str, Any]) -> None:
    result = dict(result)
    table = result.pop("table", None)
    if table:
        console.print(table, markup=False, highlight=False, end="")
    console.print_json(json.dumps(result, default=str))


def run_command(command: str, ctx: typer.Context) -> int:
    state: CliState = ctx.obj
    module, spec_class = COMMANDS[command]
    flags = parse_module_flags(ctx.args, spec_class.spec())

    try:
        params = state.params_for(command, flags)
    except ConfigError as e:
        err_console.print(f"[red]Error:[/red] {e}")
        return EXIT_USAGE

    level = str(params.get("log_level") or "INFO").upper()
    configure_logging(level if level in LOG_LEVELS else "INFO")

    try:
        result = module.main(params, producers=state.producers())
    except ModuleUsageError as e:
        err_console.print(f"[red]Usage error:[/red] {e.message}", markup=True, highlight=False)
        err_console.print(ctx.get_usage(), markup=False, highlight=False)
        return EXIT_USAGE
    except ModuleFailure as e:
        err_console.print(f"[red]{command} failed:[/red] {e.message}", highlight=False)
        if e.result.get("exception"):
            LOG.debug(e.result["exception"])
        return EXIT_FAILURE

    emit(result)
    return EXIT_OK


def _register(command: str) -> None:
    module, _ = COMMANDS[command]

    def command_callback(ctx: typer.Context) -> int:
        return run_command(command, ctx)

    app.command(
        command,
        help=short_description(module),
        context_settings={"allow_extra_args": True, "ignore_unknown_options": True},
    )(command_callback)


@app.callback()
def main_callback(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", help="INI configuration file."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Global random seed."),
    workdir: Optional[Path] = typer.Option(None, "--workdir", help="Artifact directory."),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR."),
    backend: Optional[str] = typer.Option(None, "--backend", help="Generator backend: simulated or remote."),
    endpoint: Optional[str] = typer.Option(None, "--endpoint", help="Remote completion endpoint URL."),
    model: Optional[str] = typer.Option(None, "--model", help="Generator model name."),
    budget: Optional[int] = typer.Option(None, "--budget", help="Maximum backend calls per run."),
    max_inflight: Optional[int] = typer.Option(None, "--max-inflight", help="Concurrent backend calls."),
    cache_dir: Optional[Path] = typer.Option(None, "--cache-dir", help="On-disk response cache."),
):
    """Rewrite retrieval-augmented prompts for personalized text generation."""
    ctx.obj = CliState(
        config_path=config,
        overrides={
            "seed": seed,
            "workdir": str(workdir) if workdir else None,
            "log_level": log_level,
        },
        generator_overrides={
            "backend": backend,
            "endpoint": endpoint,
            "model": model,
            "budget": budget,
            "max_inflight": max_inflight,
            "cache_dir": str(cache_dir) if cache_dir else None,
        },
    )


@app.command("version")
def version_command() -> int:
    """Print the package version."""
    console.print(__version__)
    return EXIT_OK


for _command in COMMANDS:
    _register(_command)


def _click_error_classes() -> Tuple[Tuple[type, ...], Tuple[type, ...]]:
    """ClickException and Abort classes of click and of the click copy typer may vendor."""
    modules = [click.exceptions]
    try:
        modules.append(importlib.import_module("typer._click.exceptions"))
    except ImportError:
        pass
    errors = tuple(m.ClickException for m in modules if hasattr(m, "ClickException"))
    aborts = tuple(m.Abort for m in modules if hasattr(m, "Abort"))
    return errors, aborts


CLICK_ERRORS, CLICK_ABORTS = _click_error_classes()


def run(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        rv = app(args=argv, prog_name="prompt-rewriter", standalone_mode=False)
    except CLICK_ERRORS as e:
        e.show()
        return EXIT_USAGE
    except CLICK_ABORTS:
        return EXIT_USAGE
    return rv if isinstance(rv, int) else EXIT_OK


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
