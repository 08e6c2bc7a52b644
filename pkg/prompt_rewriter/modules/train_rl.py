# -*- coding: utf-8 -*-
# Apache License 2.0 (see LICENSE.md)
#
# Copyright (c) 2024 prompt-rewriter contributors
# All rights reserved.

"""
Pipeline module that fine-tunes the rewriter policy with PPO on generation reward.
"""

from pathlib import Path

from ansible.module_utils.common.text.converters import to_text

from prompt_rewriter.module_utils.api_spec.train_rl import TrainRlSpec
from prompt_rewriter.module_utils.authenticate import get_generator_client
from prompt_rewriter.module_utils.exceptions import MissingArtifactError
from prompt_rewriter.module_utils.policy import PolicyParams
from prompt_rewriter.module_utils.runner import ModuleFailure, PipelineModule
from prompt_rewriter.module_utils.serialize_response import serialize_response
from prompt_rewriter.module_utils.training import RlConfig, rl_train, write_training_log
from prompt_rewriter.module_utils.workspace import Workspace

DOCUMENTATION = r"""
---
module: train_rl

short_description: Fine-tune the rewriter policy with PPO on generation reward.

description:
    - Each batch rewrites uniformly sampled train tasks in sample mode, generates from the
      rewritten prompts and rewards smoothed sentence BLEU against the ground truth.
    - Advantages are rewards minus a moving-average baseline, whitened per batch; the update
      maximizes the clipped surrogate objective plus an entropy bonus.
    - C(init=sl) continues from the supervised policy and writes C(policy_slrl.json);
      C(zeros) and C(random) write C(policy_rl.json).
    - Validation reward is logged every C(eval_every) batches.

options:
    init:
        description: Starting policy.
        type: str
        choices: ['sl', 'zeros', 'random']
        default: sl
    init_scale:
        description: Standard deviation of the weights drawn for C(init=random).
        type: float
        default: 1.0
    policy_in:
        description: Supervised policy file for C(init=sl); defaults to the workdir one.
        type: path
    policy_out:
        description: Policy file to write.
        type: path
    clip_epsilon:
        description: Probability ratio clip range.
        type: float
        default: 0.2
    learning_rate:
        description: Gradient ascent step size.
        type: float
        default: 0.05
    ppo_epochs:
        description: Update passes per batch.
        type: int
        default: 4
    batch_episodes:
        description: Episodes per batch.
        type: int
        default: 32
    entropy_coef:
        description: Weight of the entropy bonus.
        type: float
        default: 0.01
    baseline_decay:
        description: Decay of the moving-average reward baseline.
        type: float
        default: 0.9
    max_episodes:
        description: Episode limit; zero returns the starting policy unchanged.
        type: int
        default: 3000
    eval_every:
        description: Batches between validation evaluations.
        type: int
        default: 10
    generator:
        description: Generator options, see the C([generator]) config section.
        type: dict
"""

EXAMPLES = r"""
prompt-rewriter train-rl
prompt-rewriter train-rl --init zeros --max-episodes 1000
"""

RETURN = r"""
policy:
    description: Path of the written policy.
    returned: always
    type: str
training_log:
    description: Path of the per-batch training log.
    returned: always
    type: str
batches:
    description: Number of batches run.
    returned: always
    type: int
last_mean_reward:
    description: Mean reward of the last batch.
    returned: when at least one batch ran
    type: float
generator_stats:
    description: Cache hits, misses and backend calls.
    returned: always
    type: dict
"""


def load_start_policy(module, workspace):
    """The policy training starts from, per C(init)."""
    p = module.params
    if p["init"] == "sl":
        path = Path(p["policy_in"]) if p["policy_in"] else workspace.policy("sl")
        if not path.is_file():
            raise MissingArtifactError(str(path))
        start = PolicyParams.load(path)
        return PolicyParams(start.theta, baseline=0.0, baseline_decay=p["baseline_decay"])
    if p["init"] == "random":
        return PolicyParams.random(p["seed"], p["init_scale"], baseline_decay=p["baseline_decay"])
    return PolicyParams.zeros(baseline_decay=p["baseline_decay"])


def main(params, producers=None):
    """
    Main execution path for the train_rl module.

    :return: Module result
    :rtype: dict
    """
    module = PipelineModule(argument_spec=TrainRlSpec.spec(), params=params)
    workspace = Workspace(module.params["workdir"], producers)

    try:
        p = module.params
        start = load_start_policy(module, workspace)

        cfg = RlConfig(
            clip_epsilon=p["clip_epsilon"],
            learning_rate=p["learning_rate"],
            ppo_epochs=p["ppo_epochs"],
            batch_episodes=p["batch_episodes"],
            entropy_coef=p["entropy_coef"],
            baseline_decay=p["baseline_decay"],
            max_episodes=p["max_episodes"],
            eval_every=p["eval_every"],
            seed=p["seed"],
        )

        generator = get_generator_client(module)
        train = workspace.load_prompts("train")
        validation = workspace.load_prompts("validation")
        trained, log = rl_train(start, train, generator, cfg, validation=validation)

        name = "slrl" if p["init"] == "sl" else "rl"
        output = Path(p["policy_out"]) if p["policy_out"] else workspace.policy(name)
        trained.save(output)
        log_path = workspace.training_log(name)
        write_training_log(log, log_path)

        result = dict(
            changed=True,
            policy=str(output),
            training_log=str(log_path),
            batches=len(log),
            generator_stats=serialize_response(generator.stats),
        )
        if log:
            result["last_mean_reward"] = log[-1].mean_reward
        return module.exit_json(**result)

    except ModuleFailure:
        raise
    except Exception as e:
        module.fail_json(msg=to_text(e), error_code=getattr(e, "error_code", None))
