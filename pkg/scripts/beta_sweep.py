"""Sweep the dual-reward mixing weight and report where the agent lands.

Trains a reward model on preferences from one persona while a different
persona provides the baseline engagement stream, then trains a Q agent at
each beta on the blended reward. The printed table shows the greedy terminal
configuration drifting from the baseline persona's optimum (beta 0) to the
preference model's optimum (beta 1).

    python3 scripts/beta_sweep.py --base readability --feedback aesthetics
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from uiadapt.env import ClipPolicy, EpisodeConfig, StartMode, generate_clips  # noqa: E402
from uiadapt.evaluate import q_policy_fn  # noqa: E402
from uiadapt.personas import (  # noqa: E402
    PRESET_NAMES,
    engagement,
    oracle_best,
    persona_reward_provider,
    preset_persona,
    simulated_comparator,
)
from uiadapt.preference import (  # noqa: E402
    DualRewardConfig,
    Mlp,
    TrainConfig,
    dual_reward_provider,
    encode_state,
    predict_step_reward,
    train,
)
from uiadapt.qlearn import QConfig, q_train  # noqa: E402
from uiadapt.ranking import new_session, run_to_completion  # noqa: E402
from uiadapt.ui import (  # noqa: E402
    ALL_CONFIGS,
    DEFAULT_CONFIG,
    Domain,
    apply_action,
    config_slug,
    default_context,
)


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--base", default="readability", choices=list(PRESET_NAMES))
    parser.add_argument("--feedback", default="aesthetics", choices=list(PRESET_NAMES))
    parser.add_argument("--domain", default="courses", choices=[d.value for d in Domain])
    parser.add_argument("--betas", type=float, nargs="+", default=[0.0, 0.25, 0.5, 0.75, 0.9, 1.0])
    parser.add_argument("--episodes", type=int, default=2500)
    parser.add_argument("--seed", type=int, default=0)
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    ctx = default_context()
    domain = Domain(args.domain)
    base = preset_persona(args.base)
    feedback = preset_persona(args.feedback)

    clips = [c for c in generate_clips(32, ClipPolicy.UNIFORM_RANDOM, seed=args.seed) if c.domain is domain]
    corpus = {c.id: c for c in clips}
    session = run_to_completion(
        new_session("sweep", domain, clips, args.seed),
        corpus,
        simulated_comparator(feedback, ctx),
    )
    model, _ = train(
        Mlp.init(seed=args.seed),
        session.training_pairs(closure=True),
        corpus,
        TrainConfig(epochs=150, val_fraction=0.0, seed=args.seed),
    )

    base_opt, _ = oracle_best(base, domain, ctx)
    hf_opt = max(ALL_CONFIGS, key=lambda c: predict_step_reward(model, encode_state(c, domain)))
    print(f"baseline persona optimum: {config_slug(base_opt)}")
    print(f"preference model optimum: {config_slug(hf_opt)}\n")
    print(f"{'beta':>5}  {'terminal config':<42} {'base engagement':>15}")

    base_rp = persona_reward_provider(base, domain)
    for beta in args.betas:
        rp = dual_reward_provider(
            base_rp, model, domain, DualRewardConfig(beta=beta), update_stats=False, warmup_ctx=ctx
        )
        table = q_train(
            [EpisodeConfig(domain=domain, start=StartMode.UNIFORM_RANDOM, seed=args.seed, context=ctx)],
            rp,
            QConfig(alpha=1.0, episodes=args.episodes, seed=args.seed),
        )
        policy = q_policy_fn(table)
        state = DEFAULT_CONFIG
        for _ in range(8):
            state = apply_action(state, policy(domain, state))
        marker = " <- baseline opt" if state == base_opt else (" <- model opt" if state == hf_opt else "")
        print(f"{beta:>5.2f}  {config_slug(state):<42} {engagement(base, state, domain, ctx):>15.3f}{marker}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
