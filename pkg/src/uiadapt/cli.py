"""Command-line entry points.

    uiadapt gen-clips            --per-domain 32 --seed 0 --out corpus.jsonl
    uiadapt serve                --port 8000 --data DIR [--config cfg.json]
    uiadapt simulate-participant --persona readability --seed 7 --data DIR
    uiadapt train-reward         --user U --domain courses --data DIR
    uiadapt train-agent          --user U --domain courses --beta 0.5 --steps 50000 --data DIR
    uiadapt eval                 --user U --domain courses --episodes 20 --data DIR
    uiadapt export               --out results.csv --data DIR

Every subcommand accepts --config pointing at a JSON file with the schema
documented in the README; explicit flags override config values.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .env import ClipPolicy, generate_clips, write_corpus
from .personas import PRESET_NAMES
from .service import ApiError, AppCore, ServiceConfig
from .ui import Domain


def _load_config(args: argparse.Namespace) -> ServiceConfig:
    cfg = ServiceConfig.load(args.config) if args.config else ServiceConfig()
    if getattr(args, "data", None):
        cfg = replace(cfg, data_dir=args.data)
    return cfg


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", help="data directory (default ./data or config value)")
    parser.add_argument("--config", help="path to a JSON config file")


def cmd_gen_clips(args: argparse.Namespace) -> int:
    policy = ClipPolicy(args.policy)
    clips = generate_clips(args.per_domain, policy, seed=args.seed)
    write_corpus(clips, args.out)
    print(f"wrote {len(clips)} clips ({args.per_domain} per domain) to {args.out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    cfg = _load_config(args)
    serve(cfg, host=args.host, port=args.port)
    return 0


def cmd_simulate_participant(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    core = AppCore(cfg)
    summary = core.simulate_participant(
        args.persona,
        seed=args.seed,
        beta=args.beta,
        steps=args.steps,
        questionnaires=not args.no_questionnaires,
    )
    text = json.dumps(summary, indent=2)
    if args.json_out:
        Path(args.json_out).write_text(text + "\n", encoding="utf-8")
    print(text)
    adaptive = summary["adaptive_mean_engagement"]
    na = summary["na_mean_engagement"]
    verdict = "exceeds" if adaptive > na else "does NOT exceed"
    print(f"adaptive mean engagement {adaptive:.4f} {verdict} non-adaptive baseline {na:.4f}")
    return 0


def cmd_train_reward(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    core = AppCore(cfg)
    info = core.train_reward_sync(args.user, Domain(args.domain))
    print(json.dumps(info, indent=2))
    return 0


def cmd_train_agent(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    core = AppCore(cfg)
    info = core.train_agent_sync(args.user, Domain(args.domain), beta=args.beta, steps=args.steps)
    print(json.dumps(info, indent=2))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    core = AppCore(cfg)
    info = core.evaluate_agent(args.user, args.domain, episodes=args.episodes, persona_name=args.persona)
    print(json.dumps(info, indent=2))
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    core = AppCore(cfg)
    text = core.export_csv()
    Path(args.out).write_text(text, encoding="utf-8")
    rows = max(0, len(text.strip().splitlines()) - 1)
    print(f"wrote {rows} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uiadapt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-clips", help="generate the offline clip corpus")
    p.add_argument("--per-domain", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="corpus.jsonl")
    p.add_argument("--policy", choices=[p.value for p in ClipPolicy], default=ClipPolicy.UNIFORM_RANDOM.value)
    p.set_defaults(func=cmd_gen_clips)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    _add_common(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("simulate-participant", help="drive the full loop with a synthetic persona")
    p.add_argument("--persona", required=True, help=f"preset name ({', '.join(PRESET_NAMES)}) or 'baseline'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", type=float, default=None, help="dual-reward mix (default from config)")
    p.add_argument("--steps", type=int, default=None, help="agent training steps (default from config)")
    p.add_argument("--json-out", help="also write the JSON summary to this path")
    p.add_argument("--no-questionnaires", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_simulate_participant)

    p = sub.add_parser("train-reward", help="train the reward model from a completed session")
    p.add_argument("--user", required=True)
    p.add_argument("--domain", choices=[d.value for d in Domain], required=True)
    _add_common(p)
    p.set_defaults(func=cmd_train_reward)

    p = sub.add_parser("train-agent", help="train the adaptation agent for a user")
    p.add_argument("--user", required=True)
    p.add_argument("--domain", choices=[d.value for d in Domain], required=True)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_train_agent)

    p = sub.add_parser("eval", help="evaluate a trained agent against a persona")
    p.add_argument("--user", required=True)
    p.add_argument("--domain", choices=[d.value for d in Domain], required=True)
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--persona", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export", help="export the long-format results CSV")
    p.add_argument("--out", default="results.csv")
    _add_common(p)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ApiError as exc:
        print(json.dumps({"code": exc.code, "message": exc.message}), file=sys.stderr)
        return 1
    except ValueError as exc:
        print(json.dumps({"code": "bad_request", "message": str(exc)}), file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"code": "io_error", "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
