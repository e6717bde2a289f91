"""HTTP + JSON service gluing the feedback loop together.

One process owns one data directory. Users register and get a study group;
each user runs at most one active ranking session per domain, answers arrive
one at a time and are appended to a per-session log before they are
acknowledged, so killing the process between any two requests and restarting
reproduces the exact session state by replay. Training runs as background
jobs (at most one live job per user); finished artifacts (reward model,
agent) are written atomically and picked up by the adapted-UI endpoint.

All errors are JSON objects {"code": ..., "message": ...}.
"""

from __future__ import annotations

import json
import threading
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from . import study
from .actor_critic import ACConfig, ac_from_json, ac_to_json, ac_train
from .env import (
    ClipPolicy,
    ClipSegment,
    EpisodeConfig,
    StartMode,
    clip_to_json,
    generate_clips,
    read_corpus,
    write_corpus,
)
from .evaluate import PolicyFn, ac_policy_fn, evaluate, noop_policy_fn, q_policy_fn
from .personas import (
    Persona,
    baseline_persona,
    engagement,
    oracle_best,
    persona_reward_provider,
    preset_persona,
    simulated_comparator,
)
from .preference import (
    DualRewardConfig,
    Mlp,
    TrainConfig,
    dual_reward_provider,
    model_from_json,
    model_to_json,
    train,
)
from .qlearn import QConfig, q_train, qtable_from_json, qtable_to_json
from .ranking import (
    PreferenceLabel,
    QueryMismatch,
    RankSession,
    SessionComplete,
    new_session,
    replay_session,
)
from .store import DataStore, append_jsonl, atomic_write_json, atomic_write_text, check_safe_id, read_json, read_jsonl
from .ui import (
    DEFAULT_CONFIG,
    AdaptationAction,
    ContextModel,
    Domain,
    UiConfig,
    action_to_json,
    apply_action,
    config_from_slug,
    config_to_json,
    default_context,
)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def stable_seed(*parts: Any) -> int:
    """Deterministic 31-bit seed from arbitrary string-able parts."""
    return zlib.crc32(":".join(str(p) for p in parts).encode("utf-8")) & 0x7FFFFFFF


@dataclass
class ServiceConfig:
    """Service defaults; see README for the config-file schema."""

    data_dir: str = "./data"
    seed: int = 0
    beta: float = 0.5
    horizon: int = 8
    clips_per_domain: int = 32
    agent_kind: str = "q"  # "q" | "ac"
    agent_steps: int = 50_000
    ac_workers: int = 1
    baseline_persona: str = "baseline"
    closure_pairs: bool = False
    eval_episodes: int = 5
    reward_train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self) -> None:
        if self.agent_kind not in ("q", "ac"):
            raise ValueError('agent_kind must be "q" or "ac"')
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "ServiceConfig":
        rt = obj.get("reward_train", {})
        agent = obj.get("agent", {})
        return cls(
            data_dir=str(obj.get("data_dir", "./data")),
            seed=int(obj.get("seed", 0)),
            beta=float(obj.get("beta", 0.5)),
            horizon=int(obj.get("horizon", 8)),
            clips_per_domain=int(obj.get("clips_per_domain", 32)),
            agent_kind=str(agent.get("kind", "q")),
            agent_steps=int(agent.get("steps", 50_000)),
            ac_workers=int(agent.get("workers", 1)),
            baseline_persona=str(obj.get("baseline_persona", "baseline")),
            closure_pairs=bool(obj.get("closure_pairs", False)),
            eval_episodes=int(obj.get("eval_episodes", 5)),
            reward_train=TrainConfig(
                learning_rate=float(rt.get("learning_rate", 1e-3)),
                epochs=int(rt.get("epochs", 200)),
                batch_size=int(rt.get("batch_size", 16)),
                l2=float(rt.get("l2", 1e-4)),
                val_fraction=float(rt.get("val_fraction", 0.1)),
                seed=int(rt.get("seed", 0)),
            ),
        )

    @classmethod
    def load(cls, path: str | Path) -> "ServiceConfig":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def resolve_persona(name: str) -> Persona:
    if name == "baseline":
        return baseline_persona()
    return preset_persona(name)


class _SessionRuntime:
    def __init__(self, session: RankSession, session_id: str, user_id: str) -> None:
        self.session = session
        self.session_id = session_id
        self.user_id = user_id
        self.lock = threading.Lock()


class AppCore:
    """All service behavior, independent of HTTP (the CLI drives it directly)."""

    def __init__(self, cfg: ServiceConfig) -> None:
        self.cfg = cfg
        self.store = DataStore(cfg.data_dir)
        self.ctx: ContextModel = default_context()
        self._lock = threading.Lock()
        self._sessions: dict[str, _SessionRuntime] = {}
        self._jobs: dict[str, dict[str, Any]] = {}
        self._threads: list[threading.Thread] = []
        self._corpus: dict[str, ClipSegment] = {}
        if self.store.corpus_path.exists():
            for clip in read_corpus(self.store.corpus_path):
                self._corpus[clip.id] = clip
        self._resume()

    # -- startup / recovery -------------------------------------------------

    def _resume(self) -> None:
        for meta in self.store.iter_session_metas():
            sid = meta["session_id"]
            entries = read_jsonl(self.store.session_log_path(sid))
            session = replay_session(
                participant=meta["user_id"],
                domain=Domain(meta["domain"]),
                clip_ids=meta["clip_ids"],
                seed=int(meta["seed"]),
                entries=entries,
            )
            self._sessions[sid] = _SessionRuntime(session, sid, meta["user_id"])
        for job in self.store.iter_jobs():
            if job.get("status") in ("queued", "running"):
                job = dict(job)
                job["status"] = "error"
                job["detail"] = "interrupted by restart"
                job["finished_at"] = time.time()
                atomic_write_json(self.store.job_path(job["job_id"]), job)
            self._jobs[job["job_id"]] = job

    def ensure_corpus(self, per_domain: Optional[int] = None, seed: Optional[int] = None) -> int:
        """Generate and persist the clip corpus if it does not exist yet."""
        if self._corpus:
            return len(self._corpus)
        clips = generate_clips(
            per_domain if per_domain is not None else self.cfg.clips_per_domain,
            ClipPolicy.UNIFORM_RANDOM,
            seed=self.cfg.seed if seed is None else seed,
        )
        write_corpus(clips, self.store.corpus_path)
        self._corpus = {c.id: c for c in clips}
        return len(clips)

    def domain_clips(self, domain: Domain) -> list[ClipSegment]:
        return [c for c in self._corpus.values() if c.domain is domain]

    def get_clip(self, clip_id: str) -> dict[str, Any]:
        """Serve one pre-generated clip so clients can render it locally."""
        clip = self._corpus.get(clip_id)
        if clip is None:
            raise ApiError(404, "unknown_clip", f"no such clip {clip_id!r}")
        return clip_to_json(clip)

    # -- users ---------------------------------------------------------------

    def create_user(self, user_id: str, demographic: Optional[Mapping[str, str]] = None) -> dict[str, Any]:
        try:
            check_safe_id(user_id, "user_id")
        except ValueError as exc:
            raise ApiError(400, "bad_request", str(exc)) from exc
        with self._lock:
            path = self.store.user_path(user_id)
            if path.exists():
                raise ApiError(409, "user_exists", f"user {user_id!r} already exists")
            n = sum(1 for _ in self.store.iter_users())
            record = {
                "user_id": user_id,
                "group": study.group_for_registration(n, self.cfg.seed),
                "demographic": dict(demographic) if demographic else None,
                "created_at": time.time(),
            }
            atomic_write_json(path, record)
            return record

    def get_user(self, user_id: str) -> dict[str, Any]:
        path = self.store.user_path(user_id)
        if not path.exists():
            raise ApiError(404, "unknown_user", f"no such user {user_id!r}")
        return read_json(path)

    # -- ranking sessions ------------------------------------------------------

    def _parse_domain(self, value: str) -> Domain:
        try:
            return Domain(value)
        except ValueError:
            raise ApiError(400, "bad_request", f"unknown domain {value!r}") from None

    def create_session(self, user_id: str, domain_str: str) -> dict[str, Any]:
        self.get_user(user_id)
        domain = self._parse_domain(domain_str)
        clips = self.domain_clips(domain)
        if len(clips) < 2:
            raise ApiError(409, "corpus_missing", "clip corpus missing; generate it first")
        with self._lock:
            prior = [
                rt for rt in self._sessions.values()
                if rt.user_id == user_id and rt.session.domain is domain
            ]
            if any(not rt.session.complete for rt in prior):
                raise ApiError(409, "session_active", f"user {user_id!r} already has an active {domain.value} session")
            k = len(prior)
            session_id = f"{user_id}--{domain.value}--{k:02d}"
            seed = stable_seed(self.cfg.seed, user_id, domain.value, k)
            session = new_session(user_id, domain, clips, seed)
            meta = {
                "session_id": session_id,
                "user_id": user_id,
                "domain": domain.value,
                "seed": seed,
                "clip_ids": [c.id for c in clips],
                "created_at": time.time(),
            }
            atomic_write_json(self.store.session_meta_path(session_id), meta)
            self._sessions[session_id] = _SessionRuntime(session, session_id, user_id)
            return {"session_id": session_id, "domain": domain.value, "total_clips": len(clips)}

    def _session_runtime(self, session_id: str) -> _SessionRuntime:
        rt = self._sessions.get(session_id)
        if rt is None:
            raise ApiError(404, "unknown_session", f"no such session {session_id!r}")
        return rt

    def session_next(self, session_id: str) -> dict[str, Any]:
        rt = self._session_runtime(session_id)
        with rt.lock:
            query = rt.session.next_query()
            if query is None:
                return {"complete": True, "query": None, "ranking": rt.session.ranking()}
            return {
                "complete": False,
                "query": {"query_id": query.query_id, "left": query.left, "right": query.right},
            }

    def session_answer(self, session_id: str, query_id: str, label_str: str) -> dict[str, Any]:
        rt = self._session_runtime(session_id)
        try:
            label = PreferenceLabel(label_str)
        except ValueError:
            raise ApiError(400, "bad_request", f"unknown label {label_str!r}") from None
        with rt.lock:
            t = time.time()
            try:
                rt.session.submit(query_id, label, t=t)
            except QueryMismatch as exc:
                raise ApiError(409, "query_mismatch", str(exc)) from exc
            except SessionComplete as exc:
                raise ApiError(410, "session_complete", str(exc)) from exc
            entry = rt.session.log[-1]
            append_jsonl(
                self.store.session_log_path(session_id),
                {
                    "query_id": entry.query.query_id,
                    "left": entry.query.left,
                    "right": entry.query.right,
                    "label": entry.label.value,
                    "t": entry.t,
                },
            )
            progress = rt.session.progress()
            return {
                "accepted": True,
                "complete": rt.session.complete,
                "progress": {
                    "placed": progress.placed,
                    "total": progress.total,
                    "answered": progress.answered,
                },
            }

    def session_progress(self, session_id: str) -> dict[str, Any]:
        rt = self._session_runtime(session_id)
        with rt.lock:
            progress = rt.session.progress()
            return {
                "placed": progress.placed,
                "total": progress.total,
                "answered": progress.answered,
                "complete": rt.session.complete,
            }

    def latest_complete_session(self, user_id: str, domain: Domain) -> Optional[RankSession]:
        candidates = sorted(
            (
                rt for rt in self._sessions.values()
                if rt.user_id == user_id and rt.session.domain is domain and rt.session.complete
            ),
            key=lambda rt: rt.session_id,
        )
        return candidates[-1].session if candidates else None

    # -- training jobs -----------------------------------------------------------

    def _baseline(self) -> Persona:
        return resolve_persona(self.cfg.baseline_persona)

    def train_reward_sync(self, user_id: str, domain: Domain) -> dict[str, Any]:
        self.get_user(user_id)
        session = self.latest_complete_session(user_id, domain)
        if session is None:
            raise ApiError(409, "session_incomplete", f"no completed {domain.value} session for {user_id!r}")
        pairs = session.training_pairs(closure=self.cfg.closure_pairs)
        if not pairs:
            raise ApiError(409, "no_pairs", "session produced no usable preference pairs")
        model = Mlp.init(seed=stable_seed(self.cfg.seed, "reward", user_id, domain.value))
        cfg = self.cfg.reward_train
        trained, curve = train(model, pairs, self._corpus, cfg)
        atomic_write_text(
            self.store.model_path(user_id, domain.value),
            json.dumps(model_to_json(trained)),
        )
        atomic_write_text(self.store.loss_curve_path(user_id, domain.value), curve.to_csv())
        return {
            "domain": domain.value,
            "pairs": len(pairs),
            "final_train_loss": curve.train[-1],
            "final_val_loss": curve.val[-1],
        }

    def load_reward_model(self, user_id: str, domain: Domain) -> Mlp:
        path = self.store.model_path(user_id, domain.value)
        if not path.exists():
            raise ApiError(409, "no_model", f"reward model not trained for {user_id!r}/{domain.value}")
        return model_from_json(read_json(path))

    def train_agent_sync(
        self,
        user_id: str,
        domain: Domain,
        beta: Optional[float] = None,
        steps: Optional[int] = None,
    ) -> dict[str, Any]:
        self.get_user(user_id)
        beta_v = self.cfg.beta if beta is None else float(beta)
        if not 0.0 <= beta_v <= 1.0:
            raise ApiError(400, "bad_request", "beta must lie in [0, 1]")
        try:
            model = self.load_reward_model(user_id, domain)
        except ApiError:
            if beta_v != 0.0:
                raise
            # At beta = 0 the learned stream has zero weight, so training can
            # proceed on the baseline alone.
            model = Mlp.zeros()
        steps_v = self.cfg.agent_steps if steps is None else int(steps)
        if steps_v < 1:
            raise ApiError(400, "bad_request", "steps must be >= 1")
        base_rp = persona_reward_provider(self._baseline(), domain)
        # Warm the per-source standardization over the config population and
        # freeze it, so the agent trains against a stationary reward instead
        # of chasing a normalizer that drifts with the visit distribution.
        rp = dual_reward_provider(
            base_rp, model, domain, DualRewardConfig(beta=beta_v), update_stats=False, warmup_ctx=self.ctx
        )
        seed = stable_seed(self.cfg.seed, "agent", user_id, domain.value)
        path = self.store.agent_path(user_id, domain.value)
        if self.cfg.agent_kind == "q":
            episodes = max(1, steps_v // self.cfg.horizon)
            # The dual reward is deterministic, so alpha = 1.0 makes the TD
            # update asynchronous value iteration (fastest convergence).
            table = q_train(
                [EpisodeConfig(domain=domain, horizon=self.cfg.horizon, start=StartMode.UNIFORM_RANDOM, seed=seed, context=self.ctx)],
                rp,
                QConfig(alpha=1.0, episodes=episodes, seed=seed),
            )
            atomic_write_text(path, json.dumps(qtable_to_json(table)))
        else:
            # One-hot inputs and a deterministic reward take a much larger
            # learning rate than the conservative default.
            ac_cfg = ACConfig(workers=self.cfg.ac_workers, learning_rate=1e-2, total_steps=steps_v, seed=seed)
            net = ac_train(
                lambda i: EpisodeConfig(
                    domain=domain,
                    horizon=self.cfg.horizon,
                    start=StartMode.UNIFORM_RANDOM,
                    seed=stable_seed(seed, "worker", i),
                    context=self.ctx,
                ),
                rp,
                ac_cfg,
            )
            atomic_write_text(path, json.dumps(ac_to_json(net)))
        return {"domain": domain.value, "kind": self.cfg.agent_kind, "beta": beta_v, "steps": steps_v}

    def _domains_for_training(
        self, user_id: str, kind: str, domain: Optional[str], beta: Optional[float] = None
    ) -> list[Domain]:
        if domain is not None:
            return [self._parse_domain(domain)]
        if kind == "reward":
            out = [d for d in Domain if self.latest_complete_session(user_id, d) is not None]
            if not out:
                raise ApiError(409, "session_incomplete", f"no completed sessions for {user_id!r}")
        else:
            beta_v = self.cfg.beta if beta is None else float(beta)
            if beta_v == 0.0:
                return list(Domain)
            out = [d for d in Domain if self.store.model_path(user_id, d.value).exists()]
            if not out:
                raise ApiError(409, "no_model", f"no reward models trained for {user_id!r}")
        return out

    def enqueue_training(
        self,
        user_id: str,
        kind: str,
        beta: Optional[float] = None,
        steps: Optional[int] = None,
        domain: Optional[str] = None,
    ) -> dict[str, Any]:
        if kind not in ("reward", "agent"):
            raise ApiError(400, "bad_request", f"unknown training kind {kind!r}")
        self.get_user(user_id)
        domains = self._domains_for_training(user_id, kind, domain, beta)
        with self._lock:
            for job in self._jobs.values():
                if job["user_id"] == user_id and job["status"] in ("queued", "running"):
                    raise ApiError(409, "job_running", f"user {user_id!r} already has job {job['job_id']} {job['status']}")
            job_id = f"job-{len(self._jobs):05d}"
            job = {
                "job_id": job_id,
                "user_id": user_id,
                "kind": kind,
                "params": {"beta": beta, "steps": steps, "domains": [d.value for d in domains]},
                "status": "queued",
                "created_at": time.time(),
                "started_at": None,
                "finished_at": None,
                "detail": None,
            }
            self._jobs[job_id] = job
            atomic_write_json(self.store.job_path(job_id), job)
        thread = threading.Thread(target=self._run_job, args=(job_id, domains, beta, steps), daemon=True)
        self._threads.append(thread)
        thread.start()
        return {"job_id": job_id, "status": "queued"}

    def _update_job(self, job_id: str, **fields: Any) -> None:
        with self._lock:
            job = self._jobs[job_id]
            job.update(fields)
            atomic_write_json(self.store.job_path(job_id), job)

    def _run_job(self, job_id: str, domains: list[Domain], beta: Optional[float], steps: Optional[int]) -> None:
        self._update_job(job_id, status="running", started_at=time.time())
        kind = self._jobs[job_id]["kind"]
        try:
            results = []
            for domain in domains:
                if kind == "reward":
                    results.append(self.train_reward_sync(self._jobs[job_id]["user_id"], domain))
                else:
                    results.append(self.train_agent_sync(self._jobs[job_id]["user_id"], domain, beta, steps))
            self._update_job(job_id, status="done", finished_at=time.time(), detail=results)
        except ApiError as exc:
            self._update_job(job_id, status="error", finished_at=time.time(), detail=f"{exc.code}: {exc.message}")
        except Exception as exc:  # noqa: BLE001 - job boundary
            self._update_job(job_id, status="error", finished_at=time.time(), detail=repr(exc))

    def get_job(self, job_id: str) -> dict[str, Any]:
        job = self._jobs.get(job_id)
        if job is None:
            raise ApiError(404, "unknown_job", f"no such job {job_id!r}")
        return dict(job)

    def wait_for_job(self, job_id: str, timeout: float = 600.0, poll: float = 0.05) -> dict[str, Any]:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            job = self.get_job(job_id)
            if job["status"] in ("done", "error"):
                return job
            time.sleep(poll)
        raise TimeoutError(f"job {job_id} did not finish within {timeout}s")

    # -- adapted UI ----------------------------------------------------------------

    def load_agent_policy(self, user_id: str, domain: Domain) -> PolicyFn:
        path = self.store.agent_path(user_id, domain.value)
        if not path.exists():
            raise ApiError(409, "no_agent", f"agent not trained for {user_id!r}/{domain.value}")
        obj = read_json(path)
        if obj.get("kind") == "q":
            return q_policy_fn(qtable_from_json(obj))
        if obj.get("kind") == "ac":
            return ac_policy_fn(ac_from_json(obj))
        raise ApiError(500, "bad_agent_file", f"unrecognized agent kind {obj.get('kind')!r}")

    def adapted_ui(self, user_id: str, domain_str: str, technique: str, state_slug: str) -> dict[str, Any]:
        self.get_user(user_id)
        domain = self._parse_domain(domain_str)
        try:
            state = config_from_slug(state_slug)
        except ValueError as exc:
            raise ApiError(400, "bad_request", str(exc)) from exc
        if technique == study.Technique.NA.value:
            # The non-adaptive technique pins the factory default.
            return {
                "action": action_to_json(AdaptationAction.noop()),
                "next_config": config_to_json(DEFAULT_CONFIG),
            }
        if technique != study.Technique.ADAPTIVE.value:
            raise ApiError(400, "bad_request", f"unknown technique {technique!r}")
        policy = self.load_agent_policy(user_id, domain)
        action = policy(domain, state)
        next_config = apply_action(state, action)
        if next_config == state:
            # Idempotent assignments are reported as no-ops.
            action = AdaptationAction.noop()
        return {"action": action_to_json(action), "next_config": config_to_json(next_config)}

    # -- questionnaires ---------------------------------------------------------------

    def post_questionnaire(self, user_id: str, period: int, payload: Mapping[str, Any]) -> dict[str, Any]:
        self.get_user(user_id)
        if period not in (1, 2):
            raise ApiError(400, "bad_request", "period must be 1 or 2")
        kind = str(payload.get("kind", "")).lower()
        items = payload.get("items")
        if not isinstance(items, list) or not all(isinstance(v, int) for v in items):
            raise ApiError(400, "bad_request", "items must be a list of integers")
        try:
            if kind == "quis":
                score = study.quis_score(study.QuisResponse(items=tuple(items)))
                entry: dict[str, Any] = {"items": items, "score": score}
            elif kind == "ues":
                kwargs: dict[str, Any] = {"items": tuple(items)}
                if payload.get("dimensions") is not None:
                    kwargs["dimensions"] = tuple(payload["dimensions"])
                if payload.get("reverse_coded") is not None:
                    kwargs["reverse_coded"] = tuple(bool(b) for b in payload["reverse_coded"])
                overall, by_dim = study.ues_score(study.UesResponse(**kwargs))
                score = overall
                entry = {"items": items, "score": overall, "dimensions": by_dim}
            else:
                raise ApiError(400, "bad_request", f"kind must be quis or ues, got {kind!r}")
        except ValueError as exc:
            raise ApiError(400, "bad_request", str(exc)) from exc
        with self._lock:
            path = self.store.questionnaire_path(user_id)
            record = read_json(path) if path.exists() else {}
            record.setdefault(str(period), {})[kind] = entry
            atomic_write_json(path, record)
        return {"user_id": user_id, "period": period, "kind": kind, "score": score}

    # -- export --------------------------------------------------------------------

    def export_csv(self) -> str:
        records: list[study.PeriodResult] = []
        for user in self.store.iter_users():
            qpath = self.store.questionnaire_path(user["user_id"])
            if not qpath.exists():
                continue
            responses = read_json(qpath)
            plan = study.plan_for_group(int(user["group"]))
            for period, period_plan in ((1, plan.period1), (2, plan.period2)):
                data = responses.get(str(period), {})
                if "quis" not in data or "ues" not in data:
                    raise ApiError(
                        409,
                        "incomplete_results",
                        f"user {user['user_id']!r} is missing responses for period {period}",
                    )
                records.append(
                    study.PeriodResult(
                        participant=user["user_id"],
                        group=int(user["group"]),
                        period=period,
                        technique=period_plan.technique,
                        domain=period_plan.domain,
                        satisfaction=float(data["quis"]["score"]),
                        engagement=float(data["ues"]["score"]),
                    )
                )
        if not records:
            raise ApiError(409, "incomplete_results", "no questionnaire responses recorded")
        try:
            return study.export_results(records)
        except ValueError as exc:
            raise ApiError(409, "incomplete_results", str(exc)) from exc

    # -- simulated participants ---------------------------------------------------------

    def mean_step_engagement(self, policy: PolicyFn, persona: Persona, domain: Domain) -> float:
        """Mean noiseless engagement of the post-action states along one
        deterministic greedy episode from the factory default."""
        state = DEFAULT_CONFIG
        values = []
        for _ in range(self.cfg.horizon):
            state = apply_action(state, policy(domain, state))
            values.append(engagement(persona, state, domain, self.ctx))
        return float(sum(values) / len(values))

    def simulate_participant(
        self,
        persona_name: str,
        seed: int = 0,
        beta: Optional[float] = None,
        steps: Optional[int] = None,
        questionnaires: bool = True,
    ) -> dict[str, Any]:
        """Drive the whole loop headlessly: register, rank every domain's clips
        with the persona as the judge, train the reward model and agent, then
        score adaptive vs non-adaptive engagement."""
        persona = resolve_persona(persona_name)
        self.ensure_corpus()
        user_id = f"sim-{persona_name}-{seed}"
        user = self.create_user(user_id, demographic={"persona": persona_name})
        comparator = simulated_comparator(persona, self.ctx)
        summary: dict[str, Any] = {
            "user_id": user_id,
            "persona": persona_name,
            "group": user["group"],
            "beta": self.cfg.beta if beta is None else beta,
            "steps": self.cfg.agent_steps if steps is None else steps,
            "domains": {},
        }
        for domain in Domain:
            created = self.create_session(user_id, domain.value)
            sid = created["session_id"]
            answered = 0
            while True:
                nxt = self.session_next(sid)
                if nxt["complete"]:
                    break
                query = nxt["query"]
                label = comparator(self._corpus[query["left"]], self._corpus[query["right"]])
                self.session_answer(sid, query["query_id"], label.value)
                answered += 1
            reward_info = self.train_reward_sync(user_id, domain)
            agent_info = self.train_agent_sync(user_id, domain, beta=beta, steps=steps)
            adaptive = self.mean_step_engagement(self.load_agent_policy(user_id, domain), persona, domain)
            na = self.mean_step_engagement(noop_policy_fn(), persona, domain)
            best_config, best_value = oracle_best(persona, domain, self.ctx)
            summary["domains"][domain.value] = {
                "session_id": sid,
                "queries_answered": answered,
                "reward": reward_info,
                "agent": agent_info,
                "adaptive_mean_engagement": adaptive,
                "na_mean_engagement": na,
                "oracle_engagement": best_value,
            }
        per_domain = summary["domains"].values()
        summary["adaptive_mean_engagement"] = float(
            sum(d["adaptive_mean_engagement"] for d in per_domain) / len(summary["domains"])
        )
        summary["na_mean_engagement"] = float(
            sum(d["na_mean_engagement"] for d in per_domain) / len(summary["domains"])
        )
        if questionnaires:
            self._post_simulated_questionnaires(user_id, user["group"], persona, seed)
        return summary

    def _post_simulated_questionnaires(self, user_id: str, group: int, persona: Persona, seed: int) -> None:
        """Turn measured engagement into plausible questionnaire responses."""
        rng = np.random.default_rng(stable_seed(seed, "questionnaire", user_id))
        plan = study.plan_for_group(group)
        for period, period_plan in ((1, plan.period1), (2, plan.period2)):
            if period_plan.technique is study.Technique.ADAPTIVE:
                policy = self.load_agent_policy(user_id, period_plan.domain)
            else:
                policy = noop_policy_fn()
            level = self.mean_step_engagement(policy, persona, period_plan.domain)
            quis_items = [
                int(np.clip(round(1 + 9 * level + rng.normal(0, 0.6)), 1, 10))
                for _ in range(study.QUIS_DEFAULT_ITEMS)
            ]
            ues_items = [
                int(np.clip(round(1 + 4 * level + rng.normal(0, 0.4)), 1, 5))
                for _ in range(study.UES_ITEMS)
            ]
            self.post_questionnaire(user_id, period, {"kind": "quis", "items": quis_items})
            self.post_questionnaire(user_id, period, {"kind": "ues", "items": ues_items})

    def evaluate_agent(
        self,
        user_id: str,
        domain_str: str,
        episodes: int = 20,
        persona_name: Optional[str] = None,
    ) -> dict[str, Any]:
        """Greedy-agent metrics against a persona's engagement (simulated runs)."""
        domain = self._parse_domain(domain_str)
        persona = resolve_persona(persona_name if persona_name is not None else self.cfg.baseline_persona)
        policy = self.load_agent_policy(user_id, domain)
        rp = persona_reward_provider(persona, domain)
        target, oracle_value = oracle_best(persona, domain, self.ctx)
        metrics = evaluate(
            policy,
            EpisodeConfig(domain=domain, horizon=self.cfg.horizon, start=StartMode.UNIFORM_RANDOM, context=self.ctx),
            rp,
            target,
            n_episodes=episodes,
            seed=stable_seed(self.cfg.seed, "eval", user_id, domain.value),
        )
        return {
            "user_id": user_id,
            "domain": domain.value,
            "persona": persona.id,
            "episodes": episodes,
            "mean_return": metrics.mean_return,
            "mean_steps_to_optimal": metrics.mean_steps_to_optimal,
            "final_config_match_rate": metrics.final_config_match_rate,
            "adaptive_mean_engagement": self.mean_step_engagement(policy, persona, domain),
            "na_mean_engagement": self.mean_step_engagement(noop_policy_fn(), persona, domain),
            "oracle_engagement": oracle_value,
        }


# --- FastAPI wiring ------------------------------------------------------------

# Request bodies live at module level so that FastAPI can resolve the
# (string) annotations of the endpoint functions against module globals.
from pydantic import BaseModel  # noqa: E402


class CreateUserBody(BaseModel):
    user_id: str
    demographic: Optional[dict[str, str]] = None


class AnswerBody(BaseModel):
    query_id: str
    label: str


class TrainBody(BaseModel):
    beta: Optional[float] = None
    steps: Optional[int] = None
    domain: Optional[str] = None


class QuestionnaireBody(BaseModel):
    kind: str
    items: list[int]
    dimensions: Optional[list[str]] = None
    reverse_coded: Optional[list[bool]] = None


def build_app(core: AppCore):
    from fastapi import FastAPI, Request
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse, PlainTextResponse

    app = FastAPI(title="uiadapt service", version="0.1.0")

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"code": "bad_request", "message": str(exc.errors())})

    @app.get("/health")
    def health():
        return {"status": "ok", "clips": len(core._corpus)}

    @app.get("/clips/{clip_id}")
    def get_clip(clip_id: str):
        return core.get_clip(clip_id)

    @app.post("/users", status_code=201)
    def create_user(body: CreateUserBody):
        return core.create_user(body.user_id, body.demographic)

    @app.post("/users/{user_id}/sessions", status_code=201)
    def create_session(user_id: str, domain: str):
        return core.create_session(user_id, domain)

    @app.get("/sessions/{session_id}/next")
    def session_next(session_id: str):
        return core.session_next(session_id)

    @app.post("/sessions/{session_id}/answers")
    def session_answer(session_id: str, body: AnswerBody):
        return core.session_answer(session_id, body.query_id, body.label)

    @app.get("/sessions/{session_id}/progress")
    def session_progress(session_id: str):
        return core.session_progress(session_id)

    @app.post("/users/{user_id}/train/{kind}", status_code=202)
    def train(user_id: str, kind: str, body: Optional[TrainBody] = None):
        body = body or TrainBody()
        return core.enqueue_training(user_id, kind, beta=body.beta, steps=body.steps, domain=body.domain)

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        return core.get_job(job_id)

    @app.get("/users/{user_id}/ui")
    def adapted_ui(user_id: str, domain: str, technique: str, state: str):
        return core.adapted_ui(user_id, domain, technique, state)

    @app.post("/users/{user_id}/questionnaires/{period}")
    def questionnaire(user_id: str, period: int, body: QuestionnaireBody):
        return core.post_questionnaire(user_id, period, body.model_dump())

    @app.get("/export/results.csv")
    def export_csv():
        return PlainTextResponse(core.export_csv(), media_type="text/csv")

    return app


def serve(cfg: ServiceConfig, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    core = AppCore(cfg)
    uvicorn.run(build_app(core), host=host, port=port, log_level="warning")
