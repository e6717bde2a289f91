"""Q-learning, actor-critic, UCT planning, and policy evaluation."""

import numpy as np
import pytest

from uiadapt import nn
from uiadapt.actor_critic import (
    ACBatch,
    ACConfig,
    ACModel,
    ActMode,
    ac_act,
    ac_from_json,
    ac_grad_check,
    ac_to_json,
    ac_train,
    load_ac,
    save_ac,
)
from uiadapt.env import AdaptEnv, EpisodeConfig, StartMode
from uiadapt.evaluate import (
    evaluate,
    metrics_to_csv,
    noop_policy_fn,
    oracle_policy_fn,
    q_policy_fn,
)
from uiadapt.mcts import MctsConfig, mcts_plan
from uiadapt.personas import oracle_best, persona_reward_provider, preset_persona
from uiadapt.qlearn import (
    QConfig,
    QTable,
    epsilon_at,
    load_qtable,
    q_policy,
    q_train,
    qtable_from_json,
    qtable_to_json,
    save_qtable,
)
from uiadapt.ui import (
    ACTIONS,
    ALL_CONFIGS,
    AdaptationAction,
    Attribute,
    Domain,
    Theme,
    Widget,
    apply_action,
    config_index,
    default_context,
    domain_index,
    encode_state,
)

CTX = default_context()


def zero_ac_model():
    m = ACModel.init(seed=0)
    m.set_flat_params(np.zeros(m.flat_params().size))
    return m


class TestQConfig:
    def test_valid_ranges(self):
        QConfig(alpha=1.0, gamma=0.0, episodes=0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"alpha": 0.0},
            {"alpha": 1.5},
            {"gamma": 1.0},
            {"gamma": -0.1},
            {"episodes": -1},
            {"epsilon_decay_steps": 0},
        ],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            QConfig(**kwargs)

    def test_epsilon_schedule(self):
        cfg = QConfig()
        assert epsilon_at(0, cfg) == 1.0
        assert epsilon_at(10_000, cfg) == pytest.approx(0.525)
        assert epsilon_at(20_000, cfg) == pytest.approx(0.05)
        assert epsilon_at(999_999, cfg) == pytest.approx(0.05)


class TestQTrain:
    def test_zero_episodes_leave_table_untouched(self):
        table = q_train(
            [EpisodeConfig(Domain.COURSES)], lambda s, a, c: 1.0, QConfig(episodes=0)
        )
        assert np.all(table.values == 0.0)
        assert np.all(table.visits == 0)

    def test_single_step_gamma_zero_update(self):
        cfg = QConfig(alpha=0.1, gamma=0.0, episodes=1, seed=0)
        table = q_train(
            [EpisodeConfig(Domain.COURSES, horizon=1)], lambda s, a, c: 1.0, cfg
        )
        nonzero = table.values[table.values != 0.0]
        assert nonzero.shape == (1,)
        assert nonzero[0] == pytest.approx(0.1)
        assert table.visits.sum() == 1

    def test_deterministic_per_seed(self):
        cfg = QConfig(episodes=50, seed=7)
        rp = persona_reward_provider(preset_persona("readability"), Domain.COURSES)
        ec = [EpisodeConfig(Domain.COURSES, start=StartMode.UNIFORM_RANDOM, seed=3)]
        a = q_train(ec, rp, cfg)
        b = q_train(ec, rp, cfg)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.visits, b.visits)

    def test_bound_holds_after_training(self):
        cfg = QConfig(alpha=1.0, gamma=0.95, episodes=500, seed=1)
        rp = persona_reward_provider(preset_persona("aesthetics"), Domain.COURSES)
        table = q_train(
            [EpisodeConfig(Domain.COURSES, start=StartMode.UNIFORM_RANDOM, seed=2)], rp, cfg
        )
        # Engagement rewards live in [0, 1], so values stay under 1/(1-gamma).
        assert float(np.max(np.abs(table.values))) <= 1.0 / (1.0 - cfg.gamma) + 1e-9

    def test_converges_to_oracle_on_noiseless_persona(self):
        persona = preset_persona("readability")
        domain = Domain.COURSES
        rp = persona_reward_provider(persona, domain)
        cfg = QConfig(alpha=1.0, episodes=2500, seed=0)
        table = q_train(
            [EpisodeConfig(domain, start=StartMode.UNIFORM_RANDOM, seed=11)], rp, cfg
        )
        target, _ = oracle_best(persona, domain, CTX)
        reached = 0
        for start in ALL_CONFIGS:
            state = start
            for _ in range(5):
                if state == target:
                    break
                state = apply_action(state, q_policy(table, domain, state))
            reached += state == target
        assert reached >= 0.95 * len(ALL_CONFIGS)


class TestQPolicy:
    def test_all_zero_table_picks_first_action(self):
        assert q_policy(QTable.zeros(), Domain.COURSES, ALL_CONFIGS[0]) == ACTIONS[0]
        assert q_policy(QTable.zeros(), Domain.COURSES, ALL_CONFIGS[0]).is_noop

    def test_unique_max_selected(self):
        table = QTable.zeros()
        d = domain_index(Domain.TRIPS)
        s = config_index(ALL_CONFIGS[33])
        table.values[d, s, 7] = 1.0
        assert q_policy(table, Domain.TRIPS, ALL_CONFIGS[33]) == ACTIONS[7]

    def test_positive_scaling_preserves_argmax(self):
        rng = np.random.default_rng(0)
        table = QTable.zeros()
        table.values[:] = rng.normal(size=table.values.shape)
        before = [q_policy(table, Domain.COURSES, c) for c in ALL_CONFIGS[:30]]
        table.values *= 2.0
        after = [q_policy(table, Domain.COURSES, c) for c in ALL_CONFIGS[:30]]
        assert before == after


class TestQTablePersistence:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        table = QTable.zeros()
        table.values[:] = rng.normal(size=table.values.shape)
        table.visits[:] = rng.integers(0, 50, size=table.visits.shape)
        path = tmp_path / "agent.json"
        save_qtable(table, path)
        loaded = load_qtable(path)
        assert np.array_equal(loaded.values, table.values)
        assert np.array_equal(loaded.visits, table.visits)

    def test_bad_shape_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            QTable(values=np.zeros((2, 120, 14)), visits=np.zeros((2, 120, 14), dtype=np.int64))

    def test_unknown_version_rejected(self):
        obj = qtable_to_json(QTable.zeros())
        obj["version"] = 99
        with pytest.raises(ValueError):
            qtable_from_json(obj)


class TestACConfig:
    def test_zero_total_steps_allowed(self):
        ACConfig(total_steps=0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"workers": 0},
            {"n_step": 0},
            {"total_steps": -1},
            {"entropy_coef": -0.1},
            {"learning_rate": 0.0},
        ],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ACConfig(**kwargs)


class TestACTrain:
    def test_zero_steps_leave_model_unchanged(self):
        cfg = ACConfig(workers=1, total_steps=0, seed=3)
        model = ac_train(
            lambda i: EpisodeConfig(Domain.COURSES, seed=i), lambda s, a, c: 1.0, cfg
        )
        assert np.array_equal(model.flat_params(), ACModel.init(seed=3).flat_params())

    def test_single_worker_bit_deterministic(self):
        rp = persona_reward_provider(preset_persona("readability"), Domain.COURSES)
        cfg = ACConfig(workers=1, total_steps=400, seed=9)
        factory = lambda i: EpisodeConfig(
            Domain.COURSES, start=StartMode.UNIFORM_RANDOM, seed=100 + i
        )
        a = ac_train(factory, rp, cfg)
        b = ac_train(factory, rp, cfg)
        assert np.array_equal(a.flat_params(), b.flat_params())

    def test_learns_noiseless_persona(self):
        persona = preset_persona("readability")
        domain = Domain.COURSES
        rp = persona_reward_provider(persona, domain)
        cfg = ACConfig(workers=1, learning_rate=1e-2, total_steps=100_000, seed=0)
        model = ac_train(
            lambda i: EpisodeConfig(domain, start=StartMode.UNIFORM_RANDOM, seed=500 + i),
            rp,
            cfg,
        )
        target, best_val = oracle_best(persona, domain, CTX)
        # Greedy rollout from the default start should collect nearly the
        # ideal return (horizon x max engagement).
        env = AdaptEnv(EpisodeConfig(domain, start=StartMode.FIXED_DEFAULT, seed=77), rp)
        state = env.reset()
        total = 0.0
        done = False
        while not done:
            action = ac_act(model, encode_state(state, domain), ActMode.GREEDY)
            outcome = env.step(action)
            total += outcome.reward
            state = outcome.next_state
            done = outcome.done
        assert total >= 0.95 * 8 * best_val
        # And the greedy walk reaches the brute-force optimum from almost
        # every start configuration.
        reached = 0
        for start in ALL_CONFIGS:
            state = start
            for _ in range(8):
                if state == target:
                    break
                state = apply_action(
                    state, ac_act(model, encode_state(state, domain), ActMode.GREEDY)
                )
            reached += state == target
        assert reached >= 0.95 * len(ALL_CONFIGS)


class TestACAct:
    def test_uniform_logits_tie_break_to_first(self):
        m = zero_ac_model()
        x = encode_state(ALL_CONFIGS[50], Domain.COURSES)
        assert ac_act(m, x, ActMode.GREEDY) == ACTIONS[0]

    def test_unique_max_logit(self):
        m = zero_ac_model()
        m.b_pi[12] = 1.0
        x = encode_state(ALL_CONFIGS[50], Domain.COURSES)
        assert ac_act(m, x, ActMode.GREEDY) == ACTIONS[12]

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            ac_act(ACModel.init(seed=0), np.zeros(4))

    def test_sample_requires_rng(self):
        x = encode_state(ALL_CONFIGS[0], Domain.COURSES)
        with pytest.raises(ValueError, match="rng"):
            ac_act(ACModel.init(seed=0), x, ActMode.SAMPLE)

    def test_sample_frequencies_match_softmax(self):
        m = zero_ac_model()
        rng_logits = np.random.default_rng(3)
        m.b_pi[:] = rng_logits.normal(scale=1.0, size=m.b_pi.shape)
        x = encode_state(ALL_CONFIGS[0], Domain.COURSES)
        logits, _ = m.forward(x[None, :])
        probs = nn.softmax(logits)[0]
        rng = np.random.default_rng(12345)
        counts = np.zeros(len(ACTIONS))
        n = 100_000
        for _ in range(n):
            action = ac_act(m, x, ActMode.SAMPLE, rng=rng)
            counts[ACTIONS.index(action)] += 1
        np.testing.assert_allclose(counts / n, probs, atol=0.01)

    def test_softmax_normalized_for_all_states(self):
        m = ACModel.init(seed=4)
        xs = np.stack([encode_state(c, d) for c in ALL_CONFIGS for d in Domain])
        logits, values = m.forward(xs)
        assert logits.shape == (240, 15) and values.shape == (240,)
        sums = nn.softmax(logits).sum(axis=1)
        np.testing.assert_allclose(sums, 1.0, atol=1e-9)


class TestACGradients:
    def make_batch(self, n=32, seed=6):
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, len(ALL_CONFIGS), size=n)
        xs = np.stack([encode_state(ALL_CONFIGS[i], Domain.COURSES) for i in idx])
        a = rng.integers(0, len(ACTIONS), size=n)
        g = rng.normal(size=n)
        adv = rng.normal(size=n)
        return ACBatch(x=xs, a=a, g=g, adv=adv)

    def test_loss_gradient_matches_finite_differences(self):
        model = ACModel.init(seed=5)
        batch = self.make_batch()
        assert ac_grad_check(model, batch, ACConfig()) < 1e-4

    def test_entropy_free_variant_also_checks(self):
        model = ACModel.init(seed=8)
        batch = self.make_batch(seed=9)
        assert ac_grad_check(model, batch, ACConfig(entropy_coef=0.0)) < 1e-4


class TestACPersistence:
    def test_round_trip(self, tmp_path):
        m = ACModel.init(seed=21)
        path = tmp_path / "ac.json"
        save_ac(m, path)
        loaded = load_ac(path)
        assert np.array_equal(loaded.flat_params(), m.flat_params())
        x = encode_state(ALL_CONFIGS[9], Domain.TRIPS)
        assert ac_act(loaded, x) == ac_act(m, x)

    def test_unknown_version_rejected(self):
        obj = ac_to_json(ACModel.init(seed=0))
        obj["version"] = 42
        with pytest.raises(ValueError):
            ac_from_json(obj)


class TestMcts:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            MctsConfig(simulations=0)
        with pytest.raises(ValueError):
            MctsConfig(uct_c=-1.0)

    def test_single_simulation_returns_first_action(self):
        rp = persona_reward_provider(preset_persona("readability"), Domain.COURSES)
        action = mcts_plan(ALL_CONFIGS[0], Domain.COURSES, rp, MctsConfig(simulations=1))
        assert action == ACTIONS[0]

    def test_depth_one_matches_one_step_argmax(self):
        persona = preset_persona("aesthetics")
        rp = persona_reward_provider(persona, Domain.COURSES)
        cfg = MctsConfig(simulations=400, max_depth=1, seed=0)
        checked = 0
        for root in ALL_CONFIGS[::7]:
            rewards = np.array([rp(root, a, CTX) for a in ACTIONS])
            best = np.flatnonzero(rewards == rewards.max())
            if len(best) != 1:
                continue  # argmax is only well-defined without ties
            assert mcts_plan(root, Domain.COURSES, rp, cfg) == ACTIONS[int(best[0])]
            checked += 1
        assert checked >= 5

    def test_seed_determinism(self):
        rp = persona_reward_provider(preset_persona("density-averse"), Domain.TRIPS)
        cfg = MctsConfig(simulations=150, seed=4)
        a = mcts_plan(ALL_CONFIGS[60], Domain.TRIPS, rp, cfg)
        b = mcts_plan(ALL_CONFIGS[60], Domain.TRIPS, rp, cfg)
        assert a == b

    def test_depth_two_matches_brute_force_on_restricted_moves(self):
        persona = preset_persona("readability")
        rp = persona_reward_provider(persona, Domain.COURSES)
        moves = (
            AdaptationAction.noop(),
            AdaptationAction.assign(Attribute.THEME, Theme.LIGHT),
            AdaptationAction.assign(Attribute.THEME, Theme.DARK),
            AdaptationAction.assign(Attribute.WIDGET, Widget.LIST_MENU),
            AdaptationAction.assign(Attribute.WIDGET, Widget.DROPDOWN),
        )
        cfg = MctsConfig(simulations=2000, max_depth=2, seed=0)
        for root in ALL_CONFIGS[::17]:
            values = []
            for a1 in moves:
                r1 = rp(root, a1, CTX)
                s1 = apply_action(root, a1)
                values.append(r1 + max(rp(s1, a2, CTX) for a2 in moves))
            values = np.array(values)
            best = np.flatnonzero(values >= values.max() - 1e-12)
            got = mcts_plan(root, Domain.COURSES, rp, cfg, actions=moves)
            assert moves.index(got) in best


class TestEvaluate:
    def test_oracle_policy_reaches_target(self):
        persona = preset_persona("readability")
        domain = Domain.COURSES
        rp = persona_reward_provider(persona, domain)
        target, _ = oracle_best(persona, domain, CTX)
        metrics = evaluate(
            oracle_policy_fn(persona, CTX),
            EpisodeConfig(domain, start=StartMode.UNIFORM_RANDOM),
            rp,
            target,
            n_episodes=50,
            seed=1,
        )
        assert metrics.final_config_match_rate == 1.0
        assert metrics.mean_steps_to_optimal <= 5

    def test_uniform_random_policy_rarely_ends_at_target(self):
        persona = preset_persona("readability")
        domain = Domain.COURSES
        rp = persona_reward_provider(persona, domain)
        target, _ = oracle_best(persona, domain, CTX)
        rng = np.random.default_rng(2)
        policy = lambda d, c: ACTIONS[int(rng.integers(len(ACTIONS)))]
        metrics = evaluate(
            policy,
            EpisodeConfig(domain, start=StartMode.UNIFORM_RANDOM),
            rp,
            target,
            n_episodes=1000,
            seed=3,
        )
        assert metrics.final_config_match_rate < 0.5

    def test_zero_reward_provider(self):
        metrics = evaluate(
            noop_policy_fn(),
            EpisodeConfig(Domain.COURSES),
            lambda s, a, c: 0.0,
            ALL_CONFIGS[0],
            n_episodes=5,
        )
        assert metrics.mean_return == 0.0

    def test_never_reached_counts_horizon_plus_one(self):
        persona = preset_persona("readability")
        target, _ = oracle_best(persona, Domain.COURSES, CTX)
        metrics = evaluate(
            noop_policy_fn(),
            EpisodeConfig(Domain.COURSES, horizon=8),
            persona_reward_provider(persona, Domain.COURSES),
            target,
            n_episodes=3,
        )
        assert metrics.mean_steps_to_optimal == 9
        assert metrics.final_config_match_rate == 0.0

    def test_csv_export_shape(self):
        metrics = evaluate(
            noop_policy_fn(),
            EpisodeConfig(Domain.COURSES),
            lambda s, a, c: 0.5,
            ALL_CONFIGS[0],
            n_episodes=4,
        )
        lines = metrics_to_csv(metrics).strip().split("\n")
        assert lines[0] == "episode,return,steps_to_optimal,final_config"
        assert len(lines) == 5

    def test_q_policy_adapter_matches_table(self):
        table = QTable.zeros()
        d = domain_index(Domain.COURSES)
        table.values[d, config_index(ALL_CONFIGS[0]), 3] = 2.0
        fn = q_policy_fn(table)
        assert fn(Domain.COURSES, ALL_CONFIGS[0]) == ACTIONS[3]
