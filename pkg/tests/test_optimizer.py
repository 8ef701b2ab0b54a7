"""Greedy stage-wise search, its grid oracle, and the trial-log files.

The central claim is oracle-backed: on separable objectives (a sum of
independent per-parameter terms) greedy stage-wise maximization provably
equals exhaustive grid search, so fuzzed separable objectives must agree
exactly.  A deliberately coupled objective pins down that the equivalence
is a property of separability, not of the search.
"""

import pytest

from ocrforge import ProtocolError, StageFailedError
from ocrforge.optimizer import (
    FAILED_SCORE,
    HyperParam,
    HyperParamSpace,
    TrialRecord,
    append_trial,
    fingerprint_config,
    greedy_search,
    grid_search,
    load_space,
    load_trial_log,
    builtin_search_space,
    save_space,
)


def small_space():
    return HyperParamSpace(
        params=(
            HyperParam("alpha", (1, 2, 3), 2, cost_rank=3),
            HyperParam("beta", ("x", "y"), "x", cost_rank=2),
            HyperParam("gamma", (0.1, 0.5), 0.5, cost_rank=1),
        )
    )


class CountingEval:
    def __init__(self, fn):
        self.fn = fn
        self.calls = []

    def __call__(self, config):
        self.calls.append(dict(config))
        return self.fn(config)


def separable(weights):
    """Build config -> mean of per-parameter weights, always in [0, 1]."""

    def evaluate(config):
        return sum(weights[k][v] for k, v in config.items()) / len(config)

    return evaluate


class TestTypes:
    def test_param_validation(self):
        with pytest.raises(ValueError, match="no values"):
            HyperParam("p", (), 1, cost_rank=1)
        with pytest.raises(ValueError, match="duplicate values"):
            HyperParam("p", (1, 1), 1, cost_rank=1)
        with pytest.raises(ValueError, match="not among its values"):
            HyperParam("p", (1, 2), 3, cost_rank=1)

    def test_space_orders_by_cost_rank_stable(self):
        space = HyperParamSpace(
            params=(
                HyperParam("cheap", (1, 2), 1, cost_rank=1),
                HyperParam("tie_a", (1, 2), 1, cost_rank=5),
                HyperParam("tie_b", (1, 2), 1, cost_rank=5),
            )
        )
        assert [p.name for p in space.params] == ["tie_a", "tie_b", "cheap"]

    def test_space_rejects_duplicates_and_empty(self):
        with pytest.raises(ValueError, match="duplicate parameter names"):
            HyperParamSpace(
                params=(
                    HyperParam("p", (1, 2), 1, cost_rank=1),
                    HyperParam("p", (3, 4), 3, cost_rank=2),
                )
            )
        with pytest.raises(ValueError, match="empty"):
            HyperParamSpace(params=())

    def test_defaults_and_grid_size(self):
        space = small_space()
        assert space.default_config() == {"alpha": 2, "beta": "x", "gamma": 0.5}
        assert space.grid_size() == 12

    def test_trial_record_score_bounds(self):
        TrialRecord(config={}, score=0.0, duration=0.1, stage="s")
        TrialRecord(config={}, score=1.0, duration=0.1, stage="s")
        failed = TrialRecord(config={}, score=FAILED_SCORE, duration=0.1, stage="s")
        assert failed.failed
        with pytest.raises(ValueError, match="outside"):
            TrialRecord(config={}, score=1.5, duration=0.1, stage="s")


class TestFingerprint:
    def test_canonical_and_key_order_free(self):
        assert fingerprint_config({"b": 2, "a": 1}) == '{"a":1,"b":2}'
        assert fingerprint_config({"a": 1, "b": 2}) == fingerprint_config({"b": 2, "a": 1})

    def test_values_survive_verbatim(self):
        fp = fingerprint_config({"layer_type": "gru-like", "dropout": 0.2})
        assert fp == '{"dropout":0.2,"layer_type":"gru-like"}'


class TestGreedyMechanics:
    def test_separable_objective_matches_grid(self, rng):
        space = small_space()
        for _ in range(30):
            weights = {
                p.name: dict(zip(p.values, rng.sample(range(100), len(p.values))))
                for p in space.params
            }
            for table in weights.values():
                for k in table:
                    table[k] /= 300.0
            evaluate = separable(weights)
            greedy = greedy_search(space, evaluate)
            grid = grid_search(space, evaluate)
            assert greedy.best_config == grid.best_config
            assert greedy.best_score == pytest.approx(grid.best_score, abs=1e-12)

    def test_coupled_objective_can_defeat_greedy(self):
        """The separability assumption is load-bearing, not decorative."""
        space = HyperParamSpace(
            params=(
                HyperParam("a", ("a1", "a2"), "a1", cost_rank=2),
                HyperParam("b", ("b1", "b2"), "b1", cost_rank=1),
            )
        )
        table = {
            ("a1", "b1"): 0.8,
            ("a1", "b2"): 0.3,
            ("a2", "b1"): 0.2,
            ("a2", "b2"): 1.0,
        }
        evaluate = lambda c: table[(c["a"], c["b"])]
        assert greedy_search(space, evaluate).best_score == 0.8
        assert grid_search(space, evaluate).best_score == 1.0

    def test_budget_without_cache_is_sum_of_values(self):
        evaluate = CountingEval(lambda c: 0.5)
        result = greedy_search(small_space(), evaluate, cache=False)
        assert len(evaluate.calls) == 3 + 2 + 2
        assert len(result.trials) == 7

    def test_cache_never_reevaluates_a_fingerprint(self):
        evaluate = CountingEval(lambda c: 0.5)
        result = greedy_search(small_space(), evaluate, cache=True)
        fingerprints = [fingerprint_config(c) for c in evaluate.calls]
        assert len(fingerprints) == len(set(fingerprints))
        assert len(result.trials) == len(evaluate.calls)

    def test_constant_scores_pick_first_declared_value(self):
        # strict improvement required, so ties keep the earliest candidate
        result = greedy_search(small_space(), lambda c: 0.5)
        assert result.best_config == {"alpha": 1, "beta": "x", "gamma": 0.1}

    def test_best_score_is_score_of_best_config(self, rng):
        space = small_space()
        weights = {
            p.name: {v: rng.random() / 3.0 for v in p.values} for p in space.params
        }
        evaluate = separable(weights)
        result = greedy_search(space, evaluate)
        assert result.best_score == pytest.approx(evaluate(result.best_config))

    def test_later_stages_hold_earlier_winners_and_defaults(self):
        seen = []

        def evaluate(config):
            seen.append(dict(config))
            return {1: 0.2, 2: 0.4, 3: 0.9}[config["alpha"]]

        greedy_search(small_space(), evaluate)
        beta_stage = [c for c in seen if c["beta"] == "y"]
        assert all(c["alpha"] == 3 and c["gamma"] == 0.5 for c in beta_stage)

    def test_failed_trials_are_skipped(self):
        def evaluate(config):
            if config["alpha"] == 3:
                raise RuntimeError("boom")
            if config["alpha"] == 2:
                return 7.5
            return 0.6

        result = greedy_search(small_space(), evaluate)
        assert result.best_config["alpha"] == 1
        failed = [t for t in result.trials if t.failed]
        assert {t.config["alpha"] for t in failed} == {2, 3}

    def test_all_values_failing_raises_stage_error(self):
        def evaluate(config):
            raise RuntimeError("down")

        with pytest.raises(StageFailedError) as excinfo:
            greedy_search(small_space(), evaluate)
        assert excinfo.value.stage == "alpha"
        assert "alpha" in str(excinfo.value)

    def test_protocol_error_aborts_search(self):
        def evaluate(config):
            raise ProtocolError("adapter hung up")

        with pytest.raises(ProtocolError, match="hung up"):
            greedy_search(small_space(), evaluate)

    def test_seed_trials_prime_the_cache(self):
        space = small_space()
        evaluate = CountingEval(lambda c: 0.5)
        first = greedy_search(space, evaluate)
        replay = CountingEval(lambda c: 0.5)
        second = greedy_search(space, replay, seed_trials=first.trials)
        assert replay.calls == []
        assert second.trials == ()
        assert second.best_config == first.best_config

    def test_on_trial_sees_each_fresh_record_in_order(self):
        seen = []
        result = greedy_search(small_space(), lambda c: 0.5, on_trial=seen.append)
        assert tuple(seen) == result.trials


class TestGridSearch:
    def test_cap(self):
        with pytest.raises(ValueError, match="exceeds cap"):
            grid_search(small_space(), lambda c: 0.5, cap=11)

    def test_tie_takes_earliest_declaration_order(self):
        result = grid_search(small_space(), lambda c: 0.5)
        assert result.best_config == {"alpha": 1, "beta": "x", "gamma": 0.1}
        assert all(t.stage == "grid" for t in result.trials)
        assert len(result.trials) == 12

    def test_all_failing_raises(self):
        def evaluate(config):
            return -3.0

        with pytest.raises(StageFailedError) as excinfo:
            grid_search(small_space(), evaluate)
        assert excinfo.value.stage == "grid"


class TestBuiltinSpace:
    def test_shape(self):
        space = builtin_search_space()
        assert [p.name for p in space.params] == [
            "depth",
            "layer_type",
            "bidirectional",
            "dropout",
            "units",
            "batch_size",
            "epoch_size",
        ]
        assert space.grid_size() == 1920
        assert sum(len(p.values) for p in space.params) == 22

    def test_defaults(self):
        assert builtin_search_space().default_config() == {
            "depth": 2,
            "layer_type": "gru-like",
            "bidirectional": "no",
            "dropout": 0.2,
            "units": 500,
            "batch_size": 100,
            "epoch_size": 20000,
        }

    def test_tuned_optimum_lies_inside_the_grid(self):
        by_name = {p.name: p for p in builtin_search_space().params}
        assert 4 in by_name["depth"].values
        assert "lstm-like" in by_name["layer_type"].values
        assert "yes" in by_name["bidirectional"].values
        assert 256 in by_name["batch_size"].values
        assert 250000 in by_name["epoch_size"].values


class TestFiles:
    def test_space_round_trip_preserves_value_types(self, tmp_path):
        path = tmp_path / "space.ini"
        save_space(builtin_search_space(), path)
        loaded = load_space(path)
        assert loaded.params == builtin_search_space().params
        by_name = {p.name: p for p in loaded.params}
        assert isinstance(by_name["depth"].values[0], int)
        assert isinstance(by_name["dropout"].values[1], float)
        assert isinstance(by_name["layer_type"].values[0], str)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_space(tmp_path / "nope.ini")

    def test_trial_log_round_trip_including_failures(self, tmp_path):
        path = tmp_path / "log.jsonl"
        ok = TrialRecord(
            config={"alpha": 1, "beta": "x"}, score=0.75, duration=0.5, stage="alpha"
        )
        bad = TrialRecord(
            config={"alpha": 2, "beta": "x"}, score=FAILED_SCORE, duration=0.1, stage="alpha"
        )
        append_trial(ok, path)
        append_trial(bad, path)
        back = load_trial_log(path)
        assert back == [ok, bad]
        assert back[1].failed
        raw = path.read_text(encoding="utf-8").splitlines()
        assert '"score": null' in raw[1]

    def test_log_resumes_a_search_with_zero_fresh_trials(self, tmp_path):
        path = tmp_path / "log.jsonl"
        space = small_space()
        evaluate = separable(
            {"alpha": {1: 0.1, 2: 0.2, 3: 0.3}, "beta": {"x": 0.1, "y": 0.05}, "gamma": {0.1: 0.0, 0.5: 0.02}}
        )
        first = greedy_search(space, evaluate, on_trial=lambda r: append_trial(r, path))
        resumed = CountingEval(evaluate)
        second = greedy_search(space, resumed, seed_trials=load_trial_log(path))
        assert resumed.calls == []
        assert second.best_config == first.best_config
        assert second.best_score == pytest.approx(first.best_score)
