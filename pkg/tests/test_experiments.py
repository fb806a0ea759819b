import io
from dataclasses import replace

import numpy as np
import pytest

from mqrank.experiments import (
    CSV_COLUMNS,
    AlphaDistribution,
    ExperimentConfig,
    compare,
    default_base,
    run_setting,
    run_setting_pointmass,
    run_setting_sizeS,
    run_setting_variance,
    run_trial,
    setting_config,
    sample_task,
    simulate_stack,
    summarize,
    write_csv,
)
from mqrank.estimators import EstimatorKind

SMALL = dict(n=80, trials=4)


class TestAlphaDistribution:
    def test_point_mass(self, rng):
        np.testing.assert_array_equal(AlphaDistribution.point_mass(0.5).sample(rng, 4), [0.5] * 4)

    @pytest.mark.parametrize("kind, param", [("point", 1.5), ("beta", 0.0), ("gamma", 1.0)])
    def test_invalid(self, kind, param):
        with pytest.raises(ValueError):
            AlphaDistribution(kind, param)

    @pytest.mark.parametrize("beta", [0.1, 1.0, 10.0])
    def test_beta_variance(self, beta):
        dist = AlphaDistribution.beta_symmetric(beta)
        x = dist.sample(np.random.default_rng(int(beta * 10)), 20_000)
        # standard error of the sample variance from the fourth central moment
        m4 = np.mean((x - x.mean()) ** 4)
        se = np.sqrt((m4 - x.var() ** 2) / x.size)
        assert abs(x.var(ddof=1) - dist.variance) < 3 * se
        assert dist.variance == 1 / (4 * (2 * beta + 1))

    def test_concentrated_beta(self):
        x = AlphaDistribution.beta_symmetric(1e4).sample(np.random.default_rng(1), 10_000)
        assert np.abs(x - 0.5).max() < 0.02


class TestConfig:
    def test_defaults(self):
        cfg = default_base("pointmass")
        assert (cfg.n, cfg.K, cfg.size_s, cfg.size_sk, cfg.top_pool, cfg.eval_size) == (200, 10, 3, 3, 10, 5)
        assert cfg.alpha_dist == AlphaDistribution.point_mass(0.5)
        assert default_base("sizeS").alpha_dist == AlphaDistribution.beta_symmetric(0.1)

    @pytest.mark.parametrize(
        "kw", [dict(n=12), dict(size_s=11), dict(size_sk=0), dict(eval_size=0), dict(K=0)]
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(**kw)

    def test_unknown_setting(self):
        with pytest.raises(ValueError):
            default_base("rotation")


class TestSampleTask:
    def test_membership(self):
        cfg = ExperimentConfig(n=100, K=4, size_s=3, size_sk=2, alpha_dist=AlphaDistribution.beta_symmetric(1))
        rng = np.random.default_rng(3)
        for _ in range(20):
            stack = simulate_stack(cfg, rng)
            sampled = sample_task(stack, cfg, rng)
            tasks = sampled.task.tasks
            assert len({t.q for t in tasks}) == 4
            assert [len(t.S) for t in tasks] == [3, 2, 2, 2]
            for t, a in zip(tasks, sampled.alphas):
                row = a * stack.rows(t.q)[0] + (1 - a) * stack.rows(t.q)[1]
                others = np.array([v for v in range(100) if v != t.q])
                pool = others[np.lexsort((others, row[others]))][:10]
                assert set(t.S) <= set(pool.tolist())
            target = tasks[0]
            assert len(sampled.evalset) == 5
            assert not set(sampled.evalset) & (set(target.S) | {target.q})

    def test_saturated_pool(self):
        cfg = ExperimentConfig(n=60, K=2, size_s=10)
        rng = np.random.default_rng(4)
        stack = simulate_stack(cfg, rng)
        sampled = sample_task(stack, cfg, rng)
        t = sampled.task.target
        row = 0.5 * stack.rows(t.q).sum(axis=0)
        others = np.array([v for v in range(60) if v != t.q])
        top = others[np.lexsort((others, row[others]))][:10]
        assert set(t.S) == set(top.tolist())

    def test_evalset_is_nearest_remaining(self):
        cfg = ExperimentConfig(n=60, K=1)
        rng = np.random.default_rng(5)
        stack = simulate_stack(cfg, rng)
        sampled = sample_task(stack, cfg, rng)
        t = sampled.task.target
        row = 0.5 * stack.rows(t.q).sum(axis=0)
        rest = np.array([v for v in range(60) if v != t.q and v not in t.S])
        expected = rest[np.lexsort((rest, row[rest]))][:5]
        assert sampled.evalset == tuple(expected.tolist())


class TestTrials:
    def test_one_record_per_estimator(self):
        res = run_trial(default_base("pointmass", **SMALL), "pointmass", 3, 0, 0)
        assert [r.kind for r in res.records] == list(EstimatorKind)
        for r in res.records:
            assert 0 < r.normalized_mrr <= 1
        assert res.record("combined").objective is None

    def test_deterministic(self):
        cfg = default_base("variance", **SMALL)
        a = run_trial(cfg, "variance", 0.1, 2, 1)
        b = run_trial(cfg, "variance", 0.1, 2, 1)
        assert a.seed == b.seed
        for x, y in zip(a.records, b.records):
            np.testing.assert_array_equal(x.alpha, y.alpha)
            assert x.normalized_mrr == y.normalized_mrr

    def test_trials_differ(self):
        cfg = default_base("pointmass", **SMALL)
        assert run_trial(cfg, "pointmass", 3, 0, 0).seed != run_trial(cfg, "pointmass", 3, 0, 1).seed

    def test_k1_estimators_coincide(self):
        cfg = setting_config("pointmass", default_base("pointmass", **SMALL), 1)
        assert cfg.K == 1
        res = run_trial(cfg, "pointmass", 1, 0, 0)
        vals = {r.normalized_mrr for r in res.records}
        assert len(vals) == 1

    def test_variance_concentration(self):
        results = list(run_setting_variance([1e4], default_base("variance", n=60, trials=5)))
        for r in results:
            assert abs(r.alpha_true - 0.5) < 0.02

    def test_shared_graph(self, monkeypatch):
        from mqrank import experiments

        stacks = []

        def recording(cfg, rng):
            stacks.append(simulate_stack(cfg, rng))
            return stacks[-1]

        monkeypatch.setattr(experiments, "simulate_stack", recording)
        for shared in (True, False):
            cfg = default_base("pointmass", shared_graph=shared, **SMALL)
            run_trial(cfg, "pointmass", 2, 0, 0)
            run_trial(cfg, "pointmass", 2, 0, 1)
        assert np.array_equal(stacks[0].layers, stacks[1].layers)
        assert not np.array_equal(stacks[2].layers, stacks[3].layers)


class TestStreams:
    def test_order_and_counts(self):
        results = list(run_setting_pointmass([1, 2], default_base("pointmass", **SMALL)))
        assert [(r.grid_value, r.trial) for r in results] == [(1, t) for t in range(4)] + [(2, t) for t in range(4)]

    def test_size_grid(self):
        results = list(run_setting_sizeS([1, 10], default_base("sizeS", n=60, trials=2)))
        assert len(results) == 4

    def test_parallel_matches_serial(self):
        base = default_base("pointmass", **SMALL)
        serial, parallel = io.StringIO(), io.StringIO()
        write_csv(run_setting("pointmass", [2, 3], base, workers=1), serial, base.engine)
        write_csv(run_setting("pointmass", [2, 3], base, workers=2), parallel, base.engine)
        assert serial.getvalue() == parallel.getvalue()

    def test_csv_schema(self):
        base = default_base("pointmass", n=60, trials=2)
        out = io.StringIO()
        count = write_csv(run_setting_pointmass([2], base), out, base.engine)
        lines = out.getvalue().splitlines()
        assert count == 6 and len(lines) == 7
        assert lines[0].split(",") == list(CSV_COLUMNS)


class TestStatistics:
    def test_summarize(self):
        s = summarize([1.0, 2.0, 3.0, 4.0])
        assert s.mean == 2.5 and s.count == 4
        assert abs(s.se - np.std([1, 2, 3, 4], ddof=1) / 2) < 1e-15

    def test_compare_pooled_se(self):
        results = list(run_setting_pointmass([3], default_base("pointmass", n=60, trials=6)))
        diff, se = compare(results, "multi", "single")
        a = summarize([r.record("multi").normalized_mrr for r in results])
        b = summarize([r.record("single").normalized_mrr for r in results])
        assert diff == a.mean - b.mean
        assert se == np.sqrt(a.se**2 + b.se**2)
