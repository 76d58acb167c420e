"""Arrival sampling, the three scheme runners and the sweep driver."""

import dataclasses

import numpy as np
import pytest

from bloomsig.codec import build_codebook
from bloomsig.dimensioning import DimensioningInput, dimension
from bloomsig.ormac import ChannelParams
from bloomsig.sim import (
    ExperimentSpec,
    SimConfig,
    compute_metrics,
    replication_rng,
    run_baseline_arp,
    run_experiment,
    run_random_arp,
    run_signature_arp,
    sample_arrivals,
    write_results,
)

IDEAL = ChannelParams(1.0, 0.0)


class TestSampleArrivals:
    def test_zero_mean_gives_empty(self):
        assert len(sample_arrivals(100, 0, np.random.default_rng(0))) == 0

    def test_full_mean_gives_everyone(self):
        assert len(sample_arrivals(100, 100, np.random.default_rng(0))) == 100

    def test_sample_mean_matches_binomial(self):
        rng = np.random.default_rng(123)
        draws = [len(sample_arrivals(1000, 200, rng)) for _ in range(10_000)]
        # se of the mean = sqrt(1000*0.2*0.8)/sqrt(10^4) ~ 0.13
        assert abs(np.mean(draws) - 200) < 0.5


class TestComputeMetrics:
    def test_zero_arrivals_goodput_absent(self):
        m = compute_metrics("baseline", 0, 0, 0, {}, {})
        assert m.goodput is None
        assert m.detection_prob is None
        assert m.mean_step1_ms is None

    def test_all_correct(self):
        m = compute_metrics("signature", 10, 10, 10, {i: 1.0 for i in range(10)}, {i: 2.0 for i in range(10)})
        assert m.goodput == 1.0
        assert m.detection_prob == 1.0

    def test_two_phantoms(self):
        m = compute_metrics("signature", 200, 200, 202, {}, {})
        assert m.goodput == pytest.approx(200 / 202)
        assert m.false_positives == 2


def dimensioned(N, T=1000, M=54):
    res = dimension(DimensioningInput(N=N, T=T, M=M, G_hat=0.99))
    return res.K, res.L_hat


class TestSignatureScheme:
    def test_single_arrival_ideal_channel(self):
        K, L = 3, 12
        cfg = SimConfig(T=40, N=1.0, M=8, channel=IDEAL)
        cb = build_codebook(range(40), L, 8, K)
        # the no-phantom guarantee needs pairwise-distinct codebook entries:
        # with equal weight K, containment in a lone signature forces equality
        assert cb.duplicate_count == 0
        for seed_try in range(50):
            r = np.random.default_rng(seed_try)
            m = run_signature_arp(cfg, cb, K, L, r)
            if m.arrivals == 1:
                assert m.goodput == 1.0
                assert m.detection_prob == 1.0
                assert m.false_positives == 0
                return
        pytest.fail("no single-arrival draw found")

    def test_codebook_mismatch_rejected(self):
        cfg = SimConfig(T=10, N=2.0, M=5)
        cb = build_codebook(range(10), 8, 5, 3)
        with pytest.raises(ValueError):
            run_signature_arp(cfg, cb, 3, 9, np.random.default_rng(0))

    def test_latency_bookkeeping(self):
        K, L = dimensioned(200)
        cfg = SimConfig(T=1000, N=200.0)
        cb = build_codebook(range(1000), L, 54, K)
        m = run_signature_arp(cfg, cb, K, L, replication_rng(7, "signature", 200, 0))
        gap = cfg.processing_delay_ms + cfg.grant_to_data_ms
        assert m.step1_latency_ms.keys() == m.final_latency_ms.keys()
        for u, t1 in m.step1_latency_ms.items():
            assert 1 <= t1 <= L
            assert m.final_latency_ms[u] == t1 + gap

    def test_determinism(self):
        K, L = dimensioned(200)
        cfg = SimConfig(T=1000, N=200.0)
        cb = build_codebook(range(1000), L, 54, K)
        a = run_signature_arp(cfg, cb, K, L, replication_rng(9, "signature", 200, 4))
        b = run_signature_arp(cfg, cb, K, L, replication_rng(9, "signature", 200, 4))
        assert a == b


class TestBaselineScheme:
    def test_single_arrival_first_attempt(self):
        cfg = SimConfig(T=50, N=1.0, channel=IDEAL)
        for seed in range(60):
            rng = np.random.default_rng(seed)
            m = run_baseline_arp(cfg, rng)
            if m.arrivals == 1:
                assert m.goodput == 1.0
                assert m.detection_prob == 1.0
                (t1,) = m.step1_latency_ms.values()
                assert 1 <= t1 <= cfg.backoff_window_ms
                (tf,) = m.final_latency_ms.values()
                assert tf == t1 + 5 + 9 + 5
                return
        pytest.fail("no single-arrival draw found")

    def test_forced_collision_wastes_one_slot(self):
        # find a seed where both arrivals pick the same RAO and preamble on
        # their first attempt, then recover on clean retries
        cfg = SimConfig(T=2, N=2.0, M=4, backoff_window_ms=2.0, channel=IDEAL)
        for seed in range(500):
            m = run_baseline_arp(cfg, np.random.default_rng(seed))
            if m.arrivals == 2 and m.false_positives == 1 and m.served == 2:
                assert m.goodput == pytest.approx(2 / 3)
                return
        pytest.fail("no collision seed found")

    def test_max_attempts_bounds_everything(self):
        cfg = SimConfig(T=60, N=60.0, M=1, backoff_window_ms=3.0, max_attempts=4)
        m = run_baseline_arp(cfg, np.random.default_rng(5))
        # with one preamble and a tiny window most devices exhaust retries
        assert m.arrivals == 60
        assert m.served < 60
        assert m.detection_prob == m.served / 60

    def test_detection_near_one_at_defaults(self):
        cfg = SimConfig(T=1000, N=300.0)
        served = arrived = 0
        for rep in range(5):
            m = run_baseline_arp(cfg, replication_rng(3, "baseline", 300, rep))
            served += m.served
            arrived += m.arrivals
        assert served / arrived > 0.995

    def test_determinism(self):
        cfg = SimConfig(T=1000, N=500.0)
        a = run_baseline_arp(cfg, replication_rng(11, "baseline", 500, 1))
        b = run_baseline_arp(cfg, replication_rng(11, "baseline", 500, 1))
        assert a == b


class TestRandomScheme:
    def test_single_arrival_ideal_channel(self):
        cfg = SimConfig(T=30, N=1.0, M=6, channel=IDEAL)
        L = 12
        for seed in range(60):
            m = run_random_arp(cfg, L, np.random.default_rng(seed))
            if m.arrivals == 1:
                assert m.detection_prob == 1.0
                (t1,) = m.step1_latency_ms.values()
                assert t1 == L * cfg.rao_period_ms
                (tf,) = m.final_latency_ms.values()
                assert tf == t1 + cfg.processing_delay_ms + cfg.grant_to_data_ms
                return
        pytest.fail("no single-arrival draw found")

    def test_identical_draws_count_as_collision(self):
        # with L=1, M=1 every device draws the same signature
        cfg = SimConfig(T=2, N=2.0, M=1, channel=IDEAL)
        m = run_random_arp(cfg, 1, np.random.default_rng(0))
        assert m.arrivals == 2
        assert m.served == 0
        assert m.detection_prob == 0.0
        assert m.false_positives == 1  # the one decoded value served nobody

    def test_phantoms_from_idle_population(self):
        # dense frames make idle devices' signatures contained
        cfg = SimConfig(T=400, N=200.0, M=3, channel=IDEAL)
        m = run_random_arp(cfg, 4, np.random.default_rng(1))
        assert m.false_positives > 0
        assert m.goodput is not None and m.goodput < 0.9

    def test_determinism(self):
        cfg = SimConfig(T=500, N=100.0)
        a = run_random_arp(cfg, 40, replication_rng(13, "random", 100, 2))
        b = run_random_arp(cfg, 40, replication_rng(13, "random", 100, 2))
        assert a == b


class TestExperimentRunner:
    def spec(self, **kw):
        defaults = dict(
            base=SimConfig(T=200, N=40.0),
            sweep_N=(40.0, 60.0),
            schemes=("signature", "baseline", "random"),
            replications=3,
            G_hat=0.99,
            master_seed=71,
        )
        defaults.update(kw)
        return ExperimentSpec(**defaults)

    def test_row_count_and_schema(self):
        rows = run_experiment(self.spec())
        assert len(rows) == 2 * 3 * 3
        assert {r["scheme"] for r in rows} == {"signature", "baseline", "random"}

    def test_deterministic_csv(self, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_results(run_experiment(self.spec()), p1)
        write_results(run_experiment(self.spec()), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_replication_streams_are_order_independent(self):
        spec = self.spec()
        rows = run_experiment(spec)
        flipped = dataclasses.replace(spec, schemes=("random", "baseline", "signature"))
        rows_flipped = run_experiment(flipped)
        key = lambda r: (r["scheme"], r["N"], r["seed"])
        assert sorted(map(key, rows)) == sorted(map(key, rows_flipped))
        by_key = {key(r): r for r in rows}
        for r in rows_flipped:
            assert by_key[key(r)] == r

    def test_trace_sink_receives_first_signature_trace(self):
        captured = []
        run_experiment(self.spec(), trace_sink=captured.append)
        assert len(captured) == 1
        assert all(a >= b for a, b in zip(captured[0].viable, captured[0].viable[1:]))
