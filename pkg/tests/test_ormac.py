"""OR-channel grid types, superposition and containment."""

import itertools

import numpy as np
import pytest

from bloomsig.ormac import (
    IDEAL_CHANNEL,
    ChannelParams,
    ObservationFrame,
    ShapeMismatchError,
    Signature,
    contains,
    superpose,
)


def sig(rows, M=1):
    return Signature.from_rows(rows, M)


class TestTypes:
    def test_signature_rejects_two_preambles_in_one_rao(self):
        with pytest.raises(ValueError):
            Signature([[1, 1], [0, 0]])

    def test_signature_weight_counts_active_raos(self):
        assert sig([0, -1, 2], M=3).weight == 2

    def test_row_preambles_round_trip(self):
        s = sig([1, -1, 0], M=2)
        assert s.row_preambles().tolist() == [1, -1, 0]
        assert Signature.from_rows(s.row_preambles(), 2) == s

    def test_from_cells(self):
        s = Signature.from_cells(3, 2, [(0, 1), (2, 0)])
        assert s.active_cells() == [(0, 1), (2, 0)]

    def test_channel_params_validated(self):
        with pytest.raises(ValueError):
            ChannelParams(0.5, 0.5)  # p_f must be < p_d
        with pytest.raises(ValueError):
            ChannelParams(1.5, 0.0)

    def test_observation_rao_count_bounds(self):
        with pytest.raises(ValueError):
            ObservationFrame(np.zeros((3, 2), dtype=np.uint8), rao_count=4)


class TestSuperpose:
    def test_empty_input_gives_all_zero_frame(self):
        frame = superpose([], IDEAL_CHANNEL, shape=(3, 2))
        assert frame.grid.sum() == 0
        assert frame.rao_count == 3

    def test_empty_input_requires_shape(self):
        with pytest.raises(ValueError):
            superpose([], IDEAL_CHANNEL)

    def test_hand_or_of_two_grids(self):
        # {RAO1, RAO2} + {RAO2, RAO3} over an ideal channel -> {1, 2, 3}
        frame = superpose([sig([0, 0, -1]), sig([-1, 0, 0])], IDEAL_CHANNEL)
        assert frame.grid[:, 0].tolist() == [1, 1, 1]

    def test_single_signature_identity_channel(self):
        s = sig([1, -1, 0], M=2)
        frame = superpose([s], IDEAL_CHANNEL)
        assert (frame.grid == s.grid).all()

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeMismatchError):
            superpose([sig([0, -1]), sig([0, -1, 0])], IDEAL_CHANNEL)

    def test_ideal_superpose_is_exactly_or_exhaustively(self):
        # all subsets of <= 3 signatures on a 3x2 grid
        pool = [
            Signature.from_rows(rows, 2)
            for rows in itertools.product((-1, 0, 1), repeat=3)
        ]
        rng = np.random.default_rng(0)
        chosen = [pool[i] for i in rng.choice(len(pool), size=6, replace=False)]
        for k in range(0, 4):
            for combo in itertools.combinations(chosen, k):
                frame = superpose(combo, IDEAL_CHANNEL, shape=(3, 2))
                expected = np.zeros((3, 2), dtype=np.uint8)
                for s in combo:
                    expected |= s.grid
                assert (frame.grid == expected).all()

    def test_noise_rates_converge(self):
        # fraction of kept active cells ~ p_d, flipped idle cells ~ p_f
        rng = np.random.default_rng(1234)
        channel = ChannelParams(0.9, 0.05)
        s = Signature(np.ones((50, 1), dtype=np.uint8))
        idle = Signature(np.zeros((50, 1), dtype=np.uint8))
        kept = flipped = trials = 0
        for _ in range(400):
            y_active = superpose([s], channel, rng=rng)
            y_idle = superpose([idle], channel, rng=rng)
            kept += int(y_active.grid.sum())
            flipped += int(y_idle.grid.sum())
            trials += 50
        for frac, p in ((kept / trials, channel.p_d), (flipped / trials, channel.p_f)):
            se = (p * (1 - p) / trials) ** 0.5
            assert abs(frac - p) < 3 * se

    def test_noisy_channel_requires_rng(self):
        with pytest.raises(ValueError):
            superpose([sig([0])], ChannelParams(0.99, 1e-3))


class TestContains:
    def test_all_zero_candidate_vacuously_contained(self):
        frame = superpose([sig([0, 0, -1])], IDEAL_CHANNEL)
        assert contains(sig([-1, -1, -1]), frame)

    def test_phantom_containment(self):
        # sC={1,3} is covered by the OR of sA={1,2} and sB={2,3}
        frame = superpose([sig([0, 0, -1]), sig([-1, 0, 0])], IDEAL_CHANNEL)
        assert contains(sig([0, -1, 0]), frame)

    def test_single_cell_mismatch(self):
        frame = superpose([sig([0, -1, -1], M=2)], IDEAL_CHANNEL)
        assert not contains(sig([1, -1, -1], M=2), frame)

    def test_transmitted_always_contained_under_ideal_channel(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            sigs = [
                Signature.from_rows(rng.integers(-1, 3, size=4), 3) for _ in range(3)
            ]
            frame = superpose(sigs, IDEAL_CHANNEL, shape=(4, 3))
            for s in sigs:
                assert contains(s, frame, upto=4)

    def test_monotone_in_upto(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            cand = Signature.from_rows(rng.integers(-1, 2, size=5), 2)
            obs = ObservationFrame(rng.integers(0, 2, size=(5, 2)).astype(np.uint8))
            results = [contains(cand, obs, upto=i) for i in range(6)]
            # once containment fails it can never recover with more rows
            for earlier, later in zip(results, results[1:]):
                assert earlier or not later

    def test_upto_beyond_received_rejected(self):
        obs = ObservationFrame(np.zeros((4, 1), dtype=np.uint8), rao_count=2)
        assert contains(sig([-1, -1, 0, -1]), obs, upto=2)
        with pytest.raises(ValueError):
            contains(sig([0, -1, -1, -1]), obs, upto=3)
