import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qafs.qubo import Bqm, energy
from qafs.sampler import (
    MAX_EXHAUSTIVE_VARIABLES,
    AnnealSchedule,
    SampleSet,
    exhaustive_solve,
    select_features,
    simulated_anneal,
)

FAST = AnnealSchedule(sweeps=200, n_reads=20)


def random_bqm(rng, n, scale=1.0):
    h = rng.uniform(-scale, scale, n)
    J = np.triu(rng.uniform(-scale, scale, (n, n)), 1)
    return Bqm(h, J + J.T)


def oracle_minimum(bqm):
    """Plain itertools enumeration, scored with the reference energy."""
    best = None
    for bits in itertools.product((0, 1), repeat=bqm.n):
        e = energy(bqm, np.array(bits))
        if best is None or e < best[0]:
            best = (e, bits)
    return best


class TestExhaustive:
    def test_tie_goes_to_lexicographically_smallest(self):
        bqm = Bqm.from_upper([-1, -1], [(0, 1, 2)])
        best = exhaustive_solve(bqm)
        assert best.x.tolist() == [0, 1] and best.energy == -1.0

    def test_positive_biases_give_empty_set(self):
        best = exhaustive_solve(Bqm.from_upper([1.0] * 5, []))
        assert best.x.tolist() == [0] * 5 and best.energy == 0.0

    def test_single_variable(self):
        best = exhaustive_solve(Bqm.from_upper([-5.0], []))
        assert best.x.tolist() == [1] and best.energy == -5.0

    def test_cap(self):
        n = MAX_EXHAUSTIVE_VARIABLES + 1
        with pytest.raises(ValueError, match="capped"):
            exhaustive_solve(Bqm(np.zeros(n), np.zeros((n, n))))

    def test_matches_oracle(self):
        rng = np.random.default_rng(0)
        for n in range(1, 13):
            for _ in range(3):
                bqm = random_bqm(rng, n)
                e, bits = oracle_minimum(bqm)
                best = exhaustive_solve(bqm)
                assert best.energy == pytest.approx(e, abs=1e-12)
                assert tuple(best.x.tolist()) == bits

    def test_large_block_split(self):
        # more variables than the inner block: exercise the outer loop
        rng = np.random.default_rng(1)
        bqm = random_bqm(rng, 16)
        e, bits = oracle_minimum(bqm)
        best = exhaustive_solve(bqm)
        assert best.energy == pytest.approx(e, abs=1e-12) and tuple(best.x.tolist()) == bits

    def test_all_zero_model_is_all_ties(self):
        best = exhaustive_solve(Bqm(np.zeros(14), np.zeros((14, 14))))
        assert best.x.sum() == 0


class TestAnneal:
    def test_deterministic(self):
        bqm = random_bqm(np.random.default_rng(2), 10)
        a = simulated_anneal(bqm, FAST, seed=7)
        b = simulated_anneal(bqm, FAST, seed=7)
        assert a.to_json() == b.to_json()

    def test_sorted_and_rescored(self):
        bqm = random_bqm(np.random.default_rng(3), 10)
        ss = simulated_anneal(bqm, FAST, seed=1)
        assert len(ss.samples) == FAST.n_reads
        keys = [(s.energy, s.bitstring) for s in ss.samples]
        assert keys == sorted(keys)
        for s in ss.samples:
            assert s.energy == energy(bqm, s.x)

    def test_never_below_ground_state(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            bqm = random_bqm(rng, 8)
            ground = exhaustive_solve(bqm).energy
            assert simulated_anneal(bqm, FAST, seed=0).first.energy >= ground - 1e-12

    def test_finds_ground_state_of_small_models(self):
        rng = np.random.default_rng(5)
        for seed in range(10):
            bqm = random_bqm(rng, 8)
            assert simulated_anneal(bqm, seed=seed).first.energy == pytest.approx(
                exhaustive_solve(bqm).energy, abs=1e-12
            )

    def test_large_seed(self):
        bqm = random_bqm(np.random.default_rng(6), 5)
        simulated_anneal(bqm, FAST, seed=2**64 - 1)

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            AnnealSchedule(sweeps=0)
        with pytest.raises(ValueError):
            AnnealSchedule(beta_start=2.0, beta_end=1.0)
        betas = AnnealSchedule().betas()
        assert betas.size == 1000 and betas[0] == pytest.approx(0.1) and betas[-1] == pytest.approx(10.0)

    def test_sampleset_json_round_trip(self):
        bqm = random_bqm(np.random.default_rng(8), 6)
        ss = simulated_anneal(bqm, FAST, seed=3)
        back = SampleSet.from_json(ss.to_json())
        assert back.to_json() == ss.to_json()


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.randoms(use_true_random=False))
def test_relabelling_preserves_ground_energy(n, seed, rnd):
    bqm = random_bqm(np.random.default_rng(seed), n)
    perm = list(range(n))
    rnd.shuffle(perm)
    p = np.array(perm)
    permuted = Bqm(bqm.h[p], bqm.J[np.ix_(p, p)])
    a, b = exhaustive_solve(bqm), exhaustive_solve(permuted)
    assert a.energy == pytest.approx(b.energy, abs=1e-12)
    # continuous random coefficients have a unique minimizer
    assert np.array_equal(a.x[p], b.x)


class TestSelectFeatures:
    def test_strong_redundancy_keeps_the_stronger(self):
        bqm = Bqm.from_upper([-1.0, -0.2], [(0, 1, 1.5)])
        for sampler in ("exhaustive", "annealing"):
            assert select_features(bqm, sampler, FAST) == [0]

    def test_empty_selection_falls_back(self):
        bqm = Bqm(np.zeros(4), np.zeros((4, 4)))
        assert select_features(bqm, "exhaustive") == [0]
        bqm = Bqm.from_upper([0.5, 0.2, 0.3], [])
        assert select_features(bqm, "exhaustive") == [1]

    def test_duplicate_pair_yields_one(self):
        # features 0 and 1 identical (J = 1), feature 2 independent
        bqm = Bqm.from_upper([-0.8, -0.8, -0.3], [(0, 1, 1.0)])
        chosen = select_features(bqm, "exhaustive")
        assert len({0, 1} & set(chosen)) == 1 and 2 in chosen

    def test_unknown_sampler(self):
        with pytest.raises(ValueError):
            select_features(Bqm.from_upper([1.0], []), "quantum")
