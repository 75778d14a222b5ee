import math

import numpy as np
import pytest

from stabkit import shadows as sh
from stabkit import states
from stabkit import stabilizer as stab
from stabkit.errors import CapExceededError, ParameterError
from stabkit.stabilizer import CliffordTableau, StabilizerState

COS_PI_8_4 = 0.7285533905932737  # cos^4(pi/8)


def plus_plus() -> StabilizerState:
    return StabilizerState(2, (0b1000, 0b0100), (0, 0))


def test_default_counts():
    assert sh.default_batch_count(64, 0.05) == 16
    assert sh.default_shadow_count(64, 0.1, 0.05) == 26683
    with pytest.raises(ParameterError):
        sh.default_shadow_count(0, 0.1, 0.05)


class TestCollect:
    def test_forced_identity(self, rng):
        S = sh.collect_shadows(states.basis_state(3), 200, rng, clifford=CliffordTableau.identity(3))
        assert np.all(S.outcomes == 0)

    def test_seeded(self):
        psi = states.haar_random(2, np.random.default_rng(0))
        a = sh.collect_shadows(psi, 100, np.random.default_rng(9))
        b = sh.collect_shadows(psi, 100, np.random.default_rng(9))
        assert np.array_equal(a.images, b.images) and np.array_equal(a.outcomes, b.outcomes)
        assert a.samples[3] == b.samples[3]

    def test_outcomes_follow_born_rule(self, rng):
        psi = states.haar_random(2, rng)
        C = stab.random_clifford(2, rng)
        m = 20_000
        S = sh.collect_shadows(psi, m, rng, clifford=C)
        probs = np.abs(C.unitary() @ psi.amplitudes) ** 2
        freq = np.bincount(S.outcomes, minlength=4) / m
        assert np.all(np.abs(freq - probs) < 4 * np.sqrt(probs * (1 - probs) / m) + 1e-12)

    def test_errors(self, rng):
        with pytest.raises(ParameterError):
            sh.collect_shadows(states.basis_state(1), 0, rng)
        with pytest.raises(CapExceededError):
            sh.collect_shadows(states.basis_state(9), 1, rng)

    def test_jsonl_roundtrip(self, tmp_path, rng):
        psi = states.haar_random(2, rng)
        S = sh.collect_shadows(psi, 30, rng)
        sh.save_shadows(S, tmp_path / "s.jsonl")
        back = sh.load_shadows(tmp_path / "s.jsonl", batch_count=3)
        assert np.array_equal(back.images, S.images)
        assert np.array_equal(back.phases, S.phases)
        assert np.array_equal(back.outcomes, S.outcomes)
        assert len((tmp_path / "s.jsonl").read_text().splitlines()) == 30
        phi = stab.random_stabilizer_state(2, rng)
        assert np.allclose(sh.per_sample_estimates(back, phi), sh.per_sample_estimates(S, phi))


class TestEstimator:
    def test_zero_overlap_n2(self, rng):
        psi = states.haar_random(2, rng)
        S = sh.collect_shadows(psi, 10_000, rng, batch_count=10)
        est = sh.estimate_stabilizer_fidelity(S, StabilizerState.zero(2))
        assert est == pytest.approx(abs(psi.amplitudes[0]) ** 2, abs=0.05)

    def test_self(self, rng):
        phi = stab.random_stabilizer_state(3, rng)
        m, batches = 10_000, 10
        S = sh.collect_shadows(stab.stabilizer_to_dense(phi), m, rng, batch_count=batches)
        assert sh.estimate_stabilizer_fidelity(S, phi) == pytest.approx(1, abs=2 / math.sqrt(m / batches))

    def test_orthogonal(self, rng):
        phi = StabilizerState.zero(2)
        other = StabilizerState(2, phi.generators, (1, 0))
        m, batches = 10_000, 10
        S = sh.collect_shadows(stab.stabilizer_to_dense(phi), m, rng, batch_count=batches)
        assert sh.estimate_stabilizer_fidelity(S, other) == pytest.approx(0, abs=2 / math.sqrt(m / batches))

    def test_t_squared_vs_plus_plus(self, t_state, rng):
        psi = states.tensor(t_state, t_state)
        assert stab.stabilizer_overlap(plus_plus(), psi) == pytest.approx(COS_PI_8_4, abs=1e-12)
        S = sh.collect_shadows(psi, 10_000, rng, batch_count=10)
        assert sh.estimate_stabilizer_fidelity(S, plus_plus()) == pytest.approx(COS_PI_8_4, abs=0.05)

    def test_tableau_matches_dense_exhaustive(self, rng):
        for n in (1, 2, 3):
            phi = stab.random_stabilizer_state(n, rng)
            v = stab.stabilizer_to_dense(phi).amplitudes
            for _ in range(5):
                C = stab.random_clifford(n, rng)
                amps = C.unitary() @ v
                moved = stab.apply_clifford(C, phi)
                for b in range(2**n):
                    assert stab.basis_probability(moved, b) == pytest.approx(abs(amps[b]) ** 2, abs=1e-9)

    def test_paths_agree(self, rng):
        psi = states.haar_random(3, rng)
        S = sh.collect_shadows(psi, 300, rng, batch_count=5)
        for _ in range(3):
            phi = stab.random_stabilizer_state(3, rng)
            dense = sh.per_sample_estimates(S, phi, "dense")
            tab = sh.per_sample_estimates(S, phi, "tableau")
            assert np.max(np.abs(dense - tab)) < 1e-9
            assert sh.estimate_many(S, [phi])[0] == pytest.approx(sh.estimate_stabilizer_fidelity(S, phi))

    def test_tableau_path_above_dense_cap(self, rng):
        n = 7
        phi = stab.random_stabilizer_state(n, rng)
        psi = states.haar_random(n, rng)
        S = sh.collect_shadows(psi, 20, rng)
        v = stab.stabilizer_to_dense(phi).amplitudes
        U = stab.tableau_unitaries(n, S.images, S.phases)
        dense = (2**n + 1) * np.abs(np.einsum("mk,k->m", U[np.arange(20), S.outcomes, :], v)) ** 2 - 1
        assert np.allclose(sh.per_sample_estimates(S, phi), dense)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_single_sample_unbiased(self, n, rng):
        psi = states.haar_random(n, rng)
        phi = stab.random_stabilizer_state(n, rng)
        vals = sh.per_sample_estimates(sh.collect_shadows(psi, 50_000, rng), phi)
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(vals.mean() - stab.stabilizer_overlap(phi, psi)) < 5 * se

    def test_batches_truncate(self, rng):
        S = sh.collect_shadows(states.basis_state(1), 10, rng, batch_count=3)
        assert [sl.stop - sl.start for sl in S.batches()] == [3, 3, 3]
