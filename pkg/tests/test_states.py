import io
import math

import numpy as np
import pytest

from stabkit import f2lin, oracle, states
from stabkit.errors import CapExceededError, ParameterError
from stabkit.stabilizer import random_clifford, unsigned_stabilizer_group
from stabkit.states import PureState

COS_PI_8_SQ = 0.8535533905932737  # cos^2(pi/8) = (2 + sqrt 2)/4


def plus() -> PureState:
    return states.from_circuit(1, [states.H(0)])


class TestConstruction:
    def test_h(self):
        assert np.allclose(plus().amplitudes, [1 / math.sqrt(2)] * 2)

    def test_bell(self):
        bell = states.from_circuit(2, [states.H(0), states.CNOT(0, 1)])
        assert np.allclose(bell.amplitudes, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])

    def test_t_state(self, t_state):
        assert np.allclose(t_state.amplitudes, [1 / math.sqrt(2), np.exp(1j * np.pi / 4) / math.sqrt(2)])

    def test_qubit_zero_is_most_significant(self):
        psi = states.from_circuit(2, [states.U1(0, [[0, 1], [1, 0]])])
        assert np.allclose(psi.amplitudes, [0, 0, 1, 0])

    def test_bad_target(self):
        with pytest.raises(ParameterError):
            states.from_circuit(2, [states.H(2)])

    def test_non_unitary(self):
        with pytest.raises(ParameterError):
            states.U1(0, [[1, 0], [0, 1.001]])

    def test_haar_norm_and_seed(self):
        a = states.haar_random(4, np.random.default_rng(3))
        b = states.haar_random(4, np.random.default_rng(3))
        assert abs(np.linalg.norm(a.amplitudes) - 1) < 1e-9
        assert np.array_equal(a.amplitudes, b.amplitudes)

    def test_renormalises_small_error(self):
        psi = PureState(np.array([1 + 5e-7, 0]))
        assert np.linalg.norm(psi.amplitudes) == pytest.approx(1, abs=1e-12)
        with pytest.raises(ParameterError):
            PureState(np.array([1.01, 0]))

    def test_sim_cap(self):
        with pytest.raises(CapExceededError):
            states.basis_state(14)

    def test_parse_circuit(self):
        text = "# prep\nH 0\nCNOT 0 2\nT 1\nU1 1 0 0 1 0 1 0 0 0\n"
        n, gates = states.parse_circuit(text)
        assert n == 3 and [g.name for g in gates] == ["H", "CNOT", "T", "U1"]
        with pytest.raises(ParameterError):
            states.parse_circuit("CNOT 0\n")

    def test_json_roundtrip(self, tmp_path, rng):
        psi = states.haar_random(3, rng)
        states.save_state(psi, tmp_path / "s.json")
        back = states.load_state(tmp_path / "s.json")
        assert np.allclose(back.amplitudes, psi.amplitudes)


class TestExpectations:
    def test_identity_and_basis(self):
        zero = states.basis_state(1)
        assert states.weyl_expectation(zero, 0) == 1
        assert states.weyl_expectation(zero, 0b01) == pytest.approx(1)
        assert states.weyl_expectation(zero, 0b10) == pytest.approx(0)

    def test_t_state(self, t_state):
        # dense 2x2 algebra: <X> = <Y> = cos(pi/4), <Z> = 0
        v = t_state.amplitudes
        X = np.array([[0, 1], [1, 0]])
        Y = np.array([[0, -1j], [1j, 0]])
        assert np.vdot(v, X @ v).real == pytest.approx(1 / math.sqrt(2))
        assert np.vdot(v, Y @ v).real == pytest.approx(1 / math.sqrt(2))
        e = [states.weyl_expectation(t_state, x) for x in range(4)]
        assert np.allclose(e, [1, 0, 1 / math.sqrt(2), 1 / math.sqrt(2)])

    def test_weyl_operators_hermitian(self):
        for x in range(64):
            W = states.weyl_matrix(x, 3)
            assert np.allclose(W, W.conj().T)
            assert np.allclose(W, oracle.pauli_matrix(x, 3))

    def test_table_matches_pointwise(self, rng):
        psi = states.haar_random(3, rng)
        table = psi.expectation_table
        assert np.allclose(table, [states.weyl_expectation(psi, x) for x in range(64)], atol=1e-12)


class TestDistributions:
    def test_zero_state(self):
        n = 3
        p = states.basis_state(n).char_distribution.p
        expect = np.zeros(4**n)
        expect[: 2**n] = 2.0**-n  # labels with a = 0
        assert np.allclose(p, expect)
        assert np.allclose(states.basis_state(n).weyl_distribution.q, expect)

    def test_t_state_tables(self, t_state):
        # order I, Z, X, Y
        assert np.allclose(t_state.char_distribution.p, [0.5, 0, 0.25, 0.25])
        assert np.allclose(t_state.weyl_distribution.q, [0.375, 0.125, 0.25, 0.25])

    def test_normalisation(self, rng):
        for n in range(1, 6):
            psi = states.haar_random(n, rng)
            p = psi.char_distribution.p
            assert p.sum() == pytest.approx(1, abs=1e-9)
            assert p.max() <= 2.0**-n + 1e-12
            assert p[0] == pytest.approx(2.0**-n)
            q = psi.weyl_distribution.q
            assert q.sum() == pytest.approx(1, abs=1e-9)
            # q(0) = sum p^2 >= (sum p)^2 / 4^n; a Haar qubit already has q(0) < 1/2
            assert q[0] >= 4.0**-n - 1e-12

    def test_coefficients(self, rng):
        psi = states.haar_random(3, rng)
        c = states.weyl_coefficients(psi).c
        assert np.sum(c**2) == pytest.approx(1, abs=1e-9)
        assert c[0] == pytest.approx(2**-1.5)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_q_matches_direct_convolution(self, n, rng):
        psi = states.haar_random(n, rng)
        assert np.max(np.abs(psi.weyl_distribution.q - oracle.direct_weyl_distribution(psi))) < 1e-10

    def test_p_matches_kron_oracle(self, rng):
        psi = states.haar_random(3, rng)
        assert np.allclose(psi.char_distribution.p, oracle.characteristic_direct(psi), atol=1e-12)

    def test_clifford_covariance(self, rng):
        n = 3
        psi = states.haar_random(n, rng)
        C = random_clifford(n, rng)
        moved = PureState(C.unitary() @ psi.amplitudes)
        p, pc = psi.char_distribution.p, moved.char_distribution.p
        for x in range(4**n):
            assert pc[C.conjugate(x)[0]] == pytest.approx(p[x], abs=1e-12)


class TestFourier:
    def test_delta(self):
        f = np.zeros(16)
        f[0] = 1
        assert np.allclose(states.symplectic_fourier(f), 1 / 16)

    def test_literal_definition(self, rng):
        n = 2
        f = rng.random(16)
        lit = [sum((-1) ** f2lin.symplectic_product(a, x, n) * f[x] for x in range(16)) / 16 for a in range(16)]
        assert np.allclose(states.symplectic_fourier(f), lit)

    def test_inverse(self, rng):
        f = rng.random(64)
        assert np.allclose(states.inverse_symplectic_fourier(states.symplectic_fourier(f)), f)

    def test_char_distribution_invariant(self, rng):
        for n in (1, 2, 3, 4):
            p = states.haar_random(n, rng).char_distribution.p
            assert np.max(np.abs(2**n * states.symplectic_fourier(p) - p)) < 1e-10

    def test_convolution_theorem(self, rng):
        n = 2
        f, g = rng.random(16), rng.random(16)
        conv = np.array([sum(f[t] * g[t ^ x] for t in range(16)) for x in range(16)]) / 16
        assert np.allclose(states.symplectic_convolution(f, g), conv, atol=1e-12)
        lhs = states.symplectic_fourier(conv)
        assert np.max(np.abs(lhs - states.symplectic_fourier(f) * states.symplectic_fourier(g))) < 1e-10

    def test_bad_length(self):
        with pytest.raises(ParameterError):
            states.symplectic_fourier(np.zeros(8))


class TestFidelityAndMass:
    def test_fidelity(self, t_state):
        assert states.fidelity(t_state, t_state) == pytest.approx(1)
        assert states.fidelity(states.basis_state(2, 0), states.basis_state(2, 3)) == 0
        assert states.fidelity(t_state, plus()) == pytest.approx(COS_PI_8_SQ, abs=1e-12)

    def test_mass_trivial(self, rng):
        psi = states.haar_random(3, rng)
        assert states.subspace_mass(psi.char_distribution, f2lin.full_space(3)) == pytest.approx(1)
        assert states.subspace_mass(psi.char_distribution, f2lin.span([], 3)) == pytest.approx(1 / 8)

    def test_mass_termwise(self, rng):
        psi = states.haar_random(3, rng)
        T = f2lin.random_subspace(3, 3, rng)
        p = psi.char_distribution.p
        assert states.subspace_mass(psi.char_distribution, T) == pytest.approx(sum(p[x] for x in T), abs=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_mass_identities(self, n, rng):
        for _ in range(10):
            psi = states.haar_random(n, rng)
            T = f2lin.random_subspace(n, int(rng.integers(0, 2 * n + 1)), rng)
            Tp = T.complement()
            p, q = psi.char_distribution, psi.weyl_distribution
            assert states.subspace_mass(p, T) == pytest.approx(len(T) / 2**n * states.subspace_mass(p, Tp), abs=1e-9)
            p2 = sum(p.p[x] ** 2 for x in Tp)
            assert states.subspace_mass(q, T) / len(T) == pytest.approx(p2, abs=1e-9)


class TestFidelityBounds:
    """Mass lower bounds on the optimal stabilizer group, against brute force."""

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_bounds(self, n, rng):
        for _ in range(8):
            psi = states.haar_random(n, rng)
            fs, witness = oracle.brute_force_stabilizer_fidelity(psi)
            S = unsigned_stabilizer_group(witness)
            assert f2lin.is_lagrangian(S)
            p, q = psi.char_distribution.p, psi.weyl_distribution.q
            assert sum(p[x] for x in S) >= fs**2 - 1e-12
            for dim in range(n + 1):
                T = f2lin.span(S.basis[:dim], n)
                assert sum(p[x] for x in T) >= len(T) / 2**n * fs**2 - 1e-12
            # every codimension-one subspace of S
            for h in range(1, 2**n):
                T = f2lin.span([g for g in S if (f2lin.reduce(g, S.basis) == 0 and bin(h & _coords(g, S)).count("1") % 2 == 0)], n)
                if T.dim != n - 1:
                    continue
                outside = sum(q[x] for x in S if x not in T)
                assert outside >= (2 - math.sqrt(3)) / 2 * fs**4 - 1e-12


def _coords(x: int, S: f2lin.Subspace) -> int:
    """Coordinates of ``x`` in the RREF basis of ``S`` as a bitmask."""
    out = 0
    for i, g in enumerate(S.basis):
        if x >> (g.bit_length() - 1) & 1:
            x ^= g
            out |= 1 << i
    return out


class TestDump:
    def test_csv(self, t_state):
        buf = io.StringIO()
        states.dump_distribution_csv(t_state.weyl_distribution.q, 1, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "x_bits,value"
        rows = [line.split(",") for line in lines[1:]]
        assert [r[0] for r in rows] == ["00", "01", "10", "11"]
        assert np.allclose([float(r[1]) for r in rows], [0.375, 0.125, 0.25, 0.25])

    def test_cap(self):
        with pytest.raises(CapExceededError):
            states.dump_distribution_csv(np.zeros(4**7), 7, io.StringIO())
