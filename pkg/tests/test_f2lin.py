import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabkit import f2lin
from stabkit.errors import CapExceededError, ParameterError
from stabkit.f2lin import Subspace, span, symplectic_complement, symplectic_product
from stabkit.oracle import pauli_matrix


def vec(bits: str) -> int:
    return f2lin.from_bits(bits)[0]


def elements_naive(T: Subspace) -> set[int]:
    out = {0}
    for v in T.basis:
        out |= {u ^ v for u in out}
    return out


@st.composite
def vectors(draw, n=3, count=3):
    return [draw(st.integers(0, (1 << (2 * n)) - 1)) for _ in range(count)]


class TestSymplecticProduct:
    def test_x_z_anticommute(self):
        assert symplectic_product(vec("10"), vec("01"), 1) == 1

    def test_alternating(self, rng):
        for x in rng.integers(0, 1 << 8, 20):
            assert symplectic_product(int(x), int(x), 4) == 0

    def test_n2_example(self):
        x, y = vec("1001"), vec("0110")
        assert symplectic_product(x, y, 2) == 0
        X, Y = pauli_matrix(x, 2), pauli_matrix(y, 2)
        assert np.allclose(X @ Y, Y @ X)

    def test_matches_dense_commutation(self):
        n = 2
        for x, y in itertools.product(range(16), repeat=2):
            X, Y = pauli_matrix(x, n), pauli_matrix(y, n)
            assert symplectic_product(x, y, n) == int(not np.allclose(X @ Y, Y @ X))

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            symplectic_product(1 << 4, 1, 2)

    @given(vectors())
    def test_bilinear(self, v):
        a, x, y = v
        assert symplectic_product(a, x ^ y, 3) == symplectic_product(a, x, 3) ^ symplectic_product(a, y, 3)
        assert symplectic_product(a, x, 3) == symplectic_product(x, a, 3)

    def test_array_version(self, rng):
        xs = rng.integers(0, 1 << 10, 50)
        ys = rng.integers(0, 1 << 10, 50)
        got = f2lin.symplectic_product_array(xs, ys, 5)
        assert list(got) == [symplectic_product(int(a), int(b), 5) for a, b in zip(xs, ys)]


class TestSpan:
    def test_empty(self):
        assert span([], 2).dim == 0

    def test_dependent(self):
        e1, e2 = vec("1000"), vec("0100")
        assert span([e1, e2, e1 ^ e2], 2).dim == 2

    def test_random_matches_enumeration(self, rng):
        vs = [int(v) for v in rng.integers(0, 256, 100)]
        T = span(vs, 4)
        reached = {0}
        for v in vs:
            reached |= {u ^ v for u in reached}
        assert len(reached) == 2**T.dim

    @given(vectors(n=3, count=4), st.randoms())
    @settings(max_examples=50)
    def test_rref_canonical(self, vs, r):
        T = span(vs, 3)
        mixed = list(T.basis)
        r.shuffle(mixed)
        for i in range(1, len(mixed)):
            mixed[i] ^= mixed[i - 1]
        assert span(mixed, 3) == T
        assert span(mixed, 3).basis == T.basis

    def test_rejects_non_rref(self):
        with pytest.raises(ParameterError):
            Subspace(1, (0b01, 0b10))


class TestComplement:
    def test_full_space(self):
        assert symplectic_complement(f2lin.full_space(3)).dim == 0

    def test_z_subspace_is_lagrangian(self):
        n = 3
        T = span([f2lin.z_label(n, q) for q in range(n)], n)
        assert symplectic_complement(T) == T
        assert f2lin.is_lagrangian(T)

    def test_double_complement(self, rng):
        for _ in range(30):
            T = f2lin.random_subspace(3, int(rng.integers(0, 7)), rng)
            Tp = T.complement()
            assert T.dim + Tp.dim == 6
            assert Tp.complement() == T

    def test_matches_bruteforce(self, rng):
        for _ in range(10):
            T = f2lin.random_subspace(2, int(rng.integers(0, 5)), rng)
            brute = {a for a in range(16) if all(symplectic_product(x, a, 2) == 0 for x in elements_naive(T))}
            assert set(T.complement()) == brute

    def test_inclusion_reverses(self, rng):
        for _ in range(30):
            S = f2lin.random_subspace(3, int(rng.integers(0, 7)), rng)
            T = f2lin.random_subspace(3, int(rng.integers(0, 7)), rng)
            assert T.issubset(S) == S.complement().issubset(T.complement())
            U = span(list(S.basis[: len(S.basis) // 2]), 3)
            assert U.issubset(S) and S.complement().issubset(U.complement())


class TestIsotropy:
    def test_xz_not_isotropic(self):
        assert not f2lin.is_isotropic(span([vec("10"), vec("01")], 1))

    def test_lagrangian_count_n2(self):
        found = set()
        for pair in itertools.combinations(range(1, 16), 2):
            T = span(pair, 2)
            if f2lin.is_lagrangian(T):
                found.add(T)
        assert len(found) == 15

    def test_character_sum(self, rng):
        for n in (1, 2, 3, 4):
            for _ in range(10):
                T = f2lin.random_subspace(n, int(rng.integers(0, 2 * n + 1)), rng)
                Tp = T.complement()
                x = int(rng.integers(0, 1 << (2 * n)))
                total = sum((-1) ** symplectic_product(a, x, n) for a in T)
                assert total == (len(T) if x in Tp else 0)


class TestEnumerate:
    def test_dim0(self):
        assert list(span([], 2)) == [0]

    def test_dim2(self):
        els = list(span([vec("1000"), vec("0011")], 2))
        assert len(els) == 4 and els[0] == 0
        assert all(a ^ b in els for a in els for b in els)

    def test_dim5_closure(self, rng):
        T = f2lin.random_subspace(4, 5, rng)
        els = set(T)
        assert len(els) == 32
        assert all(a ^ b in els for a in els for b in els)
        assert set(T.elements_array().tolist()) == els

    def test_cap(self, rng):
        T = f2lin.random_subspace(4, 5, rng)
        with pytest.raises(CapExceededError):
            list(f2lin.enumerate_elements(T, cap=4))


def test_bits_roundtrip():
    assert f2lin.to_bits(vec("1001"), 2) == "1001"
    assert f2lin.from_bits("110010") == (0b110010, 3)
    assert f2lin.x_label(2, 0) == vec("1000") and f2lin.z_label(2, 1) == vec("0001")
    with pytest.raises(ParameterError):
        f2lin.from_bits("101")


def test_solve(rng):
    for _ in range(30):
        rows = [int(r) for r in rng.integers(0, 64, 4)]
        rhs = [int(b) for b in rng.integers(0, 2, 4)]
        y = f2lin.solve(rows, rhs, 6)
        brute = [z for z in range(64) if all((r & z).bit_count() % 2 == c for r, c in zip(rows, rhs))]
        assert (y is None) == (not brute)
        if y is not None:
            assert y in brute
