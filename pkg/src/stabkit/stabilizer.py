"""Signed stabilizer states, Clifford tableaux and uniform random Cliffords.

A Clifford tableau stores, for every string position ``j`` of a label (X of
qubit ``j`` for ``j < n``, Z of qubit ``j - n`` otherwise), the image label
``C(e_j)`` and a sign bit ``p_j`` with ``C W_{e_j} C^dag = (-1)^{p_j} W_{C(e_j)}``.
Phases of intermediate products are tracked as powers of ``i`` mod 4.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from . import f2lin
from .errors import ParameterError
from .f2lin import Subspace, _sp
from .states import DIST_CAP, PureState, _check_sim, apply_weyl, popcount

OVERLAP_SUM_CAP = 10


def _label(n: int, j: int) -> int:
    return 1 << (2 * n - 1 - j)


def weyl_product_phase(x: int, y: int, n: int) -> int:
    """Exponent ``e`` (mod 4) with ``W_x W_y = i^e W_{x+y}``."""
    mask = (1 << n) - 1
    a, b = x >> n, x & mask
    c, d = y >> n, y & mask
    e = (a & b).bit_count() + (c & d).bit_count() + 2 * (b & c).bit_count()
    e -= ((a ^ c) & (b ^ d)).bit_count()
    return e % 4


def weyl_product_phase_array(x, y, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    mask = np.int64((1 << n) - 1)
    a, b = x >> n, x & mask
    c, d = y >> n, y & mask
    e = popcount(a & b) + popcount(c & d) + 2 * popcount(b & c) - popcount((a ^ c) & (b ^ d))
    return e % 4


# --------------------------------------------------------------------------
# Clifford tableaux


@dataclass(frozen=True)
class CliffordTableau:
    n: int
    images: tuple[int, ...]
    phases: tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != 2 * self.n or len(self.phases) != 2 * self.n:
            raise ParameterError("tableau needs 2n images and 2n phase bits")
        for v in self.images:
            f2lin.check_vec(v, self.n)
        object.__setattr__(self, "images", tuple(int(v) for v in self.images))
        object.__setattr__(self, "phases", tuple(int(p) & 1 for p in self.phases))

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        return cls(n, tuple(_label(n, j) for j in range(2 * n)), (0,) * (2 * n))

    @classmethod
    def h(cls, n: int, q: int) -> "CliffordTableau":
        im = list(cls.identity(n).images)
        im[q], im[n + q] = _label(n, n + q), _label(n, q)
        return cls(n, tuple(im), (0,) * (2 * n))

    @classmethod
    def s(cls, n: int, q: int) -> "CliffordTableau":
        im = list(cls.identity(n).images)
        im[q] = _label(n, q) | _label(n, n + q)
        return cls(n, tuple(im), (0,) * (2 * n))

    @classmethod
    def cnot(cls, n: int, c: int, t: int) -> "CliffordTableau":
        if c == t:
            raise ParameterError("CNOT control and target coincide")
        im = list(cls.identity(n).images)
        im[c] = _label(n, c) | _label(n, t)
        im[n + t] = _label(n, n + c) | _label(n, n + t)
        return cls(n, tuple(im), (0,) * (2 * n))

    @classmethod
    def from_gates(cls, n: int, gates) -> "CliffordTableau":
        """Tableau of a circuit of H/S/CNOT gates (applied left to right)."""
        tab = cls.identity(n)
        for g in gates:
            if g.name == "H":
                step = cls.h(n, g.qubits[0])
            elif g.name == "S":
                step = cls.s(n, g.qubits[0])
            elif g.name == "CNOT":
                step = cls.cnot(n, *g.qubits)
            else:
                raise ParameterError(f"{g.name} is not a Clifford gate")
            tab = compose(step, tab)
        return tab

    def conjugate(self, x: int) -> tuple[int, int]:
        """Return ``(y, sign)`` with ``C W_x C^dag = sign * W_y``."""
        n = self.n
        f2lin.check_vec(x, n)
        acc = img = 0
        ph = 0
        for j in range(2 * n):
            e = _label(n, j)
            if not x & e:
                continue
            ph += 2 * self.phases[j] - weyl_product_phase(acc, e, n)
            ph += weyl_product_phase(img, self.images[j], n)
            acc ^= e
            img ^= self.images[j]
        ph %= 4
        assert ph in (0, 2), "non-Hermitian image of a Weyl operator"
        return img, 1 - ph

    def is_symplectic(self) -> bool:
        n = self.n
        for i in range(2 * n):
            for j in range(i + 1, 2 * n):
                if _sp(self.images[i], self.images[j], n) != _sp(_label(n, i), _label(n, j), n):
                    return False
        return True

    def inverse(self) -> "CliffordTableau":
        n = self.n
        partner = [j + n if j < n else j - n for j in range(2 * n)]
        images, phases = [], []
        for j in range(2 * n):
            e = _label(n, j)
            # [C^{-1} e_j, e_k] = [e_j, C e_k] fixes the preimage bit by bit
            y = 0
            for k in range(2 * n):
                if _sp(e, self.images[k], n):
                    y |= _label(n, partner[k])
            img, sign = self.conjugate(y)
            assert img == e
            images.append(y)
            phases.append(0 if sign == 1 else 1)
        return CliffordTableau(n, tuple(images), tuple(phases))

    def symplectic_matrix(self) -> np.ndarray:
        """``2n x 2n`` matrix over F2 whose column ``j`` is ``C(e_j)``."""
        n = self.n
        m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        for j, v in enumerate(self.images):
            for i in range(2 * n):
                m[i, j] = v >> (2 * n - 1 - i) & 1
        return m

    def unitary(self) -> np.ndarray:
        """A dense unitary realising this tableau (global phase arbitrary)."""
        _check_sim(self.n)
        im = np.array([self.images], dtype=np.int64)
        ph = np.array([self.phases], dtype=np.int64)
        return tableau_unitaries(self.n, im, ph)[0]

    def to_json(self) -> dict:
        return {"n": self.n, "rows": [f2lin.to_bits(v, self.n) for v in self.images],
                "phases": list(self.phases)}

    @classmethod
    def from_json(cls, obj: dict) -> "CliffordTableau":
        n = int(obj["n"])
        return cls(n, tuple(int(r, 2) for r in obj["rows"]), tuple(obj["phases"]))


def compose(second: CliffordTableau, first: CliffordTableau) -> CliffordTableau:
    """Tableau of ``second * first`` (``first`` acts first)."""
    if second.n != first.n:
        raise ParameterError("composing tableaux of different sizes")
    images, phases = [], []
    for v, p in zip(first.images, first.phases):
        y, sign = second.conjugate(v)
        images.append(y)
        phases.append(p ^ (sign == -1))
    return CliffordTableau(first.n, tuple(images), tuple(phases))


def conjugate_weyl(C: CliffordTableau, x: int) -> tuple[int, int]:
    return C.conjugate(x)


# --------------------------------------------------------------------------
# uniform random Cliffords, batched


def _project_out(r: np.ndarray, pairs, n: int) -> np.ndarray:
    # projection onto the symplectic complement of the hyperbolic pairs chosen so far
    for v, w in pairs:
        r = r ^ (f2lin.symplectic_product_array(r, w, n) * v) ^ (f2lin.symplectic_product_array(r, v, n) * w)
    return r


def random_clifford_batch(n: int, m: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``m`` independent uniform Cliffords as ``(images, phases)`` arrays.

    Images of ``(X_q, Z_q)`` are drawn pair by pair: a uniform nonzero vector
    ``v`` of the current symplectic complement, then a uniform ``w`` in it
    with ``[v, w] = 1``.  Every symplectic matrix arises from exactly one
    sequence of draws with equal probability, and the ``2n`` sign bits are
    uniform, so the result is uniform over the Clifford group mod phase.
    """
    if n < 1 or 2 * n > 62:
        raise ParameterError(f"n={n} outside 1..31 for batched tableaux")
    full = 1 << (2 * n)
    images = np.zeros((m, 2 * n), dtype=np.int64)
    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    for q in range(n):
        v = _project_out(rng.integers(0, full, m, dtype=np.int64), pairs, n)
        bad = v == 0
        while bad.any():
            v[bad] = _project_out(rng.integers(0, full, int(bad.sum()), dtype=np.int64), [(a[bad], b[bad]) for a, b in pairs], n)
            bad = v == 0
        w = _project_out(rng.integers(0, full, m, dtype=np.int64), pairs, n)
        bad = f2lin.symplectic_product_array(v, w, n) == 0
        while bad.any():
            w[bad] = _project_out(rng.integers(0, full, int(bad.sum()), dtype=np.int64), [(a[bad], b[bad]) for a, b in pairs], n)
            bad = f2lin.symplectic_product_array(v, w, n) == 0
        images[:, q] = v
        images[:, n + q] = w
        pairs.append((v, w))
    phases = rng.integers(0, 2, (m, 2 * n), dtype=np.int64)
    return images, phases


def random_clifford(n: int, rng: np.random.Generator) -> CliffordTableau:
    images, phases = random_clifford_batch(n, 1, rng)
    return CliffordTableau(n, tuple(int(v) for v in images[0]), tuple(int(p) for p in phases[0]))


def _weyl_batch(x: np.ndarray, vec: np.ndarray, n: int) -> np.ndarray:
    """Apply ``W_{x[s]}`` to ``vec[s]`` along axis 1 for every batch entry ``s``."""
    N = 1 << n
    mask = np.int64(N - 1)
    a, b = x >> n, x & mask
    k = np.arange(N, dtype=np.int64)
    ph = (1j) ** (popcount(a & b) % 4)
    ph = ph[:, None] * np.where(popcount(k[None, :] & b[:, None]) & 1, -1.0, 1.0)
    idx = k[None, :] ^ a[:, None]
    if vec.ndim == 3:
        return np.take_along_axis(vec * ph[:, :, None], idx[:, :, None], axis=1)
    return np.take_along_axis(vec * ph, idx, axis=1)


def tableau_unitaries(n: int, images: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Dense unitaries ``(m, 2^n, 2^n)`` for a batch of tableaux.

    Column 0 is the state stabilised by the signed Z images (obtained by
    applying the stabiliser projector to every basis vector and keeping the
    largest column); column ``k`` applies the signed X images selected by the
    bits of ``k``.
    """
    m = images.shape[0]
    N = 1 << n
    sgn = np.where(phases & 1, -1.0, 1.0)
    proj = np.broadcast_to(np.eye(N, dtype=complex), (m, N, N)).copy()
    for q in range(n):
        proj = 0.5 * (proj + sgn[:, n + q, None, None] * _weyl_batch(images[:, n + q], proj, n))
    norms = np.einsum("mij,mij->mj", proj.conj(), proj).real
    best = np.argmax(norms, axis=1)
    phi0 = proj[np.arange(m), :, best]
    phi0 /= np.linalg.norm(phi0, axis=1, keepdims=True)
    U = np.empty((m, N, N), dtype=complex)
    U[:, :, 0] = phi0
    for k in range(1, N):
        j = (k & -k).bit_length() - 1
        q = n - 1 - j
        U[:, :, k] = sgn[:, q, None] * _weyl_batch(images[:, q], U[:, :, k ^ (1 << j)], n)
    return U


# --------------------------------------------------------------------------
# stabilizer states


def _signed_rref(gens: Sequence[int], signs: Sequence[int], n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    rows: list[tuple[int, int]] = []
    for g, s in zip(gens, signs):
        for r, rs in rows:
            if g >> (r.bit_length() - 1) & 1:
                s ^= rs ^ (weyl_product_phase(g, r, n) >> 1)
                g ^= r
        if not g:
            if s:
                raise ParameterError("inconsistent signs: -I in the stabilizer group")
            continue
        p = g.bit_length() - 1
        new_rows = []
        for r, rs in rows:
            if r >> p & 1:
                rs ^= s ^ (weyl_product_phase(r, g, n) >> 1)
                r ^= g
            new_rows.append((r, rs))
        new_rows.append((g, s))
        new_rows.sort(reverse=True)
        rows = new_rows
    return tuple(r for r, _ in rows), tuple(s for _, s in rows)


@dataclass(frozen=True)
class StabilizerState:
    """Stabiliser state given by ``n`` commuting generators and sign bits.

    ``W_{g_i} |phi> = (-1)^{s_i} |phi>``.  Generators are brought to the RREF
    basis of their span on construction (signs transformed accordingly), so
    equal states compare equal.
    """

    n: int
    generators: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        n = self.n
        gens = [int(g) for g in self.generators]
        signs = [int(s) & 1 for s in self.signs]
        if len(gens) != n or len(signs) != n:
            raise ParameterError("need exactly n generators and n signs")
        for g in gens:
            f2lin.check_vec(g, n)
        for i in range(n):
            for j in range(i + 1, n):
                if _sp(gens[i], gens[j], n):
                    raise ParameterError("generators do not commute")
        g2, s2 = _signed_rref(gens, signs, n)
        if len(g2) != n:
            raise ParameterError("generators are linearly dependent")
        object.__setattr__(self, "generators", g2)
        object.__setattr__(self, "signs", s2)

    @classmethod
    def zero(cls, n: int) -> "StabilizerState":
        return cls(n, tuple(f2lin.z_label(n, q) for q in range(n)), (0,) * n)

    @property
    def weyl_group(self) -> Subspace:
        return Subspace(self.n, self.generators)

    def sort_key(self) -> tuple:
        return (self.generators, self.signs)

    def sign_of(self, x: int) -> int:
        """Eigenvalue of ``W_x`` on this state (``x`` must lie in the group)."""
        acc, s = 0, 0
        for g, gs in zip(self.generators, self.signs):
            if x >> (g.bit_length() - 1) & 1:
                s ^= gs ^ (weyl_product_phase(acc, g, self.n) >> 1)
                acc ^= g
                x ^= g
        if x:
            raise ParameterError("label is not in the stabiliser group")
        return -1 if s else 1

    def group_elements(self) -> tuple[np.ndarray, np.ndarray]:
        """All ``2^n`` labels of the group with their eigenvalues (+1/-1)."""
        labels = np.zeros(1, dtype=np.int64)
        bits = np.zeros(1, dtype=np.int64)
        for g, s in zip(self.generators, self.signs):
            ph = weyl_product_phase_array(labels, g, self.n) >> 1
            bits = np.concatenate([bits, bits ^ s ^ ph])
            labels = np.concatenate([labels, labels ^ np.int64(g)])
        return labels, 1 - 2 * bits

    def to_json(self) -> dict:
        return {"n": self.n, "generators": [f2lin.to_bits(g, self.n) for g in self.generators],
                "signs": list(self.signs)}

    @classmethod
    def from_json(cls, obj: dict) -> "StabilizerState":
        n = int(obj["n"])
        return cls(n, tuple(int(g, 2) for g in obj["generators"]), tuple(obj["signs"]))


def _z_constraints(phi: StabilizerState) -> tuple[list[int], list[int], int]:
    # RREF rows with pivot in the Z half have zero X part and span the Z-type subgroup
    n = phi.n
    zs, rhs, rank_x = [], [], 0
    for g, s in zip(phi.generators, phi.signs):
        if g >> n:
            rank_x += 1
        else:
            zs.append(g)
            rhs.append(s)
    return zs, rhs, rank_x


def basis_probability(phi: StabilizerState, b: int) -> float:
    """``|<b|phi>|^2`` from the tableau: ``2^{-rank}`` of the X block, or 0."""
    zs, rhs, rank_x = _z_constraints(phi)
    for z, s in zip(zs, rhs):
        if (z & b).bit_count() & 1 != s:
            return 0.0
    return 2.0 ** (-rank_x)


def stabilizer_to_dense(phi: StabilizerState) -> PureState:
    n = phi.n
    _check_sim(n)
    zs, rhs, _ = _z_constraints(phi)
    k = f2lin.solve(zs, rhs, n)
    assert k is not None, "inconsistent sign character"
    v = np.zeros(1 << n, dtype=complex)
    v[k] = 1
    for g, s in zip(phi.generators, phi.signs):
        v = 0.5 * (v + (-1) ** s * apply_weyl(g, v, n))
    return PureState.normalized(v)


def _expectations(psi: PureState, labels: np.ndarray) -> np.ndarray:
    n = psi.n
    N = 1 << n
    mask = np.int64(N - 1)
    a, b = labels >> n, labels & mask
    k = np.arange(N, dtype=np.int64)
    v = psi.amplitudes
    sign = np.where(popcount(k[None, :] & b[:, None]) & 1, -1.0, 1.0)
    vals = (v.conj()[k[None, :] ^ a[:, None]] * sign * v[None, :]).sum(axis=1)
    return (vals * (1j) ** (popcount(a & b) % 4)).real


def stabilizer_overlap(phi: StabilizerState, psi: PureState) -> float:
    """``|<phi|psi>|^2 = 2^{-n} sum_{x in S} s(x) <psi|W_x|psi>``."""
    if phi.n != psi.n:
        raise ParameterError("state sizes differ")
    if phi.n > OVERLAP_SUM_CAP:
        return float(abs(np.vdot(stabilizer_to_dense(phi).amplitudes, psi.amplitudes)) ** 2)
    labels, signs = phi.group_elements()
    val = float((signs * _expectations(psi, labels)).sum()) / (1 << phi.n)
    return min(max(val, 0.0), 1.0)


def unsigned_stabilizer_group(psi: PureState, tol: float = 1e-6) -> Subspace:
    """Span of ``{x : |<psi|W_x|psi>| >= 1 - tol}``."""
    _check_sim(psi.n, DIST_CAP)
    labels = np.flatnonzero(np.abs(psi.expectation_table) >= 1 - tol)
    S = f2lin.span((int(x) for x in labels), psi.n)
    assert f2lin.is_isotropic(S), "unsigned stabiliser group is not isotropic"
    return S


def stabilizer_dimension(psi: PureState, tol: float = 1e-6) -> int:
    return unsigned_stabilizer_group(psi, tol).dim


def enumerate_stabilizer_states_for_group(S: Subspace) -> Iterator[StabilizerState]:
    """The ``2^n`` states with ``Weyl(phi) = S``, signs in lexicographic order."""
    if not f2lin.is_lagrangian(S):
        raise ParameterError("subspace is not Lagrangian")
    for signs in itertools.product((0, 1), repeat=S.n):
        yield StabilizerState(S.n, S.basis, signs)


def apply_clifford(C: CliffordTableau, phi: StabilizerState) -> StabilizerState:
    gens, signs = [], []
    for g, s in zip(phi.generators, phi.signs):
        y, sign = C.conjugate(g)
        gens.append(y)
        signs.append(s ^ (sign == -1))
    return StabilizerState(phi.n, tuple(gens), tuple(signs))


def random_stabilizer_state(n: int, rng: np.random.Generator) -> StabilizerState:
    C = random_clifford(n, rng)
    return StabilizerState(n, C.images[n:], C.phases[n:])


def clifford_to_zero(phi: StabilizerState, subspace: Optional[Subspace] = None) -> CliffordTableau:
    """A Clifford ``C`` with ``C|phi> = |0^n>`` and ``C(Weyl(phi)) = 0^n x F2^n``.

    If ``subspace`` (a ``t``-codimensional subspace of ``Weyl(phi)``) is given,
    ``C`` additionally maps it onto the span of ``Z_t, ..., Z_{n-1}``.
    """
    n = phi.n
    S = phi.weyl_group
    if subspace is None:
        gens = list(phi.generators)
    else:
        if not subspace.issubset(S):
            raise ParameterError("subspace is not contained in Weyl(phi)")
        ext = []
        cur = list(subspace.basis)
        for g in S.basis:
            if f2lin.rank(cur + [g]) > len(cur):
                cur.append(g)
                ext.append(g)
        gens = ext + list(subspace.basis)
    signs = [0 if phi.sign_of(g) == 1 else 1 for g in gens]
    # destabilisers: h_i commutes with every g_j except g_i
    hs = []
    for i in range(n):
        K = f2lin.span((g for j, g in enumerate(gens) if j != i), n).complement()
        hs.append(next(v for v in K.basis if v not in S))
    for j in range(n):
        for i in range(j):
            if _sp(hs[i], hs[j], n):
                hs[j] ^= gens[i]
    D = CliffordTableau(n, tuple(hs) + tuple(gens), (0,) * n + tuple(signs))
    assert D.is_symplectic()
    return D.inverse()
