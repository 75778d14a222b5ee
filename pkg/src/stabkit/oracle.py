"""Brute-force reference implementations for tests.

Nothing here touches the transform, tableau or clique code: Pauli matrices
are built by explicit Kronecker products and sums are taken literally.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError
from .states import PureState

CATALOG_CAP = 3
DIRECT_CAP = 4
ETA_CAP = 8
NAIVE_CLIQUE_CAP = 15

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SINGLE = {(0, 0): _I2, (1, 0): _X, (0, 1): _Z, (1, 1): _Y}


def pauli_matrix(x: int, n: int) -> np.ndarray:
    """Dense ``W_x`` as a Kronecker product of I, X, Z, Y (qubit 0 leftmost)."""
    out = np.ones((1, 1), dtype=complex)
    for q in range(n):
        a = x >> (2 * n - 1 - q) & 1
        b = x >> (n - 1 - q) & 1
        out = np.kron(out, _SINGLE[(a, b)])
    return out


def _commute(x: int, y: int, n: int) -> bool:
    s = 0
    for q in range(n):
        ax, bx = x >> (2 * n - 1 - q) & 1, x >> (n - 1 - q) & 1
        ay, by = y >> (2 * n - 1 - q) & 1, y >> (n - 1 - q) & 1
        s += ax * by + bx * ay
    return s % 2 == 0


def lagrangian_subspaces(n: int) -> list[frozenset[int]]:
    """Every Lagrangian subspace as its element set, grown by isotropic extension."""
    level = {frozenset({0})}
    for _ in range(n):
        nxt = set()
        for T in level:
            for v in range(1, 1 << (2 * n)):
                if v in T or not all(_commute(v, t, n) for t in T):
                    continue
                nxt.add(frozenset(T | {t ^ v for t in T}))
        level = nxt
    return sorted(level, key=lambda T: sorted(T))


def _ray_key(v: np.ndarray) -> tuple:
    k = int(np.flatnonzero(np.abs(v) > 1e-9)[0])
    v = v * (abs(v[k]) / v[k])
    return tuple(np.round(v.real, 9) + 0.0) + tuple(np.round(v.imag, 9) + 0.0)


@dataclass(frozen=True)
class StabilizerCatalog:
    n: int
    states: tuple[PureState, ...]
    provenance: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __len__(self) -> int:
        return len(self.states)

    def matrix(self) -> np.ndarray:
        return np.stack([s.amplitudes for s in self.states])

    def to_json(self) -> dict:
        n = self.n
        return {
            "n": n,
            "count": len(self.states),
            "states": [
                {
                    "generators": [format(g, f"0{2 * n}b") for g in gens],
                    "signs": list(signs),
                    "amplitudes": [[float(a.real), float(a.imag)] for a in st.amplitudes],
                }
                for st, (gens, signs) in zip(self.states, self.provenance)
            ],
        }


def _independent_basis(T: frozenset[int]) -> tuple[int, ...]:
    basis: list[int] = []
    reached = {0}
    for v in sorted(T):
        if v not in reached:
            basis.append(v)
            reached |= {r ^ v for r in reached}
    return tuple(basis)


@functools.lru_cache(maxsize=None)
def catalog(n: int) -> StabilizerCatalog:
    """All ``n``-qubit stabilizer states as dense vectors, distinct as rays."""
    if not 1 <= n <= CATALOG_CAP:
        raise CapExceededError(f"catalog supports n in 1..{CATALOG_CAP}")
    N = 1 << n
    states, prov, seen = [], [], set()
    for T in lagrangian_subspaces(n):
        gens = _independent_basis(T)
        for signs in itertools.product((0, 1), repeat=n):
            P = np.eye(N, dtype=complex)
            for g, s in zip(gens, signs):
                P = P @ (np.eye(N) + (-1) ** s * pauli_matrix(g, n)) / 2
            col = P[:, int(np.argmax(np.linalg.norm(P, axis=0)))]
            col = col / np.linalg.norm(col)
            key = _ray_key(col)
            if key in seen:
                continue
            seen.add(key)
            states.append(PureState(col))
            prov.append((gens, signs))
    return StabilizerCatalog(n, tuple(states), tuple(prov))


def clifford_orbit_size(n: int) -> int:
    """Number of rays reached from ``|0^n>`` by H, S and CNOT gates (breadth-first)."""
    if not 1 <= n <= CATALOG_CAP:
        raise CapExceededError(f"orbit search supports n in 1..{CATALOG_CAP}")
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.diag([1, 1j])
    gates = []
    for q in range(n):
        for g in (h, s):
            gates.append(np.kron(np.kron(np.eye(1 << q), g), np.eye(1 << (n - q - 1))))
    N = 1 << n
    for c, t in itertools.permutations(range(n), 2):
        M = np.zeros((N, N))
        for k in range(N):
            cb = k >> (n - 1 - c) & 1
            M[k ^ (cb << (n - 1 - t)), k] = 1
        gates.append(M)
    start = np.zeros(N, dtype=complex)
    start[0] = 1
    seen = {_ray_key(start)}
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            for G in gates:
                w = G @ v
                key = _ray_key(w)
                if key not in seen:
                    seen.add(key)
                    nxt.append(w)
        frontier = nxt
    return len(seen)


def brute_force_stabilizer_fidelity(psi: PureState, tol: float = 1e-9) -> tuple[float, PureState]:
    """Exact stabilizer fidelity and the first catalog state attaining it."""
    if psi.n > CATALOG_CAP:
        raise CapExceededError(f"brute force supports n <= {CATALOG_CAP}")
    cat = catalog(psi.n)
    fids = np.abs(cat.matrix().conj() @ psi.amplitudes) ** 2
    best = float(fids.max())
    idx = int(np.flatnonzero(fids >= best - tol)[0])
    return min(best, 1.0), cat.states[idx]


def characteristic_direct(psi: PureState) -> np.ndarray:
    """``p(x) = <psi|W_x|psi>^2 / 2^n`` from explicit Pauli matrices."""
    n = psi.n
    v = psi.amplitudes
    return np.array([np.vdot(v, pauli_matrix(x, n) @ v).real ** 2 for x in range(4**n)]) / 2**n


def direct_weyl_distribution(psi: PureState) -> np.ndarray:
    """``q(x) = sum_y p(y) p(x + y)`` as a literal double sum."""
    n = psi.n
    if n > DIRECT_CAP:
        raise CapExceededError(f"direct convolution supports n <= {DIRECT_CAP}")
    p = characteristic_direct(psi)
    M = 4**n
    q = np.zeros(M)
    for x in range(M):
        q[x] = sum(p[y] * p[x ^ y] for y in range(M))
    return q


def _characteristic_by_sign_matrix(psi: PureState) -> np.ndarray:
    # <W_(a,b)> = i^{|a.b|} sum_k (-1)^{k.b} conj(psi[k^a]) psi[k], summed with a dense sign matrix
    n = psi.n
    N = 1 << n
    k = np.arange(N)
    v = psi.amplitudes
    signs = np.array([[(-1) ** bin(kk & b).count("1") for kk in range(N)] for b in range(N)], dtype=float)
    rows = v.conj()[k[:, None] ^ k[None, :]] * v[None, :]  # rows[a, k]
    E = rows @ signs.T  # E[a, b]
    phase = np.array([[1j ** (bin(a & b).count("1") % 4) for b in range(N)] for a in range(N)])
    return ((E * phase).real ** 2).reshape(-1) / N


def exact_eta(psi: PureState) -> float:
    """``eta = 4^n sum_x p(x)^3``."""
    if psi.n > ETA_CAP:
        raise CapExceededError(f"exact eta supports n <= {ETA_CAP}")
    p = _characteristic_by_sign_matrix(psi)
    return float(4**psi.n * np.sum(p**3))


def naive_maximal_cliques(adjacency) -> list[tuple[int, ...]]:
    """Maximal cliques by testing every vertex subset (indices, sorted)."""
    adj = list(getattr(adjacency, "adjacency", adjacency))
    v = len(adj)
    if v > NAIVE_CLIQUE_CAP:
        raise CapExceededError(f"naive enumeration supports at most {NAIVE_CLIQUE_CAP} vertices")
    edge = [[bool(adj[i] >> j & 1) for j in range(v)] for i in range(v)]
    cliques = []
    for r in range(v + 1):
        for sub in itertools.combinations(range(v), r):
            if all(edge[i][j] for i, j in itertools.combinations(sub, 2)):
                cliques.append(sub)
    out = []
    for c in cliques:
        rest = [u for u in range(v) if u not in c]
        if not any(all(edge[u][w] for w in c) for u in rest):
            out.append(c)
    return sorted(out)
