"""Linear algebra over F2^{2n} with the symplectic form.

A vector ``x = (a, b)`` is stored as a Python ``int`` holding ``2n`` bits.
The text form is the bitstring ``a_1 .. a_n b_1 .. b_n`` written MSB-left, so
``int(s, 2)`` recovers the packed value and string position ``j`` is integer
bit ``2n - 1 - j``.  Qubit ``q`` owns string positions ``q`` (X part) and
``n + q`` (Z part).

Python integers already behave as packed machine words under ``^``, ``&`` and
``bit_count``, which is all Gaussian elimination needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapExceededError, ParameterError

F2Vec = int

MAX_QUBITS = 32
ENUMERATION_CAP = 24


def _check_n(n: int) -> None:
    if not 0 <= n <= MAX_QUBITS:
        raise CapExceededError(f"n={n} outside supported range 0..{MAX_QUBITS}")


def check_vec(x: F2Vec, n: int) -> None:
    if x < 0 or x >> (2 * n):
        raise ParameterError(f"vector {x:#x} does not fit in F2^{2 * n}")


def to_bits(x: F2Vec, n: int) -> str:
    """Bitstring of length ``2n``, a-part first."""
    check_vec(x, n)
    return format(x, f"0{2 * n}b") if n else ""


def from_bits(s: str) -> tuple[F2Vec, int]:
    """Parse a bitstring; returns ``(x, n)``."""
    s = s.strip()
    if len(s) % 2 or any(c not in "01" for c in s):
        raise ParameterError(f"not an even-length bitstring: {s!r}")
    return (int(s, 2) if s else 0), len(s) // 2


def x_label(n: int, q: int) -> F2Vec:
    """Label of the single-qubit X on qubit ``q``."""
    return 1 << (2 * n - 1 - q)


def z_label(n: int, q: int) -> F2Vec:
    """Label of the single-qubit Z on qubit ``q``."""
    return 1 << (n - 1 - q)


def split(x: F2Vec, n: int) -> tuple[int, int]:
    """Return ``(a, b)`` as n-bit integers."""
    return x >> n, x & ((1 << n) - 1)


def swap_halves(x: F2Vec, n: int) -> F2Vec:
    a, b = split(x, n)
    return (b << n) | a


def symplectic_product(x: F2Vec, y: F2Vec, n: int) -> int:
    """``[x, y] = a.b' + b.a' mod 2``."""
    check_vec(x, n)
    check_vec(y, n)
    return _sp(x, y, n)


def _sp(x: int, y: int, n: int) -> int:
    mask = (1 << n) - 1
    return (((x >> n) & y & mask) ^ (x & mask & (y >> n))).bit_count() & 1


def symplectic_product_array(x, y, n: int) -> np.ndarray:
    """Vectorised symplectic product on integer arrays (broadcasting)."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    mask = np.int64((1 << n) - 1)
    v = ((x >> n) & y & mask) ^ (x & mask & (y >> n))
    return (np.bitwise_count(v) & 1).astype(np.int64)


def _rref(vectors: Iterable[int]) -> tuple[int, ...]:
    rows: list[int] = []  # kept sorted by pivot, highest first
    for v in vectors:
        for r in rows:
            if v >> (r.bit_length() - 1) & 1:
                v ^= r
        if not v:
            continue
        p = v.bit_length() - 1
        rows = [r ^ v if r >> p & 1 else r for r in rows]
        rows.append(v)
        rows.sort(reverse=True)
    return tuple(rows)


def rank(vectors: Iterable[int]) -> int:
    return len(_rref(vectors))


def reduce(x: int, basis: Sequence[int]) -> int:
    """Residue of ``x`` after elimination against an RREF basis."""
    for r in basis:
        if x >> (r.bit_length() - 1) & 1:
            x ^= r
    return x


def kernel(rows: Iterable[int], nbits: int) -> tuple[int, ...]:
    """Basis of ``{y : popcount(r & y) even for every row r}``."""
    red = _rref(rows)
    pivots = {r.bit_length() - 1: r for r in red}
    out = []
    for f in range(nbits):
        if f in pivots:
            continue
        y = 1 << f
        for p, r in pivots.items():
            if r >> f & 1:
                y |= 1 << p
        out.append(y)
    return _rref(out)


def solve(rows: Sequence[int], rhs: Sequence[int], nbits: int) -> int | None:
    """One solution ``y`` of ``popcount(rows[i] & y) = rhs[i] (mod 2)``, or None."""
    aug = _rref((r << 1) | (c & 1) for r, c in zip(rows, rhs))
    y = 0
    for r in aug:
        if r == 1:
            return None
        p = r.bit_length() - 2
        if r & 1:
            y |= 1 << p
    return y


@dataclass(frozen=True)
class Subspace:
    """A subspace of F2^{2n}, stored by its reduced row-echelon basis.

    The RREF is canonical (pivots are leading bits, highest first), so two
    ``Subspace`` objects are equal exactly when they span the same set.
    """

    n: int
    basis: tuple[int, ...]

    def __post_init__(self):
        _check_n(self.n)
        for v in self.basis:
            check_vec(v, self.n)
        if _rref(self.basis) != tuple(self.basis):
            raise ParameterError("basis is not in reduced row-echelon form")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return 1 << self.dim

    def __contains__(self, x: int) -> bool:
        return reduce(x, self.basis) == 0

    def __iter__(self) -> Iterator[int]:
        return enumerate_elements(self)

    def issubset(self, other: "Subspace") -> bool:
        return all(v in other for v in self.basis)

    def complement(self) -> "Subspace":
        return symplectic_complement(self)

    def to_bits(self) -> list[str]:
        return [to_bits(v, self.n) for v in self.basis]

    def elements_array(self, cap: int = ENUMERATION_CAP) -> np.ndarray:
        if self.dim > cap:
            raise CapExceededError(f"subspace of dim {self.dim} exceeds enumeration cap {cap}")
        out = np.zeros(1, dtype=np.int64)
        for v in self.basis:
            out = np.concatenate([out, out ^ np.int64(v)])
        return out


def span(vectors: Iterable[int], n: int) -> Subspace:
    vectors = list(vectors)
    for v in vectors:
        check_vec(v, n)
    return Subspace(n, _rref(vectors))


def full_space(n: int) -> Subspace:
    return span((1 << i for i in range(2 * n)), n)


def symplectic_complement(T: Subspace) -> Subspace:
    """``T^perp`` as the kernel of the half-swapped basis matrix."""
    n = T.n
    return Subspace(n, kernel((swap_halves(v, n) for v in T.basis), 2 * n))


def is_isotropic(T: Subspace) -> bool:
    b = T.basis
    return all(_sp(b[i], b[j], T.n) == 0 for i in range(len(b)) for j in range(i + 1, len(b)))


def is_lagrangian(T: Subspace) -> bool:
    return T.dim == T.n and is_isotropic(T)


def enumerate_elements(T: Subspace, cap: int = ENUMERATION_CAP) -> Iterator[int]:
    """Yield every element of ``T`` once, in Gray-code order starting at 0."""
    if T.dim > cap:
        raise CapExceededError(f"subspace of dim {T.dim} exceeds enumeration cap {cap}")
    x = 0
    yield x
    for i in range(1, 1 << T.dim):
        x ^= T.basis[(i & -i).bit_length() - 1]
        yield x


def random_subspace(n: int, dim: int, rng: np.random.Generator) -> Subspace:
    """Uniformly random subspace of the given dimension (by rejection)."""
    if not 0 <= dim <= 2 * n:
        raise ParameterError(f"dim {dim} outside 0..{2 * n}")
    while True:
        vecs = [int(v) for v in rng.integers(0, 1 << (2 * n), size=dim)]
        T = span(vecs, n)
        if T.dim == dim:
            return T
