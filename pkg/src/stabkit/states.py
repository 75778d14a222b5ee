"""Dense pure-state simulation and the Weyl-label distributions.

Basis index convention: qubit 0 is the most significant bit of a basis index,
which makes the X-part ``a`` of a label act on an index as ``k ^ a`` and the
Z-part ``b`` contribute the sign ``(-1)^{popcount(k & b)}``.

Weyl operators carry the phase ``i^{a.b}`` (integer dot product), so every
``W_x`` is Hermitian and its expectation values are real.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from . import f2lin
from .errors import CapExceededError, ParameterError
from .f2lin import Subspace

SIM_CAP = 13
DIST_CAP = 10
DUMP_CAP = 6
NORM_TOL = 1e-6

_ISQ2 = 1 / np.sqrt(2)
H_MATRIX = np.array([[_ISQ2, _ISQ2], [_ISQ2, -_ISQ2]], dtype=complex)
S_MATRIX = np.diag([1, 1j]).astype(complex)
T_MATRIX = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)


def _check_sim(n: int, cap: int = SIM_CAP) -> None:
    if n < 0 or n > cap:
        raise CapExceededError(f"n={n} exceeds the cap of {cap} qubits")


def popcount(arr) -> np.ndarray:
    return np.bitwise_count(np.asarray(arr, dtype=np.int64)).astype(np.int64)


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector of ``2**n`` amplitudes; read-only after construction.

    Inputs within ``1e-6`` of unit norm are renormalised; anything further
    off is rejected (use :meth:`normalized` to rescale deliberately).
    """

    amplitudes: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dim = amps.size
        n = dim.bit_length() - 1
        if dim < 1 or 1 << n != dim:
            raise ParameterError(f"amplitude count {dim} is not a power of two")
        _check_sim(n)
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > NORM_TOL:
            raise ParameterError(f"state norm {norm:.9g} deviates from 1 by more than {NORM_TOL}")
        amps = amps / norm
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "n", n)

    @classmethod
    def normalized(cls, vec) -> "PureState":
        vec = np.asarray(vec, dtype=complex)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ParameterError("cannot normalise the zero vector")
        return cls(vec / norm)

    @property
    def dim(self) -> int:
        return 1 << self.n

    @cached_property
    def expectation_table(self) -> np.ndarray:
        """``<psi|W_x|psi>`` for all ``4**n`` labels, indexed by packed label."""
        return _expectation_table(self)

    @cached_property
    def char_distribution(self) -> "CharDistribution":
        return char_distribution(self)

    @cached_property
    def weyl_distribution(self) -> "WeylDistribution":
        return weyl_distribution(self)

    def to_json(self) -> dict:
        return {"n": self.n, "amplitudes": [[float(z.real), float(z.imag)] for z in self.amplitudes]}

    @classmethod
    def from_json(cls, obj: dict) -> "PureState":
        amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
        st = cls(amps)
        if "n" in obj and int(obj["n"]) != st.n:
            raise ParameterError(f"state file declares n={obj['n']} but holds {amps.size} amplitudes")
        return st

    def __repr__(self) -> str:
        return f"PureState(n={self.n})"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeylCoefficients:
    n: int
    c: np.ndarray


@dataclass(frozen=True, eq=False)
class CharDistribution:
    n: int
    p: np.ndarray


@dataclass(frozen=True, eq=False)
class WeylDistribution:
    n: int
    q: np.ndarray


# --------------------------------------------------------------------------
# construction


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    matrix: np.ndarray | None = field(default=None, compare=False)


def H(q: int) -> Gate:
    return Gate("H", (q,))


def S(q: int) -> Gate:
    return Gate("S", (q,))


def T(q: int) -> Gate:
    return Gate("T", (q,))


def CNOT(c: int, t: int) -> Gate:
    return Gate("CNOT", (c, t))


def U1(q: int, matrix) -> Gate:
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise ParameterError("U1 needs a 2x2 matrix")
    if np.linalg.norm(m.conj().T @ m - np.eye(2)) > 1e-9:
        raise ParameterError("U1 matrix is not unitary")
    return Gate("U1", (q,), m)


CLIFFORD_GATES = frozenset({"H", "S", "CNOT"})


def _apply_1q(vec: np.ndarray, n: int, q: int, m: np.ndarray) -> np.ndarray:
    t = vec.reshape((2,) * n)
    t = np.moveaxis(np.tensordot(m, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def _apply_cnot(vec: np.ndarray, n: int, c: int, t: int) -> np.ndarray:
    k = np.arange(1 << n)
    cbit = 1 << (n - 1 - c)
    tbit = 1 << (n - 1 - t)
    src = np.where(k & cbit, k ^ tbit, k)
    return vec[src]


def apply_gate(vec: np.ndarray, n: int, gate: Gate) -> np.ndarray:
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ParameterError(f"gate {gate.name} targets qubit {q} outside [0, {n})")
    if gate.name == "CNOT":
        c, t = gate.qubits
        if c == t:
            raise ParameterError("CNOT control and target coincide")
        return _apply_cnot(vec, n, c, t)
    mats = {"H": H_MATRIX, "S": S_MATRIX, "T": T_MATRIX}
    if gate.name in mats:
        return _apply_1q(vec, n, gate.qubits[0], mats[gate.name])
    if gate.name == "U1":
        m = np.asarray(gate.matrix, dtype=complex)
        if m.shape != (2, 2) or np.linalg.norm(m.conj().T @ m - np.eye(2)) > 1e-9:
            raise ParameterError("U1 matrix is not unitary")
        return _apply_1q(vec, n, gate.qubits[0], m)
    raise ParameterError(f"unknown gate {gate.name!r}")


def basis_state(n: int, k: int = 0) -> PureState:
    _check_sim(n)
    v = np.zeros(1 << n, dtype=complex)
    v[k] = 1
    return PureState(v)


def from_circuit(n: int, gates: Sequence[Gate]) -> PureState:
    """Run ``gates`` on ``|0...0>`` and return the exact output state."""
    _check_sim(n)
    vec = np.zeros(1 << n, dtype=complex)
    vec[0] = 1
    for g in gates:
        vec = apply_gate(vec, n, g)
    return PureState(vec)


def parse_circuit(text: str) -> tuple[int, list[Gate]]:
    """Parse the line-oriented circuit format; ``n`` is inferred from targets.

    Lines look like ``H 0``, ``CNOT 0 1`` or ``U1 q re00 im00 re01 im01 re10
    im10 re11 im11``; blank lines and ``#`` comments are skipped.
    """
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        name = tok[0].upper()
        try:
            if name in ("H", "S", "T") and len(tok) == 2:
                gates.append(Gate(name, (int(tok[1]),)))
            elif name == "CNOT" and len(tok) == 3:
                gates.append(CNOT(int(tok[1]), int(tok[2])))
            elif name == "U1" and len(tok) == 10:
                v = [float(t) for t in tok[2:]]
                m = np.array([[complex(v[0], v[1]), complex(v[2], v[3])],
                              [complex(v[4], v[5]), complex(v[6], v[7])]])
                gates.append(U1(int(tok[1]), m))
            else:
                raise ParameterError(f"malformed gate {line!r}")
        except ValueError as exc:
            raise ParameterError(f"circuit line {lineno}: {exc}") from None
    n = 1 + max((q for g in gates for q in g.qubits), default=0)
    return n, gates


def haar_random(n: int, rng: np.random.Generator) -> PureState:
    """Normalised i.i.d. complex Gaussian vector (exactly Haar distributed)."""
    _check_sim(n)
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return PureState.normalized(v)


def tensor(*states: PureState) -> PureState:
    v = np.ones(1, dtype=complex)
    for s in states:
        v = np.kron(v, s.amplitudes)
    return PureState(v)


def fidelity(psi: PureState, phi: PureState) -> float:
    if psi.n != phi.n:
        raise ParameterError("fidelity between states of different qubit counts")
    return float(min(1.0, abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2))


def load_state(path: Union[str, Path]) -> PureState:
    return PureState.from_json(json.loads(Path(path).read_text()))


def save_state(psi: PureState, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(psi.to_json()))


# --------------------------------------------------------------------------
# Weyl operators


def apply_weyl(x: int, vec: np.ndarray, n: int) -> np.ndarray:
    """Return ``W_x @ vec``."""
    a, b = f2lin.split(x, n)
    k = np.arange(1 << n)
    phase = (1j) ** ((a & b).bit_count() % 4)
    out = np.empty_like(vec, dtype=complex)
    out[k ^ a] = phase * np.where(popcount(k & b) & 1, -1, 1) * vec
    return out


def weyl_matrix(x: int, n: int) -> np.ndarray:
    return np.stack([apply_weyl(x, col, n) for col in np.eye(1 << n, dtype=complex)], axis=1)


def weyl_expectation(psi: PureState, x: int) -> float:
    f2lin.check_vec(x, psi.n)
    v = psi.amplitudes
    val = np.vdot(v, apply_weyl(x, v, psi.n)).real
    return float(np.clip(val, -1.0, 1.0))


def _expectation_table(psi: PureState) -> np.ndarray:
    n = psi.n
    _check_sim(n, DIST_CAP)
    N = 1 << n
    k = np.arange(N)
    v = psi.amplitudes
    # row a: conj(psi[k ^ a]) * psi[k]; WHT over k gives the sum over (-1)^{k.b}
    prod = v.conj()[k[:, None] ^ k[None, :]] * v[None, :]
    table = fwht(prod, axis=1)
    table = table * (1j) ** (popcount(k[:, None] & k[None, :]) % 4)
    return _frozen(np.clip(table.real.reshape(-1), -1.0, 1.0))


def weyl_coefficients(psi: PureState) -> WeylCoefficients:
    return WeylCoefficients(psi.n, _frozen(psi.expectation_table / np.sqrt(psi.dim)))


def char_distribution(psi: PureState) -> CharDistribution:
    """``p(x) = <psi|W_x|psi>^2 / 2^n`` over all labels."""
    e = psi.expectation_table
    return CharDistribution(psi.n, _frozen(e * e / psi.dim))


def weyl_distribution(psi: PureState) -> WeylDistribution:
    """Law of Bell difference sampling, ``4^n (p * p)``, via two transforms."""
    n = psi.n
    p = psi.char_distribution.p
    q = (4.0 ** n) * symplectic_convolution(p, p)
    return WeylDistribution(n, _frozen(np.clip(q, 0.0, None)))


# --------------------------------------------------------------------------
# transforms


def fwht(arr, axis: int = -1) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along ``axis``.

    ``out[b] = sum_k (-1)^{popcount(b & k)} arr[k]`` (natural ordering).
    """
    a = np.moveaxis(np.array(arr, copy=True), axis, -1)
    shape = a.shape
    N = shape[-1]
    if N & (N - 1):
        raise ParameterError(f"transform length {N} is not a power of two")
    h = 1
    while h < N:
        a = a.reshape(shape[:-1] + (N // (2 * h), 2, h))
        lo, hi = a[..., 0, :], a[..., 1, :]
        a = np.stack((lo + hi, lo - hi), axis=-2)
        h *= 2
    return np.moveaxis(a.reshape(shape), -1, axis)


def _order_from_length(length: int) -> int:
    nbits = length.bit_length() - 1
    if length < 1 or 1 << nbits != length or nbits % 2:
        raise ParameterError(f"length {length} is not a power of 4")
    return nbits // 2


def symplectic_fourier(f) -> np.ndarray:
    """``f_hat(a) = 4^{-n} sum_x (-1)^{[a,x]} f(x)``.

    Since ``[a, x] = swap(a) . x``, this is a plain Walsh-Hadamard transform
    read out at the half-swapped index, i.e. a transpose of the
    ``(2^n, 2^n)`` view.
    """
    f = np.asarray(f, dtype=float)
    n = _order_from_length(f.size)
    N = 1 << n
    return fwht(f).reshape(N, N).T.reshape(-1) / (4.0 ** n)


def inverse_symplectic_fourier(fhat) -> np.ndarray:
    """``f(x) = sum_a (-1)^{[a,x]} f_hat(a)``."""
    fhat = np.asarray(fhat, dtype=float)
    n = _order_from_length(fhat.size)
    return (4.0 ** n) * symplectic_fourier(fhat)


def symplectic_convolution(f, g) -> np.ndarray:
    """``(f * g)(x) = 4^{-n} sum_t f(t) g(t + x)`` via the convolution theorem."""
    return inverse_symplectic_fourier(symplectic_fourier(f) * symplectic_fourier(g))


def subspace_mass(d, T: Subspace) -> float:
    """Total mass of a distribution table on the elements of ``T``."""
    table = getattr(d, "p", None)
    if table is None:
        table = getattr(d, "q", d)
    table = np.asarray(table)
    if table.size != 4 ** T.n:
        raise ParameterError("distribution and subspace disagree on n")
    return float(table[T.elements_array()].sum())


def dump_distribution_csv(table, n: int, path_or_file) -> None:
    if n > DUMP_CAP:
        raise CapExceededError(f"distribution dumps are capped at n={DUMP_CAP}")
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(["x_bits", "value"])
        for x, val in enumerate(np.asarray(table)):
            w.writerow([f2lin.to_bits(x, n), repr(float(val))])
    finally:
        if own:
            fh.close()
