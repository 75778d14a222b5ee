"""Classical shadows from uniformly random Clifford measurements.

Samples are kept as flat arrays (tableau images, phase bits, outcomes) so that
collection and estimation vectorise over the sample axis.  For the dense
estimation path each record also caches the row ``<b|U`` of its unitary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import f2lin
from .errors import CapExceededError, ParameterError
from .stabilizer import (
    CliffordTableau,
    StabilizerState,
    apply_clifford,
    basis_probability,
    random_clifford_batch,
    stabilizer_to_dense,
    tableau_unitaries,
)
from .states import PureState

SHADOW_CAP = 8
DENSE_ESTIMATE_CAP = 6
SHADOW_CONSTANT = 34.0
_CHUNK_ENTRIES = 1 << 20


def default_batch_count(K: int, delta: float) -> int:
    """Number of median-of-means batches for ``K`` simultaneous estimates."""
    return max(1, math.ceil(2 * math.log(2 * K / delta)))


def default_shadow_count(K: int, eps: float, delta: float, constant: float = SHADOW_CONSTANT) -> int:
    """Shadow count ``ceil(constant * ln(2K/delta) / eps^2)``."""
    if not (eps > 0 and 0 < delta < 1 and K >= 1):
        raise ParameterError("need eps > 0, 0 < delta < 1 and K >= 1")
    return math.ceil(constant * math.log(2 * K / delta) / eps**2)


@dataclass(frozen=True)
class ShadowSample:
    clifford: CliffordTableau
    outcome: int

    def __post_init__(self):
        if not 0 <= self.outcome < (1 << self.clifford.n):
            raise ParameterError("outcome does not fit in n bits")


@dataclass(eq=False)
class ShadowSet:
    n: int
    images: np.ndarray
    phases: np.ndarray
    outcomes: np.ndarray
    batch_count: int = 1
    _rows: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.outcomes) == 0:
            raise ParameterError("a shadow set needs at least one sample")
        if not 1 <= self.batch_count <= len(self.outcomes):
            raise ParameterError(f"batch_count must lie in 1..{len(self.outcomes)}")

    def __len__(self) -> int:
        return len(self.outcomes)

    @property
    def samples(self) -> list[ShadowSample]:
        return [self.sample(i) for i in range(len(self))]

    def sample(self, i: int) -> ShadowSample:
        tab = CliffordTableau(self.n, tuple(int(v) for v in self.images[i]),
                              tuple(int(p) for p in self.phases[i]))
        return ShadowSample(tab, int(self.outcomes[i]))

    def with_batch_count(self, batch_count: int) -> "ShadowSet":
        return ShadowSet(self.n, self.images, self.phases, self.outcomes, batch_count, self._rows)

    @property
    def rows(self) -> np.ndarray:
        """``(m, 2^n)`` array whose row ``i`` is ``<b_i| U_i``."""
        if self._rows is None:
            if self.n > DENSE_ESTIMATE_CAP:
                raise CapExceededError(f"dense shadow rows need n <= {DENSE_ESTIMATE_CAP}")
            out = np.empty((len(self), 1 << self.n), dtype=complex)
            for sl in _chunks(len(self), self.n):
                U = tableau_unitaries(self.n, self.images[sl], self.phases[sl])
                out[sl] = U[np.arange(U.shape[0]), self.outcomes[sl], :]
            self._rows = out
        return self._rows

    def batches(self) -> list[slice]:
        """Contiguous equal-size batches; trailing samples beyond a multiple are dropped."""
        size = len(self) // self.batch_count
        return [slice(k * size, (k + 1) * size) for k in range(self.batch_count)]


def _chunks(m: int, n: int) -> list[slice]:
    step = max(1, _CHUNK_ENTRIES // (1 << (2 * n)))
    return [slice(s, min(s + step, m)) for s in range(0, m, step)]


def collect_shadows(
    psi: PureState,
    m: int,
    rng: np.random.Generator,
    batch_count: int = 1,
    clifford: Optional[CliffordTableau] = None,
) -> ShadowSet:
    """Measure ``m`` copies of ``psi`` after independent uniform random Cliffords.

    ``clifford`` fixes the measurement unitary for every sample instead.
    """
    n = psi.n
    if m < 1:
        raise ParameterError("m must be positive")
    if n > SHADOW_CAP:
        raise CapExceededError(f"shadow collection needs n <= {SHADOW_CAP}, got {n}")
    if clifford is None:
        images, phases = random_clifford_batch(n, m, rng)
    else:
        if clifford.n != n:
            raise ParameterError("clifford size differs from the state")
        images = np.tile(np.array(clifford.images, dtype=np.int64), (m, 1))
        phases = np.tile(np.array(clifford.phases, dtype=np.int64), (m, 1))
    outcomes = np.empty(m, dtype=np.int64)
    keep_rows = n <= DENSE_ESTIMATE_CAP
    rows = np.empty((m, 1 << n), dtype=complex) if keep_rows else None
    for sl in _chunks(m, n):
        U = tableau_unitaries(n, images[sl], phases[sl])
        probs = np.abs(U @ psi.amplitudes) ** 2
        cdf = np.cumsum(probs, axis=1)
        u = rng.random(U.shape[0])[:, None] * cdf[:, -1:]
        b = np.minimum((cdf <= u).sum(axis=1), (1 << n) - 1)
        outcomes[sl] = b
        if keep_rows:
            rows[sl] = U[np.arange(U.shape[0]), b, :]
    return ShadowSet(n, images, phases, outcomes, batch_count, rows)


def _tableau_probabilities(shadows: ShadowSet, phi: StabilizerState) -> np.ndarray:
    out = np.empty(len(shadows))
    for i in range(len(shadows)):
        s = shadows.sample(i)
        out[i] = basis_probability(apply_clifford(s.clifford, phi), s.outcome)
    return out


def _probabilities(shadows: ShadowSet, phi: StabilizerState, method: str) -> np.ndarray:
    if phi.n != shadows.n:
        raise ParameterError("state size differs from the shadow set")
    if method == "auto":
        method = "dense" if shadows.n <= DENSE_ESTIMATE_CAP else "tableau"
    if method == "dense":
        amp = shadows.rows @ stabilizer_to_dense(phi).amplitudes
        return np.abs(amp) ** 2
    if method == "tableau":
        return _tableau_probabilities(shadows, phi)
    raise ParameterError(f"unknown estimation method {method!r}")


def per_sample_estimates(shadows: ShadowSet, phi: StabilizerState, method: str = "auto") -> np.ndarray:
    """Unbiased single-sample estimates ``(2^n + 1) |<b|U|phi>|^2 - 1``."""
    return ((1 << shadows.n) + 1) * _probabilities(shadows, phi, method) - 1


def median_of_means(values: np.ndarray, batches: Sequence[slice]) -> float:
    return float(np.median([values[sl].mean() for sl in batches]))


def estimate_stabilizer_fidelity(shadows: ShadowSet, phi: StabilizerState, method: str = "auto") -> float:
    """Median-of-means estimate of ``|<phi|psi>|^2``."""
    return median_of_means(per_sample_estimates(shadows, phi, method), shadows.batches())


def estimate_many(shadows: ShadowSet, phis: Sequence[StabilizerState]) -> np.ndarray:
    """Estimates for many targets, sharing one ``R^dag R`` matrix per batch."""
    if not phis:
        return np.zeros(0)
    if shadows.n > DENSE_ESTIMATE_CAP:
        return np.array([estimate_stabilizer_fidelity(shadows, phi, "tableau") for phi in phis])
    R = shadows.rows
    V = np.stack([stabilizer_to_dense(phi).amplitudes for phi in phis], axis=1)
    dim = (1 << shadows.n) + 1
    means = []
    for sl in shadows.batches():
        rb = R[sl]
        gram = rb.conj().T @ rb
        quad = np.einsum("ik,ij,jk->k", V.conj(), gram, V).real
        means.append(dim * quad / rb.shape[0] - 1)
    return np.median(np.array(means), axis=0)


def save_shadows(shadows: ShadowSet, path: Union[str, Path]) -> None:
    """Write one JSON record per sample."""
    n = shadows.n
    with open(path, "w") as fh:
        for i in range(len(shadows)):
            rec = {
                "n": n,
                "rows": [f2lin.to_bits(int(v), n) for v in shadows.images[i]],
                "phases": [int(p) for p in shadows.phases[i]],
                "outcome": format(int(shadows.outcomes[i]), f"0{n}b"),
            }
            fh.write(json.dumps(rec) + "\n")


def load_shadows(path: Union[str, Path], batch_count: int = 1) -> ShadowSet:
    images, phases, outcomes = [], [], []
    n = None
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if n is None:
                n = int(rec["n"])
            elif int(rec["n"]) != n:
                raise ParameterError("mixed qubit counts in shadow file")
            images.append([int(r, 2) for r in rec["rows"]])
            phases.append(rec["phases"])
            outcomes.append(int(rec["outcome"], 2))
    if n is None:
        raise ParameterError("empty shadow file")
    return ShadowSet(n, np.array(images, dtype=np.int64), np.array(phases, dtype=np.int64),
                     np.array(outcomes, dtype=np.int64), batch_count)
