"""Bell difference sampling and two-copy Weyl measurements."""

from __future__ import annotations

import enum
import weakref

import numpy as np

from .errors import CapExceededError, ParameterError
from .f2lin import F2Vec
from .states import DIST_CAP, H_MATRIX, SIM_CAP, PureState, _apply_1q, _apply_cnot, tensor

__all__ = [
    "SampleMode",
    "bell_difference_sample",
    "bell_difference_samples",
    "bell_measurement_distribution",
    "weyl_twocopy_measure",
    "weyl_twocopy_measure_batch",
]


class SampleMode(enum.Enum):
    Exact = "exact"
    Physical = "physical"


_CDF_CACHE: "weakref.WeakKeyDictionary[PureState, np.ndarray]" = weakref.WeakKeyDictionary()
_BELL_CACHE: "weakref.WeakKeyDictionary[PureState, np.ndarray]" = weakref.WeakKeyDictionary()


def _check_mode(psi: PureState, mode: SampleMode) -> None:
    if mode is SampleMode.Exact and psi.n > DIST_CAP:
        raise CapExceededError(f"exact sampling needs n <= {DIST_CAP}, got {psi.n}")
    if mode is SampleMode.Physical and 2 * psi.n > SIM_CAP:
        raise CapExceededError(f"physical sampling simulates 2n qubits; n={psi.n} exceeds {SIM_CAP // 2}")


def _draw(cdf: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    idx = np.searchsorted(cdf, rng.random(m) * cdf[-1], side="right")
    return np.minimum(idx, cdf.size - 1).astype(np.int64)


def _weyl_cdf(psi: PureState) -> np.ndarray:
    cdf = _CDF_CACHE.get(psi)
    if cdf is None:
        cdf = np.cumsum(psi.weyl_distribution.q)
        _CDF_CACHE[psi] = cdf
    return cdf


def bell_measurement_distribution(psi: PureState) -> np.ndarray:
    """Outcome law of one Bell-basis measurement of ``psi (x) psi``, indexed by label.

    Qubit ``i`` of the first copy is paired with qubit ``i`` of the second.
    The pair is rotated by ``CNOT`` then ``H`` on the first-copy qubit, so a
    ``|Phi+>`` pair reads ``00``.  The first-copy bit gives ``b_i`` and the
    second-copy bit gives ``a_i`` of the decoded label.
    """
    _check_mode(psi, SampleMode.Physical)
    cached = _BELL_CACHE.get(psi)
    if cached is not None:
        return cached
    n = psi.n
    two = tensor(psi, psi)
    vec = two.amplitudes.copy()
    for i in range(n):
        vec = _apply_cnot(vec, 2 * n, i, n + i)
        vec = _apply_1q(vec, 2 * n, i, H_MATRIX)
    probs = np.abs(vec) ** 2
    k = np.arange(1 << (2 * n), dtype=np.int64)
    mask = (1 << n) - 1
    labels = ((k & mask) << n) | (k >> n)
    out = np.zeros_like(probs)
    out[labels] = probs
    out.setflags(write=False)
    _BELL_CACHE[psi] = out
    return out


def bell_difference_samples(
    psi: PureState, m: int, rng: np.random.Generator, mode: SampleMode = SampleMode.Exact
) -> np.ndarray:
    """``m`` i.i.d. Bell difference samples as an int64 array of labels."""
    if m < 0:
        raise ParameterError("sample count must be nonnegative")
    _check_mode(psi, mode)
    if mode is SampleMode.Exact:
        return _draw(_weyl_cdf(psi), m, rng)
    cdf = np.cumsum(bell_measurement_distribution(psi))
    first = _draw(cdf, m, rng)
    second = _draw(cdf, m, rng)
    return first ^ second


def bell_difference_sample(
    psi: PureState, mode: SampleMode = SampleMode.Exact, rng: np.random.Generator | None = None
) -> F2Vec:
    if rng is None:
        raise ParameterError("an explicit random generator is required")
    return int(bell_difference_samples(psi, 1, rng, mode)[0])


def _expectations_at(psi: PureState, labels: np.ndarray) -> np.ndarray:
    if psi.n <= DIST_CAP:
        return psi.expectation_table[labels]
    from .stabilizer import _expectations

    return _expectations(psi, labels)


def weyl_twocopy_measure_batch(psi: PureState, labels, rng: np.random.Generator) -> np.ndarray:
    """Product of two independent single-copy ``W_x`` outcomes for each label."""
    labels = np.asarray(labels, dtype=np.int64)
    e = _expectations_at(psi, labels)
    # exact eigenvalues come out of the float pipeline within ~1e-15 of +-1
    e = np.where(np.abs(np.abs(e) - 1) < 1e-12, np.sign(e), e)
    p_plus = (1 + e) / 2
    first = np.where(rng.random(labels.shape) < p_plus, 1, -1)
    second = np.where(rng.random(labels.shape) < p_plus, 1, -1)
    return first * second


def weyl_twocopy_measure(psi: PureState, x: F2Vec, rng: np.random.Generator) -> int:
    return int(weyl_twocopy_measure_batch(psi, np.array([x]), rng)[0])
