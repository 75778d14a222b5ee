"""The three learning algorithms, the eta estimator and the regime utility.

Sample-count formulas use base-2 logarithms and are rounded up.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from . import f2lin
from .cliques import VERTEX_CAP, build_comm_graph, maximal_cliques
from .errors import NoCandidateError, ParameterError
from .sampling import SampleMode, bell_difference_samples, weyl_twocopy_measure_batch
from .shadows import SHADOW_CONSTANT, collect_shadows, default_batch_count, default_shadow_count, estimate_many
from .stabilizer import StabilizerState, enumerate_stabilizer_states_for_group
from .states import PureState

log = logging.getLogger(__name__)

RngLike = Union[np.random.Generator, int, None]


def make_rng(seed: RngLike) -> tuple[np.random.Generator, Optional[int]]:
    """Return ``(generator, seed)``; an int seed builds a Philox stream."""
    if isinstance(seed, np.random.Generator):
        return seed, None
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (1 << 63))
    return np.random.Generator(np.random.Philox(int(seed))), int(seed)


def _check_delta(delta: float) -> None:
    if not 0 < delta < 1:
        raise ParameterError(f"delta must satisfy 0 < delta < 1, got {delta}")


def _warn_small_delta(delta: float, n: int) -> None:
    # the Haar-side failure term is 2^{-2^{O(n)}}; below it no test can reach the requested confidence
    if delta < 2.0**-n:
        log.warning("delta=%g is below 2^-n for n=%d; the Haar-side failure bound may exceed delta", delta, n)


# --------------------------------------------------------------------------
# Algorithm 1


@dataclass(frozen=True)
class DistinguishReport:
    verdict: int
    span_dim: int
    m_used: int
    m: int
    n: int
    delta: float
    mode: str
    seed: Optional[int] = None

    def to_json(self) -> dict:
        return asdict(self)


def distinguish_sample_count(n: int, delta: float) -> int:
    return math.ceil(6 * n + 4.5 * math.log2(2 / delta))


def distinguish(
    psi: PureState,
    delta: float,
    rng: RngLike = None,
    mode: SampleMode = SampleMode.Exact,
    early_exit: bool = False,
    m: Optional[int] = None,
) -> DistinguishReport:
    """Verdict 0 (Haar-like) iff the Bell difference samples span ``F2^{2n}``."""
    n = psi.n
    _check_delta(delta)
    _warn_small_delta(delta, n)
    gen, seed = make_rng(rng)
    m = distinguish_sample_count(n, delta) if m is None else m
    if m < 1:
        raise ParameterError("sample count must be positive")
    samples = bell_difference_samples(psi, m, gen, mode)
    if early_exit:
        basis: list[int] = []
        used = 0
        for x in samples:
            used += 1
            r = f2lin.reduce(int(x), basis)
            if r:
                basis = list(f2lin._rref(basis + [r]))
            if len(basis) == 2 * n:
                break
        dim = len(basis)
    else:
        used = m
        dim = f2lin.rank(int(x) for x in samples)
    return DistinguishReport(int(dim != 2 * n), dim, used, m, n, delta, mode.value, seed)


# --------------------------------------------------------------------------
# Algorithm 2


@dataclass(frozen=True)
class FidelityReport:
    witness: StabilizerState
    estimate: float
    raw_estimate: float
    clique_count: int
    lagrangian_count: int
    candidate_count: int
    vertex_count: int
    m_clique: int
    m_shadow: int
    batch_count: int
    n: int
    tau: float
    eps: float
    delta: float
    seed: Optional[int] = None

    def to_json(self) -> dict:
        out = asdict(self)
        out["witness"] = self.witness.to_json()
        return out


def clique_sample_count(n: int, tau: float, delta: float) -> int:
    return math.ceil((8 + 4 * math.sqrt(3)) / tau**4 * (n + math.log2(2 / delta)))


def lagrangian_candidates(samples, n: int, cap: int = VERTEX_CAP) -> tuple[list[f2lin.Subspace], int, int]:
    """Distinct Lagrangian spans of maximal cliques, with clique and vertex counts."""
    graph = build_comm_graph((int(x) for x in samples), n)
    cliques = maximal_cliques(graph, cap=cap)
    spans = {}
    for c in cliques:
        S = f2lin.span(c, n)
        if S.dim == n:
            spans[S.basis] = S
    return [spans[k] for k in sorted(spans)], len(cliques), len(graph)


def estimate_fidelity(
    psi: PureState,
    tau: float,
    eps: float,
    delta: float,
    rng: RngLike = None,
    cap_vertices: int = VERTEX_CAP,
    m_clique: Optional[int] = None,
    m_shadow: Optional[int] = None,
    shadow_constant: float = SHADOW_CONSTANT,
) -> FidelityReport:
    """Find a stabilizer state with fidelity at least ``tau - eps`` (w.p. ``1 - delta``).

    Half of ``delta`` is spent on clique sampling and half on the shadows,
    which estimate every candidate to within ``eps / 2``.  The shadow count
    uses the number of candidates actually found.
    """
    n = psi.n
    if not 0 < eps < tau <= 1:
        raise ParameterError(f"need 0 < eps < tau <= 1, got eps={eps}, tau={tau}")
    _check_delta(delta)
    gen, seed = make_rng(rng)
    if m_clique is None:
        m_clique = clique_sample_count(n, tau, delta)
    samples = bell_difference_samples(psi, m_clique, gen)
    subspaces, clique_count, vertex_count = lagrangian_candidates(samples, n, cap_vertices)
    if not subspaces:
        raise NoCandidateError("no maximal clique spans a Lagrangian subspace; the fidelity may be below tau")
    candidates = [phi for S in subspaces for phi in enumerate_stabilizer_states_for_group(S)]
    candidates.sort(key=StabilizerState.sort_key)
    K = len(candidates)
    if m_shadow is None:
        m_shadow = default_shadow_count(K, eps / 2, delta / 2, shadow_constant)
    batches = min(default_batch_count(K, delta / 2), m_shadow)
    shadows = collect_shadows(psi, m_shadow, gen, batch_count=batches)
    est = estimate_many(shadows, candidates)
    best = int(np.argmax(est))
    raw = float(est[best])
    return FidelityReport(
        witness=candidates[best],
        estimate=min(max(raw, 0.0), 1.0),
        raw_estimate=raw,
        clique_count=clique_count,
        lagrangian_count=len(subspaces),
        candidate_count=K,
        vertex_count=vertex_count,
        m_clique=m_clique,
        m_shadow=m_shadow,
        batch_count=batches,
        n=n,
        tau=tau,
        eps=eps,
        delta=delta,
        seed=seed,
    )


# --------------------------------------------------------------------------
# eta and Algorithm 3


def eta_estimate(psi: PureState, m: int, rng: RngLike = None) -> float:
    """Mean of ``m`` two-copy ``W_x`` outcomes at Bell difference samples ``x``."""
    if m < 1:
        raise ParameterError("m must be at least 1")
    gen, _ = make_rng(rng)
    labels = bell_difference_samples(psi, m, gen)
    return float(weyl_twocopy_measure_batch(psi, labels, gen).mean())


@dataclass(frozen=True)
class TestReport:
    verdict: int
    eta_hat: float
    threshold: float
    gamma: float
    m: int
    n: int
    alpha1: float
    alpha2: float
    delta: float
    seed: Optional[int] = None

    __test__ = False

    def to_json(self) -> dict:
        return asdict(self)


def tolerant_gap(alpha1: float, alpha2: float) -> float:
    gamma = alpha1**6 - (3 * alpha2 + 1) / 4
    if not gamma > 0:
        raise ParameterError(
            f"infeasible thresholds: need alpha1^6 > (3*alpha2+1)/4, "
            f"got {alpha1**6:.6g} <= {(3 * alpha2 + 1) / 4:.6g} (gamma={gamma:.6g} <= 0)"
        )
    return gamma


def tolerant_sample_count(gamma: float, delta: float) -> int:
    return math.ceil(8 * math.log2(2 / delta) / gamma**2)


def tolerant_test(psi: PureState, alpha1: float, alpha2: float, delta: float, rng: RngLike = None) -> TestReport:
    """Decide fidelity ``>= alpha1`` (verdict 1) versus ``<= alpha2`` (verdict 0)."""
    if not (0 <= alpha2 <= 1 and 0 <= alpha1 <= 1):
        raise ParameterError("alpha1 and alpha2 must lie in [0, 1]")
    gamma = tolerant_gap(alpha1, alpha2)
    _check_delta(delta)
    gen, seed = make_rng(rng)
    m = tolerant_sample_count(gamma, delta)
    eta_hat = eta_estimate(psi, m, gen)
    threshold = alpha1**6 - gamma / 2
    return TestReport(int(eta_hat > threshold), eta_hat, threshold, gamma, m, psi.n,
                      alpha1, alpha2, delta, seed)


# --------------------------------------------------------------------------
# regime comparison


def regime_check(alpha1, alpha2) -> dict[str, bool]:
    """Feasibility of this tester and of the GNW tester at ``(alpha1, alpha2)``.

    Evaluated in exact rational arithmetic on the binary value of the inputs.
    GNW's ``1 - 12 sqrt(1 - a1) > (a2 + 1)/2`` is squared into
    ``(1 - a2) > 0`` and ``576 (1 - a1) < (1 - a2)^2``.
    """
    a1, a2 = Fraction(alpha1), Fraction(alpha2)
    if not (0 <= a1 <= 1 and 0 <= a2 <= 1):
        raise ParameterError("alpha1 and alpha2 must lie in [0, 1]")
    ours = a1**6 > (3 * a2 + 1) / 4
    gnw = (1 - a2) > 0 and 576 * (1 - a1) < (1 - a2) ** 2
    return {"ours": bool(ours), "gnw": bool(gnw)}


def regime_grid(steps: int = 200) -> list[tuple[Fraction, Fraction, bool, bool]]:
    """Both feasibility regions on the lattice ``{i/steps}^2``."""
    if steps < 1:
        raise ParameterError("steps must be positive")
    rows = []
    for i in range(steps + 1):
        for j in range(steps + 1):
            a1, a2 = Fraction(i, steps), Fraction(j, steps)
            r = regime_check(a1, a2)
            rows.append((a1, a2, r["ours"], r["gnw"]))
    return rows
