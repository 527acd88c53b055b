"""Charger preparations at fixed mean excitation number K.

Every state carries its Fock-basis occupation distribution together with the
two second moments the closed-form dynamics need, ``<a^dag a>`` and ``<a a>``.
Distributions are truncated at the first index whose remaining tail mass falls
below ``tail_tol``; they are *not* renormalized, and the neglected mass is kept
in ``ExcitationDistribution.tail_mass``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import InvalidArgumentError

DEFAULT_TAIL_TOL = 1e-12
MAX_TAIL_TOL = 1e-8


class StateKind(str, enum.Enum):
    FOCK = "fock"
    COHERENT = "coherent"
    GIBBS = "gibbs"


@dataclass(frozen=True)
class ExcitationDistribution:
    """Occupation probabilities p_n for n = 0..truncation_index."""

    probabilities: np.ndarray
    mean_excitations: float
    tail_mass: float = 0.0

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidArgumentError("probabilities must be a non-empty 1-d array")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InvalidArgumentError("probabilities must be finite and non-negative")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def truncation_index(self) -> int:
        return self.probabilities.size - 1

    @property
    def occupations(self) -> np.ndarray:
        return np.arange(self.probabilities.size)

    def total(self) -> float:
        return float(math.fsum(self.probabilities))

    def mean(self) -> float:
        return float(math.fsum(self.occupations * self.probabilities))

    def variance(self) -> float:
        n = self.occupations
        m = self.mean()
        return float(math.fsum((n - m) ** 2 * self.probabilities))

    def sqrt_mean(self) -> float:
        """Sum of p_n * sqrt(n); bounded above by sqrt(K) by concavity."""
        return float(math.fsum(np.sqrt(self.occupations) * self.probabilities))


@dataclass(frozen=True)
class ChargerState:
    kind: StateKind
    K: float
    distribution: ExcitationDistribution
    pair_moment: complex = 0.0
    number_variance: float = 0.0
    amplitudes: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def number_moment(self) -> float:
        return float(self.K)

    @property
    def is_pure(self) -> bool:
        return self.amplitudes is not None


def _check_tail_tol(tail_tol: float) -> None:
    if not (0.0 < tail_tol <= MAX_TAIL_TOL):
        raise InvalidArgumentError(
            f"tail_tol must lie in (0, {MAX_TAIL_TOL:g}], got {tail_tol!r}"
        )


def _check_positive_K(K: float) -> float:
    try:
        K = float(K)
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"K must be a real number, got {K!r}") from exc
    if not (K > 0.0 and math.isfinite(K)):
        raise InvalidArgumentError(f"K must be positive and finite, got {K!r}")
    return K


def make_fock(K: int) -> ChargerState:
    """Number state |K>."""
    if isinstance(K, bool) or not float(K).is_integer():
        raise InvalidArgumentError(f"Fock state needs an integer K, got {K!r}")
    K = int(K)
    if K < 1:
        raise InvalidArgumentError(f"Fock state needs K >= 1, got {K}")
    p = np.zeros(K + 1)
    p[K] = 1.0
    amps = p.copy()
    return ChargerState(
        kind=StateKind.FOCK,
        K=float(K),
        distribution=ExcitationDistribution(p, float(K), 0.0),
        pair_moment=0.0,
        number_variance=0.0,
        amplitudes=amps,
    )


def _poisson_cutoff(K: float, tail_tol: float) -> int:
    # sf(n) = P(N > n); smallest n with sf(n) < tail_tol
    hi = int(K + 12.0 * math.sqrt(K) + 60)
    n = np.arange(hi + 1)
    sf = stats.poisson.sf(n, K)
    idx = np.flatnonzero(sf < tail_tol)
    if idx.size == 0:  # pragma: no cover - hi is generous for tail_tol >= 1e-300
        raise InvalidArgumentError("could not bracket the Poisson tail")
    return int(idx[0])


def make_coherent(K: float, tail_tol: float = DEFAULT_TAIL_TOL) -> ChargerState:
    """Coherent state |alpha> with real alpha = sqrt(K) >= 0."""
    K = _check_positive_K(K)
    _check_tail_tol(tail_tol)
    n_max = _poisson_cutoff(K, tail_tol)
    n = np.arange(n_max + 1)
    p = stats.poisson.pmf(n, K)
    tail = float(stats.poisson.sf(n_max, K))
    # amplitudes e^{-K/2} alpha^n / sqrt(n!) evaluated in log space
    log_amp = -0.5 * K + 0.5 * n * math.log(K) - 0.5 * np.array(
        [math.lgamma(k + 1) for k in n]
    )
    return ChargerState(
        kind=StateKind.COHERENT,
        K=K,
        distribution=ExcitationDistribution(p, K, tail),
        pair_moment=K,
        number_variance=K,
        amplitudes=np.exp(log_amp),
    )


def make_gibbs(K: float, tail_tol: float = DEFAULT_TAIL_TOL) -> ChargerState:
    """Thermal state with geometric occupations p_n = r^n / (K + 1), r = K/(K+1)."""
    K = _check_positive_K(K)
    _check_tail_tol(tail_tol)
    r = K / (K + 1.0)
    # P(N > n) = r^(n+1)
    n_max = max(0, math.ceil(math.log(tail_tol) / math.log(r)) - 1)
    while r ** (n_max + 1) >= tail_tol:
        n_max += 1
    while n_max > 0 and r**n_max < tail_tol:
        n_max -= 1
    n = np.arange(n_max + 1)
    p = np.exp(n * math.log(r)) / (K + 1.0)
    return ChargerState(
        kind=StateKind.GIBBS,
        K=K,
        distribution=ExcitationDistribution(p, K, r ** (n_max + 1)),
        pair_moment=0.0,
        number_variance=K * (K + 1.0),
    )


def make_state(kind: StateKind | str, K: float, tail_tol: float = DEFAULT_TAIL_TOL) -> ChargerState:
    kind = StateKind(kind)
    if kind is StateKind.FOCK:
        return make_fock(K)
    if kind is StateKind.COHERENT:
        return make_coherent(K, tail_tol)
    return make_gibbs(K, tail_tol)
