"""Brute-force reference evolution on truncated Hilbert spaces.

The charger/battery pair is represented on ``C^dim_a (x) C^dim_b`` with the
charger index major. A two-level system is the ``dim = 2`` truncation of a
bosonic mode, so the same ladder operators serve all five models.

Propagation is exact: the full Hamiltonian is split into the connected
components of its sparsity pattern (excitation-number blocks for the
commuting models, parity sectors for the counter-rotating pair) and each
block is diagonalized densely. Mixed states are kept as weighted ensembles
of pure states and only expanded to a dense density matrix on request.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .analytic import Model, ModelParams
from .errors import InvalidArgumentError, NumericalIntegrityError, ResourceError
from .states import ChargerState, StateKind

DEFAULT_MAX_DIM = 4096
DEFAULT_MARGIN = 10
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class TruncatedSpace:
    dim_a: int
    dim_b: int
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self) -> None:
        if self.dim_a < 2 or self.dim_b < 2:
            raise InvalidArgumentError(f"subsystem dimensions must be >= 2, got {self.dim_a}x{self.dim_b}")
        if self.dim_a * self.dim_b > self.max_dim:
            raise ResourceError(
                f"truncated space {self.dim_a}x{self.dim_b} = {self.dim_a * self.dim_b} exceeds cap {self.max_dim}"
            )

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b


def default_space(
    params: ModelParams,
    charger: ChargerState | None,
    margin: int = DEFAULT_MARGIN,
    max_dim: int = DEFAULT_MAX_DIM,
) -> TruncatedSpace:
    """Smallest space holding the charger distribution, padded for pair creation."""
    model = params.model
    if model is Model.QUBIT_QUBIT:
        return TruncatedSpace(2, 2, max_dim)
    if charger is None:
        raise InvalidArgumentError(f"model {model.value} needs a charger state")
    n_osc = charger.distribution.truncation_index + 2
    if model is Model.OSC_CRT:
        n_osc += margin
    dim_b = 2 if model is Model.JAYNES_CUMMINGS else n_osc
    return TruncatedSpace(n_osc, dim_b, max_dim)


def _destroy(n: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, shape=(n, n), format="csr")


@dataclass(frozen=True, eq=False)
class Hamiltonians:
    """Local, interaction and bare Hamiltonians as sparse matrices.

    ``h_0`` generates the evolution outside the charging window and ``h_0 + h_1``
    inside it. For every model except the detuning protocol ``h_0 = h_a + h_b``;
    there, ``h_a``/``h_b`` are the dressed local Hamiltonians conserved while the
    pair is far detuned and ``h_0`` also holds the always-on hopping.
    """

    params: ModelParams
    space: TruncatedSpace
    h_a: sp.csr_matrix
    h_b: sp.csr_matrix
    h_1: sp.csr_matrix
    h_0: sp.csr_matrix

    @property
    def h_total(self) -> sp.csr_matrix:
        return (self.h_0 + self.h_1).tocsr()

    @cached_property
    def spectrum(self) -> "_BlockSpectrum":
        return _BlockSpectrum(self)


def build_hamiltonians(params: ModelParams, space: TruncatedSpace) -> Hamiltonians:
    model = params.model
    w0, g = params.omega0, params.g
    if model is Model.QUBIT_QUBIT and (space.dim_a, space.dim_b) != (2, 2):
        raise InvalidArgumentError("qubit-qubit model lives on a 2x2 space")
    if model is Model.JAYNES_CUMMINGS and space.dim_b != 2:
        raise InvalidArgumentError("Jaynes-Cummings battery is a qubit (dim_b = 2)")
    ia, ib = sp.identity(space.dim_a, format="csr"), sp.identity(space.dim_b, format="csr")
    a = sp.kron(_destroy(space.dim_a), ib, format="csr")
    b = sp.kron(ia, _destroy(space.dim_b), format="csr")
    ad, bd = a.T.tocsr(), b.T.tocsr()
    na, nb = (ad @ a).tocsr(), (bd @ b).tocsr()
    hop = (ad @ b + a @ bd).tocsr()

    if model is Model.DETUNING:
        dw = params.delta_omega
        h_a = (w0 + dw + g * g / dw) * na
        h_b = (w0 - g * g / dw) * nb
        h_0 = (w0 + dw) * na + w0 * nb + g * hop
        h_1 = -dw * na
    else:
        h_a, h_b = w0 * na, w0 * nb
        h_0 = h_a + h_b
        if model is Model.OSC_CRT:
            h_1 = g * ((a + ad) @ (b + bd))
        else:
            h_1 = g * hop
    return Hamiltonians(params, space, *(sp.csr_matrix(m) for m in (h_a, h_b, h_1, h_0)))


def _max_abs(m: sp.spmatrix) -> float:
    m = sp.csr_matrix(m)
    return float(np.abs(m.data).max()) if m.nnz else 0.0


class _BlockSpectrum:
    """Eigendecomposition of h_0 + h_1, one dense block per connected component."""

    def __init__(self, hams: Hamiltonians) -> None:
        h = hams.h_total
        scale = max(_max_abs(h), 1.0)
        if _max_abs(h - h.conj().T) > HERMITIAN_TOL * scale:
            raise NumericalIntegrityError("Hamiltonian is not Hermitian")
        pattern = abs(h) + abs(hams.h_a) + abs(hams.h_b) + abs(hams.h_1) + abs(hams.h_0)
        n_blocks, labels = connected_components(pattern, directed=False)
        self.blocks: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        for k in range(n_blocks):
            idx = np.flatnonzero(labels == k)
            sub = h[idx][:, idx].toarray()
            if not np.iscomplexobj(sub) or not np.any(sub.imag):
                sub = sub.real
            energies, vecs = np.linalg.eigh(sub)
            self.blocks.append((idx, energies, vecs))


@dataclass(frozen=True, eq=False)
class EvolvedSystem:
    """Ensemble sum_c weights[c] |states[c]><states[c]| at a given time."""

    hamiltonians: Hamiltonians
    weights: np.ndarray
    states: np.ndarray
    time: float = 0.0

    @property
    def density_matrix(self) -> np.ndarray:
        psi = self.states
        return (psi.T * self.weights) @ psi.conj()

    def trace(self) -> float:
        return float(np.sum(self.weights * np.sum(np.abs(self.states) ** 2, axis=1)))

    def purity(self) -> float:
        overlap = self.states.conj() @ self.states.T
        w = self.weights
        return float(np.real(np.sum(np.outer(w, w) * np.abs(overlap) ** 2)))


def initial_system(
    params: ModelParams,
    charger: ChargerState | None,
    space: TruncatedSpace | None = None,
) -> EvolvedSystem:
    """rho_A(0) (x) |0><0|_B; the battery starts in its ground state."""
    space = space or default_space(params, charger)
    hams = build_hamiltonians(params, space)
    d_a, d_b = space.dim_a, space.dim_b

    def product(amps_a: np.ndarray) -> np.ndarray:
        v = np.zeros(space.dim, dtype=amps_a.dtype)
        v[np.arange(amps_a.size) * d_b] = amps_a
        return v

    if params.model is Model.QUBIT_QUBIT:
        return EvolvedSystem(hams, np.ones(1), product(np.array([0.0, 1.0]))[None, :])
    if charger is None:
        raise InvalidArgumentError(f"model {params.model.value} needs a charger state")
    n_max = charger.distribution.truncation_index
    if n_max >= d_a:
        raise InvalidArgumentError(f"charger needs dim_a > {n_max}, got {d_a}")
    if charger.kind is StateKind.GIBBS:
        p = charger.distribution.probabilities
        keep = np.flatnonzero(p > 0)
        states = np.zeros((keep.size, space.dim))
        states[np.arange(keep.size), keep * d_b] = 1.0
        return EvolvedSystem(hams, p[keep].copy(), states)
    return EvolvedSystem(hams, np.ones(1), product(np.asarray(charger.amplitudes))[None, :])


def from_density_matrix(hams: Hamiltonians, rho: np.ndarray, time: float = 0.0) -> EvolvedSystem:
    """Wrap an arbitrary density matrix as an ensemble of its eigenvectors."""
    rho = np.asarray(rho)
    if rho.shape != (hams.space.dim, hams.space.dim):
        raise InvalidArgumentError(f"density matrix must be {hams.space.dim}x{hams.space.dim}")
    if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL * max(1.0, np.abs(rho).max()):
        raise NumericalIntegrityError("density matrix is not Hermitian")
    w, v = np.linalg.eigh(rho)
    if w.min() < -1e-10:
        raise NumericalIntegrityError(f"density matrix has negative eigenvalue {w.min():.3e}")
    keep = w > 1e-15
    return EvolvedSystem(hams, w[keep], v[:, keep].T.copy(), time)


def evolve(system: EvolvedSystem, tau: float) -> EvolvedSystem:
    """Unitary evolution for an extra time tau under h_0 + h_1."""
    if not (tau >= 0 and np.isfinite(tau)):
        raise InvalidArgumentError(f"tau must be finite and non-negative, got {tau!r}")
    if tau == 0:
        return system
    out = np.zeros(system.states.shape, dtype=complex)
    for idx, energies, vecs in system.hamiltonians.spectrum.blocks:
        psi = system.states[:, idx]
        if not np.any(psi):
            continue
        coeff = (psi @ vecs.conj()) * np.exp(-1j * energies * tau)
        out[:, idx] = coeff @ vecs.T
    return EvolvedSystem(system.hamiltonians, system.weights, out, system.time + tau)


@dataclass(frozen=True)
class Measurement:
    e_a: float
    e_b: float
    e_1: float
    total: float


def _expect(system: EvolvedSystem, op: sp.spmatrix) -> float:
    psi = system.states.T
    vals = np.sum(psi.conj() * (op @ psi), axis=0)
    return float(np.real(vals @ system.weights))


def measure(system: EvolvedSystem) -> Measurement:
    """Local, interaction and total energies; total is tr[(h_0 + h_1) rho]."""
    h = system.hamiltonians
    e_a, e_b, e_1 = (_expect(system, op) for op in (h.h_a, h.h_b, h.h_1))
    return Measurement(e_a, e_b, e_1, _expect(system, h.h_total))


def switch_energy(initial: EvolvedSystem, evolved: EvolvedSystem) -> float:
    """Net work of switching the interaction on at 0 and off at tau."""
    if initial.hamiltonians is not evolved.hamiltonians:
        raise InvalidArgumentError("systems must share their Hamiltonians")
    return _expect(initial, initial.hamiltonians.h_1) - _expect(evolved, evolved.hamiltonians.h_1)


@dataclass(frozen=True)
class OracleSeries:
    times: np.ndarray
    e_a: np.ndarray
    e_b: np.ndarray
    e_1: np.ndarray
    total: np.ndarray
    e_switch: np.ndarray

    @property
    def e_s(self) -> np.ndarray:
        return self.e_b


def energy_series(system: EvolvedSystem, times, chunk: int = 256) -> OracleSeries:
    """Energies of ``system`` evolved for each extra time in ``times``.

    Works block by block in the eigenbasis: with rho~ = V^dag rho V and
    O~ = V^dag O V, <O>(t) = sum_jk O~_kj rho~_jk exp(-i (E_j - E_k) t).
    """
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise InvalidArgumentError("times must be finite and non-negative")
    hams = system.hamiltonians
    ops = (hams.h_a, hams.h_b, hams.h_1, hams.h_0)
    acc = np.zeros((len(ops), t.size))
    for idx, energies, vecs in hams.spectrum.blocks:
        psi = system.states[:, idx]
        if not np.any(psi):
            continue
        rho = (psi.T * system.weights) @ psi.conj()
        rho_eig = vecs.conj().T @ rho @ vecs
        for k, op in enumerate(ops):
            sub = op[idx][:, idx]
            if sub.nnz == 0:
                continue
            op_eig = vecs.conj().T @ (sub @ vecs)
            m = op_eig.T * rho_eig
            for lo in range(0, t.size, chunk):
                tt = t[lo : lo + chunk]
                u = np.exp(-1j * np.multiply.outer(energies, tt))
                acc[k, lo : lo + chunk] += np.real(np.sum(u * (m @ u.conj()), axis=0))
    e_a, e_b, e_1, e_0 = acc
    e_1_start = _expect(system, hams.h_1)
    return OracleSeries(
        times=t,
        e_a=e_a,
        e_b=e_b,
        e_1=e_1,
        total=e_0 + e_1,
        e_switch=e_1_start - e_1,
    )


def run(
    params: ModelParams,
    charger: ChargerState | None,
    times,
    margin: int = DEFAULT_MARGIN,
    max_dim: int = DEFAULT_MAX_DIM,
) -> OracleSeries:
    space = default_space(params, charger, margin=margin, max_dim=max_dim)
    return energy_series(initial_system(params, charger, space), times)


def converged_run(
    params: ModelParams,
    charger: ChargerState | None,
    times,
    tol: float = 1e-9,
    margin: int = DEFAULT_MARGIN,
    step: int = 6,
    max_dim: int = DEFAULT_MAX_DIM,
) -> tuple[OracleSeries, int]:
    """Grow the oscillator cutoff margin until stored/switching energies stop moving.

    Only the counter-rotating model leaks beyond the charger distribution; all
    other models are exact at the default cutoff and return immediately.
    Raises ``ResourceError`` if convergence needs a space beyond ``max_dim``.
    """
    prev = run(params, charger, times, margin=margin, max_dim=max_dim)
    if params.model is not Model.OSC_CRT:
        return prev, margin
    while True:
        margin += step
        cur = run(params, charger, times, margin=margin, max_dim=max_dim)
        delta = max(np.abs(cur.e_b - prev.e_b).max(), np.abs(cur.e_switch - prev.e_switch).max())
        if delta <= tol * params.omega0:
            return cur, margin
        prev = cur


def heisenberg_propagator(params: ModelParams, t: float) -> np.ndarray:
    """Numerical propagator of (a, b, a^dag, b^dag) for the counter-rotating pair.

    Integrates dA/dt = i[H, A] = -i M A by dense matrix exponential, giving an
    independent check of the closed-form beyond-RWA coefficients.
    """
    from scipy.linalg import expm

    if params.model is not Model.OSC_CRT:
        raise InvalidArgumentError("heisenberg_propagator needs the osc-crt model")
    w, g = params.omega0, params.g
    gen = np.array(
        [
            [w, g, 0, g],
            [g, w, g, 0],
            [0, -g, -w, -g],
            [-g, 0, -g, -w],
        ],
        dtype=complex,
    )
    return expm(-1j * gen * t)
