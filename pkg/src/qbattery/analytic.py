"""Closed-form dynamics of the five charger/battery models.

Times are in units of 1/omega0 (hbar = 1) and energies in units of omega0
unless ``ModelParams.omega0`` says otherwise. All evaluators accept a scalar
or an array of charging times and return a value of the same shape.

Operator ordering for the beyond-RWA propagator is (a, b, a^dag, b^dag), so
``RMatrix.entries @ (a, b, a^dag, b^dag)`` gives the Heisenberg-evolved vector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InstabilityError, InvalidArgumentError, ValidityDomainError
from .states import ChargerState

DEFAULT_DETUNING_RATIO = 5.0
# below this fraction of omega0 the soft mode is treated as exactly critical
CRITICAL_FREQ_EPS = 1e-9


class Model(str, enum.Enum):
    QUBIT_QUBIT = "qubit-qubit"
    JAYNES_CUMMINGS = "jc"
    OSC_RWA = "osc-rwa"
    DETUNING = "detuning"
    OSC_CRT = "osc-crt"

    @property
    def commuting(self) -> bool:
        return self in (Model.QUBIT_QUBIT, Model.JAYNES_CUMMINGS, Model.OSC_RWA)

    @property
    def oscillator_charger(self) -> bool:
        return self is not Model.QUBIT_QUBIT

    @property
    def oscillator_battery(self) -> bool:
        return self in (Model.OSC_RWA, Model.DETUNING, Model.OSC_CRT)


@dataclass(frozen=True)
class ModelParams:
    model: Model
    g: float
    omega0: float = 1.0
    delta_omega: float | None = None
    detuning_ratio: float = DEFAULT_DETUNING_RATIO

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model(self.model))
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise InvalidArgumentError(f"omega0 must be positive, got {self.omega0!r}")
        if not math.isfinite(self.g):
            raise InvalidArgumentError(f"g must be finite, got {self.g!r}")
        if self.model is Model.OSC_RWA and abs(self.g) > self.omega0:
            raise InstabilityError(f"osc-rwa requires |g| <= omega0 (g={self.g}, omega0={self.omega0})")
        if self.model is Model.OSC_CRT and abs(self.g) > 0.5 * self.omega0:
            raise InstabilityError(
                f"osc-crt requires |g|/omega0 <= 1/2 for a stable spectrum, got {self.g / self.omega0:g}"
            )
        if self.model is Model.DETUNING:
            if self.delta_omega is None or not math.isfinite(self.delta_omega) or self.delta_omega == 0:
                raise InvalidArgumentError("detuning model needs a finite non-zero delta_omega")
            if abs(self.delta_omega) < self.detuning_ratio * abs(self.g):
                raise ValidityDomainError(
                    f"|delta_omega| = {abs(self.delta_omega):g} < {self.detuning_ratio:g}|g| = "
                    f"{self.detuning_ratio * abs(self.g):g}: far-detuned effective Hamiltonians do not apply"
                )

    @property
    def omega_plus(self) -> float:
        return math.sqrt(self.omega0**2 + 2 * self.g * self.omega0)

    @property
    def omega_minus(self) -> float:
        return math.sqrt(max(self.omega0**2 - 2 * self.g * self.omega0, 0.0))


def _require(params: ModelParams, *models: Model) -> None:
    if params.model not in models:
        names = ", ".join(m.value for m in models)
        raise InvalidArgumentError(f"expected model in ({names}), got {params.model.value}")


def _times(tau) -> np.ndarray:
    t = np.asarray(tau, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise InvalidArgumentError("charging times must be finite and non-negative")
    return t


def _out(values: np.ndarray, tau):
    return float(values) if np.ndim(tau) == 0 else values


def _power(e_s: np.ndarray, t: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(t > 0, e_s / np.where(t > 0, t, 1.0), 0.0)


# --- commuting models -------------------------------------------------------


def qq_stored_energy(params: ModelParams, tau):
    """Battery energy of two resonant qubits, charger initially excited."""
    _require(params, Model.QUBIT_QUBIT)
    t = _times(tau)
    return _out(params.omega0 * np.sin(params.g * t) ** 2, tau)


def jc_stored_energy(params: ModelParams, charger: ChargerState, tau):
    _require(params, Model.JAYNES_CUMMINGS)
    t = _times(tau)
    dist = charger.distribution
    n = dist.occupations[1:]
    p = dist.probabilities[1:]
    phase = np.multiply.outer(params.g * t, np.sqrt(n))
    return _out(params.omega0 * (np.sin(phase) ** 2 @ p), tau)


@dataclass(frozen=True)
class JCAmplitudes:
    """Amplitudes on |n>_A|0>_B (``upper``) and |n-1>_A|1>_B (``lower``)."""

    n: int
    t: float
    upper: complex
    lower: complex

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.upper) ** 2 + abs(self.lower) ** 2)


def jc_evolved_state(params: ModelParams, n: int, t: float) -> JCAmplitudes:
    _require(params, Model.JAYNES_CUMMINGS)
    if n < 0 or int(n) != n:
        raise InvalidArgumentError(f"excitation number must be a non-negative integer, got {n!r}")
    if t < 0:
        raise InvalidArgumentError("time must be non-negative")
    n = int(n)
    if n == 0:
        return JCAmplitudes(0, t, 1.0 + 0j, 0j)
    phase = np.exp(-1j * n * params.omega0 * t)
    x = math.sqrt(n) * params.g * t
    return JCAmplitudes(n, t, complex(phase * math.cos(x)), complex(-1j * phase * math.sin(x)))


def oo_rwa_stored_energy(params: ModelParams, K: float, tau):
    """Two resonant oscillators under RWA coupling; any charger state with mean K."""
    _require(params, Model.OSC_RWA)
    t = _times(tau)
    return _out(K * params.omega0 * np.sin(params.g * t) ** 2, tau)


# --- detuning protocol --------------------------------------------------------


@dataclass(frozen=True)
class DetuningEnergies:
    e_s: np.ndarray
    p_s: np.ndarray
    e_switch: np.ndarray
    e_a: np.ndarray


def detuning_energies(params: ModelParams, tau) -> DetuningEnergies:
    """Energies of the far-detuned protocol for a single charger quantum (K = 1).

    Local energies are measured with the dressed (effective) local Hamiltonians
    that are conserved outside the resonant window.
    """
    _require(params, Model.DETUNING)
    t = _times(tau)
    w0, g, dw = params.omega0, params.g, params.delta_omega
    s2 = np.sin(g * t) ** 2
    e_s = (w0 - g * g / dw) * s2
    e_a = (w0 + dw + g * g / dw) * (1.0 - s2)
    e_sw = -dw * s2
    return DetuningEnergies(e_s=e_s, p_s=_power(e_s, t), e_switch=e_sw, e_a=e_a)


# --- beyond RWA -------------------------------------------------------------


def _sin_over(omega: float, t: np.ndarray, omega0: float) -> np.ndarray:
    if omega < CRITICAL_FREQ_EPS * omega0:
        return t.astype(float)
    return np.sin(omega * t) / omega


def _r_entries(params: ModelParams, t: np.ndarray):
    """R_aa, R_ab, R_aa^dag, R_ab^dag evaluated on an array of times."""
    w0, g = params.omega0, params.g
    wp, wm = params.omega_plus, params.omega_minus
    cp, cm = np.cos(wp * t), np.cos(wm * t)
    sp, sm = _sin_over(wp, t, w0), _sin_over(wm, t, w0)
    kp = (w0**2 + wp**2) / (2 * w0)
    km = (w0**2 + wm**2) / (2 * w0)
    r_aa = 0.5 * (cm + cp) - 0.5j * (km * sm + kp * sp)
    r_ab = 0.5 * (cp - cm) - 0.5j * (kp * sp - km * sm)
    r_aad = 0.5j * g * (sm - sp)
    r_abd = -0.5j * g * (sm + sp)
    return r_aa, r_ab, r_aad, r_abd


@dataclass(frozen=True)
class RMatrix:
    entries: np.ndarray
    time: float
    omega_plus: float
    omega_minus: float

    @property
    def aa(self) -> complex:
        return self.entries[0, 0]

    @property
    def ab(self) -> complex:
        return self.entries[0, 1]

    @property
    def aad(self) -> complex:
        return self.entries[0, 2]

    @property
    def abd(self) -> complex:
        return self.entries[0, 3]

    @property
    def ba(self) -> complex:
        return self.entries[1, 0]

    @property
    def bb(self) -> complex:
        return self.entries[1, 1]

    @property
    def bad(self) -> complex:
        return self.entries[1, 2]

    @property
    def bbd(self) -> complex:
        return self.entries[1, 3]

    def bosonic_norm(self) -> float:
        """|R_aa|^2 + |R_ab|^2 - |R_aa^dag|^2 - |R_ab^dag|^2, equal to [a(t), a^dag(t)]."""
        return abs(self.aa) ** 2 + abs(self.ab) ** 2 - abs(self.aad) ** 2 - abs(self.abd) ** 2

    def commutator_ab(self) -> complex:
        """[a(t), b(t)] reconstructed from the entries."""
        return self.aa * self.bad - self.aad * self.ba + self.ab * self.bbd - self.abd * self.bb

    def commutator_ab_dag(self) -> complex:
        """[a(t), b^dag(t)] reconstructed from the entries."""
        return (
            self.aa * np.conj(self.ba)
            - self.aad * np.conj(self.bad)
            + self.ab * np.conj(self.bb)
            - self.abd * np.conj(self.bbd)
        )


def build_r_matrix(params: ModelParams, t: float) -> RMatrix:
    _require(params, Model.OSC_CRT)
    if t < 0:
        raise InvalidArgumentError("time must be non-negative")
    r_aa, r_ab, r_aad, r_abd = (complex(x) for x in _r_entries(params, np.asarray(float(t))))
    top = np.array([r_aa, r_ab, r_aad, r_abd])
    # b-row follows from the a <-> b exchange symmetry of the Hamiltonian
    mid = np.array([r_ab, r_aa, r_abd, r_aad])
    entries = np.empty((4, 4), dtype=complex)
    entries[0] = top
    entries[1] = mid
    # a^dag(t), b^dag(t) rows: conjugate coefficients, creation/annihilation swapped
    entries[2] = np.conj(top[[2, 3, 0, 1]])
    entries[3] = np.conj(mid[[2, 3, 0, 1]])
    return RMatrix(entries, float(t), params.omega_plus, params.omega_minus)


def _crt_moments(charger: ChargerState) -> tuple[float, complex]:
    return charger.number_moment, complex(charger.pair_moment)


def crt_stored_energy(params: ModelParams, charger: ChargerState, tau):
    _require(params, Model.OSC_CRT)
    t = _times(tau)
    K, aa = _crt_moments(charger)
    r_aa, r_ab, r_aad, r_abd = _r_entries(params, t)
    r_ba, r_bad, r_bbd = r_ab, r_abd, r_aad
    val = (
        abs(r_bad) ** 2
        + abs(r_bbd) ** 2
        + K * (abs(r_bad) ** 2 + abs(r_ba) ** 2)
        + 2.0 * np.real(aa * np.conj(r_bad) * r_ba)
    )
    return _out(params.omega0 * val, tau)


def crt_charger_energy(params: ModelParams, charger: ChargerState, tau):
    _require(params, Model.OSC_CRT)
    t = _times(tau)
    K, aa = _crt_moments(charger)
    r_aa, r_ab, r_aad, r_abd = _r_entries(params, t)
    val = (
        abs(r_abd) ** 2
        + abs(r_aad) ** 2
        + K * (abs(r_aad) ** 2 + abs(r_aa) ** 2)
        + 2.0 * np.real(aa * np.conj(r_aad) * r_aa)
    )
    return _out(params.omega0 * val, tau)


def crt_switch_energy(params: ModelParams, charger: ChargerState, tau):
    """Switching work, minus the interaction energy at the end of the window."""
    _require(params, Model.OSC_CRT)
    t = _times(tau)
    K, aa = _crt_moments(charger)
    r_aa, r_ab, r_aad, r_abd = _r_entries(params, t)
    r_ba, r_bb, r_bad, r_bbd = r_ab, r_aa, r_abd, r_aad
    c = np.conj
    first = (r_ab + c(r_abd)) * (r_bbd + c(r_bb))
    second = (r_aa + c(r_aad)) * (r_bad + c(r_ba))
    third = aa * (r_aa + c(r_aad)) * (r_ba + c(r_bad))
    val = -2.0 * np.real(first) - 2.0 * K * np.real(second) - 2.0 * np.real(third)
    return _out(params.g * val, tau)


# --- dispatch ---------------------------------------------------------------


@dataclass(frozen=True)
class EnergySeries:
    e_s: np.ndarray
    e_a: np.ndarray
    e_switch: np.ndarray


def charger_K(params: ModelParams, charger: ChargerState | None) -> float:
    if params.model is Model.QUBIT_QUBIT:
        return 1.0
    if charger is None:
        raise InvalidArgumentError(f"model {params.model.value} needs a charger state")
    return charger.number_moment


def energies(params: ModelParams, charger: ChargerState | None, tau) -> EnergySeries:
    """Stored, charger and switching energies for any model on a time grid."""
    t = np.atleast_1d(_times(tau))
    w0 = params.omega0
    zero = np.zeros_like(t)
    model = params.model
    K = charger_K(params, charger)
    if model is Model.QUBIT_QUBIT:
        e_s = qq_stored_energy(params, t)
        return EnergySeries(e_s, w0 - e_s, zero)
    if model is Model.JAYNES_CUMMINGS:
        e_s = jc_stored_energy(params, charger, t)
        return EnergySeries(e_s, K * w0 - e_s, zero)
    if model is Model.OSC_RWA:
        e_s = oo_rwa_stored_energy(params, K, t)
        return EnergySeries(e_s, K * w0 - e_s, zero)
    if model is Model.DETUNING:
        if not math.isclose(K, 1.0):
            raise InvalidArgumentError(f"detuning protocol is defined for K = 1, got K = {K:g}")
        d = detuning_energies(params, t)
        return EnergySeries(d.e_s, d.e_a, d.e_switch)
    return EnergySeries(
        crt_stored_energy(params, charger, t),
        crt_charger_energy(params, charger, t),
        crt_switch_energy(params, charger, t),
    )
