"""Figures of merit, optimal charging times and the transferred-energy ledger."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import analytic, oracle
from .analytic import Model, ModelParams
from .errors import InvalidArgumentError, NumericalIntegrityError
from .states import ChargerState

DEFAULT_GRID = 2000
DEFAULT_REFINEMENT_TOL = 1e-9
# relative spread within which two maxima count as the same value
TIE_RTOL = 1e-9
ORACLE_CONVERGENCE_TOL = 1e-9
ORACLE_CONVERGENCE_FLOOR = 1e-11

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def transferred_energy(e_s, e_switch, e_a):
    """Stored energy minus the part of the switching debit the charger cannot cover.

    Negative results are returned as-is.
    """
    e_s, e_switch, e_a = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (e_s, e_switch, e_a)))
    out = e_s - np.maximum(0.0, e_switch - e_a)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EnergyTrace:
    times: np.ndarray
    e_s: np.ndarray
    p_s: np.ndarray
    e_a: np.ndarray
    e_switch: np.ndarray
    e_t: np.ndarray
    oracle_deviation: dict[str, float] | None = None

    def columns(self) -> dict[str, np.ndarray]:
        return {
            "tau": self.times,
            "e_s": self.e_s,
            "p_s": self.p_s,
            "e_a": self.e_a,
            "e_switch": self.e_switch,
            "e_t": self.e_t,
        }


def _check_grid(times) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1 or t.size == 0:
        raise InvalidArgumentError("time grid must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(t)) or t[0] < 0 or np.any(np.diff(t) <= 0):
        raise InvalidArgumentError("time grid must be finite, non-negative and strictly increasing")
    return t


def trace(
    params: ModelParams,
    charger: ChargerState | None,
    times,
    cross_check: bool = False,
) -> EnergyTrace:
    t = _check_grid(times)
    series = analytic.energies(params, charger, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        p_s = np.where(t > 0, series.e_s / np.where(t > 0, t, 1.0), 0.0)
    out = EnergyTrace(
        times=t,
        e_s=series.e_s,
        p_s=p_s,
        e_a=series.e_a,
        e_switch=series.e_switch,
        e_t=transferred_energy(series.e_s, series.e_switch, series.e_a),
    )
    if cross_check:
        out = replace(out, oracle_deviation=compare_with_oracle(params, charger, t).max_abs)
    return out


# --- optimisation -------------------------------------------------------------


@dataclass(frozen=True)
class MeritReport:
    max_energy: float
    time_at_max_energy: float
    max_power: float
    time_at_max_power: float
    power_at_max_energy: float
    qsl_time: float | None = None

    def rescaled(self, time_factor: float) -> "MeritReport":
        """Convert a report computed in a scaled time x = t / time_factor."""
        return MeritReport(
            max_energy=self.max_energy,
            time_at_max_energy=self.time_at_max_energy * time_factor,
            max_power=self.max_power / time_factor,
            time_at_max_power=self.time_at_max_power * time_factor,
            power_at_max_energy=self.power_at_max_energy / time_factor,
            qsl_time=self.qsl_time,
        )

    def as_dict(self) -> dict[str, float | None]:
        return {
            "max_energy": self.max_energy,
            "time_at_max_energy": self.time_at_max_energy,
            "max_power": self.max_power,
            "time_at_max_power": self.time_at_max_power,
            "power_at_max_energy": self.power_at_max_energy,
            "qsl_time": self.qsl_time,
        }


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Abscissa of the maximum of a unimodal f on [a, b], to within tol."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _polish(f: Callable[[float], float], x: float, lo: float, hi: float, spacing: float) -> float:
    """Sharpen a flat-topped maximum by rooting a central-difference derivative.

    Golden-section search alone resolves a smooth maximum only to about
    sqrt(machine epsilon) relative, because f is quadratic near the peak.
    """
    h = 1e-4 * spacing
    w = 1e-2 * spacing

    def deriv(y: float) -> float:
        return (f(y + h) - f(y - h)) / (2 * h)

    left, right = max(lo + h, x - w), min(hi - h, x + w)
    if not left < x < right:
        return x
    dl, dr = deriv(left), deriv(right)
    if not (dl > 0 > dr):
        return x
    return brentq(deriv, left, right, xtol=1e-15 * max(abs(x), 1.0), rtol=4 * np.finfo(float).eps)


def _argmax(f: Callable[[float], float], grid: np.ndarray, values: np.ndarray, tol: float) -> tuple[float, float]:
    """Earliest global maximizer of f, refined around every grid-local maximum."""
    n = grid.size
    candidates = [
        i
        for i in range(n)
        if (i == 0 or values[i] >= values[i - 1]) and (i == n - 1 or values[i] >= values[i + 1])
    ]
    spacing = float(grid[1] - grid[0]) if n > 1 else 1.0
    top = values.max()
    scale = max(abs(top), np.finfo(float).tiny)
    refined: list[tuple[float, float]] = []
    for i in candidates:
        # a grid-local peak far below the best cannot win after refinement
        if values[i] < top - 0.5 * scale:
            continue
        if i in (0, n - 1):
            refined.append((float(grid[i]), float(values[i])))
            continue
        lo, hi = float(grid[i - 1]), float(grid[i + 1])
        x = golden_section_max(f, lo, hi, tol)
        x = _polish(f, x, lo, hi, spacing)
        refined.append((x, float(f(x))))
    best = max(v for _, v in refined)
    for x, v in sorted(refined):
        if v >= best - TIE_RTOL * max(abs(best), np.finfo(float).tiny):
            return x, v
    raise AssertionError("unreachable")  # pragma: no cover


def optimize(
    energy: Callable | EnergyTrace,
    t_max: float | None = None,
    t_min: float = 0.0,
    n_grid: int = DEFAULT_GRID,
    refinement_tol: float = DEFAULT_REFINEMENT_TOL,
    qsl_time: float | None = None,
) -> MeritReport:
    """Maximize stored energy and mean power over a charging-time window.

    ``energy`` is either a vectorized callable E_s(t) (grid scan followed by
    golden-section refinement) or an ``EnergyTrace`` (grid values only).
    Ties are broken towards the earliest time.
    """
    if isinstance(energy, EnergyTrace):
        return _optimize_trace(energy, qsl_time)
    if t_max is None or not t_max > t_min >= 0:
        raise InvalidArgumentError("need a window 0 <= t_min < t_max")
    if n_grid < 3:
        raise InvalidArgumentError("n_grid must be at least 3")
    if not refinement_tol > 0:
        raise InvalidArgumentError("refinement_tol must be positive")

    def e_of(x: float) -> float:
        v = float(energy(x))
        if not math.isfinite(v):
            raise NumericalIntegrityError(f"non-finite energy at t = {x!r}")
        return v

    def p_of(x: float) -> float:
        return e_of(x) / x

    grid = np.linspace(t_min, t_max, n_grid)
    e_grid = np.asarray(energy(grid), dtype=float)
    if not np.all(np.isfinite(e_grid)):
        raise NumericalIntegrityError("energy function returned non-finite values on the grid")
    t_bar, e_bar = _argmax(e_of, grid, e_grid, refinement_tol)

    p_grid_t = grid[grid > 0]
    p_grid = e_grid[grid > 0] / p_grid_t
    t_tilde, p_tilde = _argmax(p_of, p_grid_t, p_grid, refinement_tol)

    p_bar = e_bar / t_bar if t_bar > 0 else math.nan
    return MeritReport(e_bar, t_bar, p_tilde, t_tilde, p_bar, qsl_time)


def _optimize_trace(tr: EnergyTrace, qsl_time: float | None) -> MeritReport:
    if not np.all(np.isfinite(tr.e_s)):
        raise NumericalIntegrityError("trace contains non-finite energies")
    i = int(np.argmax(tr.e_s))
    pos = tr.times > 0
    j = int(np.argmax(tr.p_s[pos]))
    t_bar = float(tr.times[i])
    e_bar = float(tr.e_s[i])
    return MeritReport(
        e_bar,
        t_bar,
        float(tr.p_s[pos][j]),
        float(tr.times[pos][j]),
        e_bar / t_bar if t_bar > 0 else math.nan,
        qsl_time,
    )


# --- quantum speed limit -----------------------------------------------------


def qsl_time(mean_gap: float, std_dev: float) -> float:
    """Minimal time to reach an orthogonal state: pi / (2 min(<H>, <dH>))."""
    if not (mean_gap > 0 and std_dev > 0):
        raise InvalidArgumentError(f"QSL inputs must be positive, got {mean_gap!r}, {std_dev!r}")
    return math.pi / (2.0 * min(mean_gap, std_dev))


@dataclass(frozen=True)
class QSLInputs:
    mean_gap: float
    std_dev: float


def qsl_inputs(params: ModelParams, charger: ChargerState | None) -> QSLInputs:
    """Energy above the ground state and energy spread of the initial product state.

    Valid for the excitation-conserving models, whose ground energy is zero and
    whose interaction contributes g^2 K to the variance.
    """
    if not params.model.commuting:
        raise InvalidArgumentError(f"QSL inputs are defined for commuting models, not {params.model.value}")
    w0, g = params.omega0, params.g
    if params.model is Model.QUBIT_QUBIT:
        K, var_n = 1.0, 0.0
    else:
        if charger is None:
            raise InvalidArgumentError("charger state required")
        K, var_n = charger.number_moment, charger.number_variance
    return QSLInputs(mean_gap=K * w0, std_dev=math.sqrt(var_n * w0 * w0 + K * g * g))


def jc_qsl_inputs(params: ModelParams, charger: ChargerState) -> QSLInputs:
    if params.model is not Model.JAYNES_CUMMINGS:
        raise InvalidArgumentError("jc_qsl_inputs needs the Jaynes-Cummings model")
    return qsl_inputs(params, charger)


def merits(
    params: ModelParams,
    charger: ChargerState | None,
    x_max: float,
    n_grid: int = DEFAULT_GRID,
    refinement_tol: float = DEFAULT_REFINEMENT_TOL,
) -> MeritReport:
    """Figures of merit over the window g*tau in [0, x_max].

    Refinement runs in the dimensionless time g*tau; the report is returned
    in physical units (times in 1/omega0 when omega0 = 1).
    """
    g = params.g
    if g <= 0:
        raise InvalidArgumentError("merits need a positive coupling g")

    def e_of(x):
        return analytic.energies(params, charger, np.asarray(x, dtype=float) / g).e_s

    def e_scalar(x):
        return e_of(x) if np.ndim(x) else float(e_of(np.atleast_1d(x))[0])

    qsl = None
    if params.model.commuting:
        q = qsl_inputs(params, charger)
        qsl = qsl_time(q.mean_gap, q.std_dev)
    report = optimize(e_scalar, x_max, n_grid=n_grid, refinement_tol=refinement_tol)
    return replace(report.rescaled(1.0 / g), qsl_time=qsl)


# --- oracle comparison -------------------------------------------------------


@dataclass(frozen=True)
class CrossCheckReport:
    max_abs: dict[str, float]
    max_rel: dict[str, float]
    tolerance: float
    margin: int

    @property
    def passed(self) -> bool:
        return all(v <= self.tolerance for v in self.max_abs.values())


def default_tolerance(params: ModelParams, charger: ChargerState | None, times) -> float:
    """1e-6 omega0, 1e-6 K omega0 beyond the RWA; detuning adds its perturbative budget."""
    K = analytic.charger_K(params, charger)
    w0 = params.omega0
    if params.model is Model.OSC_CRT:
        return 1e-6 * K * w0
    if params.model is Model.DETUNING:
        g, dw = params.g, params.delta_omega
        x_max = abs(g) * float(np.max(times))
        return 1e-6 * w0 + abs(g) ** 3 / dw**2 * max(x_max, 1.0)
    return 1e-6 * w0


def compare_with_oracle(
    params: ModelParams,
    charger: ChargerState | None,
    times,
    tolerance: float | None = None,
    max_dim: int = oracle.DEFAULT_MAX_DIM,
) -> CrossCheckReport:
    t = _check_grid(times)
    tol = default_tolerance(params, charger, t) if tolerance is None else tolerance
    # cutoff convergence is resolved well below the comparison tolerance, but never
    # chased below what double precision can distinguish
    conv_tol = min(ORACLE_CONVERGENCE_TOL, max(tol * 1e-2, ORACLE_CONVERGENCE_FLOOR))
    ref, margin = oracle.converged_run(params, charger, t, tol=conv_tol, max_dim=max_dim)
    an = analytic.energies(params, charger, t)
    e_t_ref = transferred_energy(ref.e_b, ref.e_switch, ref.e_a)
    e_t_an = transferred_energy(an.e_s, an.e_switch, an.e_a)
    pairs = {
        "e_s": (an.e_s, ref.e_b),
        "e_a": (an.e_a, ref.e_a),
        "e_switch": (an.e_switch, ref.e_switch),
        "e_t": (e_t_an, e_t_ref),
    }
    max_abs, max_rel = {}, {}
    for name, (x, y) in pairs.items():
        diff = np.abs(np.asarray(x) - np.asarray(y))
        max_abs[name] = float(diff.max())
        scale = np.maximum(np.abs(y), 1e-300)
        max_rel[name] = float(np.max(np.where(np.abs(y) > 1e-12, diff / scale, 0.0)))
    return CrossCheckReport(max_abs, max_rel, tol, margin)
