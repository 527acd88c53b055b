"""Exactly-solvable charger/battery models: closed forms, a truncated-space oracle and figures of merit."""

__version__ = "0.1.0"

from .analytic import Model, ModelParams, RMatrix, build_r_matrix, energies
from .errors import (
    InstabilityError,
    InvalidArgumentError,
    NumericalIntegrityError,
    QBatteryError,
    ResourceError,
    ValidityDomainError,
)
from .metrics import EnergyTrace, MeritReport, merits, optimize, qsl_time, trace, transferred_energy
from .states import ChargerState, ExcitationDistribution, StateKind, make_coherent, make_fock, make_gibbs, make_state

__all__ = [
    "ChargerState",
    "EnergyTrace",
    "ExcitationDistribution",
    "InstabilityError",
    "InvalidArgumentError",
    "MeritReport",
    "Model",
    "ModelParams",
    "NumericalIntegrityError",
    "QBatteryError",
    "RMatrix",
    "ResourceError",
    "StateKind",
    "ValidityDomainError",
    "build_r_matrix",
    "energies",
    "make_coherent",
    "make_fock",
    "make_gibbs",
    "make_state",
    "merits",
    "optimize",
    "qsl_time",
    "trace",
    "transferred_energy",
]
