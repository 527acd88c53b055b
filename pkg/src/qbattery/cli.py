"""Command-line front end.

    qbattery trace   --model jc --state fock --K 3 --g 0.1 --tmax 10 --output out.csv
    qbattery trace   --preset fig5a --output-dir results/
    qbattery merits  --model qubit-qubit --g 0.1
    qbattery cross-check --model osc-crt --g 0.35 --K 3 --state fock
    qbattery preset --list

Exit codes: 0 success, 1 I/O failure, 2 validation error, 3 tolerance failure,
4 dimension cap exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, metrics, oracle
from .analytic import Model, ModelParams
from .errors import InvalidArgumentError, QBatteryError, ResourceError
from .states import DEFAULT_TAIL_TOL, ChargerState, StateKind, make_state

OUTPUT_DIR_ENV = "QBATTERY_OUTPUT_DIR"

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_TOLERANCE = 3
EXIT_RESOURCE = 4

TIME_AXES = ("g", "sqrtK-g", "omega0", "omega-plus", "omega-minus")
ENERGY_UNITS = ("omega0", "K-omega0")


@dataclass(frozen=True)
class RunConfig:
    model: Model = Model.QUBIT_QUBIT
    state: StateKind = StateKind.FOCK
    K: float = 1.0
    g: float = 0.1
    delta_omega: float | None = None
    tmax: float = 2 * math.pi
    n_points: int = 1001
    time_axis: str | None = None
    energy_unit: str | None = None
    tail_tol: float = DEFAULT_TAIL_TOL
    refinement_tol: float = metrics.DEFAULT_REFINEMENT_TOL
    cross_check: bool = False
    fmt: str = "csv"
    output: str | None = None
    label: str = "run"

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "state", StateKind(self.state))
        if self.time_axis is None:
            axis = "sqrtK-g" if self.model is Model.JAYNES_CUMMINGS else "g"
            object.__setattr__(self, "time_axis", axis)
        if self.energy_unit is None:
            unit = "K-omega0" if self.model.oscillator_battery else "omega0"
            object.__setattr__(self, "energy_unit", unit)
        if self.time_axis not in TIME_AXES:
            raise InvalidArgumentError(f"time axis must be one of {TIME_AXES}")
        if self.energy_unit not in ENERGY_UNITS:
            raise InvalidArgumentError(f"energy unit must be one of {ENERGY_UNITS}")
        if self.fmt not in ("csv", "json"):
            raise InvalidArgumentError("format must be csv or json")
        if self.n_points < 1:
            raise InvalidArgumentError("time grid is empty (n_points < 1)")
        if not (math.isfinite(self.tmax) and self.tmax > 0):
            raise InvalidArgumentError("tmax must be positive")
        if self.g <= 0:
            raise InvalidArgumentError("g must be positive (the time axes are scaled by g)")
        # re-run every physical gate before any computation
        self.params()
        self.charger()
        if self.time_axis == "omega-minus" and self.params().omega_minus <= 0:
            raise InvalidArgumentError("omega-minus time axis is degenerate at the critical coupling")

    def params(self) -> ModelParams:
        return ModelParams(self.model, self.g, delta_omega=self.delta_omega)

    def charger(self) -> ChargerState | None:
        if self.model is Model.QUBIT_QUBIT:
            return None
        return make_state(self.state, self.K, self.tail_tol)

    @property
    def K_eff(self) -> float:
        return 1.0 if self.model is Model.QUBIT_QUBIT else float(self.K)

    def axis_rate(self) -> float:
        """x = rate * tau for the configured time axis (omega0 = 1)."""
        p = self.params()
        return {
            "g": self.g,
            "sqrtK-g": math.sqrt(self.K_eff) * self.g,
            "omega0": 1.0,
            "omega-plus": p.omega_plus,
            "omega-minus": p.omega_minus,
        }[self.time_axis]

    def energy_scale(self) -> float:
        return self.K_eff if self.energy_unit == "K-omega0" else 1.0

    def axis_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.tmax, self.n_points)

    def metadata(self) -> dict[str, object]:
        meta: dict[str, object] = {"code_version": __version__}
        for f in dataclasses.fields(self):
            if f.name == "output":
                continue
            v = getattr(self, f.name)
            meta[f.name] = v.value if hasattr(v, "value") else v
        charger = self.charger()
        meta["tail_mass"] = charger.distribution.tail_mass if charger is not None else 0.0
        meta["omega0"] = 1.0
        return meta


@dataclass(frozen=True)
class FigurePreset:
    name: str
    description: str
    curves: tuple[RunConfig, ...] = field(default_factory=tuple)


# g -> omega0/2 is realized slightly below the critical point so that the
# omega_- tau axis is non-degenerate: omega_- = 1e-2 omega0.
G_NEAR_CRITICAL = 0.5 * (1.0 - 1e-4)


def _jc_curves(K: int) -> tuple[RunConfig, ...]:
    return tuple(
        RunConfig(Model.JAYNES_CUMMINGS, s, K, 0.1, tmax=10.0, label=f"K{K}_{s.value}")
        for s in StateKind
    )


def _crt_curves(g: float, axis: str, tmax: float) -> tuple[RunConfig, ...]:
    return tuple(
        RunConfig(Model.OSC_CRT, s, K, g, tmax=tmax, time_axis=axis, label=f"K{K}_{s.value}")
        for K in (3, 100)
        for s in (StateKind.FOCK, StateKind.COHERENT)
    )


def _presets() -> dict[str, FigurePreset]:
    qq = RunConfig(Model.QUBIT_QUBIT, g=0.1, tmax=2 * math.pi, label="qq")
    det = {
        sign: RunConfig(Model.DETUNING, StateKind.FOCK, 1, 0.1, delta_omega=0.5 * sign, label="K1")
        for sign in (1, -1)
    }
    items = [
        FigurePreset("fig2", "two qubits: E_s and P_s vs g tau", (qq,)),
        FigurePreset("fig3a", "JC, K=3: E_s vs sqrt(K) g tau, Fock/coherent/Gibbs", _jc_curves(3)),
        FigurePreset("fig3b", "JC, K=3: P_s vs sqrt(K) g tau", _jc_curves(3)),
        FigurePreset("fig3c", "JC, K=20: E_s vs sqrt(K) g tau", _jc_curves(20)),
        FigurePreset("fig3d", "JC, K=20: P_s vs sqrt(K) g tau", _jc_curves(20)),
        FigurePreset("fig4a", "detuning protocol, delta_omega=+omega0/2, g=omega0/10", (det[1],)),
        FigurePreset("fig4b", "detuning protocol, delta_omega=-omega0/2, g=omega0/10", (det[-1],)),
        FigurePreset("fig5a", "beyond RWA, g=0.35 omega0: E_s vs g tau", _crt_curves(0.35, "g", 10.0)),
        FigurePreset("fig5b", "beyond RWA, g->omega0/2: E_s vs omega_+ tau", _crt_curves(G_NEAR_CRITICAL, "omega-plus", 50.0)),
        FigurePreset("fig5c", "beyond RWA, g=0.35 omega0: switching energy vs g tau", _crt_curves(0.35, "g", 10.0)),
        FigurePreset("fig5d", "beyond RWA, g->omega0/2: switching energy vs omega_- tau", _crt_curves(G_NEAR_CRITICAL, "omega-minus", 0.5)),
        FigurePreset("fig5e", "beyond RWA, g=0.35 omega0: transferred energy vs g tau", _crt_curves(0.35, "g", 10.0)),
        FigurePreset("fig5f", "beyond RWA, g->omega0/2: transferred energy vs omega_- tau", _crt_curves(G_NEAR_CRITICAL, "omega-minus", 0.5)),
    ]
    return {p.name: p for p in items}


PRESETS = _presets()


# --- emission -----------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def scaled_columns(config: RunConfig, tr: metrics.EnergyTrace) -> dict[str, np.ndarray]:
    """Trace columns in the configured axis/energy units; p_s = e_s / tau column-wise."""
    x = tr.times * config.axis_rate()
    scale = config.energy_scale()
    e_s = tr.e_s / scale
    with np.errstate(divide="ignore", invalid="ignore"):
        p_s = np.where(x > 0, e_s / np.where(x > 0, x, 1.0), 0.0)
    return {
        "tau": x,
        "e_s": e_s,
        "p_s": p_s,
        "e_a": tr.e_a / scale,
        "e_switch": tr.e_switch / scale,
        "e_t": tr.e_t / scale,
    }


def render_trace(config: RunConfig, tr: metrics.EnergyTrace) -> str:
    cols = scaled_columns(config, tr)
    meta = config.metadata()
    meta["time_column"] = f"{config.time_axis} * tau"
    meta["energy_columns"] = f"units of {config.energy_unit}"
    meta["power_column"] = "e_s / tau (column-wise)"
    if tr.oracle_deviation is not None:
        meta["oracle_max_abs_deviation"] = tr.oracle_deviation
    if config.fmt == "json":
        doc = {"metadata": meta, "columns": {k: [float(v) for v in c] for k, c in cols.items()}}
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {json.dumps(v)}\n")
    names = list(cols)
    buf.write(",".join(names) + "\n")
    for row in zip(*(cols[n] for n in names)):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def render_record(config: RunConfig, record: dict[str, object]) -> str:
    meta = config.metadata()
    if config.fmt == "json":
        return json.dumps({"metadata": meta, "record": record}, indent=1) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {json.dumps(v)}\n")
    buf.write(",".join(record) + "\n")
    buf.write(",".join("" if v is None else _fmt(v) for v in record.values()) + "\n")
    return buf.getvalue()


def _write(text: str, target: str | Path) -> None:
    if str(target) == "-":
        sys.stdout.write(text)
        return
    path = Path(target)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- operations ---------------------------------------------------------------


def compute_trace(config: RunConfig) -> metrics.EnergyTrace:
    tau = config.axis_grid() / config.axis_rate()
    return metrics.trace(config.params(), config.charger(), tau, cross_check=config.cross_check)


def compute_merits(config: RunConfig) -> metrics.MeritReport:
    tau_max = config.tmax / config.axis_rate()
    return metrics.merits(
        config.params(),
        config.charger(),
        x_max=config.g * tau_max,
        n_grid=max(config.n_points, 3),
        refinement_tol=config.refinement_tol,
    )


def compute_cross_check(config: RunConfig, tolerance: float | None = None,
                        max_dim: int = oracle.DEFAULT_MAX_DIM) -> metrics.CrossCheckReport:
    tau = config.axis_grid() / config.axis_rate()
    return metrics.compare_with_oracle(config.params(), config.charger(), tau, tolerance, max_dim)


def _targets(configs: list[RunConfig], args, suffix: str) -> list[str]:
    if args.output is not None:
        if len(configs) > 1:
            raise InvalidArgumentError("--output names one file; use --output-dir for multi-curve presets")
        return [args.output]
    out_dir = Path(args.output_dir or os.environ.get(OUTPUT_DIR_ENV, "."))
    stem = args.preset or "run"
    return [
        str(out_dir / f"{stem}_{c.label}{suffix}.{c.fmt}") if len(configs) > 1 or args.preset
        else str(out_dir / f"{stem}{suffix}.{c.fmt}")
        for c in configs
    ]


def run_trace(configs: list[RunConfig], targets: list[str]) -> None:
    rendered = [render_trace(c, compute_trace(c)) for c in configs]
    for text, target in zip(rendered, targets):
        _write(text, target)


def run_merits(configs: list[RunConfig], targets: list[str]) -> None:
    rendered = [render_record(c, compute_merits(c).as_dict()) for c in configs]
    for text, target in zip(rendered, targets):
        _write(text, target)


# --- argument parsing -----------------------------------------------------------


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS), help="figure preset (overrides physics flags)")
    p.add_argument("--model", choices=[m.value for m in Model], default=Model.QUBIT_QUBIT.value)
    p.add_argument("--state", choices=[s.value for s in StateKind], default=StateKind.FOCK.value)
    p.add_argument("--K", type=float, default=1.0, help="mean charger excitation number")
    p.add_argument("--g", type=float, default=0.1, help="coupling in units of omega0")
    p.add_argument("--delta-omega", type=float, default=None, help="detuning in units of omega0")
    p.add_argument("--tmax", type=float, default=None, help="window end, in time-axis units")
    p.add_argument("--points", type=int, default=1001, help="grid size")
    p.add_argument("--time-axis", choices=TIME_AXES, default=None)
    p.add_argument("--energy-unit", choices=ENERGY_UNITS, default=None)
    p.add_argument("--tail-tol", type=float, default=DEFAULT_TAIL_TOL)
    p.add_argument("--refinement-tol", type=float, default=metrics.DEFAULT_REFINEMENT_TOL)
    p.add_argument("--cross-check", action="store_true", help="attach oracle deviations to traces")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None, help="output file ('-' for stdout)")
    p.add_argument("--output-dir", default=None, help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")


def configs_from_args(args) -> list[RunConfig]:
    if args.preset:
        base = PRESETS[args.preset].curves
        overrides = {"fmt": args.fmt, "cross_check": args.cross_check}
        if args.points != 1001:
            overrides["n_points"] = args.points
        if args.tmax is not None:
            overrides["tmax"] = args.tmax
        return [dataclasses.replace(c, **overrides) for c in base]
    model = Model(args.model)
    K = args.K
    if StateKind(args.state) is StateKind.FOCK and float(K).is_integer():
        K = int(K)
    return [
        RunConfig(
            model=model,
            state=StateKind(args.state),
            K=K,
            g=args.g,
            delta_omega=args.delta_omega,
            tmax=2 * math.pi if args.tmax is None else args.tmax,
            n_points=args.points,
            time_axis=args.time_axis,
            energy_unit=args.energy_unit,
            tail_tol=args.tail_tol,
            refinement_tol=args.refinement_tol,
            cross_check=args.cross_check,
            fmt=args.fmt,
            label=model.value,
        )
    ]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbattery", description="Charger-mediated quantum battery simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_trace = sub.add_parser("trace", help="write energy/power time traces")
    _add_config_args(p_trace)
    p_merits = sub.add_parser("merits", help="write optimal times and figures of merit")
    _add_config_args(p_merits)
    p_cc = sub.add_parser("cross-check", help="compare closed forms with the truncated-space oracle")
    _add_config_args(p_cc)
    p_cc.add_argument("--tolerance", type=float, default=None, help="absolute tolerance in omega0")
    p_cc.add_argument("--max-dim", type=int, default=oracle.DEFAULT_MAX_DIM, help="truncated-space dimension cap")
    p_pre = sub.add_parser("preset", help="inspect figure presets")
    p_pre.add_argument("--list", action="store_true", help="list presets")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "preset":
        for name, preset in PRESETS.items():
            print(f"{name:6s}  {preset.description}  [{', '.join(c.label for c in preset.curves)}]")
        return EXIT_OK
    try:
        configs = configs_from_args(args)
        if args.command == "trace":
            run_trace(configs, _targets(configs, args, ""))
        elif args.command == "merits":
            run_merits(configs, _targets(configs, args, "_merits"))
        else:
            status = EXIT_OK
            reports = []
            for c in configs:
                rep = compute_cross_check(c, args.tolerance, args.max_dim)
                reports.append({
                    "label": c.label,
                    "max_abs": rep.max_abs,
                    "max_rel": rep.max_rel,
                    "tolerance": rep.tolerance,
                    "cutoff_margin": rep.margin,
                    "passed": rep.passed,
                })
                if not rep.passed:
                    status = EXIT_TOLERANCE
            text = json.dumps(reports, indent=1) + "\n"
            _write(text, args.output if args.output is not None else "-")
            return status
    except ResourceError as exc:
        print(f"qbattery: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except QBatteryError as exc:
        print(f"qbattery: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"qbattery: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
