"""Run configurations, presets and the experiment drivers behind the CLI."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .isl import IslConfig, evolve_isl
from .ledger import LEDGER_COLUMNS, EvalLedger, predict_evals
from .models import Model, ModelSpec, encode, rabi_period
from .plot import render_svg
from .trajectory import (
    ExactReference, Measurement, Trajectory, make_row, n_steps, period_averaged_error, read_csv,
)
from .trotter import evolve_trotter
from .vqs import AnsatzSpec, evolve_vqs

METHODS = ("trotter", "isl", "vqs", "exact")
EXPERIMENTS = ("evolve", "table1", "detuning", "quanta-scaling")


@dataclass
class RunConfig:
    model: str = "jcm"
    n_atoms: int = 1
    spin: float = 0.5
    omega: float = 2.0
    coupling: float = 10.0
    omega_atom: float | None = None
    flip_tcm_sign: bool = False
    experiment: str = "evolve"
    method: str = "all"
    dt: float = 0.01
    t_max: float | None = None  # two Rabi periods when unset
    shots: int | None = None
    seed: int = 0
    isl_tolerance: float = 1e-4
    isl_max_blocks: int = 20
    isl_max_evals: int = 200_000
    paper_literal_entropy: bool = False
    vqs_lambda: float = 1e-6
    vqs_layers: int = 2
    vqs_mode: str = "direct"
    detunings: list[float] = field(default_factory=lambda: [-1.0, -0.5, 0.0, 0.5, 1.0])
    atom_counts: list[int] = field(default_factory=lambda: [1, 2, 3])
    out: str = "out"
    plot: bool = False
    dump_ansatz: bool = False
    param_history: bool = False

    def __post_init__(self):
        if self.model.lower() not in ("jcm", "tcm", "detuned_jcm"):
            raise ParameterError(f"model: unknown model {self.model!r}")
        if self.experiment not in EXPERIMENTS:
            raise ParameterError(f"experiment: expected one of {EXPERIMENTS}")
        if self.method not in METHODS + ("all",):
            raise ParameterError(f"method: expected one of {METHODS + ('all',)}")
        if not self.dt > 0:
            raise ParameterError("dt: must be > 0")
        if self.t_max is not None and self.t_max < self.dt:
            raise ParameterError("t_max: must be >= dt")
        if self.shots is not None and self.shots < 1:
            raise ParameterError("shots: must be >= 1")
        if self.vqs_mode not in ("direct", "hadamard"):
            raise ParameterError("vqs_mode: expected 'direct' or 'hadamard'")
        if self.vqs_lambda < 0:
            raise ParameterError("vqs_lambda: must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ParameterError(f"{unknown[0]}: unknown config field")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> RunConfig:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"config: cannot read {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ParameterError("config: top level must be an object")
        return cls.from_dict(data)

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **changes)

    def model_spec(self) -> ModelSpec:
        model = Model[self.model.upper()]
        sign = None
        if model is Model.TCM and self.flip_tcm_sign:
            sign = 1.0
        return ModelSpec(model, self.n_atoms, self.spin, self.omega, self.coupling,
                         self.omega_atom, sign)

    @property
    def measurement(self) -> Measurement:
        return Measurement(self.shots, self.seed)

    @property
    def isl_config(self) -> IslConfig:
        return IslConfig(tolerance=self.isl_tolerance, max_blocks=self.isl_max_blocks,
                         max_evals=self.isl_max_evals,
                         paper_literal_entropy=self.paper_literal_entropy)

    def resolved_t_max(self) -> float:
        if self.t_max is not None:
            return self.t_max
        spec = self.model_spec()
        if spec.model is Model.DETUNED_JCM:
            return 4 * math.pi / spec.coupling
        return 2 * rabi_period(spec)


PRESETS = {
    "jcm-fig2": RunConfig(),
    "tcm-fig3": RunConfig(model="tcm", n_atoms=2),
    "table1": RunConfig(experiment="table1"),
    "detuning": RunConfig(model="detuned_jcm", experiment="detuning", dt=0.001),
    "quanta-scaling": RunConfig(model="tcm", experiment="quanta-scaling", dt=0.001, t_max=1.0),
}


def preset(name: str) -> RunConfig:
    try:
        return dataclasses.replace(PRESETS[name])
    except KeyError:
        raise ParameterError(f"preset: unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def evolve_exact(spec: ModelSpec, dt: float, t_max: float, measurement: Measurement = Measurement(),
                 ledger: EvalLedger | None = None) -> Trajectory:
    reference = ExactReference(spec)
    traj = Trajectory("exact", spec, dt)
    for m in range(n_steps(dt, t_max) + 1):
        traj.rows.append(make_row(m, dt, reference.state(m * dt), reference, measurement, ledger))
    return traj


@dataclass
class RunResult:
    trajectories: dict[str, Trajectory] = field(default_factory=dict)
    ledgers: dict[str, EvalLedger] = field(default_factory=dict)
    extras: dict[str, object] = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)


def run_method(method: str, config: RunConfig) -> tuple[Trajectory, EvalLedger, object]:
    spec = config.model_spec()
    t_max = config.resolved_t_max()
    ledger = EvalLedger(method, config.measurement.k)
    extra = None
    if method == "trotter":
        traj = evolve_trotter(spec, config.dt, t_max, config.measurement, ledger)
    elif method == "isl":
        traj, extra = evolve_isl(spec, config.dt, t_max, config.isl_config, config.measurement, ledger)
    elif method == "vqs":
        ansatz = AnsatzSpec.for_model(spec, config.vqs_layers)
        traj, extra = evolve_vqs(spec, config.dt, t_max, ansatz, config.vqs_lambda, config.vqs_mode,
                                 config.measurement, ledger)
    elif method == "exact":
        traj = evolve_exact(spec, config.dt, t_max, config.measurement, ledger)
    else:
        raise ParameterError(f"method: unknown method {method!r}")
    return traj, ledger, extra


def _write_rows(path: Path, columns, rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r[c]) for c in columns])
    return path


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def comparison_rows(trajs: dict[str, Trajectory]) -> tuple[list[str], list[dict]]:
    first = next(iter(trajs.values()))
    cols = ["step", "t", "population_exact", "E_atom_exact", "E_system_exact"]
    methods = [m for m in trajs if m != "exact"]
    for name in methods:
        cols += [f"E_atom_{name}", f"E_system_{name}", f"abs_err_atom_{name}", f"abs_err_system_{name}"]
    rows = []
    for k, base in enumerate(first.rows):
        row = {c: base[c] for c in cols[:5]}
        for name in methods:
            r = trajs[name].rows[k]
            row.update({f"E_atom_{name}": r["E_atom"], f"E_system_{name}": r["E_system"],
                        f"abs_err_atom_{name}": r["abs_err_atom"],
                        f"abs_err_system_{name}": r["abs_err_system"]})
        rows.append(row)
    return cols, rows


def error_summary(trajs: dict[str, Trajectory], period: float) -> dict[str, dict[str, float]]:
    return {
        name: {col: period_averaged_error(tr, period, col) for col in ("abs_err_atom", "abs_err_system")}
        for name, tr in trajs.items() if name != "exact"
    }


def run_experiment(config: RunConfig) -> RunResult:
    if config.experiment == "table1":
        return run_table1(config)
    if config.experiment == "detuning":
        return run_detuning(config)
    if config.experiment == "quanta-scaling":
        return run_quanta_scaling(config)

    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    methods = ("trotter", "isl", "vqs", "exact") if config.method == "all" else (config.method,)
    result = RunResult()
    for method in methods:
        traj, ledger, extra = run_method(method, config)
        result.trajectories[method] = traj
        result.ledgers[method] = ledger
        path = out / f"trajectory_{method}.csv"
        traj.to_csv(path)
        result.files.append(path)
        if method == "isl" and config.dump_ansatz:
            text = "".join(f"# step {r.step} cost {r.cost:.3e}\n{r.ansatz.describe()}\n" for r in extra)
            (out / "isl_ansatz.txt").write_text(text)
            result.files.append(out / "isl_ansatz.txt")
        if method == "vqs" and config.param_history:
            extra.to_csv(out / "vqs_parameters.csv")
            result.files.append(out / "vqs_parameters.csv")

    ledger_rows = [r for m in methods for r in result.ledgers[m].rows()]
    result.files.append(_write_rows(out / "ledger.csv", LEDGER_COLUMNS, ledger_rows))
    depth_cols = ("step", "method", "total_depth", "two_qubit_depth")
    result.files.append(_write_rows(out / "depths.csv", depth_cols,
                                    [r for r in ledger_rows if r["total_depth"] != ""]))
    if len(methods) > 1:
        cols, rows = comparison_rows(result.trajectories)
        result.files.append(_write_rows(out / "comparison.csv", cols, rows))
    spec = config.model_spec()
    if spec.model is not Model.DETUNED_JCM:
        try:
            result.extras["period_averaged_errors"] = error_summary(result.trajectories, rabi_period(spec))
        except ParameterError:
            pass
    if config.plot:
        series_files = {m: out / f"trajectory_{m}.csv" for m in methods if m != "exact"}
        # every trajectory carries the exact reference column
        series_files["exact"] = out / f"trajectory_{methods[-1]}.csv"
        path = out / "plot.svg"
        _plot_with_exact(series_files, path)
        result.files.append(path)
    return result


def _plot_with_exact(files: dict[str, Path], path: Path) -> None:
    series = {}
    for name, f in files.items():
        data = read_csv(f)
        col = "E_atom_exact" if name == "exact" else "E_atom"
        series[name] = (data["t"], data[col])
    path.write_text(render_svg(series, "t", "atom energy"))


def run_table1(config: RunConfig, k: int = 1000, n_p: int = 7, n_pm: int = 18,
               n_l: float = 5.5, n_ev: float = 919) -> RunResult:
    values = {
        "trotter": predict_evals("trotter", k, n_p),
        "isl": predict_evals("isl", k, n_p, n_l=n_l, n_ev=n_ev),
        "vqs": predict_evals("vqs", k, n_p, n_pm=n_pm),
    }
    return RunResult(extras={"table1": values})


def first_minimum(t: np.ndarray, y: np.ndarray) -> float:
    """Time of the first interior local minimum, refined by a parabola through three samples."""
    for i in range(1, len(y) - 1):
        if y[i] < y[i - 1] and y[i] <= y[i + 1]:
            y0, y1, y2 = y[i - 1], y[i], y[i + 1]
            denom = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
            return float(t[i] + shift * (t[1] - t[0]))
    raise ParameterError("t_max: too short to reach the first minimum")


def oscillation_amplitude(t: np.ndarray, y: np.ndarray) -> float:
    """``max - min`` over one period, the period being twice the first-minimum time."""
    half = first_minimum(t, y)
    window = t <= 2 * half + 1e-12
    return float(y[window].max() - y[window].min())


def run_detuning(config: RunConfig) -> RunResult:
    base = config.replace(model="detuned_jcm", n_atoms=1)
    t_max = base.resolved_t_max() if config.t_max is None else config.t_max
    rows = []
    for delta in config.detunings:
        spec = base.replace(omega_atom=base.omega + delta).model_spec()
        traj = evolve_trotter(spec, config.dt, t_max)
        e_field = traj.column("E_field")
        rows.append({"detuning": float(delta), "omega_atom": spec.atom_frequency,
                     "amplitude": oscillation_amplitude(traj.times, e_field),
                     "half_period": first_minimum(traj.times, e_field)})
    result = RunResult(extras={"detuning": rows})
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    result.files.append(_write_rows(out / "detuning.csv", ("detuning", "omega_atom", "amplitude",
                                                          "half_period"), rows))
    return result


def run_quanta_scaling(config: RunConfig) -> RunResult:
    rows = []
    for n in config.atom_counts:
        if n not in (1, 2, 3):
            raise ParameterError("atom_counts: entries must be 1, 2 or 3")
        model = "jcm" if n == 1 else "tcm"
        spec = config.replace(model=model, n_atoms=n).model_spec()
        t_max = config.t_max if config.t_max is not None else 2 * rabi_period(spec)
        traj = evolve_trotter(spec, config.dt, t_max)
        t_min = first_minimum(traj.times, traj.column("E_atom"))
        rows.append({"n_atoms": n, "t_first_min": t_min, "frequency": 2 * math.pi / t_min})
    ref = next((r["frequency"] for r in rows if r["n_atoms"] == 1), None)
    for r in rows:
        r["ratio"] = r["frequency"] / ref if ref else float("nan")
        r["expected"] = math.sqrt(r["n_atoms"])
    result = RunResult(extras={"quanta_scaling": rows})
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    result.files.append(_write_rows(out / "quanta_scaling.csv",
                                    ("n_atoms", "t_first_min", "frequency", "ratio", "expected"), rows))
    return result


def hamiltonian_text(config: RunConfig) -> str:
    h, _ = encode(config.model_spec())
    return h.to_text()
