"""Measurement settings, energy readout and the per-step trajectory table."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .exact import ExactPropagator, prepare
from .ledger import OBSERVABLES, EvalLedger
from .models import ModelSpec, ObservableSet, encode, initial_population, initial_state
from .pauli import PauliSum
from .statevector import apply_pauli, parity_probability, sample_pm1_mean

COLUMNS = (
    "step", "t", "E_system", "E_atom", "E_field", "E_atom_exact", "E_system_exact",
    "abs_err_atom", "abs_err_system", "population", "population_exact", "aux", "converged",
)


@dataclass(frozen=True)
class Measurement:
    """Exact expectation values (``shots is None``) or ``shots`` per Pauli string."""

    shots: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.shots is not None and self.shots < 1:
            raise ParameterError("shots must be >= 1")

    @property
    def exact(self) -> bool:
        return self.shots is None

    @property
    def k(self) -> int:
        return 1 if self.shots is None else self.shots

    def step_seed(self, step: int, stream: int = 0) -> int:
        # distinct, reproducible 64-bit seeds per step and consumer
        return int(np.random.SeedSequence([self.seed, step, stream]).generate_state(1, np.uint64)[0])


EXACT = Measurement()


def measure_energies(
    state: np.ndarray,
    obs: ObservableSet,
    measurement: Measurement = EXACT,
    ledger: EvalLedger | None = None,
    step: int = 0,
) -> tuple[float, float, float]:
    """System, atom and field energies of ``state``.

    In shot mode every string of the Hamiltonian is sampled once with
    ``shots`` repetitions; the atom and field readings reuse the Z samples.
    """
    strings = list(dict.fromkeys(t.axes for op in (obs.system, obs.atom, obs.field) for t in op.terms))
    if measurement.exact:
        values = {s: expectation_of_string(state, s) for s in strings}
    else:
        rng = np.random.default_rng(measurement.step_seed(step, 1))
        values = {
            s: sample_pm1_mean(parity_probability(state, s), measurement.shots, rng) for s in strings
        }
    if ledger is not None:
        ledger.record(OBSERVABLES, measurement.k * len(strings), step)

    def read(op: PauliSum) -> float:
        return op.identity_offset + sum(t.coefficient * values[t.axes] for t in op.terms)

    return read(obs.system), read(obs.atom), read(obs.field)


def expectation_of_string(state: np.ndarray, axes: str) -> float:
    return float(np.vdot(state, apply_pauli(state, axes)).real)


@dataclass
class Trajectory:
    method: str
    spec: ModelSpec
    dt: float
    rows: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in self.rows:
            writer.writerow([_fmt(r[c]) for c in COLUMNS])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return ""
        return f"{float(v):.12g}"
    return str(v)


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    out = {}
    for name in rows[0] if rows else []:
        try:
            out[name] = np.array([float(r[name]) if r[name] != "" else np.nan for r in rows])
        except ValueError:
            out[name] = np.array([r[name] for r in rows])
    return out


class ExactReference:
    """Exact-oracle energies and start-state population at any time."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.hamiltonian, self.observables = encode(spec)
        self.propagator: ExactPropagator = prepare(self.hamiltonian)
        self.psi0 = initial_state(spec)

    def state(self, t: float) -> np.ndarray:
        return self.propagator.evolve(self.psi0, t)

    def energies(self, t: float) -> tuple[float, float, float]:
        return measure_energies(self.state(t), self.observables)

    def population(self, t: float) -> float:
        return initial_population(self.spec, self.state(t))


def make_row(
    step: int,
    dt: float,
    state: np.ndarray,
    reference: ExactReference,
    measurement: Measurement = EXACT,
    ledger: EvalLedger | None = None,
    aux: float = float("nan"),
    converged: bool = True,
) -> dict:
    t = step * dt
    e_sys, e_atom, e_field = measure_energies(state, reference.observables, measurement, ledger, step)
    ex_sys, ex_atom, _ = reference.energies(t)
    return {
        "step": step,
        "t": t,
        "E_system": e_sys,
        "E_atom": e_atom,
        "E_field": e_field,
        "E_atom_exact": ex_atom,
        "E_system_exact": ex_sys,
        "abs_err_atom": abs(e_atom - ex_atom),
        "abs_err_system": abs(e_sys - ex_sys),
        "population": initial_population(reference.spec, state),
        "population_exact": reference.population(t),
        "aux": aux,
        "converged": converged,
    }


def n_steps(dt: float, t_max: float) -> int:
    if dt <= 0:
        raise ParameterError("dt must be > 0")
    if t_max < dt:
        raise ParameterError("t_max must be >= dt")
    return int(math.floor(t_max / dt + 1e-9))


def period_averaged_error(traj: Trajectory, period: float, column: str = "abs_err_atom") -> float:
    """Mean of ``column`` over the whole periods contained in the run."""
    t = traj.times
    n_periods = math.floor((t[-1] + 1e-9) / period)
    if n_periods < 1:
        raise ParameterError("trajectory shorter than one period")
    mask = t <= n_periods * period + 1e-9
    return float(np.mean(traj.column(column)[mask]))


def per_period_errors(traj: Trajectory, period: float, column: str = "abs_err_atom") -> list[float]:
    t = traj.times
    err = traj.column(column)
    n_periods = math.floor((t[-1] + 1e-9) / period)
    return [
        float(np.mean(err[(t >= k * period - 1e-9) & (t < (k + 1) * period - 1e-9)]))
        for k in range(n_periods)
    ]
