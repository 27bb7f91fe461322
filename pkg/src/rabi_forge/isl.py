"""Incremental structured learning: per-step recompilation of the Trotterised state.

Each time step builds the target ``X = [previous compiled circuit, Trotter
step]`` and grows a fresh ansatz ``Y`` of dressed-CNOT blocks until
``1 - |<0|Y^dag X|0>|^2`` drops below the tolerance. The initial-state X
gates form a fixed prefix of ``Y`` and are never optimised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Gate, cnot, rot, simplify
from .entanglement import select_pair
from .errors import ParameterError
from .ledger import COST_PROBES, EvalLedger, depth
from .models import ModelSpec, encode
from .optimize import fit_sinusoid, nelder_mead
from .statevector import run, zero_overlap
from .trajectory import EXACT, ExactReference, Measurement, Trajectory, make_row, n_steps
from .trotter import build_step, preparation_circuit

AXES = ("X", "Y", "Z")


@dataclass
class DressedBlock:
    """CNOT with one rotation per qubit before it and one per qubit after.

    Rotation order: control-before, target-before, control-after, target-after.
    """

    qubit_pair: tuple[int, int]
    axes: list[str] = field(default_factory=lambda: ["Z"] * 4)
    angles: list[float] = field(default_factory=lambda: [0.0] * 4)

    def __post_init__(self):
        c, t = self.qubit_pair
        if c == t:
            raise ParameterError("dressed block needs two distinct qubits")
        if len(self.axes) != 4 or len(self.angles) != 4:
            raise ParameterError("dressed block has exactly four rotations")

    def gates(self, first_slot: int | None = None) -> list[Gate]:
        c, t = self.qubit_pair
        qs = (c, t, c, t)

        def r(i):
            if first_slot is None:
                return rot(self.axes[i], qs[i], self.angles[i])
            return rot(self.axes[i], qs[i], slot=first_slot + i)

        return [r(0), r(1), cnot(c, t), r(2), r(3)]

    def describe(self) -> str:
        rots = " ".join(f"{a}:{x:+.6f}" for a, x in zip(self.axes, self.angles))
        return f"({self.qubit_pair[0]},{self.qubit_pair[1]}): {rots}"

    def copy(self) -> DressedBlock:
        return DressedBlock(self.qubit_pair, list(self.axes), list(self.angles))


@dataclass
class StructuralAnsatz:
    n_qubits: int
    prefix: Circuit
    blocks: list[DressedBlock] = field(default_factory=list)

    @property
    def n_parameters(self) -> int:
        return 4 * len(self.blocks)

    @property
    def params(self) -> np.ndarray:
        return np.array([a for b in self.blocks for a in b.angles], dtype=float)

    def set_params(self, params) -> None:
        for i, b in enumerate(self.blocks):
            b.angles = [float(v) for v in params[4 * i: 4 * i + 4]]

    def body(self) -> Circuit:
        """Parameterised block circuit, one slot per rotation."""
        gates = [g for i, b in enumerate(self.blocks) for g in b.gates(4 * i)]
        return Circuit(self.n_qubits, tuple(gates), self.n_parameters)

    def circuit(self, params=None) -> Circuit:
        """Prefix plus bound blocks."""
        if params is not None:
            self.set_params(params)
        gates = [g for b in self.blocks for g in b.gates()]
        return Circuit(self.n_qubits, self.prefix.gates + tuple(gates))

    @property
    def compiled(self) -> Circuit:
        return simplify(self.circuit())

    def copy(self) -> StructuralAnsatz:
        return StructuralAnsatz(self.n_qubits, self.prefix, [b.copy() for b in self.blocks])

    def describe(self) -> str:
        return "\n".join(b.describe() for b in self.blocks)


@dataclass(frozen=True)
class IslConfig:
    tolerance: float = 1e-4
    cycle_improvement_threshold: float = 0.01
    max_blocks: int = 20
    max_evals: int = 200_000
    max_cycles: int = 50
    nm_step: float = 0.05
    paper_literal_entropy: bool = False

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ParameterError("tolerance must be > 0")


def cost(target: Circuit, ansatz: StructuralAnsatz, params=None, measurement: Measurement = EXACT,
         rng: np.random.Generator | None = None) -> float:
    """``1 - |<0| Y^dag X |0>|^2`` from the circuit ``X`` followed by the inverted ansatz."""
    probe = target + ansatz.circuit(params).inverse()
    p0 = zero_overlap(probe)
    if not measurement.exact:
        rng = rng or np.random.default_rng(measurement.seed)
        p0 = rng.binomial(measurement.shots, min(1.0, p0)) / measurement.shots
    return float(min(1.0, max(0.0, 1.0 - p0)))


class Objective:
    """Cost of an ansatz against a fixed target state, counting evaluations.

    Equivalent to :func:`cost` but reuses the target state
    ``X|0>`` and the prefix state across evaluations.
    """

    def __init__(self, target_state: np.ndarray, ansatz: StructuralAnsatz,
                 measurement: Measurement = EXACT, rng: np.random.Generator | None = None):
        self.target_state = target_state
        self.ansatz = ansatz
        self.measurement = measurement
        self.rng = rng if rng is not None else np.random.default_rng(measurement.seed)
        self.prefix_state = run(ansatz.prefix)
        self.n_evals = 0
        self._body: Circuit | None = None
        self._structure = None

    def state(self, params=None) -> np.ndarray:
        structure = tuple((b.qubit_pair, tuple(b.axes)) for b in self.ansatz.blocks)
        if structure != self._structure:
            self._body = self.ansatz.body()
            self._structure = structure
        params = self.ansatz.params if params is None else params
        return run(self._body, params, initial=self.prefix_state)

    def exact_cost(self, params=None) -> float:
        overlap = np.vdot(self.target_state, self.state(params))
        return float(min(1.0, max(0.0, 1.0 - abs(overlap) ** 2)))

    def __call__(self, params=None) -> float:
        self.n_evals += 1
        c = self.exact_cost(params)
        if self.measurement.exact:
            return c
        k = self.measurement.shots
        return float(1.0 - self.rng.binomial(k, min(1.0, max(0.0, 1.0 - c))) / k)


@dataclass
class BlockResult:
    cost: float
    n_evals: int
    cycles: int
    budget_exhausted: bool = False


def optimize_block(ansatz: StructuralAnsatz, block_index: int, objective: Objective,
                   config: IslConfig = IslConfig()) -> BlockResult:
    """Rotation-by-rotation sweeps over one block until a sweep improves the cost by < 1%.

    For each rotation every axis is tried; the cost along one rotation angle
    is ``a + b cos(t) + c sin(t)``, fitted from probes at 0, pi/2 and pi and
    minimised in closed form.
    """
    block = ansatz.blocks[block_index]
    start_evals = objective.n_evals
    current = objective()
    cycles = 0
    exhausted = False
    while cycles < config.max_cycles:
        cycles += 1
        before = current
        for r in range(4):
            keep_axis, keep_angle = block.axes[r], block.angles[r]
            best = (current, keep_axis, keep_angle)
            block.angles[r] = 0.0
            c0 = objective()
            for axis in AXES:
                block.axes[r] = axis
                block.angles[r] = math.pi / 2
                c_half = objective()
                block.angles[r] = math.pi
                c_pi = objective()
                fit = fit_sinusoid(c0, c_half, c_pi)
                if fit.minimum < best[0]:
                    best = (max(0.0, fit.minimum), axis, fit.argmin)
            current, block.axes[r], block.angles[r] = best
            if objective.n_evals - start_evals >= config.max_evals:
                exhausted = True
                break
        if exhausted or current <= 1e-14:
            break
        if before <= 0 or (before - current) / before < config.cycle_improvement_threshold:
            break
    if objective.measurement.exact:
        current = objective.exact_cost()
    return BlockResult(current, objective.n_evals - start_evals, cycles, exhausted)


def global_optimize(ansatz: StructuralAnsatz, objective: Objective, config: IslConfig = IslConfig(),
                    current_cost: float | None = None) -> BlockResult:
    """Nelder-Mead over every angle with the axes held fixed."""
    if not ansatz.blocks:
        raise ParameterError("global optimisation needs a non-empty ansatz")
    res = nelder_mead(
        objective, ansatz.params, step=config.nm_step, f_spread=config.tolerance / 10,
        max_evals=config.max_evals, f0=current_cost,
    )
    ansatz.set_params(res.x)
    return BlockResult(res.fun, res.n_evals, 1, not res.converged)


@dataclass
class StepRecord:
    step: int
    ansatz: StructuralAnsatz
    cost: float
    n_blocks: int
    n_evals: int
    converged: bool
    compiled: Circuit


def compile_step(target_state: np.ndarray, prefix: Circuit, n_qubits: int, config: IslConfig,
                 measurement: Measurement = EXACT, rng: np.random.Generator | None = None
                 ) -> tuple[StructuralAnsatz, float, int, bool]:
    """Grow blocks until the cost is under tolerance; returns (ansatz, cost, evals, converged)."""
    ansatz = StructuralAnsatz(n_qubits, prefix)
    objective = Objective(target_state, ansatz, measurement, rng)
    current = objective()
    previous_pair = None
    while current >= config.tolerance and len(ansatz.blocks) < config.max_blocks:
        if objective.n_evals >= config.max_evals:
            break
        # the residual Y^dag X|0> is what the next block has to disentangle
        residual = run(ansatz.circuit().inverse(), initial=target_state)
        pair = select_pair(residual, previous_pair, config.paper_literal_entropy)
        ansatz.blocks.append(DressedBlock(pair))
        block_res = optimize_block(ansatz, len(ansatz.blocks) - 1, objective, config)
        glob = global_optimize(ansatz, objective, config, block_res.cost)
        current = glob.cost
        previous_pair = pair
    if measurement.exact:
        current = objective.exact_cost()
    return ansatz, current, objective.n_evals, current < config.tolerance


def evolve_isl(
    spec: ModelSpec,
    dt: float,
    t_max: float,
    config: IslConfig = IslConfig(),
    measurement: Measurement = EXACT,
    ledger: EvalLedger | None = None,
) -> tuple[Trajectory, list[StepRecord]]:
    steps = n_steps(dt, t_max)
    h, _ = encode(spec)
    trotter_step = build_step(h, dt).step_circuit
    prefix = preparation_circuit(spec)
    reference = ExactReference(spec)
    n = spec.n_qubits

    traj = Trajectory("isl", spec, dt, metadata={"tolerance": config.tolerance})
    records: list[StepRecord] = []
    compiled = prefix
    ansatz = StructuralAnsatz(n, prefix)
    records.append(StepRecord(0, ansatz, 0.0, 0, 0, True, compiled))
    psi = run(compiled)
    if ledger is not None:
        ledger.set_depth(0, depth(compiled))
    traj.rows.append(make_row(0, dt, psi, reference, measurement, ledger, aux=0.0))

    for m in range(1, steps + 1):
        target = simplify(compiled + trotter_step)
        target_state = run(target)
        rng = np.random.default_rng(measurement.step_seed(m, 2))
        ansatz, c, evals, ok = compile_step(target_state, prefix, n, config, measurement, rng)
        compiled = ansatz.compiled
        psi = run(compiled)
        records.append(StepRecord(m, ansatz, c, len(ansatz.blocks), evals, ok, compiled))
        if ledger is not None:
            ledger.record(COST_PROBES, evals * measurement.k, m)
            ledger.set_depth(m, depth(compiled))
            ledger.note(m, n_l=len(ansatz.blocks), n_ev=evals)
        traj.rows.append(make_row(m, dt, psi, reference, measurement, ledger, aux=c, converged=ok))

    stepped = records[1:]
    traj.metadata.update(
        mean_blocks=float(np.mean([r.n_blocks for r in stepped])) if stepped else 0.0,
        mean_evals=float(np.mean([r.n_evals for r in stepped])) if stepped else 0.0,
        unconverged_steps=[r.step for r in stepped if not r.converged],
    )
    return traj, records
