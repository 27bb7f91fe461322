"""First-order product-formula circuits and the direct Trotter evolution loop."""
from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, pauli_exp, x
from .errors import ParameterError
from .ledger import EvalLedger, LayerTracker
from .models import ModelSpec, encode, initial_bits
from .pauli import PauliSum
from .statevector import run
from .trajectory import EXACT, ExactReference, Measurement, Trajectory, make_row, n_steps


@dataclass(frozen=True)
class TrotterPlan:
    step_circuit: Circuit
    dt: float
    term_order: tuple[str, ...]


def build_step(h: PauliSum, dt: float) -> TrotterPlan:
    """One ``dt`` step: ``exp(-i c P dt)`` per term, in canonical term order.

    The constant offset only adds a global phase and emits no gate.
    """
    if not dt > 0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    n = h.n_qubits
    gates = []
    for term in h.terms:
        support = term.support()
        axes = "".join(term.axes[q] for q in support)
        gates.append(pauli_exp(support, axes, 2.0 * term.coefficient * dt))
    return TrotterPlan(Circuit(n, tuple(gates)), dt, tuple(t.axes for t in h.terms))


def preparation_circuit(spec: ModelSpec) -> Circuit:
    """X gates that excite the atom qubits from ``|0...0>``."""
    return Circuit(spec.n_qubits, tuple(x(q) for q, b in enumerate(initial_bits(spec)) if b))


def trotter_circuit(spec: ModelSpec, dt: float, m: int) -> Circuit:
    """State preparation followed by ``m`` Trotter steps."""
    h, _ = encode(spec)
    step = build_step(h, dt).step_circuit
    return Circuit(spec.n_qubits, preparation_circuit(spec).gates + step.gates * m)


def evolve_trotter(
    spec: ModelSpec,
    dt: float,
    t_max: float,
    measurement: Measurement = EXACT,
    ledger: EvalLedger | None = None,
) -> Trajectory:
    steps = n_steps(dt, t_max)
    h, _ = encode(spec)
    plan = build_step(h, dt)
    reference = ExactReference(spec)
    prep = preparation_circuit(spec)
    layers = LayerTracker(spec.n_qubits).add(prep)

    traj = Trajectory("trotter", spec, dt)
    psi = run(prep)
    for m in range(steps + 1):
        if m > 0:
            psi = run(plan.step_circuit, initial=psi)
            layers.add(plan.step_circuit)
        if ledger is not None:
            ledger.set_depth(m, layers.report())
        traj.rows.append(make_row(m, dt, psi, reference, measurement, ledger))
    traj.metadata["n_terms"] = len(h.terms)
    return traj
