"""McLachlan real-time variational simulation with a layered hardware-efficient ansatz."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import Circuit, Gate, GateKind, cnot, controlled_pauli, h, rot, x
from .errors import EngineError, NumericError, ParameterError
from .ledger import MATRIX_ELEMENTS, EvalLedger, depth
from .models import Model, ModelSpec, encode, initial_bits
from .pauli import PauliSum
from .statevector import apply_gate, apply_pauli, fidelity, hadamard_test, run
from .trajectory import EXACT, ExactReference, Measurement, Trajectory, make_row, n_steps

AXIS_OF = {GateKind.RX: "X", GateKind.RY: "Y", GateKind.RZ: "Z"}


def entangling_pattern(spec: ModelSpec) -> list[tuple[int, int]]:
    """(control, target) pairs of one layer."""
    if spec.model is Model.TCM:
        n = spec.n_qubits
        # atoms chained from the last one down, then every atom onto the field
        return [(n - 1, q) for q in range(n - 2, 0, -1)] + [(q, 0) for q in range(n - 1, 0, -1)]
    return [(1, 0)]


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    base_preparation: tuple[int, ...]
    entanglers: tuple[tuple[int, int], ...]
    layers: int = 2

    def __post_init__(self):
        if self.layers < 1:
            raise ParameterError("ansatz needs at least one layer")

    @classmethod
    def for_model(cls, spec: ModelSpec, layers: int = 2) -> AnsatzSpec:
        prep = tuple(q for q, b in enumerate(initial_bits(spec)) if b)
        return cls(spec.n_qubits, prep, tuple(entangling_pattern(spec)), layers)

    @property
    def n_parameters(self) -> int:
        return 3 * self.n_qubits * self.layers

    def body(self) -> Circuit:
        """Parameterised layers; odd layers run the entanglers in reverse so that
        the zero-angle body is the identity."""
        gates: list[Gate] = []
        slot = 0
        for layer in range(self.layers):
            for q in range(self.n_qubits):
                for axis in "XYZ":
                    gates.append(rot(axis, q, slot=slot))
                    slot += 1
            pattern = self.entanglers if layer % 2 == 0 else self.entanglers[::-1]
            gates.extend(cnot(c, t) for c, t in pattern)
        return Circuit(self.n_qubits, tuple(gates), slot)

    def preparation(self) -> Circuit:
        return Circuit(self.n_qubits, tuple(x(q) for q in self.base_preparation))

    def circuit(self) -> Circuit:
        return self.preparation() + self.body()


@dataclass
class McLachlanSystem:
    a_matrix: np.ndarray
    c_vector: np.ndarray

    @property
    def n(self) -> int:
        return len(self.c_vector)


def _slot_positions(circuit: Circuit) -> list[int]:
    pos = [-1] * circuit.n_parameters
    for k, g in enumerate(circuit.gates):
        if g.slot is not None:
            pos[g.slot] = k
    return pos


def derivative_state(ansatz: AnsatzSpec, params, i: int) -> np.ndarray:
    """``d|psi>/d theta_i``: the generator ``-i/2 sigma`` inserted after gate ``i``."""
    circ = ansatz.circuit()
    if not 0 <= i < circ.n_parameters:
        raise ParameterError(f"parameter index {i} out of range 0..{circ.n_parameters - 1}")
    k = _slot_positions(circ)[i]
    head = Circuit(circ.n_qubits, circ.gates[: k + 1], circ.n_parameters)
    tail = Circuit(circ.n_qubits, circ.gates[k + 1:], circ.n_parameters)
    psi = run(head, params)
    psi = -0.5j * _apply_generator(psi, circ.gates[k], circ.n_qubits)
    return run(tail, params, initial=psi)


def _apply_generator(psi, gate: Gate, n: int) -> np.ndarray:
    axes = ["I"] * n
    axes[gate.qubits[0]] = AXIS_OF[gate.kind]
    return apply_pauli(psi, "".join(axes))


def _derivatives(ansatz: AnsatzSpec, params) -> tuple[np.ndarray, np.ndarray]:
    """State and all derivative states in one forward sweep per parameter."""
    circ = ansatz.circuit()
    n = circ.n_qubits
    bound = circ.bind(params)
    positions = _slot_positions(circ)
    prefixes = []
    psi = run(Circuit(n))
    for g in bound.gates:
        psi = apply_gate(psi, g, n)
        prefixes.append(psi)
    derivs = []
    for k in positions:
        d = -0.5j * _apply_generator(prefixes[k], circ.gates[k], n)
        for g in bound.gates[k + 1:]:
            d = apply_gate(d, g, n)
        derivs.append(d)
    return psi, np.array(derivs)


def _active_terms(h_op: PauliSum):
    # constants only rotate the global phase, so they never enter C
    return [t for t in h_op.terms if not t.is_identity]


def _hadamard_circuit(ansatz: AnsatzSpec, params, i: int, second) -> Circuit:
    """Ancilla circuit for ``Re`` of the overlap between the branches with and without insertions.

    ``second`` is either a parameter index ``j >= i`` (A element) or a Pauli
    string applied after the full ansatz (C element).
    """
    circ = ansatz.circuit().bind(params)
    n = circ.n_qubits
    anc = n
    pos = _slot_positions(ansatz.circuit())
    gates = [h(anc)] + list(circ.gates[: pos[i] + 1])
    gi = circ.gates[pos[i]]
    gates.append(controlled_pauli(anc, [gi.qubits[0]], AXIS_OF[gi.kind]))
    if isinstance(second, str):
        gates.extend(circ.gates[pos[i] + 1:])
        support = [q for q, a in enumerate(second) if a != "I"]
        gates.append(controlled_pauli(anc, support, "".join(second[q] for q in support)))
    else:
        gates.extend(circ.gates[pos[i] + 1: pos[second] + 1])
        gj = circ.gates[pos[second]]
        gates.append(controlled_pauli(anc, [gj.qubits[0]], AXIS_OF[gj.kind]))
    gates.append(h(anc))
    return Circuit(n + 1, tuple(gates))


def assemble(
    ansatz: AnsatzSpec,
    params,
    h_op: PauliSum,
    mode: str = "direct",
    shots: int | None = None,
    seed: int | None = None,
    ledger: EvalLedger | None = None,
    step: int = 0,
) -> McLachlanSystem:
    """``A_ij = Re<d_i psi|d_j psi>`` and ``C_i = Im sum_k c_k <d_i psi|P_k|psi>``.

    Only the upper triangle of A is evaluated. ``mode="hadamard"`` runs the
    ancilla circuits; ``shots`` samples each of them.
    """
    if shots is not None and seed is None:
        raise ParameterError("shot-mode assembly needs a seed")
    if mode not in ("direct", "hadamard"):
        raise ParameterError(f"unknown assembly mode {mode!r}")
    params = np.asarray(params, dtype=float)
    m = ansatz.n_parameters
    terms = _active_terms(h_op)
    a = np.zeros((m, m))
    c = np.zeros(m)
    if mode == "direct" and shots is None:
        psi, d = _derivatives(ansatz, params)
        gram = d.conj() @ d.T
        a = np.triu(gram.real)
        for t in terms:
            hp = apply_pauli(psi, t.axes)
            c += t.coefficient * (d.conj() @ hp).imag
    else:
        seeds = np.random.SeedSequence(seed if seed is not None else 0)
        n_circuits = m * (m + 1) // 2 + m * len(terms)
        child = iter(seeds.generate_state(n_circuits, np.uint64))

        def measure(circ: Circuit) -> float:
            s = next(child)
            return hadamard_test(circ, shots=shots, seed=int(s) if shots is not None else None)

        for i in range(m):
            for j in range(i, m):
                # both branches carry the -i/2 prefactor: |(-i/2)|^2 = 1/4
                a[i, j] = 0.25 * measure(_hadamard_circuit(ansatz, params, i, j))
        for i in range(m):
            for t in terms:
                # Im(i/2 * G) = Re(G)/2, and Re G is what the real-part test returns
                c[i] += t.coefficient * 0.5 * measure(_hadamard_circuit(ansatz, params, i, t.axes))
    a = a + np.triu(a, 1).T
    if ledger is not None:
        k = 1 if shots is None else shots
        ledger.record(MATRIX_ELEMENTS, k * (m * (m + 1) // 2 + m * len(terms)), step)
    return McLachlanSystem(a, c)


@dataclass
class Solution:
    velocity: np.ndarray
    residual: float


def solve(system: McLachlanSystem, lam: float = 1e-6) -> Solution:
    """Tikhonov-regularised ``(A^T A + lam I)^-1 A^T C`` via an augmented least-squares solve."""
    if lam < 0:
        raise ParameterError("regularisation must be >= 0")
    a, c = system.a_matrix, system.c_vector
    n = system.n
    if lam == 0:
        cond = np.linalg.cond(a)
        if not np.isfinite(cond) or cond > 1e14:
            raise NumericError(f"singular McLachlan matrix (condition number {cond:.3e}); use lambda > 0")
        v = np.linalg.solve(a, c)
    else:
        lhs = np.vstack([a, np.sqrt(lam) * np.eye(n)])
        rhs = np.concatenate([c, np.zeros(n)])
        v = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
    return Solution(v, float(np.linalg.norm(a @ v - c)))


@dataclass
class ParameterHistory:
    n_parameters: int
    rows: list[tuple[int, float, np.ndarray, float]] = field(default_factory=list)

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "t"] + [f"theta_{i + 1}" for i in range(self.n_parameters)] + ["residual"])
        for step, t, theta, res in self.rows:
            w.writerow([step, f"{t:.12g}"] + [f"{v:.12g}" for v in theta] + [f"{res:.12g}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def pin_sign(ansatz: AnsatzSpec, params, velocity, dt: float, target: np.ndarray) -> int:
    """+1 if stepping along ``velocity`` moves closer to ``target`` than stepping against it."""
    circ = ansatz.circuit()
    forward = fidelity(run(circ, params + dt * velocity), target)
    backward = fidelity(run(circ, params - dt * velocity), target)
    return 1 if forward >= backward else -1


def evolve_vqs(
    spec: ModelSpec,
    dt: float,
    t_max: float,
    ansatz: AnsatzSpec | None = None,
    lam: float = 1e-6,
    mode: str = "direct",
    measurement: Measurement = EXACT,
    ledger: EvalLedger | None = None,
) -> tuple[Trajectory, ParameterHistory]:
    steps = n_steps(dt, t_max)
    ansatz = ansatz or AnsatzSpec.for_model(spec)
    h_op, _ = encode(spec)
    reference = ExactReference(spec)
    circ = ansatz.circuit()
    theta = np.zeros(ansatz.n_parameters)
    history = ParameterHistory(ansatz.n_parameters)
    traj = Trajectory("vqs", spec, dt, metadata={"lambda": lam, "mode": mode})
    static_depth = depth(circ.bind(theta))
    sign = 0
    for m in range(steps + 1):
        psi = run(circ, theta)
        residual = float("nan")
        sol = None
        if m < steps:
            try:
                system = assemble(
                    ansatz, theta, h_op, mode, measurement.shots,
                    None if measurement.exact else measurement.step_seed(m, 3), ledger, m,
                )
                sol = solve(system, lam)
            except (NumericError, np.linalg.LinAlgError) as exc:
                raise EngineError(str(exc), m) from exc
            residual = sol.residual
            if sign == 0:
                sign = pin_sign(ansatz, theta, sol.velocity, dt, reference.state(dt))
                traj.metadata["c_sign"] = sign
        if ledger is not None:
            ledger.set_depth(m, static_depth)
        traj.rows.append(make_row(m, dt, psi, reference, measurement, ledger, aux=residual))
        history.rows.append((m, m * dt, theta.copy(), residual))
        if sol is not None:
            theta = theta + sign * dt * sol.velocity
    return traj, history
