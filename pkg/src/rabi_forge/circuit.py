"""Gate and circuit containers, inversion, decomposition and peephole simplification."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

from .errors import StructuralError

TWO_PI = 2.0 * math.pi
ANGLE_DROP_TOLERANCE = 1e-9


class GateKind(str, Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    X = "X"
    H = "H"
    S = "S"
    SDG = "SDG"
    CNOT = "CNOT"
    CONTROLLED_PAULI = "CONTROLLED_PAULI"
    PAULI_EXP = "PAULI_EXP"


ROTATIONS = {GateKind.RX: "X", GateKind.RY: "Y", GateKind.RZ: "Z"}
ROTATION_FOR_AXIS = {axis: kind for kind, axis in ROTATIONS.items()}
_ANGLED = {GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.PAULI_EXP}
_SINGLE = {GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.X, GateKind.H, GateKind.S, GateKind.SDG}


@dataclass(frozen=True)
class Gate:
    """One operation.

    ``qubits`` is ``(control, target)`` for CNOT and ``(control, *targets)``
    for CONTROLLED_PAULI, whose ``pauli`` gives one axis per target.
    PAULI_EXP applies ``exp(-i * angle * P / 2)`` with ``P`` the string
    ``pauli`` on ``qubits``.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float = 0.0
    pauli: str | None = None
    slot: int | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "angle", float(self.angle))
        if len(set(qubits)) != len(qubits) or any(q < 0 for q in qubits):
            raise StructuralError(f"{kind.value}: bad qubit indices {qubits}")
        if kind in _SINGLE and len(qubits) != 1:
            raise StructuralError(f"{kind.value} acts on exactly one qubit")
        if kind is GateKind.CNOT and len(qubits) != 2:
            raise StructuralError("CNOT acts on exactly two qubits")
        if kind is GateKind.CONTROLLED_PAULI:
            if self.pauli is None or len(self.pauli) != len(qubits) - 1:
                raise StructuralError("CONTROLLED_PAULI needs one axis per target")
        if kind is GateKind.PAULI_EXP:
            if self.pauli is None or len(self.pauli) != len(qubits) or not qubits:
                raise StructuralError("PAULI_EXP needs one axis per qubit")
        if self.pauli is not None and set(self.pauli) - set("IXYZ"):
            raise StructuralError(f"bad Pauli payload {self.pauli!r}")
        if self.slot is not None and kind not in _ANGLED:
            raise StructuralError(f"{kind.value} has no angle to parameterise")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) >= 2

    def inverse(self) -> Gate:
        if self.kind in _ANGLED:
            if self.slot is not None:
                raise StructuralError("bind parameters before inverting")
            return replace(self, angle=-self.angle)
        if self.kind is GateKind.S:
            return replace(self, kind=GateKind.SDG)
        if self.kind is GateKind.SDG:
            return replace(self, kind=GateKind.S)
        return self

    def shifted(self, offset: int) -> Gate:
        return replace(self, qubits=tuple(q + offset for q in self.qubits))

    def bound(self, params: Sequence[float]) -> Gate:
        if self.slot is None:
            return self
        return replace(self, angle=float(params[self.slot]), slot=None)


# Convenience constructors; ``angle`` may be omitted when ``slot`` is given.
def rx(q, angle=0.0, slot=None): return Gate(GateKind.RX, (q,), angle, slot=slot)
def ry(q, angle=0.0, slot=None): return Gate(GateKind.RY, (q,), angle, slot=slot)
def rz(q, angle=0.0, slot=None): return Gate(GateKind.RZ, (q,), angle, slot=slot)
def rot(axis, q, angle=0.0, slot=None): return Gate(ROTATION_FOR_AXIS[axis], (q,), angle, slot=slot)
def x(q): return Gate(GateKind.X, (q,))
def h(q): return Gate(GateKind.H, (q,))
def s(q): return Gate(GateKind.S, (q,))
def sdg(q): return Gate(GateKind.SDG, (q,))
def cnot(control, target): return Gate(GateKind.CNOT, (control, target))


def controlled_pauli(control: int, targets: Sequence[int], axes: str) -> Gate:
    return Gate(GateKind.CONTROLLED_PAULI, (control, *targets), pauli=axes)


def pauli_exp(qubits: Sequence[int], axes: str, angle=0.0, slot=None) -> Gate:
    return Gate(GateKind.PAULI_EXP, tuple(qubits), angle, pauli=axes, slot=slot)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    n_parameters: int = field(default=-1)

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        for g in gates:
            if max(g.qubits) >= self.n_qubits:
                raise StructuralError(
                    f"{g.kind.value} on {g.qubits} outside a {self.n_qubits}-qubit register"
                )
        used = max((g.slot for g in gates if g.slot is not None), default=-1) + 1
        if self.n_parameters < 0:
            object.__setattr__(self, "n_parameters", used)
        elif used > self.n_parameters:
            raise StructuralError(
                f"parameter slot {used - 1} exceeds n_parameters={self.n_parameters}"
            )

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: Circuit) -> Circuit:
        if other.n_qubits != self.n_qubits:
            raise StructuralError("cannot concatenate circuits on different registers")
        return Circuit(
            self.n_qubits,
            self.gates + other.gates,
            max(self.n_parameters, other.n_parameters),
        )

    def append(self, *gates: Gate) -> Circuit:
        return Circuit(
            self.n_qubits, self.gates + gates, max(self.n_parameters, _max_slot(gates) + 1)
        )

    def bind(self, params: Sequence[float] | None = None) -> Circuit:
        if self.n_parameters == 0:
            return self
        check_params(self, params)
        return Circuit(self.n_qubits, tuple(g.bound(params) for g in self.gates), 0)

    def inverse(self) -> Circuit:
        """Reversed gate order with each gate inverted; parameters must be bound."""
        return Circuit(self.n_qubits, tuple(g.inverse() for g in reversed(self.gates)), 0)

    def widened(self, n_qubits: int) -> Circuit:
        return Circuit(n_qubits, self.gates, self.n_parameters)

    def count(self, kind: GateKind) -> int:
        return sum(1 for g in self.gates if g.kind is kind)


def _max_slot(gates: Iterable[Gate]) -> int:
    return max((g.slot for g in gates if g.slot is not None), default=-1)


def check_params(circuit: Circuit, params) -> None:
    n = 0 if params is None else len(params)
    if n != circuit.n_parameters:
        raise StructuralError(
            f"circuit takes {circuit.n_parameters} parameters, got {n}"
        )


def _basis_in(axis: str, q: int) -> list[Gate]:
    if axis == "X":
        return [h(q)]
    if axis == "Y":
        return [rx(q, math.pi / 2)]
    return []


def _basis_out(axis: str, q: int) -> list[Gate]:
    if axis == "X":
        return [h(q)]
    if axis == "Y":
        return [rx(q, -math.pi / 2)]
    return []


def expand_pauli_exp(gate: Gate) -> list[Gate]:
    """Basis change, CNOT ladder onto the last support qubit, RZ, and undo."""
    support = [(q, a) for q, a in zip(gate.qubits, gate.pauli) if a != "I"]
    if not support:
        return []
    angle = gate.angle
    pre = [g for q, a in support for g in _basis_in(a, q)]
    post = [g for q, a in support for g in _basis_out(a, q)]
    qs = [q for q, _ in support]
    ladder = [cnot(qs[i], qs[i + 1]) for i in range(len(qs) - 1)]
    centre = Gate(GateKind.RZ, (qs[-1],), angle, slot=gate.slot)
    return pre + ladder + [centre] + ladder[::-1] + post


def decompose(circuit: Circuit) -> Circuit:
    """Replace every PAULI_EXP with its primitive-gate realisation."""
    out: list[Gate] = []
    for g in circuit.gates:
        out.extend(expand_pauli_exp(g) if g.kind is GateKind.PAULI_EXP else [g])
    return Circuit(circuit.n_qubits, tuple(out), circuit.n_parameters)


def _wrap(angle: float) -> float:
    a = math.fmod(angle, TWO_PI)
    if a > math.pi:
        a -= TWO_PI
    elif a <= -math.pi:
        a += TWO_PI
    return a


def simplify(circuit: Circuit) -> Circuit:
    """Peephole pass to a fixed point.

    Merges neighbouring same-axis rotations on a qubit, drops rotations with
    ``|angle| < 1e-9`` (mod 2*pi) and cancels back-to-back identical CNOTs.
    "Neighbouring" means no other gate touches the qubits in between.
    Action is preserved up to a global phase. Parameterised gates are left
    alone.
    """
    gates = list(circuit.gates)
    changed = True
    while changed:
        changed = False
        out: list[Gate] = []
        # index in ``out`` of the last gate touching each qubit
        last: dict[int, int] = {}
        for g in gates:
            if g.kind in ROTATIONS and g.slot is None:
                a = _wrap(g.angle)
                if abs(a) < ANGLE_DROP_TOLERANCE:
                    changed = True
                    continue
                q = g.qubits[0]
                j = last.get(q)
                if j is not None and out[j] is not None:
                    prev = out[j]
                    if prev.kind is g.kind and prev.slot is None and prev.qubits == g.qubits:
                        merged = _wrap(prev.angle + a)
                        changed = True
                        if abs(merged) < ANGLE_DROP_TOLERANCE:
                            out[j] = None
                            last.pop(q)
                            _reindex(last, out, q)
                        else:
                            out[j] = replace(prev, angle=merged)
                        continue
                g = replace(g, angle=a) if a != g.angle else g
            elif g.kind is GateKind.CNOT:
                j0, j1 = last.get(g.qubits[0]), last.get(g.qubits[1])
                if j0 is not None and j0 == j1 and out[j0] == g:
                    out[j0] = None
                    changed = True
                    for q in g.qubits:
                        last.pop(q)
                        _reindex(last, out, q)
                    continue
            out.append(g)
            for q in g.qubits:
                last[q] = len(out) - 1
        gates = [g for g in out if g is not None]
    return Circuit(circuit.n_qubits, tuple(gates), circuit.n_parameters)


def _reindex(last: dict[int, int], out: list, q: int) -> None:
    for j in range(len(out) - 1, -1, -1):
        g = out[j]
        if g is not None and q in g.qubits:
            last[q] = j
            return
