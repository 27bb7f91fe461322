"""Dense statevector execution, measurement and partial traces.

States are 1-D complex arrays of length ``2**n``; qubit 0 is the most
significant bit of the basis index.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate, GateKind, check_params
from .errors import StructuralError
from .pauli import DENSE_QUBIT_CAP, PAULI_MATRICES, PauliSum, check_dense_cap

_SQRT1_2 = 1.0 / math.sqrt(2.0)


@lru_cache(maxsize=None)
def pauli_action(axes: str) -> tuple[np.ndarray, np.ndarray]:
    """``(perm, phase)`` with ``(P psi)[j] == phase[j] * psi[perm[j]]``."""
    n = len(axes)
    flip = 0
    signed = 0
    n_y = 0
    for q, a in enumerate(axes):
        bit = 1 << (n - 1 - q)
        if a in "XY":
            flip |= bit
        if a in "YZ":
            signed |= bit
        n_y += a == "Y"
    idx = np.arange(2**n)
    perm = idx ^ flip
    parity = np.array([bin(b & signed).count("1") & 1 for b in perm])
    phase = (1j**n_y) * (1.0 - 2.0 * parity)
    return perm, phase.astype(complex)


def embed(n_qubits: int, qubits: Sequence[int], axes: str) -> str:
    full = ["I"] * n_qubits
    for q, a in zip(qubits, axes):
        full[q] = a
    return "".join(full)


@lru_cache(maxsize=None)
def _control_mask(n_qubits: int, control: int) -> np.ndarray:
    return ((np.arange(2**n_qubits) >> (n_qubits - 1 - control)) & 1).astype(bool)


@lru_cache(maxsize=None)
def _s_phase(n_qubits: int, q: int, dagger: bool) -> np.ndarray:
    ph = np.where(_control_mask(n_qubits, q), -1j if dagger else 1j, 1.0)
    return ph.astype(complex)


def _pauli_apply(psi: np.ndarray, axes: str) -> np.ndarray:
    perm, phase = pauli_action(axes)
    return phase * psi[perm]


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """``exp(-i * angle * sigma_axis / 2)``."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return c * PAULI_MATRICES["I"] - 1j * s * PAULI_MATRICES[axis]


def n_qubits_of(state: np.ndarray) -> int:
    n = int(round(math.log2(state.size)))
    if 2**n != state.size:
        raise StructuralError(f"state length {state.size} is not a power of two")
    return n


def zero_state(n_qubits: int) -> np.ndarray:
    check_dense_cap(n_qubits)
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def basis_state(bits: Sequence[int] | str) -> np.ndarray:
    bits = [int(b) for b in bits]
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int("".join(map(str, bits)), 2) if bits else 0] = 1.0
    return psi


def apply_pauli(state: np.ndarray, axes: str) -> np.ndarray:
    """Apply a full-register Pauli string to ``state``."""
    n = n_qubits_of(state)
    if len(axes) != n:
        raise StructuralError(f"{len(axes)}-qubit string on a {n}-qubit state")
    return _pauli_apply(state, axes)


def apply_gate(state: np.ndarray, gate: Gate, n_qubits: int) -> np.ndarray:
    """Return ``gate`` applied to ``state``; parameter slots must already be bound."""
    kind = gate.kind
    qs = gate.qubits
    if kind is GateKind.RX or kind is GateKind.RY or kind is GateKind.RZ:
        p = _pauli_apply(state, embed(n_qubits, qs, kind.value[1]))
        return math.cos(gate.angle / 2) * state - 1j * math.sin(gate.angle / 2) * p
    if kind is GateKind.PAULI_EXP:
        p = _pauli_apply(state, embed(n_qubits, qs, gate.pauli))
        return math.cos(gate.angle / 2) * state - 1j * math.sin(gate.angle / 2) * p
    if kind is GateKind.X:
        return _pauli_apply(state, embed(n_qubits, qs, "X"))
    if kind is GateKind.H:
        return _SQRT1_2 * (
            _pauli_apply(state, embed(n_qubits, qs, "X"))
            + _pauli_apply(state, embed(n_qubits, qs, "Z"))
        )
    if kind is GateKind.S or kind is GateKind.SDG:
        return _s_phase(n_qubits, qs[0], kind is GateKind.SDG) * state
    if kind is GateKind.CNOT:
        flipped = _pauli_apply(state, embed(n_qubits, qs[1:], "X"))
        return np.where(_control_mask(n_qubits, qs[0]), flipped, state)
    if kind is GateKind.CONTROLLED_PAULI:
        applied = _pauli_apply(state, embed(n_qubits, qs[1:], gate.pauli))
        return np.where(_control_mask(n_qubits, qs[0]), applied, state)
    raise StructuralError(f"unknown gate kind {kind}")  # pragma: no cover


def run(
    circuit: Circuit,
    params: Sequence[float] | None = None,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Apply ``circuit`` (slots bound from ``params``) to ``initial`` (default ``|0...0>``)."""
    check_params(circuit, params)
    n = circuit.n_qubits
    check_dense_cap(n)
    if initial is None:
        psi = zero_state(n)
    else:
        psi = np.asarray(initial, dtype=complex)
        if psi.size != 2**n:
            raise StructuralError(f"initial state has {psi.size} amplitudes, register needs {2**n}")
    for g in circuit.gates:
        psi = apply_gate(psi, g.bound(params) if g.slot is not None else g, n)
    return psi


def _check_size(state: np.ndarray, obs: PauliSum) -> int:
    n = n_qubits_of(state)
    if obs.n_qubits is not None and obs.n_qubits != n:
        raise StructuralError(f"observable on {obs.n_qubits} qubits, state has {n}")
    return n


def expectation(state: np.ndarray, obs: PauliSum) -> float:
    """Exact ``<psi|obs|psi>`` including the constant offset."""
    _check_size(state, obs)
    total = obs.identity_offset * float(np.vdot(state, state).real)
    for term in obs.terms:
        value = np.vdot(state, apply_pauli(state, term.axes))
        if abs(value.imag) > 1e-10:
            raise StructuralError(f"non-real expectation for {term.axes}: {value}")
        total += term.coefficient * value.real
    return float(total)


def parity_probability(state: np.ndarray, axes: str) -> float:
    """Probability of the +1 outcome when measuring the Pauli string ``axes``.

    Equal to the all-outcome parity weight after rotating each measured
    qubit into the Z basis, i.e. ``(1 + <P>) / 2``.
    """
    norm = float(np.vdot(state, state).real)
    value = float(np.vdot(state, _pauli_apply(state, axes)).real) / norm
    return min(1.0, max(0.0, 0.5 * (1.0 + value)))


def sample_pm1_mean(p_plus: float, shots: int, rng: np.random.Generator) -> float:
    """Mean of ``shots`` draws of a +-1 variable with ``P(+1) = p_plus``."""
    n_plus = rng.binomial(shots, p_plus)
    return (2.0 * n_plus - shots) / shots


def sample_expectation(
    state: np.ndarray, obs: PauliSum, shots_per_term: int, seed: int
) -> float:
    """Shot estimate of ``<obs>``: each term measured with its own batch of shots."""
    if shots_per_term < 1:
        raise StructuralError("shots_per_term must be >= 1")
    _check_size(state, obs)
    rng = np.random.default_rng(seed)
    total = obs.identity_offset
    for term in obs.terms:
        total += term.coefficient * sample_pm1_mean(
            parity_probability(state, term.axes), shots_per_term, rng
        )
    return float(total)


def zero_overlap(circuit: Circuit, params: Sequence[float] | None = None) -> float:
    """``|<0...0| circuit |0...0>|**2``."""
    psi = run(circuit, params)
    return float(abs(psi[0]) ** 2)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def reduce(state: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on the qubits in ``keep`` (first = most significant)."""
    n = n_qubits_of(state)
    keep = [int(q) for q in keep]
    if len(set(keep)) != len(keep) or any(not 0 <= q < n for q in keep):
        raise StructuralError(f"bad qubits {keep} for a {n}-qubit state")
    rest = [q for q in range(n) if q not in keep]
    t = np.transpose(state.reshape((2,) * n), keep + rest).reshape(2 ** len(keep), -1)
    return t @ t.conj().T


def hadamard_test(
    circuit: Circuit,
    params: Sequence[float] | None = None,
    imaginary_part: bool = False,
    shots: int | None = None,
    seed: int | None = None,
) -> float:
    """``P(ancilla=0) - P(ancilla=1)`` for an ancilla-wired circuit.

    The ancilla is the last qubit. The circuit must open with ``H`` on it
    (followed by ``S`` or ``SDG`` when ``imaginary_part``), close with ``H``
    on it, and otherwise only use it as the control of CONTROLLED_PAULI
    gates. With ``U`` the product of the controlled insertions the exact
    value is ``Re<U>``; an opening ``S`` gives ``-Im<U>`` and ``SDG`` gives
    ``Im<U>``. ``shots=None`` returns the exact value.
    """
    anc = circuit.n_qubits - 1
    _check_ancilla_wiring(circuit, anc, imaginary_part)
    psi = run(circuit, params)
    probs = np.abs(psi.reshape(-1, 2)) ** 2
    p0 = float(probs[:, 0].sum() / probs.sum())
    if shots is None:
        return 2.0 * p0 - 1.0
    if seed is None:
        raise StructuralError("shot-mode Hadamard test needs a seed")
    return sample_pm1_mean(min(1.0, max(0.0, p0)), shots, np.random.default_rng(seed))


def _check_ancilla_wiring(circuit: Circuit, anc: int, imaginary_part: bool) -> None:
    on_anc = [(i, g) for i, g in enumerate(circuit.gates) if anc in g.qubits]
    opening = [GateKind.H] + ([GateKind.S] if imaginary_part else [])
    if len(on_anc) < len(opening) + 1:
        raise StructuralError("ancilla must be opened and closed with H")
    head = on_anc[: len(opening)]
    if [g.kind for _, g in head] != opening and not (
        imaginary_part and [g.kind for _, g in head] == [GateKind.H, GateKind.SDG]
    ):
        raise StructuralError("ancilla must start with H (then S/SDG for the imaginary part)")
    if on_anc[-1][1].kind is not GateKind.H:
        raise StructuralError("ancilla must end with H")
    for _, g in on_anc[len(opening):-1]:
        if g.kind is not GateKind.CONTROLLED_PAULI or g.qubits[0] != anc:
            raise StructuralError(f"ancilla used by {g.kind.value} outside a controlled insertion")
    if on_anc[-1][0] != max(i for i, g in enumerate(circuit.gates) if anc in g.qubits):
        raise StructuralError("ancilla closing H is not last")


__all__ = [
    "DENSE_QUBIT_CAP", "apply_gate", "apply_pauli", "basis_state", "expectation",
    "fidelity", "hadamard_test", "parity_probability", "reduce", "rotation_matrix",
    "run", "sample_expectation", "zero_overlap", "zero_state",
]
