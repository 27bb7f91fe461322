"""Qubit Hamiltonians for the Jaynes-Cummings family.

One qubit holds the field mode (index 0) through the large-spin
Holstein-Primakoff truncation ``b ~ S_- / sqrt(2S)``; atoms occupy qubits
``1..n_atoms``. Under the resulting Hamiltonian a qubit in ``|1>`` is the
low-energy configuration, so the atom and field energy observables below
read zero there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import ParameterError, StructuralError
from .pauli import PauliSum, canonicalize, pair, single
from .statevector import basis_state


class Model(str, Enum):
    JCM = "JCM"
    TCM = "TCM"
    DETUNED_JCM = "DETUNED_JCM"


@dataclass(frozen=True)
class ModelSpec:
    model: Model = Model.JCM
    n_atoms: int = 1
    spin: float = 0.5
    omega: float = 2.0
    coupling: float = 10.0
    omega_atom: float | None = None
    interaction_sign: float | None = None
    """+1 or -1 in front of the flip-flop terms; ``None`` means +1 for the
    JCM family and -1 for the TCM."""

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if self.n_atoms < 1:
            raise StructuralError("n_atoms must be >= 1")
        if self.model is not Model.TCM and self.n_atoms != 1:
            raise StructuralError(f"{self.model.value} has exactly one atom")
        if self.model is Model.TCM and self.n_atoms < 2:
            raise StructuralError("TCM needs n_atoms >= 2; use JCM for a single atom")
        if self.spin <= 0 or abs(2 * self.spin - round(2 * self.spin)) > 1e-12:
            raise ParameterError(f"spin must be a positive half-integer, got {self.spin}")
        if self.interaction_sign is not None and self.interaction_sign not in (1, -1):
            raise ParameterError("interaction_sign must be +1 or -1")
        for name in ("omega", "coupling"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")

    @property
    def n_qubits(self) -> int:
        return self.n_atoms + 1

    @property
    def atom_frequency(self) -> float:
        if self.model is Model.DETUNED_JCM and self.omega_atom is not None:
            return float(self.omega_atom)
        return float(self.omega)

    @property
    def sign(self) -> float:
        if self.interaction_sign is not None:
            return float(self.interaction_sign)
        return -1.0 if self.model is Model.TCM else 1.0

    @property
    def quanta(self) -> int:
        """Excitations in the all-atoms-excited start."""
        return self.n_atoms

    def with_(self, **changes) -> ModelSpec:
        return replace(self, **changes)


@dataclass(frozen=True)
class ObservableSet:
    system: PauliSum
    atom: PauliSum
    field: PauliSum
    interaction: PauliSum
    ground_shift: float
    """``system == atom + field + interaction - ground_shift``."""


def flip_flop_coefficient(spec: ModelSpec) -> float:
    # (Omega/2)(b s+ + b+ s-) with s+- = (X +- iY)/2 and b = S_-/sqrt(2S)
    # expands to Omega/(4 sqrt(2S)) (X0 Xi + Y0 Yi).
    return spec.sign * spec.coupling / (4.0 * math.sqrt(2.0 * spec.spin))


def encode(spec: ModelSpec) -> tuple[PauliSum, ObservableSet]:
    """Hamiltonian and energy observables for ``spec``."""
    n = spec.n_qubits
    w = spec.omega
    g = flip_flop_coefficient(spec)

    field = canonicalize([single("Z", 0, n, w / 2)], identity_offset=w * spec.spin, n_qubits=n)

    if spec.model is Model.DETUNED_JCM:
        wa = spec.atom_frequency
        atom_z = [single("Z", 1, n, wa / 2)]
        detuning = [single("Z", 1, n, (wa - w) / 2)]
        atom = canonicalize(atom_z, identity_offset=wa / 2, n_qubits=n)
        ground_shift = wa / 2
    else:
        atom_z = [single("Z", i, n, w / 2) for i in range(1, n)]
        detuning = []
        atom = canonicalize(atom_z, identity_offset=w * spec.n_atoms / 2, n_qubits=n)
        ground_shift = w * spec.n_atoms / 2

    hopping = []
    for i in range(1, n):
        hopping.append(pair("X", 0, "X", i, n, g))
        hopping.append(pair("Y", 0, "Y", i, n, g))
    interaction = canonicalize(hopping, n_qubits=n)

    system = canonicalize(
        [single("Z", 0, n, w / 2)] + atom_z + detuning + hopping,
        identity_offset=w * spec.spin,
        n_qubits=n,
    )
    return system, ObservableSet(system, atom, field, interaction, ground_shift)


def excitation_number(n_qubits: int) -> PauliSum:
    """Sum of ``Z_q / 2`` over every qubit; conserved by the resonant models."""
    return canonicalize([single("Z", q, n_qubits, 0.5) for q in range(n_qubits)])


def initial_bits(spec: ModelSpec) -> tuple[int, ...]:
    return (0,) + (1,) * spec.n_atoms


def initial_state(spec: ModelSpec) -> np.ndarray:
    """Field qubit ``|0>``, every atom qubit ``|1>``."""
    return basis_state(initial_bits(spec))


def rabi_frequency(spec: ModelSpec) -> float:
    """Angular frequency of the initial-state population, ``sqrt(n) * Omega``."""
    return math.sqrt(spec.quanta) * spec.coupling


def analytic_population(spec: ModelSpec, t: float | np.ndarray) -> float | np.ndarray:
    """``cos^2(sqrt(n) Omega t / 2)``: probability of still being in the start state."""
    if spec.model is Model.DETUNED_JCM:
        raise StructuralError("no closed-form population for the detuned model")
    return np.cos(rabi_frequency(spec) * np.asarray(t, dtype=float) / 2.0) ** 2


def rabi_period(spec: ModelSpec) -> float:
    return 2.0 * math.pi / rabi_frequency(spec)


def initial_population(spec: ModelSpec, state: np.ndarray) -> float:
    """``|<psi(0)|psi>|^2`` for the basis start state."""
    index = int("".join(map(str, initial_bits(spec))), 2)
    return float(abs(state[index]) ** 2)
