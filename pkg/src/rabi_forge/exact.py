"""Reference evolution by Hermitian eigendecomposition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .pauli import DENSE_QUBIT_CAP, PauliSum, matrix_of


@dataclass(frozen=True)
class ExactPropagator:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def unitary(self, t: float) -> np.ndarray:
        v = self.eigenvectors
        return (v * np.exp(-1j * self.eigenvalues * t)) @ v.conj().T

    def evolve(self, state: np.ndarray, t: float) -> np.ndarray:
        v = self.eigenvectors
        return v @ (np.exp(-1j * self.eigenvalues * t) * (v.conj().T @ state))


def prepare(h: PauliSum, n_qubits: int | None = None, cap: int = DENSE_QUBIT_CAP) -> ExactPropagator:
    m = matrix_of(h, n_qubits, cap=cap)
    if np.max(np.abs(m - m.conj().T)) > 1e-12:
        raise NumericError("Hamiltonian matrix is not Hermitian")
    w, v = np.linalg.eigh(m)
    if np.max(np.abs((v * w) @ v.conj().T - m)) > 1e-10:
        raise NumericError("eigendecomposition failed to reconstruct H")
    return ExactPropagator(w, v)


def evolve(prop: ExactPropagator, state: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t) |state>``."""
    if not np.isfinite(t):
        raise NumericError("t must be finite")
    return prop.evolve(np.asarray(state, dtype=complex), t)
