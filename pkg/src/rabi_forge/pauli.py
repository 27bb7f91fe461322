"""Weighted Pauli strings and their dense matrices.

Qubit 0 is the leftmost tensor factor and the most significant bit of a
basis-state index.
"""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from functools import reduce as _fold
from typing import Iterable, Sequence

import numpy as np

from .errors import ResourceError, StructuralError

DENSE_QUBIT_CAP = 12
MERGE_TOLERANCE = 1e-12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    axes: str

    def __post_init__(self):
        if isinstance(self.coefficient, complex) or np.iscomplexobj(self.coefficient):
            raise StructuralError(f"complex Pauli coefficient {self.coefficient!r}")
        coefficient = float(self.coefficient)
        if not math.isfinite(coefficient):
            raise StructuralError(f"non-finite Pauli coefficient {coefficient}")
        axes = str(self.axes).upper()
        if not axes or set(axes) - set("IXYZ"):
            raise StructuralError(f"bad Pauli axes {self.axes!r}")
        object.__setattr__(self, "coefficient", coefficient)
        object.__setattr__(self, "axes", axes)

    @property
    def n_qubits(self) -> int:
        return len(self.axes)

    @property
    def is_identity(self) -> bool:
        return set(self.axes) == {"I"}

    def support(self) -> tuple[int, ...]:
        return tuple(q for q, a in enumerate(self.axes) if a != "I")


@dataclass(frozen=True)
class PauliSum:
    """Canonical sum of Pauli strings plus a separately tracked constant.

    Build instances with :func:`canonicalize`; the constructor does not
    merge or sort.
    """

    terms: tuple[PauliTerm, ...]
    identity_offset: float = 0.0
    n_qubits: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        sizes = {t.n_qubits for t in self.terms}
        if self.n_qubits is not None:
            sizes.add(self.n_qubits)
        if len(sizes) > 1:
            raise StructuralError(f"mixed register sizes {sorted(sizes)}")
        if self.n_qubits is None and sizes:
            object.__setattr__(self, "n_qubits", sizes.pop())
        object.__setattr__(self, "identity_offset", float(self.identity_offset))

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other: PauliSum) -> PauliSum:
        return canonicalize(
            list(self.terms) + list(other.terms),
            identity_offset=self.identity_offset + other.identity_offset,
            n_qubits=self.n_qubits if self.n_qubits is not None else other.n_qubits,
        )

    def __sub__(self, other: PauliSum) -> PauliSum:
        return self + other.scaled(-1.0)

    def scaled(self, factor: float) -> PauliSum:
        return PauliSum(
            tuple(PauliTerm(factor * t.coefficient, t.axes) for t in self.terms),
            factor * self.identity_offset,
            self.n_qubits,
        )

    def coefficient(self, axes: str) -> float:
        axes = axes.upper()
        if set(axes) == {"I"}:
            return self.identity_offset
        for t in self.terms:
            if t.axes == axes:
                return t.coefficient
        return 0.0

    def to_text(self) -> str:
        """One ``"coeff axes"`` line per term, constant first."""
        n = self.n_qubits or 1
        lines = [f"{self.identity_offset!r} {'I' * n}"]
        lines += [f"{t.coefficient!r} {t.axes}" for t in self.terms]
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str) -> PauliSum:
        terms = []
        for line in text.strip().splitlines():
            if not line.strip():
                continue
            coeff, axes = line.split()
            terms.append(PauliTerm(float(coeff), axes))
        return canonicalize(terms)


def canonicalize(
    terms: Iterable[PauliTerm],
    identity_offset: float = 0.0,
    n_qubits: int | None = None,
) -> PauliSum:
    """Merge duplicate strings, drop cancelled ones and sort by axes.

    Terms are ordered lexicographically on their axes with ``I < X < Y < Z``;
    this is the order the Trotter engine exponentiates them in.
    """
    merged: OrderedDict[str, float] = OrderedDict()
    offset = float(identity_offset)
    size = n_qubits
    for term in terms:
        if size is None:
            size = term.n_qubits
        elif term.n_qubits != size:
            raise StructuralError(
                f"term {term.axes} has {term.n_qubits} qubits, expected {size}"
            )
        if term.is_identity:
            offset += term.coefficient
        else:
            merged[term.axes] = merged.get(term.axes, 0.0) + term.coefficient
    kept = tuple(
        PauliTerm(c, axes)
        for axes, c in sorted(merged.items())
        if abs(c) > MERGE_TOLERANCE
    )
    if abs(offset) <= MERGE_TOLERANCE:
        offset = 0.0
    return PauliSum(kept, offset, size)


def pauli_string_matrix(axes: str) -> np.ndarray:
    return _fold(np.kron, (PAULI_MATRICES[a] for a in axes))


def check_dense_cap(n_qubits: int, cap: int = DENSE_QUBIT_CAP) -> None:
    if n_qubits > cap:
        raise ResourceError(f"{n_qubits} qubits exceeds the dense cap of {cap}")


def matrix_of(
    op: PauliSum | Sequence[PauliTerm],
    n_qubits: int | None = None,
    cap: int = DENSE_QUBIT_CAP,
) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of a Pauli sum."""
    if not isinstance(op, PauliSum):
        op = canonicalize(op, n_qubits=n_qubits)
    n = n_qubits if n_qubits is not None else op.n_qubits
    if n is None:
        raise StructuralError("register size unknown for an empty Pauli sum")
    if op.n_qubits is not None and op.n_qubits != n:
        raise StructuralError(f"sum acts on {op.n_qubits} qubits, asked for {n}")
    check_dense_cap(n, cap)
    out = op.identity_offset * np.eye(2**n, dtype=complex)
    for term in op.terms:
        out += term.coefficient * pauli_string_matrix(term.axes)
    return out


def single(axis: str, qubit: int, n_qubits: int, coefficient: float = 1.0) -> PauliTerm:
    """``coefficient * axis`` acting on ``qubit`` of an ``n_qubits`` register."""
    axes = ["I"] * n_qubits
    axes[qubit] = axis
    return PauliTerm(coefficient, "".join(axes))


def pair(axis_a: str, qa: int, axis_b: str, qb: int, n_qubits: int, coefficient: float = 1.0) -> PauliTerm:
    axes = ["I"] * n_qubits
    axes[qa] = axis_a
    axes[qb] = axis_b
    return PauliTerm(coefficient, "".join(axes))
