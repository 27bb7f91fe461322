"""Two-qubit entanglement measures used to place ISL blocks."""
from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .errors import NumericError, StructuralError
from .statevector import n_qubits_of, reduce

_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence ``max(0, 2*lambda_max(R) - Tr R)``.

    ``R = sqrt(sqrt(rho) rho~ sqrt(rho))`` with the spin flip
    ``rho~ = (Y x Y) rho* (Y x Y)``. Writing ``rho = A A^dag``, the
    eigenvalues of ``R`` are the singular values of ``A^T (Y x Y) A``,
    which avoids square roots of near-zero eigenvalues.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise StructuralError(f"concurrence needs a 4x4 matrix, got {rho.shape}")
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    if w.min() < -1e-8:
        raise NumericError("density matrix has a negative eigenvalue")
    a = v * np.sqrt(np.clip(w, 0.0, None))
    r = np.linalg.svd(a.T @ _YY @ a, compute_uv=False)
    c = 2.0 * r.max() - r.sum()
    return float(min(1.0, max(0.0, c)))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def entropy_of_formation(c: float, paper_literal: bool = False) -> float:
    """Entanglement of formation from a concurrence value.

    Default: ``h(1/2 + sqrt(1 - C^2)/2)`` with ``h`` the binary entropy.
    ``paper_literal`` uses ``p = 1/2 + sqrt(1 - C)/2`` and the unnegated
    ``p log p + (1-p) log(1-p)``, which is <= 0 and decreasing in ``C``; its
    negative is what ranks pairs, so callers maximise ``abs`` of it.
    """
    if not -1e-12 <= c <= 1 + 1e-12:
        raise NumericError(f"concurrence {c} outside [0, 1]")
    c = min(1.0, max(0.0, c))
    if paper_literal:
        p = 0.5 + 0.5 * math.sqrt(1.0 - c)
        return -binary_entropy(p)
    p = 0.5 + 0.5 * math.sqrt(1.0 - c * c)
    return binary_entropy(p)


def pair_entanglement(state: np.ndarray, pair: Sequence[int], paper_literal: bool = False) -> float:
    e = entropy_of_formation(concurrence(reduce(state, pair)), paper_literal)
    return abs(e) if paper_literal else e


def select_pair(
    state: np.ndarray,
    previous_pair: Sequence[int] | None = None,
    paper_literal: bool = False,
    tie_tolerance: float = 1e-12,
) -> tuple[int, int]:
    """Most entangled qubit pair, skipping ``previous_pair`` when another exists.

    Ties (within ``tie_tolerance``) go to the lexicographically lowest pair.
    """
    n = n_qubits_of(state)
    if n < 2:
        raise StructuralError("pair selection needs at least two qubits")
    pairs = list(itertools.combinations(range(n), 2))
    if previous_pair is not None and len(pairs) > 1:
        prev = tuple(sorted(previous_pair))
        pairs = [p for p in pairs if p != prev]
    if len(pairs) == 1:
        return pairs[0]
    best, best_e = pairs[0], -math.inf
    for p in pairs:
        e = pair_entanglement(state, p, paper_literal)
        if e > best_e + tie_tolerance:
            best, best_e = p, e
    return best
