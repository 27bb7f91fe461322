"""Circuit depth metrics and circuit-evaluation accounting."""
from __future__ import annotations

import threading
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .circuit import Circuit, decompose

OBSERVABLES = "observables"
COST_PROBES = "cost_probes"
MATRIX_ELEMENTS = "matrix_elements"
CATEGORIES = (OBSERVABLES, COST_PROBES, MATRIX_ELEMENTS)


@dataclass(frozen=True)
class DepthReport:
    total_depth: int
    two_qubit_depth: int
    gate_counts: dict[str, int] = field(default_factory=dict)


class LayerTracker:
    """Incremental ASAP layering; feed gates in order, read depths any time."""

    def __init__(self, n_qubits: int):
        self.frontier = [0] * n_qubits
        self.frontier2 = [0] * n_qubits
        self.counts: Counter = Counter()

    def add(self, circuit: Circuit) -> LayerTracker:
        for g in decompose(circuit).gates:
            layer = max(self.frontier[q] for q in g.qubits) + 1
            for q in g.qubits:
                self.frontier[q] = layer
            if g.is_two_qubit:
                layer2 = max(self.frontier2[q] for q in g.qubits) + 1
                for q in g.qubits:
                    self.frontier2[q] = layer2
            self.counts[g.kind.value] += 1
        return self

    def report(self) -> DepthReport:
        return DepthReport(
            max(self.frontier, default=0), max(self.frontier2, default=0), dict(self.counts)
        )


def depth(circuit: Circuit) -> DepthReport:
    """ASAP layering of the primitive-gate form of ``circuit``.

    A gate lands in the earliest layer after every layer already holding one
    of its qubits. ``two_qubit_depth`` repeats the count over multi-qubit
    gates only.
    """
    return LayerTracker(circuit.n_qubits).add(circuit).report()


def predict_evals(method: str, k: float, n_p: float, n_pm: float = 0, n_l: float = 0, n_ev: float = 0) -> int:
    """Circuit evaluations per time step for ``trotter``/``isl``/``vqs``.

    The parameter-shift term of the VQS count uses one Hamiltonian string per
    parameter and string, i.e. ``p = n_p``.
    """
    if min(k, n_p, n_pm, n_l, n_ev) < 0:
        raise ValueError("counts must be non-negative")
    method = method.lower()
    if method in ("trotter", "dt"):
        c = k * n_p
    elif method == "isl":
        c = k * n_p + n_l * n_ev * k
    elif method == "vqs":
        c = k * n_p + k * n_pm * (n_pm + 1) / 2 + n_pm * n_p * k
    else:
        raise ValueError(f"unknown method {method!r}")
    return int(round(c))


class EvalLedger:
    """Per-step evaluation counts; ``record`` is safe to call from many threads."""

    def __init__(self, method: str = "", shots: int = 1):
        self.method = method
        self.shots = shots
        self._lock = threading.Lock()
        self._counts: dict[int, Counter] = defaultdict(Counter)
        self._depths: dict[int, DepthReport] = {}
        self._extra: dict[int, dict[str, float]] = defaultdict(dict)

    def record(self, category: str, n: int = 1, step: int = 0) -> EvalLedger:
        if category not in CATEGORIES:
            raise ValueError(f"unknown ledger category {category!r}")
        with self._lock:
            self._counts[step][category] += n
        return self

    def note(self, step: int, **values: float) -> None:
        with self._lock:
            self._extra[step].update(values)

    def set_depth(self, step: int, report: DepthReport) -> None:
        with self._lock:
            self._depths[step] = report

    def count(self, category: str, step: int | None = None) -> int:
        if step is not None:
            return self._counts[step][category]
        return sum(c[category] for c in self._counts.values())

    def total(self, step: int | None = None) -> int:
        return sum(self.count(cat, step) for cat in CATEGORIES)

    @property
    def steps(self) -> list[int]:
        return sorted(set(self._counts) | set(self._depths))

    def depth_at(self, step: int) -> DepthReport | None:
        return self._depths.get(step)

    def extra(self, step: int) -> dict[str, float]:
        return dict(self._extra.get(step, {}))

    def rows(self) -> list[dict]:
        out = []
        for step in self.steps:
            d = self._depths.get(step)
            out.append({
                "step": step,
                "method": self.method,
                "evals_observables": self.count(OBSERVABLES, step),
                "evals_cost_probes": self.count(COST_PROBES, step),
                "evals_matrix_elements": self.count(MATRIX_ELEMENTS, step),
                "total": self.total(step),
                "total_depth": d.total_depth if d else "",
                "two_qubit_depth": d.two_qubit_depth if d else "",
            })
        return out


LEDGER_COLUMNS = (
    "step", "method", "evals_observables", "evals_cost_probes",
    "evals_matrix_elements", "total", "total_depth", "two_qubit_depth",
)
