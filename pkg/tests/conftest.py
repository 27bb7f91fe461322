import numpy as np
import pytest

from rabi_forge.circuit import Circuit, cnot, h, rot, s, sdg, x


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_circuit(rng, n, n_gates):
    gates = []
    for _ in range(n_gates):
        kind = rng.integers(6)
        q = int(rng.integers(n))
        if kind <= 2:
            gates.append(rot("XYZ"[kind], q, float(rng.uniform(-np.pi, np.pi))))
        elif kind == 3 and n > 1:
            t = int((q + 1 + rng.integers(n - 1)) % n)
            gates.append(cnot(q, t))
        elif kind == 4:
            gates.append(h(q))
        else:
            gates.append([x, s, sdg][int(rng.integers(3))](q))
    return Circuit(n, tuple(gates))


def dense_unitary(circuit, params=None):
    from rabi_forge.statevector import run
    dim = 2**circuit.n_qubits
    return np.array([run(circuit, params, initial=np.eye(dim)[k]) for k in range(dim)]).T


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
