import math

import numpy as np
import pytest

from rabi_forge.circuit import (
    Circuit, Gate, GateKind, cnot, decompose, pauli_exp, rot, rx, rz, simplify, x,
)
from rabi_forge.errors import StructuralError
from rabi_forge.models import Model, ModelSpec
from rabi_forge.pauli import pauli_string_matrix
from rabi_forge.statevector import fidelity, run
from rabi_forge.vqs import AnsatzSpec

from conftest import dense_unitary, random_circuit, random_state


def test_gate_validation():
    with pytest.raises(StructuralError):
        Gate(GateKind.RX, (0, 1), 0.1)
    with pytest.raises(StructuralError):
        cnot(1, 1)
    with pytest.raises(StructuralError):
        Circuit(2, (x(2),))


def test_slots_must_fit_parameter_count():
    with pytest.raises(StructuralError):
        Circuit(1, (rx(0, slot=3),), 2)
    c = Circuit(1, (rx(0, slot=0), rz(0, slot=1)))
    assert c.n_parameters == 2
    with pytest.raises(StructuralError):
        run(c, [0.1])


def test_inverse_requires_bound_slots():
    with pytest.raises(StructuralError):
        Circuit(1, (rx(0, slot=0),)).inverse()


def test_pauli_exp_matches_matrix_exponential():
    for axes in ("XX", "YZ", "ZY", "XY"):
        angle = 0.37
        g = Circuit(2, (pauli_exp((0, 1), axes, angle),))
        p = pauli_string_matrix(axes)
        expected = math.cos(angle / 2) * np.eye(4) - 1j * math.sin(angle / 2) * p
        np.testing.assert_allclose(dense_unitary(g), expected, atol=1e-12)
        np.testing.assert_allclose(dense_unitary(decompose(g)), expected, atol=1e-12)


def test_decompose_uses_cnot_ladder():
    d = decompose(Circuit(3, (pauli_exp((0, 1, 2), "XYZ", 0.2),)))
    assert d.count(GateKind.CNOT) == 4
    assert d.count(GateKind.PAULI_EXP) == 0


def test_simplify_merges_rotations():
    c = simplify(Circuit(1, (rz(0, 0.3), rz(0, 0.4))))
    assert len(c) == 1 and c.gates[0].angle == pytest.approx(0.7)


def test_simplify_cancels_cnot_pair():
    assert len(simplify(Circuit(2, (cnot(0, 1), cnot(0, 1))))) == 0


def test_simplify_full_turn_vanishes():
    assert len(simplify(Circuit(1, (rx(0, math.pi), rx(0, math.pi))))) == 0


@pytest.mark.parametrize("spec", [ModelSpec(), ModelSpec(Model.TCM, n_atoms=2)])
def test_zero_angle_ansatz_body_simplifies_to_nothing(spec):
    a = AnsatzSpec.for_model(spec)
    assert len(simplify(a.body().bind(np.zeros(a.n_parameters)))) == 0


def test_simplify_preserves_action(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        c = random_circuit(rng, n, int(rng.integers(1, 25)))
        psi = random_state(rng, n)
        assert fidelity(run(c, initial=psi), run(simplify(c), initial=psi)) > 1 - 1e-10


def test_inverse_round_trip(rng):
    for _ in range(100):
        c = random_circuit(rng, 3, 30)
        psi = random_state(rng, 3)
        back = run(c.inverse(), initial=run(c, initial=psi))
        assert fidelity(back, psi) > 1 - 1e-10


def test_bind_and_append():
    c = Circuit(2).append(rot("Y", 1, slot=0))
    assert c.n_parameters == 1
    b = c.bind([0.5])
    assert b.n_parameters == 0 and b.gates[0].angle == 0.5
