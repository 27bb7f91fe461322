import math

import numpy as np
import pytest

from rabi_forge.circuit import Circuit, cnot, rx, rz, x
from rabi_forge.errors import ParameterError
from rabi_forge.isl import (
    DressedBlock, IslConfig, Objective, StructuralAnsatz, compile_step, cost, evolve_isl,
    global_optimize, optimize_block,
)
from rabi_forge.ledger import COST_PROBES, EvalLedger, depth
from rabi_forge.models import Model, ModelSpec, encode
from rabi_forge.pauli import matrix_of
from rabi_forge.statevector import rotation_matrix, run
from rabi_forge.trajectory import Measurement
from rabi_forge.trotter import build_step, evolve_trotter, preparation_circuit, trotter_circuit


def empty(n):
    return StructuralAnsatz(n, Circuit(n))


def test_block_validation_and_layout():
    with pytest.raises(ParameterError):
        DressedBlock((1, 1))
    with pytest.raises(ParameterError):
        DressedBlock((0, 1), ["X"] * 3, [0.0] * 3)
    b = DressedBlock((0, 1), ["X", "Y", "Z", "X"], [0.1, 0.2, 0.3, 0.4])
    kinds = [g.kind.value for g in b.gates()]
    assert kinds == ["RX", "RY", "CNOT", "RZ", "RX"]
    assert [g.qubits for g in b.gates()] == [(0,), (1,), (0, 1), (0,), (1,)]
    assert b.describe().startswith("(0,1): X:+0.100000 Y:+0.200000")


def test_cost_of_exact_inverse_structure_is_zero():
    block = DressedBlock((0, 1), ["X", "Y", "Z", "X"], [0.4, -1.1, 0.9, 2.0])
    target = Circuit(2, tuple(block.gates()))
    ansatz = StructuralAnsatz(2, Circuit(2), [block.copy()])
    assert cost(target, ansatz) == pytest.approx(0, abs=1e-12)


def test_cost_of_x_against_empty_ansatz():
    assert cost(Circuit(1, (x(0),)), empty(1)) == pytest.approx(1)


def test_cost_of_rx_matches_matrix_oracle():
    for theta in np.linspace(-3, 3, 13):
        overlap = rotation_matrix("X", theta)[0, 0]
        assert cost(Circuit(1, (rx(0, theta),)), empty(1)) == pytest.approx(1 - abs(overlap) ** 2, abs=1e-12)
        assert cost(Circuit(1, (rx(0, theta),)), empty(1)) == pytest.approx(math.sin(theta / 2) ** 2)


def test_cost_ignores_global_phase():
    target = Circuit(2, (rx(1, 0.8), cnot(1, 0)))
    # RZ on a qubit still in |0> only contributes a phase
    phased = Circuit(2, (rz(0, 1.3),) + target.gates)
    ansatz = StructuralAnsatz(2, Circuit(2), [DressedBlock((0, 1), angles=[0.2, 0.5, 0.1, 0.3])])
    assert cost(target, ansatz) == pytest.approx(cost(phased, ansatz), abs=1e-12)


def test_objective_agrees_with_circuit_cost(rng):
    for _ in range(20):
        target = Circuit(3, tuple(DressedBlock((0, 2), list(rng.choice(list("XYZ"), 4)),
                                               list(rng.uniform(-3, 3, 4))).gates()))
        ansatz = StructuralAnsatz(3, Circuit(3, (x(1),)), [
            DressedBlock((0, 1), list(rng.choice(list("XYZ"), 4)), list(rng.uniform(-3, 3, 4)))])
        obj = Objective(run(target), ansatz)
        c = cost(target, ansatz)
        assert obj() == pytest.approx(c, abs=1e-12)
        assert 0 <= c <= 1


def test_shot_cost_is_binomial_estimate():
    target = Circuit(1, (rx(0, 1.0),))
    vals = [cost(target, empty(1), measurement=Measurement(1000, s)) for s in range(200)]
    assert abs(np.mean(vals) - math.sin(0.5) ** 2) < 4 * math.sqrt(0.23 * 0.77 / 1000 / 200)
    assert all(v * 1000 == pytest.approx(round(v * 1000)) for v in vals)


def test_single_rotation_target_in_one_cycle():
    target = run(Circuit(2, (rx(0, 0.7),)))
    ansatz = StructuralAnsatz(2, Circuit(2), [DressedBlock((0, 1))])
    res = optimize_block(ansatz, 0, Objective(target, ansatz))
    assert res.cost < 1e-10
    assert res.cycles == 1


def test_identity_target_keeps_zero_block():
    ansatz = StructuralAnsatz(2, Circuit(2), [DressedBlock((0, 1))])
    res = optimize_block(ansatz, 0, Objective(run(Circuit(2)), ansatz))
    assert res.cycles == 1
    assert res.cost == pytest.approx(0, abs=1e-15)
    np.testing.assert_allclose(ansatz.params, 0, atol=1e-12)


def test_three_probes_reconstruct_cost(rng):
    for _ in range(20):
        target = run(Circuit(2, tuple(DressedBlock((0, 1), list(rng.choice(list("XYZ"), 4)),
                                                   list(rng.uniform(-3, 3, 4))).gates())))
        block = DressedBlock((0, 1), list(rng.choice(list("XYZ"), 4)), list(rng.uniform(-3, 3, 4)))
        ansatz = StructuralAnsatz(2, Circuit(2), [block])
        obj = Objective(target, ansatz)
        r = int(rng.integers(4))

        def c_at(theta):
            p = ansatz.params.copy()
            p[r] = theta
            return obj(p)

        c0, c1, c2 = c_at(0), c_at(math.pi / 2), c_at(math.pi)
        off = 0.5 * (c0 + c2)
        thetas = np.linspace(0, 2 * math.pi, 100)
        recon = off + 0.5 * (c0 - c2) * np.cos(thetas) + (c1 - off) * np.sin(thetas)
        assert np.abs(recon - np.array([c_at(t) for t in thetas])).max() < 1e-10


def test_global_optimize_single_effective_angle():
    target = run(Circuit(2, (rx(0, 0.7),)))
    ansatz = StructuralAnsatz(2, Circuit(2), [DressedBlock((0, 1), ["Z", "Z", "X", "Z"], [0, 0, 0.6, 0])])
    res = global_optimize(ansatz, Objective(target, ansatz), IslConfig(tolerance=1e-14))
    angle = (ansatz.params[2] + math.pi) % (2 * math.pi) - math.pi
    assert abs(angle - 0.7) < 1e-6
    assert res.cost < 1e-12


def test_global_optimize_does_not_worsen_optimum():
    target = run(Circuit(2, (rx(0, 0.7),)))
    ansatz = StructuralAnsatz(2, Circuit(2), [DressedBlock((0, 1), ["Z", "Z", "X", "Z"], [0, 0, 0.7, 0])])
    obj = Objective(target, ansatz)
    start = obj()
    res = global_optimize(ansatz, obj, IslConfig(), current_cost=start)
    assert res.cost <= start


def test_global_optimize_needs_blocks():
    with pytest.raises(ParameterError):
        global_optimize(empty(2), Objective(run(Circuit(2)), empty(2)))


def test_jcm_step_compiles_below_tolerance():
    spec = ModelSpec()
    h, _ = encode(spec)
    target = run(trotter_circuit(spec, 0.01, 1))
    ansatz, c, evals, ok = compile_step(target, preparation_circuit(spec), 2, IslConfig())
    assert ok and c < 1e-4 and evals > 0 and len(ansatz.blocks) >= 1


@pytest.fixture(scope="module")
def jcm_run():
    ledger = EvalLedger("isl")
    traj, records = evolve_isl(ModelSpec(), 0.01, 1.0, ledger=ledger)
    return traj, records, ledger


def test_jcm_every_step_converges(jcm_run):
    traj, records, _ = jcm_run
    assert len(records) == 101
    assert all(r.cost < 1e-4 for r in records)
    assert traj.column("converged").all()


def test_jcm_energy_within_twice_trotter_envelope(jcm_run):
    traj, _, _ = jcm_run
    trot = evolve_trotter(ModelSpec(), 0.01, 1.0)
    assert traj.column("abs_err_system").max() <= 2 * trot.column("abs_err_system").max()


def test_compiled_depth_below_trotter_after_twenty_steps(jcm_run):
    _, records, ledger = jcm_run
    for r in records[20:]:
        trot = depth(trotter_circuit(ModelSpec(), 0.01, r.step))
        assert ledger.depth_at(r.step).two_qubit_depth < trot.two_qubit_depth


def test_ledger_counts_blocks_and_evaluations(jcm_run):
    _, records, ledger = jcm_run
    for r in records[1:]:
        assert ledger.count(COST_PROBES, r.step) == r.n_evals
        assert ledger.extra(r.step) == {"n_l": r.n_blocks, "n_ev": r.n_evals}


def test_compiled_energies_within_fidelity_bound():
    spec = ModelSpec()
    h, obs = encode(spec)
    hm = matrix_of(h)
    norm = np.linalg.norm(hm, 2)
    tol = 1e-4
    step = build_step(h, 0.01).step_circuit
    _, records = evolve_isl(spec, 0.01, 0.3, IslConfig(tolerance=tol))
    for prev, cur in zip(records, records[1:]):
        target = run(prev.compiled + step)
        got = run(cur.compiled)
        diff = abs(np.vdot(target, hm @ target).real - np.vdot(got, hm @ got).real)
        assert diff <= 2 * norm * math.sqrt(tol)


def test_tcm_mean_block_count():
    traj, records = evolve_isl(ModelSpec(Model.TCM, n_atoms=2), 0.01, 0.2)
    mean_blocks = np.mean([r.n_blocks for r in records[1:]])
    assert 5.5 / 2 <= mean_blocks <= 5.5 * 2


def test_unreachable_tolerance_is_flagged():
    cfg = IslConfig(tolerance=1e-12, max_blocks=1, max_evals=500)
    traj, records = evolve_isl(ModelSpec(Model.TCM, n_atoms=2), 0.05, 0.1, cfg)
    assert not all(r.converged for r in records[1:])
    assert traj.metadata["unconverged_steps"]
    assert "0" in [line.split(",")[-1] for line in traj.to_csv().splitlines()[1:]]


def test_shot_mode_ledger_scales_with_shots():
    ledger = EvalLedger("isl", 100)
    _, records = evolve_isl(ModelSpec(), 0.01, 0.02, measurement=Measurement(100, 7), ledger=ledger)
    for r in records[1:]:
        assert ledger.count(COST_PROBES, r.step) == 100 * r.n_evals


def test_invalid_tolerance():
    with pytest.raises(ParameterError):
        IslConfig(tolerance=0)
