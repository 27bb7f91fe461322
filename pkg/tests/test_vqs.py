import math

import numpy as np
import pytest

from rabi_forge.errors import EngineError, NumericError, ParameterError
from rabi_forge.ledger import EvalLedger, predict_evals
from rabi_forge.models import Model, ModelSpec, encode
from rabi_forge.pauli import PauliSum
from rabi_forge.statevector import fidelity, run
from rabi_forge.trajectory import ExactReference, Measurement
from rabi_forge.vqs import (
    AnsatzSpec, McLachlanSystem, assemble, derivative_state, evolve_vqs, solve,
)

JCM = ModelSpec()
TCM = ModelSpec(Model.TCM, n_atoms=2)


def test_parameter_counts_and_patterns():
    assert AnsatzSpec.for_model(JCM).n_parameters == 12
    assert AnsatzSpec.for_model(TCM).n_parameters == 18
    assert AnsatzSpec.for_model(JCM).entanglers == ((1, 0),)
    assert AnsatzSpec.for_model(TCM).entanglers == ((2, 1), (2, 0), (1, 0))
    assert AnsatzSpec.for_model(TCM).base_preparation == (1, 2)


@pytest.mark.parametrize("spec", [JCM, TCM])
def test_zero_parameters_give_initial_state(spec):
    a = AnsatzSpec.for_model(spec)
    np.testing.assert_allclose(run(a.circuit(), np.zeros(a.n_parameters)),
                               ExactReference(spec).psi0, atol=1e-14)


def test_derivative_matches_central_difference(rng):
    for spec in (JCM, TCM):
        a = AnsatzSpec.for_model(spec)
        theta = rng.uniform(-math.pi, math.pi, a.n_parameters)
        eps = 1e-5
        for i in range(a.n_parameters):
            e = np.zeros(a.n_parameters)
            e[i] = eps
            fd = (run(a.circuit(), theta + e) - run(a.circuit(), theta - e)) / (2 * eps)
            assert np.linalg.norm(fd - derivative_state(a, theta, i)) < 1e-6


def test_rz_derivative_on_eigenstate():
    a = AnsatzSpec.for_model(JCM)
    psi0 = ExactReference(JCM).psi0
    # slot 2 is RZ on the field qubit (|0>, +1); slot 5 is RZ on the atom (|1>, -1)
    np.testing.assert_allclose(derivative_state(a, np.zeros(12), 2), -0.5j * psi0, atol=1e-14)
    np.testing.assert_allclose(derivative_state(a, np.zeros(12), 5), 0.5j * psi0, atol=1e-14)


def test_derivative_norm_is_half(rng):
    a = AnsatzSpec.for_model(TCM)
    theta = rng.uniform(-3, 3, 18)
    for i in range(18):
        assert np.linalg.norm(derivative_state(a, theta, i)) == pytest.approx(0.5, abs=1e-12)


def test_derivative_index_range():
    with pytest.raises(ParameterError):
        derivative_state(AnsatzSpec.for_model(JCM), np.zeros(12), 12)


@pytest.mark.parametrize("spec", [JCM, TCM])
def test_hadamard_mode_matches_direct(spec, rng):
    a = AnsatzSpec.for_model(spec)
    h, _ = encode(spec)
    for _ in range(3):
        theta = rng.uniform(-math.pi, math.pi, a.n_parameters)
        d = assemble(a, theta, h)
        hd = assemble(a, theta, h, mode="hadamard")
        assert np.abs(d.a_matrix - hd.a_matrix).max() < 1e-8
        assert np.abs(d.c_vector - hd.c_vector).max() < 1e-8


def test_identity_body_diagonal_is_quarter():
    a = AnsatzSpec.for_model(JCM)
    for mode in ("direct", "hadamard"):
        s = assemble(a, np.zeros(12), encode(JCM)[0], mode=mode)
        np.testing.assert_allclose(np.diag(s.a_matrix), 0.25, atol=1e-12)


def test_constant_hamiltonian_gives_zero_c():
    a = AnsatzSpec.for_model(JCM)
    s = assemble(a, np.random.default_rng(1).uniform(-3, 3, 12), PauliSum((), 3.7, 2))
    np.testing.assert_array_equal(s.c_vector, 0)


def test_a_matrix_symmetric_psd(rng):
    a = AnsatzSpec.for_model(JCM)
    h, _ = encode(JCM)
    for _ in range(1000):
        s = assemble(a, rng.uniform(-math.pi, math.pi, 12), h)
        assert np.abs(s.a_matrix - s.a_matrix.T).max() < 1e-10
        assert np.linalg.eigvalsh(s.a_matrix).min() > -1e-8


def test_shot_assembly_needs_seed():
    with pytest.raises(ParameterError):
        assemble(AnsatzSpec.for_model(JCM), np.zeros(12), encode(JCM)[0], shots=100)


def test_shot_assembly_is_reproducible_and_close():
    a = AnsatzSpec.for_model(JCM)
    h, _ = encode(JCM)
    theta = np.random.default_rng(3).uniform(-1, 1, 12)
    s1 = assemble(a, theta, h, shots=4000, seed=11)
    s2 = assemble(a, theta, h, shots=4000, seed=11)
    np.testing.assert_array_equal(s1.a_matrix, s2.a_matrix)
    exact = assemble(a, theta, h)
    assert np.abs(s1.a_matrix - exact.a_matrix).max() < 0.05


def test_solve_identity():
    c = np.array([0.3, -1.2])
    np.testing.assert_allclose(solve(McLachlanSystem(np.eye(2), c), 0).velocity, c)


def test_solve_tikhonov_closed_form():
    v = solve(McLachlanSystem(np.diag([1.0, 0.0]), np.array([1.0, 0.0])), 1e-6).velocity
    np.testing.assert_allclose(v, [1.0, 0.0], atol=1e-5)


def test_solve_singular_without_regularisation():
    with pytest.raises(NumericError, match="condition number"):
        solve(McLachlanSystem(np.diag([1.0, 0.0]), np.array([1.0, 0.0])), 0)
    with pytest.raises(ParameterError):
        solve(McLachlanSystem(np.eye(2), np.ones(2)), -1)


def test_regularisation_shrinks_velocity(rng):
    m = rng.normal(size=(6, 6))
    system = McLachlanSystem(m @ m.T, rng.normal(size=6))
    norms = [np.linalg.norm(solve(system, lam).velocity) for lam in np.logspace(-8, 2, 30)]
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


def test_jcm_population_tracks_exact():
    traj, _ = evolve_vqs(JCM, 0.01, 2 * math.pi / 10)
    err = np.abs(traj.column("population") - traj.column("population_exact"))
    assert err.max() <= 0.1


def test_zero_hamiltonian_keeps_parameters():
    spec = ModelSpec(omega=0.0, coupling=0.0)
    _, history = evolve_vqs(spec, 0.01, 0.1)
    assert all(np.all(theta == 0) for _, _, theta, _ in history.rows)


def test_first_step_consistency():
    a = AnsatzSpec.for_model(JCM)
    h, _ = encode(JCM)
    ref = ExactReference(JCM)
    s = assemble(a, np.zeros(12), h)
    v = solve(s).velocity
    ks = []
    for dt in (0.02, 0.01, 0.005, 0.0025):
        psi = run(a.circuit(), dt * v)
        ks.append((1 - fidelity(psi, ref.state(dt))) / dt**2)
    assert max(ks) < 10 * max(ks[0], 1e-12)
    assert ks[-1] <= ks[0] * 1.5


def test_exact_mode_is_deterministic():
    t1, h1 = evolve_vqs(JCM, 0.01, 0.05)
    t2, h2 = evolve_vqs(JCM, 0.01, 0.05)
    assert t1.to_csv() == t2.to_csv()
    assert h1.to_csv() == h2.to_csv()


def test_hadamard_evolution_matches_direct():
    t1, _ = evolve_vqs(JCM, 0.01, 0.03)
    t2, _ = evolve_vqs(JCM, 0.01, 0.03, mode="hadamard")
    np.testing.assert_allclose(t1.column("E_atom"), t2.column("E_atom"), atol=1e-10)


def test_norm_is_one(rng):
    a = AnsatzSpec.for_model(TCM)
    for _ in range(100):
        psi = run(a.circuit(), rng.uniform(-3, 3, 18))
        assert abs(np.vdot(psi, psi).real - 1) < 1e-12


def test_sign_is_recorded():
    traj, _ = evolve_vqs(JCM, 0.01, 0.02)
    assert traj.metadata["c_sign"] in (1, -1)


def test_shot_ledger_matches_prediction_for_measured_strings():
    k = 1000
    ledger = EvalLedger("vqs", k)
    evolve_vqs(JCM, 0.01, 0.01, measurement=Measurement(k, 5), ledger=ledger)
    n_strings = len(encode(JCM)[0].terms)
    assert ledger.total(0) == predict_evals("vqs", k, n_strings, 12)


def test_singular_solve_aborts_with_step():
    with pytest.raises(EngineError, match="step 0"):
        evolve_vqs(JCM, 0.01, 0.02, lam=0.0)


def test_parameter_history_csv():
    _, hist = evolve_vqs(JCM, 0.01, 0.02)
    lines = hist.to_csv().splitlines()
    assert lines[0].split(",")[:3] == ["step", "t", "theta_1"]
    assert lines[0].endswith("theta_12,residual")
    assert len(lines) == 4
