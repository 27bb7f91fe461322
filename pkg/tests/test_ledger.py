import threading

import pytest

from rabi_forge.circuit import Circuit, cnot, rx
from rabi_forge.ledger import (
    MATRIX_ELEMENTS, OBSERVABLES, EvalLedger, LayerTracker, depth, predict_evals,
)
from rabi_forge.models import ModelSpec
from rabi_forge.vqs import evolve_vqs


def test_empty_circuit_depth():
    d = depth(Circuit(2))
    assert (d.total_depth, d.two_qubit_depth) == (0, 0)


def test_parallel_rotations_then_cnot():
    d = depth(Circuit(2, (rx(0, 0.1), rx(1, 0.2), cnot(0, 1))))
    assert (d.total_depth, d.two_qubit_depth) == (2, 1)
    assert d.gate_counts == {"RX": 2, "CNOT": 1}


def test_incremental_tracker_matches_batch(rng):
    from conftest import random_circuit
    a, b = random_circuit(rng, 3, 20), random_circuit(rng, 3, 15)
    assert LayerTracker(3).add(a).add(b).report() == depth(a + b)


def test_two_qubit_depth_never_exceeds_total(rng):
    from conftest import random_circuit
    for _ in range(50):
        d = depth(random_circuit(rng, 3, 30))
        assert d.two_qubit_depth <= d.total_depth


def test_table_values():
    assert predict_evals("trotter", 1000, 7) == 7000
    assert predict_evals("isl", 1000, 7, n_l=5.5, n_ev=919) == 5_061_500
    assert predict_evals("vqs", 1000, 7, n_pm=18) == 304_000
    assert predict_evals("vqs", 1000, 7, n_pm=18) == 7000 + 500 * 18 * 19 + 18 * 7 * 1000


def test_predict_rejects_bad_input():
    with pytest.raises(ValueError):
        predict_evals("trotter", -1, 7)
    with pytest.raises(ValueError):
        predict_evals("qaoa", 1, 1)


def test_record_and_total():
    ledger = EvalLedger("x")
    ledger.record(OBSERVABLES, 5)
    assert ledger.total() == 5
    with pytest.raises(ValueError):
        ledger.record("nonsense", 1)


def test_concurrent_records():
    ledger = EvalLedger("x")

    def work(n):
        for _ in range(1000):
            ledger.record(MATRIX_ELEMENTS, n, step=1)

    threads = [threading.Thread(target=work, args=(n,)) for n in (3, 4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert ledger.total(1) == 7000


def test_categories_sum_to_total():
    ledger = EvalLedger("vqs", 10)
    evolve_vqs(ModelSpec(), 0.01, 0.02, ledger=ledger)
    for row in ledger.rows():
        assert row["total"] == (row["evals_observables"] + row["evals_cost_probes"]
                                + row["evals_matrix_elements"])


def test_vqs_depth_constant():
    ledger = EvalLedger("vqs")
    evolve_vqs(ModelSpec(), 0.01, 0.2, ledger=ledger)
    depths = [ledger.depth_at(s) for s in ledger.steps]
    assert all(d == depths[0] for d in depths)
    assert depths[0].total_depth > 0
