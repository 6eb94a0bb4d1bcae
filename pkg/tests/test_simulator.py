"""Branch execution, Pauli-frame corrections, and target verification."""

import json

import pytest

from gsforge.circuit import CircuitIR, barrier, cond_pauli, emit, gate, measure
from gsforge.graphs import from_edges
from gsforge.simulator import run, verify


def one_photon_circuit(correct=True):
    """Entangle aux and emitter, emit, Z-measure the aux vertex away.

    Deleting a vertex by Z measurement needs a conditional Z on its
    neighbor when the outcome is -1; without it one branch is wrong.
    """
    qubits = [(0, "auxiliary"), (1, "emitter"), (2, "photon")]
    instructions = [
        gate("H", 0),
        gate("H", 1),
        gate("CZ", 0, 1),
        emit(1, 2),
        barrier(),
        measure(0, "Z", 0, budgeted=False),
    ]
    if correct:
        instructions.append(cond_pauli(0, -1, "Z", 2))
    return CircuitIR("one", qubits, instructions, None, {}, {2: 0}, {})


def product_pair_circuit():
    """Two independent |+> photons from repeated emission."""
    qubits = [(0, "emitter"), (1, "photon"), (2, "photon")]
    instructions = [
        gate("H", 0), emit(0, 1),
        gate("H", 0), emit(0, 2),
    ]
    return CircuitIR("pair", qubits, instructions, None, {},
                     {1: 0, 2: 1}, {})


def test_forced_branches_agree_after_correction():
    report = verify(one_photon_circuit(), from_edges(1, []))
    assert report.all_pass
    assert report.branches_checked == 2


def test_missing_correction_fails_on_one_branch():
    report = verify(one_photon_circuit(correct=False), from_edges(1, []))
    assert not report.all_pass
    assert report.first_failure is not None


def test_forced_outcomes_are_respected():
    result = run(one_photon_circuit(), forced={0: -1})
    assert result.outcome_map() == {0: -1}


def test_frame_applies_pending_paulis_to_state():
    result = run(one_photon_circuit(), forced={0: -1})
    t = result.state_with_frame()
    # photon reads |+> only once the frame correction lands
    assert t.contains("+IIX") == 1


def test_run_is_deterministic_under_seed():
    c = one_photon_circuit()
    assert run(c, seed=4).outcome_map() == run(c, seed=4).outcome_map()


def test_sampled_mode_matches_exhaustive_for_small_circuit():
    report = verify(one_photon_circuit(), from_edges(1, []),
                    mode="sampled", trials=20, seed=1)
    assert report.all_pass
    assert report.mode == "sampled"


def test_wrong_target_same_size_fails():
    c = product_pair_circuit()
    assert verify(c, from_edges(2, [])).all_pass
    report = verify(c, from_edges(2, [(0, 1)]))
    assert not report.all_pass


def test_vertex_count_mismatch_is_a_validation_error():
    with pytest.raises(ValueError):
        verify(one_photon_circuit(), from_edges(2, [(0, 1)]))


def test_report_json_keys():
    report = verify(one_photon_circuit(), from_edges(1, []))
    data = json.loads(report.to_json())
    assert data["all_pass"] is True
    assert data["branches_checked"] == 2
    assert data["mode"] == "exhaustive"


def test_forced_contradiction_surfaces():
    qubits = [(0, "emitter")]
    c = CircuitIR("det", qubits, [measure(0, "Z", 0, budgeted=False)],
                  None, {}, {}, {0: 0})
    with pytest.raises(ValueError):
        run(c, forced={0: -1})


def test_entangled_leftover_matter_is_reported():
    # forgetting to disentangle the aux leaves the photon unverifiable
    qubits = [(0, "auxiliary"), (1, "emitter"), (2, "photon")]
    instructions = [
        gate("H", 0), gate("H", 1), gate("CZ", 0, 1), emit(1, 2),
    ]
    c = CircuitIR("stuck", qubits, instructions, None, {}, {2: 0}, {})
    report = verify(c, from_edges(1, []))
    assert not report.all_pass
