"""Dense and Monte-Carlo noise oracles against the analytic model.

Dense deltas are frozen numbers: the density-matrix evolution is
deterministic, so any drift means the noise insertion points moved.
"""

import json
import math
from dataclasses import replace

import numpy as np
import pytest

from gsforge.fidelity import DeviceParams, PRESETS, idle_fidelity
from gsforge.oracle import (
    ORACLE_BAND,
    NoiseModel,
    average_channel_fidelity,
    band_check,
    dense_limit,
    depolarizing_rate,
    idle_channel,
    noisy_state_fidelity,
)
from gsforge.protocols import (
    compile_cluster,
    compile_shor_logical,
    compile_tree,
    lower,
)

FF3 = PRESETS["ff-tableIII"]
TF3 = PRESETS["tf-tableIII"]


def test_idle_channel_map():
    one = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    out = idle_channel(one, 60e-6, 60e-6, 55e-6)
    e = math.exp(-1.0)
    assert np.allclose(out, np.diag([1.0 - e, e]), atol=1e-15)
    plus = np.full((2, 2), 0.5, dtype=complex)
    out = idle_channel(plus, 0.3e-6, 60e-6, 55e-6)
    overlap = float(np.real(np.trace(plus @ out)))
    assert overlap == pytest.approx(0.5 + math.exp(-0.3 / 55) / 2, rel=1e-12)
    assert np.allclose(idle_channel(plus, 0.0, 60e-6, 55e-6), plus)
    assert np.trace(out) == pytest.approx(1.0, abs=1e-15)


def test_idle_channel_rejects_unphysical_t2():
    rho = np.eye(2, dtype=complex) / 2
    with pytest.raises(ValueError):
        idle_channel(rho, 1e-6, 10e-6, 30e-6)


def test_average_fidelity_matches_closed_form_on_grid():
    t1, t2 = 60e-6, 55e-6
    for tau in np.linspace(0.0, 5e-6, 50):
        got = average_channel_fidelity(
            lambda rho: idle_channel(rho, tau, t1, t2))
        assert abs(got - idle_fidelity(tau, t1, t2)) < 1e-12


def test_depolarizing_rate_values_and_domain():
    assert depolarizing_rate(0.9995, 2) == pytest.approx(0.00075, rel=1e-9)
    assert depolarizing_rate(0.995, 4) == pytest.approx(0.00625, rel=1e-9)
    assert depolarizing_rate(1.0, 2) == 0.0
    with pytest.raises(ValueError):
        depolarizing_rate(0.5, 2)  # below the qubit floor 2/3
    with pytest.raises(ValueError):
        depolarizing_rate(1.001, 2)


def test_idle_twirl_probabilities():
    nm = NoiseModel.from_params(TF3)
    px, py, pz = nm.idle_twirl()
    e1 = math.exp(-TF3.tau / TF3.t1)
    e2 = math.exp(-TF3.tau / TF3.t2)
    assert px == pytest.approx((1 - e1) / 4, rel=1e-12)
    assert py == pytest.approx(px, rel=1e-12)
    assert pz == pytest.approx((1 + e1 - 2 * e2) / 4, rel=1e-12)
    # twirling keeps the average fidelity of the original channel
    twirled = 1.0 - 2.0 * (px + py + pz) / 3.0
    assert twirled == pytest.approx(idle_fidelity(TF3.tau, TF3.t1, TF3.t2),
                                    abs=1e-15)


def test_noiseless_params_score_unity():
    perfect = DeviceParams(flavor="ff", f_cnot=1.0, f_cr=1.0)
    c = compile_cluster(1, 2, "ff")
    r = noisy_state_fidelity(c, perfect, method="dense")
    assert r.estimate == pytest.approx(1.0, abs=1e-12)
    assert r.delta == pytest.approx(0.0, abs=1e-12)
    r = noisy_state_fidelity(c, perfect, method="pauli_mc", trials=2000,
                             seed=3)
    assert r.estimate == 1.0 and r.std_err == 0.0


@pytest.mark.parametrize("builder,p,delta", [
    (lambda: compile_cluster(1, 1, "ff"), FF3, +0.024009),
    (lambda: compile_cluster(1, 2, "ff"), FF3, +0.000668),
    (lambda: compile_cluster(1, 1, "tf"), TF3, +0.001721),
    (lambda: compile_cluster(1, 2, "tf"), TF3, -0.002137),
    (lambda: compile_cluster(1, 3, "tf"), TF3, -0.004395),
])
def test_dense_delta_regression(builder, p, delta):
    r = noisy_state_fidelity(builder(), p, method="dense")
    assert r.delta == pytest.approx(delta, abs=1e-6)
    assert 0.0 <= r.estimate <= 1.0


def test_dense_branch_weights_sum_to_one():
    r = noisy_state_fidelity(compile_cluster(1, 2, "tf"), TF3,
                             method="dense")
    assert len(r.per_branch) == 2
    assert sum(w for _, w, _ in r.per_branch) == pytest.approx(1.0,
                                                               abs=1e-10)


def test_mc_agrees_with_dense_within_three_sigma():
    c = compile_cluster(1, 2, "tf")
    d = noisy_state_fidelity(c, TF3, method="dense")
    m = noisy_state_fidelity(c, TF3, method="pauli_mc", trials=100_000,
                             seed=7)
    assert abs(m.estimate - d.estimate) <= 3 * m.std_err
    assert m.std_err == pytest.approx(
        math.sqrt(m.estimate * (1 - m.estimate) / m.trials), rel=1e-9)


def test_band_check_classifies_instances():
    applies, worst, ops = band_check(compile_cluster(1, 2, "tf"), TF3)
    assert applies and ops == 10
    assert worst == pytest.approx(0.005, rel=1e-9)
    applies, _, ops = band_check(compile_tree(2, 1, "tf"), TF3)
    assert not applies and ops == 21  # too many noisy ops
    applies, worst, _ = band_check(compile_cluster(1, 1, "ff"), FF3)
    assert not applies  # 0.928 CNOT breaks the small-error premise
    assert worst == pytest.approx(0.072, rel=1e-9)
    assert ORACLE_BAND == 0.015


def test_dense_register_cap(monkeypatch):
    monkeypatch.delenv("GSFORGE_DENSE_LIMIT", raising=False)
    assert dense_limit() == 10
    with pytest.raises(ValueError):
        noisy_state_fidelity(compile_cluster(2, 4, "tf"), TF3,
                             method="dense")
    monkeypatch.setenv("GSFORGE_DENSE_LIMIT", "3")
    assert dense_limit() == 3
    with pytest.raises(ValueError):
        noisy_state_fidelity(compile_cluster(1, 3, "tf"), TF3,
                             method="dense")


def test_result_json_schema():
    r = noisy_state_fidelity(compile_cluster(1, 1, "tf"), TF3,
                             method="dense")
    data = json.loads(r.to_json())
    assert set(data) == {"method", "trials", "estimate", "std_err",
                         "analytic", "delta"}
    assert data["method"] == "dense"


def test_oracle_requires_graph_target():
    with pytest.raises(ValueError):
        noisy_state_fidelity(lower(compile_shor_logical(), "ff"), FF3)


def test_oracle_rejects_flavor_mismatch():
    with pytest.raises(ValueError):
        noisy_state_fidelity(compile_cluster(1, 1, "tf"), FF3)


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        noisy_state_fidelity(compile_cluster(1, 1, "tf"), TF3,
                             method="magic")


def test_more_noise_scores_lower():
    c = compile_cluster(1, 2, "tf")
    base = noisy_state_fidelity(c, TF3, method="dense").estimate
    worse = noisy_state_fidelity(c, replace(TF3, f_cz=0.95),
                                 method="dense").estimate
    assert worse < base < 1.0
