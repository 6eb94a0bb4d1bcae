"""Analytic fidelity model: presets, closed forms, budgets, sweeps.

Expected values are frozen from an independent hand computation of the
factor exponents (gate censuses counted by hand) multiplied in log
space, so regressions in either the census or the assembly show up.
"""

import json
import math
from dataclasses import replace

import pytest

from gsforge.fidelity import (
    PRESETS,
    Axis,
    DeviceParams,
    SweepSpec,
    census_consistency,
    cluster_fidelity,
    cluster_ratio,
    error_budget,
    idle_fidelity,
    max_cluster_size,
    rgs_fidelity,
    sweep,
    tree_arm_fidelity_ff,
    tree_fidelity,
    tree_ratio,
)
from gsforge.protocols import compile_cluster, compile_rgs, compile_tree

FF3 = PRESETS["ff-tableIII"]
TF3 = PRESETS["tf-tableIII"]
FF4 = PRESETS["ff-tableIV"]
TF4 = PRESETS["tf-tableIV"]


def test_idle_fidelity_formula():
    tau, t1, t2 = 0.3e-6, 60e-6, 55e-6
    expect = 0.5 + (math.exp(-tau / t1) + 2 * math.exp(-tau / t2)) / 6.0
    assert idle_fidelity(tau, t1, t2) == pytest.approx(expect, rel=1e-15)
    assert idle_fidelity(tau, t1, t2) == pytest.approx(0.997355514, abs=1e-9)
    assert idle_fidelity(0.0, t1, t2) == 1.0


def test_preset_fields():
    assert FF3.flavor == "ff" and FF3.f_cnot == 0.928 and FF3.f_cr == 0.991
    assert FF3.f_sq == 0.9995 and FF3.f_m == 1.0
    assert FF3.t1 == 60e-6 and FF3.t2 == 55e-6 and FF3.tau == 0.3e-6
    assert TF3.flavor == "tf" and TF3.f_cz == 0.995 and TF3.f_m == 1.0
    assert TF3.t1 == 44e-6 and TF3.t2 == 20e-6 and TF3.tau == 0.1e-6
    assert FF4.f_cnot == 0.995 and FF4.f_cr == 0.995 and FF4.f_m == 0.99
    assert TF4.f_cz == 0.995 and TF4.f_m == 0.99


def test_device_params_validation():
    with pytest.raises(ValueError):
        DeviceParams(flavor="xx")
    with pytest.raises(ValueError):
        DeviceParams(flavor="ff", f_cnot=0.0, f_cr=0.99)
    with pytest.raises(ValueError):
        DeviceParams(flavor="ff", f_cnot=1.2, f_cr=0.99)
    with pytest.raises(ValueError):
        DeviceParams(flavor="ff", f_cnot=0.99)  # no f_cr
    with pytest.raises(ValueError):
        DeviceParams(flavor="tf")  # no f_cz
    with pytest.raises(ValueError):
        DeviceParams(flavor="tf", f_cz=0.99, t1=1e-6, t2=3e-6)  # t2 > 2 t1
    with pytest.raises(ValueError):
        DeviceParams(flavor="tf", f_cz=0.99, tau=-1.0)


def test_report_json_and_multiply_back():
    report = tree_fidelity(2, 1, FF4)
    data = json.loads(report.to_json())
    assert set(data) == {"total", "factors"}
    assert all(set(f) == {"source", "base", "exponent"}
               for f in data["factors"])
    back = 1.0
    for f in report.factors:
        back *= f.base ** f.exponent
    assert back == pytest.approx(report.total, rel=1e-12)


def test_error_budget_ff():
    totals = [r.total for r in error_budget(6, 1, FF4)]
    expect = [0.822994, 0.833348, 0.900702, 0.874149, 0.849565]
    assert totals == pytest.approx(expect, abs=1e-6)
    # every ablation can only help
    assert all(t >= totals[0] for t in totals[1:])


def test_error_budget_tf():
    totals = [r.total for r in error_budget(6, 1, TF4)]
    expect = [0.826507, 0.839421, 0.904547, 0.877880, 0.847019]
    assert totals == pytest.approx(expect, abs=1e-6)


@pytest.mark.parametrize("f2,tau,expect", [
    (0.990, 0.9e-6, 0.705545),
    (0.995, 0.9e-6, 0.772514),
    (0.990, 0.3e-6, 0.751648),
    (0.995, 0.3e-6, 0.822994),
    (0.998, 0.3e-6, 0.868822),
])
def test_tree_spot_values_ff(f2, tau, expect):
    p = replace(FF4, f_cnot=f2, f_cr=f2, tau=tau)
    assert tree_fidelity(6, 1, p).total == pytest.approx(expect, abs=1e-6)


@pytest.mark.parametrize("f2,tau,expect", [
    (0.995, 0.9e-6, 0.680783),
    (0.995, 0.1e-6, 0.826507),
    (0.998, 0.1e-6, 0.872531),
])
def test_tree_spot_values_tf(f2, tau, expect):
    p = replace(TF4, f_cz=f2, tau=tau)
    assert tree_fidelity(6, 1, p).total == pytest.approx(expect, abs=1e-6)


def test_max_cluster_size_points():
    mixed = replace(FF4, f_cnot=0.995, f_cr=0.991, tau=0.3e-6)
    assert max_cluster_size(2, mixed, 0.8) == 16
    assert max_cluster_size(2, replace(TF4, tau=0.1e-6), 0.8) == 20


def test_cluster_fidelity_values():
    mixed = replace(FF4, f_cnot=0.995, f_cr=0.991, tau=0.3e-6)
    assert cluster_fidelity(2, 8, mixed).total == pytest.approx(
        0.813103, abs=1e-6)
    assert cluster_fidelity(2, 8, replace(TF4, tau=0.1e-6)).total == \
        pytest.approx(0.837785, abs=1e-6)
    assert cluster_fidelity(2, 8, FF4).total == pytest.approx(
        0.839733, abs=1e-6)


def test_rgs_fidelity_values():
    improved = replace(FF4, f_cnot=0.998, f_cr=0.998)
    assert rgs_fidelity(6, improved).total == pytest.approx(0.859704,
                                                            abs=1e-6)
    assert rgs_fidelity(6, FF4).total == pytest.approx(0.814356, abs=1e-6)
    # the rgs column only adds the anchor rotation and readout to the tree
    assert rgs_fidelity(6, improved).total < tree_fidelity(
        6, 1, improved).total


def test_sequential_strategy_value():
    assert tree_fidelity(6, 1, FF4, strategy="sequential").total == \
        pytest.approx(0.795262, abs=1e-6)


def test_flavor_ratios():
    tf_matched = replace(TF3, tau=0.3e-6)
    assert cluster_ratio(2, FF3, tf_matched) == pytest.approx(1.004225,
                                                              abs=1e-6)
    assert tree_ratio(1, FF3, tf_matched) == pytest.approx(1.003723,
                                                           abs=1e-6)
    with pytest.raises(ValueError):
        cluster_ratio(1, FF3, tf_matched)
    with pytest.raises(ValueError):
        cluster_ratio(2, FF3, FF4)


def test_tree_arm_fidelity():
    assert tree_arm_fidelity_ff(1, FF4) == pytest.approx(0.968134, abs=1e-6)
    with pytest.raises(ValueError):
        tree_arm_fidelity_ff(1, TF4)


def test_census_consistency_matches_closed_form_bitwise():
    cases = [
        (compile_tree(6, 1, "ff"), FF4, tree_fidelity(6, 1, FF4)),
        (compile_tree(3, 2, "ff", strategy="sequential"), FF3,
         tree_fidelity(3, 2, FF3, strategy="sequential")),
        (compile_cluster(2, 3, "tf"), TF3, cluster_fidelity(2, 3, TF3)),
        (compile_rgs(3, "ff"), FF4, rgs_fidelity(3, FF4)),
    ]
    for c, p, closed in cases:
        assert census_consistency(c, p).total == closed.total


def test_census_consistency_rejects_flavor_mismatch():
    with pytest.raises(ValueError):
        census_consistency(compile_cluster(2, 2, "ff"), TF3)


def test_emission_factor_only_when_lossy():
    lossy = replace(FF4, f_emit=0.99)
    sources = [f.source for f in tree_fidelity(2, 1, lossy).factors]
    assert "emission" in sources
    emit = [f for f in tree_fidelity(2, 1, lossy).factors
            if f.source == "emission"][0]
    assert emit.exponent == 4  # one per photon
    sources = [f.source for f in tree_fidelity(2, 1, FF4).factors]
    assert "emission" not in sources


def test_fidelity_monotone_in_noise():
    f0 = tree_fidelity(6, 1, FF4).total
    assert tree_fidelity(6, 1, replace(FF4, tau=0.6e-6)).total < f0
    assert tree_fidelity(6, 1, replace(FF4, f_cnot=0.99)).total < f0
    assert max_cluster_size(2, replace(FF4, tau=0.6e-6), 0.8) <= \
        max_cluster_size(2, FF4, 0.8)


def test_max_cluster_size_unbounded():
    perfect = DeviceParams(flavor="ff", f_cnot=1.0, f_cr=1.0)
    with pytest.raises(ValueError):
        max_cluster_size(2, perfect, 0.8)


def test_max_cluster_size_zero_when_first_column_fails():
    bad = replace(FF4, f_cnot=0.5, f_cr=0.5)
    assert max_cluster_size(2, bad, 0.8) == 0


def test_sweep_two_axes_row_major():
    spec = SweepSpec("cluster", {"k": 2, "n": 8},
                     (Axis("f_2qg", 0.98, 1.0, 3), Axis("tau", 1e-7, 9e-7, 3)),
                     FF4, "fidelity")
    rows = sweep(spec)
    assert len(rows) == 9
    assert [r[0] for r in rows[:3]] == [0.98] * 3  # first axis slowest
    assert rows[0][1] == pytest.approx(1e-7)
    assert rows[1][1] == pytest.approx(5e-7)
    # f_2qg drives both ff two-qubit fidelities
    expect = cluster_fidelity(
        2, 8, replace(FF4, f_cnot=0.98, f_cr=0.98, tau=1e-7)).total
    assert rows[0][2] == pytest.approx(expect, rel=1e-12)


def test_sweep_single_axis_values():
    spec = SweepSpec("tree", {"b0": 6, "b1": 1},
                     (Axis("tau", 1e-7, 9e-7, 5),), FF4, "fidelity")
    rows = sweep(spec)
    assert len(rows) == 5
    assert rows[1][0] == pytest.approx(3e-7)
    assert rows[1][1] == pytest.approx(0.822994, abs=1e-6)


def test_sweep_log_axis_and_max_size_metric():
    spec = SweepSpec("cluster", {"k": 2, "n": 1, "f_min": 0.8},
                     (Axis("tau", 1e-8, 1e-6, 3, scale="log"),),
                     FF4, "max_size")
    rows = sweep(spec)
    assert rows[1][0] == pytest.approx(1e-7, rel=1e-9)
    assert [r[1] for r in rows] == [26, 24, 12]


def test_sweep_validation():
    with pytest.raises(ValueError):
        Axis("frequency", 1.0, 2.0, 3)
    with pytest.raises(ValueError):
        Axis("tau", 1.0, 2.0, 1)
    with pytest.raises(ValueError):
        sweep(SweepSpec("tree", {"b0": 2, "b1": 1},
                        (Axis("tau", 1e-7, 9e-7, 3),), FF4, "max_size"))
