"""Toolkit for microwave graph-state generation protocols.

Compiles cluster-state, tree-state, repeater-graph-state, and encoded
logical-qubit emission protocols to gate-level circuits for two
superconducting hardware flavors, verifies them exactly with a
stabilizer simulator over all measurement branches, and estimates their
output fidelity with a per-operation product model checked against
dense and Monte Carlo noise oracles.
"""

from .circuit import (CircuitIR, Instruction, gate, emit, measure, idle,
                      cond_pauli, barrier)
from .fidelity import (Axis, DeviceParams, Factor, FidelityReport, PRESETS,
                       SweepSpec, census_consistency, cluster_fidelity,
                       cluster_ratio, error_budget, idle_fidelity,
                       max_cluster_size, rgs_fidelity, sweep,
                       tree_arm_fidelity_ff, tree_fidelity, tree_ratio)
from .graphs import (Graph, build_cluster, build_rgs, build_tree, from_edges,
                     local_complement, stabilizers_of)
from .oracle import (DenseState, NoiseModel, OracleResult, ORACLE_BAND,
                     average_channel_fidelity, band_check, depolarizing_rate,
                     idle_channel, noisy_state_fidelity)
from .protocols import (ENCODINGS, FLAVORS, STRATEGIES, census,
                        compile_cluster, compile_rgs, compile_shor_logical,
                        compile_tree, encoding_time, lower,
                        shor_expected_rows, shor_membership_failures,
                        sqg_runs, target_of)
from .simulator import PauliFrame, RunResult, VerificationReport, run, verify
from .tableau import StabilizerTableau

__version__ = "0.1.0"

__all__ = [
    "Axis", "CircuitIR", "DenseState", "DeviceParams", "ENCODINGS",
    "FLAVORS", "Factor", "FidelityReport", "Graph", "Instruction",
    "NoiseModel", "ORACLE_BAND", "OracleResult", "PRESETS", "PauliFrame",
    "RunResult", "STRATEGIES", "StabilizerTableau", "SweepSpec",
    "VerificationReport", "average_channel_fidelity", "band_check",
    "barrier", "build_cluster", "build_rgs", "build_tree", "census",
    "census_consistency", "cluster_fidelity", "cluster_ratio",
    "compile_cluster", "compile_rgs", "compile_shor_logical",
    "compile_tree", "cond_pauli", "depolarizing_rate", "emit",
    "encoding_time", "error_budget", "from_edges", "gate", "idle",
    "idle_channel", "idle_fidelity", "local_complement",
    "max_cluster_size", "measure", "noisy_state_fidelity", "rgs_fidelity",
    "run", "shor_expected_rows", "shor_membership_failures", "sqg_runs",
    "stabilizers_of", "sweep", "target_of", "tree_arm_fidelity_ff",
    "tree_fidelity", "tree_ratio", "verify",
]
