"""Execute circuit programs on the stabilizer engine and verify outputs.

run() plays an instruction list against a tableau plus a Pauli frame.
Classically conditioned corrections are folded into the frame (the
lab-frame trick: corrections are applied virtually, never as physical
gates), and recorded measurement outcomes are reported relative to that
frame. verify() then checks, branch by branch, that the frame-corrected
final state restricts to the target graph state on the photon qubits,
with every non-retained matter qubit deterministically disentangled.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .circuit import GATE_KINDS, CircuitIR
from .graphs import Graph, stabilizers_of
from .tableau import StabilizerTableau, _eliminate


class PauliFrame:
    """Accumulated virtual Pauli correction, tracked modulo global phase."""

    def __init__(self, n: int):
        self.x = np.zeros(n, dtype=np.uint8)
        self.z = np.zeros(n, dtype=np.uint8)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())

    def conjugate(self, kind, qubits, angle=None) -> None:
        """Push the frame through a gate: F -> U F U^dag, sign dropped."""
        t = StabilizerTableau(self.x[None, :], self.z[None, :], np.zeros(1))
        t._apply_inplace(kind, qubits, angle)
        self.x = t.x[0]
        self.z = t.z[0]

    def grow_swap(self, emitter: int) -> None:
        # new photon column starts as identity, then swaps with emitter
        self.x = np.append(self.x, 0).astype(np.uint8)
        self.z = np.append(self.z, 0).astype(np.uint8)
        n = self.n - 1
        self.x[[emitter, n]] = self.x[[n, emitter]]
        self.z[[emitter, n]] = self.z[[n, emitter]]

    def compose(self, pauli: str, q: int) -> None:
        if pauli in ("X", "Y"):
            self.x[q] ^= 1
        if pauli in ("Z", "Y"):
            self.z[q] ^= 1

    def anticommutes(self, mx, mz) -> bool:
        return bool((int(self.x @ mz.astype(np.int64))
                     + int(self.z @ mx.astype(np.int64))) % 2)

    def to_string(self) -> str:
        letters = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
        return "".join(letters[(self.x[q], self.z[q])] for q in range(self.n))


@dataclass
class RunResult:
    """Final tableau, ordered (id, outcome, deterministic) list, frame."""

    final_state: StabilizerTableau
    outcomes: list
    frame: PauliFrame

    def outcome_map(self) -> dict:
        return {mid: out for mid, out, _ in self.outcomes}

    def state_with_frame(self) -> StabilizerTableau:
        """Final tableau conjugated by the frame (sign flips only)."""
        t = self.final_state.copy()
        anti = ((t.x.astype(np.int64) @ self.frame.z
                 + t.z.astype(np.int64) @ self.frame.x) % 2).astype(np.uint8)
        t.r ^= anti
        return t

    def to_json(self) -> str:
        return json.dumps({
            "n_qubits": self.final_state.n,
            "outcomes": [[mid, out, bool(det)] for mid, out, det in self.outcomes],
            "frame": self.frame.to_string(),
        }, separators=(",", ":"))


def run(c: CircuitIR, forced: dict | None = None, seed: int | None = None) -> RunResult:
    """Execute the circuit in order.

    forced maps measurement ids to required recorded outcomes (+-1);
    unforced random outcomes are drawn from a generator seeded with
    seed. IDLE and BARRIER are timing annotations and do nothing here.
    Deterministic outcomes never consume randomness, so results are
    reproducible given (circuit, forced) or (circuit, seed).
    """
    c.validate()
    forced = forced or {}
    rng = np.random.default_rng(seed)
    n_matter = len(c.matter_qubits())
    t = StabilizerTableau.zero_state(n_matter)
    frame = PauliFrame(n_matter)
    outcomes = []
    recorded = {}
    for ins in c.instructions:
        if ins.kind in GATE_KINDS:
            t._apply_inplace(ins.kind, ins.qubits, ins.angle)
            frame.conjugate(ins.kind, ins.qubits, ins.angle)
        elif ins.kind == "EMIT":
            emitter, photon = ins.qubits
            new = t._emit_inplace(emitter)
            if new != photon:
                raise ValueError(
                    f"EMIT produced qubit {new} but circuit declares p{photon}")
            frame.grow_swap(emitter)
        elif ins.kind == "MEASURE":
            q = ins.qubits[0]
            mx, mz = t._basis_row(q, ins.basis)
            flip = -1 if frame.anticommutes(mx, mz) else 1
            want = forced.get(ins.meas_id)
            raw, det = t._measure_inplace(
                q, ins.basis, None if want is None else want * flip, rng)
            out = raw * flip
            outcomes.append((ins.meas_id, out, det))
            recorded[ins.meas_id] = out
        elif ins.kind == "COND":
            if ins.meas_id not in recorded:
                raise ValueError(f"COND before measurement m{ins.meas_id}")
            if recorded[ins.meas_id] == ins.trigger:
                frame.compose(ins.pauli, ins.qubits[0])
        elif ins.kind in ("IDLE", "BARRIER"):
            pass
        else:
            raise ValueError(f"unknown instruction kind {ins.kind!r}")
    return RunResult(t, outcomes, frame)


@dataclass
class VerificationReport:
    target: Graph
    mode: str
    branches_checked: int
    all_pass: bool
    first_failure: dict | None = None

    def to_json(self) -> str:
        return json.dumps({
            "target": {"n": self.target.vertex_count,
                       "edges": sorted(list(e) for e in self.target.edges)},
            "mode": self.mode,
            "branches_checked": self.branches_checked,
            "all_pass": self.all_pass,
            "first_failure": self.first_failure,
        }, separators=(",", ":"))


def verify(c: CircuitIR, target: Graph, mode: str = "exhaustive",
           trials: int = 200, seed: int = 0) -> VerificationReport:
    """Check every measurement branch maps the photons onto the target.

    mode "exhaustive" forces all 2^m recorded-outcome assignments over
    the m measurements; "sampled" plays `trials` seeded random runs.
    Retained matter qubits (circuit.retained) count as target vertices;
    all other matter qubits must end disentangled from the photons.
    """
    c.validate()
    mapping = dict(c.photon_map)
    mapping.update(c.retained)
    v = target.vertex_count
    if sorted(mapping.values()) != list(range(v)):
        raise ValueError(
            f"circuit covers vertices {sorted(mapping.values())}, "
            f"target has {v}")
    target_canon = stabilizers_of(target).canonical_form()
    meas_ids = [ins.meas_id for ins in c.measurements()]

    def check_branch(label, result) -> dict | None:
        diff = _restricted_mismatch(result, mapping, target_canon)
        if diff is None:
            return None
        return {"forced": label, "diff": diff}

    branches = 0
    failure = None
    if mode == "exhaustive":
        for assign in itertools.product((1, -1), repeat=len(meas_ids)):
            branches += 1
            res = run(c, forced=dict(zip(meas_ids, assign)))
            failure = check_branch(list(assign), res)
            if failure:
                break
    elif mode == "sampled":
        for k in range(trials):
            branches += 1
            res = run(c, seed=seed + k)
            failure = check_branch([out for _, out, _ in res.outcomes], res)
            if failure:
                break
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return VerificationReport(target, mode, branches, failure is None, failure)


def _restricted_mismatch(result: RunResult, mapping: dict,
                         target_canon: StabilizerTableau) -> str | None:
    """None if the frame-corrected state restricts to the target, else why."""
    t = result.state_with_frame()
    n = t.n
    kept = sorted(mapping)
    others = [q for q in range(n) if q not in mapping]
    cols = [q for q in others] + [n + q for q in others]
    reduced, pivots = _eliminate(t, cols)
    kernel = list(range(len(pivots), n))
    if len(kernel) != len(kept):
        bad = []
        for q in others:
            if not any(reduced._member_sign(*reduced._basis_row(q, b))
                       for b in ("X", "Y", "Z")):
                bad.append(q)
        return (f"matter qubits {bad} still entangled with the photons "
                f"({len(kernel)} photon-only generators for {len(kept)} kept qubits)")
    # reorder kept columns by target vertex and canonicalize
    order = sorted(kept, key=lambda q: mapping[q])
    x = reduced.x[np.ix_(kernel, order)]
    z = reduced.z[np.ix_(kernel, order)]
    r = reduced.r[kernel]
    got = StabilizerTableau(x, z, r).canonical_form()
    if got == target_canon:
        return None
    return ("restricted state differs from target: got "
            f"{got.to_strings()} want {target_canon.to_strings()}")
