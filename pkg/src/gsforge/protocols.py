"""Protocol compilers, hardware lowering, and circuit accounting.

Two hardware flavors are supported. "ff" is a fixed-frequency chip whose
native two-qubit gates are CR = exp(i(pi/4) Z(x)X) plus a CNOT that is
only available onto an emitter (the emitter sits in |0> when it is the
target, which is what the hardware calibration assumes). "tf" is a
tunable chip with native CZ. lower() rewrites generic CNOT/CZ onto the
native set, cancels adjacent inverse single-qubit gates, and commutes
isolated Z-axis rotations across the Z leg of a CR when that merges two
single-qubit runs into one.

census() reports gate counts after lowering. Single-qubit gates are
counted as maximal runs of adjacent gates on the same qubit (a run costs
one calibrated pulse); runs are broken by anything else touching the
qubit except classical COND bookkeeping. Virtual Z-axis rotations on
photons are tallied separately under VSQG and cost nothing. IDLE counts
qubit-windows (one per listed qubit).
"""

from __future__ import annotations

import math

from .circuit import (CircuitIR, SQG_KINDS, TWO_QUBIT_KINDS, barrier,
                      cond_pauli, emit, gate, idle, measure)
from .graphs import Graph, build_cluster, build_rgs, build_tree
from .simulator import run

FLAVORS = ("ff", "tf")
STRATEGIES = ("parallel", "sequential")
ENCODINGS = ("fock", "time_bin", "frequency_bin", "two_rail")

_HALF_PI = math.pi / 2

# fixed virtual rotation on the retained neighbors of a Y-measured hub,
# paired with the outcome-conditioned Z that completes the correction
# (Rz(-pi/2) with Z on -1 is the same channel as Rz(+pi/2) with Z on +1)
_HUB_RZ_ANGLE = -_HALF_PI
_HUB_TRIGGER = -1


# ---------------------------------------------------------------------------
# builders (unlowered)


def _cluster_circuit(k: int, n: int) -> CircuitIR:
    """k emitter-aux pairs stream an n-column cluster, one column per cycle.

    Aux r is qubit r, emitter r is k+r; the photon emitted by row r in
    cycle c maps to lattice vertex r*n + c. Each cycle: H on every aux,
    CZ down the aux chain, CNOT onto the (reset) emitters, emission.
    Terminal X measurements release the last column from the auxes.
    """
    if k < 1 or n < 1:
        raise ValueError("cluster needs k >= 1 rows and n >= 1 columns")
    qubits = [(r, "auxiliary") for r in range(k)]
    qubits += [(k + r, "emitter") for r in range(k)]
    photon = lambda r, c: 2 * k + c * k + r
    qubits += [(photon(r, c), "photon") for c in range(n) for r in range(k)]
    ins = []
    for c in range(n):
        ins += [gate("H", r) for r in range(k)]
        ins += [gate("CZ", r, r + 1) for r in range(k - 1)]
        ins += [gate("CNOT", r, k + r) for r in range(k)]
        ins += [emit(k + r, photon(r, c)) for r in range(k)]
        ins.append(idle(tuple(range(k))))
    ins.append(barrier())
    for r in range(k):
        ins.append(measure(r, "X", r, budgeted=False))
        ins.append(cond_pauli(r, -1, "Z", photon(r, n - 1)))
    return CircuitIR(
        name="cluster",
        qubits=qubits,
        instructions=ins,
        params={"k": k, "n": n},
        photon_map={photon(r, c): r * n + c
                    for c in range(n) for r in range(k)},
    )


def _tree_circuit(b0: int, b1: int, strategy: str) -> CircuitIR:
    """Depth-2 tree: retained anchor, b0 arms of 1 core + b1 leaf photons.

    Each arm grows on an aux: CNOT copies the aux onto the emitter, an H
    before emission turns the copy into a graph edge (leaves), and the
    final copy is left unhadamarded so that an X measurement of the aux
    teleports its role onto that core photon. "parallel" runs b0 aux/
    emitter pairs at once; "sequential" reuses a single pair per arm,
    with a conditional frame X restoring the aux reference after each
    measurement.
    """
    if b0 < 1 or b1 < 0:
        raise ValueError("tree needs b0 >= 1 arms and b1 >= 0 leaves per arm")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    ins = []
    photon_map = {}
    leaf = lambda a, w: b0 + 1 + a * b1 + w
    if strategy == "parallel":
        aux = lambda i: 1 + i
        emitter = lambda i: 1 + b0 + i
        pid = lambda w, i: 1 + 2 * b0 + w * b0 + i
        qubits = [(0, "anchor")]
        qubits += [(aux(i), "auxiliary") for i in range(b0)]
        qubits += [(emitter(i), "emitter") for i in range(b0)]
        qubits += [(pid(w, i), "photon")
                   for w in range(b1 + 1) for i in range(b0)]
        ins += [gate("H", aux(i)) for i in range(b0)]
        for w in range(b1 + 1):
            ins += [gate("CNOT", aux(i), emitter(i)) for i in range(b0)]
            if w < b1:
                ins += [gate("H", emitter(i)) for i in range(b0)]
            ins += [emit(emitter(i), pid(w, i)) for i in range(b0)]
            ins.append(idle(tuple(aux(i) for i in range(b0))))
        ins.append(gate("H", 0))
        ins += [gate("CZ", 0, aux(i)) for i in range(b0)]
        for i in range(b0):
            ins.append(measure(aux(i), "X", i))
            ins.append(cond_pauli(i, -1, "Z", pid(b1, i)))
        for w in range(b1 + 1):
            for i in range(b0):
                photon_map[pid(w, i)] = i + 1 if w == b1 else leaf(i, w)
    else:
        pid = lambda a, w: 3 + a * (b1 + 1) + w
        qubits = [(0, "anchor"), (1, "auxiliary"), (2, "emitter")]
        qubits += [(pid(a, w), "photon")
                   for a in range(b0) for w in range(b1 + 1)]
        ins.append(gate("H", 0))
        for a in range(b0):
            ins.append(gate("H", 1))
            ins.append(gate("CZ", 0, 1))
            for w in range(b1 + 1):
                ins.append(gate("CNOT", 1, 2))
                if w < b1:
                    ins.append(gate("H", 2))
                ins.append(emit(2, pid(a, w)))
                ins.append(idle((0, 1)))
            # X measurement written as its H + Z-readout realization so
            # the aux lands in a Z eigenstate in both the raw and the
            # lowered form; the frame X makes later arms outcome-exact
            ins.append(gate("H", 1))
            ins.append(measure(1, "Z", a))
            ins.append(cond_pauli(a, -1, "Z", pid(a, b1)))
            ins.append(cond_pauli(a, -1, "X", 1))
            for w in range(b1 + 1):
                photon_map[pid(a, w)] = a + 1 if w == b1 else leaf(a, w)
    return CircuitIR(
        name="tree",
        qubits=qubits,
        instructions=ins,
        params={"b0": b0, "b1": b1, "strategy": strategy},
        photon_map=photon_map,
        retained={0: 0},
    )


def _rgs_circuit(b0: int, strategy: str) -> CircuitIR:
    """Repeater graph: a (b0, 1) tree whose anchor is measured in Y.

    The Y measurement complements the anchor's neighborhood (the b0 core
    photons become a complete graph) and removes the anchor; the local
    correction splits into a fixed virtual Rz on each core photon plus
    an outcome-conditioned virtual Z.
    """
    if b0 < 2:
        raise ValueError("rgs requires b0 >= 2")
    t = _tree_circuit(b0, 1, strategy)
    cores = sorted(q for q, v in t.photon_map.items() if 1 <= v <= b0)
    ins = list(t.instructions)
    ins.append(barrier())
    ins += [gate("RZ", p, angle=_HUB_RZ_ANGLE) for p in cores]
    ins.append(measure(0, "Y", b0))
    ins += [cond_pauli(b0, _HUB_TRIGGER, "Z", p) for p in cores]
    return CircuitIR(
        name="rgs",
        qubits=list(t.qubits),
        instructions=ins,
        params={"b0": b0, "strategy": strategy},
        photon_map={q: v - 1 for q, v in t.photon_map.items()},
    )


def compile_cluster(k: int, n: int, flavor: str) -> CircuitIR:
    """Gate-level circuit emitting the k x n cluster on the given chip."""
    return lower(_cluster_circuit(k, n), flavor)


def compile_tree(b0: int, b1: int, flavor: str, strategy: str = "parallel") -> CircuitIR:
    """Gate-level circuit emitting the depth-2 (b0, b1) tree."""
    return lower(_tree_circuit(b0, b1, strategy), flavor)


def compile_rgs(b0: int, flavor: str, strategy: str = "parallel") -> CircuitIR:
    """Gate-level circuit emitting the b0-arm repeater graph state."""
    return lower(_rgs_circuit(b0, strategy), flavor)


def compile_shor_logical() -> CircuitIR:
    """Emit one photonic qubit encoded in the nine-qubit repetition-of-
    repetition code, entangled with the auxiliary.

    Nine emitters are encoded into the logical zero of the code, the aux
    (in |+>) applies a controlled logical X through nine CZs, all nine
    emitters are converted to photons, and a final H puts the aux into
    the basis in which its Z and X correlate with the logical X and Z of
    the photonic block. Returned unlowered; pass through lower() to
    target a chip.
    """
    qubits = [(0, "auxiliary")]
    qubits += [(i, "emitter") for i in range(1, 10)]
    qubits += [(9 + i, "photon") for i in range(1, 10)]
    ins = [gate("H", 0)]
    ins += [gate("CNOT", 1, 4), gate("CNOT", 1, 7)]
    ins += [gate("H", q) for q in (1, 4, 7)]
    ins += [gate("CNOT", t, t + d) for t in (1, 4, 7) for d in (1, 2)]
    ins += [gate("CZ", 0, i) for i in range(1, 10)]
    ins += [emit(i, 9 + i) for i in range(1, 10)]
    ins.append(gate("H", 0))
    return CircuitIR(name="shor", qubits=qubits, instructions=ins)


# ---------------------------------------------------------------------------
# lowering


def lower(c: CircuitIR, flavor: str) -> CircuitIR:
    """Rewrite onto the chip's native gate set and fuse what commutes.

    ff: CZ(u, v) -> [H u; Rz(pi/2) v; Rx(pi/2) u; CR(v, u); H u] and
    CNOT(c, t) -> [Rz(pi/2) c; Rx(pi/2) t; CR(c, t)] unless t is an
    emitter (native). tf: CNOT(c, t) -> [H t; CZ(c, t); H t]. Budgeted
    X/Y measurements become a basis rotation plus a Z readout. After
    expansion, adjacent inverse single-qubit pairs cancel and isolated
    Z-axis rotations slide across a CR's Z leg when that merges runs.
    """
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}")
    if c.flavor is not None:
        raise ValueError("circuit is already lowered")
    out = []
    for ins in c.instructions:
        out.extend(_expand(ins, flavor, c))
    out = _cancel_inverse_pairs(out)
    out = _slide_z_rotations(out)
    out = _cancel_inverse_pairs(out)
    lc = CircuitIR(name=c.name, qubits=list(c.qubits), instructions=out,
                   flavor=flavor, params=dict(c.params),
                   photon_map=dict(c.photon_map), retained=dict(c.retained))
    lc.validate()
    return lc


def _expand(ins, flavor: str, c: CircuitIR) -> list:
    k = ins.kind
    if k == "CNOT":
        ctrl, tgt = ins.qubits
        if flavor == "tf":
            return [gate("H", tgt), gate("CZ", ctrl, tgt), gate("H", tgt)]
        if c.role(tgt) == "emitter":
            return [ins]
        return [gate("RZ", ctrl, angle=_HALF_PI),
                gate("RX", tgt, angle=_HALF_PI),
                gate("CR", ctrl, tgt)]
    if k == "CZ":
        if flavor == "tf":
            return [ins]
        u, v = ins.qubits
        return [gate("H", u),
                gate("RZ", v, angle=_HALF_PI),
                gate("RX", u, angle=_HALF_PI),
                gate("CR", v, u),
                gate("H", u)]
    if k == "CR":
        if flavor == "ff":
            return [ins]
        raise ValueError("CR is not native on tf and not a lowering input")
    if k == "MEASURE" and ins.budgeted and ins.basis != "Z":
        q = ins.qubits[0]
        rot = (gate("H", q) if ins.basis == "X"
               else gate("RX", q, angle=_HALF_PI))
        return [rot, measure(q, "Z", ins.meas_id)]
    return [ins]


def _inverse_pair(a, b) -> bool:
    if a.kind != b.kind:
        return False
    if a.kind in ("H", "X", "Y", "Z"):
        return True
    total = (a.angle + b.angle) % (2 * math.pi)
    return min(total, 2 * math.pi - total) < 1e-9


def _touches(ins, q: int) -> bool:
    return ins.kind == "BARRIER" or q in ins.qubits


def _next_touch(instructions, i: int, q: int) -> int | None:
    for j in range(i + 1, len(instructions)):
        if _touches(instructions[j], q):
            return j
    return None


def _prev_touch(instructions, i: int, q: int) -> int | None:
    for j in range(i - 1, -1, -1):
        if _touches(instructions[j], q):
            return j
    return None


def _cancel_inverse_pairs(instructions: list) -> list:
    """Delete adjacent mutually-inverse single-qubit gate pairs, to fixpoint."""
    out = list(instructions)
    changed = True
    while changed:
        changed = False
        for i, a in enumerate(out):
            if a.kind not in SQG_KINDS:
                continue
            q = a.qubits[0]
            j = _next_touch(out, i, q)
            if j is None:
                continue
            b = out[j]
            if b.kind in SQG_KINDS and _inverse_pair(a, b):
                del out[j]
                del out[i]
                changed = True
                break
    return out


def _slide_z_rotations(instructions: list) -> list:
    """Move an isolated Z-axis gate across an adjacent CR's Z leg when
    that lands it next to another single-qubit gate (runs then fuse)."""
    out = list(instructions)
    i = 0
    while i < len(out):
        a = out[i]
        if a.kind not in ("RZ", "Z"):
            i += 1
            continue
        q = a.qubits[0]
        p = _prev_touch(out, i, q)
        nx = _next_touch(out, i, q)
        isolated = ((p is None or out[p].kind not in SQG_KINDS)
                    and (nx is None or out[nx].kind not in SQG_KINDS))
        if not isolated:
            i += 1
            continue
        if nx is not None and out[nx].kind == "CR" and out[nx].qubits[0] == q:
            after = _next_touch(out, nx, q)
            if after is not None and out[after].kind in SQG_KINDS:
                del out[i]
                out.insert(nx, a)  # CR shifted left; lands just after it
                continue
        if p is not None and out[p].kind == "CR" and out[p].qubits[0] == q:
            before = _prev_touch(out, p, q)
            if before is not None and out[before].kind in SQG_KINDS:
                del out[i]
                out.insert(p, a)
                continue
        i += 1
    return out


# ---------------------------------------------------------------------------
# accounting


def sqg_runs(c: CircuitIR) -> list:
    """Maximal runs of adjacent single-qubit gates, per qubit.

    Returns (qubit, [instruction indices]) pairs ordered by first index.
    A run is broken by any non-COND instruction touching the qubit;
    BARRIER touches every qubit. This is the unit the error budget
    charges per single-qubit pulse, and the unit the noise oracles
    inject after.
    """
    runs = []
    open_runs: dict[int, list] = {}

    def close(q):
        if q in open_runs:
            runs.append((q, open_runs.pop(q)))

    for idx, ins in enumerate(c.instructions):
        if ins.kind in SQG_KINDS:
            open_runs.setdefault(ins.qubits[0], []).append(idx)
        elif ins.kind == "COND":
            pass
        elif ins.kind == "BARRIER":
            for q in list(open_runs):
                close(q)
        else:
            for q in ins.qubits:
                close(q)
    for q in list(open_runs):
        close(q)
    runs.sort(key=lambda item: item[1][0])
    return runs


def census(c: CircuitIR) -> dict:
    """Zero-suppressed instruction counts keyed by kind.

    SQG counts matter-qubit single-qubit runs, VSQG photon-frame runs
    (virtual, no cost), IDLE counts qubit-windows, MEASURE only budgeted
    readouts (MEASURE_FREE for the rest). BARRIER is not counted.
    """
    counts: dict[str, int] = {}

    def bump(key, amount=1):
        counts[key] = counts.get(key, 0) + amount

    for q, _ in sqg_runs(c):
        bump("VSQG" if c.role(q) == "photon" else "SQG")
    for ins in c.instructions:
        if ins.kind in TWO_QUBIT_KINDS:
            bump(ins.kind)
        elif ins.kind == "EMIT":
            bump("EMIT")
        elif ins.kind == "MEASURE":
            bump("MEASURE" if ins.budgeted else "MEASURE_FREE")
        elif ins.kind == "IDLE":
            bump("IDLE", len(ins.qubits))
        elif ins.kind == "COND":
            bump("COND")
    return counts


def encoding_time(encoding: str, tau_cnot: float, tau_x: float | None,
                  tau_0: float) -> float:
    """Per-photon cycle duration for a photonic qubit encoding.

    fock needs one emitter CNOT and one reset window; time_bin emits
    twice (two CNOT + two resets); frequency_bin and two_rail emit two
    components separated by an emitter X flip.
    """
    if encoding not in ENCODINGS:
        raise ValueError(f"unknown encoding {encoding!r}")
    for name, value in (("tau_cnot", tau_cnot), ("tau_0", tau_0)):
        if not value > 0:
            raise ValueError(f"{name} must be > 0")
    if encoding == "fock":
        return tau_cnot + tau_0
    if encoding == "time_bin":
        return 2 * tau_cnot + 2 * tau_0
    if tau_x is None or not tau_x > 0:
        raise ValueError(f"{encoding} needs tau_x > 0")
    return 2 * tau_cnot + tau_x + tau_0


# ---------------------------------------------------------------------------
# targets and the logical-emission check


def target_of(c: CircuitIR) -> Graph | None:
    """Graph the circuit claims to emit, None for the encoded protocol."""
    p = c.params
    if c.name == "cluster":
        return build_cluster(p["k"], p["n"])
    if c.name == "tree":
        return build_tree([p["b0"], p["b1"]] if p["b1"] else [p["b0"]])
    if c.name == "rgs":
        return build_rgs(p["b0"])
    if c.name == "shor":
        return None
    raise ValueError(f"no target known for circuit {c.name!r}")


def shor_expected_rows() -> list[str]:
    """Complete stabilizer description of the encoded-emission output.

    Layout: qubit 0 aux, 1..9 emitters (all back in |0>), 10..18 the
    photonic code block. Six ZZ pairs and two X sextets generate the
    code stabilizer; Z_aux pairs with the logical X (Z on all nine) and
    X_aux with the logical Z (X on the first triple).
    """

    def row(pairs):
        letters = ["I"] * 19
        for pos, letter in pairs:
            letters[pos] = letter
        return "+" + "".join(letters)

    rows = []
    for a, b in ((10, 11), (11, 12), (13, 14), (14, 15), (16, 17), (17, 18)):
        rows.append(row([(a, "Z"), (b, "Z")]))
    rows.append(row([(q, "X") for q in range(10, 16)]))
    rows.append(row([(q, "X") for q in range(13, 19)]))
    rows.append(row([(0, "Z")] + [(q, "Z") for q in range(10, 19)]))
    rows.append(row([(0, "X")] + [(q, "X") for q in (10, 11, 12)]))
    rows += [row([(e, "Z")]) for e in range(1, 10)]
    return rows


def shor_membership_failures(c: CircuitIR) -> list[str]:
    """Expected stabilizer rows the circuit's output fails to satisfy."""
    state = run(c).state_with_frame()
    return [r for r in shor_expected_rows() if state.contains(r) != 1]
