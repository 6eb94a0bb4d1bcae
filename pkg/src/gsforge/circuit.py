"""Gate-level intermediate representation for emission protocols.

A circuit is an ordered list of instructions over a registry of
role-tagged qubits. Matter qubits (anchor, auxiliary, emitter) exist
from the start; photon qubits enter the registry through EMIT and are
numbered in emission order after the matter block, which is also the
qubit order the simulator uses.

Instruction kinds:

- gates ``H X Y Z RX RZ CNOT CZ CR`` (RX/RZ carry an angle in
  {+-pi/2, pi}); ``CR a b`` acts as exp(i(pi/4) Z_a X_b)
- ``EMIT`` emitter -> photon
- ``MEASURE`` qubit, basis, measurement id; ``budgeted=False`` marks a
  handoff measurement excluded from the fidelity budget
- ``IDLE`` qubit list + duration (the symbolic string "tau" resolved
  against device parameters, or seconds)
- ``COND`` measurement id, trigger outcome, Pauli, target qubit; folded
  into the Pauli frame, never applied to the state
- ``BARRIER`` scheduling fence: no operation, but single-qubit gate
  runs never fuse across it

Photons may receive only Z-axis gates (Z, RZ): the physical qubit is
gone, and such rotations are virtual frame bookkeeping applied by the
downstream consumer. They cost nothing in the fidelity model.

The text serialization is one JSON header line (registry + metadata)
followed by one line per instruction, and is bit-exact for golden
tests. Matter qubits print as ``qN``, photons as ``pN``; both share one
id space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

ROLES = ("anchor", "auxiliary", "emitter", "photon")
GATE_KINDS = ("H", "X", "Y", "Z", "RX", "RZ", "CNOT", "CZ", "CR")
SQG_KINDS = ("H", "X", "Y", "Z", "RX", "RZ")
TWO_QUBIT_KINDS = ("CNOT", "CZ", "CR")
PHOTON_GATE_KINDS = ("Z", "RZ")

_ANGLE_TOKENS = {"pi/2": math.pi / 2, "-pi/2": -math.pi / 2, "pi": math.pi}


def angle_token(angle: float) -> str:
    for token, value in _ANGLE_TOKENS.items():
        if abs(angle - value) < 1e-12:
            return token
    raise ValueError(f"angle {angle!r} is not one of +-pi/2, pi")


@dataclass(frozen=True)
class Instruction:
    kind: str
    qubits: tuple = ()
    angle: float | None = None
    basis: str | None = None
    meas_id: int | None = None
    budgeted: bool = True
    trigger: int | None = None
    pauli: str | None = None
    duration: float | str | None = None


def gate(kind: str, *qubits: int, angle: float | None = None) -> Instruction:
    return Instruction(kind=kind, qubits=tuple(qubits), angle=angle)


def emit(emitter: int, photon: int) -> Instruction:
    return Instruction(kind="EMIT", qubits=(emitter, photon))


def measure(qubit: int, basis: str, meas_id: int, budgeted: bool = True) -> Instruction:
    return Instruction(kind="MEASURE", qubits=(qubit,), basis=basis,
                       meas_id=meas_id, budgeted=budgeted)


def idle(qubits, duration="tau") -> Instruction:
    return Instruction(kind="IDLE", qubits=tuple(qubits), duration=duration)


def cond_pauli(meas_id: int, trigger: int, pauli: str, qubit: int) -> Instruction:
    return Instruction(kind="COND", qubits=(qubit,), meas_id=meas_id,
                       trigger=trigger, pauli=pauli)


def barrier() -> Instruction:
    return Instruction(kind="BARRIER")


@dataclass
class CircuitIR:
    """Ordered instruction list over role-tagged qubits.

    photon_map and retained map circuit qubit ids to target-graph
    vertices for verification; retained lists matter qubits that stay
    part of the final state (e.g. a tree's root).
    """

    name: str
    qubits: list = field(default_factory=list)  # (id, role) pairs
    instructions: list = field(default_factory=list)
    flavor: str | None = None
    params: dict = field(default_factory=dict)
    photon_map: dict = field(default_factory=dict)
    retained: dict = field(default_factory=dict)

    # ------------------------------------------------------------------

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def role(self, q: int) -> str:
        return dict(self.qubits)[q]

    def matter_qubits(self) -> list[int]:
        return [q for q, role in self.qubits if role != "photon"]

    def photon_qubits(self) -> list[int]:
        return [q for q, role in self.qubits if role == "photon"]

    def measurements(self) -> list[Instruction]:
        return [ins for ins in self.instructions if ins.kind == "MEASURE"]

    # ------------------------------------------------------------------

    def validate(self) -> None:
        ids = [q for q, _ in self.qubits]
        if ids != list(range(len(ids))):
            raise ValueError("qubit ids must be 0..n-1 in registry order")
        roles = dict(self.qubits)
        for q, role in self.qubits:
            if role not in ROLES:
                raise ValueError(f"unknown role {role!r}")
        matter = self.matter_qubits()
        if matter != list(range(len(matter))):
            raise ValueError("matter qubits must precede photons")
        photons = self.photon_qubits()
        emitted = []
        meas_ids = set()
        for ins in self.instructions:
            for q in ins.qubits:
                if q not in roles:
                    raise ValueError(f"instruction references undeclared qubit {q}")
            if ins.kind in GATE_KINDS:
                for q in ins.qubits:
                    if roles[q] == "photon" and ins.kind not in PHOTON_GATE_KINDS:
                        raise ValueError(
                            f"photon p{q} may only receive virtual Z-axis gates")
                if ins.kind in ("RX", "RZ"):
                    angle_token(ins.angle)
                n_ops = 2 if ins.kind in TWO_QUBIT_KINDS else 1
                if len(ins.qubits) != n_ops or len(set(ins.qubits)) != n_ops:
                    raise ValueError(f"{ins.kind} needs {n_ops} distinct operands")
            elif ins.kind == "EMIT":
                e, p = ins.qubits
                if roles[e] == "photon" or roles[p] != "photon":
                    raise ValueError("EMIT must map a matter qubit to a photon id")
                emitted.append(p)
            elif ins.kind == "MEASURE":
                if roles[ins.qubits[0]] == "photon":
                    raise ValueError("photons cannot be measured by the emitter chip")
                if ins.basis not in ("X", "Y", "Z"):
                    raise ValueError(f"bad basis {ins.basis!r}")
                if ins.meas_id in meas_ids:
                    raise ValueError(f"duplicate measurement id m{ins.meas_id}")
                meas_ids.add(ins.meas_id)
            elif ins.kind == "COND":
                if ins.meas_id not in meas_ids:
                    raise ValueError(
                        f"COND references unknown measurement m{ins.meas_id}")
                if ins.trigger not in (1, -1) or ins.pauli not in ("X", "Y", "Z"):
                    raise ValueError("COND needs trigger +-1 and a Pauli")
            elif ins.kind == "IDLE":
                if ins.duration != "tau":
                    if not (isinstance(ins.duration, (int, float)) and ins.duration > 0):
                        raise ValueError("IDLE duration must be 'tau' or > 0 seconds")
                if not ins.qubits:
                    raise ValueError("IDLE needs at least one qubit")
            elif ins.kind == "BARRIER":
                pass
            else:
                raise ValueError(f"unknown instruction kind {ins.kind!r}")
        if emitted != photons:
            raise ValueError("EMIT order must match photon registry order")

    # ------------------------------------------------------------------
    # text serialization

    def _token(self, q: int) -> str:
        return ("p" if self.role(q) == "photon" else "q") + str(q)

    def to_text(self) -> str:
        header = {
            "name": self.name,
            "flavor": self.flavor,
            "params": self.params,
            "qubits": [[q, role] for q, role in self.qubits],
            "photon_map": {str(k): v for k, v in sorted(self.photon_map.items())},
            "retained": {str(k): v for k, v in sorted(self.retained.items())},
        }
        lines = [json.dumps(header, sort_keys=True, separators=(",", ":"))]
        for ins in self.instructions:
            lines.append(self._instruction_line(ins))
        return "\n".join(lines) + "\n"

    def _instruction_line(self, ins: Instruction) -> str:
        k = ins.kind
        if k in ("RX", "RZ"):
            return f"{k} {self._token(ins.qubits[0])} {angle_token(ins.angle)}"
        if k in GATE_KINDS:
            return f"{k} " + " ".join(self._token(q) for q in ins.qubits)
        if k == "EMIT":
            return f"EMIT {self._token(ins.qubits[0])} -> {self._token(ins.qubits[1])}"
        if k == "MEASURE":
            free = "" if ins.budgeted else " free"
            return (f"MEASURE {self._token(ins.qubits[0])} {ins.basis} "
                    f"m{ins.meas_id}{free}")
        if k == "COND":
            return (f"COND m{ins.meas_id} {ins.trigger:+d} {ins.pauli} "
                    f"{self._token(ins.qubits[0])}")
        if k == "IDLE":
            dur = ins.duration if ins.duration == "tau" else repr(ins.duration)
            return "IDLE " + ",".join(self._token(q) for q in ins.qubits) + f" {dur}"
        if k == "BARRIER":
            return "BARRIER"
        raise ValueError(f"unknown instruction kind {k!r}")

    @classmethod
    def from_text(cls, text: str) -> "CircuitIR":
        lines = text.strip("\n").split("\n")
        header = json.loads(lines[0])
        c = cls(
            name=header["name"],
            qubits=[(int(q), role) for q, role in header["qubits"]],
            flavor=header.get("flavor"),
            params=header.get("params", {}),
            photon_map={int(k): v for k, v in header.get("photon_map", {}).items()},
            retained={int(k): v for k, v in header.get("retained", {}).items()},
        )
        for line in lines[1:]:
            c.instructions.append(_parse_line(line))
        c.validate()
        return c


def _parse_qubit(token: str) -> int:
    if token[0] not in "qp":
        raise ValueError(f"bad qubit token {token!r}")
    return int(token[1:])


def _parse_line(line: str) -> Instruction:
    parts = line.split()
    k = parts[0]
    if k in ("RX", "RZ"):
        return gate(k, _parse_qubit(parts[1]), angle=_ANGLE_TOKENS[parts[2]])
    if k in GATE_KINDS:
        return gate(k, *[_parse_qubit(p) for p in parts[1:]])
    if k == "EMIT":
        return emit(_parse_qubit(parts[1]), _parse_qubit(parts[3]))
    if k == "MEASURE":
        budgeted = not (len(parts) > 4 and parts[4] == "free")
        return measure(_parse_qubit(parts[1]), parts[2], int(parts[3][1:]),
                       budgeted=budgeted)
    if k == "COND":
        return cond_pauli(int(parts[1][1:]), int(parts[2]), parts[3],
                          _parse_qubit(parts[4]))
    if k == "IDLE":
        qubits = [_parse_qubit(t) for t in parts[1].split(",")]
        dur = parts[2] if parts[2] == "tau" else float(parts[2])
        return idle(qubits, dur)
    if k == "BARRIER":
        return barrier()
    raise ValueError(f"cannot parse instruction line {line!r}")
