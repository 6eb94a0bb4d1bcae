"""Stabilizer tableau simulation with exact sign tracking.

A pure n-qubit stabilizer state is stored as n generator rows. Row i is
a binary symplectic vector (x[i], z[i]) plus a phase bit r[i], and
represents the Pauli operator

    (-1)^r[i] * prod_q  i^(x[i,q] z[i,q]) X_q^x[i,q] Z_q^z[i,q]

so the bit pair (1,1) is Y, not iXZ. Phase bookkeeping during row
multiplication uses the standard quarter-phase tally; products of
commuting Hermitian Paulis always land back on a real sign.

The gate set is the native set of the compiled protocols: H, the Paulis,
Rx(+-pi/2), Rz(+-pi/2), CNOT, CZ, SWAP, and CR = exp(i(pi/4) Z(x)X),
realized directly as generator updates rather than a lowered
sub-circuit. Measurements in the X, Y, or Z basis support forcing an
outcome; deterministic outcomes never consume randomness.
"""

from __future__ import annotations

import math

import numpy as np

_HALF_PI = math.pi / 2

# single-qubit bit patterns (x, z) per Pauli letter
_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_PAULI = {v: k for k, v in _PAULI_BITS.items()}


def _quarters(x1, z1, x2, z2):
    """Per-qubit power of i picked up when multiplying Pauli letters.

    Arguments are bit arrays of the first and second operand. Uses the
    Aaronson-Gottesman case split; the sum over qubits, together with
    the operand sign bits, determines the product's sign.
    """
    x1 = x1.astype(np.int64)
    z1 = z1.astype(np.int64)
    x2 = x2.astype(np.int64)
    z2 = z2.astype(np.int64)
    return ((x1 & z1) * (z2 - x2)
            + (x1 & (1 - z1)) * (z2 * (2 * x2 - 1))
            + ((1 - x1) & z1) * (x2 * (1 - 2 * z2)))


class StabilizerTableau:
    """n commuting, independent generator rows of a pure stabilizer state."""

    def __init__(self, x, z, r):
        x = np.array(x, dtype=np.uint8)
        z = np.array(z, dtype=np.uint8)
        r = np.array(r, dtype=np.uint8)
        if x.ndim != 2 or x.shape != z.shape or x.shape[0] != r.shape[0]:
            raise ValueError("tableau arrays have inconsistent shapes")
        self.x = x
        self.z = z
        self.r = r

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def zero_state(cls, n: int) -> "StabilizerTableau":
        """|0...0> on n qubits: generators +Z_q."""
        if n < 0:
            raise ValueError("qubit count must be non-negative")
        return cls(np.zeros((n, n)), np.eye(n), np.zeros(n))

    @classmethod
    def from_strings(cls, rows) -> "StabilizerTableau":
        """Build from strings like '+XZ', '-YY' (test convenience)."""
        parsed = []
        for s in rows:
            sign = 0
            if s[0] in "+-":
                sign = 1 if s[0] == "-" else 0
                s = s[1:]
            bits = [_PAULI_BITS[c] for c in s]
            parsed.append((bits, sign))
        n = len(parsed[0][0])
        x = np.zeros((len(parsed), n), dtype=np.uint8)
        z = np.zeros((len(parsed), n), dtype=np.uint8)
        r = np.zeros(len(parsed), dtype=np.uint8)
        for i, (bits, sign) in enumerate(parsed):
            for q, (bx, bz) in enumerate(bits):
                x[i, q] = bx
                z[i, q] = bz
            r[i] = sign
        return cls(x, z, r)

    # ------------------------------------------------------------------
    # inspection

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]

    @property
    def signs(self) -> np.ndarray:
        """Generator signs as +-1 integers."""
        return 1 - 2 * self.r.astype(np.int64)

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.x, self.z, self.r)

    def to_strings(self) -> list[str]:
        out = []
        for i in range(self.n_rows):
            sign = "-" if self.r[i] else "+"
            letters = "".join(_BITS_PAULI[(self.x[i, q], self.z[i, q])]
                              for q in range(self.n))
            out.append(sign + letters)
        return out

    def __repr__(self):
        return f"StabilizerTableau({self.to_strings()})"

    def __eq__(self, other):
        if not isinstance(other, StabilizerTableau):
            return NotImplemented
        return (self.x.shape == other.x.shape
                and np.array_equal(self.x, other.x)
                and np.array_equal(self.z, other.z)
                and np.array_equal(self.r, other.r))

    def check(self) -> None:
        """Raise unless rows pairwise commute and are independent."""
        x = self.x.astype(np.int64)
        z = self.z.astype(np.int64)
        sym = (x @ z.T + z @ x.T) % 2
        if sym.any():
            raise ValueError("generator rows do not pairwise commute")
        if _gf2_rank(np.concatenate([self.x, self.z], axis=1)) != self.n_rows:
            raise ValueError("generator rows are dependent over GF(2)")

    # ------------------------------------------------------------------
    # row algebra

    def _row_mul(self, h: int, i: int) -> None:
        # row_h <- row_h * row_i, phases tracked in quarter units
        tot = (2 * int(self.r[h]) + 2 * int(self.r[i])
               + int(_quarters(self.x[h], self.z[h], self.x[i], self.z[i]).sum()))
        if tot % 2:
            raise ValueError("product of anticommuting rows is not Hermitian")
        self.r[h] = (tot % 4) // 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def _row_swap(self, a: int, b: int) -> None:
        self.x[[a, b]] = self.x[[b, a]]
        self.z[[a, b]] = self.z[[b, a]]
        self.r[[a, b]] = self.r[[b, a]]

    # ------------------------------------------------------------------
    # gates

    def apply(self, kind: str, *qubits: int, angle: float | None = None) -> "StabilizerTableau":
        """Return the tableau conjugated by the named Clifford gate."""
        t = self.copy()
        t._apply_inplace(kind, qubits, angle)
        return t

    def _apply_inplace(self, kind, qubits, angle=None):
        x, z, r = self.x, self.z, self.r
        for q in qubits:
            if not 0 <= q < self.n:
                raise ValueError(f"qubit {q} out of range")
        if kind in ("RX", "RZ"):
            if angle is None:
                raise ValueError(f"{kind} requires an angle")
            quarter = angle / _HALF_PI
            if abs(quarter - round(quarter)) > 1e-9:
                raise ValueError(f"non-Clifford angle {angle!r}")
            quarter = int(round(quarter)) % 4
            if quarter == 0:
                return
            if quarter == 2:  # Rz(pi) ~ Z, Rx(pi) ~ X up to global phase
                kind = "Z" if kind == "RZ" else "X"
            else:
                kind = f"{kind}{'+' if quarter == 1 else '-'}"
        if kind in ("H", "X", "Y", "Z", "RX+", "RX-", "RZ+", "RZ-"):
            (q,) = qubits
            xq = x[:, q].copy()
            zq = z[:, q].copy()
            if kind == "H":
                r ^= xq & zq
                x[:, q] = zq
                z[:, q] = xq
            elif kind == "X":
                r ^= zq
            elif kind == "Z":
                r ^= xq
            elif kind == "Y":
                r ^= xq ^ zq
            elif kind == "RZ+":  # X -> Y -> -X
                r ^= xq & zq
                z[:, q] ^= xq
            elif kind == "RZ-":
                r ^= xq & (1 - zq)
                z[:, q] ^= xq
            elif kind == "RX+":  # Z -> -Y -> -Z... and Y -> Z
                r ^= zq & (1 - xq)
                x[:, q] ^= zq
            elif kind == "RX-":
                r ^= xq & zq
                x[:, q] ^= zq
        elif kind == "CNOT":
            c, t = qubits
            r ^= x[:, c] & z[:, t] & (x[:, t] ^ z[:, c] ^ 1)
            x[:, t] ^= x[:, c]
            z[:, c] ^= z[:, t]
        elif kind == "CZ":
            c, t = qubits
            r ^= x[:, c] & x[:, t] & (z[:, c] ^ z[:, t])
            z[:, c] ^= x[:, t]
            z[:, t] ^= x[:, c]
        elif kind == "CR":
            # exp(i(pi/4) Z_a X_b): rows anticommuting with Z_a X_b pick
            # up the factor i Z_a X_b; quarter phases computed explicitly
            a, b = qubits
            mask = x[:, a] ^ z[:, b]
            qa = x[:, a].astype(np.int64) * (1 + 2 * z[:, a])
            qb = z[:, b].astype(np.int64) * (2 * x[:, b].astype(np.int64) - 1)
            tot = (1 + qa + qb) % 4
            r ^= (mask & ((tot // 2) % 2)).astype(np.uint8)
            z[:, a] ^= mask
            x[:, b] ^= mask
        elif kind == "SWAP":
            a, b = qubits
            x[:, [a, b]] = x[:, [b, a]]
            z[:, [a, b]] = z[:, [b, a]]
        else:
            raise ValueError(f"unknown gate kind {kind!r}")

    # ------------------------------------------------------------------
    # emission and measurement

    def emit(self, emitter: int) -> tuple[int, "StabilizerTableau"]:
        """Append a fresh |0> qubit and swap it with the emitter.

        Returns the new qubit's index; the emitter ends in |0>.
        """
        t = self.copy()
        photon = t._emit_inplace(emitter)
        return photon, t

    def _emit_inplace(self, emitter: int) -> int:
        n = self.n
        if not 0 <= emitter < n:
            raise ValueError(f"qubit {emitter} out of range")
        rows = self.n_rows
        x = np.zeros((rows + 1, n + 1), dtype=np.uint8)
        z = np.zeros((rows + 1, n + 1), dtype=np.uint8)
        r = np.zeros(rows + 1, dtype=np.uint8)
        x[:rows, :n] = self.x
        z[:rows, :n] = self.z
        r[:rows] = self.r
        z[rows, n] = 1  # new qubit stabilized by +Z
        self.x, self.z, self.r = x, z, r
        self._apply_inplace("SWAP", (emitter, n))
        return n

    def _basis_row(self, q: int, basis: str):
        if not 0 <= q < self.n:
            raise ValueError(f"qubit {q} out of range")
        mx = np.zeros(self.n, dtype=np.uint8)
        mz = np.zeros(self.n, dtype=np.uint8)
        if basis in ("X", "Y"):
            mx[q] = 1
        if basis in ("Z", "Y"):
            mz[q] = 1
        if basis not in ("X", "Y", "Z"):
            raise ValueError(f"unknown measurement basis {basis!r}")
        return mx, mz

    def is_deterministic(self, q: int, basis: str) -> bool:
        mx, mz = self._basis_row(q, basis)
        anti = (self.x.astype(np.int64) @ mz + self.z.astype(np.int64) @ mx) % 2
        return not anti.any()

    def measure(self, q: int, basis: str, forced: int | None = None,
                rng=None) -> tuple[int, "StabilizerTableau"]:
        """Measure +1 eigenbasis of the Pauli at q; returns (outcome, state)."""
        t = self.copy()
        outcome, _ = t._measure_inplace(q, basis, forced, rng)
        return outcome, t

    def _measure_inplace(self, q, basis, forced=None, rng=None):
        if forced is not None and forced not in (1, -1):
            raise ValueError("forced outcome must be +1 or -1")
        mx, mz = self._basis_row(q, basis)
        anti = (self.x.astype(np.int64) @ mz + self.z.astype(np.int64) @ mx) % 2
        hits = np.flatnonzero(anti)
        if hits.size == 0:
            sign = self._member_sign(mx, mz)
            if sign is None:
                raise ValueError("operator commutes with all rows but is "
                                 "not in the group; corrupt tableau")
            if forced is not None and forced != sign:
                raise ValueError(
                    f"forced outcome {forced:+d} contradicts deterministic "
                    f"{basis} outcome {sign:+d} on qubit {q}")
            return sign, True
        p = int(hits[0])
        for i in hits[1:]:
            self._row_mul(int(i), p)
        if forced is not None:
            outcome = forced
        else:
            if rng is None:
                raise ValueError("random measurement outcome requires an rng")
            outcome = 1 - 2 * int(rng.integers(2))
        self.x[p] = mx
        self.z[p] = mz
        self.r[p] = 0 if outcome == 1 else 1
        return outcome, False

    # ------------------------------------------------------------------
    # group membership and canonical form

    def _member_sign(self, mx, mz):
        """Sign s with s*(Pauli of (mx, mz)) in the group, else None."""
        n = self.n
        a = np.concatenate([self.x, self.z], axis=1).astype(np.uint8)
        rhs = np.concatenate([mx, mz]).astype(np.uint8)
        coeff = _gf2_solve(a.T, rhs)  # columns of a.T are the rows
        if coeff is None:
            return None
        px = np.zeros(n, dtype=np.uint8)
        pz = np.zeros(n, dtype=np.uint8)
        quarters = 0
        for i in np.flatnonzero(coeff):
            quarters += 2 * int(self.r[i]) + int(
                _quarters(px, pz, self.x[i], self.z[i]).sum())
            px ^= self.x[i]
            pz ^= self.z[i]
        if not (np.array_equal(px, mx) and np.array_equal(pz, mz)):
            raise AssertionError("GF(2) solve returned a wrong combination")
        if quarters % 2:
            raise AssertionError("group element with imaginary phase")
        return 1 if quarters % 4 == 0 else -1

    def contains(self, row: str) -> int | None:
        """Membership sign of a signed Pauli string, e.g. '+XZI'.

        Returns +1 or -1 when the string's Pauli part is in the group
        (the value is the group sign divided by the string's sign), and
        None when it is not in the group at all.
        """
        t = StabilizerTableau.from_strings([row])
        if t.n != self.n:
            raise ValueError("Pauli string length mismatch")
        sign = self._member_sign(t.x[0], t.z[0])
        if sign is None:
            return None
        return sign * int(t.signs[0])

    def canonical_form(self) -> "StabilizerTableau":
        """Full row-reduced echelon form, X-block columns before Z-block.

        Two tableaus describe the same state iff their canonical forms
        are identical arrays. Raises on dependent rows.
        """
        t, pivots = _eliminate(self, list(range(2 * self.n)))
        if len(pivots) != t.n_rows:
            raise ValueError("dependent generator rows")
        return t


def _eliminate(t: StabilizerTableau, column_order) -> tuple[StabilizerTableau, list]:
    """Phase-tracked Gaussian elimination in the given column order.

    Columns 0..n-1 address the X block, n..2n-1 the Z block. Returns the
    reduced tableau and (row, column) pivot pairs. After processing, any
    row without a pivot has zero support on every processed column.
    """
    t = t.copy()
    n = t.n
    rank = 0
    pivots = []
    for col in column_order:
        block = t.x if col < n else t.z
        q = col % n
        sub = np.flatnonzero(block[rank:, q])
        if sub.size == 0:
            continue
        t._row_swap(rank, rank + int(sub[0]))
        for i in range(t.n_rows):
            if i != rank and block[i, q]:
                t._row_mul(i, rank)
        pivots.append((rank, col))
        rank += 1
    return t, pivots


def _gf2_rank(mat) -> int:
    m = np.array(mat, dtype=np.uint8) % 2
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        sub = np.flatnonzero(m[rank:, c])
        if sub.size == 0:
            continue
        piv = rank + int(sub[0])
        m[[rank, piv]] = m[[piv, rank]]
        mask = m[:, c].copy()
        mask[rank] = 0
        m[mask.astype(bool)] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _gf2_solve(a, b):
    """One solution x of a @ x = b over GF(2), or None.

    a is (m, k); returns x of length k.
    """
    a = np.array(a, dtype=np.uint8) % 2
    b = np.array(b, dtype=np.uint8) % 2
    m, k = a.shape
    aug = np.concatenate([a, b.reshape(-1, 1)], axis=1)
    pivots = []
    rank = 0
    for c in range(k):
        sub = np.flatnonzero(aug[rank:, c])
        if sub.size == 0:
            continue
        piv = rank + int(sub[0])
        aug[[rank, piv]] = aug[[piv, rank]]
        mask = aug[:, c].copy()
        mask[rank] = 0
        aug[mask.astype(bool)] ^= aug[rank]
        pivots.append(c)
        rank += 1
        if rank == m:
            break
    if aug[rank:, k].any():
        return None
    x = np.zeros(k, dtype=np.uint8)
    for row, c in enumerate(pivots):
        x[c] = aug[row, k]
    return x
