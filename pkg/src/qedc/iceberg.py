"""The [[n, n-2, 2]] code: layouts, fault-tolerant gadgets, logical Paulis, decoding.

Stabilizers are X^n and Z^n; logical zero is the n-qubit GHZ state.  Logical
Pauli frame (0-based): Xbar_i = X_0 X_{i+1}, Zbar_i = Z_{i+1} Z_{n-1}, so a
decoded logical bit is data[i+1] XOR data[n-1].

Gadgets use two ancillas: ancilla 0 accumulates the Z^n parity, ancilla 1 is
prepared in |+> and accumulates X^n.  The syndrome gadget couples each data
qubit once to each ancilla with boundary blocks in swapped order, plus an
ancilla-ancilla flag wrapper at either end; single faults anywhere either
flag a syndrome bit or leave a single detectable error (exhaustive injection
is part of the test suite).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, CircuitError


@dataclass(frozen=True)
class CodeParams:
    n: int

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise CircuitError(f"[[n, n-2, 2]] needs even n >= 4, got n={self.n}")

    @property
    def k(self) -> int:
        return self.n - 2

    @property
    def d(self) -> int:
        return 2


REGISTER_ROLES = ("prep_flag", "synd_z", "synd_x", "final_x", "final_flag", "data")


@dataclass
class CodeLayout:
    """Qubit and classical-register assignment for one code block."""

    n: int
    data: tuple[int, ...]
    ancillas: tuple[int, int]
    rounds: int
    registers: dict[str, str] = field(default_factory=dict)  # role -> register name

    def __post_init__(self):
        if len(self.data) != self.n:
            raise CircuitError("layout data size mismatch")
        if set(self.data) & set(self.ancillas):
            raise CircuitError("data and ancilla qubits overlap")
        if not self.registers:
            self.registers = {role: role for role in REGISTER_ROLES}

    @property
    def k(self) -> int:
        return self.n - 2

    @classmethod
    def create(cls, params: CodeParams, rounds: int = 0) -> "CodeLayout":
        return cls(params.n, tuple(range(params.n)), (params.n, params.n + 1), rounds)

    @property
    def qubit_count(self) -> int:
        return max(max(self.data), max(self.ancillas)) + 1

    def attach_registers(self, circ: Circuit) -> None:
        circ.add_creg(self.registers["prep_flag"], 1)
        if self.rounds > 0:
            circ.add_creg(self.registers["synd_z"], self.rounds)
            circ.add_creg(self.registers["synd_x"], self.rounds)
        circ.add_creg(self.registers["final_x"], 1)
        circ.add_creg(self.registers["final_flag"], 1)
        circ.add_creg(self.registers["data"], self.n)

    def to_meta(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "data_indices": list(self.data),
            "ancilla_indices": list(self.ancillas),
            "rounds": self.rounds,
            "register_roles": dict(self.registers),
        }

    @classmethod
    def from_meta(cls, meta: dict) -> "CodeLayout":
        return cls(
            n=int(meta["n"]),
            data=tuple(meta["data_indices"]),
            ancillas=tuple(meta["ancilla_indices"]),
            rounds=int(meta.get("rounds", 0)),
            registers=dict(meta["register_roles"]),
        )


@dataclass(frozen=True)
class SyndromeSchedule:
    """How many syndrome gadgets to insert and after which logical instructions."""

    rounds: int
    placement: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.rounds < 0:
            raise CircuitError("rounds must be >= 0")
        if self.placement is not None:
            if len(self.placement) != self.rounds:
                raise CircuitError("placement length must equal rounds")
            if list(self.placement) != sorted(set(self.placement)):
                raise CircuitError("placement must be strictly increasing")

    def resolve(self, n_logical_ops: int) -> tuple[int, ...]:
        """1-based positions: a gadget goes after that many logical instructions.

        Default spreads rounds evenly: ceil(m * L / (r + 1)) for m = 1..r.
        """
        if self.placement is not None:
            for p in self.placement:
                if not (1 <= p <= n_logical_ops):
                    raise CircuitError(f"placement index {p} out of range 1..{n_logical_ops}")
            return self.placement
        r = self.rounds
        if r == 0:
            return ()
        if n_logical_ops == 0:
            raise CircuitError("cannot place syndrome rounds in an empty logical circuit")
        return tuple(-(-m * n_logical_ops // (r + 1)) or 1 for m in range(1, r + 1))


@dataclass(frozen=True)
class DecodedShot:
    accepted: bool
    logical_bits: tuple[int, ...]
    rejection_cause: str | None = None

    def __post_init__(self):
        assert self.accepted == (self.rejection_cause is None)


REJECTION_CAUSES = ("prep_flag", "mid_syndrome", "final_syndrome", "final_flag", "z_parity")


# ---------------------------------------------------------------------------
# Gadgets
# ---------------------------------------------------------------------------

def _resolve(layout: CodeLayout, perm: list[int] | None):
    if perm is None:
        return list(layout.data)
    return [layout.data[p] for p in perm]


def prepare_zero(circ: Circuit, layout: CodeLayout) -> None:
    """Fault-tolerant GHZ preparation: H + CX chain + weight-2 flag check (n+1 CX)."""
    d = list(layout.data)
    a0 = layout.ancillas[0]
    n = layout.n
    circ.h(d[0])
    for i in range(1, n):
        circ.cx(d[i - 1], d[i])
    circ.cx(d[0], a0)
    circ.cx(d[n - 1], a0)
    circ.measure(a0, layout.registers["prep_flag"], 0)
    circ.reset(a0)


def syndrome_measure(circ: Circuit, layout: CodeLayout, round_index: int,
                     perm: list[int] | None = None) -> None:
    """Measure Z^n onto ancilla 0 and X^n onto ancilla 1 (4*ceil((k+1)/2)+4 CX).

    Data qubits couple pairwise; the first and last pairs use swapped order so
    that ancilla faults flag, and the ancilla pair is cross-coupled at both
    ends as an additional flag wrapper.
    """
    if not (0 <= round_index < layout.rounds):
        raise CircuitError(f"round {round_index} outside allocated rounds {layout.rounds}")
    q = _resolve(layout, perm)
    a0, a1 = layout.ancillas
    n, k = layout.n, layout.k

    circ.cx(a1, a0)
    circ.h(a1)
    circ.cx(a0, a1)
    # boundary pair (0, 1), swapped tail order
    circ.cx(a1, q[0])
    circ.cx(q[0], a0)
    circ.cx(q[1], a0)
    circ.cx(a1, q[1])
    # middle pairs
    for i in range(2, k, 2):
        circ.cx(a1, q[i])
        circ.cx(q[i], a0)
        circ.cx(a1, q[i + 1])
        circ.cx(q[i + 1], a0)
    # boundary pair (n-2, n-1), swapped tail order
    circ.cx(a1, q[n - 2])
    circ.cx(q[n - 2], a0)
    circ.cx(q[n - 1], a0)
    circ.cx(a1, q[n - 1])
    circ.cx(a0, a1)
    circ.h(a1)
    circ.cx(a1, a0)
    circ.measure(a0, layout.registers["synd_z"], round_index)
    circ.measure(a1, layout.registers["synd_x"], round_index)
    circ.reset(a0)
    circ.reset(a1)


def syndrome_two_qubit_count(k: int) -> int:
    """Two-qubit gates added per syndrome gadget: 4*ceil((k+1)/2) + 4."""
    return 4 * ((k + 1 + 1) // 2) + 4


def destructive_measure(circ: Circuit, layout: CodeLayout,
                        perm: list[int] | None = None) -> None:
    """Destructive readout: X^n onto ancilla 0 with ancilla 1 flagging, then
    Z-basis measurement of all data qubits."""
    q = _resolve(layout, perm)
    a0, a1 = layout.ancillas
    n = layout.n
    circ.h(a0)
    circ.cx(a0, q[n - 1])
    circ.cx(a0, a1)
    for i in range(1, n - 1):
        circ.cx(a0, q[i])
    circ.cx(a0, a1)
    circ.cx(a0, q[0])
    circ.h(a0)
    for i in range(n):
        circ.measure(q[i], layout.registers["data"], i)
    circ.measure(a0, layout.registers["final_x"], 0)
    circ.measure(a1, layout.registers["final_flag"], 0)


# ---------------------------------------------------------------------------
# Logical Paulis
# ---------------------------------------------------------------------------

def logical_pauli(targets: list[int], pauli: str, params: CodeParams) -> dict[int, str]:
    """Physical support of a logical X or Z product over `targets`.

    Shift indices up by one, adjoin qubit n-1 (Z) or 0 (X) for odd parity,
    then complement when the support exceeds n/2 (stabilizer equivalence).
    """
    if pauli not in ("X", "Z"):
        raise CircuitError("logical_pauli supports X or Z")
    n = params.n
    if len(set(targets)) != len(targets):
        raise CircuitError("duplicate logical targets")
    for t in targets:
        if not (0 <= t < params.k):
            raise CircuitError(f"logical index {t} out of range")
    support = [t + 1 for t in targets]
    if len(support) % 2:
        if pauli == "Z":
            support = support + [n - 1]
        else:
            support = [0] + support
    if len(support) > n // 2:
        support = [i for i in range(n) if i not in support]
    return {q: pauli for q in sorted(support)}


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

def decode_table(table, layout: CodeLayout):
    """Vectorized decode of a ShotTable.

    Returns (accepted bool array, logical bits uint8 array of shape
    (n_shots, k), cause index array: -1 accepted else index into
    REJECTION_CAUSES).
    """
    regs = layout.registers
    prep = table.column(regs["prep_flag"])[:, 0].astype(bool)
    if layout.rounds > 0:
        sz = table.column(regs["synd_z"])
        sx = table.column(regs["synd_x"])
        mid = sz.any(axis=1) | sx.any(axis=1)
    else:
        mid = np.zeros(len(table), dtype=bool)
    fx = table.column(regs["final_x"])[:, 0].astype(bool)
    fl = table.column(regs["final_flag"])[:, 0].astype(bool)
    data = table.column(regs["data"])
    parity = (data.sum(axis=1) % 2).astype(bool)
    cause = np.full(len(table), -1, dtype=np.int8)
    for idx, mask in reversed(list(enumerate([prep, mid, fx, fl, parity]))):
        cause[mask] = idx
    accepted = cause < 0
    bits = (data[:, 1:layout.k + 1] ^ data[:, layout.n - 1:layout.n]).astype(np.uint8)
    return accepted, bits, cause


def decode_shot(record, layout: CodeLayout) -> DecodedShot:
    """Post-select on all flags/syndromes and the Z^n readout parity."""
    regs = layout.registers
    for role in ("prep_flag", "final_x", "final_flag", "data"):
        if regs[role] not in record:
            raise KeyError(f"record is missing register {regs[role]!r} ({role})")
    if layout.rounds > 0 and (regs["synd_z"] not in record or regs["synd_x"] not in record):
        raise KeyError("record is missing syndrome registers")

    def reject(cause):
        return DecodedShot(False, (), cause)

    if record[regs["prep_flag"]][0]:
        return reject("prep_flag")
    if layout.rounds > 0:
        sz = record[regs["synd_z"]]
        sx = record[regs["synd_x"]]
        if np.any(sz[:layout.rounds]) or np.any(sx[:layout.rounds]):
            return reject("mid_syndrome")
    if record[regs["final_x"]][0]:
        return reject("final_syndrome")
    if record[regs["final_flag"]][0]:
        return reject("final_flag")
    data = record[regs["data"]]
    if int(np.sum(data)) % 2:
        return reject("z_parity")
    last = int(data[layout.n - 1])
    bits = tuple(int(data[i + 1]) ^ last for i in range(layout.k))
    return DecodedShot(True, bits, None)
