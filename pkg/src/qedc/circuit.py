"""Minimal quantum circuit IR: gates, depth, counts, a small unitary oracle, JSON i/o.

Angle convention: every rotation parameter theta is in half-pi units, i.e.
RZZ(theta) = exp(-i * pi*theta/2 * Z@Z) and likewise for RX/RZ/RXX.  U(theta,
phi, lam) is the standard one-qubit unitary with each parameter scaled the
same way (radians = pi*x/2).  Global phase is never circuit data; equivalence
checks quotient it out.

Qubits are 0-indexed.  Circuits are append-only builders; once handed to the
compiler or simulator they must not be mutated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

FORMAT_VERSION = 1

# Gate arity tables.  MCX is a logical-level placeholder: the simulator and
# the physical gate counter reject it until it has been synthesized away.
ONE_QUBIT_KINDS = {"X", "Y", "Z", "H", "S", "SDG", "RX", "RZ", "U"}
TWO_QUBIT_KINDS = {"CX", "CZ", "SWAP", "RZZ", "RXX"}
PARAM_COUNTS = {"RX": 1, "RZ": 1, "RZZ": 1, "RXX": 1, "U": 3}
NON_UNITARY_KINDS = {"MEASURE", "RESET", "BARRIER"}
ALL_KINDS = ONE_QUBIT_KINDS | TWO_QUBIT_KINDS | NON_UNITARY_KINDS | {"MCX"}

UNITARY_ORACLE_MAX_QUBITS = 12


class CircuitError(ValueError):
    pass


class ParseError(CircuitError):
    pass


@dataclass(frozen=True)
class Instruction:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    creg: str | None = None       # measurement destination register
    cbit: int | None = None       # bit index within creg
    borrowed: int | None = None   # MCX borrowed-ancilla annotation

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.kind} repeats a qubit: {self.qubits}")
        if self.kind in ONE_QUBIT_KINDS and len(self.qubits) != 1:
            raise CircuitError(f"{self.kind} takes 1 qubit, got {self.qubits}")
        if self.kind in TWO_QUBIT_KINDS and len(self.qubits) != 2:
            raise CircuitError(f"{self.kind} takes 2 qubits, got {self.qubits}")
        if self.kind == "MCX" and len(self.qubits) < 2:
            raise CircuitError("MCX needs at least one control and a target")
        want = PARAM_COUNTS.get(self.kind, 0)
        if len(self.params) != want:
            raise CircuitError(f"{self.kind} takes {want} params, got {len(self.params)}")
        for p in self.params:
            if not math.isfinite(p):
                raise CircuitError(f"{self.kind} has non-finite angle {p}")


@dataclass
class Circuit:
    """Ordered instruction list over `qubit_count` qubits and named classical registers."""

    qubit_count: int
    cregs: list[tuple[str, int]] = field(default_factory=list)
    instructions: list[Instruction] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add_creg(self, name: str, size: int) -> None:
        if any(n == name for n, _ in self.cregs):
            raise CircuitError(f"duplicate classical register {name!r}")
        if size < 1:
            raise CircuitError("register size must be positive")
        self.cregs.append((name, size))

    def creg_size(self, name: str) -> int:
        for n, sz in self.cregs:
            if n == name:
                return sz
        raise CircuitError(f"no classical register {name!r}")

    def creg_offset(self, name: str) -> int:
        off = 0
        for n, sz in self.cregs:
            if n == name:
                return off
            off += sz
        raise CircuitError(f"no classical register {name!r}")

    @property
    def num_clbits(self) -> int:
        return sum(sz for _, sz in self.cregs)

    def _check_qubits(self, qubits):
        for q in qubits:
            if not (0 <= q < self.qubit_count):
                raise CircuitError(f"qubit {q} out of range (count={self.qubit_count})")

    def append(self, instr: Instruction) -> None:
        self._check_qubits(instr.qubits)
        if instr.borrowed is not None:
            self._check_qubits([instr.borrowed])
            if instr.borrowed in instr.qubits:
                raise CircuitError("borrowed qubit overlaps MCX operands")
        if instr.kind == "MEASURE":
            if instr.creg is None or instr.cbit is None:
                raise CircuitError("MEASURE needs a classical destination")
            if not (0 <= instr.cbit < self.creg_size(instr.creg)):
                raise CircuitError(f"bit {instr.cbit} out of range for register {instr.creg!r}")
        self.instructions.append(instr)

    # -- builder shorthands -------------------------------------------------
    def gate(self, kind, *qubits, params=(), borrowed=None):
        self.append(Instruction(kind, tuple(qubits), tuple(params), borrowed=borrowed))
        return self

    def x(self, q): return self.gate("X", q)
    def y(self, q): return self.gate("Y", q)
    def z(self, q): return self.gate("Z", q)
    def h(self, q): return self.gate("H", q)
    def s(self, q): return self.gate("S", q)
    def sdg(self, q): return self.gate("SDG", q)
    def rx(self, q, theta): return self.gate("RX", q, params=(theta,))
    def rz(self, q, theta): return self.gate("RZ", q, params=(theta,))
    def u(self, q, theta, phi, lam): return self.gate("U", q, params=(theta, phi, lam))
    def cx(self, c, t): return self.gate("CX", c, t)
    def cz(self, a, b): return self.gate("CZ", a, b)
    def swap(self, a, b): return self.gate("SWAP", a, b)
    def rzz(self, a, b, theta): return self.gate("RZZ", a, b, params=(theta,))
    def rxx(self, a, b, theta): return self.gate("RXX", a, b, params=(theta,))
    def mcx(self, controls, target, borrowed=None):
        return self.gate("MCX", *controls, target, borrowed=borrowed)
    def barrier(self): return self.gate("BARRIER")

    def measure(self, q, creg, cbit):
        instr = Instruction("MEASURE", (q,), creg=creg, cbit=cbit)
        self.append(instr)
        return self

    def reset(self, q): return self.gate("RESET", q)

    def copy(self) -> "Circuit":
        return Circuit(self.qubit_count, list(self.cregs), list(self.instructions), dict(self.meta))

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.qubit_count == other.qubit_count and self.cregs == other.cregs
                and self.instructions == other.instructions and self.meta == other.meta)


# ---------------------------------------------------------------------------
# Gate matrices
# ---------------------------------------------------------------------------

_SQ2 = 1.0 / math.sqrt(2.0)
_FIXED_1Q = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
}


def gate_matrix(kind: str, params: tuple[float, ...] = ()) -> np.ndarray:
    """Dense matrix of a unitary gate kind (2x2 or 4x4), half-pi angle units."""
    if kind in _FIXED_1Q:
        return _FIXED_1Q[kind].copy()
    if kind == "RX":
        r = math.pi * params[0] / 2.0
        return np.array([[math.cos(r), -1j * math.sin(r)],
                         [-1j * math.sin(r), math.cos(r)]], dtype=complex)
    if kind == "RZ":
        r = math.pi * params[0] / 2.0
        return np.array([[np.exp(-1j * r), 0], [0, np.exp(1j * r)]], dtype=complex)
    if kind == "U":
        th, ph, lm = (math.pi * p / 2.0 for p in params)
        return np.array([
            [math.cos(th / 2), -np.exp(1j * lm) * math.sin(th / 2)],
            [np.exp(1j * ph) * math.sin(th / 2), np.exp(1j * (ph + lm)) * math.cos(th / 2)],
        ], dtype=complex)
    if kind == "CX":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind == "SWAP":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    if kind == "RZZ":
        r = math.pi * params[0] / 2.0
        return np.diag([np.exp(-1j * r), np.exp(1j * r), np.exp(1j * r), np.exp(-1j * r)])
    if kind == "RXX":
        r = math.pi * params[0] / 2.0
        m = math.cos(r) * np.eye(4, dtype=complex)
        xx = np.fliplr(np.eye(4, dtype=complex))
        return m - 1j * math.sin(r) * xx
    raise CircuitError(f"no matrix for kind {kind!r}")


def u_params_from_matrix(m: np.ndarray, tol: float = 1e-12) -> tuple[float, float, float]:
    """Angles (theta, phi, lam) in half-pi units with U(theta,phi,lam) == m up to global phase."""
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(abs(det) - 1.0) > 1e-9:
        raise CircuitError("matrix is not unitary")
    s_mag = max(abs(m[0, 1]), abs(m[1, 0]))
    c_mag = max(abs(m[0, 0]), abs(m[1, 1]))
    if s_mag < tol:  # diagonal
        th, ph, lm = 0.0, float(np.angle(m[1, 1] / m[0, 0])), 0.0
    elif c_mag < tol:  # anti-diagonal
        th, ph, lm = math.pi, float(np.angle(m[1, 0] / (-m[0, 1]))), 0.0
    else:
        th = 2.0 * math.atan2(abs(m[1, 0]), abs(m[0, 0]))
        ph = float(np.angle(m[1, 0] / m[0, 0]))
        lm = float(np.angle(-m[0, 1] / m[0, 0]))
    return (th * 2 / math.pi, ph * 2 / math.pi, lm * 2 / math.pi)


# ---------------------------------------------------------------------------
# Depth and counts
# ---------------------------------------------------------------------------

def depth(circuit: Circuit) -> int:
    """Greedy left-to-right layering; BARRIER forces a boundary and is free,
    MEASURE/RESET are depth-1 operations."""
    frontier = [0] * circuit.qubit_count
    for instr in circuit.instructions:
        if instr.kind == "BARRIER":
            top = max(frontier, default=0)
            frontier = [top] * circuit.qubit_count
            continue
        layer = 1 + max(frontier[q] for q in instr.qubits)
        for q in instr.qubits:
            frontier[q] = layer
    return max(frontier, default=0)


def count_gates(circuit: Circuit) -> dict[str, int]:
    """Categorized tallies {one_qubit_unitary, two_qubit, measure, reset}.

    Rejects MCX (must be synthesized first) and anything outside the physical set.
    """
    counts = {"one_qubit_unitary": 0, "two_qubit": 0, "measure": 0, "reset": 0}
    for instr in circuit.instructions:
        if instr.kind == "BARRIER":
            continue
        if instr.kind in ONE_QUBIT_KINDS:
            counts["one_qubit_unitary"] += 1
        elif instr.kind in TWO_QUBIT_KINDS:
            counts["two_qubit"] += 1
        elif instr.kind == "MEASURE":
            counts["measure"] += 1
        elif instr.kind == "RESET":
            counts["reset"] += 1
        else:
            raise CircuitError(f"non-physical gate {instr.kind} in circuit (synthesize it first)")
    return counts


# ---------------------------------------------------------------------------
# Unitary oracle
# ---------------------------------------------------------------------------

def _apply_matrix(psi: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...], nq: int) -> np.ndarray:
    """Apply a k-qubit gate to axes `qubits` of a state tensor with arbitrary
    trailing batch axes.  Axis j corresponds to qubit j."""
    k = len(qubits)
    mat = mat.reshape([2] * (2 * k))
    moved = np.moveaxis(psi, qubits, range(k))
    shp = moved.shape
    out = np.tensordot(mat, moved.reshape((2,) * k + (-1,)), axes=(list(range(k, 2 * k)), list(range(k))))
    return np.moveaxis(out.reshape(shp), range(k), qubits)


def _mcx_matrix(arity: int) -> np.ndarray:
    n = arity + 1
    dim = 2 ** n
    m = np.eye(dim, dtype=complex)
    # qubit order: controls..., target; index bit 0 = first control (big-endian axes)
    all_on = dim - 2  # controls all 1, target 0
    m[[all_on, dim - 1]] = m[[dim - 1, all_on]]
    return m


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Compose the full 2^q x 2^q unitary of a measurement-free circuit."""
    nq = circuit.qubit_count
    if nq > UNITARY_ORACLE_MAX_QUBITS:
        raise CircuitError(f"unitary oracle limited to {UNITARY_ORACLE_MAX_QUBITS} qubits, got {nq}")
    dim = 2 ** nq
    u = np.eye(dim, dtype=complex).reshape([2] * nq + [dim])
    for instr in circuit.instructions:
        if instr.kind == "BARRIER":
            continue
        if instr.kind in ("MEASURE", "RESET"):
            raise CircuitError("unitary oracle cannot process measurement or reset")
        if instr.kind == "MCX":
            mat = _mcx_matrix(len(instr.qubits) - 1)
        else:
            mat = gate_matrix(instr.kind, instr.params)
        u = _apply_matrix(u, mat, instr.qubits, nq)
    return u.reshape(dim, dim)


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """max-norm distance between a and b after optimal global-phase alignment."""
    tr = np.trace(b.conj().T @ a)
    if abs(tr) < 1e-12:
        return float(np.abs(a - b).max())
    phase = tr / abs(tr)
    return float(np.abs(a / phase - b).max())


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def serialize(circuit: Circuit) -> str:
    ops = []
    for instr in circuit.instructions:
        op = {"kind": instr.kind, "qubits": list(instr.qubits)}
        if instr.params:
            op["params"] = list(instr.params)
        if instr.creg is not None:
            op["creg"] = instr.creg
            op["cbit"] = instr.cbit
        if instr.borrowed is not None:
            op["borrowed"] = instr.borrowed
        ops.append(op)
    doc = {
        "version": FORMAT_VERSION,
        "qubits": circuit.qubit_count,
        "cregs": [{"name": n, "size": s} for n, s in circuit.cregs],
        "ops": ops,
    }
    if circuit.meta:
        doc["meta"] = circuit.meta
    return json.dumps(doc, indent=1)


def parse(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    if "version" not in doc:
        raise ParseError("missing mandatory field 'version'")
    if doc["version"] != FORMAT_VERSION:
        raise ParseError(f"unsupported format version {doc['version']!r}")
    for key in ("qubits", "ops"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    circ = Circuit(int(doc["qubits"]))
    for i, reg in enumerate(doc.get("cregs", [])):
        try:
            circ.add_creg(reg["name"], int(reg["size"]))
        except (KeyError, TypeError, CircuitError) as exc:
            raise ParseError(f"cregs[{i}]: {exc}") from None
    for i, op in enumerate(doc["ops"]):
        kind = op.get("kind")
        if kind not in ALL_KINDS:
            raise ParseError(f"ops[{i}].kind: unknown gate kind {kind!r}")
        try:
            instr = Instruction(
                kind,
                tuple(int(q) for q in op.get("qubits", [])),
                tuple(float(p) for p in op.get("params", [])),
                creg=op.get("creg"),
                cbit=op.get("cbit"),
                borrowed=op.get("borrowed"),
            )
            circ.append(instr)
        except (CircuitError, TypeError, ValueError) as exc:
            raise ParseError(f"ops[{i}]: {exc}") from None
    circ.meta = doc.get("meta", {})
    return circ
