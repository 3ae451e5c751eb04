"""Lowering logical circuits onto the [[n, n-2, 2]] code.

Pipeline (universal recipe): multi-controlled X gates are first synthesized
at the logical level (borrowing an idle logical qubit); remaining gates are
transpiled to {RX, RZ, RZZ} except the catalog gates with cheaper direct
physical forms (Paulis, S, CX, CZ, and full-width H layers, which compile to
transversal H plus a qubit relabeling); rotations map onto weight-two
physical rotations; RXX is converted to H-conjugated RZZ and adjacent
one-qubit gates are squashed.

Physical SWAPs never appear in encoded output: the compiler renames qubits
instead (dense-connectivity assumption), tracking the permutation through
every later gadget and the final readout.
"""

from __future__ import annotations

import math

import numpy as np

from .circuit import (
    Circuit,
    CircuitError,
    Instruction,
    ONE_QUBIT_KINDS,
    gate_matrix,
    phase_distance,
    u_params_from_matrix,
)
from .iceberg import (
    CodeLayout,
    CodeParams,
    SyndromeSchedule,
    destructive_measure,
    logical_pauli,
    prepare_zero,
    syndrome_measure,
)
from .mcx import emit_mcx

EULER_TOL = 1e-12

# logical kinds kept in direct (catalog) form by default
DEFAULT_PREFERRED = frozenset({"X", "Y", "Z", "S", "CX", "CZ"})


# ---------------------------------------------------------------------------
# Euler decomposition
# ---------------------------------------------------------------------------

def euler_zxz(mat: np.ndarray) -> tuple[float, float, float]:
    """Angles (a, b, c), half-pi units, with RZ(c)..RX(b)..RZ(a) applied in
    time order a-then-b-then-c equal to `mat` up to global phase."""
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    v = mat / np.sqrt(det)
    cos_b = min(abs(v[0, 0]), 1.0)
    beta = 2.0 * math.acos(cos_b)
    if cos_b < 1e-9:
        beta = math.pi
        diff = 2.0 * np.angle(v[1, 0] / -1j)
        alpha, gamma = diff, 0.0
    elif abs(v[0, 1]) < 1e-9:
        beta = 0.0
        alpha, gamma = 2.0 * np.angle(v[1, 1]), 0.0
    else:
        ssum = 2.0 * np.angle(v[1, 1])
        diff = 2.0 * np.angle(v[1, 0] / (-1j * math.sin(beta / 2.0)))
        alpha = (ssum + diff) / 2.0
        gamma = (ssum - diff) / 2.0
    # matrix = Rz(alpha) Rx(beta) Rz(gamma): gamma applied first.
    # RZ(theta) = exp(-i pi theta/2 Z) equals the standard Rz(lambda) at theta = lambda/pi.
    a, b, c = (gamma / math.pi, beta / math.pi, alpha / math.pi)
    check = (gate_matrix("RZ", (c,)) @ gate_matrix("RX", (b,)) @ gate_matrix("RZ", (a,)))
    if phase_distance(check, mat) > EULER_TOL * 10:
        raise CircuitError(f"euler decomposition failed, residual {phase_distance(check, mat):.2e}")
    return a, b, c


def transpile_to_native(circ: Circuit, preferred: frozenset[str] = DEFAULT_PREFERRED) -> Circuit:
    """Rewrite a logical circuit over {RX, RZ, RZZ} plus preferred direct gates."""
    out = Circuit(circ.qubit_count, list(circ.cregs))
    for instr in circ.instructions:
        kind = instr.kind
        if kind == "BARRIER":
            out.append(instr)
        elif kind in ("RX", "RZ", "RZZ"):
            out.append(instr)
        elif kind in preferred and kind in ("X", "Y", "Z", "S", "CX", "CZ"):
            out.append(instr)
        elif kind in ONE_QUBIT_KINDS:
            a, b, c = euler_zxz(gate_matrix(kind, instr.params))
            q = instr.qubits[0]
            for gk, angle in (("RZ", a), ("RX", b), ("RZ", c)):
                if abs(angle) > 1e-12:
                    out.gate(gk, q, params=(angle,))
        elif kind == "CZ":
            a, b = instr.qubits
            out.rz(a, 0.5)
            out.rz(b, 0.5)
            out.rzz(a, b, -0.5)
        elif kind == "CX":
            c_, t = instr.qubits
            for gk, angle in _H_AS_ROTATIONS:
                out.gate(gk, t, params=(angle,))
            out.rz(c_, 0.5)
            out.rz(t, 0.5)
            out.rzz(c_, t, -0.5)
            for gk, angle in _H_AS_ROTATIONS:
                out.gate(gk, t, params=(angle,))
        else:
            raise CircuitError(f"cannot transpile gate kind {kind}")
    return out


_H_AS_ROTATIONS = (("RZ", 0.5), ("RX", 0.5), ("RZ", 0.5))


# ---------------------------------------------------------------------------
# One-qubit squash
# ---------------------------------------------------------------------------

def squash_1q(circ: Circuit, tol: float = 1e-12) -> Circuit:
    """Merge maximal runs of adjacent one-qubit gates; drop identity products."""
    out = Circuit(circ.qubit_count, list(circ.cregs), meta=dict(circ.meta))
    pending: dict[int, np.ndarray] = {}

    def flush(q):
        mat = pending.pop(q, None)
        if mat is None:
            return
        if phase_distance(mat, np.eye(2)) < tol:
            return
        th, ph, lm = u_params_from_matrix(mat)
        out.u(q, th, ph, lm)

    for instr in circ.instructions:
        if instr.kind in ONE_QUBIT_KINDS:
            q = instr.qubits[0]
            mat = gate_matrix(instr.kind, instr.params)
            pending[q] = mat @ pending.get(q, np.eye(2, dtype=complex))
            continue
        if instr.kind == "BARRIER":
            for q in sorted(pending):
                flush(q)
        else:
            for q in instr.qubits:
                flush(q)
        out.append(instr)
    for q in sorted(pending):
        flush(q)
    return out


# ---------------------------------------------------------------------------
# Logical gate catalog (physical fragments on the data block)
# ---------------------------------------------------------------------------

def synth_logical_gate(params: CodeParams, kind: str, qubits: tuple[int, ...] = (),
                       theta: float | None = None) -> Circuit:
    """Physical fragment for one logical gate, on n data qubits 0..n-1.

    Supported kinds: X/Y/Z/S on one logical qubit, X_ALL/Z_ALL, XX/YY/ZZ pairs,
    CZ, CX, H_ALL (transversal H + SWAP), H (single logical Hadamard),
    RX/RZ (one qubit) and RZZ (two qubits) rotations.
    """
    n, k = params.n, params.k
    for q in qubits:
        if not (0 <= q < k):
            raise CircuitError(f"logical qubit {q} out of range for k={k}")
    circ = Circuit(n)
    if kind == "X":
        (i,) = qubits
        circ.x(0)
        circ.x(i + 1)
    elif kind == "Y":
        (i,) = qubits
        circ.x(0)
        circ.y(i + 1)
        circ.z(n - 1)
    elif kind == "Z":
        (i,) = qubits
        circ.z(i + 1)
        circ.z(n - 1)
    elif kind == "S":
        (i,) = qubits
        circ.s(n - 1)
        circ.cz(i + 1, n - 1)
        circ.s(i + 1)
    elif kind in ("X_ALL", "Z_ALL"):
        # product of all k logical Paulis reduces to weight two over the stabilizer
        g = "X" if kind == "X_ALL" else "Z"
        circ.gate(g, 0)
        circ.gate(g, n - 1)
    elif kind in ("XX", "YY", "ZZ"):
        i, j = qubits
        g = kind[0]
        circ.gate(g, i + 1)
        circ.gate(g, j + 1)
    elif kind == "CZ":
        i, j = qubits
        circ.z(n - 1)
        circ.cz(i + 1, j + 1)
        circ.cz(i + 1, n - 1)
        circ.cz(j + 1, n - 1)
    elif kind == "CX":
        i, j = qubits
        circ.cx(i + 1, 0)
        circ.cx(n - 1, 0)
        circ.cx(n - 1, j + 1)
        circ.cx(i + 1, j + 1)
    elif kind == "H_ALL":
        for q in range(n):
            circ.h(q)
        circ.swap(0, n - 1)
    elif kind == "H":
        (i,) = qubits
        p = i + 1
        circ.cz(p, n - 1)
        circ.h(0)
        circ.h(p)
        circ.cz(0, p)
        circ.h(p)
        circ.cz(0, p)
        circ.h(0)
        circ.h(p)
        circ.cz(p, n - 1)
        circ.x(0)
        circ.z(n - 1)
    elif kind == "RX":
        (i,) = qubits
        circ.rxx(0, i + 1, theta)
    elif kind == "RZ":
        (i,) = qubits
        circ.rzz(i + 1, n - 1, theta)
    elif kind == "RZZ":
        i, j = qubits
        circ.rzz(i + 1, j + 1, theta)
    else:
        raise CircuitError(f"unsupported logical gate {kind}")
    return circ


def encoded_basis(params: CodeParams) -> np.ndarray:
    """Isometry whose columns are the encoded logical computational states."""
    n, k = params.n, params.k
    v = np.zeros((2 ** n, 2 ** k), dtype=complex)
    for x in range(2 ** k):
        bits = [(x >> (k - 1 - i)) & 1 for i in range(k)]
        c = [0] * n
        c[0] = sum(bits) % 2
        for i in range(k):
            c[i + 1] = bits[i]
        idx = int("".join(map(str, c)), 2)
        comp = (2 ** n - 1) ^ idx
        v[idx, x] = 1 / math.sqrt(2)
        v[comp, x] = 1 / math.sqrt(2)
    return v


# ---------------------------------------------------------------------------
# Encoder
# ---------------------------------------------------------------------------

def code_for(logical: Circuit) -> CodeParams:
    """Smallest even code size covering the circuit plus any implicit MCX borrow."""
    w = logical.qubit_count
    demand = w
    for instr in logical.instructions:
        if instr.kind == "MCX" and instr.borrowed is None and len(instr.qubits) == w:
            demand = w + 1
            break
    k = demand + (demand % 2)
    return CodeParams(k + 2)


def _h_layer_spans(instrs: list[Instruction], width: int) -> set[int]:
    """Start indices of H-runs of length `width` covering every logical qubit once."""
    spans = set()
    full = set(range(width))
    i = 0
    while i + width <= len(instrs):
        window = instrs[i:i + width]
        if all(ins.kind == "H" for ins in window) and {ins.qubits[0] for ins in window} == full:
            spans.add(i)
            i += width
        else:
            i += 1
    return spans


def _lower_mcx(instr: Instruction, k: int, width: int) -> list[Instruction]:
    *controls, target = instr.qubits
    borrowed = instr.borrowed
    if borrowed is None:
        used = set(instr.qubits)
        free = [q for q in range(k) if q not in used]
        if not free:
            raise CircuitError("no logical qubit available to borrow for MCX")
        pad = [q for q in free if q >= width]
        borrowed = (pad or free)[-1]
    tmp = Circuit(k)
    emit_mcx(tmp, list(controls), target, borrowed)
    return tmp.instructions


def encode(logical: Circuit, code: CodeParams | None = None,
           schedule: SyndromeSchedule = SyndromeSchedule(0),
           preferred: frozenset[str] = DEFAULT_PREFERRED,
           native_two_qubit: bool = True) -> tuple[Circuit, CodeLayout]:
    """Compile a logical circuit into an encoded physical circuit plus layout.

    Output: FT zero preparation, the synthesized logical operations with
    syndrome gadgets spliced at the scheduled positions (indices count input
    logical instructions), and the destructive measurement.  The layout is
    embedded in the circuit metadata so files can be decoded standalone.
    """
    if code is None:
        code = code_for(logical)
    w = logical.qubit_count
    k, n = code.k, code.n
    if w > k:
        raise CircuitError(f"logical circuit needs {w} qubits but code only has k={k}")
    if logical.cregs:
        raise CircuitError("logical input must not declare classical registers")

    placements = schedule.resolve(len(logical.instructions))
    layout = CodeLayout.create(code, rounds=schedule.rounds)
    phys = Circuit(layout.qubit_count)
    layout.attach_registers(phys)

    prepare_zero(phys, layout)
    phys.barrier()

    perm = list(range(n))
    h_spans = _h_layer_spans(logical.instructions, w)

    # segments: (n_input_ops, list-of-logical-instructions-or-markers)
    segments: list[tuple[int, object]] = []
    i = 0
    instrs = logical.instructions
    while i < len(instrs):
        if i in h_spans:
            segments.append((w, "H_ALL"))
            i += w
            continue
        instr = instrs[i]
        if instr.kind == "MCX":
            segments.append((1, _lower_mcx(instr, k, w)))
            i += 1
            continue
        if instr.kind in ("X", "Z"):
            j = i
            seen: list[int] = []
            while (j < len(instrs) and instrs[j].kind == instr.kind
                   and instrs[j].qubits[0] not in seen):
                seen.append(instrs[j].qubits[0])
                j += 1
            if len(seen) > 1:
                segments.append((j - i, ("PAULI_GROUP", instr.kind, tuple(seen))))
                i = j
                continue
        segments.append((1, [instr]))
        i += 1

    consumed = 0
    placed = 0
    next_round = 0

    def splice_syndromes():
        nonlocal placed, next_round
        while placed < len(placements) and placements[placed] <= consumed:
            phys.barrier()
            syndrome_measure(phys, layout, next_round, perm=perm)
            phys.barrier()
            next_round += 1
            placed += 1

    for size, seg in segments:
        if seg == "H_ALL":
            for pos in range(n):
                phys.h(layout.data[perm[pos]])
            perm[0], perm[n - 1] = perm[n - 1], perm[0]
        elif isinstance(seg, tuple) and seg[0] == "PAULI_GROUP":
            _, pauli, targets = seg
            support = logical_pauli(list(targets), pauli, code)
            for pos, g in support.items():
                phys.gate(g, layout.data[perm[pos]])
        else:
            frag = _fragment_for(seg, code, preferred, native_two_qubit)
            for ins in frag.instructions:
                mapped = tuple(layout.data[perm[p]] for p in ins.qubits)
                phys.append(Instruction(ins.kind, mapped, ins.params))
        consumed += size
        splice_syndromes()

    phys.barrier()
    destructive_measure(phys, layout, perm=perm)
    phys.meta["layout"] = layout.to_meta()
    return phys, layout


def _fragment_for(seg_instrs: list[Instruction], code: CodeParams,
                  preferred: frozenset[str], native_two_qubit: bool) -> Circuit:
    """Map a logical instruction list to a physical fragment on data positions."""
    k = code.k
    native = transpile_to_native(Circuit(k, instructions=list(seg_instrs)), preferred)
    frag = Circuit(code.n)
    for instr in native.instructions:
        if instr.kind == "BARRIER":
            frag.barrier()
            continue
        qs = instr.qubits
        if instr.kind in ("X", "Y", "Z", "S"):
            _extend(frag, synth_logical_gate(code, instr.kind, qs))
        elif instr.kind in ("CX", "CZ"):
            _extend(frag, synth_logical_gate(code, instr.kind, qs))
        elif instr.kind == "RX":
            _extend(frag, synth_logical_gate(code, "RX", qs, instr.params[0]))
        elif instr.kind == "RZ":
            _extend(frag, synth_logical_gate(code, "RZ", qs, instr.params[0]))
        elif instr.kind == "RZZ":
            _extend(frag, synth_logical_gate(code, "RZZ", qs, instr.params[0]))
        else:
            raise CircuitError(f"unexpected native gate {instr.kind}")
    frag = convert_rxx(frag)
    if native_two_qubit:
        frag = lower_two_qubit(frag)
    return squash_1q(frag)


def _extend(circ: Circuit, frag: Circuit) -> None:
    for ins in frag.instructions:
        circ.append(ins)


def convert_rxx(circ: Circuit) -> Circuit:
    """RXX(a,b) -> (H a)(H b) RZZ(a,b) (H a)(H b)."""
    out = Circuit(circ.qubit_count, list(circ.cregs), meta=dict(circ.meta))
    for instr in circ.instructions:
        if instr.kind == "RXX":
            a, b = instr.qubits
            out.h(a)
            out.h(b)
            out.rzz(a, b, instr.params[0])
            out.h(a)
            out.h(b)
        else:
            out.append(instr)
    return out


def lower_two_qubit(circ: Circuit) -> Circuit:
    """Rewrite CX/CZ into RZZ plus one-qubit rotations (native ion-trap form)."""
    out = Circuit(circ.qubit_count, list(circ.cregs), meta=dict(circ.meta))
    for instr in circ.instructions:
        if instr.kind == "CZ":
            a, b = instr.qubits
            out.rz(a, 0.5)
            out.rz(b, 0.5)
            out.rzz(a, b, -0.5)
        elif instr.kind == "CX":
            c_, t = instr.qubits
            out.h(t)
            out.rz(c_, 0.5)
            out.rz(t, 0.5)
            out.rzz(c_, t, -0.5)
            out.h(t)
        else:
            out.append(instr)
    return out
