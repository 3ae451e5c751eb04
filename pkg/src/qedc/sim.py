"""Monte Carlo statevector simulator with circuit-level Pauli noise.

Noise model: every one-qubit gate is followed by X/Y/Z each with probability
p1/3; every two-qubit gate by one of the 15 non-identity two-qubit Paulis
each with probability p2/15; state preparation flips each qubit with
probability p_spam and each recorded measurement bit flips with probability
p_spam.  Reset is measure-then-flip with no noise of its own; idle qubits
accrue no noise.

Reproducibility: shot i of a run draws its randomness from a counter-based
stream keyed only by (seed, i), so results are independent of execution
order and worker count.  The numba and numpy engines consume the identical
uniform stream in the identical order and produce identical records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .circuit import (
    Circuit,
    CircuitError,
    ONE_QUBIT_KINDS,
    TWO_QUBIT_KINDS,
    gate_matrix,
)

STATEVECTOR_MAX_QUBITS = 24
# cap on batch statevector memory (complex128 amplitudes)
_BATCH_AMP_BUDGET = 1 << 26


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    p_spam: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "p_spam"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise ValueError(f"{name} must be in [0, 1), got {v}")

    @classmethod
    def uniform(cls, p: float) -> "NoiseModel":
        """The single-parameter model: p1 = p2 = p_spam = p."""
        return cls(p1=p, p2=p, p_spam=p)

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0 and self.p_spam == 0.0


NOISELESS = NoiseModel()


class ShotRecord:
    """Measurement outcomes of one trajectory, keyed by classical register."""

    def __init__(self, registers: list[tuple[str, int]], bits: np.ndarray):
        self.registers = registers
        self.bits = bits
        self._offsets = {}
        off = 0
        for name, size in registers:
            self._offsets[name] = (off, size)
            off += size

    def __getitem__(self, name: str) -> np.ndarray:
        off, size = self._offsets[name]
        return self.bits[off:off + size]

    def __contains__(self, name: str) -> bool:
        return name in self._offsets

    def bit(self, name: str, idx: int) -> int:
        off, size = self._offsets[name]
        if not (0 <= idx < size):
            raise IndexError(f"bit {idx} out of range for {name!r}")
        return int(self.bits[off + idx])

    def __repr__(self):
        parts = [f"{n}={''.join(str(b) for b in self[n])}" for n, _ in self.registers]
        return "ShotRecord(" + ", ".join(parts) + ")"


class ShotTable:
    """Shot records of a run, stored as one (n_shots, n_bits) uint8 array."""

    def __init__(self, registers: list[tuple[str, int]], bits: np.ndarray):
        self.registers = registers
        self.bits = bits

    def __len__(self):
        return self.bits.shape[0]

    def __getitem__(self, i: int) -> ShotRecord:
        return ShotRecord(self.registers, self.bits[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def column(self, name: str) -> np.ndarray:
        off = 0
        for n, size in self.registers:
            if n == name:
                return self.bits[:, off:off + size]
            off += size
        raise KeyError(name)

    def to_csv(self, path) -> None:
        """One row per shot, one column per classical bit, name.idx headers."""
        header = ",".join(f"{n}.{i}" for n, size in self.registers for i in range(size))
        np.savetxt(path, self.bits, fmt="%d", delimiter=",", header=header, comments="")


# ---------------------------------------------------------------------------
# Circuit compilation to flat arrays
# ---------------------------------------------------------------------------

class CompiledCircuit:
    def __init__(self, circuit: Circuit):
        nq = circuit.qubit_count
        if nq > STATEVECTOR_MAX_QUBITS:
            raise CircuitError(f"simulator limited to {STATEVECTOR_MAX_QUBITS} qubits, got {nq}")
        self.nq = nq
        self.registers = list(circuit.cregs)
        self.n_clbits = circuit.num_clbits
        n = len(circuit.instructions)
        self.opcodes = np.zeros(n, np.int8)
        self.q0 = np.zeros(n, np.int16)
        self.q1 = np.zeros(n, np.int16)
        self.cbits = np.zeros(n, np.int32)
        self.mats = np.zeros((n, 16), np.complex128)
        n_uni = nq
        for i, instr in enumerate(circuit.instructions):
            if instr.kind == "BARRIER":
                self.opcodes[i] = K.OP_BARRIER
            elif instr.kind == "MEASURE":
                self.opcodes[i] = K.OP_MEASURE
                self.q0[i] = instr.qubits[0]
                self.cbits[i] = circuit.creg_offset(instr.creg) + instr.cbit
                n_uni += 2
            elif instr.kind == "RESET":
                self.opcodes[i] = K.OP_RESET
                self.q0[i] = instr.qubits[0]
                n_uni += 1
            elif instr.kind in ONE_QUBIT_KINDS:
                self.opcodes[i] = K.OP_G1
                self.q0[i] = instr.qubits[0]
                self.mats[i, :4] = gate_matrix(instr.kind, instr.params).ravel()
                n_uni += 1
            elif instr.kind in TWO_QUBIT_KINDS:
                self.opcodes[i] = K.OP_G2
                self.q0[i] = instr.qubits[0]
                self.q1[i] = instr.qubits[1]
                self.mats[i] = gate_matrix(instr.kind, instr.params).ravel()
                n_uni += 1
            else:
                raise CircuitError(f"non-physical gate {instr.kind} (synthesize it before simulation)")
        self.n_uniforms = n_uni


def stream_for(seed: int, shot_index: int) -> np.random.Generator:
    """Counter-based stream derived only from (seed, shot index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, shot_index])))


# ---------------------------------------------------------------------------
# numpy reference engine
# ---------------------------------------------------------------------------

_PAULI_MATS = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


def _np_apply(psi, mat, qubits, nq):
    k = len(qubits)
    mat = mat.reshape([2] * (2 * k))
    psi = psi.reshape([2] * nq)
    moved = np.moveaxis(psi, qubits, range(k))
    out = np.tensordot(mat, moved.reshape((2,) * k + (-1,)),
                       axes=(list(range(k, 2 * k)), list(range(k))))
    return np.moveaxis(out.reshape(moved.shape), range(k), qubits).reshape(-1)


def _np_prob0(psi, q, nq):
    t = np.abs(psi.reshape([2] * nq)) ** 2
    return float(np.moveaxis(t, q, 0)[0].sum())


def _np_project(psi, q, outcome, norm, nq):
    t = psi.reshape([2] * nq)
    m = np.moveaxis(t, q, 0)
    m[1 - outcome] = 0.0
    m[outcome] /= math.sqrt(norm)
    return t.reshape(-1)


def _run_numpy(comp: CompiledCircuit, noise: NoiseModel, uniforms, outbits, check_norm=False):
    nq = comp.nq
    psi = np.zeros(2 ** nq, dtype=complex)
    psi[0] = 1.0
    uidx = 0
    for q in range(nq):
        if noise.p_spam > 0.0 and uniforms[uidx] < noise.p_spam:
            psi = _np_apply(psi, _PAULI_MATS[1], (q,), nq)
        uidx += 1
    for i in range(comp.opcodes.size):
        op = comp.opcodes[i]
        if op == K.OP_BARRIER:
            pass
        elif op == K.OP_G1:
            psi = _np_apply(psi, comp.mats[i, :4].reshape(2, 2), (int(comp.q0[i]),), nq)
            u = uniforms[uidx]
            uidx += 1
            if u < noise.p1:
                j = min(int(u / noise.p1 * 3.0), 2)
                psi = _np_apply(psi, _PAULI_MATS[j + 1], (int(comp.q0[i]),), nq)
        elif op == K.OP_G2:
            qs = (int(comp.q0[i]), int(comp.q1[i]))
            psi = _np_apply(psi, comp.mats[i].reshape(4, 4), qs, nq)
            u = uniforms[uidx]
            uidx += 1
            if u < noise.p2:
                j = min(int(u / noise.p2 * 15.0), 14)
                pa, pb = (j + 1) >> 2, (j + 1) & 3
                if pa:
                    psi = _np_apply(psi, _PAULI_MATS[pa], (qs[0],), nq)
                if pb:
                    psi = _np_apply(psi, _PAULI_MATS[pb], (qs[1],), nq)
        elif op == K.OP_MEASURE:
            q = int(comp.q0[i])
            p0 = _np_prob0(psi, q, nq)
            u = uniforms[uidx]
            uidx += 1
            outcome = 0 if u < p0 else 1
            psi = _np_project(psi, q, outcome, p0 if outcome == 0 else 1.0 - p0, nq)
            us = uniforms[uidx]
            uidx += 1
            if noise.p_spam > 0.0 and us < noise.p_spam:
                outcome = 1 - outcome
            outbits[comp.cbits[i]] = outcome
        elif op == K.OP_RESET:
            q = int(comp.q0[i])
            p0 = _np_prob0(psi, q, nq)
            u = uniforms[uidx]
            uidx += 1
            outcome = 0 if u < p0 else 1
            psi = _np_project(psi, q, outcome, p0 if outcome == 0 else 1.0 - p0, nq)
            if outcome == 1:
                psi = _np_apply(psi, _PAULI_MATS[1], (q,), nq)
        if check_norm:
            norm = float(np.sum(np.abs(psi) ** 2))
            assert abs(norm - 1.0) < 1e-9, f"norm drifted to {norm} after op {i}"
    return psi


# ---------------------------------------------------------------------------
# Fault sampling (exposed for distribution tests)
# ---------------------------------------------------------------------------

_TWO_QUBIT_PAULIS = [(p // 4, p % 4) for p in range(1, 16)]


def sample_gate_fault(kind: str, noise: NoiseModel, stream: np.random.Generator):
    """Sample the Pauli fault following one ideal gate; None when no fault fires.

    Returns a dict {qubit slot -> 'X'|'Y'|'Z'} over the gate's operand slots.
    """
    names = {1: "X", 2: "Y", 3: "Z"}
    if kind in ONE_QUBIT_KINDS:
        u = stream.random()
        if u >= noise.p1:
            return None
        j = min(int(u / noise.p1 * 3.0), 2)
        return {0: names[j + 1]}
    if kind in TWO_QUBIT_KINDS:
        u = stream.random()
        if u >= noise.p2:
            return None
        j = min(int(u / noise.p2 * 15.0), 14)
        pa, pb = _TWO_QUBIT_PAULIS[j]
        out = {}
        if pa:
            out[0] = names[pa]
        if pb:
            out[1] = names[pb]
        return out
    raise CircuitError(f"{kind} is not a physical gate")


# ---------------------------------------------------------------------------
# Shot runners
# ---------------------------------------------------------------------------

def run_shot(circuit: Circuit, noise: NoiseModel, stream: np.random.Generator,
             engine: str = "numba") -> ShotRecord:
    """Simulate one trajectory, drawing all randomness from `stream`."""
    comp = circuit if isinstance(circuit, CompiledCircuit) else CompiledCircuit(circuit)
    uniforms = stream.random(comp.n_uniforms)
    bits = np.zeros(comp.n_clbits if comp.n_clbits else 1, np.uint8)
    if engine == "numba" and K.HAVE_NUMBA:
        psi = np.empty(2 ** comp.nq, np.complex128)
        K.run_trajectory(comp.nq, comp.opcodes, comp.q0, comp.q1, comp.cbits, comp.mats,
                         noise.p1, noise.p2, noise.p_spam, uniforms, psi, bits)
    else:
        _run_numpy(comp, noise, uniforms, bits)
    return ShotRecord(comp.registers, bits[:comp.n_clbits])


def run_shots(circuit: Circuit, noise: NoiseModel, n_shots: int, seed: int,
              engine: str = "numba") -> ShotTable:
    """n_shots independent trajectories; deterministic in (circuit, noise, seed)."""
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    comp = circuit if isinstance(circuit, CompiledCircuit) else CompiledCircuit(circuit)
    bits = np.zeros((n_shots, max(comp.n_clbits, 1)), np.uint8)
    use_numba = engine == "numba" and K.HAVE_NUMBA
    chunk = max(1, min(n_shots, _BATCH_AMP_BUDGET // (2 ** comp.nq)))
    for start in range(0, n_shots, chunk):
        stop = min(start + chunk, n_shots)
        uniforms = np.empty((stop - start, comp.n_uniforms))
        for s in range(start, stop):
            uniforms[s - start] = stream_for(seed, s).random(comp.n_uniforms)
        if use_numba:
            K.run_batch(comp.nq, comp.opcodes, comp.q0, comp.q1, comp.cbits, comp.mats,
                        noise.p1, noise.p2, noise.p_spam, uniforms, bits[start:stop])
        else:
            for s in range(start, stop):
                _run_numpy(comp, noise, uniforms[s - start], bits[s])
    return ShotTable(comp.registers, bits[:, :comp.n_clbits])


# ---------------------------------------------------------------------------
# Exact noiseless readout distribution
# ---------------------------------------------------------------------------

def exact_final_distribution(circuit: Circuit):
    """Joint distribution of the trailing measurement block of a noiseless run.

    Requires every measurement before the final measure-only suffix to have a
    deterministic outcome (true for the fault-tolerant gadgets when no faults
    are injected).  Returns (fixed_bits, order, probs): fixed_bits maps
    (creg, cbit) of mid-circuit measurements to their outcome; order lists the
    (creg, cbit) pairs of the final block, most-significant first; probs is the
    length 2**len(order) joint distribution.
    """
    nq = circuit.qubit_count
    if nq > STATEVECTOR_MAX_QUBITS:
        raise CircuitError("circuit too large")
    instrs = circuit.instructions
    tail = len(instrs)
    while tail > 0 and instrs[tail - 1].kind in ("MEASURE", "BARRIER"):
        tail -= 1
    psi = np.zeros(2 ** nq, dtype=complex)
    psi[0] = 1.0
    fixed = {}
    for instr in instrs[:tail]:
        if instr.kind == "BARRIER":
            continue
        if instr.kind == "MEASURE":
            q = instr.qubits[0]
            p0 = _np_prob0(psi, q, nq)
            if p0 > 1.0 - 1e-9:
                outcome = 0
            elif p0 < 1e-9:
                outcome = 1
            else:
                raise CircuitError("mid-circuit measurement is not deterministic")
            psi = _np_project(psi, q, outcome, p0 if outcome == 0 else 1.0 - p0, nq)
            fixed[(instr.creg, instr.cbit)] = outcome
            continue
        if instr.kind == "RESET":
            q = instr.qubits[0]
            p0 = _np_prob0(psi, q, nq)
            if p0 > 1.0 - 1e-9:
                psi = _np_project(psi, q, 0, p0, nq)
            elif p0 < 1e-9:
                psi = _np_project(psi, q, 1, 1.0 - p0, nq)
                psi = _np_apply(psi, _PAULI_MATS[1], (q,), nq)
            else:
                raise CircuitError("reset of an entangled qubit is not deterministic")
            continue
        psi = _np_apply(psi, gate_matrix(instr.kind, instr.params), instr.qubits, nq)
    final = [ins for ins in instrs[tail:] if ins.kind == "MEASURE"]
    order = [(ins.creg, ins.cbit) for ins in final]
    qubits = [ins.qubits[0] for ins in final]
    if len(set(qubits)) != len(qubits):
        raise CircuitError("final block measures a qubit twice")
    t = (np.abs(psi) ** 2).reshape([2] * nq)
    moved = np.moveaxis(t, qubits, range(len(qubits)))
    probs = moved.sum(axis=tuple(range(len(qubits), nq)))
    return fixed, order, probs.reshape(-1)
