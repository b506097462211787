"""Dense state-vector oracle for decomposition and ICM-conversion checks.

Little-endian by row index: row r is tensor axis r. Capped at 12 qubits;
teleportation blocks are verified per gate instance, so the cap is never a
constraint in practice. Measurement outcomes are driven by an outcome
source, either an exhaustive branch enumeration or a seeded sampler, which
keeps every check deterministic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import pi, sqrt

import numpy as np

from .circuit import Circuit, GateKind, InitBasis, MeasBasis
from .icm import DAGGERED, IcmConversion, PauliFrame, TemplateInstance, select_pattern

QUBIT_BUDGET = 12
EXHAUSTIVE_BRANCH_CAP = 1024
_FEASIBLE_TOL = 1e-12

_SQRT2_INV = 1 / sqrt(2)
_T_PHASE = np.exp(1j * pi / 4)

_MATRICES: dict[GateKind, np.ndarray] = {
    GateKind.P: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, _T_PHASE]], dtype=complex),
    # Printed without normalisation in some sources; the 1/sqrt(2) factor is
    # forced by unitarity.
    GateKind.V: _SQRT2_INV * np.array([[1, -1j], [-1j, 1]], dtype=complex),
    GateKind.CNOT: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
}
_MATRICES[GateKind.PDG] = _MATRICES[GateKind.P].conj().T
_MATRICES[GateKind.TDG] = _MATRICES[GateKind.T].conj().T
_MATRICES[GateKind.VDG] = _MATRICES[GateKind.V].conj().T

#: Reference unitaries for composite kinds, independent of any decomposition.
H_MATRIX = _SQRT2_INV * np.array([[1, 1], [1, -1]], dtype=complex)
TOFFOLI_MATRIX = np.eye(8, dtype=complex)
TOFFOLI_MATRIX[[6, 7], :] = TOFFOLI_MATRIX[[7, 6], :]

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_INIT_VECS = {
    InitBasis.ZERO: np.array([1, 0], dtype=complex),
    InitBasis.PLUS: np.array([1, 1], dtype=complex) * _SQRT2_INV,
    InitBasis.Y: np.array([1, 1j], dtype=complex) * _SQRT2_INV,
    InitBasis.A: np.array([1, _T_PHASE], dtype=complex) * _SQRT2_INV,
}


def gate_matrix(kind: GateKind) -> np.ndarray:
    """Unitary of a non-composite gate kind (2x2, or 4x4 for CNOT)."""
    if kind not in _MATRICES:
        raise ValueError(f"{kind.value} is composite; it has no primitive matrix")
    return _MATRICES[kind].copy()


def init_vector(basis: InitBasis, conjugate: bool = False) -> np.ndarray:
    if basis is InitBasis.OPEN:
        raise ValueError("open inputs have no fixed vector")
    v = _INIT_VECS[basis]
    return v.conj() if conjugate else v


class OutcomesExhausted(RuntimeError):
    """The forced outcome list ran out before all measurements were served."""


class InfeasibleBranch(RuntimeError):
    """A forced outcome has (numerically) zero probability."""


class OutcomeSource:
    def next_bit(self, p_one: float) -> int:
        raise NotImplementedError


@dataclass
class ForcedOutcomes(OutcomeSource):
    bits: tuple[int, ...]
    _used: int = 0

    def next_bit(self, p_one: float) -> int:
        if self._used >= len(self.bits):
            raise OutcomesExhausted(f"needed more than {len(self.bits)} outcomes")
        m = self.bits[self._used]
        self._used += 1
        if (p_one if m else 1.0 - p_one) < _FEASIBLE_TOL:
            raise InfeasibleBranch(f"outcome {m} has probability ~0")
        return m


@dataclass
class SampledOutcomes(OutcomeSource):
    rng: np.random.Generator
    count: int = 0

    def next_bit(self, p_one: float) -> int:
        self.count += 1
        return int(self.rng.random() < p_one)


@dataclass(frozen=True)
class MeasurementEvent:
    row: int
    basis: MeasBasis
    raw: int
    effective: int


def _as_tensor(state: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(state, dtype=complex).reshape((2,) * n)


def apply_1q(state: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(state, axis, 0)
    moved = np.tensordot(u, moved, axes=([1], [0]))
    return np.moveaxis(moved, 0, axis)


def apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    out = state.copy()
    idx10 = [slice(None)] * state.ndim
    idx11 = [slice(None)] * state.ndim
    idx10[control] = 1
    idx11[control] = 1
    idx10[target] = 0
    idx11[target] = 1
    out[tuple(idx10)], out[tuple(idx11)] = state[tuple(idx11)], state[tuple(idx10)]
    return out


def apply_toffoli(state: np.ndarray, c1: int, c2: int, target: int) -> np.ndarray:
    out = state.copy()
    lo = [slice(None)] * state.ndim
    hi = [slice(None)] * state.ndim
    lo[c1] = hi[c1] = 1
    lo[c2] = hi[c2] = 1
    lo[target] = 0
    hi[target] = 1
    out[tuple(lo)], out[tuple(hi)] = state[tuple(hi)], state[tuple(lo)]
    return out


def measure(state: np.ndarray, axis: int, basis: MeasBasis,
            outcomes: OutcomeSource) -> tuple[np.ndarray, int]:
    """Collapse ``axis`` in the given basis; the axis is left in |outcome>.

    X measurements rotate the outcome into the computational basis so the
    dead wire can be indexed out later.
    """
    if basis is MeasBasis.X:
        state = apply_1q(state, H_MATRIX, axis)
    sl0 = [slice(None)] * state.ndim
    sl1 = [slice(None)] * state.ndim
    sl0[axis] = 0
    sl1[axis] = 1
    p_one = float(np.sum(np.abs(state[tuple(sl1)]) ** 2))
    m = outcomes.next_bit(p_one)
    out = np.zeros_like(state)
    kept = state[tuple(sl1 if m else sl0)]
    norm = sqrt(p_one if m else 1.0 - p_one)
    out[tuple(sl1 if m else sl0)] = kept / norm
    return out, m


def assemble_state(
    n: int,
    inits: tuple[InitBasis, ...],
    input_state: np.ndarray | None,
    conjugate_rows: frozenset[int] = frozenset(),
) -> np.ndarray:
    """Tensor fixed initialisations with the open-input state, in row order."""
    open_rows = [r for r in range(n) if inits[r] is InitBasis.OPEN]
    fixed_rows = [r for r in range(n) if inits[r] is not InitBasis.OPEN]
    k = len(open_rows)
    if k:
        if input_state is None:
            raise ValueError(f"{k} open input(s) need an input state")
        inp = np.asarray(input_state, dtype=complex).reshape((2,) * k)
    else:
        inp = np.ones((), dtype=complex)
    fixed = np.ones((), dtype=complex)
    for r in fixed_rows:
        fixed = np.multiply.outer(fixed, init_vector(inits[r], r in conjugate_rows))
    full = np.multiply.outer(inp, fixed)
    order = open_rows + fixed_rows
    axes = [order.index(r) for r in range(n)]
    return np.transpose(full, axes)


def _conjugate_rows(conv: IcmConversion) -> frozenset[int]:
    rows = set()
    for inst in conv.instances:
        if inst.kind in DAGGERED:
            rows.update(r for r, _ in inst.injections)
    return frozenset(rows)


@dataclass
class SimResult:
    state: np.ndarray                 # tensor of shape (2,)*n, dead axes collapsed
    frame: PauliFrame
    log: tuple[MeasurementEvent, ...]
    measured: dict[int, int]          # row -> outcome (raw)

    def free_state(self, rows: list[int]) -> np.ndarray:
        """Subtensor over ``rows`` (in the given order), dead axes indexed out."""
        n = self.state.ndim
        idx: list[object] = [slice(None)] * n
        for r, m in self.measured.items():
            idx[r] = m
        sub = self.state[tuple(idx)]
        remaining = [r for r in range(n) if r not in self.measured]
        axes = [remaining.index(r) for r in rows]
        extra = [i for i in range(len(remaining)) if remaining[i] not in rows]
        if extra:
            raise ValueError("free_state must cover all unmeasured rows")
        return np.transpose(sub, axes)

    def frame_corrected(self, rows: list[int]) -> np.ndarray:
        out = self.free_state(rows)
        for pos, r in enumerate(rows):
            if r in self.frame.z_rows:
                out = apply_1q(out, _Z, pos)
            if r in self.frame.x_rows:
                out = apply_1q(out, _X, pos)
        return out


def simulate_plain(circ: Circuit, input_state: np.ndarray | None = None) -> np.ndarray:
    """Run a measurement-free gate circuit; returns the final state tensor."""
    if any(b is not MeasBasis.OPEN for b in circ.meas):
        raise ValueError("plain simulation requires open outputs")
    state = assemble_state(circ.qubit_count, circ.inits, input_state)
    for g in circ.gates:
        if g.kind is GateKind.CNOT:
            state = apply_cnot(state, g.qubits[0], g.qubits[1])
        elif g.kind is GateKind.TOFFOLI:
            state = apply_toffoli(state, *g.qubits)
        elif g.kind is GateKind.H:
            state = apply_1q(state, H_MATRIX, g.qubits[0])
        else:
            state = apply_1q(state, _MATRICES[g.kind], g.qubits[0])
    return state


def to_unitary(circ: Circuit) -> np.ndarray:
    """Full unitary of a measurement-free circuit (basis-column simulation)."""
    n = circ.qubit_count
    if n > QUBIT_BUDGET:
        raise ValueError(f"unitary extraction capped at {QUBIT_BUDGET} qubits")
    dim = 2 ** n
    u = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        basis = np.zeros(dim, dtype=complex)
        basis[col] = 1.0
        inits = tuple(InitBasis.OPEN for _ in range(n))
        state = simulate_plain(
            Circuit(n, inits, circ.gates, circ.meas, icm=circ.icm), basis)
        u[:, col] = state.reshape(-1)
    return u


def simulate(
    target: Circuit | IcmConversion,
    input_state: np.ndarray | None = None,
    outcomes: OutcomeSource | None = None,
) -> SimResult:
    """Simulate a circuit or an ICM conversion.

    Plain circuits are applied unitarily (frame stays identity). ICM
    conversions execute each teleportation block with outcome-driven
    measurements, returning the tracked Pauli frame and the outcome log.
    """
    if isinstance(target, Circuit):
        state = simulate_plain(target, input_state)
        return SimResult(state, PauliFrame.identity(), (), {})
    return _simulate_icm(target, input_state, outcomes or SampledOutcomes(np.random.default_rng(0)))


def _simulate_icm(conv: IcmConversion, input_state: np.ndarray | None,
                  outcomes: OutcomeSource) -> SimResult:
    circ = conv.circuit
    n = circ.qubit_count
    if n > QUBIT_BUDGET:
        raise ValueError(f"simulation capped at {QUBIT_BUDGET} qubits")
    state = assemble_state(n, circ.inits, input_state, _conjugate_rows(conv))
    x = bytearray(n)
    z = bytearray(n)
    log: list[MeasurementEvent] = []
    measured: dict[int, int] = {}

    def do_measure(row: int, basis: MeasBasis) -> tuple[int, int]:
        nonlocal state
        state, m = measure(state, row, basis, outcomes)
        measured[row] = m
        # A pending X flips Z outcomes, a pending Z flips X outcomes; the
        # effective outcome is the one the ideal (frame-free) circuit saw.
        eff = m ^ (x[row] if basis is MeasBasis.Z else z[row])
        log.append(MeasurementEvent(row, basis, m, eff))
        x[row] = 0
        z[row] = 0
        return m, eff

    scripts = {max(inst.cnot_slots): inst for inst in conv.instances}

    for gi, g in enumerate(circ.gates):
        c, t = g.qubits
        state = apply_cnot(state, c, t)
        x[t] ^= x[c]
        z[c] ^= z[t]
        inst = scripts.get(gi)
        if inst is not None:
            _run_template(inst, do_measure, x, z)

    for row in range(n):
        if row not in measured and circ.meas[row] in (MeasBasis.Z, MeasBasis.X):
            do_measure(row, circ.meas[row])

    frame = PauliFrame(
        frozenset(r for r in range(n) if x[r] and r not in measured),
        frozenset(r for r in range(n) if z[r] and r not in measured),
    )
    return SimResult(state, frame, tuple(log), measured)


def _run_template(inst: TemplateInstance, do_measure, x: bytearray, z: bytearray) -> None:
    # Frame pendings have already been conjugated through the block's CNOTs
    # by the main loop, so the rules below work on effective outcomes only.
    src = inst.source_row
    out = inst.output_row
    kind = inst.kind
    if kind in (GateKind.P, GateKind.PDG):
        _, eff = do_measure(src, MeasBasis.Z)
        x[out] ^= eff
        z[out] ^= eff
    elif kind in (GateKind.V, GateKind.VDG):
        _, eff = do_measure(src, MeasBasis.X)
        x[out] ^= 1 ^ eff
        z[out] ^= eff
    else:
        _, eff0 = do_measure(src, MeasBasis.Z)
        pattern = select_pattern(inst, eff0)
        effs = []
        for row in inst.rows[1:5]:
            _, eff = do_measure(row, pattern[row])
            effs.append(eff)
        e1, e2, e3, e4 = effs
        if eff0:
            # correction path: the wire routes through the |Y> row, whose
            # teleport supplies the pending P and leaves a Pauli-Y byproduct
            x[out] ^= 1 ^ e1 ^ e4
            z[out] ^= 1 ^ e1 ^ e2 ^ e3
        else:
            x[out] ^= e2 ^ e3
            z[out] ^= e1 ^ e4


def measurement_count(conv: IcmConversion) -> int:
    fixed = sum(
        1 for r in range(conv.circuit.qubit_count)
        if conv.circuit.meas[r] in (MeasBasis.Z, MeasBasis.X)
        and not any(r in inst.rows[:5] if inst.selective else r == inst.source_row
                    for inst in conv.instances)
    )
    per_template = sum(5 if inst.selective else 1 for inst in conv.instances)
    return fixed + per_template


def run_branches(
    conv: IcmConversion,
    input_state: np.ndarray | None,
    trials_rng: np.random.Generator | None = None,
    sample_count: int = 64,
):
    """Yield SimResults over outcome branches.

    Exhaustive when the branch count is at most EXHAUSTIVE_BRANCH_CAP,
    otherwise ``sample_count`` seeded samples. Infeasible branches are
    skipped.
    """
    m = measurement_count(conv)
    if 2 ** m <= EXHAUSTIVE_BRANCH_CAP:
        for bits in itertools.product((0, 1), repeat=m):
            try:
                yield _simulate_icm(conv, input_state, ForcedOutcomes(bits))
            except InfeasibleBranch:
                continue
    else:
        rng = trials_rng or np.random.default_rng(0)
        for _ in range(sample_count):
            yield _simulate_icm(conv, input_state, SampledOutcomes(rng))


def random_product_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random single-qubit states, tensored."""
    state = np.ones((), dtype=complex)
    for _ in range(n):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = v / np.linalg.norm(v)
        state = np.multiply.outer(state, v)
    return state


def _open_arity(target: Circuit | IcmConversion) -> tuple[int, int]:
    if isinstance(target, Circuit):
        return len(target.open_inputs()), len(target.open_outputs())
    circ = target.circuit
    ins = sum(1 for r, _ in target.qubit_rows if circ.inits[r] is InitBasis.OPEN)
    outs = sum(1 for _, r in target.qubit_rows if circ.meas[r] is MeasBasis.OPEN)
    return ins, outs


def _output_rows(target: Circuit | IcmConversion) -> list[int]:
    if isinstance(target, Circuit):
        return list(target.open_outputs())
    return [r for _, r in target.qubit_rows if target.circuit.meas[r] is MeasBasis.OPEN]


def check_equivalence(
    a: Circuit | IcmConversion,
    b: Circuit | IcmConversion,
    trials: int = 8,
    seed: int = 7,
) -> float:
    """Maximum infidelity between two circuits over random product inputs.

    The reference side is simulated unitarily; an ICM side is expanded over
    its exhaustive (or sampled) outcome branches with the Pauli frame
    applied. Both sides must agree on open input/output arity.
    """
    arity_a, arity_b = _open_arity(a), _open_arity(b)
    if arity_a != arity_b:
        raise ValueError(f"open-arity mismatch: {arity_a} vs {arity_b}")
    n_in, _ = arity_a
    size_a = a.qubit_count if isinstance(a, Circuit) else a.circuit.qubit_count
    size_b = b.qubit_count if isinstance(b, Circuit) else b.circuit.qubit_count
    if max(size_a, size_b) > QUBIT_BUDGET:
        raise ValueError(f"qubit budget {QUBIT_BUDGET} exceeded")

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        inp = random_product_state(n_in, rng) if n_in else None
        outs = []
        for side in (a, b):
            rows = _output_rows(side)
            if isinstance(side, Circuit):
                state = simulate_plain(side, inp)
                res = SimResult(state, PauliFrame.identity(), (), {})
                outs.append([res.frame_corrected(rows)])
            else:
                outs.append([
                    r.frame_corrected(rows)
                    for r in run_branches(side, inp, trials_rng=rng)
                ])
        for va in outs[0]:
            for vb in outs[1]:
                overlap = abs(np.vdot(va.reshape(-1), vb.reshape(-1))) ** 2
                worst = max(worst, 1.0 - float(overlap))
    return worst
