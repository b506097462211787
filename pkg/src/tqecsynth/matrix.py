"""Integer matrix encoding of ICM circuits.

Rows are qubits; the first and last columns carry initialisation and
measurement codes, and each interior column holds exactly one CNOT as a
control/target code pair. The geometry generator walks this matrix column
by column.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, GateKind, InitBasis, MeasBasis

# Cell code table. Negative codes mark row boundaries, positive codes mark
# CNOT roles, 0 is an empty cell.
INPUT_OPEN = -100
OUTPUT_OPEN = -101
INIT_A = -99
MEAS_A = -98       # terminal of an |A>-initialised row
INIT_Y = -97
MEAS_Y = -96       # terminal of a |Y>-initialised row
INIT_ZERO = -95
INIT_PLUS = -94
MEAS_Z = -93
MEAS_X = -92
CONTROL = 1
TARGET = 2
EMPTY = 0

_INIT_CODE = {
    InitBasis.OPEN: INPUT_OPEN,
    InitBasis.A: INIT_A,
    InitBasis.Y: INIT_Y,
    InitBasis.ZERO: INIT_ZERO,
    InitBasis.PLUS: INIT_PLUS,
}
_CODE_INIT = {v: k for k, v in _INIT_CODE.items()}

_MEAS_CODE = {
    MeasBasis.OPEN: OUTPUT_OPEN,
    MeasBasis.Z: MEAS_Z,
    MeasBasis.X: MEAS_X,
}

INPUT_CODES = frozenset(_INIT_CODE.values())
OUTPUT_CODES = frozenset(_MEAS_CODE.values()) | {MEAS_A, MEAS_Y}


@dataclass(frozen=True)
class MatrixRep:
    """Matrix form of an ICM circuit; ``cells`` has shape (qubits, cnots + 2)."""

    cells: np.ndarray

    def __post_init__(self) -> None:
        if self.cells.ndim != 2 or self.cells.shape[1] < 2:
            raise ValueError("matrix needs at least input and output columns")

    @property
    def qubit_count(self) -> int:
        return self.cells.shape[0]

    @property
    def cnot_count(self) -> int:
        return self.cells.shape[1] - 2

    def column_cnot(self, col: int) -> tuple[int, int]:
        """Return (control_row, target_row) of interior column ``col`` (0-based)."""
        column = self.cells[:, col + 1]
        ctrl = np.flatnonzero(column == CONTROL)
        tgt = np.flatnonzero(column == TARGET)
        if len(ctrl) != 1 or len(tgt) != 1:
            raise ValueError(f"malformed CNOT column {col}")
        return int(ctrl[0]), int(tgt[0])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MatrixRep) and np.array_equal(self.cells, other.cells)


def _terminal_code(init: InitBasis, m: MeasBasis) -> int:
    # Injection-initialised rows terminate with their protocol marker: the
    # actual basis is fixed by the teleportation (or selected at run time
    # for the T block), not by a plain Z/X tag.
    if init is InitBasis.A:
        return MEAS_A
    if init is InitBasis.Y:
        return MEAS_Y
    return _MEAS_CODE[m]


def to_matrix(circ: Circuit) -> MatrixRep:
    """Encode an ICM circuit as its integer matrix."""
    if not circ.icm:
        raise ValueError("to_matrix requires an ICM circuit")
    n = circ.qubit_count
    k = len(circ.gates)
    cells = np.zeros((n, k + 2), dtype=np.int64)
    for q in range(n):
        cells[q, 0] = _INIT_CODE[circ.inits[q]]
        cells[q, -1] = _terminal_code(circ.inits[q], circ.meas[q])
    for col, g in enumerate(circ.gates):
        if g.kind is not GateKind.CNOT:
            raise ValueError("ICM circuit may only contain CNOT gates")
        cells[g.control, col + 1] = CONTROL
        cells[g.target, col + 1] = TARGET
    return MatrixRep(cells)


def from_matrix(m: MatrixRep) -> Circuit:
    """Decode a matrix back into an ICM circuit.

    Protocol terminals decode to their canonical bases: an |A> row measures
    in Z (the default T-block pattern) and a |Y> row measures in X.
    """
    n = m.qubit_count
    inits = []
    meas = []
    for q in range(n):
        in_code = int(m.cells[q, 0])
        out_code = int(m.cells[q, -1])
        if in_code not in _CODE_INIT:
            raise ValueError(f"row {q}: unknown input code {in_code}")
        if out_code not in OUTPUT_CODES:
            raise ValueError(f"row {q}: unknown output code {out_code}")
        inits.append(_CODE_INIT[in_code])
        if out_code == MEAS_A:
            meas.append(MeasBasis.Z)
        elif out_code == MEAS_Y:
            meas.append(MeasBasis.X)
        elif out_code == OUTPUT_OPEN:
            meas.append(MeasBasis.OPEN)
        elif out_code == MEAS_Z:
            meas.append(MeasBasis.Z)
        else:
            meas.append(MeasBasis.X)
    gates = [Gate(GateKind.CNOT, m.column_cnot(c)) for c in range(m.cnot_count)]
    return Circuit(n, tuple(inits), tuple(gates), tuple(meas), icm=True)
