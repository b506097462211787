import numpy as np
import pytest
from hypothesis import given, settings

from conftest import icm_circuits
from tqecsynth.circuit import Circuit, InitBasis, MeasBasis, cnot, parse_circuit
from tqecsynth.matrix import (
    CONTROL, INPUT_OPEN, MEAS_A, MEAS_Z, OUTPUT_OPEN, TARGET, INIT_A,
    MatrixRep, from_matrix, to_matrix,
)


def icm(src: str) -> Circuit:
    circ = parse_circuit(src)
    return Circuit(circ.qubit_count, circ.inits, circ.gates, circ.meas, icm=True)


def test_two_cnot_matrix():
    # rows [[-100,1,0,-101],[-100,2,2,-101],[-100,0,1,-101]]
    m = to_matrix(icm("qubits 3\ncnot 0 1\ncnot 2 1\n"))
    expected = np.array([
        [-100, 1, 0, -101],
        [-100, 2, 2, -101],
        [-100, 0, 1, -101],
    ])
    assert np.array_equal(m.cells, expected)


def test_wireless_single_qubit_matrix():
    m = to_matrix(icm("qubits 1\n"))
    assert np.array_equal(m.cells, np.array([[INPUT_OPEN, OUTPUT_OPEN]]))


def test_t_teleport_pair_matrix():
    # |psi> open input measured Z as CNOT target, |A> ancilla as control
    # carrying the teleported output: hand-applied encoding table.
    circ = Circuit(
        2,
        (InitBasis.OPEN, InitBasis.A),
        (cnot(1, 0),),
        (MeasBasis.Z, MeasBasis.OPEN),
        icm=True,
    )
    m = to_matrix(circ)
    assert m.cells[0].tolist() == [INPUT_OPEN, TARGET, MEAS_Z]
    assert m.cells[1].tolist() == [INIT_A, CONTROL, MEAS_A]


def test_matrix_rejects_non_icm():
    with pytest.raises(ValueError):
        to_matrix(parse_circuit("qubits 1\nt 0\n"))


def test_column_shape_and_codes():
    m = to_matrix(icm("qubits 4\ncnot 0 3\ncnot 2 1\ncnot 1 0\n"))
    assert m.cells.shape == (4, 5)
    for col in range(m.cnot_count):
        column = m.cells[:, col + 1]
        assert (column == CONTROL).sum() == 1
        assert (column == TARGET).sum() == 1
        assert ((column == 0) | (column == CONTROL) | (column == TARGET)).all()


@settings(max_examples=200, deadline=None)
@given(icm_circuits())
def test_round_trip(circ):
    m = to_matrix(circ)
    assert m.cells.shape == (circ.qubit_count, len(circ.gates) + 2)
    back = from_matrix(m)
    assert back.inits == circ.inits
    assert back.meas == circ.meas
    assert back.gates == circ.gates
    assert back.icm


def test_malformed_column_detected():
    cells = np.array([[INPUT_OPEN, 1, OUTPUT_OPEN], [INPUT_OPEN, 1, OUTPUT_OPEN]])
    with pytest.raises(ValueError):
        MatrixRep(cells).column_cnot(0)
