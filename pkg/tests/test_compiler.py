import numpy as np
import pytest

from mgforge.compiler import (
    CNOT, CU, CZ_THETA, LOCAL1, Circuit, GateOp, cz_theta, decompose_general,
    decompose_symmetric, local, random_matchgate, simulate_circuit,
)
from mgforge.errors import ValidationError
from mgforge.linalg import I2, X, phase_distance
from mgforge.matchgate import CZ, Matchgate, compose_matchgate, named_matchgate


def test_general_structure(rng):
    dec = decompose_general(random_matchgate(rng))
    assert [op.kind for op in dec.circuit.ops] == [CNOT, LOCAL1, CU, CNOT]
    assert dec.circuit.count(CNOT) == 2 and dec.circuit.count(CU) == 1
    assert dec.residual < 1e-12


def test_general_roundtrip_many(rng):
    for _ in range(300):
        m = random_matchgate(rng)
        d = decompose_general(m)
        assert phase_distance(simulate_circuit(d.circuit), compose_matchgate(m)) < 1e-9


def test_general_rejects_relaxed():
    with pytest.raises(ValidationError):
        decompose_general(named_matchgate("G_IX"))


def test_symmetric_g_hh():
    dec = decompose_symmetric(named_matchgate("G_HH"))
    assert abs(dec.theta - np.pi) < 1e-9
    assert dec.circuit().count(CZ_THETA) == 1
    assert np.allclose(cz_theta(dec.theta).unitary(), CZ)
    assert dec.residual < 1e-12


def test_symmetric_identity_has_trivial_locals():
    dec = decompose_symmetric(Matchgate(I2, I2))
    assert dec.theta == 0.0
    for u in (dec.pre_top, dec.pre_bottom, dec.post_top, dec.post_bottom):
        assert phase_distance(u, I2) < 1e-12


def test_symmetric_roundtrip_many(rng):
    for _ in range(300):
        m = random_matchgate(rng, symmetric=True)
        d = decompose_symmetric(m)
        assert phase_distance(d.matrix(), compose_matchgate(m)) < 1e-9
        assert 0 <= d.theta <= 2 * np.pi


def test_symmetric_needs_equal_blocks(rng):
    with pytest.raises(ValidationError):
        decompose_symmetric(random_matchgate(rng))


def test_op_validation():
    with pytest.raises(ValidationError):
        GateOp("SWAP", (0, 1))
    with pytest.raises(ValidationError):
        GateOp(CNOT, (0, 0))
    with pytest.raises(ValidationError):
        GateOp(LOCAL1, (2,), matrix=X)
    with pytest.raises(ValidationError):
        GateOp(CZ_THETA, (0, 1))
    with pytest.raises(ValidationError):
        simulate_circuit(Circuit(("not an op",)))


def test_control_on_bottom_wire():
    op = GateOp(CU, (1, 0), matrix=X)
    expected = np.eye(4)[[0, 3, 2, 1]]
    assert np.allclose(op.unitary(), expected)
    assert np.allclose(simulate_circuit(Circuit((local(0, X), local(1, X)))), np.kron(X, X))
