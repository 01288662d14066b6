"""Decomposition of matchgates into elementary two-qubit circuits.

Circuits list their operations in application order (the first op acts
first). Qubit 0 is the top wire (most significant bit).
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .linalg import H, I2, as_unitary, euler_xzx, phase_distance, rx, rz
from .matchgate import Matchgate, compose_matchgate

RESIDUAL_TOL = 1e-9

LOCAL1 = "LOCAL1"
CNOT = "CNOT"
CU = "CU"
CZ_THETA = "CZ_THETA"
KINDS = (LOCAL1, CNOT, CU, CZ_THETA)

_P0 = np.diag([1, 0]).astype(complex)
_P1 = np.diag([0, 1]).astype(complex)


@dataclass(frozen=True, eq=False)
class GateOp:
    kind: str
    qubits: tuple
    matrix: Optional[np.ndarray] = None
    theta: Optional[float] = None

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if self.kind not in KINDS:
            raise ValidationError(f"unknown op kind {self.kind!r}")
        if any(q not in (0, 1) for q in qubits):
            raise ValidationError(f"qubit indices must be 0 or 1, got {qubits}")
        if self.kind == LOCAL1:
            if len(qubits) != 1 or self.matrix is None:
                raise ValidationError("LOCAL1 needs one qubit and a 2x2 matrix")
        else:
            if len(qubits) != 2 or qubits[0] == qubits[1]:
                raise ValidationError(f"{self.kind} needs two distinct qubits")
        if self.kind == CU and self.matrix is None:
            raise ValidationError("CU needs a 2x2 matrix")
        if self.kind == CZ_THETA and self.theta is None:
            raise ValidationError("CZ_THETA needs theta")
        if self.matrix is not None:
            object.__setattr__(self, "matrix", as_unitary(self.matrix, 2))

    def unitary(self):
        """4x4 matrix of this op on the two-qubit register."""
        if self.kind == LOCAL1:
            (q,) = self.qubits
            return np.kron(self.matrix, I2) if q == 0 else np.kron(I2, self.matrix)
        if self.kind == CZ_THETA:
            return np.diag([1, 1, 1, np.exp(1j * self.theta)])
        control, _ = self.qubits
        target_op = np.array([[0, 1], [1, 0]], dtype=complex) if self.kind == CNOT else self.matrix
        if control == 0:
            return np.kron(_P0, I2) + np.kron(_P1, target_op)
        return np.kron(I2, _P0) + np.kron(target_op, _P1)


def local(q, u):
    return GateOp(LOCAL1, (q,), matrix=u)


def cnot(control, target):
    return GateOp(CNOT, (control, target))


def cu(control, target, u):
    return GateOp(CU, (control, target), matrix=u)


def cz_theta(theta):
    return GateOp(CZ_THETA, (0, 1), theta=float(theta))


@dataclass(frozen=True, eq=False)
class Circuit:
    ops: tuple = ()
    global_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))

    def count(self, kind):
        return sum(op.kind == kind for op in self.ops)


def simulate_circuit(circuit):
    u = np.eye(4, dtype=complex)
    for op in circuit.ops:
        if not isinstance(op, GateOp):
            raise ValidationError(f"malformed op {op!r}")
        u = op.unitary() @ u
    return np.exp(1j * circuit.global_phase) * u


@dataclass(frozen=True, eq=False)
class GeneralDecomposition:
    circuit: Circuit
    u: np.ndarray
    residual: float


def decompose_general(m):
    """CNOT(0->1), a on the top wire, controlled-(b a^-1) from the bottom wire,
    CNOT(0->1).

    The first CNOT writes the input parity onto the bottom wire, which then
    selects whether the controlled gate turns ``a`` into ``b``.
    """
    if m.relaxed:
        raise ValidationError("relaxed matchgates (det(a) != det(b)) cannot be decomposed")
    u = m.b @ m.a.conj().T
    circuit = Circuit((cnot(0, 1), local(0, m.a), cu(1, 0, u), cnot(0, 1)))
    residual = phase_distance(simulate_circuit(circuit), compose_matchgate(m))
    if residual > RESIDUAL_TOL:
        raise AssertionError(f"general decomposition residual {residual:.3e}")
    return GeneralDecomposition(circuit, u, residual)


@dataclass(frozen=True, eq=False)
class SymmetricDecomposition:
    """``e^{i phase} (post_top x post_bottom) CZ_theta (pre_top x pre_bottom)``."""

    theta: float
    pre_top: np.ndarray
    pre_bottom: np.ndarray
    post_top: np.ndarray
    post_bottom: np.ndarray
    phase: float
    alpha: float
    beta: float
    residual: float

    def circuit(self):
        return Circuit(
            (
                local(0, self.pre_top),
                local(1, self.pre_bottom),
                cz_theta(self.theta),
                local(0, self.post_top),
                local(1, self.post_bottom),
            ),
            self.phase,
        )

    def matrix(self):
        return simulate_circuit(self.circuit())


def decompose_symmetric(m):
    """Single-CZ_theta circuit for a symmetric matchgate G_AA.

    Writing ``H A H = e^{i phi} X_alpha Z_{-theta/2} X_beta``, flipping both
    CNOTs with Hadamards and commuting the X rotations through them leaves
    ``exp(i theta/4 Z(x)Z)``, which is CZ_theta dressed by Z_{-theta/2} on
    both wires and a phase ``-theta/4``. When CZ_theta is the identity the
    pre-rotations are merged into the post-rotations.
    """
    if not m.is_symmetric:
        raise ValidationError("symmetric decomposition needs a == b")
    e = euler_xzx(H @ m.a @ H)
    theta = e.theta
    zc = rz(-theta / 2)
    pre_top, pre_bottom = rx(e.beta) @ H, H.copy()
    post_top, post_bottom = H @ rx(e.alpha) @ zc, H @ zc
    phase = e.phase - theta / 4
    if abs(np.exp(1j * theta) - 1) < 1e-12:
        post_top, post_bottom = post_top @ pre_top, post_bottom @ pre_bottom
        pre_top, pre_bottom = I2.copy(), I2.copy()
    dec = SymmetricDecomposition(theta, pre_top, pre_bottom, post_top, post_bottom, phase, e.alpha, e.beta, 0.0)
    residual = phase_distance(dec.matrix(), compose_matchgate(m))
    if residual > RESIDUAL_TOL:
        raise AssertionError(f"symmetric decomposition residual {residual:.3e}")
    return SymmetricDecomposition(
        theta, pre_top, pre_bottom, post_top, post_bottom, phase, e.alpha, e.beta, residual
    )


def random_matchgate(rng, symmetric=False):
    """Seeded random matchgate with Haar blocks and matched determinants."""
    from .linalg import haar_unitary

    a = haar_unitary(2, rng)
    if symmetric:
        return Matchgate(a, a.copy())
    b = haar_unitary(2, rng)
    # rescale b so that det(b) == det(a)
    b = b * np.sqrt(np.linalg.det(a) / np.linalg.det(b))
    return Matchgate(a, b)
