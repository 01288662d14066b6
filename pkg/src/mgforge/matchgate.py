"""Matchgates: two-qubit unitaries acting as ``a`` on the even-parity subspace
span{|00>, |11>} and as ``b`` on the odd-parity subspace span{|01>, |10>}.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import MatchgateError, ValidationError
from .linalg import EQUAL_TOL, H, I2, T, X, Y, Z, as_unitary, phase_distance

DET_TOL = 1e-10
PATTERN_TOL = 1e-8

EVEN = (0, 3)
ODD = (1, 2)


@dataclass(frozen=True, eq=False)
class Matchgate:
    a: np.ndarray
    b: np.ndarray
    relaxed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a", as_unitary(self.a, 2))
        object.__setattr__(self, "b", as_unitary(self.b, 2))
        if not self.relaxed:
            _check_determinants(self.a, self.b)

    @property
    def is_symmetric(self):
        return float(np.linalg.norm(self.a - self.b)) <= EQUAL_TOL

    def matrix(self):
        return compose_matchgate(self)


def _check_determinants(a, b, tol=DET_TOL):
    da, db = np.linalg.det(a), np.linalg.det(b)
    if abs(da - db) > tol:
        raise MatchgateError(
            f"det(a) = {da:.6g} differs from det(b) = {db:.6g}",
            reason="determinant",
            a=a,
            b=b,
        )


def compose_matchgate(m):
    """Embed the blocks of ``m`` into the 4x4 matchgate matrix."""
    if not m.relaxed:
        _check_determinants(m.a, m.b)
    u = np.zeros((4, 4), dtype=complex)
    u[np.ix_(EVEN, EVEN)] = m.a
    u[np.ix_(ODD, ODD)] = m.b
    return u


def _canonical_phase(a):
    ref = a[0, 0] if abs(a[0, 0]) > 1e-12 else a[1, 0]
    return np.exp(-1j * np.angle(ref))


def recognize_matchgate(u, pattern_tol=PATTERN_TOL, det_tol=DET_TOL):
    """Extract the (a, b) blocks of a 4x4 unitary.

    The blocks are returned with a joint phase removed so that ``a[0, 0]`` (or
    ``a[1, 0]`` when ``a[0, 0]`` vanishes) is real and non-negative; the result
    composes back to ``u`` up to that global phase.

    Raises MatchgateError with ``reason="pattern"`` if entries coupling the two
    parity subspaces are nonzero, or ``reason="determinant"`` (blocks attached)
    if only the determinant condition fails.
    """
    u = as_unitary(u, 4)
    mask = np.zeros((4, 4), dtype=bool)
    mask[np.ix_(EVEN, ODD)] = True
    mask[np.ix_(ODD, EVEN)] = True
    leak = float(np.abs(u[mask]).max())
    if leak > pattern_tol:
        raise MatchgateError(
            f"entries coupling parity subspaces are nonzero (max |u_ij| = {leak:.3g})",
            reason="pattern",
        )
    a = u[np.ix_(EVEN, EVEN)]
    b = u[np.ix_(ODD, ODD)]
    phase = _canonical_phase(a)
    a, b = a * phase, b * phase
    _check_determinants(a, b, det_tol)
    return Matchgate(a, b)


# 2x2 gates are returned for single-qubit names, 4x4 for two-qubit names.
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

_SINGLE = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H, "T": T}
_MATCHGATES = {
    "G_HH": (H, H, False),
    "G_XX": (X, X, False),
    "G_TT": (T, T, False),
    "G_ZX": (Z, X, False),
    "G_IX": (I2, X, True),
}
GATE_NAMES = tuple(_SINGLE) + ("CNOT", "CZ", "SWAP") + tuple(_MATCHGATES)
RELAXED_NAMES = frozenset(k for k, v in _MATCHGATES.items() if v[2])


def named_gate(name):
    """Exact matrix of a named gate; see ``GATE_NAMES``."""
    if name in _SINGLE:
        return _SINGLE[name].copy()
    if name == "CNOT":
        return CNOT.copy()
    if name == "CZ":
        return CZ.copy()
    if name == "SWAP":
        return SWAP.copy()
    if name in _MATCHGATES:
        a, b, relaxed = _MATCHGATES[name]
        return compose_matchgate(Matchgate(a, b, relaxed=relaxed))
    raise KeyError(f"unknown gate {name!r}; known: {', '.join(GATE_NAMES)}")


def named_matchgate(name):
    a, b, relaxed = _MATCHGATES[name]
    return Matchgate(a, b, relaxed=relaxed)


def logical_action(g):
    """Single-qubit action of a symmetric matchgate on the logical qubit
    |0>_L = |00>, |1>_L = |11>."""
    if not g.is_symmetric:
        raise ValidationError("logical action is defined for symmetric matchgates (a == b) only")
    u = compose_matchgate(g)
    return u[np.ix_(EVEN, EVEN)]


@dataclass(frozen=True, eq=False)
class LogicalQubit:
    amplitudes: np.ndarray = field(default_factory=lambda: np.array([1, 0], dtype=complex))

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(2)
        if abs(np.linalg.norm(amps) - 1) > 1e-10:
            raise ValidationError("logical qubit amplitudes must have unit norm")
        object.__setattr__(self, "amplitudes", amps)

    def encode(self):
        """Physical two-qubit state alpha|00> + beta|11>."""
        psi = np.zeros(4, dtype=complex)
        psi[0], psi[3] = self.amplitudes
        return psi

    @classmethod
    def decode(cls, psi, tol=1e-10):
        psi = np.asarray(psi, dtype=complex)
        if abs(psi[1]) > tol or abs(psi[2]) > tol:
            raise ValidationError("state has support outside the logical code space")
        return cls(psi[[0, 3]])


def cz_from_matchgates(tol=1e-12):
    """G_HH . SWAP . G_XX . G_HH as a matrix product; equals CZ exactly."""
    product = named_gate("G_HH") @ SWAP @ named_gate("G_XX") @ named_gate("G_HH")
    err = float(np.abs(product - CZ).max())
    if err > tol:
        raise AssertionError(f"matchgate CZ construction off by {err:.3e}")
    return product


def is_parity_preserving(u, tol=PATTERN_TOL):
    u = np.asarray(u)
    return bool(np.abs(u[np.ix_(EVEN, ODD)]).max() <= tol and np.abs(u[np.ix_(ODD, EVEN)]).max() <= tol)


def global_phase_equal(u, v, tol=1e-9):
    return phase_distance(u, v) < tol
