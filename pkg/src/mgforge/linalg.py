"""Single-qubit gate algebra and small-matrix helpers.

Matrices are plain ``numpy`` complex arrays. Two-qubit operators use the basis
order |00>, |01>, |10>, |11>, with qubit 0 (the "top" wire) as the most
significant bit.

Rotations follow ``X_g = exp(-i g X / 2)`` and ``Z_g = exp(-i g Z / 2)``.
"""
from typing import NamedTuple

import numpy as np

from .errors import ValidationError

UNITARY_TOL = 1e-10
EQUAL_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
T = np.diag([1, np.exp(1j * np.pi / 4)])
PAULIS = (I2, X, Y, Z)


def as_matrix(m, n=None):
    """Coerce ``m`` to a finite complex square array (optionally n x n)."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if n is not None and m.shape[0] != n:
        raise ValidationError(f"expected a {n}x{n} matrix, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def unitarity_error(u):
    u = np.asarray(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def as_unitary(u, n=None, tol=UNITARY_TOL):
    """Validate and return ``u`` as a complex unitary array."""
    u = as_matrix(u, n)
    err = unitarity_error(u)
    if err > tol:
        raise ValidationError(f"matrix is not unitary (||U^dag U - I|| = {err:.3e})")
    return u


def tensor(a, b):
    """Kronecker product of two single-qubit unitaries, ``a`` on the top wire."""
    return np.kron(as_unitary(a, 2), as_unitary(b, 2))


def phase_distance(u, v):
    """Frobenius distance between ``u`` and ``v`` minimised over a global phase.

    Equals ``sqrt(2n - 2|Tr(u^dag v)|)`` for n x n unitaries; evaluated at the
    optimal phase instead, since the closed form loses half the digits near 0.
    """
    u = as_unitary(u)
    v = as_unitary(v, u.shape[0])
    phase = np.angle(np.trace(v.conj().T @ u))
    return float(np.linalg.norm(u - np.exp(1j * phase) * v))


def rx(angle):
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(angle):
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(angle):
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def _wrap(angle):
    """Map an angle into (-pi, pi]."""
    w = -((-angle + np.pi) % (2 * np.pi) - np.pi)
    return float(w)


class EulerXZX(NamedTuple):
    """``u = exp(i phase) X_alpha Z_{-theta/2} X_beta``."""

    alpha: float
    theta: float
    beta: float
    phase: float

    def matrix(self):
        return np.exp(1j * self.phase) * rx(self.alpha) @ rz(-self.theta / 2) @ rx(self.beta)


def euler_xzx(u, degenerate_tol=1e-12):
    """Decompose a 2x2 unitary as ``e^{i phase} X_alpha Z_{-theta/2} X_beta``.

    Branch: ``theta`` is non-negative, so it lies in [0, pi] whenever such a
    solution exists and in (pi, 2pi] otherwise. Among the remaining solutions
    the one with the smallest ``|alpha|`` is returned, with ``alpha`` and
    ``beta`` in (-pi, pi]. When ``theta`` is 0 (or 2pi) only ``alpha + beta``
    (or ``alpha - beta``) is determined, and ``alpha`` is set to 0.
    """
    u = as_unitary(u, 2)
    # Conjugating by H swaps the roles of X and Z: H u H = Z_a X_{-theta/2} Z_b.
    w = H @ u @ H
    w = w * np.exp(-0.5j * np.angle(np.linalg.det(w)))
    c, s = abs(w[0, 0]), abs(w[1, 0])
    theta = 4 * np.arctan2(s, c)
    if s < degenerate_tol:
        theta = 0.0
        total = -2 * np.angle(w[0, 0])
        alpha, beta = 0.0, _wrap(total)
    elif c < degenerate_tol:
        theta = 2 * np.pi
        diff = 2 * (np.angle(w[1, 0]) - np.pi / 2)
        alpha, beta = 0.0, _wrap(-diff)
    else:
        total = -2 * np.angle(w[0, 0])
        diff = 2 * (np.angle(w[1, 0]) - np.pi / 2)
        alpha, beta = _wrap((total + diff) / 2), _wrap((total - diff) / 2)
    rebuilt = rx(alpha) @ rz(-theta / 2) @ rx(beta)
    phase = float(np.angle(np.trace(rebuilt.conj().T @ u)))
    if abs(phase) < 1e-15:
        phase = 0.0
    return EulerXZX(float(alpha), float(theta), float(beta), phase)


def haar_unitary(n, rng):
    """Haar-random n x n unitary (QR of a complex Ginibre matrix, phase-fixed)."""
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_local(rng):
    """Haar-random product unitary a (x) b."""
    return np.kron(haar_unitary(2, rng), haar_unitary(2, rng))
