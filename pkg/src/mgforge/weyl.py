"""Canonical (Weyl-chamber) coordinates of two-qubit unitaries.

Every U in U(4) can be written as

    U = (u1 x v1) exp(-i/2 (c1 XX + c2 YY + c3 ZZ)) (u2 x v2),

and the class of U under local unitaries is fixed by (c1, c2, c3) modulo
permutations, sign flips of two coordinates, and shifts of one coordinate by
pi. The representative used here lies in the tetrahedron

    pi >= c1 >= c2 >= c3 >= 0,  c1 + c2 <= pi,

with points on the c3 = 0 face folded to c1 <= pi/2 (that face is mirror
symmetric about c1 = pi/2).
"""
import itertools
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .errors import ValidationError
from .linalg import Y, as_unitary

MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / np.sqrt(2)

# Eigenvalues of XX, YY, ZZ (columns) on the magic basis vectors (rows).
SIGNS = np.array([[1, -1, 1], [1, 1, -1], [-1, -1, -1], [-1, 1, 1]], dtype=float)

CHAMBER_VOLUME = np.pi**3 / 24
CHAMBER_TOL = 1e-9
FOLD_TOL = 1e-9

_PERMS = list(itertools.permutations(range(3)))
_EVEN_SIGNS = np.array([[1, 1, 1], [-1, -1, 1], [-1, 1, -1], [1, -1, -1]], dtype=float)
_YY = np.kron(Y, Y)


class WeylPoint(NamedTuple):
    c1: float
    c2: float
    c3: float

    def array(self):
        return np.array(self, dtype=float)

    def is_canonical(self, tol=CHAMBER_TOL, folded=True):
        return in_chamber(self, tol=tol, folded=folded)


class LocalDressing(NamedTuple):
    u1: np.ndarray
    v1: np.ndarray
    u2: np.ndarray
    v2: np.ndarray

    def apply(self, core):
        return np.kron(self.u1, self.v1) @ core @ np.kron(self.u2, self.v2)


class MakhlinInvariants(NamedTuple):
    g1: complex
    g2: float

    def distance(self, other):
        return max(abs(self.g1 - other.g1), abs(self.g2 - other.g2))


def in_chamber(p, tol=CHAMBER_TOL, folded=True):
    """Membership in the closed tetrahedron (and, if ``folded``, the c3 = 0 fold)."""
    c1, c2, c3 = (float(x) for x in p)
    ok = (
        c1 <= np.pi + tol
        and c1 >= c2 - tol
        and c2 >= c3 - tol
        and c3 >= -tol
        and c1 + c2 <= np.pi + tol
    )
    if ok and folded and c3 <= tol:
        ok = c1 <= np.pi / 2 + tol
    return ok


def canonical_unitary(p):
    """exp(-i/2 (c1 XX + c2 YY + c3 ZZ)), evaluated in the magic basis."""
    c = np.asarray(p, dtype=float).reshape(3)
    if not np.all(np.isfinite(c)):
        raise ValidationError("Weyl coordinates must be finite")
    d = np.exp(-0.5j * (SIGNS @ c))
    return (MAGIC * d) @ MAGIC.conj().T


def _symmetry_images(c):
    """The 24 images of ``c`` under permutations and paired sign flips."""
    c = np.asarray(c, dtype=float)
    return np.array([s * c[list(p)] for p in _PERMS for s in _EVEN_SIGNS])


def canonicalize(c, tol=CHAMBER_TOL, fold_tol=FOLD_TOL):
    """Reduce arbitrary coordinates to the chamber representative."""
    images = _symmetry_images(c)
    images = (images + tol) % np.pi - tol
    c1, c2, c3 = images.T
    violation = (
        np.maximum(c2 - c1, 0)
        + np.maximum(c3 - c2, 0)
        + np.maximum(-c3, 0)
        + np.maximum(c1 + c2 - np.pi, 0)
    )
    best = images[int(np.argmin(violation))].copy()
    best = np.maximum(best, 0.0)
    if best[2] <= fold_tol and best[0] > np.pi / 2:
        best[0] = np.pi - best[0]
    best[np.abs(best) < 1e-13] = 0.0
    return WeylPoint(*(float(x) for x in best))


def _magic_m(u):
    um = MAGIC.conj().T @ u @ MAGIC
    return um, um.T @ um


def kak_coordinates(u):
    """Chamber coordinates (c1, c2, c3) of a two-qubit unitary.

    Uses the spectrum of ``m = U_B^T U_B`` with ``U_B`` the gate in the magic
    basis normalised to SU(4); local gates are real orthogonal there, so the
    eigenphases of ``m`` are ``-SIGNS @ c`` up to the symmetries removed by
    :func:`canonicalize`.
    """
    u = as_unitary(u, 4)
    um = MAGIC.conj().T @ u @ MAGIC
    um = um * np.exp(-0.25j * np.angle(np.linalg.det(um)))
    m = um.T @ um
    phases = np.sort(np.angle(np.linalg.eigvals(m)))
    # eigenphases of an SU(4) matrix sum to a multiple of 2 pi; make it zero
    n = int(np.round(phases.sum() / (2 * np.pi)))
    if n > 0:
        phases[len(phases) - n:] -= 2 * np.pi
    elif n < 0:
        phases[:-n] += 2 * np.pi
    c = -SIGNS.T @ phases / 4
    return canonicalize(c)


def makhlin_invariants(u):
    u = as_unitary(u, 4)
    um, m = _magic_m(u)
    det = np.linalg.det(um)
    tr = np.trace(m)
    g1 = tr**2 / (16 * det)
    g2 = (tr**2 - np.trace(m @ m)) / (4 * det)
    return MakhlinInvariants(complex(g1), float(g2.real))


def locally_equivalent(u, v, inv_tol=1e-7, coord_tol=1e-6):
    """True iff the Makhlin invariants agree, cross-checked against the chamber
    coordinates (compared modulo the chamber symmetries)."""
    inv_ok = makhlin_invariants(u).distance(makhlin_invariants(v)) <= inv_tol
    coord_ok = nonlocal_distance(kak_coordinates(u), kak_coordinates(v), minimize_images=True) <= coord_tol
    return bool(inv_ok and coord_ok)


def _product_state(x):
    t1, p1, t2, p2 = x
    a = np.array([np.cos(t1 / 2), np.exp(1j * p1) * np.sin(t1 / 2)])
    b = np.array([np.cos(t2 / 2), np.exp(1j * p2) * np.sin(t2 / 2)])
    return np.kron(a, b)


def concurrence(psi):
    """|<psi| YY |psi*>| for a normalised two-qubit pure state."""
    psi = np.asarray(psi, dtype=complex)
    return float(abs(psi @ _YY @ psi))


def max_output_concurrence(u, restarts=8, seed=0):
    """Largest concurrence the gate produces from a product input state.

    Seeded multi-start BFGS over the two input Bloch vectors.
    """
    u = as_unitary(u, 4)
    q = u.T @ _YY @ u
    rng = np.random.default_rng(seed)

    def neg_c2(x):
        psi = _product_state(x)
        return -abs(psi @ q @ psi) ** 2

    best = 0.0
    for _ in range(restarts):
        x0 = rng.uniform(0, 2 * np.pi, 4)
        x0[0], x0[2] = np.arccos(rng.uniform(-1, 1, 2))
        res = minimize(neg_c2, x0, method="BFGS", options={"gtol": 1e-10})
        best = max(best, np.sqrt(max(-res.fun, 0.0)))
        if best > 1 - 1e-12:
            break
    return float(min(best, 1.0))


PE_TOL = 1e-6


def is_perfect_entangler(p, method="oracle", restarts=8, seed=0):
    """Whether the chamber point can map some product state to a Bell state.

    ``method="oracle"`` maximises output concurrence numerically;
    ``method="convex"`` checks whether 0 lies in the convex hull of the
    eigenvalues of ``m`` (no angular gap between them exceeds pi).
    """
    if method == "oracle":
        return max_output_concurrence(canonical_unitary(p), restarts, seed) >= 1 - PE_TOL
    if method == "convex":
        phases = np.sort(np.mod(-(SIGNS @ np.asarray(p, dtype=float)), 2 * np.pi))
        gaps = np.diff(np.concatenate([phases, [phases[0] + 2 * np.pi]]))
        return bool(gaps.max() <= np.pi + 1e-9)
    raise ValueError(f"unknown method {method!r}")


def nonlocal_distance(p, q, minimize_images=False, tol=CHAMBER_TOL):
    """Euclidean distance between two chamber points.

    Both points must lie in the closed tetrahedron. With ``minimize_images``
    the distance is also minimised over all symmetry images of ``q``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    for point in (p, q):
        if not in_chamber(point, tol=tol, folded=False):
            raise ValidationError(f"point {tuple(point)} is outside the Weyl chamber")
    if not minimize_images:
        return float(np.linalg.norm(p - q))
    images = _symmetry_images(q)
    shifts = np.pi * np.array(list(itertools.product((-1, 0, 1), repeat=3)))
    cand = (images[:, None, :] + shifts[None, :, :]).reshape(-1, 3)
    return float(np.linalg.norm(cand - p, axis=1).min())


def random_chamber_point(rng):
    """Uniform sample from the chamber (rejection from the bounding box)."""
    while True:
        c = rng.uniform(0, [np.pi, np.pi / 2, np.pi / 2])
        if in_chamber(c, tol=0.0, folded=False):
            return canonicalize(c)


def nearest_named_gate(p, names=("I", "CNOT", "SWAP", "G_HH", "ISWAP", "SQRT_SWAP", "B")):
    """Closest landmark gate (by chamber distance) to a Weyl point."""
    best = None
    for name in names:
        q = LANDMARKS[name]
        d = nonlocal_distance(p, q, minimize_images=True)
        if best is None or d < best[1]:
            best = (name, d)
    return best


LANDMARKS = {
    "I": WeylPoint(0.0, 0.0, 0.0),
    "CNOT": WeylPoint(np.pi / 2, 0.0, 0.0),
    "G_HH": WeylPoint(np.pi / 2, 0.0, 0.0),
    "ISWAP": WeylPoint(np.pi / 2, np.pi / 2, 0.0),
    "SWAP": WeylPoint(np.pi / 2, np.pi / 2, np.pi / 2),
    "SQRT_SWAP": WeylPoint(np.pi / 4, np.pi / 4, np.pi / 4),
    "B": WeylPoint(np.pi / 2, np.pi / 4, 0.0),
}
