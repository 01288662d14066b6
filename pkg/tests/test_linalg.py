import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mgforge.errors import ValidationError
from mgforge.linalg import (
    H, I2, X, Y, Z, euler_xzx, haar_unitary, phase_distance, rx, rz, tensor,
)
from mgforge.matchgate import CZ, named_gate

seeds = st.integers(0, 2**32 - 1)
angles = st.floats(-np.pi, np.pi, allow_nan=False)


def test_tensor_basics():
    assert np.allclose(tensor(I2, I2), np.eye(4))
    assert np.allclose(tensor(X, X), np.fliplr(np.eye(4)))
    assert np.allclose(tensor(X, X), named_gate("G_XX"))
    hh = tensor(H, H)
    assert np.allclose(np.abs(hh), 0.5)
    assert np.allclose(hh @ hh, np.eye(4))


def test_tensor_rejects_non_unitary():
    with pytest.raises(ValidationError):
        tensor(np.array([[1, 1], [0, 1]]), I2)
    with pytest.raises(ValidationError):
        tensor(np.array([[np.nan, 0], [0, 1]]), I2)


def test_phase_distance_examples():
    u = haar_unitary(4, np.random.default_rng(1))
    assert phase_distance(u, u) < 1e-12
    assert phase_distance(u, np.exp(1j * np.pi / 3) * u) < 1e-12
    assert abs(phase_distance(np.eye(4), CZ) - 2) < 1e-12


def test_pauli_identities():
    for p in (X, Y, Z):
        assert np.allclose(p @ p, I2)
    assert np.allclose(X @ Z, -1j * Y)


def test_euler_examples():
    e = euler_xzx(I2)
    assert (e.alpha, e.theta, e.beta, e.phase) == (0.0, 0.0, 0.0, 0.0)
    e = euler_xzx(H)
    assert abs(e.theta - np.pi) < 1e-12
    assert abs(e.alpha + np.pi / 2) < 1e-12 and abs(e.beta + np.pi / 2) < 1e-12
    assert abs(e.phase + np.pi / 2) < 1e-12
    assert np.allclose(e.matrix(), H)


def test_euler_roundtrip_10k():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10_000):
        u = haar_unitary(2, rng)
        e = euler_xzx(u)
        worst = max(worst, np.linalg.norm(e.matrix() - u))
        assert 0 <= e.theta <= 2 * np.pi
    assert worst < 1e-10


def test_euler_prefers_theta_below_pi():
    # theta in [0, pi] exists exactly when |<0|HuH|0>| >= cos(pi/4)
    rng = np.random.default_rng(5)
    for _ in range(500):
        u = haar_unitary(2, rng)
        w = H @ u @ H
        e = euler_xzx(u)
        if abs(w[0, 0]) > np.cos(np.pi / 4) + 1e-9:
            assert e.theta <= np.pi


def test_euler_degenerate_branches():
    for u in (rx(0.7), rx(-2.0) @ rx(0.3), rz(4 * np.pi / 2) @ rx(0.2)):
        assert np.allclose(euler_xzx(u).matrix(), u)


@settings(max_examples=60, deadline=None)
@given(seeds, angles, angles)
def test_phase_distance_ignores_global_phases(seed, phi, psi):
    rng = np.random.default_rng(seed)
    u, v = haar_unitary(4, rng), haar_unitary(4, rng)
    d = phase_distance(u, v)
    assert abs(phase_distance(np.exp(1j * phi) * u, np.exp(1j * psi) * v) - d) < 1e-9
    assert abs(d - np.sqrt(max(8 - 2 * abs(np.trace(u.conj().T @ v)), 0))) < 1e-7


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_tensor_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (haar_unitary(2, rng) for _ in range(4))
    assert np.abs(tensor(a, b) @ tensor(c, d) - tensor(a @ c, b @ d)).max() < 1e-12
