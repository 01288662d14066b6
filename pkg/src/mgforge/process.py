"""Two-qubit processes as chi matrices in the Pauli operator basis.

The basis is P_m = s_i (x) s_j with m = 4 i + j and s = (I, X, Y, Z), i.e. the
order II, IX, IY, IZ, XI, ..., ZZ. A process acts as

    E(rho) = sum_mn chi_mn P_m rho P_n^dag.

``ProcessMatrix.chi`` always has unit trace. Trace-decreasing (post-selected)
maps keep their original trace in ``trace_norm``, which equals the success
probability averaged over a maximally mixed input.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import sqrtm

from .errors import ValidationError
from .linalg import PAULIS, as_unitary

PAULI2 = np.array([np.kron(a, b) for a in PAULIS for b in PAULIS])
PAULI_LABELS = tuple(a + b for a in "IXYZ" for b in "IXYZ")

# P_n^dag P_m, indexed [m, n]
_PNPM = np.einsum("nba,mbc->mnac", PAULI2.conj(), PAULI2)

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-8


def pauli_coefficients(k):
    """e_m with k = sum_m e_m P_m."""
    k = np.asarray(k, dtype=complex)
    return np.einsum("mab,ab->m", PAULI2.conj(), k) / 4


def kraus_to_chi(kraus):
    """Unnormalised chi of the map rho -> sum_k K rho K^dag."""
    e = np.array([pauli_coefficients(k) for k in kraus])
    return e.T @ e.conj()


@dataclass(frozen=True, eq=False)
class ProcessMatrix:
    chi: np.ndarray
    trace_norm: float = 1.0

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=complex)
        if chi.shape != (16, 16):
            raise ValidationError(f"chi must be 16x16, got {chi.shape}")
        if not np.all(np.isfinite(chi)):
            raise ValidationError("chi has non-finite entries")
        herm = float(np.abs(chi - chi.conj().T).max())
        if herm > HERMITIAN_TOL:
            raise ValidationError(f"chi is not Hermitian (max deviation {herm:.3e})")
        chi = (chi + chi.conj().T) / 2
        tr = np.trace(chi).real
        if abs(tr - 1) > 1e-10:
            raise ValidationError(f"chi must have unit trace, got {tr:.12g}")
        lam = np.linalg.eigvalsh(chi).min()
        if lam < -PSD_TOL:
            raise ValidationError(f"chi is not positive semidefinite (min eigenvalue {lam:.3e})")
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "trace_norm", float(self.trace_norm))

    @classmethod
    def from_unnormalized(cls, chi):
        chi = np.asarray(chi, dtype=complex)
        tr = float(np.trace(chi).real)
        if tr <= 0:
            raise ValidationError("chi has non-positive trace")
        return cls(chi / tr, trace_norm=tr)

    @classmethod
    def from_kraus(cls, kraus):
        return cls.from_unnormalized(kraus_to_chi(kraus))

    @classmethod
    def from_external(cls, chi, trace_norm=1.0, clip=PSD_TOL):
        """Ingest externally produced data, repairing small PSD violations."""
        chi = np.asarray(chi, dtype=complex)
        chi = (chi + chi.conj().T) / 2
        w, v = np.linalg.eigh(chi)
        if w.min() < -clip:
            w = np.clip(w, 0, None)
            chi = (v * w) @ v.conj().T
        return cls(chi / np.trace(chi).real, trace_norm=trace_norm)

    def unnormalized(self):
        return self.chi * self.trace_norm

    def completeness(self):
        """sum_mn chi_mn P_n^dag P_m for the unnormalised map."""
        return np.einsum("mn,mnab->ab", self.unnormalized(), _PNPM)

    def completeness_defect(self):
        return float(np.linalg.norm(self.completeness() - np.eye(4)))

    @property
    def is_pure(self):
        return process_purity(self) > 1 - 1e-9


def unitary_to_chi(u):
    u = as_unitary(u, 4)
    e = pauli_coefficients(u)
    return ProcessMatrix(np.outer(e, e.conj()))


def _apply_raw(chi, rho):
    return np.einsum("mn,mab,bc,ndc->ad", chi, PAULI2, rho, PAULI2.conj())


def apply_process(x, rho, return_probability=False):
    """Output state of process ``x`` on input ``rho``.

    The output is renormalised; ``return_probability=True`` additionally
    returns the success probability of a trace-decreasing map.
    """
    rho = as_density(rho)
    out = _apply_raw(x.unnormalized(), rho)
    p = float(np.trace(out).real)
    if p <= 1e-15:
        raise ValidationError("process annihilates this input (zero output trace)")
    out = out / p
    return (out, p) if return_probability else out


def as_density(rho, tol=1e-10):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if rho.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 density matrix, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol or abs(np.trace(rho) - 1) > tol:
        raise ValidationError("density matrix must be Hermitian with unit trace")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValidationError("density matrix is not positive semidefinite")
    return rho


def process_purity(x):
    return float(np.real(np.trace(x.chi @ x.chi)))


def process_fidelity(x, y, with_method=False):
    """Process fidelity between two chi matrices.

    ``Tr(chi_x chi_y)`` when either process is pure (the usual comparison with
    an ideal gate); otherwise the Uhlmann fidelity
    ``(Tr sqrt(sqrt(chi_x) chi_y sqrt(chi_x)))^2``, with ``method="uhlmann"``.
    """
    if x.is_pure or y.is_pure:
        f, method = float(np.real(np.trace(x.chi @ y.chi))), "trace"
    else:
        s = sqrtm(x.chi)
        f, method = float(np.real(np.trace(sqrtm(s @ y.chi @ s))) ** 2), "uhlmann"
    f = min(max(f, 0.0), 1.0)
    return (f, method) if with_method else f


def to_superop(chi):
    """Row-major superoperator S with vec(E(rho)) = S vec(rho)."""
    return np.einsum("mn,mab,ncd->acbd", chi, PAULI2, PAULI2.conj()).reshape(16, 16)


def from_superop(s):
    s = np.asarray(s).reshape(4, 4, 4, 4)
    return np.einsum("acbd,mab,ncd->mn", s, PAULI2.conj(), PAULI2) / 16


def compose(first, second):
    """Process ``second o first`` (``first`` acts first)."""
    s = to_superop(second.unnormalized()) @ to_superop(first.unnormalized())
    return ProcessMatrix.from_unnormalized(from_superop(s))


def dress(x, before=None, after=None):
    """``after o x o before`` for unitaries ``before``/``after``."""
    out = x
    if before is not None:
        out = compose(unitary_to_chi(before), out)
    if after is not None:
        out = compose(out, unitary_to_chi(after))
    return out


def depolarizing(p):
    """rho -> (1 - p) rho + p I/4."""
    _check_prob(p)
    chi = np.eye(16, dtype=complex) * p / 16
    chi[0, 0] += 1 - p
    return ProcessMatrix(chi)


def dephasing(p):
    """Independent dephasing of both qubits; each coherence shrinks by 1 - p."""
    _check_prob(p)
    single = [np.sqrt(1 - p / 2) * PAULIS[0], np.sqrt(p / 2) * PAULIS[3]]
    return ProcessMatrix.from_kraus([np.kron(a, b) for a in single for b in single])


def unitary_mixture(terms):
    """Incoherent sum sum_k w_k U_k rho U_k^dag."""
    weights = np.array([w for w, _ in terms], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-10:
        raise ValidationError("mixture weights must be non-negative and sum to 1")
    chi = sum(w * unitary_to_chi(u).chi for w, u in terms)
    return ProcessMatrix(chi)


def noise_channel(kind, p=None, terms=None):
    if kind == "depolarizing":
        return depolarizing(p)
    if kind == "dephasing":
        return dephasing(p)
    if kind == "unitary_mixture":
        return unitary_mixture(terms)
    raise ValidationError(f"unknown noise channel {kind!r}")


def mix(x, y, weight):
    """Convex combination ``(1 - weight) x + weight y`` of unit-trace processes."""
    chi = (1 - weight) * x.chi + weight * y.chi
    tn = (1 - weight) * x.trace_norm + weight * y.trace_norm
    return ProcessMatrix(chi, trace_norm=tn)


def _check_prob(p):
    if not 0 <= p <= 1:
        raise ValidationError(f"probability must lie in [0, 1], got {p}")
