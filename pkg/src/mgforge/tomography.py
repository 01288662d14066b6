"""Simulated two-qubit process tomography and maximum-likelihood reconstruction.

Inputs are the 16 product states from {H, V, D, R}; outputs are projected
onto the 36 product projectors from {H, V, D, A, R, L}. |H> = |0>.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .errors import ReconstructionError, ValidationError
from .process import PAULI2, ProcessMatrix, _PNPM, from_superop, pauli_coefficients, to_superop

log = logging.getLogger(__name__)

_S = 1 / np.sqrt(2)
STATES = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "A": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
    "L": np.array([_S, -1j * _S], dtype=complex),
}
PREP_LABELS = ("H", "V", "D", "R")
MEAS_LABELS = ("H", "V", "D", "A", "R", "L")
PREPS = tuple(itertools.product(PREP_LABELS, repeat=2))
MEASUREMENTS = tuple(itertools.product(MEAS_LABELS, repeat=2))
_PREP_INDEX = {p: i for i, p in enumerate(PREPS)}
_MEAS_INDEX = {m: i for i, m in enumerate(MEASUREMENTS)}


def _projector(pair):
    psi = np.kron(STATES[pair[0]], STATES[pair[1]])
    return np.outer(psi, psi.conj())


def _design_tensor():
    rhos = np.array([_projector(p) for p in PREPS])
    projs = np.array([_projector(m) for m in MEASUREMENTS])
    # A[i, j, m, n] = Tr(Pi_j P_m rho_i P_n^dag)
    left = np.einsum("jab,mbc->jmac", projs, PAULI2)
    right = np.einsum("icd,nad->inca", rhos, PAULI2.conj())
    return np.einsum("jmac,inca->ijmn", left, right)


DESIGN = _design_tensor()  # (16, 36, 16, 16)
DESIGN_FLAT = DESIGN.reshape(16 * 36, 256)


class CountRecord(NamedTuple):
    prep: tuple
    meas: tuple
    counts: int


@dataclass(frozen=True, eq=False)
class TomographyDataset:
    """Coincidence counts for every (preparation, measurement) pair."""

    counts: np.ndarray  # (16, 36) in PREPS x MEASUREMENTS order
    n_nominal: float
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (16, 36):
            raise ValidationError(f"counts must have shape (16, 36), got {counts.shape}")
        if np.any(counts < 0):
            raise ValidationError("counts must be non-negative")
        object.__setattr__(self, "counts", counts.astype(np.int64))

    @property
    def records(self):
        return [
            CountRecord(p, m, int(self.counts[i, j]))
            for i, p in enumerate(PREPS)
            for j, m in enumerate(MEASUREMENTS)
        ]

    @classmethod
    def from_records(cls, records, n_nominal, seed=0):
        counts = np.full((16, 36), -1, dtype=np.int64)
        for r in records:
            prep, meas = tuple(r.prep), tuple(r.meas)
            try:
                i, j = _PREP_INDEX[prep], _MEAS_INDEX[meas]
            except KeyError:
                raise ValidationError(f"unknown setting {prep}/{meas}") from None
            if counts[i, j] >= 0:
                raise ValidationError(f"duplicate record for {prep}/{meas}")
            counts[i, j] = int(r.counts)
        if np.any(counts < 0):
            raise ValidationError("dataset is missing (prep, meas) settings")
        return cls(counts, n_nominal, seed)


def probabilities(x):
    """Predicted outcome probabilities, shape (16, 36), for a unit-trace chi."""
    return np.real(DESIGN_FLAT @ x.chi.reshape(-1)).reshape(16, 36)


def predicted_probability(x, prep, meas):
    i, j = _PREP_INDEX[tuple(prep)], _MEAS_INDEX[tuple(meas)]
    return float(np.real(np.sum(DESIGN[i, j] * x.chi)))


def simulate_counts(x, n_nominal, seed, exact=False):
    """Poisson counts with mean ``n_nominal * trace_norm * p``.

    ``exact=True`` rounds the means instead of sampling.
    """
    if n_nominal < 1:
        raise ValidationError("n_nominal must be at least 1")
    mean = n_nominal * x.trace_norm * np.clip(probabilities(x), 0, None)
    if exact:
        counts = np.round(mean)
    else:
        counts = np.random.default_rng(seed).poisson(mean)
    return TomographyDataset(counts, n_nominal, seed)


def informational_completeness():
    """(rank, condition number) of the map from Hermitian chi parameters to
    the 576 outcome probabilities."""
    basis = []
    for m in range(16):
        for n in range(m, 16):
            e = np.zeros((16, 16), dtype=complex)
            if m == n:
                e[m, m] = 1
                basis.append(e)
            else:
                e[m, n] = e[n, m] = 1
                basis.append(e.copy())
                e[m, n], e[n, m] = 1j, -1j
                basis.append(e)
    cols = np.array([np.real(DESIGN_FLAT @ b.reshape(-1)) for b in basis]).T
    s = np.linalg.svd(cols, compute_uv=False)
    rank = int(np.sum(s > s[0] * 1e-10))
    return rank, float(s[0] / s[-1])


# ---------------------------------------------------------------- MLE

_TRIL = np.tril_indices(16)
_N_PARAMS = 2 * len(_TRIL[0]) - 16  # 256


def _unpack(theta):
    t = np.zeros((16, 16), dtype=complex)
    nd = len(_TRIL[0])
    t[_TRIL] = theta[:nd]
    off = _TRIL[0] != _TRIL[1]
    t[_TRIL[0][off], _TRIL[1][off]] += 1j * theta[nd:]
    return t


def _pack_grad(g):
    nd = len(_TRIL[0])
    off = _TRIL[0] != _TRIL[1]
    out = np.empty(_N_PARAMS)
    out[:nd] = g.real[_TRIL]
    out[nd:] = g.imag[_TRIL[0][off], _TRIL[1][off]]
    return out


def _pack(t):
    return _pack_grad(t)


def trace_preserving_projection(chi):
    """Exactly trace-preserving version of chi: E(L^{-1/2} rho L^{-1/2})."""
    lam = np.einsum("mn,mnab->ab", chi, _PNPM)
    w, v = np.linalg.eigh((lam + lam.conj().T) / 2)
    k = (v / np.sqrt(w)) @ v.conj().T
    e = pauli_coefficients(k)
    pre = np.outer(e, e.conj())
    s = to_superop(chi) @ to_superop(pre)
    out = from_superop(s)
    return (out + out.conj().T) / 2


def _linear_inversion(counts):
    f = counts.reshape(-1).astype(float)
    sol, *_ = np.linalg.lstsq(DESIGN_FLAT, f, rcond=None)
    chi = sol.reshape(16, 16)
    chi = (chi + chi.conj().T) / 2
    w, v = np.linalg.eigh(chi)
    w = np.clip(w, 1e-6 * max(w.max(), 1e-12), None)
    chi = (v * w) @ v.conj().T
    return chi / np.trace(chi).real


def _objective(theta, weights, nz, penalty):
    """Profiled Poisson NLL per count plus the trace-preservation penalty,
    with its gradient in the packed T parameters."""
    t = _unpack(theta)
    chi = t @ t.conj().T
    p = np.real(DESIGN_FLAT @ chi.reshape(-1))
    p = np.maximum(p, 1e-300)
    psum = p.sum()
    nll = -np.sum(weights[nz] * np.log(p[nz])) + np.log(psum)
    d = np.einsum("mn,mnab->ab", chi, _PNPM) - np.eye(4)
    pen = penalty * np.real(np.sum(np.abs(d) ** 2))
    w = np.where(nz, -weights / p, 0.0) + 1.0 / psum
    g = (w @ DESIGN_FLAT).reshape(16, 16).T
    g = g + 2 * penalty * np.einsum("ab,mnab->mn", d.conj(), _PNPM).T
    grad_t = 2 * (g @ t)
    return nll + pen, _pack_grad(grad_t)


@dataclass(frozen=True, eq=False)
class MLEResult:
    process: ProcessMatrix
    loglik: float
    iterations: int
    converged: bool
    tp_defect: float
    scale: float
    history: list


def mle_fit(data, start=None, penalty=10.0, max_iter=5000, tol=1e-10):
    """Maximum-likelihood chi for a tomography dataset.

    chi = T T^dag with T lower triangular (PSD by construction). The Poisson
    likelihood is maximised with the overall count rate profiled out, and trace
    preservation is imposed by a quadratic penalty followed by an exact
    correction rho -> L^{-1/2} rho L^{-1/2}. The fitted rate gives the success
    probability stored in ``trace_norm``.
    """
    counts = data.counts.reshape(-1).astype(float)
    total = counts.sum()
    if total <= 0:
        raise ReconstructionError("dataset contains no counts")
    chi0 = _linear_inversion(data.counts) if start is None else np.asarray(start)
    t0 = np.linalg.cholesky(chi0 + 1e-10 * np.eye(16))
    nz = counts > 0
    weights = counts / total
    history = []

    def objective(theta):
        return _objective(theta, weights, nz, penalty)

    def record(theta):
        history.append(objective(theta)[0])

    res = minimize(
        objective,
        _pack(t0),
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={"maxiter": max_iter, "ftol": tol, "gtol": 1e-12, "maxcor": 30},
    )
    converged = bool(res.success) or (
        len(history) > 1 and abs(history[-1] - history[-2]) <= tol * max(1.0, abs(history[-1]))
    )
    if not converged:
        log.warning("MLE stopped without converging: %s", res.message)
    t = _unpack(res.x)
    chi = t @ t.conj().T
    chi = trace_preserving_projection(chi)
    chi = chi / np.trace(chi).real
    p = np.real(DESIGN_FLAT @ chi.reshape(-1))
    scale = total / p.sum()
    x = ProcessMatrix.from_external(chi, trace_norm=scale / data.n_nominal)
    defect = float(np.linalg.norm(np.einsum("mn,mnab->ab", x.chi, _PNPM) - np.eye(4)))
    loglik = float(np.sum(counts[nz] * np.log(scale * p[nz])) - total)
    return MLEResult(x, loglik, int(res.nit), converged, defect, float(scale), history)


def mle_reconstruct(data, **kwargs):
    return mle_fit(data, **kwargs).process


class BootstrapResult(NamedTuple):
    mean: float
    std: float
    values: np.ndarray
    failures: int


def bootstrap_errors(data, resamples, statistic, seed=0, start=None):
    """Parametric Poisson bootstrap of ``statistic(process)``.

    ``statistic`` may return a scalar or a fixed-length sequence; mean and
    std are then per component.

    Each resample draws every record from Poisson(observed count) and is
    reconstructed again (warm-started from the point estimate).
    """
    if resamples < 50:
        raise ValidationError("bootstrap needs at least 50 resamples")
    if start is None:
        start = mle_reconstruct(data).chi
    seeds = np.random.SeedSequence(seed).spawn(resamples)
    values, failures = [], 0
    for s in seeds:
        rng = np.random.default_rng(s)
        resampled = TomographyDataset(rng.poisson(data.counts), data.n_nominal, data.seed)
        try:
            values.append(statistic(mle_reconstruct(resampled, start=start)))
        except (ReconstructionError, ValidationError, np.linalg.LinAlgError):
            failures += 1
    if len(values) < 2:
        raise ReconstructionError(f"bootstrap failed on {failures} of {resamples} resamples")
    values = np.array(values, dtype=float)
    mean, std = values.mean(axis=0), values.std(axis=0, ddof=1)
    if values.ndim == 1:
        mean, std = float(mean), float(std)
    return BootstrapResult(mean, std, values, failures)
