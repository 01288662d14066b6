"""Locally optimised process fidelity over the Weyl chamber.

For a measured process chi and a chamber point c, the nonlocal fidelity is

    F_nl(c) = max_{u1, v1, u2, v2} Tr(chi chi_V),
    V = (u1 x v1) exp(-i/2 (c1 XX + c2 YY + c3 ZZ)) (u2 x v2).

With V pure, Tr(chi chi_V) = vec(V)^dag G vec(V) for a fixed 16x16 matrix G,
and V is linear in each local factor. Writing one SU(2) factor as
``q0 I - i (q1 X + q2 Y + q3 Z)`` with q a real unit vector makes the
fidelity a real quadratic form in q, maximised exactly by the top
eigenvector. The optimiser cycles through the four factors until the gain
stalls, from several seeded random starts.
"""
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import cKDTree

from .linalg import PAULIS, haar_unitary, rx, rz
from .process import PAULI2, ProcessMatrix
from .weyl import (
    CHAMBER_VOLUME,
    LocalDressing,
    WeylPoint,
    canonical_unitary,
    canonicalize,
    in_chamber,
    nonlocal_distance,
)

_SIGMA = np.array([PAULIS[0], -1j * PAULIS[1], -1j * PAULIS[2], -1j * PAULIS[3]])
_B = PAULI2.conj().reshape(16, 16) / 4  # e = _B @ vec(V)

PRESETS = {"paper": 50, "desk": 26}
FLAT_TOL = 1e-3
AGREE_TOL = 1e-8


def overlap_form(x):
    """Hermitian G with Tr(chi chi_V) = vec(V)^dag G vec(V)."""
    return _B.conj().T @ x.chi @ _B


def dressed_fidelity(g, core, dressing):
    v = dressing.apply(core).reshape(-1)
    return float(np.real(v.conj() @ g @ v))


def _su2(q):
    return np.einsum("k,kab->ab", q, _SIGMA)


def _to_su2(u):
    u = u / np.sqrt(np.linalg.det(u))
    q = np.zeros(4)
    # u = q0 I - i q.sigma
    q[0] = np.real(u[0, 0] + u[1, 1]) / 2
    q[3] = -np.imag(u[0, 0] - u[1, 1]) / 2
    q[1] = -np.imag(u[0, 1] + u[1, 0]) / 2
    q[2] = -np.real(u[1, 0] - u[0, 1]) / 2
    return q / np.linalg.norm(q)


def _slot_matrix(c4, us, slot):
    """M (16 x 4) with vec(V) = M q for the factor in ``slot`` (u1, v1, u2, v2).

    ``c4`` is the core gate as a (2, 2, 2, 2) tensor [out1, out2, in1, in2].
    """
    u1, v1, u2, v2 = us
    if slot < 2:
        rest = np.einsum("ijkl,kc,ld->ijcd", c4, u2, v2)
        if slot == 0:
            m = np.einsum("nai,bj,ijcd->nabcd", _SIGMA, v1, rest)
        else:
            m = np.einsum("ai,nbj,ijcd->nabcd", u1, _SIGMA, rest)
    else:
        rest = np.einsum("ai,bj,ijkl->abkl", u1, v1, c4)
        if slot == 2:
            m = np.einsum("abkl,nkc,ld->nabcd", rest, _SIGMA, v2)
        else:
            m = np.einsum("abkl,kc,nld->nabcd", rest, u2, _SIGMA)
    return m.reshape(4, 16).T


def _slot_matrices(c4, qs):
    us = [_su2(q) for q in qs]
    return [_slot_matrix(c4, us, k) for k in range(4)]


def _sweep_optimize(g, core, qs, max_sweeps=10, tol=1e-11):
    """Block-coordinate ascent over the four SU(2) factors (rows of ``qs``).

    Each update is exact, which makes the first few sweeps very effective;
    on flat ridges of mixed processes the later progress is slow, so the
    result is handed to :func:`_polish`.
    """
    c4 = core.reshape(2, 2, 2, 2)
    us = [_su2(q) for q in qs]
    f_old = -np.inf
    f = -np.inf
    for sweep in range(max_sweeps):
        for slot in range(4):
            m = _slot_matrix(c4, us, slot)
            r = np.real(m.conj().T @ g @ m)
            w, v = np.linalg.eigh((r + r.T) / 2)
            qs[slot] = v[:, -1]
            us[slot] = _su2(qs[slot])
            f = w[-1]
        if f - f_old < tol:
            return f, sweep + 1, True
        f_old = f
    return f, max_sweeps, False


def _polish(g, core, qs, tol=1e-12):
    """Joint L-BFGS ascent over all 16 quaternion components, with
    F = vec(V)^dag G vec(V) / prod |q_k|^2 so that q needs no constraint."""

    c4 = core.reshape(2, 2, 2, 2)

    def neg(flat):
        q = flat.reshape(4, 4)
        norms = np.sum(q * q, axis=1)
        ms = _slot_matrices(c4, q)
        v = ms[0] @ q[0]
        gv = g @ v
        f = np.real(v.conj() @ gv)
        scale = np.prod(norms)
        grad = np.array([2 * np.real(m.conj().T @ gv) - 2 * f * q[k] / norms[k] for k, m in enumerate(ms)])
        return -f / scale, -grad.reshape(-1) / scale

    res = minimize(neg, qs.reshape(-1), jac=True, method="L-BFGS-B",
                   options={"ftol": tol, "gtol": 1e-9, "maxiter": 2000})
    q = res.x.reshape(4, 4)
    q /= np.linalg.norm(q, axis=1)[:, None]
    return -res.fun, q, bool(res.success) or res.nit > 0


class FidelityMapPoint(NamedTuple):
    point: WeylPoint
    f_nl: float
    best_dressing: LocalDressing
    restarts_used: int
    converged: bool = True


def _euler_zxz(params):
    a, b, c = params
    return rz(a) @ rx(b) @ rz(c)


def local_orbit_fidelity(x, p, restarts=8, seed=0, method="sweep", start=None, g=None, agree=None):
    """Maximise Tr(chi chi_V) over local dressings of the canonical gate at ``p``.

    ``method="sweep"`` (default) uses exact single-factor eigen-updates
    followed by a joint quasi-Newton polish; ``method="simplex"`` runs
    Nelder-Mead over 12 ZXZ Euler angles. ``start`` is an optional
    LocalDressing tried before the random restarts. With ``agree`` set,
    restarts stop early once that many have reached the best value; the
    default runs them all, since the landscape typically has a second local
    maximum with a basin about as large as the global one.
    """
    core = canonical_unitary(p)
    if g is None:
        g = overlap_form(x)
    rng = np.random.default_rng(seed)
    best_f, best_d, all_conv = -np.inf, None, True
    starts = []
    if start is not None:
        starts.append(list(start))
    for _ in range(restarts):
        starts.append([haar_unitary(2, rng) for _ in range(4)])
    hits, used = 0, 0
    for us in starts:
        used += 1
        if method == "sweep":
            qs = np.array([_to_su2(u) for u in us])
            f, _, conv = _sweep_optimize(g, core, qs)
            if not conv:
                f, qs, conv = _polish(g, core, qs)
            dressing = LocalDressing(*(_su2(q) for q in qs))
        elif method == "simplex":
            x0 = rng.uniform(0, 2 * np.pi, 12)

            def neg(params):
                d = LocalDressing(*(_euler_zxz(params[3 * k:3 * k + 3]) for k in range(4)))
                return -dressed_fidelity(g, core, d)

            res = minimize(neg, x0, method="Nelder-Mead",
                           options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 20000, "maxfev": 20000})
            f, conv = -res.fun, bool(res.success)
            dressing = LocalDressing(*(_euler_zxz(res.x[3 * k:3 * k + 3]) for k in range(4)))
        else:
            raise ValueError(f"unknown method {method!r}")
        all_conv &= conv
        if f > best_f + AGREE_TOL:
            hits = 1
        elif f > best_f - AGREE_TOL:
            hits += 1
        if f > best_f:
            best_f, best_d = f, dressing
        if agree is not None and hits >= agree:
            break
    f_nl = dressed_fidelity(g, core, best_d)
    return FidelityMapPoint(WeylPoint(*map(float, p)), float(min(max(f_nl, 0.0), 1.0)), best_d, used, all_conv)


# ---------------------------------------------------------------- grids


@dataclass(frozen=True, eq=False)
class ChamberGrid:
    spacing: float
    points: np.ndarray  # (n, 3)
    weights: np.ndarray  # (n,), summing to the chamber volume
    divisions: int
    weighting: str = "lattice"

    def __len__(self):
        return len(self.points)

    def nearest(self, p):
        return int(np.argmin(np.linalg.norm(self.points - np.asarray(p, dtype=float), axis=1)))


def lattice_points(divisions):
    """Cubic lattice of spacing pi/divisions inside the closed chamber."""
    n = divisions
    idx = [(i, j, k) for i in range(n + 1) for j in range(i + 1) for k in range(j + 1) if i + j <= n]
    return np.array(idx, dtype=float) * (np.pi / n)


def _lattice_count(n):
    return sum((min(i, n - i) + 1) * (min(i, n - i) + 2) // 2 for i in range(n + 1))


def voronoi_weights(points, samples=400_000, seed=0):
    """Chamber volume of each point's Voronoi cell, by seeded Monte Carlo."""
    rng = np.random.default_rng(seed)
    box = rng.uniform(0, 1, (samples, 3)) * np.array([np.pi, np.pi / 2, np.pi / 2])
    c1, c2, c3 = box.T
    inside = box[(c1 >= c2) & (c2 >= c3) & (c1 + c2 <= np.pi)]
    _, idx = cKDTree(points).query(inside)
    frac = np.bincount(idx, minlength=len(points)) / len(inside)
    return frac * CHAMBER_VOLUME


def build_chamber_grid(target_count=None, preset=None, weighting="lattice", seed=0):
    """Evenly spaced chamber grid with roughly ``target_count`` points.

    ``weighting="lattice"`` gives every point the same share of the chamber
    volume; ``"voronoi"`` uses Monte Carlo Voronoi cells clipped to the chamber.
    """
    if preset is not None:
        n = PRESETS[preset]
    else:
        if target_count is None or target_count < 10:
            raise ValueError("target_count must be at least 10")
        n = min(range(1, 200), key=lambda k: abs(_lattice_count(k) - target_count))
    points = lattice_points(n)
    if weighting == "lattice":
        weights = np.full(len(points), CHAMBER_VOLUME / len(points))
    elif weighting == "voronoi":
        weights = voronoi_weights(points, seed=seed)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    return ChamberGrid(np.pi / n, points, weights, n, weighting)


# ---------------------------------------------------------------- maps


@dataclass(frozen=True, eq=False)
class FidelityMap:
    grid: ChamberGrid
    values: list
    target: str = ""
    seed: int = 0
    restarts: int = 8
    meta: dict = field(default_factory=dict)

    @property
    def f(self):
        return np.array([v.f_nl for v in self.values])


def _point_seed(seed, index):
    return np.random.SeedSequence([seed, index]).generate_state(1)[0]


def _evaluate_chunk(args):
    chi, points, indices, restarts, seed, method, agree = args
    x = ProcessMatrix(chi)
    g = overlap_form(x)
    return [
        local_orbit_fidelity(x, p, restarts, _point_seed(seed, i), method=method, g=g, agree=agree)
        for p, i in zip(points, indices)
    ]


def fidelity_map(x, grid, restarts=8, seed=0, method="sweep", jobs=1, target="", agree=None):
    """F_nl at every grid point; each point uses its own seed stream."""
    indices = np.arange(len(grid.points))
    if jobs <= 1:
        values = _evaluate_chunk((x.chi, grid.points, indices, restarts, seed, method, agree))
    else:
        chunks = np.array_split(indices, jobs * 4)
        args = [(x.chi, grid.points[c], c, restarts, seed, method, agree) for c in chunks if len(c)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = [v for part in pool.map(_evaluate_chunk, args) for v in part]
    return FidelityMap(grid, values, target=target, seed=seed, restarts=restarts)


def volume_fraction(fmap, threshold):
    """Weighted share of the chamber where F_nl >= threshold."""
    w = fmap.grid.weights
    return float(w[fmap.f >= threshold].sum() / w.sum())


class MaximumReport(NamedTuple):
    point: WeylPoint
    f_max: float
    delta_nl: float
    grid_point: WeylPoint
    grid_f_max: float
    flat: bool


def locate_maximum(fmap, x, target, refine=True, restarts=8, seed=0):
    """Map maximum, refined off-grid by Nelder-Mead over chamber coordinates,
    and its nonlocal distance to ``target``."""
    f = fmap.f
    k = int(np.argmax(f))
    best = fmap.values[k]
    grid_point, grid_f = best.point, best.f_nl
    flat = bool(f.max() - np.median(f) < FLAT_TOL)
    point, f_max = np.array(grid_point), grid_f
    if refine and not flat:
        g = overlap_form(x)
        # confirm the grid maximum with fresh restarts before refining
        best = max(best, local_orbit_fidelity(x, point, restarts=restarts, seed=seed, g=g), key=lambda v: v.f_nl)
        f_max = max(f_max, best.f_nl)
        cache = {"dressing": best.best_dressing}

        def neg(c):
            # F_nl is a class function, so images outside the chamber are fine
            r = local_orbit_fidelity(x, c, restarts=0, start=cache["dressing"], g=g)
            cache["dressing"] = r.best_dressing
            return -r.f_nl

        step = fmap.grid.spacing / 2
        simplex = np.vstack([point, point + np.diag([step] * 3)])
        res = minimize(neg, point, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-5, "fatol": 1e-8, "maxiter": 300})
        if -res.fun > f_max:
            point, f_max = np.array(canonicalize(res.x)), float(-res.fun)
    point = WeylPoint(*map(float, point))
    delta = nonlocal_distance(point, target)
    return MaximumReport(point, float(f_max), delta, WeylPoint(*map(float, grid_point)), float(grid_f), flat)


# ---------------------------------------------------------------- output


def map_csv(fmap):
    lines = ["c1,c2,c3,f_nl,weight"]
    for v, w in zip(fmap.values, fmap.grid.weights):
        c1, c2, c3 = v.point
        lines.append(f"{c1:.12g},{c2:.12g},{c3:.12g},{v.f_nl:.12g},{w:.12g}")
    return "\n".join(lines) + "\n"


def map_summary(fmap, report, threshold=0.9):
    return {
        "f_max": report.f_max,
        "argmax": list(report.point),
        "grid_argmax": list(report.grid_point),
        "grid_f_max": report.grid_f_max,
        "delta_nl": report.delta_nl,
        "flat_map": report.flat,
        f"volume_fraction_at_{threshold}": volume_fraction(fmap, threshold),
        "grid_size": len(fmap.grid),
        "grid_spacing": fmap.grid.spacing,
        "weighting": fmap.grid.weighting,
        "restarts": fmap.restarts,
        "seed": fmap.seed,
    }


def summary_json(summary):
    return json.dumps(summary, indent=2, sort_keys=True)


def in_grid_chamber(p):
    return in_chamber(p, folded=False)
