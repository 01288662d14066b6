"""Post-selected linear-optics CZ built from a partially polarising beamsplitter.

In the coincidence subspace the central PPBS acts as

    K = diag(2 eta - 1, sqrt(eta kappa), sqrt(eta kappa), kappa)

on |HH>, |HV>, |VH>, |VV>: the HH amplitude is the sum of both-reflect (+eta)
and both-transmit (-(1 - eta)) paths, V light is fully reflected and then
attenuated by sqrt(kappa) per arm. At eta = kappa = 1/3 this is
diag(-1, 1, 1, 1) / 3, a bit-flipped CZ succeeding with probability 1/9.

Imperfect two-photon interference (visibility v < 1) is an incoherent
mixture of the interfering operator and the two distinguishable-photon
branches. The experiment also carries a waveplate error on the inputs, white
depolarising noise and optional local dephasing.
"""
import json
import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .compiler import decompose_symmetric
from .errors import ValidationError
from .linalg import X, ry
from .matchgate import named_gate, named_matchgate
from .nonlocal_map import (
    build_chamber_grid,
    fidelity_map,
    local_orbit_fidelity,
    locate_maximum,
    volume_fraction,
)
from .process import (
    ProcessMatrix,
    compose,
    dephasing,
    depolarizing,
    kraus_to_chi,
    process_fidelity,
    process_purity,
    unitary_to_chi,
)
from .tomography import bootstrap_errors, mle_fit, simulate_counts, trace_preserving_projection
from .weyl import WeylPoint

log = logging.getLogger(__name__)

TARGET_POINT = WeylPoint(np.pi / 2, 0.0, 0.0)
PAPER_TARGETS = {"raw_f": 0.923, "f_max": 0.947, "purity": 0.898}
_XX = np.kron(X, X)


def _check_unit(name, value):
    if not 0 <= value <= 1:
        raise ValidationError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class PPBSParams:
    eta: float = 1 / 3
    kappa: float = 1 / 3
    visibility: float = 1.0

    def __post_init__(self):
        for name in ("eta", "kappa", "visibility"):
            _check_unit(name, getattr(self, name))


@dataclass(frozen=True)
class ExperimentConfig:
    ppbs: PPBSParams = field(default_factory=PPBSParams)
    depolarizing_p: float = 0.0
    dephasing_p: float = 0.0
    waveplate_error: float = 0.0  # radians, a Y rotation on both inputs
    n_nominal: int = 100_000  # photon pairs per setting, before post-selection
    seed: int = 0

    def __post_init__(self):
        _check_unit("depolarizing_p", self.depolarizing_p)
        _check_unit("dephasing_p", self.dephasing_p)
        if self.n_nominal < 1:
            raise ValidationError("n_nominal must be positive")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["ppbs"] = PPBSParams(**d.get("ppbs", {}))
        return cls(**d)


def ppbs_postselected_operator(params):
    """Coherent coincidence-subspace operator (the v = 1 interfering branch)."""
    e, k = params.eta, params.kappa
    return np.diag([2 * e - 1, np.sqrt(e * k), np.sqrt(e * k), k]).astype(complex)


def _branch_operators(params):
    """Distinguishable-photon branches: both reflect, or both transmit."""
    e, k = params.eta, params.kappa
    reflect = np.diag([e, np.sqrt(e * k), np.sqrt(e * k), k]).astype(complex)
    transmit = np.diag([-(1 - e), 0, 0, 0]).astype(complex)
    return reflect, transmit


def ppbs_kraus(params):
    v = params.visibility
    ops = [np.sqrt(v) * ppbs_postselected_operator(params)]
    if v < 1:
        ops += [np.sqrt(1 - v) * k for k in _branch_operators(params)]
    return ops


def singular_value_ratio(k):
    s = np.linalg.svd(k, compute_uv=False)
    return float(s.max() / s.min()) if s.min() > 0 else np.inf


def is_non_unitary(k, tol=1e-3):
    """True when ``k`` is not proportional to a unitary."""
    return abs(singular_value_ratio(k) - 1) > tol


def ppbs_process(params):
    """Trace-normalised chi of the post-selected PPBS; trace_norm is the mean
    success probability."""
    return ProcessMatrix.from_unnormalized(kraus_to_chi(ppbs_kraus(params)))


def _gate_dressing():
    """Locals turning the bit-flipped CZ into G_HH: G_HH = e^{i phase} post CZ pre."""
    dec = decompose_symmetric(named_matchgate("G_HH"))
    pre = _XX @ np.kron(dec.pre_top, dec.pre_bottom)
    post = np.exp(1j * dec.phase) * np.kron(dec.post_top, dec.post_bottom) @ _XX
    return pre, post


def ideal_process():
    return unitary_to_chi(named_gate("G_HH"))


def build_experiment_process(cfg):
    """Model chi of the full gate, before tomography."""
    pre, post = _gate_dressing()
    wp = np.kron(ry(cfg.waveplate_error), ry(cfg.waveplate_error))
    kraus = [post @ k @ pre @ wp for k in ppbs_kraus(cfg.ppbs)]
    x = ProcessMatrix.from_unnormalized(kraus_to_chi(kraus))
    if cfg.depolarizing_p > 0:
        x = compose(x, depolarizing(cfg.depolarizing_p))
    if cfg.dephasing_p > 0:
        x = compose(x, dephasing(cfg.dephasing_p))
    return x


def expected_reconstruction(cfg):
    """What noiseless tomography would return: the model made trace preserving."""
    x = build_experiment_process(cfg)
    chi = trace_preserving_projection(x.chi)
    return ProcessMatrix.from_external(chi / np.trace(chi).real, trace_norm=x.trace_norm)


def _stats(x):
    return [process_fidelity(x, ideal_process()), process_purity(x)]


def synthesize_experiment(cfg, grid="desk", restarts=8, resamples=50, jobs=1, map_restarts=None):
    """Simulate the whole pipeline and return (report, dataset, map)."""
    truth = build_experiment_process(cfg)
    data = simulate_counts(truth, cfg.n_nominal, cfg.seed)
    fit = mle_fit(data)
    x = fit.process
    boot = bootstrap_errors(data, resamples, _stats, seed=cfg.seed, start=x.chi)
    raw_f, purity = _stats(x)
    grid = build_chamber_grid(preset=grid) if isinstance(grid, str) else grid
    fmap = fidelity_map(x, grid, restarts=map_restarts or restarts, seed=cfg.seed, jobs=jobs,
                        target="experiment")
    best = locate_maximum(fmap, x, TARGET_POINT, seed=cfg.seed)
    nearest = grid.nearest(TARGET_POINT)
    report = {
        "config": cfg.to_dict(),
        "raw_fidelity": raw_f,
        "raw_fidelity_sigma": float(boot.std[0]),
        "purity": purity,
        "purity_sigma": float(boot.std[1]),
        "bootstrap_resamples": resamples,
        "bootstrap_failures": boot.failures,
        "success_probability": x.trace_norm,
        "mle_converged": fit.converged,
        "f_max": best.f_max,
        "argmax_point": list(best.point),
        "grid_f_max": best.grid_f_max,
        "grid_argmax_point": list(best.grid_point),
        "f_at_target_grid_point": fmap.values[nearest].f_nl,
        "delta_nl": best.delta_nl,
        "flat_map": best.flat,
        "volume_fraction_0.9": volume_fraction(fmap, 0.9),
        "grid_size": len(grid),
        "grid_spacing": grid.spacing,
        "seed": cfg.seed,
    }
    return report, data, fmap


def report_json(report):
    return json.dumps(report, indent=2, sort_keys=True)


# ---------------------------------------------------------------- calibration


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    config: ExperimentConfig
    achieved: dict
    residuals: dict
    success: bool
    message: str


_BOUNDS = {
    "depolarizing_p": (0.0, 0.5),
    "visibility": (0.5, 1.0),
    "eta": (0.25, 0.42),
    "waveplate_error": (0.0, 1.0),
}
_NOMINAL = np.array([0.0, 1.0, 1 / 3, 0.0])
_REGULARISER = 1e-4


def _config_from(params, base, bounds):
    p = [float(np.clip(v, *bounds[k])) for v, k in zip(params, bounds)]
    ppbs = PPBSParams(eta=p[2], kappa=p[2], visibility=p[1])
    return replace(base, ppbs=ppbs, depolarizing_p=p[0], waveplate_error=p[3])


def model_targets(cfg, restarts=2, seed=0):
    """raw fidelity, maximal local fidelity at [pi/2, 0, 0] and purity of the
    expected reconstruction."""
    x = expected_reconstruction(cfg)
    raw_f, purity = _stats(x)
    f_max = local_orbit_fidelity(x, TARGET_POINT, restarts=restarts, seed=seed).f_nl
    return {"raw_f": raw_f, "f_max": f_max, "purity": purity}


def calibrate_to_targets(targets=None, bounds=None, base=None, tol=0.015):
    """Fit (depolarizing p, visibility, eta = kappa, waveplate error) so the
    model reproduces ``targets``.

    A coarse lattice scan seeds a Nelder-Mead refinement. A weak pull towards
    the ideal parameters makes the answer unique. ``success`` is False when
    any target is missed by more than ``tol``.
    """
    targets = dict(PAPER_TARGETS if targets is None else targets)
    for k in ("raw_f", "f_max", "purity"):
        if not 1 / 16 <= targets[k] <= 1:
            raise ValidationError(f"target {k} must lie in [1/16, 1]")
    bounds = dict(_BOUNDS, **(bounds or {}))
    base = base or ExperimentConfig()
    keys = ("raw_f", "f_max", "purity")
    t = np.array([targets[k] for k in keys])

    def loss(params):
        cfg = _config_from(params, base, bounds)
        got = model_targets(cfg)
        miss = np.array([got[k] for k in keys]) - t
        reg = _REGULARISER * np.sum((np.array(params) - _NOMINAL) ** 2)
        return float(miss @ miss + reg)

    lattice = [
        (p, v, 1 / 3, e)
        for p in (0.0, 0.03, 0.06, 0.1, 0.2)
        for v in (1.0, 0.9)
        for e in (0.0, 0.15, 0.3, 0.45)
    ]
    scores = [loss(x0) for x0 in lattice]
    x0 = np.array(lattice[int(np.argmin(scores))])
    step = np.array([0.02, 0.03, 0.02, 0.08])
    simplex = np.vstack([x0, x0 + np.diag(step)])
    res = minimize(loss, x0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 1e-5, "fatol": 1e-10, "maxiter": 600})
    cfg = _config_from(res.x, base, bounds)
    achieved = model_targets(cfg, restarts=8)
    residuals = {k: achieved[k] - targets[k] for k in keys}
    worst = max(abs(r) for r in residuals.values())
    success = worst < tol
    message = "ok" if success else (
        f"no configuration within bounds reaches the targets; worst residual {worst:.4f} "
        f"(purity bounds fidelity: a process with purity P cannot stay close to a unitary "
        f"once P is far below 1)"
    )
    if not success:
        log.warning(message)
    return CalibrationResult(cfg, achieved, residuals, success, message)
