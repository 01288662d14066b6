import numpy as np
import pytest

from mgforge.errors import ValidationError
from mgforge.nonlocal_map import local_orbit_fidelity
from mgforge.optics import (
    TARGET_POINT, ExperimentConfig, PPBSParams, build_experiment_process, calibrate_to_targets,
    expected_reconstruction, ideal_process, is_non_unitary, model_targets, ppbs_kraus,
    ppbs_postselected_operator, ppbs_process, singular_value_ratio,
)
from mgforge.process import process_fidelity, process_purity


def test_ideal_ppbs_operator():
    k = ppbs_postselected_operator(PPBSParams())
    assert np.allclose(k, np.diag([-1, 1, 1, 1]) / 3, atol=1e-15)
    assert not is_non_unitary(k)


@pytest.mark.parametrize("eta", [0.25, 0.40])
def test_off_nominal_is_non_unitary(eta):
    k = ppbs_postselected_operator(PPBSParams(eta=eta, kappa=eta))
    assert abs(singular_value_ratio(k) - 1) > 1e-3
    assert is_non_unitary(k)


def test_success_probability():
    assert ppbs_process(PPBSParams()).trace_norm == pytest.approx(1 / 9, abs=1e-12)
    assert build_experiment_process(ExperimentConfig()).trace_norm == pytest.approx(1 / 9, abs=1e-12)


def test_noiseless_experiment_is_target_gate():
    x = build_experiment_process(ExperimentConfig())
    assert process_fidelity(x, ideal_process()) == pytest.approx(1, abs=1e-12)
    assert process_fidelity(expected_reconstruction(ExperimentConfig()), ideal_process()) == pytest.approx(1, abs=1e-12)


def test_zero_visibility_is_classical():
    cfg = ExperimentConfig(ppbs=PPBSParams(visibility=0.0))
    x = build_experiment_process(cfg)
    # without interference the map is diagonal in the computational basis
    assert local_orbit_fidelity(x, TARGET_POINT, restarts=8).f_nl == pytest.approx(0.375, abs=1e-6)
    assert len(ppbs_kraus(cfg.ppbs)) == 3


def test_depolarisation_monotone():
    vals = [model_targets(ExperimentConfig(depolarizing_p=p)) for p in (0.0, 0.05, 0.15)]
    for key in ("raw_f", "f_max", "purity"):
        seq = [v[key] for v in vals]
        assert all(a > b for a, b in zip(seq, seq[1:]))


def test_parameter_validation():
    with pytest.raises(ValidationError):
        PPBSParams(eta=1.2)
    with pytest.raises(ValidationError):
        ExperimentConfig(depolarizing_p=-0.1)
    with pytest.raises(ValidationError):
        ExperimentConfig(n_nominal=0)


def test_config_roundtrip():
    cfg = ExperimentConfig(ppbs=PPBSParams(0.3, 0.31, 0.95), depolarizing_p=0.02, waveplate_error=0.1, seed=4)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_calibrate_noiseless_targets():
    res = calibrate_to_targets({"raw_f": 1.0, "f_max": 1.0, "purity": 1.0})
    assert res.success
    assert res.config.depolarizing_p < 1e-3
    assert res.config.ppbs.eta == pytest.approx(1 / 3, abs=1e-3)
    assert res.config.ppbs.visibility > 0.999


def test_calibrate_unreachable_targets():
    res = calibrate_to_targets({"raw_f": 0.99, "f_max": 0.99, "purity": 0.5})
    assert not res.success
    assert "worst residual" in res.message
    with pytest.raises(ValidationError):
        calibrate_to_targets({"raw_f": 1.5, "f_max": 0.9, "purity": 0.9})


def test_calibrated_model_hits_targets():
    res = calibrate_to_targets()
    assert res.success
    for key, want in (("raw_f", 0.923), ("f_max", 0.947), ("purity", 0.898)):
        assert res.achieved[key] == pytest.approx(want, abs=0.015)
    x = expected_reconstruction(res.config)
    assert process_purity(x) == pytest.approx(res.achieved["purity"], abs=1e-12)
    assert process_fidelity(x, ideal_process()) < 1
