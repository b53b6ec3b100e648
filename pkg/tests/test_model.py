import numpy as np
import pytest

from gmmgen.data import PhaseSchedule, Trajectory
from gmmgen.model import (FitConfig, GaussianComponent, GmmModel, blocks,
                          em_fit, fit_gmm, kmeans_init, load_model,
                          save_model)

from conftest import assert_monotone_loglik


def test_blocks_hand_case():
    comp = GaussianComponent(1.0, [0.5, 2.0], [[2.0, 1.0], [1.0, 3.0]])
    b = blocks(comp)
    assert b.time_mean == 0.5
    assert b.x_mean[0] == 2.0
    assert b.tt == 2.0
    assert b.tx[0] == 1.0 and b.xt[0] == 1.0
    assert b.xx[0, 0] == 3.0
    # slope and residual shape implied by the blocks
    assert b.xt[0] / b.tt == pytest.approx(0.5)
    assert b.xx[0, 0] / b.tt == pytest.approx(1.5)


def test_component_validation():
    eye = np.eye(2)
    with pytest.raises(ValueError):
        GaussianComponent(0.0, [0.0, 0.0], eye)
    with pytest.raises(ValueError):
        GaussianComponent(0.5, [0.0], [[1.0]])  # needs [t, x]
    with pytest.raises(ValueError):
        GaussianComponent(0.5, [0.0, 0.0], [[1.0, 0.5], [0.4, 1.0]])  # asymmetric
    with pytest.raises(ValueError):
        GaussianComponent(0.5, [0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])  # indefinite
    with pytest.raises(ValueError):
        GaussianComponent(0.5, [0.0, 0.0], np.eye(3))  # shape mismatch


def test_model_validation():
    c1 = GaussianComponent(0.5, [0.0, 0.0], np.eye(2))
    c2 = GaussianComponent(0.5, [1.0, 1.0], np.eye(2))
    phases = PhaseSchedule(0.2, 0.8, 1.0)
    model = GmmModel((c1, c2), 1.0, phases)
    assert model.n_components == 2 and model.dim == 1
    assert np.allclose(model.priors(), [0.5, 0.5])
    with pytest.raises(ValueError):
        GmmModel((c2, c1), 1.0, phases)  # not time sorted
    with pytest.raises(ValueError):
        GmmModel((c1, GaussianComponent(0.6, [1.0, 1.0], np.eye(2))), 1.0, phases)
    with pytest.raises(ValueError):
        GmmModel((c1, c2), 2.0, phases)  # phase/duration mismatch


def test_fitconfig_validation():
    with pytest.raises(ValueError):
        FitConfig(n_components=1)
    with pytest.raises(ValueError):
        FitConfig(max_iters=0)
    with pytest.raises(ValueError):
        FitConfig(loglik_tol=0.0)


def test_kmeans_recovers_separated_clusters():
    rng = np.random.default_rng(11)
    a = rng.normal([0.0, 0.0], 0.05, size=(60, 2))
    b = rng.normal([5.0, 3.0], 0.05, size=(40, 2))
    data = np.vstack([a, b])
    assign, comps = kmeans_init(data, 2, seed=0)
    assert np.all(assign[:60] == 0) and np.all(assign[60:] == 1)
    assert comps[0].time_mean < comps[1].time_mean
    assert comps[0].prior == pytest.approx(0.6)
    assert np.allclose(comps[0].mean, a.mean(axis=0))
    assert np.allclose(comps[1].mean, b.mean(axis=0))


def test_kmeans_input_validation():
    data = np.random.default_rng(0).normal(size=(5, 2))
    with pytest.raises(ValueError):
        kmeans_init(data, 6, seed=0)  # more clusters than rows
    with pytest.raises(ValueError):
        kmeans_init(data, 0, seed=0)
    with pytest.raises(ValueError):
        kmeans_init(data[:, 0], 2, seed=0)


def test_em_single_component_closed_form():
    rng = np.random.default_rng(3)
    data = rng.normal(size=(200, 3))
    init = [GaussianComponent(1.0, data[0], np.eye(3))]
    config = FitConfig(n_components=2, max_iters=5, cov_floor=1e-6)
    comps, trace = em_fit(data, init, config)
    mean = data.mean(axis=0)
    diff = data - mean
    cov = diff.T @ diff / len(data) + config.cov_floor * np.eye(3)
    assert np.allclose(comps[0].mean, mean, atol=1e-12)
    assert np.allclose(comps[0].cov, cov, atol=1e-12)
    assert comps[0].prior == 1.0
    assert len(trace) <= 5


def test_em_loglik_trace_monotone():
    rng = np.random.default_rng(17)
    t = rng.uniform(0.0, 4.0, size=400)
    x = np.sin(t) + rng.normal(scale=0.2, size=400)
    data = np.column_stack([t, x])
    _, init = kmeans_init(data, 4, seed=2)
    _, trace = em_fit(data, init, FitConfig(n_components=4, seed=2))
    assert_monotone_loglik(trace)


def test_em_two_component_recovery():
    rng = np.random.default_rng(42)
    n = 2000
    half = n // 2
    mean_a = np.array([1.0, -0.5])
    mean_b = np.array([4.0, 2.0])
    cov_a = np.array([[0.20, 0.05], [0.05, 0.10]])
    cov_b = np.array([[0.15, -0.04], [-0.04, 0.25]])
    data = np.vstack([
        rng.multivariate_normal(mean_a, cov_a, size=half),
        rng.multivariate_normal(mean_b, cov_b, size=n - half),
    ])
    _, init = kmeans_init(data, 2, seed=0)
    comps, trace = em_fit(data, init, FitConfig(n_components=2, seed=0))
    assert_monotone_loglik(trace)
    comps = sorted(comps, key=lambda c: c.time_mean)
    assert np.allclose(comps[0].mean, mean_a, atol=0.05)
    assert np.allclose(comps[1].mean, mean_b, atol=0.05)
    assert np.allclose(comps[0].cov, cov_a, atol=0.05)
    assert np.allclose(comps[1].cov, cov_b, atol=0.05)
    assert abs(comps[0].prior - 0.5) < 0.05


def test_fit_gmm_validation():
    with pytest.raises(ValueError):
        fit_gmm([])
    base = Trajectory([0.0, 1.0], np.zeros((2, 6)))
    other = Trajectory([0.0, 2.0], np.zeros((2, 6)))
    with pytest.raises(ValueError):
        fit_gmm([base, other], FitConfig(n_components=2))
    with pytest.raises(ValueError) as err:
        fit_gmm([base], FitConfig(n_components=15))
    assert "15 components" in str(err.value)


def test_fit_gmm_sorted_and_phased(demos, fit_result):
    model = fit_result.model
    centers = model.time_means()
    assert np.all(np.diff(centers) > 0.0)
    assert model.duration == pytest.approx(demos[0].duration)
    assert model.phases.grasp_end == pytest.approx(1.0)
    assert model.phases.release_start == pytest.approx(model.duration - 1.0)
    assert_monotone_loglik(fit_result.loglik_trace)


def test_model_json_roundtrip(tmp_path, model):
    path = tmp_path / "model.json"
    save_model(model, path)
    back = load_model(path)
    assert back.duration == model.duration
    assert back.phases == model.phases
    assert back.n_components == model.n_components
    for a, b in zip(back.components, model.components):
        assert a.prior == b.prior
        assert np.array_equal(a.mean, b.mean)
        assert np.array_equal(a.cov, b.cov)


def test_load_model_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ValueError):
        load_model(path)
    with pytest.raises(ValueError):
        load_model(tmp_path / "missing.json")
