"""Joint time-pose Gaussian mixture: K-means seeding, EM refinement, persistence.

The mixture is fit on rows [t, x] where x is the pose vector, so each
component carries a scalar time block, a spatial block, and their
cross-covariance.  Components are kept sorted by their time centers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .data import PhaseSchedule, Trajectory, _frozen_array

COLLAPSE_EPS = 1e-12


@dataclass(frozen=True)
class GaussianComponent:
    """One mixture component over [t, x]; the leading axis is time."""

    prior: float
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _frozen_array(self.mean)
        cov = np.array(self.cov, dtype=float)
        if mean.ndim != 1 or len(mean) < 2:
            raise ValueError("mean must be a vector [t, x] with at least 2 entries")
        if cov.shape != (len(mean), len(mean)):
            raise ValueError("covariance shape must match the mean")
        if not (np.isfinite(mean).all() and np.isfinite(cov).all()):
            raise ValueError("component parameters must be finite")
        if not (self.prior > 0.0):
            raise ValueError("component prior must be positive")
        scale = max(1.0, float(np.abs(cov).max()))
        if np.abs(cov - cov.T).max() > 1e-9 * scale:
            raise ValueError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "prior", float(self.prior))
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance must be symmetric positive definite") from None
        if not (cov[0, 0] > 0.0):
            raise ValueError("time variance must be positive")

    @property
    def dim(self) -> int:
        """Spatial dimensionality (mean length minus the time entry)."""
        return len(self.mean) - 1

    @property
    def time_mean(self) -> float:
        return float(self.mean[0])

    @property
    def x_mean(self) -> np.ndarray:
        return self.mean[1:]


@dataclass(frozen=True)
class ComponentBlocks:
    """Block decomposition of one component: time, space, and cross terms."""

    time_mean: float
    x_mean: np.ndarray
    tt: float
    tx: np.ndarray
    xt: np.ndarray
    xx: np.ndarray


def blocks(component: GaussianComponent) -> ComponentBlocks:
    """Slice a component into its time/space mean and covariance blocks."""
    mean, cov = component.mean, component.cov
    return ComponentBlocks(
        time_mean=float(mean[0]),
        x_mean=mean[1:],
        tt=float(cov[0, 0]),
        tx=cov[0, 1:],
        xt=cov[1:, 0],
        xx=cov[1:, 1:],
    )


@dataclass(frozen=True)
class GmmModel:
    """A fitted mixture plus the timing metadata needed downstream."""

    components: tuple
    duration: float
    phases: PhaseSchedule

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("model needs at least one component")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise ValueError("components must share one spatial dimension")
        total = sum(c.prior for c in comps)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"priors must sum to 1, got {total!r}")
        centers = [c.time_mean for c in comps]
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise ValueError("components must be strictly ordered by time center")
        if not (self.duration > 0.0):
            raise ValueError("duration must be positive")
        if abs(self.phases.duration - self.duration) > 1e-9:
            raise ValueError("phase schedule duration must match the model duration")

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def n_components(self) -> int:
        return len(self.components)

    def priors(self) -> np.ndarray:
        return np.array([c.prior for c in self.components])

    def time_means(self) -> np.ndarray:
        return np.array([c.time_mean for c in self.components])

    def time_vars(self) -> np.ndarray:
        return np.array([c.cov[0, 0] for c in self.components])

    def x_means(self) -> np.ndarray:
        return np.stack([c.x_mean for c in self.components])


@dataclass(frozen=True)
class FitConfig:
    n_components: int = 15
    max_iters: int = 200
    loglik_tol: float = 1e-6
    cov_floor: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.n_components < 2:
            raise ValueError("n_components must be at least 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not (self.loglik_tol > 0.0 and self.cov_floor > 0.0):
            raise ValueError("loglik_tol and cov_floor must be positive")


def _cluster_component(points: np.ndarray, prior: float, cov_floor: float) -> GaussianComponent:
    mean = points.mean(axis=0)
    diff = points - mean
    cov = diff.T @ diff / len(points) + cov_floor * np.eye(points.shape[1])
    return GaussianComponent(prior, mean, cov)


def kmeans_init(dataset: np.ndarray, n_clusters: int, seed: int,
                cov_floor: float = 1e-6, max_iters: int = 300):
    """Seed mixture components by K-means over [t, x] rows.

    The time column is rescaled to the spatial RMS spread before clustering
    so distances are not dominated by either axis; component statistics are
    computed on the unscaled data.  Returns (assignments, components) with
    components sorted by time center and assignments relabeled to match.
    """
    data = np.asarray(dataset, dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValueError("dataset must be (n, D+1) rows [t, x]")
    n = len(data)
    if n_clusters < 1:
        raise ValueError("n_clusters must be positive")
    if n < n_clusters:
        raise ValueError(f"dataset of {n} rows cannot seed {n_clusters} clusters")

    t_rms = float(data[:, 0].std())
    x_dev = data[:, 1:] - data[:, 1:].mean(axis=0)
    x_rms = float(np.sqrt(np.mean(x_dev**2)))
    scale = x_rms / t_rms if t_rms > 0.0 and x_rms > 0.0 else 1.0
    work = data.copy()
    work[:, 0] *= scale

    rng = np.random.default_rng(seed)
    centroids = work[np.sort(rng.choice(n, size=n_clusters, replace=False))].copy()
    assign = np.full(n, -1)
    for _ in range(max_iters):
        dists = np.linalg.norm(work[:, None, :] - centroids[None, :, :], axis=2)
        new_assign = dists.argmin(axis=1)
        counts = np.bincount(new_assign, minlength=n_clusters)
        for _ in range(n_clusters):
            if not np.any(counts == 0):
                break
            # re-seed an empty cluster from the point farthest from its centroid
            k = int(np.flatnonzero(counts == 0)[0])
            own = dists[np.arange(n), new_assign]
            far = int(own.argmax())
            centroids[k] = work[far]
            new_assign[far] = k
            dists[far] = np.linalg.norm(work[far] - centroids, axis=1)
            counts = np.bincount(new_assign, minlength=n_clusters)
        if np.any(counts == 0):
            raise RuntimeError("k-means could not keep every cluster populated")
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for k in range(n_clusters):
            centroids[k] = work[assign == k].mean(axis=0)

    order = np.argsort([data[assign == k][:, 0].mean() for k in range(n_clusters)],
                       kind="stable")
    relabel = np.empty(n_clusters, dtype=int)
    relabel[order] = np.arange(n_clusters)
    assign = relabel[assign]
    components = [
        _cluster_component(data[assign == k], np.count_nonzero(assign == k) / n, cov_floor)
        for k in range(n_clusters)
    ]
    return assign, components


def _log_densities(data: np.ndarray, means: np.ndarray, covs: np.ndarray) -> np.ndarray:
    """Per-component Gaussian log densities, (n, G), via Cholesky solves."""
    n, d = data.shape
    out = np.empty((n, len(means)))
    norm = 0.5 * d * np.log(2.0 * np.pi)
    for g in range(len(means)):
        chol = np.linalg.cholesky(covs[g])
        sol = solve_triangular(chol, (data - means[g]).T, lower=True)
        out[:, g] = -norm - np.log(np.diag(chol)).sum() - 0.5 * (sol**2).sum(axis=0)
    return out


def em_fit(dataset: np.ndarray, init: Sequence[GaussianComponent], config: FitConfig):
    """Run EM from the given components; returns (components, loglik trace).

    The covariance floor is re-added after every M-step.  A component whose
    responsibility mass collapses below 1e-12 is reset from the datum the
    current mixture explains worst.  Floored updates and resets are not
    exact M-steps, so an iteration can lower the log-likelihood; when that
    happens the previous iterate is kept and the fit stops, which keeps the
    trace non-decreasing.
    """
    data = np.asarray(dataset, dtype=float)
    if data.ndim != 2 or len(data) < 1:
        raise ValueError("dataset must be a non-empty (n, D+1) array")
    n, d = data.shape
    n_comp = len(init)
    if n_comp < 1:
        raise ValueError("need at least one initial component")
    priors = np.array([c.prior for c in init], dtype=float)
    priors = priors / priors.sum()
    means = np.stack([np.asarray(c.mean, dtype=float) for c in init])
    covs = np.stack([np.asarray(c.cov, dtype=float) for c in init])
    eye = np.eye(d)
    global_mean = data.mean(axis=0)
    global_cov = (data - global_mean).T @ (data - global_mean) / n

    trace = []
    prev = None
    backup = None
    for _ in range(config.max_iters):
        logp = _log_densities(data, means, covs) + np.log(priors)
        per_point = logsumexp(logp, axis=1)
        loglik = float(per_point.sum())
        if prev is not None and loglik < prev:
            priors, means, covs = backup
            break
        trace.append(loglik)
        if prev is not None and loglik - prev < config.loglik_tol * abs(prev):
            break
        prev = loglik
        backup = (priors.copy(), means.copy(), covs.copy())

        resp = np.exp(logp - per_point[:, None])
        mass = resp.sum(axis=0)
        for g in range(n_comp):
            if mass[g] < COLLAPSE_EPS:
                worst = int(per_point.argmin())
                means[g] = data[worst]
                covs[g] = global_cov + config.cov_floor * eye
                mass[g] = 1.0
                continue
            means[g] = resp[:, g] @ data / mass[g]
            diff = data - means[g]
            cov = (resp[:, g] * diff.T) @ diff / mass[g]
            covs[g] = 0.5 * (cov + cov.T) + config.cov_floor * eye
        priors = mass / mass.sum()

    components = [GaussianComponent(priors[g], means[g], covs[g]) for g in range(n_comp)]
    return components, np.asarray(trace)


@dataclass(frozen=True)
class FitResult:
    model: GmmModel
    loglik_trace: np.ndarray


def fit_gmm(demos: Sequence[Trajectory], config: FitConfig = FitConfig(),
            phases: PhaseSchedule | None = None) -> FitResult:
    """Fit a sorted time-pose mixture on the pooled demonstration samples."""
    if not demos:
        raise ValueError("need at least one demonstration")
    duration = demos[0].duration
    dim = demos[0].dim
    for j, demo in enumerate(demos):
        if abs(demo.duration - duration) > 1e-9 or demo.dim != dim:
            raise ValueError(f"demonstration {j} disagrees in duration or dimension")
    dataset = np.vstack([np.column_stack([d.times, d.values]) for d in demos])
    if len(dataset) < config.n_components:
        raise ValueError(
            f"{config.n_components} components need at least as many samples, got {len(dataset)}"
        )
    _, init = kmeans_init(dataset, config.n_components, config.seed, config.cov_floor)
    components, trace = em_fit(dataset, init, config)
    components.sort(key=lambda c: c.time_mean)
    if phases is None:
        phases = PhaseSchedule(1.0, duration - 1.0, duration)
    model = GmmModel(tuple(components), duration, phases)
    return FitResult(model, trace)


def model_to_dict(model: GmmModel) -> dict:
    return {
        "D": model.dim,
        "T": model.duration,
        "phases": {
            "grasp_end": model.phases.grasp_end,
            "release_start": model.phases.release_start,
        },
        "components": [
            {
                "pi": c.prior,
                "mu": [float(v) for v in c.mean],
                "sigma": [float(v) for v in c.cov.ravel()],
            }
            for c in model.components
        ],
    }


def model_from_dict(obj: dict) -> GmmModel:
    try:
        dim = int(obj["D"])
        duration = float(obj["T"])
        phases = PhaseSchedule(
            float(obj["phases"]["grasp_end"]),
            float(obj["phases"]["release_start"]),
            duration,
        )
        raw = obj["components"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"model JSON missing field: {exc}") from exc
    comps = []
    for i, c in enumerate(raw):
        mu = np.asarray(c["mu"], dtype=float)
        if len(mu) != dim + 1:
            raise ValueError(f"component {i}: mu must have D+1={dim + 1} entries")
        sigma = np.asarray(c["sigma"], dtype=float)
        if sigma.size != (dim + 1) ** 2:
            raise ValueError(f"component {i}: sigma must have (D+1)^2 entries")
        sigma = sigma.reshape(dim + 1, dim + 1)
        sigma = 0.5 * (sigma + sigma.T)
        try:
            comps.append(GaussianComponent(float(c["pi"]), mu, sigma))
        except ValueError as exc:
            raise ValueError(f"component {i}: {exc}") from exc
    return GmmModel(tuple(comps), duration, phases)


def save_model(model: GmmModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n",
                          encoding="utf-8")


def load_model(path) -> GmmModel:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return model_from_dict(obj)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
