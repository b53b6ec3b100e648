"""Condition the joint (time, pose) mixture on time to regress pose trajectories.

Activation weights are computed in log space with a logsumexp
normalization, so extreme query times degrade gracefully instead of
producing NaNs.  Each component contributes a linear-in-time prediction
built from its mean and time-normalized slope.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .data import Trajectory
from .model import GmmModel
from .reparam import ReparamModel, source_decomposition


def _regression_terms(model):
    """Extract (priors, time means, time vars, x means, slopes) as arrays."""
    if isinstance(model, ReparamModel):
        slopes = model.slopes
    elif isinstance(model, GmmModel):
        slopes, _ = source_decomposition(model)
    else:
        raise TypeError(f"cannot regress a {type(model).__name__}")
    return (model.priors(), model.time_means(), model.time_vars(),
            model.x_means(), slopes)


def _log_activations(priors, t_means, t_vars, times) -> np.ndarray:
    """Log of normalized per-component weights at each query time, (n, G)."""
    sq = (times[:, None] - t_means[None, :]) ** 2
    log_w = (np.log(priors)[None, :]
             - 0.5 * np.log(2.0 * np.pi * t_vars)[None, :]
             - sq / (2.0 * t_vars[None, :]))
    return log_w - logsumexp(log_w, axis=1, keepdims=True)


def activation_weights(model, t: float) -> np.ndarray:
    """Normalized component weights at time t; always sums to 1."""
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("query time must be finite")
    priors, t_means, t_vars, _, _ = _regression_terms(model)
    return np.exp(_log_activations(priors, t_means, t_vars, np.array([t])))[0]


def _validated_times(times, duration: float) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-D array")
    if len(times) < 2:
        raise ValueError("regression needs at least two query times")
    if not np.isfinite(times).all():
        raise ValueError("query times must be finite")
    if not np.all(np.diff(times) > 0.0):
        raise ValueError("query times must be strictly increasing")
    if times[0] < -1e-9 or times[-1] > duration + 1e-9:
        raise ValueError(f"query times must lie within [0, {duration}]")
    return times


def regress(model, times) -> Trajectory:
    """Expected pose at each query time.

    Query times must be strictly increasing within [0, duration]; the
    output trajectory is re-anchored so its first timestamp is zero.
    """
    times = _validated_times(times, model.duration)
    priors, t_means, t_vars, x_means, slopes = _regression_terms(model)
    weights = np.exp(_log_activations(priors, t_means, t_vars, times))
    preds = x_means[None, :, :] + slopes[None, :, :] * (
        times[:, None, None] - t_means[None, :, None])
    values = np.einsum("ng,ngd->nd", weights, preds)
    return Trajectory(times - times[0], values)


def regress_with_variance(model, times):
    """Regression plus the per-time conditional covariance of the mixture."""
    times = _validated_times(times, model.duration)
    priors, t_means, t_vars, x_means, slopes = _regression_terms(model)
    if isinstance(model, ReparamModel):
        spatial = model.spatial_covs
    else:
        _, spatial = source_decomposition(model)
    weights = np.exp(_log_activations(priors, t_means, t_vars, times))
    preds = x_means[None, :, :] + slopes[None, :, :] * (
        times[:, None, None] - t_means[None, :, None])
    values = np.einsum("ng,ngd->nd", weights, preds)
    # per-component conditional covariance is constant in time
    cond = t_vars[:, None, None] * (
        spatial - np.einsum("gd,ge->gde", slopes, slopes))
    second = cond[None, :, :, :] + np.einsum("ngd,nge->ngde", preds, preds)
    mixed = np.einsum("ng,ngde->nde", weights, second)
    covs = mixed - np.einsum("nd,ne->nde", values, values)
    return Trajectory(times - times[0], values), covs
