"""Squashed-Gaussian action head for a single longitudinal control.

The policy network emits two raw numbers per state: a mean and a raw log
standard deviation. The action is ``tanh(mu + sigma * xi)`` with
``xi ~ N(0,1)``, so everything lands in (-1, 1). Log-densities carry the
tanh change-of-variables term in the numerically safe form
``2*(log 2 - u - softplus(-2u))``.

All head functions are vectorized over a batch and operate on plain float64
arrays; gradients are closed-form so the learner can run backprop by hand.
"""

from __future__ import annotations

import numpy as np

from . import nets

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _softplus(x):
    # log(1 + e^x), stable for large |x|
    return np.logaddexp(0.0, x)


def split_head(raw):
    """Split raw network output ``(..., 2)`` into ``(mu, log_std, clamp_mask)``.

    ``log_std`` is clipped to [LOG_STD_MIN, LOG_STD_MAX]; ``clamp_mask`` is 1
    where the raw value was inside the bounds (gradient passes through) and 0
    where the clip was active.
    """
    raw = np.asarray(raw, dtype=np.float64)
    mu = raw[..., 0]
    raw_ls = raw[..., 1]
    log_std = np.clip(raw_ls, LOG_STD_MIN, LOG_STD_MAX)
    mask = ((raw_ls >= LOG_STD_MIN) & (raw_ls <= LOG_STD_MAX)).astype(np.float64)
    return mu, log_std, mask


def squash_correction(u):
    """log(1 - tanh(u)^2) without catastrophic cancellation."""
    return 2.0 * (np.log(2.0) - u - _softplus(-2.0 * u))


def sample(mu, log_std, xi):
    """Reparameterized draw. Returns ``(action, logp, u)``.

    ``xi`` is the caller-supplied standard-normal noise, which keeps the
    randomness outside this function (rollouts and tests control the stream).
    """
    sigma = np.exp(log_std)
    u = mu + sigma * xi
    action = np.tanh(u)
    logp = (-0.5 * xi * xi - log_std - _HALF_LOG_2PI) - squash_correction(u)
    return action, logp, u


def action_log_density(mu, log_std, action):
    """Log-density of an action value already in (-1, 1)."""
    action = np.asarray(action, dtype=np.float64)
    u = np.arctanh(action)
    sigma = np.exp(log_std)
    z = (u - mu) / sigma
    return (-0.5 * z * z - log_std - _HALF_LOG_2PI) - squash_correction(u)


def head_gradients(u, log_std, xi):
    """Partials of (logp, action) w.r.t. (mu, log_std) at a sampled point.

    Returns ``(dlp_dmu, dlp_dls, da_dmu, da_dls)``, each shaped like ``u``.
    The caller is responsible for applying the log-std clamp mask to the
    ``*_dls`` entries.
    """
    t = np.tanh(u)
    sx = np.exp(log_std) * xi
    dlp_dmu = 2.0 * t
    dlp_dls = -1.0 + 2.0 * t * sx
    da_dmu = 1.0 - t * t
    da_dls = (1.0 - t * t) * sx
    return dlp_dmu, dlp_dls, da_dmu, da_dls


def mean_action_grad(mu):
    """d tanh(mu) / d mu, used by the imitation term."""
    t = np.tanh(mu)
    return t, 1.0 - t * t


# --- convenience wrappers over a policy network ---------------------------


def act_stochastic(params, obs, rng: np.random.Generator) -> float:
    raw = nets.forward(params, np.asarray(obs, dtype=np.float64))
    mu, log_std, _ = split_head(raw)
    xi = rng.standard_normal()
    a, _, _ = sample(mu, log_std, xi)
    return float(a)


def act_deterministic(params, obs) -> float:
    raw = nets.forward(params, np.asarray(obs, dtype=np.float64))
    return float(np.tanh(raw[..., 0]))
