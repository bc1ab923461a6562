"""Dense joint-Gaussian reference implementations.

The state recursion makes (F_1..F_T, y_1..y_T) jointly Gaussian given the
labels, so the observation likelihood and the smoothing distribution can be
computed by brute force: build the stacked mean vector and covariance matrix
and evaluate.  This is O((T n)^3) and exists purely to cross-check the
recursive implementations on small instances.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .statespace import ModelParams, _as_labels, default_init

__all__ = ["joint_density_oracle", "smoothed_moments_oracle", "MAX_DENSE_SIZE"]

#: Refuse to build dense systems with more observation scalars than this.
MAX_DENSE_SIZE = 500


def _joint_moments(params: ModelParams, z: np.ndarray, init_mean, init_cov):
    """Stacked moments of states and observations given the regime path."""
    T = z.shape[0]
    p = params.n_factors
    n = params.n_obs
    A = params.transition
    H = params.innovation_cov
    cmat = params.measurement_matrix()

    m = np.zeros((T, p))
    V = np.zeros((T, T, p, p))  # V[s, t] = Cov(F_{s+1}, F_{t+1}) for s <= t
    prev_mean = np.asarray(init_mean, dtype=float)
    prev_cov = np.asarray(init_cov, dtype=float)
    for t in range(T):
        a = A[z[t - 1]] if t > 0 else A[z[0]]
        m[t] = a @ prev_mean
        V[t, t] = a @ prev_cov @ a.T + H[z[t]]
        V[t, t] = 0.5 * (V[t, t] + V[t, t].T)
        for s in range(t):
            V[s, t] = V[s, t - 1] @ a.T
        prev_mean = m[t]
        prev_cov = V[t, t]

    state_mean = m.reshape(T * p)
    state_cov = np.zeros((T * p, T * p))
    for s in range(T):
        for t in range(s, T):
            state_cov[s * p : (s + 1) * p, t * p : (t + 1) * p] = V[s, t]
            if t > s:
                state_cov[t * p : (t + 1) * p, s * p : (s + 1) * p] = V[s, t].T

    obs_mean = np.zeros((T, n))
    for t in range(T):
        obs_mean[t] = cmat @ (m[t] + params.regime_means[z[t]])
    obs_mean = obs_mean.reshape(T * n)

    big_c = np.kron(np.eye(T), cmat)  # block-diagonal measurement map
    obs_cov = big_c @ state_cov @ big_c.T
    obs_cov[np.diag_indices_from(obs_cov)] += np.tile(params.meas_var, T)
    cross = state_cov @ big_c.T  # Cov(states, observations)
    return state_mean, state_cov, obs_mean, obs_cov, cross


def _guard(params: ModelParams, T: int) -> None:
    if T * params.n_obs > MAX_DENSE_SIZE:
        raise ValueError(
            f"dense oracle limited to T * n_obs <= {MAX_DENSE_SIZE}, got {T * params.n_obs}"
        )


def joint_density_oracle(params, labels, data, init_mean=None, init_cov=None) -> float:
    """Log density of the stacked observations under one dense Gaussian."""
    z = _as_labels(labels, params.n_regimes)
    data = np.asarray(data, dtype=float)
    _guard(params, data.shape[0])
    if init_mean is None or init_cov is None:
        d_mean, d_cov = default_init(params, data)
        init_mean = d_mean if init_mean is None else init_mean
        init_cov = d_cov if init_cov is None else init_cov
    _, _, obs_mean, obs_cov, _ = _joint_moments(params, z, init_mean, init_cov)
    resid = data.reshape(-1) - obs_mean
    cho = cho_factor(obs_cov, lower=True)
    w = cho_solve(cho, resid)
    dim = resid.shape[0]
    return float(
        -0.5 * dim * np.log(2 * np.pi) - np.log(np.diag(cho[0])).sum() - 0.5 * resid @ w
    )


def smoothed_moments_oracle(params, labels, data, init_mean=None, init_cov=None):
    """Exact posterior mean (T, p) and covariance (Tp, Tp) of the states."""
    z = _as_labels(labels, params.n_regimes)
    data = np.asarray(data, dtype=float)
    _guard(params, data.shape[0])
    if init_mean is None or init_cov is None:
        d_mean, d_cov = default_init(params, data)
        init_mean = d_mean if init_mean is None else init_mean
        init_cov = d_cov if init_cov is None else init_cov
    state_mean, state_cov, obs_mean, obs_cov, cross = _joint_moments(
        params, z, init_mean, init_cov
    )
    cho = cho_factor(obs_cov, lower=True)
    gain = cho_solve(cho, cross.T).T  # (Tp, Tn)
    post_mean = state_mean + gain @ (data.reshape(-1) - obs_mean)
    post_cov = state_cov - gain @ cross.T
    post_cov = 0.5 * (post_cov + post_cov.T)
    p = params.n_factors
    return post_mean.reshape(-1, p), post_cov
