"""Pure-NumPy filtering kernels.

These mirror the compiled kernels in ``_core`` function for function; the
dispatcher in ``statespace`` picks whichever is available.  All kernels are
deterministic given their inputs: random draws enter only through arrays of
pre-drawn standard normals.

Status convention: every kernel returns a status int as its first element,
-1 on success, otherwise the 0-based period at which a decomposition failed.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

_LOG2PI = float(np.log(2.0 * np.pi))

# escalation schedule for ridge terms added to a non-PD conditioning matrix
_JITTERS = (1e-10, 1e-8, 1e-6, 1e-4)


def kalman_core(y, cmat, A, H, mu, qdiag, z, f0, p0):
    """Forward pass; returns (status, pred_mean, pred_cov, filt_mean,
    filt_cov, gains, ll)."""
    T, n = y.shape
    p = cmat.shape[1]
    pred_mean = np.zeros((T, p))
    pred_cov = np.zeros((T, p, p))
    filt_mean = np.zeros((T, p))
    filt_cov = np.zeros((T, p, p))
    gains = np.zeros((T, p, n))
    ll = np.zeros(T)
    obs_mean = mu @ cmat.T  # (G, n)

    fm, Pm = f0, p0
    for t in range(T):
        a = A[z[t - 1]] if t > 0 else A[z[0]]
        fp = a @ fm
        Pp = a @ Pm @ a.T + H[z[t]]
        Pp = 0.5 * (Pp + Pp.T)

        PC = Pp @ cmat.T  # (p, n)
        S = cmat @ PC
        S[np.diag_indices_from(S)] += qdiag
        try:
            cho = cho_factor(S, lower=True, check_finite=False)
        except LinAlgError:
            return t, pred_mean, pred_cov, filt_mean, filt_cov, gains, ll
        K = cho_solve(cho, PC.T, check_finite=False).T  # (p, n)
        v = y[t] - cmat @ fp - obs_mean[z[t]]
        fm = fp + K @ v
        Pm = Pp - K @ PC.T
        Pm = 0.5 * (Pm + Pm.T)

        w = cho_solve(cho, v, check_finite=False)
        ll[t] = -0.5 * n * _LOG2PI - np.log(np.diag(cho[0])).sum() - 0.5 * float(v @ w)
        if not np.isfinite(ll[t]):
            return t, pred_mean, pred_cov, filt_mean, filt_cov, gains, ll
        pred_mean[t] = fp
        pred_cov[t] = Pp
        filt_mean[t] = fm
        filt_cov[t] = Pm
        gains[t] = K
    return -1, pred_mean, pred_cov, filt_mean, filt_cov, gains, ll


def loglik_core(y, cmat, A, H, mu, qdiag, z, f0, p0):
    """Forward pass keeping only per-period log densities."""
    T, n = y.shape
    ll = np.zeros(T)
    obs_mean = mu @ cmat.T

    fm, Pm = f0, p0
    for t in range(T):
        a = A[z[t - 1]] if t > 0 else A[z[0]]
        fp = a @ fm
        Pp = a @ Pm @ a.T + H[z[t]]
        Pp = 0.5 * (Pp + Pp.T)
        PC = Pp @ cmat.T
        S = cmat @ PC
        S[np.diag_indices_from(S)] += qdiag
        try:
            cho = cho_factor(S, lower=True, check_finite=False)
        except LinAlgError:
            return t, ll
        K = cho_solve(cho, PC.T, check_finite=False).T
        v = y[t] - cmat @ fp - obs_mean[z[t]]
        fm = fp + K @ v
        Pm = Pp - K @ PC.T
        Pm = 0.5 * (Pm + Pm.T)
        w = cho_solve(cho, v, check_finite=False)
        ll[t] = -0.5 * n * _LOG2PI - np.log(np.diag(cho[0])).sum() - 0.5 * float(v @ w)
        if not np.isfinite(ll[t]):
            return t, ll
    return -1, ll


def _chol_jittered(mat):
    """Cholesky with an escalating ridge; returns (factor, n_jitter_steps)."""
    try:
        return np.linalg.cholesky(mat), 0
    except np.linalg.LinAlgError:
        pass
    scale = max(float(np.trace(mat)) / mat.shape[0], 1.0)
    for k, eps in enumerate(_JITTERS, start=1):
        try:
            return np.linalg.cholesky(mat + eps * scale * np.eye(mat.shape[0])), k
        except np.linalg.LinAlgError:
            continue
    return None, len(_JITTERS)


def ffbs_core(filt_mean, filt_cov, A, H, z, normals):
    """Backward sampling pass.

    ``normals`` has shape (n_draws, T, p).  Gains and conditional
    covariances depend only on filtered moments, so they are computed once
    and reused across draws.  Returns (status, paths, n_jitter).
    """
    T, p = filt_mean.shape
    nd = normals.shape[0]
    paths = np.zeros((nd, T, p))
    n_jitter = 0

    chol_T, jit = _chol_jittered(filt_cov[T - 1])
    if chol_T is None:
        return T - 1, paths, n_jitter + jit
    n_jitter += jit

    Js = np.zeros((T - 1, p, p)) if T > 1 else np.zeros((0, p, p))
    Ls = np.zeros((T - 1, p, p)) if T > 1 else np.zeros((0, p, p))
    Afm = np.zeros((T - 1, p)) if T > 1 else np.zeros((0, p))
    for t in range(T - 2, -1, -1):
        a = A[z[t]]
        P = filt_cov[t]
        AP = a @ P
        Sf = AP @ a.T + H[z[t + 1]]
        Sf = 0.5 * (Sf + Sf.T)
        try:
            cho = cho_factor(Sf, lower=True, check_finite=False)
            J = cho_solve(cho, AP, check_finite=False).T
        except LinAlgError:
            Lf, jit = _chol_jittered(Sf)
            if Lf is None:
                return t, paths, n_jitter + jit
            n_jitter += jit
            cho = (Lf, True)
            J = cho_solve(cho, AP, check_finite=False).T
        cov = P - J @ AP
        cov = 0.5 * (cov + cov.T)
        L, jit = _chol_jittered(cov)
        if L is None:
            return t, paths, n_jitter + jit
        n_jitter += jit
        Js[t] = J
        Ls[t] = L
        Afm[t] = a @ filt_mean[t]

    paths[:, T - 1] = filt_mean[T - 1] + normals[:, T - 1] @ chol_T.T
    for t in range(T - 2, -1, -1):
        dev = paths[:, t + 1] - Afm[t]
        paths[:, t] = filt_mean[t] + dev @ Js[t].T + normals[:, t] @ Ls[t].T
    return -1, paths, n_jitter
