# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled filtering kernels; function-for-function twin of ``_core_py``.

LAPACK conventions: buffers are C-contiguous, and every symmetric matrix is
identical under a column-major reinterpretation, so dpotrf/dpotrs are called
with uplo='L' throughout.  After dpotrf the row-major view holds the
transposed factor in its upper triangle, which ``_tri_mul`` accounts for.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport isinf, isnan, log
from scipy.linalg.cython_lapack cimport dpotrf, dpotrs

cnp.import_array()

cdef double _LOG2PI = 1.8378770664093454836

cdef double[4] _JITTERS
_JITTERS[0] = 1e-10
_JITTERS[1] = 1e-8
_JITTERS[2] = 1e-6
_JITTERS[3] = 1e-4


cdef inline int _chol(double[:, ::1] buf) noexcept:
    """In-place Cholesky of a symmetric buffer; 0 on success."""
    cdef int n = buf.shape[0], info = 0
    cdef char uplo = b'L'
    dpotrf(&uplo, &n, &buf[0, 0], &n, &info)
    return info


cdef int _chol_jittered(double[:, ::1] buf, double[:, ::1] src) noexcept:
    """Copy src into buf and factor, escalating a ridge on failure.

    Returns the number of jitter steps used, or -1 when even the largest
    ridge fails.
    """
    cdef int p = src.shape[0]
    cdef int i, j, k
    cdef double scale, trace = 0.0
    for i in range(p):
        trace += src[i, i]
    scale = trace / p
    if scale < 1.0:
        scale = 1.0
    for k in range(5):
        for i in range(p):
            for j in range(p):
                buf[i, j] = src[i, j]
        if k > 0:
            for i in range(p):
                buf[i, i] += _JITTERS[k - 1] * scale
        if _chol(buf) == 0:
            return k
    return -1


cdef inline void _tri_mul(double[:, ::1] chol_buf, double* eps, double* out, int p) noexcept:
    """out = L @ eps where the factor sits transposed in chol_buf's upper
    row-major triangle (the dpotrf('L') layout)."""
    cdef int i, j
    cdef double acc
    for i in range(p):
        acc = 0.0
        for j in range(i + 1):
            acc += chol_buf[j, i] * eps[j]
        out[i] = acc


def kalman_core(double[:, ::1] y, double[:, ::1] cmat,
                double[:, :, ::1] A, double[:, :, ::1] H,
                double[:, ::1] mu, double[::1] qdiag,
                cnp.int64_t[::1] z, double[::1] f0, double[:, ::1] p0):
    cdef int T = y.shape[0], n = y.shape[1], p = cmat.shape[1]
    cdef int G = A.shape[0]

    pred_mean_arr = np.zeros((T, p))
    pred_cov_arr = np.zeros((T, p, p))
    filt_mean_arr = np.zeros((T, p))
    filt_cov_arr = np.zeros((T, p, p))
    gains_arr = np.zeros((T, p, n))
    ll_arr = np.zeros(T)
    cdef double[:, ::1] pred_mean = pred_mean_arr
    cdef double[:, :, ::1] pred_cov = pred_cov_arr
    cdef double[:, ::1] filt_mean = filt_mean_arr
    cdef double[:, :, ::1] filt_cov = filt_cov_arr
    cdef double[:, :, ::1] gains = gains_arr
    cdef double[::1] ll = ll_arr

    obs_mean_arr = np.asarray(mu) @ np.asarray(cmat).T
    cdef double[:, ::1] obs_mean = np.ascontiguousarray(obs_mean_arr)

    fm_arr = np.array(f0, dtype=float)
    Pm_arr = np.array(p0, dtype=float)
    cdef double[::1] fm = fm_arr
    cdef double[:, ::1] Pm = Pm_arr
    scratch = [np.zeros(p), np.zeros((p, p)), np.zeros((p, p)), np.zeros((p, n)),
               np.zeros((n, n)), np.zeros((p, n)), np.zeros(n), np.zeros(n)]
    cdef double[::1] fp = scratch[0]
    cdef double[:, ::1] tmp_pp = scratch[1]
    cdef double[:, ::1] Pp = scratch[2]
    cdef double[:, ::1] PC = scratch[3]
    cdef double[:, ::1] S = scratch[4]
    cdef double[:, ::1] K = scratch[5]
    cdef double[::1] v = scratch[6]
    cdef double[::1] w = scratch[7]

    cdef int t, i, j, k, g, gprev, info, nrhs
    cdef char uplo = b'L'
    cdef double acc, halflogdet, quad

    for t in range(T):
        gprev = z[t - 1] if t > 0 else z[0]
        g = z[t]
        # predict
        for i in range(p):
            acc = 0.0
            for k in range(p):
                acc += A[gprev, i, k] * fm[k]
            fp[i] = acc
        for i in range(p):
            for j in range(p):
                acc = 0.0
                for k in range(p):
                    acc += A[gprev, i, k] * Pm[k, j]
                tmp_pp[i, j] = acc
        for i in range(p):
            for j in range(p):
                acc = H[g, i, j]
                for k in range(p):
                    acc += tmp_pp[i, k] * A[gprev, j, k]
                Pp[i, j] = acc
        for i in range(p):
            for j in range(i + 1, p):
                acc = 0.5 * (Pp[i, j] + Pp[j, i])
                Pp[i, j] = acc
                Pp[j, i] = acc
        # innovation covariance
        for i in range(p):
            for j in range(n):
                acc = 0.0
                for k in range(p):
                    acc += Pp[i, k] * cmat[j, k]
                PC[i, j] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(p):
                    acc += cmat[i, k] * PC[k, j]
                S[i, j] = acc
            S[i, i] += qdiag[i]
        info = 0
        dpotrf(&uplo, &n, &S[0, 0], &n, &info)
        if info != 0:
            return t, pred_mean_arr, pred_cov_arr, filt_mean_arr, filt_cov_arr, gains_arr, ll_arr
        halflogdet = 0.0
        for i in range(n):
            halflogdet += log(S[i, i])
        # gain
        for i in range(p):
            for j in range(n):
                K[i, j] = PC[i, j]
        nrhs = p
        dpotrs(&uplo, &n, &nrhs, &S[0, 0], &n, &K[0, 0], &n, &info)
        # innovation
        for i in range(n):
            acc = y[t, i] - obs_mean[g, i]
            for k in range(p):
                acc -= cmat[i, k] * fp[k]
            v[i] = acc
            w[i] = acc
        nrhs = 1
        dpotrs(&uplo, &n, &nrhs, &S[0, 0], &n, &w[0], &n, &info)
        quad = 0.0
        for i in range(n):
            quad += v[i] * w[i]
        ll[t] = -0.5 * n * _LOG2PI - halflogdet - 0.5 * quad
        if isnan(ll[t]) or isinf(ll[t]):
            return t, pred_mean_arr, pred_cov_arr, filt_mean_arr, filt_cov_arr, gains_arr, ll_arr
        # update
        for i in range(p):
            acc = fp[i]
            for k in range(n):
                acc += K[i, k] * v[k]
            fm[i] = acc
        for i in range(p):
            for j in range(p):
                acc = Pp[i, j]
                for k in range(n):
                    acc -= K[i, k] * PC[j, k]
                Pm[i, j] = acc
        for i in range(p):
            for j in range(i + 1, p):
                acc = 0.5 * (Pm[i, j] + Pm[j, i])
                Pm[i, j] = acc
                Pm[j, i] = acc
        # store
        for i in range(p):
            pred_mean[t, i] = fp[i]
            filt_mean[t, i] = fm[i]
            for j in range(p):
                pred_cov[t, i, j] = Pp[i, j]
                filt_cov[t, i, j] = Pm[i, j]
            for j in range(n):
                gains[t, i, j] = K[i, j]
    return -1, pred_mean_arr, pred_cov_arr, filt_mean_arr, filt_cov_arr, gains_arr, ll_arr


def loglik_core(double[:, ::1] y, double[:, ::1] cmat,
                double[:, :, ::1] A, double[:, :, ::1] H,
                double[:, ::1] mu, double[::1] qdiag,
                cnp.int64_t[::1] z, double[::1] f0, double[:, ::1] p0):
    cdef int T = y.shape[0], n = y.shape[1], p = cmat.shape[1]
    ll_arr = np.zeros(T)
    cdef double[::1] ll = ll_arr
    obs_mean_arr = np.asarray(mu) @ np.asarray(cmat).T
    cdef double[:, ::1] obs_mean = np.ascontiguousarray(obs_mean_arr)
    fm_arr = np.array(f0, dtype=float)
    Pm_arr = np.array(p0, dtype=float)
    cdef double[::1] fm = fm_arr
    cdef double[:, ::1] Pm = Pm_arr
    scratch = [np.zeros(p), np.zeros((p, p)), np.zeros((p, p)), np.zeros((p, n)),
               np.zeros((n, n)), np.zeros((p, n)), np.zeros(n), np.zeros(n)]
    cdef double[::1] fp = scratch[0]
    cdef double[:, ::1] tmp_pp = scratch[1]
    cdef double[:, ::1] Pp = scratch[2]
    cdef double[:, ::1] PC = scratch[3]
    cdef double[:, ::1] S = scratch[4]
    cdef double[:, ::1] K = scratch[5]
    cdef double[::1] v = scratch[6]
    cdef double[::1] w = scratch[7]

    cdef int t, i, j, k, g, gprev, info, nrhs
    cdef char uplo = b'L'
    cdef double acc, halflogdet, quad

    for t in range(T):
        gprev = z[t - 1] if t > 0 else z[0]
        g = z[t]
        for i in range(p):
            acc = 0.0
            for k in range(p):
                acc += A[gprev, i, k] * fm[k]
            fp[i] = acc
        for i in range(p):
            for j in range(p):
                acc = 0.0
                for k in range(p):
                    acc += A[gprev, i, k] * Pm[k, j]
                tmp_pp[i, j] = acc
        for i in range(p):
            for j in range(p):
                acc = H[g, i, j]
                for k in range(p):
                    acc += tmp_pp[i, k] * A[gprev, j, k]
                Pp[i, j] = acc
        for i in range(p):
            for j in range(i + 1, p):
                acc = 0.5 * (Pp[i, j] + Pp[j, i])
                Pp[i, j] = acc
                Pp[j, i] = acc
        for i in range(p):
            for j in range(n):
                acc = 0.0
                for k in range(p):
                    acc += Pp[i, k] * cmat[j, k]
                PC[i, j] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(p):
                    acc += cmat[i, k] * PC[k, j]
                S[i, j] = acc
            S[i, i] += qdiag[i]
        info = 0
        dpotrf(&uplo, &n, &S[0, 0], &n, &info)
        if info != 0:
            return t, ll_arr
        halflogdet = 0.0
        for i in range(n):
            halflogdet += log(S[i, i])
        for i in range(p):
            for j in range(n):
                K[i, j] = PC[i, j]
        nrhs = p
        dpotrs(&uplo, &n, &nrhs, &S[0, 0], &n, &K[0, 0], &n, &info)
        for i in range(n):
            acc = y[t, i] - obs_mean[g, i]
            for k in range(p):
                acc -= cmat[i, k] * fp[k]
            v[i] = acc
            w[i] = acc
        nrhs = 1
        dpotrs(&uplo, &n, &nrhs, &S[0, 0], &n, &w[0], &n, &info)
        quad = 0.0
        for i in range(n):
            quad += v[i] * w[i]
        ll[t] = -0.5 * n * _LOG2PI - halflogdet - 0.5 * quad
        if isnan(ll[t]) or isinf(ll[t]):
            return t, ll_arr
        for i in range(p):
            acc = fp[i]
            for k in range(n):
                acc += K[i, k] * v[k]
            fm[i] = acc
        for i in range(p):
            for j in range(p):
                acc = Pp[i, j]
                for k in range(n):
                    acc -= K[i, k] * PC[j, k]
                Pm[i, j] = acc
        for i in range(p):
            for j in range(i + 1, p):
                acc = 0.5 * (Pm[i, j] + Pm[j, i])
                Pm[i, j] = acc
                Pm[j, i] = acc
    return -1, ll_arr


def ffbs_core(double[:, ::1] filt_mean, double[:, :, ::1] filt_cov,
              double[:, :, ::1] A, double[:, :, ::1] H,
              cnp.int64_t[::1] z, double[:, :, ::1] normals):
    cdef int T = filt_mean.shape[0], p = filt_mean.shape[1]
    cdef int nd = normals.shape[0]
    paths_arr = np.zeros((nd, T, p))
    cdef double[:, :, ::1] paths = paths_arr
    cdef int n_jitter = 0, jit

    chol_T_arr = np.zeros((p, p))
    cdef double[:, ::1] chol_T = chol_T_arr
    jit = _chol_jittered(chol_T, filt_cov[T - 1])
    if jit < 0:
        return T - 1, paths_arr, n_jitter + 4
    n_jitter += jit

    Js_arr = np.zeros((max(T - 1, 0), p, p))
    Ls_arr = np.zeros((max(T - 1, 0), p, p))
    Afm_arr = np.zeros((max(T - 1, 0), p))
    cdef double[:, :, ::1] Js = Js_arr
    cdef double[:, :, ::1] Ls = Ls_arr
    cdef double[:, ::1] Afm = Afm_arr
    scratch = [np.zeros((p, p)), np.zeros((p, p)), np.zeros((p, p)), np.zeros((p, p)),
               np.zeros(p), np.zeros(p)]
    cdef double[:, ::1] ap = scratch[0]
    cdef double[:, ::1] sf = scratch[1]
    cdef double[:, ::1] jbuf = scratch[2]
    cdef double[:, ::1] cov = scratch[3]
    cdef double[::1] dev = scratch[4]
    cdef double[::1] samp = scratch[5]

    cdef int t, i, j, k, g, info, nrhs, d
    cdef char uplo = b'L'
    cdef double acc

    for t in range(T - 2, -1, -1):
        g = z[t]
        for i in range(p):
            for j in range(p):
                acc = 0.0
                for k in range(p):
                    acc += A[g, i, k] * filt_cov[t, k, j]
                ap[i, j] = acc
        for i in range(p):
            for j in range(p):
                acc = H[z[t + 1], i, j]
                for k in range(p):
                    acc += ap[i, k] * A[g, j, k]
                sf[i, j] = acc
        for i in range(p):
            for j in range(i + 1, p):
                acc = 0.5 * (sf[i, j] + sf[j, i])
                sf[i, j] = acc
                sf[j, i] = acc
        # factor sf, escalating a ridge when needed (matches _core_py flow)
        jit = _chol_jittered(cov, sf)  # cov doubles as a scratch buffer here
        if jit < 0:
            return t, paths_arr, n_jitter + 4
        n_jitter += jit
        # jbuf := P A' ; solve into the smoother gain J
        for i in range(p):
            for j in range(p):
                acc = 0.0
                for k in range(p):
                    acc += filt_cov[t, i, k] * A[g, j, k]
                jbuf[i, j] = acc
        nrhs = p
        dpotrs(&uplo, &p, &nrhs, &cov[0, 0], &p, &jbuf[0, 0], &p, &info)
        # conditional covariance P - J (A P), then factor for sampling
        for i in range(p):
            for j in range(p):
                acc = filt_cov[t, i, j]
                for k in range(p):
                    acc -= jbuf[i, k] * ap[k, j]
                cov[i, j] = acc
        for i in range(p):
            for j in range(i + 1, p):
                acc = 0.5 * (cov[i, j] + cov[j, i])
                cov[i, j] = acc
                cov[j, i] = acc
        jit = _chol_jittered(Ls[t], cov)
        if jit < 0:
            return t, paths_arr, n_jitter + 4
        n_jitter += jit
        for i in range(p):
            acc = 0.0
            for k in range(p):
                acc += A[g, i, k] * filt_mean[t, k]
            Afm[t, i] = acc
            for j in range(p):
                Js[t, i, j] = jbuf[i, j]

    for d in range(nd):
        _tri_mul(chol_T, &normals[d, T - 1, 0], &samp[0], p)
        for i in range(p):
            paths[d, T - 1, i] = filt_mean[T - 1, i] + samp[i]
        for t in range(T - 2, -1, -1):
            for i in range(p):
                dev[i] = paths[d, t + 1, i] - Afm[t, i]
            _tri_mul(Ls[t], &normals[d, t, 0], &samp[0], p)
            for i in range(p):
                acc = filt_mean[t, i] + samp[i]
                for k in range(p):
                    acc += Js[t, i, k] * dev[k]
                paths[d, t, i] = acc
    return -1, paths_arr, n_jitter
