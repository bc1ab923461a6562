"""Regime-switching linear state space for the yield curve.

Measurement:  y_t = C (F_t + mu_{z_t}) + eps_t,   eps_t ~ N(0, diag(q))
Transition:   F_t = A_{z_{t-1}} F_{t-1} + eta_t,  eta_t ~ N(0, H_{z_t})

``C`` stacks the Nelson-Siegel loadings (plus an identity block when
observed macro factors join the state).  The regime path z_t is a known
label sequence produced by a regime tree; the presample regime is taken
equal to the first one.

The forward pass and backward sampler live in a compiled kernel module when
available (``nsregimes._core``) with a pure-NumPy twin (``_core_py``);
set NSREGIMES_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .basis import DEFAULT_GRID, MaturityGrid, augmented_loading, loading_matrix

__all__ = [
    "COMPILED_KERNELS",
    "ModelParams",
    "FilterOutput",
    "NumericalError",
    "kalman_filter",
    "predictive_loglik",
    "smoother_loglik",
    "ffbs_sample",
    "default_init",
]

if os.environ.get("NSREGIMES_PURE_PYTHON"):
    from . import _core_py as _kernels

    COMPILED_KERNELS = False
else:
    try:
        from . import _core as _kernels  # type: ignore[no-redef]

        COMPILED_KERNELS = True
    except ImportError:  # pragma: no cover - depends on build environment
        from . import _core_py as _kernels

        COMPILED_KERNELS = False

#: Floor applied to measurement variances.
MEAS_VAR_FLOOR = 1e-10

#: Default scale of the diffuse initial state covariance.
INIT_COV_SCALE = 10.0


class NumericalError(RuntimeError):
    """A matrix decomposition failed during filtering or sampling."""

    def __init__(self, message: str, period: int | None = None):
        super().__init__(message)
        self.period = period


@dataclass
class ModelParams:
    """Model parameters for a fixed number of regimes.

    Shapes: ``transition`` and ``innovation_cov`` are (G, p, p),
    ``regime_means`` is (G, p), ``meas_var`` is (n_obs,), ``inclusion`` is a
    binary (G, p, p) mask with a fixed diagonal of ones, where
    p = 3 + n_macro and n_obs = n_maturities + n_macro.
    """

    decay: float
    transition: np.ndarray
    innovation_cov: np.ndarray
    regime_means: np.ndarray
    meas_var: np.ndarray
    inclusion: np.ndarray | None = None
    grid: MaturityGrid = DEFAULT_GRID
    n_macro: int = 0

    def __post_init__(self) -> None:
        self.transition = np.asarray(self.transition, dtype=float)
        self.innovation_cov = np.asarray(self.innovation_cov, dtype=float)
        self.regime_means = np.asarray(self.regime_means, dtype=float)
        self.meas_var = np.asarray(self.meas_var, dtype=float)
        if self.transition.ndim != 3 or self.transition.shape[1] != self.transition.shape[2]:
            raise ValueError("transition must be (G, p, p)")
        g, p, _ = self.transition.shape
        if p != 3 + self.n_macro:
            raise ValueError(f"state dimension {p} != 3 + n_macro ({3 + self.n_macro})")
        if self.innovation_cov.shape != (g, p, p):
            raise ValueError("innovation_cov shape mismatch")
        if self.regime_means.shape != (g, p):
            raise ValueError("regime_means shape mismatch")
        n_obs = len(self.grid) + self.n_macro
        if self.meas_var.shape != (n_obs,):
            raise ValueError(f"meas_var must have length {n_obs}")
        if np.any(self.meas_var <= 0):
            raise ValueError("measurement variances must be positive")
        if self.decay <= 0 or not np.isfinite(self.decay):
            raise ValueError("decay must be positive")
        if self.inclusion is None:
            self.inclusion = np.ones((g, p, p), dtype=np.int8)
        else:
            self.inclusion = np.asarray(self.inclusion, dtype=np.int8)
            if self.inclusion.shape != (g, p, p):
                raise ValueError("inclusion shape mismatch")

    @property
    def n_regimes(self) -> int:
        return self.transition.shape[0]

    @property
    def n_factors(self) -> int:
        return self.transition.shape[1]

    @property
    def n_obs(self) -> int:
        return len(self.grid) + self.n_macro

    def measurement_matrix(self) -> np.ndarray:
        return augmented_loading(loading_matrix(self.decay, self.grid), self.n_macro)

    def copy(self) -> "ModelParams":
        return replace(
            self,
            transition=self.transition.copy(),
            innovation_cov=self.innovation_cov.copy(),
            regime_means=self.regime_means.copy(),
            meas_var=self.meas_var.copy(),
            inclusion=self.inclusion.copy(),
        )


@dataclass
class FilterOutput:
    """Everything the forward pass produces, one slot per period."""

    pred_mean: np.ndarray  # (T, p)   F_{t|t-1}
    pred_cov: np.ndarray  # (T, p, p) P_{t|t-1}
    filt_mean: np.ndarray  # (T, p)   F_{t|t}
    filt_cov: np.ndarray  # (T, p, p) P_{t|t}
    gains: np.ndarray  # (T, p, n)
    loglik_terms: np.ndarray  # (T,)

    @property
    def loglik(self) -> float:
        return float(self.loglik_terms.sum())


def _as_labels(labels, n_regimes: int) -> np.ndarray:
    """Accept a RegimeLabels or a plain 1-based int array; return 0-based."""
    arr = np.asarray(getattr(labels, "labels", labels), dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    if arr.min() < 1 or arr.max() > n_regimes:
        raise ValueError(f"labels must lie in 1..{n_regimes}")
    return arr - 1


def _check_data(params: ModelParams, data: np.ndarray, z: np.ndarray) -> np.ndarray:
    data = np.ascontiguousarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != params.n_obs:
        raise ValueError(f"data must be (T, {params.n_obs}), got {data.shape}")
    if data.shape[0] != z.shape[0]:
        raise ValueError("data and labels disagree on T")
    if data.shape[0] == 0:
        raise ValueError("need at least one period")
    return data


def default_init(params: ModelParams, data: np.ndarray, scale: float = INIT_COV_SCALE):
    """Diffuse start: least-squares fit of the first observation, scale * I."""
    cmat = params.measurement_matrix()
    y0 = np.asarray(data, dtype=float)[0]
    f0, *_ = np.linalg.lstsq(cmat, y0, rcond=None)
    return f0, scale * np.eye(params.n_factors)


def _prepare(params, labels, data, init_mean, init_cov):
    z = _as_labels(labels, params.n_regimes)
    data = _check_data(params, data, z)
    if init_mean is None or init_cov is None:
        f0, p0 = default_init(params, data)
        init_mean = f0 if init_mean is None else np.asarray(init_mean, float)
        init_cov = p0 if init_cov is None else np.asarray(init_cov, float)
    else:
        init_mean = np.ascontiguousarray(init_mean, dtype=float)
        init_cov = np.ascontiguousarray(init_cov, dtype=float)
    if init_mean.shape != (params.n_factors,):
        raise ValueError("init_mean has wrong shape")
    if init_cov.shape != (params.n_factors, params.n_factors):
        raise ValueError("init_cov has wrong shape")
    cmat = np.ascontiguousarray(params.measurement_matrix())
    A = np.ascontiguousarray(params.transition)
    H = np.ascontiguousarray(params.innovation_cov)
    mu = np.ascontiguousarray(params.regime_means)
    q = np.ascontiguousarray(params.meas_var)
    return z, data, cmat, A, H, mu, q, init_mean, init_cov


def kalman_filter(params, labels, data, init_mean=None, init_cov=None) -> FilterOutput:
    """Run the forward pass and keep every intermediate moment."""
    z, data, cmat, A, H, mu, q, f0, p0 = _prepare(params, labels, data, init_mean, init_cov)
    status, pm, pc, fm, fc, gains, ll = _kernels.kalman_core(data, cmat, A, H, mu, q, z, f0, p0)
    if status >= 0:
        raise NumericalError(
            f"innovation covariance not positive definite at period {status}", period=status
        )
    return FilterOutput(pm, pc, fm, fc, gains, ll)


def predictive_loglik(params, labels, data, init_mean=None, init_cov=None) -> float:
    """Log likelihood by the prediction-error decomposition."""
    z, data, cmat, A, H, mu, q, f0, p0 = _prepare(params, labels, data, init_mean, init_cov)
    status, ll = _kernels.loglik_core(data, cmat, A, H, mu, q, z, f0, p0)
    if status >= 0:
        raise NumericalError(
            f"innovation covariance not positive definite at period {status}", period=status
        )
    return float(ll.sum())


def ffbs_sample(
    params,
    labels,
    data,
    rng: np.random.Generator,
    n_draws: int | None = None,
    init_mean=None,
    init_cov=None,
    filter_output: FilterOutput | None = None,
):
    """Draw factor paths from their joint smoothing distribution.

    Returns an array of shape (T, p), or (n_draws, T, p) when ``n_draws``
    is given explicitly.
    """
    z = _as_labels(labels, params.n_regimes)
    if filter_output is None:
        filter_output = kalman_filter(params, labels, data, init_mean, init_cov)
    nd = 1 if n_draws is None else int(n_draws)
    if nd < 1:
        raise ValueError("n_draws must be positive")
    T, p = filter_output.filt_mean.shape
    normals = rng.standard_normal((nd, T, p))
    A = np.ascontiguousarray(params.transition)
    H = np.ascontiguousarray(params.innovation_cov)
    status, paths, n_jitter = _kernels.ffbs_core(
        np.ascontiguousarray(filter_output.filt_mean),
        np.ascontiguousarray(filter_output.filt_cov),
        A,
        H,
        z,
        normals,
    )
    if status >= 0:
        raise NumericalError(
            f"conditioning matrix not positive definite at period {status}", period=status
        )
    if n_jitter:
        warnings.warn(
            f"backward sampler regularized {n_jitter} decompositions",
            RuntimeWarning,
            stacklevel=2,
        )
    return paths[0] if n_draws is None else paths


def smoother_loglik(params, labels, data, factors, init_mean=None, init_cov=None) -> float:
    """Likelihood variant conditioning each period on the sampled next state.

    For t < T the moments are the one-step smoothing moments given
    F_{t+1} = factors[t+1]; the last period uses the filtered moments.
    """
    z = _as_labels(labels, params.n_regimes)
    out = kalman_filter(params, labels, data, init_mean, init_cov)
    data = np.asarray(data, dtype=float)
    factors = np.asarray(factors, dtype=float)
    T, p = out.filt_mean.shape
    if factors.shape != (T, p):
        raise ValueError("factors must match (T, p)")
    cmat = params.measurement_matrix()
    A = params.transition
    H = params.innovation_cov
    obs_mean = params.regime_means @ cmat.T
    n = params.n_obs
    total = 0.0
    for t in range(T):
        if t < T - 1:
            a = A[z[t]]
            P = out.filt_cov[t]
            AP = a @ P
            Sf = AP @ a.T + H[z[t + 1]]
            J = np.linalg.solve(0.5 * (Sf + Sf.T), AP).T
            mean = out.filt_mean[t] + J @ (factors[t + 1] - a @ out.filt_mean[t])
            cov = P - J @ AP
        else:
            mean = out.filt_mean[t]
            cov = out.filt_cov[t]
        S = cmat @ (0.5 * (cov + cov.T)) @ cmat.T
        S[np.diag_indices_from(S)] += params.meas_var
        v = data[t] - cmat @ mean - obs_mean[z[t]]
        try:
            L = np.linalg.cholesky(S)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"conditional covariance not PD at period {t}", period=t) from exc
        w = np.linalg.solve(L, v)
        total += -0.5 * n * np.log(2 * np.pi) - np.log(np.diag(L)).sum() - 0.5 * float(w @ w)
    return total
