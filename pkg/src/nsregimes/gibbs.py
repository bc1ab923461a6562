"""Gibbs sampler for the regime-switching factor model.

Each sweep cycles through fixed blocks, in this order:

1. factor path by forward-filter backward-sampling,
2. measurement variances (inverse gamma),
3. per-regime innovation covariances (inverse Wishart),
4. per-regime transition matrices under spike-and-slab selection
   (two-point draws for the off-diagonal inclusion flags, then a joint
   Gaussian draw of the matrix),
5. per-regime factor means (Gaussian),
6. the loading decay rate by a Metropolis step with a uniform
   independence proposal on its support.

Empty regimes fall back to their priors through the same code paths.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.stats import invwishart

from .basis import REFERENCE_DECAY, MaturityGrid, augmented_loading, loading_matrix
from .statespace import (
    MEAS_VAR_FLOOR,
    ModelParams,
    NumericalError,
    _as_labels,
    _kernels,
)

__all__ = [
    "PriorConfig",
    "ChainConfig",
    "PosteriorDraws",
    "two_step_init",
    "default_priors",
    "run_chain",
    "save_draws",
    "load_draws",
    "posterior_mean_params",
    "mh_accept",
    "update_meas_var",
    "update_innovation_cov",
    "update_transition",
    "update_regime_means",
    "update_decay",
]

logger = logging.getLogger(__name__)


@dataclass
class PriorConfig:
    """Hyperparameters of every conditional.

    ``mean_prior_mean`` is (G, p): one prior mean per regime, conventionally
    the two-step estimates.  ``cov_scale`` is (G, p, p).
    """

    mean_prior_mean: np.ndarray
    cov_scale: np.ndarray
    cov_df: float
    mean_prior_cov: np.ndarray | None = None
    spike_var: float = 1e-5
    slab_var: float = 1.0
    inclusion_prob: float = 0.5
    decay_bounds: tuple[float, float] = (0.01, 0.1)
    meas_shape: float = 5.0
    meas_scale: float = 0.05

    def __post_init__(self) -> None:
        self.mean_prior_mean = np.atleast_2d(np.asarray(self.mean_prior_mean, dtype=float))
        self.cov_scale = np.asarray(self.cov_scale, dtype=float)
        if self.cov_scale.ndim == 2:
            self.cov_scale = np.broadcast_to(
                self.cov_scale, (self.mean_prior_mean.shape[0],) + self.cov_scale.shape
            ).copy()
        p = self.mean_prior_mean.shape[1]
        if self.mean_prior_cov is None:
            self.mean_prior_cov = 10.0 * np.eye(p)
        else:
            self.mean_prior_cov = np.asarray(self.mean_prior_cov, dtype=float)
        if self.cov_df <= p + 1:
            raise ValueError("cov_df must exceed dim + 1 for a proper inverse Wishart")
        if not 0.0 < self.inclusion_prob < 1.0:
            raise ValueError("inclusion_prob must be inside (0, 1)")
        lo, hi = self.decay_bounds
        if not 0.0 < lo < hi:
            raise ValueError("decay_bounds must satisfy 0 < lo < hi")


@dataclass
class ChainConfig:
    n_burn: int = 2000
    n_draws: int = 5000
    thin: int = 5
    keep_factors: str = "mean"  # "none" | "mean" | "all"

    def __post_init__(self) -> None:
        if self.n_burn < 0 or self.n_draws < 1 or self.thin < 1:
            raise ValueError("need n_burn >= 0, n_draws >= 1, thin >= 1")
        if self.keep_factors not in ("none", "mean", "all"):
            raise ValueError("keep_factors must be none, mean, or all")

    @property
    def n_stored(self) -> int:
        return (self.n_draws + self.thin - 1) // self.thin


@dataclass
class PosteriorDraws:
    """Thinned post-burn-in draws of every parameter block."""

    decay: np.ndarray  # (n_s,)
    transition: np.ndarray  # (n_s, G, p, p)
    innovation_cov: np.ndarray  # (n_s, G, p, p)
    regime_means: np.ndarray  # (n_s, G, p)
    meas_var: np.ndarray  # (n_s, n_obs)
    inclusion: np.ndarray  # (n_s, G, p, p)
    loglik: np.ndarray  # (n_s,) prediction-error log likelihood per draw
    factor_mean: np.ndarray  # (T, p) posterior mean factor path
    accept_rate: float
    grid: MaturityGrid
    n_macro: int
    meta: dict = field(default_factory=dict)
    factors: np.ndarray | None = None  # (n_s, T, p) when kept

    @property
    def n_stored(self) -> int:
        return self.decay.shape[0]

    @property
    def n_regimes(self) -> int:
        return self.transition.shape[1]

    def params_at(self, s: int) -> ModelParams:
        return ModelParams(
            decay=float(self.decay[s]),
            transition=self.transition[s],
            innovation_cov=self.innovation_cov[s],
            regime_means=self.regime_means[s],
            meas_var=self.meas_var[s],
            inclusion=self.inclusion[s],
            grid=self.grid,
            n_macro=self.n_macro,
        )


def posterior_mean_params(draws: "PosteriorDraws") -> ModelParams:
    """Posterior-mean parameters; flags on when their rate is at least 1/2."""
    return ModelParams(
        decay=float(draws.decay.mean()),
        transition=draws.transition.mean(axis=0),
        innovation_cov=draws.innovation_cov.mean(axis=0),
        regime_means=draws.regime_means.mean(axis=0),
        meas_var=draws.meas_var.mean(axis=0),
        inclusion=(draws.inclusion.mean(axis=0) >= 0.5).astype(np.int8),
        grid=draws.grid,
        n_macro=draws.n_macro,
    )


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------

def two_step_init(
    data: np.ndarray,
    labels,
    grid: MaturityGrid,
    n_macro: int = 0,
    decay: float = REFERENCE_DECAY,
) -> ModelParams:
    """Cross-sectional least squares then per-regime VAR, as a cheap start."""
    data = np.asarray(data, dtype=float)
    n_mat = len(grid)
    G = int(np.max(np.asarray(getattr(labels, "labels", labels))))
    z = _as_labels(labels, G)
    T = data.shape[0]
    p = 3 + n_macro

    lam = loading_matrix(decay, grid).values
    fhat = np.linalg.lstsq(lam, data[:, :n_mat].T, rcond=None)[0].T  # (T, 3)
    if n_macro:
        fhat = np.column_stack([fhat, data[:, n_mat:]])

    mu = np.zeros((G, p))
    for g in range(G):
        sel = z == g
        mu[g] = fhat[sel].mean(axis=0) if sel.any() else fhat.mean(axis=0)
    demeaned = fhat - mu[z]

    A = np.zeros((G, p, p))
    H = np.zeros((G, p, p))
    x_prev, x_next = demeaned[:-1], demeaned[1:]
    for g in range(G):
        sel = z[:-1] == g
        if sel.sum() >= p + 2:
            xg, yg = x_prev[sel], x_next[sel]
            gram = xg.T @ xg + 1e-6 * np.eye(p)
            A[g] = np.linalg.solve(gram, xg.T @ yg).T
            resid = yg - xg @ A[g].T
            H[g] = resid.T @ resid / max(sel.sum() - 1, 1) + 1e-6 * np.eye(p)
        else:
            A[g] = 0.9 * np.eye(p)
            H[g] = 0.1 * np.eye(p)

    cmat = augmented_loading(lam, n_macro)
    resid = data - fhat @ cmat.T  # fhat already includes the regime means
    q = np.maximum(resid.var(axis=0), 1e-6)
    return ModelParams(
        decay=decay,
        transition=A,
        innovation_cov=H,
        regime_means=mu,
        meas_var=q,
        grid=grid,
        n_macro=n_macro,
    )


def default_priors(init: ModelParams, mean_prior_scale: float = 10.0) -> PriorConfig:
    """Weak priors centered on the two-step fit."""
    p = init.n_factors
    m0 = p + 4.0
    return PriorConfig(
        mean_prior_mean=init.regime_means.copy(),
        cov_scale=(m0 - p - 1.0) * init.innovation_cov.copy(),
        cov_df=m0,
        mean_prior_cov=mean_prior_scale * np.eye(p),
    )


# ---------------------------------------------------------------------------
# conditional updates
# ---------------------------------------------------------------------------

def update_meas_var(data, cmat, factors, regime_means, z, prior: PriorConfig, rng):
    """sigma_i^2 | rest  ~  IG(shape + T/2, scale + SSR_i/2)."""
    T = data.shape[0]
    resid = data - (factors + regime_means[z]) @ cmat.T
    ssr = np.einsum("ti,ti->i", resid, resid)
    shape = prior.meas_shape + 0.5 * T
    rate = prior.meas_scale + 0.5 * ssr
    draw = 1.0 / rng.gamma(shape, 1.0 / rate)
    return np.maximum(draw, MEAS_VAR_FLOOR)


def update_innovation_cov(factors, transition, z, prior: PriorConfig, rng):
    """H_g | rest ~ IW(df + T_g, scale + sum of transition residual outers)."""
    G, p = prior.mean_prior_mean.shape
    T = factors.shape[0]
    out = np.zeros((G, p, p))
    pred = np.empty((T - 1, p)) if T > 1 else np.empty((0, p))
    for gp in range(G):
        sel = z[: T - 1] == gp
        if sel.any():
            pred[sel] = factors[: T - 1][sel] @ transition[gp].T
    resid = factors[1:] - pred
    for g in range(G):
        sel = z[1:] == g
        ssq = resid[sel].T @ resid[sel]
        df = prior.cov_df + int(sel.sum())
        scale = prior.cov_scale[g] + ssq
        out[g] = invwishart.rvs(df=df, scale=scale, random_state=rng)
    return out


def _spike_slab_logweight(prec, l_vec, xi_sq, log_prior):
    """log of xi^-1 |D|^(1/2) exp(l' D l / 2) * prior, up to shared terms."""
    chol = np.linalg.cholesky(prec)
    logdet_d = -2.0 * np.log(np.diag(chol)).sum()
    w = np.linalg.solve(chol, l_vec)
    quad = float(w @ w)  # l' prec^-1 l
    return -0.5 * np.log(xi_sq) + 0.5 * logdet_d + 0.5 * quad + log_prior


def update_transition(factors, innovation_cov, z, prior: PriorConfig, inclusion, rng):
    """Spike-and-slab flags then a_g = vec(A_g') | rest ~ N(abar, D)."""
    G, p = prior.mean_prior_mean.shape
    T = factors.shape[0]
    hinv = np.stack([np.linalg.inv(innovation_cov[g]) for g in range(G)])
    # grouped cross products over transition pairs (t -> t+1)
    S = np.zeros((G, p * p, p * p))
    lvec = np.zeros((G, p * p))
    for g in range(G):
        for h in range(G):
            sel = (z[: T - 1] == g) & (z[1:] == h)
            if not sel.any():
                continue
            xg = factors[: T - 1][sel]
            xn = factors[1:][sel]
            m_gh = xg.T @ xg
            l_gh = xg.T @ xn
            S[g] += np.kron(hinv[h], m_gh)
            lvec[g] += (l_gh @ hinv[h]).flatten(order="F")

    new_inc = np.asarray(inclusion, dtype=np.int8).copy()
    new_a = np.zeros((G, p, p))
    log_w1 = np.log(prior.inclusion_prob)
    log_w0 = np.log1p(-prior.inclusion_prob)
    for g in range(G):
        gam = new_inc[g]
        for j in range(p):
            for k in range(p):
                if j == k:
                    continue
                weights = []
                for v in (0, 1):
                    gam[j, k] = v
                    u = np.where(gam.reshape(-1) == 1, prior.slab_var, prior.spike_var)
                    prec = S[g] + np.diag(1.0 / u)
                    xi_sq = prior.slab_var if v else prior.spike_var
                    weights.append(
                        _spike_slab_logweight(
                            prec, lvec[g], xi_sq, log_w1 if v else log_w0
                        )
                    )
                p_one = 1.0 / (1.0 + np.exp(weights[0] - weights[1]))
                gam[j, k] = 1 if rng.random() < p_one else 0
        u = np.where(gam.reshape(-1) == 1, prior.slab_var, prior.spike_var)
        prec = S[g] + np.diag(1.0 / u)
        chol = np.linalg.cholesky(prec)
        abar = np.linalg.solve(prec, lvec[g])
        eps = rng.standard_normal(p * p)
        a = abar + np.linalg.solve(chol.T, eps)
        new_a[g] = a.reshape(p, p)
    return new_a, new_inc


def update_regime_means(data, cmat, factors, meas_var, z, prior: PriorConfig, rng):
    """mu_g | rest ~ N(Bbar (Binv mu0 + sum C'Q^-1 (y_t - C F_t)), Bbar)."""
    G, p = prior.mean_prior_mean.shape
    binv = np.linalg.inv(prior.mean_prior_cov)
    cqc = cmat.T @ (cmat / meas_var[:, None])
    resid = data - factors @ cmat.T
    out = np.zeros((G, p))
    for g in range(G):
        sel = z == g
        t_g = int(sel.sum())
        rhs = binv @ prior.mean_prior_mean[g]
        if t_g:
            rhs = rhs + cmat.T @ (resid[sel].sum(axis=0) / meas_var)
        cov = np.linalg.inv(binv + t_g * cqc)
        cov = 0.5 * (cov + cov.T)
        mean = cov @ rhs
        out[g] = mean + np.linalg.cholesky(cov) @ rng.standard_normal(p)
    return out


def mh_accept(log_ratio: float, u: float) -> bool:
    """Accept iff u < min(1, exp(log_ratio))."""
    if log_ratio >= 0.0:
        return True
    return np.log(u) < log_ratio


def _measurement_loglik(data, cmat, factors, regime_means, meas_var, z) -> float:
    resid = data - (factors + regime_means[z]) @ cmat.T
    T = data.shape[0]
    return float(
        -0.5 * T * np.log(2.0 * np.pi * meas_var).sum()
        - 0.5 * (resid * resid / meas_var).sum()
    )


def update_decay(
    decay, data, factors, regime_means, meas_var, z, grid, n_macro, prior: PriorConfig, rng
):
    """Metropolis step with an independence proposal uniform on the support."""
    lo, hi = prior.decay_bounds
    proposal = rng.uniform(lo, hi)
    cmat_cur = augmented_loading(loading_matrix(decay, grid), n_macro)
    cmat_new = augmented_loading(loading_matrix(proposal, grid), n_macro)
    log_ratio = _measurement_loglik(
        data, cmat_new, factors, regime_means, meas_var, z
    ) - _measurement_loglik(data, cmat_cur, factors, regime_means, meas_var, z)
    if mh_accept(log_ratio, rng.random()):
        return proposal, True
    return decay, False


# ---------------------------------------------------------------------------
# the chain
# ---------------------------------------------------------------------------

def run_chain(
    data: np.ndarray,
    labels,
    grid: MaturityGrid,
    n_macro: int = 0,
    priors: PriorConfig | None = None,
    chain: ChainConfig | None = None,
    seed: int | np.random.SeedSequence | None = 0,
    init_params: ModelParams | None = None,
    init_mean: np.ndarray | None = None,
    init_cov: np.ndarray | None = None,
    init_cov_scale: float = 10.0,
) -> PosteriorDraws:
    """Run the sampler on a fixed label path and return thinned draws.

    By default the initial state mean is the least-squares fit of the first
    observation under the current loadings, so it is refreshed whenever a
    decay proposal is accepted; the stored log likelihoods are then pure
    functions of the stored parameters.  Pass ``init_mean``/``init_cov`` to
    pin the initial distribution instead.
    """
    chain = chain or ChainConfig()
    data = np.ascontiguousarray(data, dtype=float)
    G = int(np.max(np.asarray(getattr(labels, "labels", labels))))
    z = _as_labels(labels, G)
    T = data.shape[0]
    if init_params is None:
        init_params = two_step_init(data, labels, grid, n_macro)
    if priors is None:
        priors = default_priors(init_params)
    if priors.mean_prior_mean.shape[0] != G:
        raise ValueError("priors sized for a different number of regimes")
    rng = np.random.default_rng(seed)

    params = init_params.copy()
    p = params.n_factors
    n_obs = params.n_obs
    if data.shape[1] != n_obs:
        raise ValueError(f"data must be (T, {n_obs})")
    cmat = np.ascontiguousarray(params.measurement_matrix())
    fixed_init = init_mean is not None
    if fixed_init:
        f0 = np.ascontiguousarray(init_mean, dtype=float)
    else:
        f0 = np.linalg.lstsq(cmat, data[0], rcond=None)[0]
    if init_cov is not None:
        p0 = np.ascontiguousarray(init_cov, dtype=float)
    else:
        p0 = init_cov_scale * np.eye(p)

    n_s = chain.n_stored
    store = PosteriorDraws(
        decay=np.zeros(n_s),
        transition=np.zeros((n_s, G, p, p)),
        innovation_cov=np.zeros((n_s, G, p, p)),
        regime_means=np.zeros((n_s, G, p)),
        meas_var=np.zeros((n_s, n_obs)),
        inclusion=np.zeros((n_s, G, p, p), dtype=np.int8),
        loglik=np.zeros(n_s),
        factor_mean=np.zeros((T, p)),
        accept_rate=0.0,
        grid=grid,
        n_macro=n_macro,
        factors=np.zeros((n_s, T, p)) if chain.keep_factors == "all" else None,
    )

    accepts = 0
    pending: int | None = None
    total = chain.n_burn + chain.n_draws
    for sweep in range(total):
        status, _, _, filt_mean, filt_cov, _, ll = _kernels.kalman_core(
            data, cmat, params.transition, params.innovation_cov,
            params.regime_means, params.meas_var, z, f0, p0,
        )
        if status >= 0:
            raise NumericalError(
                f"filter failed at period {status} in sweep {sweep}", period=status
            )
        if pending is not None:
            store.loglik[pending] = float(ll.sum())
            pending = None
        normals = rng.standard_normal((1, T, p))
        status, paths, _ = _kernels.ffbs_core(
            filt_mean, filt_cov, params.transition, params.innovation_cov, z, normals
        )
        if status >= 0:
            raise NumericalError(
                f"backward sampler failed at period {status} in sweep {sweep}", period=status
            )
        factors = paths[0]

        params.meas_var = update_meas_var(
            data, cmat, factors, params.regime_means, z, priors, rng
        )
        params.innovation_cov = update_innovation_cov(
            factors, params.transition, z, priors, rng
        )
        params.transition, params.inclusion = update_transition(
            factors, params.innovation_cov, z, priors, params.inclusion, rng
        )
        params.regime_means = update_regime_means(
            data, cmat, factors, params.meas_var, z, priors, rng
        )
        new_decay, accepted = update_decay(
            params.decay, data, factors, params.regime_means, params.meas_var,
            z, grid, n_macro, priors, rng,
        )
        if accepted:
            params.decay = new_decay
            cmat = np.ascontiguousarray(params.measurement_matrix())
            if not fixed_init:
                f0 = np.linalg.lstsq(cmat, data[0], rcond=None)[0]
        accepts += int(accepted)

        k = sweep - chain.n_burn
        if k >= 0 and k % chain.thin == 0:
            s = k // chain.thin
            store.decay[s] = params.decay
            store.transition[s] = params.transition
            store.innovation_cov[s] = params.innovation_cov
            store.regime_means[s] = params.regime_means
            store.meas_var[s] = params.meas_var
            store.inclusion[s] = params.inclusion
            store.factor_mean += factors / n_s
            if store.factors is not None:
                store.factors[s] = factors
            pending = s

    if pending is not None:
        status, ll = _kernels.loglik_core(
            data, cmat, params.transition, params.innovation_cov,
            params.regime_means, params.meas_var, z, f0, p0,
        )
        if status >= 0:
            raise NumericalError(f"filter failed at period {status}", period=status)
        store.loglik[pending] = float(ll.sum())

    store.accept_rate = accepts / total
    logger.debug("chain finished: %d sweeps, decay accept rate %.3f", total, store.accept_rate)
    store.meta = {
        "n_burn": chain.n_burn,
        "n_draws": chain.n_draws,
        "thin": chain.thin,
        "n_stored": n_s,
        "seed": str(seed),
        "n_periods": T,
    }
    return store


# ---------------------------------------------------------------------------
# serialization: one CSV per block plus a manifest
# ---------------------------------------------------------------------------

def _block_frame(values: np.ndarray) -> pd.DataFrame:
    """Long format (draw, regime, row, col, value) for an (n_s, G, p, p) block."""
    n_s, G, p, q = values.shape
    idx = np.indices((n_s, G, p, q)).reshape(4, -1)
    return pd.DataFrame({
        "draw": idx[0],
        "regime": idx[1] + 1,
        "row": idx[2] + 1,
        "col": idx[3] + 1,
        "value": values.reshape(-1),
    })


def save_draws(draws: PosteriorDraws, outdir) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    kw = {"index": False, "lineterminator": "\n"}
    _block_frame(draws.transition).to_csv(outdir / "transition.csv", **kw)
    _block_frame(draws.innovation_cov).to_csv(outdir / "innovation_cov.csv", **kw)
    _block_frame(draws.inclusion.astype(int)).to_csv(outdir / "inclusion.csv", **kw)

    n_s, G, p = draws.regime_means.shape
    idx = np.indices((n_s, G, p)).reshape(3, -1)
    pd.DataFrame({
        "draw": idx[0], "regime": idx[1] + 1, "row": idx[2] + 1, "col": 1,
        "value": draws.regime_means.reshape(-1),
    }).to_csv(outdir / "regime_means.csv", **kw)

    n_obs = draws.meas_var.shape[1]
    idx = np.indices((n_s, n_obs)).reshape(2, -1)
    pd.DataFrame({
        "draw": idx[0], "regime": 0, "row": idx[1] + 1, "col": idx[1] + 1,
        "value": draws.meas_var.reshape(-1),
    }).to_csv(outdir / "meas_var.csv", **kw)

    pd.DataFrame({"draw": np.arange(n_s), "value": draws.decay}).to_csv(
        outdir / "decay.csv", **kw
    )
    pd.DataFrame({"draw": np.arange(n_s), "value": draws.loglik}).to_csv(
        outdir / "loglik.csv", **kw
    )
    T = draws.factor_mean.shape[0]
    idx = np.indices((T, draws.factor_mean.shape[1])).reshape(2, -1)
    pd.DataFrame({
        "period": idx[0], "factor": idx[1] + 1, "value": draws.factor_mean.reshape(-1),
    }).to_csv(outdir / "factor_mean.csv", **kw)

    manifest = {
        "accept_rate": draws.accept_rate,
        "maturities": list(draws.grid.maturities),
        "n_macro": draws.n_macro,
        "n_regimes": draws.n_regimes,
        "n_stored": draws.n_stored,
        "meta": draws.meta,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _read_csv(path) -> pd.DataFrame:
    # the default parser can be off by one ulp; fits must reload exactly
    return pd.read_csv(path, float_precision="round_trip")


def _read_block(path, n_s: int, G: int, p: int) -> np.ndarray:
    frame = _read_csv(path)
    out = np.zeros((n_s, G, p, p))
    out[frame["draw"], frame["regime"] - 1, frame["row"] - 1, frame["col"] - 1] = frame["value"]
    return out


def load_draws(outdir) -> PosteriorDraws:
    outdir = Path(outdir)
    manifest = json.loads((outdir / "manifest.json").read_text())
    G = manifest["n_regimes"]
    n_s = manifest["n_stored"]
    n_macro = manifest["n_macro"]
    grid = MaturityGrid(tuple(manifest["maturities"]))
    p = 3 + n_macro
    decay = _read_csv(outdir / "decay.csv")["value"].to_numpy()
    loglik = _read_csv(outdir / "loglik.csv")["value"].to_numpy()
    mv = _read_csv(outdir / "meas_var.csv")
    n_obs = len(grid) + n_macro
    meas_var = np.zeros((n_s, n_obs))
    meas_var[mv["draw"], mv["row"] - 1] = mv["value"]
    rm = _read_csv(outdir / "regime_means.csv")
    regime_means = np.zeros((n_s, G, p))
    regime_means[rm["draw"], rm["regime"] - 1, rm["row"] - 1] = rm["value"]
    fm = _read_csv(outdir / "factor_mean.csv")
    T = int(fm["period"].max()) + 1
    factor_mean = np.zeros((T, p))
    factor_mean[fm["period"], fm["factor"] - 1] = fm["value"]
    return PosteriorDraws(
        decay=decay,
        transition=_read_block(outdir / "transition.csv", n_s, G, p),
        innovation_cov=_read_block(outdir / "innovation_cov.csv", n_s, G, p),
        regime_means=regime_means,
        meas_var=meas_var,
        inclusion=_read_block(outdir / "inclusion.csv", n_s, G, p).astype(np.int8),
        loglik=loglik,
        factor_mean=factor_mean,
        accept_rate=float(manifest["accept_rate"]),
        grid=grid,
        n_macro=n_macro,
        meta=manifest.get("meta", {}),
    )
