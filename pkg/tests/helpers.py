"""Shared fixtures-in-code for the test suite: random well-conditioned
model instances and data simulated from them."""

from __future__ import annotations

import numpy as np

from nsregimes.basis import MaturityGrid
from nsregimes.statespace import ModelParams


def random_spd(rng: np.random.Generator, p: int, scale: float = 0.3) -> np.ndarray:
    b = rng.standard_normal((p, p)) * scale
    return b @ b.T + scale * np.eye(p)


def random_instance(
    rng: np.random.Generator,
    T: int | None = None,
    n_mat: int | None = None,
    G: int | None = None,
    n_macro: int = 0,
):
    """A stable random model plus data simulated from it.

    Returns (params, labels 1-based, data, init_mean, init_cov).
    """
    if T is None:
        T = int(rng.integers(2, 21))
    if n_mat is None:
        n_mat = int(rng.integers(1, 7)) - n_macro
    if G is None:
        G = int(rng.integers(1, 4))
    p = 3 + n_macro
    maturities = np.sort(rng.choice(np.arange(3, 121, 3), size=n_mat, replace=False))
    grid = MaturityGrid(tuple(float(m) for m in maturities))

    A = np.stack([0.7 * np.eye(p) + 0.1 * rng.standard_normal((p, p)) for _ in range(G)])
    for g in range(G):  # keep the transition comfortably stable
        radius = np.max(np.abs(np.linalg.eigvals(A[g])))
        if radius > 0.95:
            A[g] *= 0.95 / radius
    H = np.stack([random_spd(rng, p) for _ in range(G)])
    mu = rng.standard_normal((G, p))
    q = rng.uniform(0.05, 0.5, n_mat + n_macro)
    params = ModelParams(
        decay=float(rng.uniform(0.02, 0.09)),
        transition=A,
        innovation_cov=H,
        regime_means=mu,
        meas_var=q,
        grid=grid,
        n_macro=n_macro,
    )
    labels = rng.integers(1, G + 1, T)
    data = simulate_data(params, labels, rng)
    init_mean = rng.standard_normal(p)
    init_cov = random_spd(rng, p, scale=0.5) + np.eye(p)
    return params, labels, data, init_mean, init_cov


def simulate_data(params: ModelParams, labels: np.ndarray, rng: np.random.Generator):
    """Draw one panel from the model, starting the state at zero."""
    z = np.asarray(getattr(labels, "labels", labels), dtype=int) - 1
    T = z.shape[0]
    p = params.n_factors
    cmat = params.measurement_matrix()
    chols = [np.linalg.cholesky(params.innovation_cov[g]) for g in range(params.n_regimes)]
    f = np.zeros(p)
    data = np.zeros((T, params.n_obs))
    for t in range(T):
        a = params.transition[z[t - 1]] if t > 0 else params.transition[z[0]]
        f = a @ f + chols[z[t]] @ rng.standard_normal(p)
        mean = cmat @ (f + params.regime_means[z[t]])
        data[t] = mean + np.sqrt(params.meas_var) * rng.standard_normal(params.n_obs)
    return data
