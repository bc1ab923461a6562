"""Post-fit diagnostics: fit tables, regime contrasts, impulse responses.

Residual tables are reported in basis points (yields are in percent, so one
basis point is 0.01).  Regime contrasts use a two-sample t statistic with
unequal variances on equal-length draw sequences; with per-group size n and
variances s1^2, s2^2 the statistic and its degrees of freedom are

    t  = (m1 - m2) / sqrt((s1^2 + s2^2) / n)
    df = (n - 1) (s1^2 + s2^2)^2 / (s1^4 + s2^4).

Impulse responses trace a one-standard-deviation innovation shock through a
single regime's dynamics: the state response at horizon h to a shock in
component j is A^h H e_j / sqrt(H_jj).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from .gibbs import PosteriorDraws, posterior_mean_params
from .panels import YieldPanel
from .statespace import _as_labels

__all__ = [
    "DEFAULT_BUCKETS",
    "WelchResult",
    "welch_t_test",
    "ttest_report",
    "residual_stats",
    "residual_report",
    "fitted_frame",
    "girf",
    "girf_table",
    "plot_fitted",
    "plot_girf",
    "plot_decay",
]

#: Maturity buckets (months, inclusive) used by the fit tables.
DEFAULT_BUCKETS: tuple[tuple[float, float], ...] = ((3.0, 12.0), (24.0, 48.0), (60.0, 120.0))


# ---------------------------------------------------------------------------
# two-sample contrasts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    pvalue: float


def welch_t_test(x, y) -> WelchResult:
    """Unequal-variance t test for two samples of the same length."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise ValueError("need two one-dimensional samples of equal length")
    n = x.size
    if n < 2:
        raise ValueError("need at least two observations per sample")
    s1, s2 = x.var(ddof=1), y.var(ddof=1)
    diff = x.mean() - y.mean()
    if s1 == 0.0 and s2 == 0.0:
        # degenerate samples: identical means are a perfect non-rejection,
        # distinct means a sure rejection
        if diff == 0.0:
            return WelchResult(t=0.0, df=float(n - 1), pvalue=1.0)
        return WelchResult(t=float(np.sign(diff) * np.inf), df=float(n - 1), pvalue=0.0)
    t = diff / np.sqrt((s1 + s2) / n)
    df = (n - 1) * (s1 + s2) ** 2 / (s1**2 + s2**2)
    pvalue = 2.0 * stats.t.sf(abs(t), df)
    return WelchResult(t=float(t), df=float(df), pvalue=float(pvalue))


def ttest_report(draws: PosteriorDraws) -> pd.DataFrame:
    """Contrast persistence, innovation scale, and means across regime pairs.

    One row per regime pair and state component, for the transition and
    innovation-covariance diagonals and the regime means.
    """
    G = draws.n_regimes
    p = draws.transition.shape[2]
    blocks = {
        "transition_diag": lambda g, i: draws.transition[:, g, i, i],
        "innovation_diag": lambda g, i: draws.innovation_cov[:, g, i, i],
        "regime_mean": lambda g, i: draws.regime_means[:, g, i],
    }
    rows = []
    for a in range(G):
        for b in range(a + 1, G):
            for block, pull in blocks.items():
                for i in range(p):
                    x, y = pull(a, i), pull(b, i)
                    res = welch_t_test(x, y)
                    rows.append({
                        "block": block,
                        "component": i + 1,
                        "pair": f"{a + 1}v{b + 1}",
                        "mean_a": float(np.mean(x)),
                        "mean_b": float(np.mean(y)),
                        "t": res.t,
                        "df": res.df,
                        "pvalue": res.pvalue,
                    })
    return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# fit quality
# ---------------------------------------------------------------------------

def residual_stats(residuals, grid, buckets=DEFAULT_BUCKETS) -> pd.DataFrame:
    """Per-maturity residual summary in basis points, with bucket rows.

    Bucket rows average the member maturity rows (not the pooled residuals);
    the final row averages every maturity row.
    """
    resid_bp = 100.0 * np.asarray(residuals, dtype=float)
    if resid_bp.ndim != 2 or resid_bp.shape[1] != len(grid):
        raise ValueError(f"residuals must be (T, {len(grid)})")
    per = pd.DataFrame({
        "maturity": grid.labels(),
        "mean_bp": resid_bp.mean(axis=0),
        "mae_bp": np.abs(resid_bp).mean(axis=0),
        "rmse_bp": np.sqrt((resid_bp**2).mean(axis=0)),
    })
    months = grid.as_array()
    rows = [per]
    for lo, hi in buckets:
        member = (months >= lo) & (months <= hi)
        if not member.any():
            continue
        sub = per.loc[member, ["mean_bp", "mae_bp", "rmse_bp"]].mean()
        rows.append(pd.DataFrame([{"maturity": f"{lo:g}-{hi:g}", **sub}]))
    avg = per[["mean_bp", "mae_bp", "rmse_bp"]].mean()
    rows.append(pd.DataFrame([{"maturity": "average", **avg}]))
    return pd.concat(rows, ignore_index=True)


def fitted_frame(draws: PosteriorDraws, labels, panel: YieldPanel) -> pd.DataFrame:
    """Long table of actual vs fitted yields at the posterior mean."""
    est = posterior_mean_params(draws)
    z = _as_labels(labels, est.n_regimes)
    if len(z) != panel.n_periods:
        raise ValueError("labels and panel disagree on T")
    cmat = est.measurement_matrix()
    fitted_all = (draws.factor_mean + est.regime_means[z]) @ cmat.T
    n_mat = len(panel.grid)
    fitted = fitted_all[:, :n_mat]
    cols = panel.grid.labels()
    rows = []
    for j, lbl in enumerate(cols):
        for t in range(panel.n_periods):
            rows.append({
                "date": str(panel.dates[t]),
                "maturity": lbl,
                "actual": panel.values[t, j],
                "fitted": fitted[t, j],
            })
    frame = pd.DataFrame(rows)
    frame["residual"] = frame["actual"] - frame["fitted"]
    return frame


def residual_report(
    draws: PosteriorDraws, labels, panel: YieldPanel, buckets=DEFAULT_BUCKETS
) -> pd.DataFrame:
    """Bucketed residual summary of a fit against its yield panel."""
    est = posterior_mean_params(draws)
    z = _as_labels(labels, est.n_regimes)
    cmat = est.measurement_matrix()
    fitted = (draws.factor_mean + est.regime_means[z]) @ cmat.T
    n_mat = len(panel.grid)
    resid = panel.values - fitted[:, :n_mat]
    return residual_stats(resid, panel.grid, buckets=buckets)


# ---------------------------------------------------------------------------
# impulse responses
# ---------------------------------------------------------------------------

def girf(transition, innovation_cov, shock: int, horizon: int) -> np.ndarray:
    """State response to a one-sd innovation shock, horizons 0..horizon."""
    A = np.asarray(transition, dtype=float)
    H = np.asarray(innovation_cov, dtype=float)
    p = A.shape[0]
    if not 0 <= shock < p:
        raise ValueError(f"shock component must be in 0..{p - 1}")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    delta = H[:, shock] / np.sqrt(H[shock, shock])
    out = np.empty((horizon + 1, p))
    out[0] = delta
    for h in range(1, horizon + 1):
        out[h] = A @ out[h - 1]
    return out


def girf_table(
    draws: PosteriorDraws, horizon: int = 24, quantiles=(0.05, 0.5, 0.95)
) -> pd.DataFrame:
    """Pointwise response bands over the posterior draws, all regimes/shocks."""
    G = draws.n_regimes
    p = draws.transition.shape[2]
    qlabels = [f"q{int(round(100 * q)):02d}" for q in quantiles]
    rows = []
    for g in range(G):
        for j in range(p):
            paths = np.stack([
                girf(draws.transition[s, g], draws.innovation_cov[s, g], j, horizon)
                for s in range(draws.n_stored)
            ])
            bands = np.quantile(paths, quantiles, axis=0)  # (nq, horizon+1, p)
            for h in range(horizon + 1):
                for i in range(p):
                    row = {
                        "regime": g + 1, "shock": j + 1, "horizon": h, "factor": i + 1,
                    }
                    row.update({ql: bands[k, h, i] for k, ql in enumerate(qlabels)})
                    rows.append(row)
    return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# figures (optional)
# ---------------------------------------------------------------------------

def _pyplot():
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - depends on extras
        raise RuntimeError("figures need matplotlib (install the 'plots' extra)") from exc
    return plt


def plot_fitted(frame: pd.DataFrame, path, maturities=("y3", "y24", "y120")) -> None:
    """Actual vs fitted time series for a few maturities."""
    plt = _pyplot()
    present = [m for m in maturities if (frame["maturity"] == m).any()]
    fig, axes = plt.subplots(len(present), 1, figsize=(8, 2.4 * len(present)), sharex=True)
    axes = np.atleast_1d(axes)
    for ax, m in zip(axes, present):
        sub = frame[frame["maturity"] == m]
        x = np.arange(len(sub))
        ax.plot(x, sub["actual"].to_numpy(), lw=0.8, label="actual")
        ax.plot(x, sub["fitted"].to_numpy(), lw=0.8, label="fitted")
        ax.set_ylabel(m)
    axes[0].legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_girf(frame: pd.DataFrame, path, regime: int = 1, shock: int = 1) -> None:
    """Response bands per factor for one regime and shock."""
    plt = _pyplot()
    sub = frame[(frame["regime"] == regime) & (frame["shock"] == shock)]
    factors = sorted(sub["factor"].unique())
    fig, axes = plt.subplots(1, len(factors), figsize=(3.2 * len(factors), 2.8))
    axes = np.atleast_1d(axes)
    for ax, i in zip(axes, factors):
        ff = sub[sub["factor"] == i].sort_values("horizon")
        h = ff["horizon"].to_numpy()
        ax.fill_between(h, ff["q05"], ff["q95"], alpha=0.3, lw=0)
        ax.plot(h, ff["q50"], lw=1.0)
        ax.axhline(0.0, color="k", lw=0.5)
        ax.set_title(f"factor {i}", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_decay(draws: PosteriorDraws, path) -> None:
    """Histogram of the decay-rate draws."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4, 2.8))
    ax.hist(draws.decay, bins=30, density=True)
    ax.set_xlabel("decay rate")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
