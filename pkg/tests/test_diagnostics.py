"""Tests for fit tables, regime contrasts, and impulse responses."""

import numpy as np
import pandas as pd
import pytest
from scipy import stats

from nsregimes.basis import MaturityGrid, augmented_loading, loading_matrix
from nsregimes.diagnostics import (
    DEFAULT_BUCKETS,
    fitted_frame,
    girf,
    girf_table,
    plot_decay,
    plot_fitted,
    plot_girf,
    residual_report,
    residual_stats,
    ttest_report,
    welch_t_test,
)
from nsregimes.gibbs import ChainConfig, PosteriorDraws, run_chain
from nsregimes.panels import YieldPanel

GRID5 = MaturityGrid((3.0, 12.0, 36.0, 60.0, 120.0))
GRID2 = MaturityGrid((3.0, 6.0))


# ---------------------------------------------------------------------------
# the t test
# ---------------------------------------------------------------------------

def test_welch_hand_case():
    res = welch_t_test([0.0, 2.0], [1.0, 3.0])
    assert res.t == pytest.approx(-0.7071067811865475, abs=1e-12)
    assert res.df == pytest.approx(2.0, abs=1e-12)
    # for df = 2 the tail has a closed form; two-sided p is 1 - 1/sqrt(5)
    assert res.pvalue == pytest.approx(1.0 - 1.0 / np.sqrt(5.0), abs=1e-12)


def test_welch_matches_reference_implementation():
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.standard_normal(17) * rng.uniform(0.5, 2.0) + rng.uniform(-1, 1)
        y = rng.standard_normal(17) * rng.uniform(0.5, 2.0) + rng.uniform(-1, 1)
        res = welch_t_test(x, y)
        ref = stats.ttest_ind(x, y, equal_var=False)
        assert res.t == pytest.approx(ref.statistic, rel=1e-12)
        assert res.pvalue == pytest.approx(ref.pvalue, rel=1e-10)
        assert res.df == pytest.approx(ref.df, rel=1e-12)


def test_welch_degenerate_samples():
    same = welch_t_test([1.0, 1.0, 1.0], [1.0, 1.0, 1.0])
    assert same.t == 0.0 and same.pvalue == 1.0
    apart = welch_t_test([1.0, 1.0], [2.0, 2.0])
    assert apart.t == -np.inf and apart.pvalue == 0.0
    assert welch_t_test([2.0, 2.0], [1.0, 1.0]).t == np.inf


def test_welch_is_antisymmetric_and_validates():
    x = [0.0, 1.0, 2.0]
    y = [1.5, 2.5, 4.0]
    assert welch_t_test(x, y).t == pytest.approx(-welch_t_test(y, x).t, rel=1e-14)
    with pytest.raises(ValueError, match="equal length"):
        welch_t_test([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="two observations"):
        welch_t_test([1.0], [2.0])


# ---------------------------------------------------------------------------
# residual tables
# ---------------------------------------------------------------------------

def test_residual_stats_hand_case():
    resid = np.array([[0.01, -0.01], [0.03, 0.01]])  # percent -> 1,-1 / 3,1 bp
    table = residual_stats(resid, GRID2)
    assert list(table["maturity"]) == ["y3", "y6", "3-12", "average"]
    np.testing.assert_allclose(table["mean_bp"], [2.0, 0.0, 1.0, 1.0])
    np.testing.assert_allclose(table["mae_bp"], [2.0, 1.0, 1.5, 1.5])
    rmse3 = np.sqrt(5.0)
    np.testing.assert_allclose(
        table["rmse_bp"], [rmse3, 1.0, (rmse3 + 1) / 2, (rmse3 + 1) / 2]
    )


def test_residual_stats_bucket_membership():
    T = 4
    resid = np.zeros((T, len(GRID5)))
    resid[:, 2] = 0.02  # 36m: 2 bp everywhere
    table = residual_stats(resid, GRID5)
    # buckets: 3-12 (y3, y12), 24-48 (y36), 60-120 (y60, y120)
    assert list(table["maturity"]) == [
        "y3", "y12", "y36", "y60", "y120", "3-12", "24-48", "60-120", "average",
    ]
    row = table.set_index("maturity")
    assert row.loc["24-48", "mae_bp"] == pytest.approx(2.0)
    assert row.loc["3-12", "mae_bp"] == pytest.approx(0.0)
    assert row.loc["average", "mae_bp"] == pytest.approx(2.0 / 5)
    with pytest.raises(ValueError, match="residuals must be"):
        residual_stats(np.zeros((4, 3)), GRID5)


# ---------------------------------------------------------------------------
# shared tiny fit
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def tiny_fit():
    rng = np.random.default_rng(8)
    cmat = augmented_loading(loading_matrix(0.0609, GRID5), 0)
    T = 60
    labels = np.where(np.arange(T) < T // 2, 1, 2)
    mu = np.array([[6.0, -1.5, 0.3], [2.5, 0.5, -0.3]])
    factors = np.zeros((T, 3))
    for t in range(1, T):
        factors[t] = 0.85 * factors[t - 1] + rng.standard_normal(3) * 0.3
    values = (factors + mu[labels - 1]) @ cmat.T + rng.standard_normal((T, 5)) * 0.08
    panel = YieldPanel(
        dates=pd.period_range("2001-01", periods=T, freq="M"), values=values, grid=GRID5
    )
    chain = ChainConfig(n_burn=30, n_draws=50, thin=5, keep_factors="mean")
    draws = run_chain(values, labels, GRID5, chain=chain, seed=30)
    return draws, labels, panel


def test_ttest_report_layout(tiny_fit):
    draws, _, _ = tiny_fit
    table = ttest_report(draws)
    assert len(table) == 3 * 3  # one pair, three blocks, three components
    assert set(table["pair"]) == {"1v2"}
    assert set(table["block"]) == {"transition_diag", "innovation_diag", "regime_mean"}
    # the level means differ by ~3.5 between the planted regimes
    level = table[(table.block == "regime_mean") & (table.component == 1)].iloc[0]
    assert level["pvalue"] < 1e-6
    assert level["t"] > 0  # regime 1 level above regime 2
    assert np.isfinite(table["df"]).all()


def test_fitted_frame_and_residual_report(tiny_fit):
    draws, labels, panel = tiny_fit
    frame = fitted_frame(draws, labels, panel)
    assert len(frame) == 60 * 5
    assert list(frame.columns) == ["date", "maturity", "actual", "fitted", "residual"]
    np.testing.assert_allclose(frame["residual"], frame["actual"] - frame["fitted"])
    # the fit should track the data well within a regime
    assert frame["residual"].abs().mean() < 0.2

    report = residual_report(draws, labels, panel)
    assert list(report["maturity"])[-1] == "average"
    assert report["rmse_bp"].iloc[-1] < 25.0  # noise is 8 bp; allow slack


def test_ttest_report_degenerate_draws():
    base = PosteriorDraws(
        decay=np.full(4, 0.0609),
        transition=np.broadcast_to(0.9 * np.eye(3), (4, 2, 3, 3)).copy(),
        innovation_cov=np.broadcast_to(np.eye(3), (4, 2, 3, 3)).copy(),
        regime_means=np.broadcast_to(
            np.array([[5.0, -1.0, 0.2], [3.0, -1.0, 0.2]]), (4, 2, 3)
        ).copy(),
        meas_var=np.full((4, 5), 0.01),
        inclusion=np.ones((4, 2, 3, 3), dtype=np.int8),
        loglik=np.zeros(4),
        factor_mean=np.zeros((10, 3)),
        accept_rate=0.0,
        grid=GRID5,
        n_macro=0,
    )
    table = ttest_report(base).set_index(["block", "component"])
    level = table.loc[("regime_mean", 1)]
    assert level["t"] == np.inf and level["pvalue"] == 0.0
    slope = table.loc[("regime_mean", 2)]
    assert slope["t"] == 0.0 and slope["pvalue"] == 1.0


# ---------------------------------------------------------------------------
# impulse responses
# ---------------------------------------------------------------------------

def test_girf_matches_matrix_power_oracle():
    rng = np.random.default_rng(14)
    A = rng.uniform(-0.3, 0.3, (3, 3)) + 0.5 * np.eye(3)
    M = rng.standard_normal((3, 3))
    H = M @ M.T + 0.5 * np.eye(3)
    for j in range(3):
        out = girf(A, H, shock=j, horizon=6)
        delta = H[:, j] / np.sqrt(H[j, j])
        for h in range(7):
            expected = np.linalg.matrix_power(A, h) @ delta
            np.testing.assert_allclose(out[h], expected, rtol=1e-12, atol=1e-14)
    # impact response of the shocked component is its own sd
    out = girf(A, H, shock=1, horizon=0)
    assert out[0, 1] == pytest.approx(np.sqrt(H[1, 1]), rel=1e-14)


def test_girf_validation():
    A, H = 0.9 * np.eye(2), np.eye(2)
    with pytest.raises(ValueError, match="shock component"):
        girf(A, H, shock=5, horizon=3)
    with pytest.raises(ValueError, match="horizon"):
        girf(A, H, shock=0, horizon=-1)


def test_girf_table_bands_collapse_for_constant_draws(tiny_fit):
    draws, _, _ = tiny_fit
    const = PosteriorDraws(
        decay=draws.decay[:2],
        transition=np.repeat(draws.transition[:1], 2, axis=0),
        innovation_cov=np.repeat(draws.innovation_cov[:1], 2, axis=0),
        regime_means=draws.regime_means[:2],
        meas_var=draws.meas_var[:2],
        inclusion=draws.inclusion[:2],
        loglik=draws.loglik[:2],
        factor_mean=draws.factor_mean,
        accept_rate=0.0,
        grid=draws.grid,
        n_macro=0,
    )
    table = girf_table(const, horizon=4)
    assert len(table) == 2 * 3 * 5 * 3  # regimes x shocks x horizons x factors
    np.testing.assert_allclose(table["q05"], table["q95"], atol=1e-14)
    one = table[(table.regime == 1) & (table.shock == 2) & (table.factor == 1)]
    expected = girf(const.transition[0, 0], const.innovation_cov[0, 0], 1, 4)[:, 0]
    np.testing.assert_allclose(one.sort_values("horizon")["q50"], expected, atol=1e-14)


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def test_plots_write_svg(tiny_fit, tmp_path):
    draws, labels, panel = tiny_fit
    frame = fitted_frame(draws, labels, panel)
    girfs = girf_table(draws, horizon=6)

    paths = {
        "fitted": tmp_path / "fitted.svg",
        "girf": tmp_path / "girf.svg",
        "decay": tmp_path / "decay.svg",
    }
    plot_fitted(frame, paths["fitted"], maturities=("y3", "y120"))
    plot_girf(girfs, paths["girf"], regime=1, shock=1)
    plot_decay(draws, paths["decay"])
    for path in paths.values():
        text = path.read_text()
        assert "<svg" in text[:400]
