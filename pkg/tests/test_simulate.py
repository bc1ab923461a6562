"""Tests for the synthetic-panel generator and recovery helpers."""

import numpy as np
import pandas as pd
import pytest

from nsregimes.basis import MaturityGrid, loading_matrix
from nsregimes.gibbs import PosteriorDraws
from nsregimes.simulate import (
    SimulationDesign,
    _driver_series,
    bundled_design,
    posterior_mean_params,
    recovery_errors,
    recovery_table,
    simulate_panel,
    simulate_yields,
)
from nsregimes.tree import RegimeTree, assign_labels

GRID5 = MaturityGrid((3.0, 12.0, 36.0, 60.0, 120.0))


def tiny_design(**overrides):
    base = dict(
        decay=0.0609,
        grid=GRID5,
        tree=RegimeTree.from_dict(
            {"var": "U", "threshold": 0.5, "yes": {"regime": 1}, "no": {"regime": 2}}
        ),
        transition=np.stack([
            0.9 * np.eye(3),
            np.array([[0.5, 0.2, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.5]]),
        ]),
        innovation_cov=np.stack([np.eye(3) * 0.1, np.eye(3) * 0.2]),
        regime_means=np.array([[5.0, -1.0, 0.5], [2.0, 1.0, -0.5]]),
        meas_var=np.full(5, 0.01),
        drivers=("U",),
        window=10,
        start="1995-01",
        n_sample=60,
    )
    base.update(overrides)
    return SimulationDesign(**base)


# ---------------------------------------------------------------------------
# the bundled design
# ---------------------------------------------------------------------------

def test_bundled_design_contents():
    design = bundled_design()
    assert design.n_regimes == 3
    assert len(design.grid) == 13
    assert design.decay == pytest.approx(0.0609)
    assert design.drivers == ("INFL", "UNRATE")
    assert design.window == 120 and design.n_sample == 264

    q = design.meas_var
    assert q[0] == pytest.approx(0.07) and q[8] == pytest.approx(0.07)
    assert np.all(np.delete(q, [0, 8]) == pytest.approx(0.01))
    # maturities 3 and 72 months carry the noisier measurements
    assert design.grid.maturities[0] == 3.0 and design.grid.maturities[8] == 72.0

    for g in range(3):
        assert np.all(np.linalg.eigvalsh(design.innovation_cov[g]) > 0)
        assert np.max(np.abs(np.linalg.eigvals(design.transition[g]))) < 1.0
    # level means decline across regimes; slopes rise toward zero
    assert np.all(np.diff(design.regime_means[:, 0]) < 0)

    truth = design.params()
    assert truth.inclusion[0, 0, 2] == 1 and truth.inclusion[0, 1, 2] == 1
    assert truth.inclusion[2, 0, 2] == 1
    assert truth.inclusion[0, 1, 0] == 0 and truth.inclusion[0, 2, 0] == 0
    assert np.all(truth.inclusion[:, np.arange(3), np.arange(3)] == 1)


def test_bundled_design_unknown_name():
    with pytest.raises(ValueError, match="no bundled design"):
        bundled_design("nosuch")


# ---------------------------------------------------------------------------
# the generator
# ---------------------------------------------------------------------------

def test_driver_series_moments():
    rng = np.random.default_rng(0)
    x = _driver_series(rng, 0.97, 200_000)
    corr = np.corrcoef(x[:-1], x[1:])[0, 1]
    assert corr == pytest.approx(0.97, abs=0.01)
    assert x.var() == pytest.approx(1.0 / (1 - 0.97**2), rel=0.05)


def test_simulate_panel_is_reproducible():
    design = tiny_design()
    a = simulate_panel(design, seed=42)
    b = simulate_panel(design, seed=42)
    c = simulate_panel(design, seed=43)
    np.testing.assert_array_equal(a.yields.values, b.yields.values)
    np.testing.assert_array_equal(a.labels.labels, b.labels.labels)
    np.testing.assert_array_equal(a.factors, b.factors)
    assert not np.array_equal(a.yields.values, c.yields.values)


def test_simulate_yields_redraws_along_a_fixed_path():
    design = tiny_design()
    labels = simulate_panel(design, seed=42).labels
    values, factors = simulate_yields(design, labels, seed=7)
    values2, _ = simulate_yields(design, labels, seed=7)
    values3, _ = simulate_yields(design, labels.labels, seed=8)
    assert values.shape == (60, 5) and factors.shape == (60, 3)
    np.testing.assert_array_equal(values, values2)
    assert not np.array_equal(values, values3)
    with pytest.raises(ValueError):
        simulate_yields(design, np.full(60, 3), seed=0)


def test_simulate_panel_dates_and_shapes():
    sim = simulate_panel(bundled_design(), seed=1)
    assert sim.macro_table.shape[0] == 384
    assert str(sim.macro_table.index[0]) == "1991-01"
    assert sim.yields.values.shape == (264, 13)
    assert str(sim.yields.dates[0]) == "2001-01"
    assert str(sim.yields.dates[-1]) == "2022-12"
    assert sim.factors.shape == (264, 3)
    assert sim.labels.labels.shape == (264,)
    assert set(np.unique(sim.labels.labels)) <= {1, 2, 3}


def test_simulate_panel_labels_follow_the_tree():
    sim = simulate_panel(bundled_design(), seed=2)
    recomputed = assign_labels(sim.design.tree, sim.macro)
    np.testing.assert_array_equal(sim.labels.labels, recomputed.labels)
    infl = sim.macro.candidate("INFL")
    unrate = sim.macro.candidate("UNRATE")
    z = sim.labels.labels
    assert np.all(infl[z == 1] < 0.4)
    assert np.all((infl[z == 2] >= 0.4) & (unrate[z == 2] < 0.2))
    assert np.all((infl[z == 3] >= 0.4) & (unrate[z == 3] >= 0.2))


def test_simulate_panel_state_recursion_conventions():
    # noise-free innovations expose which regime drives each transition
    design = tiny_design(
        innovation_cov=np.stack([np.eye(3) * 1e-20, np.eye(3) * 1e-20]),
        meas_var=np.full(5, 1e-18),
    )
    sim = simulate_panel(design, seed=7)
    z = sim.labels.labels - 1
    A = design.transition
    for t in range(1, design.n_sample):
        np.testing.assert_allclose(
            sim.factors[t], A[z[t - 1]] @ sim.factors[t - 1], atol=1e-8
        )
    lam = loading_matrix(design.decay, design.grid).values
    expected = (sim.factors + design.regime_means[z]) @ lam.T
    np.testing.assert_allclose(sim.yields.values, expected, atol=1e-7)


# ---------------------------------------------------------------------------
# recovery helpers
# ---------------------------------------------------------------------------

def fake_draws():
    G, p, n_obs = 1, 3, 5
    transition = np.stack([0.8 * np.eye(3)[None].repeat(G, 0),
                           0.6 * np.eye(3)[None].repeat(G, 0)])
    return PosteriorDraws(
        decay=np.array([0.05, 0.07]),
        transition=transition,
        innovation_cov=np.stack([np.eye(3)[None], 3.0 * np.eye(3)[None]]),
        regime_means=np.array([[[1.0, 2.0, 3.0]], [[3.0, 4.0, 5.0]]]),
        meas_var=np.vstack([np.full(n_obs, 0.02), np.full(n_obs, 0.04)]),
        inclusion=np.stack([np.ones((G, p, p), dtype=np.int8),
                            np.eye(3, dtype=np.int8)[None]]),
        loglik=np.array([-10.0, -12.0]),
        factor_mean=np.zeros((4, 3)),
        accept_rate=0.5,
        grid=GRID5,
        n_macro=0,
    )


def test_posterior_mean_params_averages_blocks():
    est = posterior_mean_params(fake_draws())
    assert est.decay == pytest.approx(0.06)
    np.testing.assert_allclose(est.transition[0], 0.7 * np.eye(3))
    np.testing.assert_allclose(est.innovation_cov[0], 2.0 * np.eye(3))
    np.testing.assert_allclose(est.regime_means[0], [2.0, 3.0, 4.0])
    np.testing.assert_allclose(est.meas_var, np.full(5, 0.03))
    # off-diagonal rate is 1/2 -> flag on at the threshold
    assert np.all(est.inclusion == 1)


def test_recovery_errors_and_table():
    draws = fake_draws()
    truth = posterior_mean_params(draws)  # zero-error case
    errs = recovery_errors(draws, truth)
    assert errs["decay"] == pytest.approx(0.0)
    np.testing.assert_allclose(errs["transition"], 0.0, atol=1e-15)
    np.testing.assert_allclose(errs["inclusion_mean"][0, 0, 1], 0.5)

    table = recovery_table(draws, truth)
    assert len(table) == 2 * 9 + 3 + 5 + 1
    np.testing.assert_allclose(table["error"], 0.0, atol=1e-15)
    diag = table[(table.block == "transition") & (table.row == table.col)]
    np.testing.assert_allclose(diag["estimate"], 0.7)
