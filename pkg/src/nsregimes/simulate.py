"""Synthetic panels with a known regime structure.

The generating process mirrors the estimated model exactly: persistent
driver series are standardized by the same rolling-quantile transform the
empirical pipeline uses, a fixed tree turns them into regime labels, and
yields come from the regime-switching factor process under those labels.
The bundled three-regime design plants a few off-diagonal transition
entries and keeps the rest at zero, which is what the selection flags are
supposed to find.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib.resources import files

import numpy as np
import pandas as pd

from .basis import MaturityGrid, loading_matrix
from .gibbs import posterior_mean_params
from .panels import MacroPanel, YieldPanel, build_macro_panel
from .statespace import ModelParams
from .tree import RegimeLabels, RegimeTree, assign_labels

__all__ = [
    "SimulationDesign",
    "SimulatedData",
    "bundled_design",
    "simulate_panel",
    "simulate_yields",
    "posterior_mean_params",
    "recovery_errors",
    "recovery_table",
]


@dataclass(frozen=True)
class SimulationDesign:
    """A complete generating process: truth plus driver configuration."""

    decay: float
    grid: MaturityGrid
    tree: RegimeTree
    transition: np.ndarray  # (G, 3, 3)
    innovation_cov: np.ndarray  # (G, 3, 3)
    regime_means: np.ndarray  # (G, 3)
    meas_var: np.ndarray  # (n_maturities,)
    drivers: tuple[str, ...]
    driver_ar: float = 0.97
    window: int = 120
    start: str = "1991-01"
    n_sample: int = 264
    name: str = ""

    @property
    def n_regimes(self) -> int:
        return self.transition.shape[0]

    def params(self) -> ModelParams:
        """The truth as estimable parameters; flags mark nonzero entries."""
        inclusion = (self.transition != 0.0).astype(np.int8)
        idx = np.arange(self.transition.shape[1])
        inclusion[:, idx, idx] = 1
        return ModelParams(
            decay=self.decay,
            transition=self.transition.copy(),
            innovation_cov=self.innovation_cov.copy(),
            regime_means=self.regime_means.copy(),
            meas_var=self.meas_var.copy(),
            inclusion=inclusion,
            grid=self.grid,
            n_macro=0,
        )

    @staticmethod
    def from_dict(obj: dict) -> "SimulationDesign":
        regimes = obj["regimes"]
        return SimulationDesign(
            decay=float(obj["decay"]),
            grid=MaturityGrid(tuple(float(m) for m in obj["maturities"])),
            tree=RegimeTree.from_dict(obj["tree"]),
            transition=np.array([r["transition"] for r in regimes], dtype=float),
            innovation_cov=np.array([r["innovation_cov"] for r in regimes], dtype=float),
            regime_means=np.array([r["mean"] for r in regimes], dtype=float),
            meas_var=np.asarray(obj["meas_var"], dtype=float),
            drivers=tuple(obj["drivers"]),
            driver_ar=float(obj.get("driver_ar", 0.97)),
            window=int(obj.get("window", 120)),
            start=str(obj.get("start", "1991-01")),
            n_sample=int(obj.get("n_sample", 264)),
            name=str(obj.get("name", "")),
        )

    @staticmethod
    def from_json(text: str) -> "SimulationDesign":
        return SimulationDesign.from_dict(json.loads(text))


def bundled_design(name: str = "threeregime") -> SimulationDesign:
    """Load a design shipped with the package."""
    path = files("nsregimes.designs").joinpath(f"{name}.json")
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ValueError(f"no bundled design named {name!r}") from None
    return SimulationDesign.from_json(text)


@dataclass
class SimulatedData:
    """Everything one replication produces, truths included."""

    yields: YieldPanel
    macro_table: pd.DataFrame  # raw driver series over warm-up plus sample
    macro: MacroPanel
    labels: RegimeLabels
    factors: np.ndarray  # (T, 3) latent states, regime means not included
    design: SimulationDesign
    seed: object = None


def _driver_series(rng: np.random.Generator, rho: float, n: int) -> np.ndarray:
    """Stationary AR(1) with unit innovation variance."""
    x = np.empty(n)
    x[0] = rng.standard_normal() / np.sqrt(1.0 - rho * rho)
    shocks = rng.standard_normal(n - 1)
    for t in range(1, n):
        x[t] = rho * x[t - 1] + shocks[t - 1]
    return x


def _factor_yield_draw(design: SimulationDesign, z: np.ndarray, rng: np.random.Generator):
    """Draw the latent factors and measured yields along a 0-based regime path."""
    T = z.shape[0]
    A, H, mu = design.transition, design.innovation_cov, design.regime_means
    chol_h = np.linalg.cholesky(H)
    factors = np.empty((T, 3))
    factors[0] = rng.standard_normal(3)
    for t in range(1, T):
        factors[t] = A[z[t - 1]] @ factors[t - 1] + chol_h[z[t]] @ rng.standard_normal(3)

    lam = loading_matrix(design.decay, design.grid).values
    values = (factors + mu[z]) @ lam.T
    values += rng.standard_normal(values.shape) * np.sqrt(design.meas_var)
    return factors, values


def simulate_panel(design: SimulationDesign, seed=0) -> SimulatedData:
    """One replication of the full generating process.

    Draw order is fixed (drivers, initial state, innovations, measurement
    noise) so a seed pins the panel byte for byte.
    """
    rng = np.random.default_rng(seed)
    n_total = design.window + design.n_sample
    table = pd.DataFrame(
        {name: _driver_series(rng, design.driver_ar, n_total) for name in design.drivers},
        index=pd.period_range(design.start, periods=n_total, freq="M"),
    )
    macro = build_macro_panel(table, candidate_names=design.drivers, window=design.window)
    labels = assign_labels(design.tree, macro)
    factors, values = _factor_yield_draw(design, labels.labels - 1, rng)
    yields = YieldPanel(dates=macro.dates, values=values, grid=design.grid)
    return SimulatedData(
        yields=yields, macro_table=table, macro=macro, labels=labels,
        factors=factors, design=design, seed=seed,
    )


def simulate_yields(design: SimulationDesign, labels, seed=0):
    """Fresh factor and yield draws along a fixed regime path.

    Recovery experiments that condition on a single regime assignment (one
    macro history, many yield panels) redraw only the factor process and
    the measurement noise.  Returns ``(values, factors)`` with ``values``
    shaped (T, n_maturities).
    """
    rng = np.random.default_rng(seed)
    z = np.asarray(getattr(labels, "labels", labels), dtype=int) - 1
    if z.min() < 0 or z.max() >= design.n_regimes:
        raise ValueError("labels outside the design's regime range")
    factors, values = _factor_yield_draw(design, z, rng)
    return values, factors


# ---------------------------------------------------------------------------
# comparing a fit against the truth
# ---------------------------------------------------------------------------

def recovery_errors(draws, truth: ModelParams) -> dict:
    """Posterior-mean errors per block plus the flag rates."""
    est = posterior_mean_params(draws)
    return {
        "decay": est.decay - truth.decay,
        "transition": est.transition - truth.transition,
        "innovation_cov": est.innovation_cov - truth.innovation_cov,
        "regime_means": est.regime_means - truth.regime_means,
        "meas_var": est.meas_var - truth.meas_var,
        "inclusion_mean": draws.inclusion.mean(axis=0),
    }


def recovery_table(draws, truth: ModelParams) -> pd.DataFrame:
    """Long table of truth vs posterior mean for every parameter entry."""
    est = posterior_mean_params(draws)
    rows = []
    G, p = truth.regime_means.shape
    for g in range(G):
        for i in range(p):
            for j in range(p):
                rows.append((
                    "transition", g + 1, i + 1, j + 1,
                    truth.transition[g, i, j], est.transition[g, i, j],
                ))
            for j in range(p):
                rows.append((
                    "innovation_cov", g + 1, i + 1, j + 1,
                    truth.innovation_cov[g, i, j], est.innovation_cov[g, i, j],
                ))
        for i in range(p):
            rows.append((
                "regime_mean", g + 1, i + 1, 0,
                truth.regime_means[g, i], est.regime_means[g, i],
            ))
    for i in range(truth.meas_var.shape[0]):
        rows.append(("meas_var", 0, i + 1, i + 1, truth.meas_var[i], est.meas_var[i]))
    rows.append(("decay", 0, 0, 0, truth.decay, est.decay))
    frame = pd.DataFrame(rows, columns=["block", "regime", "row", "col", "truth", "estimate"])
    frame["error"] = frame["estimate"] - frame["truth"]
    return frame
