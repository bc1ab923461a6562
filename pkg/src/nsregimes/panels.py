"""Balanced monthly panels of yields and macro series.

CSV layout
----------
Yield files carry one ``date`` column (ISO ``YYYY-MM``) followed by one
column per maturity, headed ``y3``, ``y6``, ... ``y120``.  Macro files carry
``date`` plus one column per raw series.  Both must be balanced: strictly
increasing consecutive months, no missing cells.

Macro split candidates are mapped to the unit interval with a trailing
rolling-quantile transform before they enter any regime rule, so thresholds
like 0.4 mean "the 40th percentile of the last ten years".
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .basis import DEFAULT_GRID, MaturityGrid

__all__ = [
    "PanelFormatError",
    "YieldPanel",
    "MacroPanel",
    "DEFAULT_CANDIDATE_NAMES",
    "DEFAULT_FACTOR_NAMES",
    "ROLLING_WINDOW",
    "load_yield_panel",
    "write_yield_panel",
    "load_macro_table",
    "write_macro_table",
    "build_macro_panel",
    "align_yields",
    "rolling_quantile_standardize",
    "descriptive_stats",
]

logger = logging.getLogger(__name__)


class PanelFormatError(ValueError):
    """Raised when an input table violates the panel contract."""


#: Raw series eligible as split variables in the regime tree.
DEFAULT_CANDIDATE_NAMES: tuple[str, ...] = (
    "DTB3", "INDPRO", "CPI", "M2", "PAYEMS", "UNRATE",
    "OILPRICE", "TERM_SPREAD", "DEFAULT_SPREAD", "VIX",
)

#: Observed series that enter the state vector of the joint model.
DEFAULT_FACTOR_NAMES: tuple[str, ...] = ("CU", "FFR", "INFL")

#: Trailing window (months) of the rolling-quantile transform.
ROLLING_WINDOW = 120


def _parse_month_index(raw: pd.Series, origin: str) -> pd.PeriodIndex:
    try:
        idx = pd.PeriodIndex([str(v) for v in raw], freq="M")
    except Exception as exc:  # noqa: BLE001 - normalize parser errors
        raise PanelFormatError(f"{origin}: cannot parse dates as YYYY-MM ({exc})") from exc
    if idx.has_duplicates:
        dup = idx[idx.duplicated()][0]
        raise PanelFormatError(f"{origin}: duplicate date {dup}")
    if not idx.is_monotonic_increasing:
        raise PanelFormatError(f"{origin}: dates are not strictly increasing")
    gaps = np.diff(idx.asi8)
    if len(gaps) and np.any(gaps != 1):
        k = int(np.argmax(gaps != 1))
        raise PanelFormatError(f"{origin}: month gap after {idx[k]}")
    return idx


@dataclass
class YieldPanel:
    """Balanced panel of zero-coupon yields in percent."""

    dates: pd.PeriodIndex
    values: np.ndarray  # (T, n_maturities)
    grid: MaturityGrid

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise PanelFormatError("yield values must be two-dimensional")
        if len(self.dates) != self.values.shape[0]:
            raise PanelFormatError("date index and value rows disagree")
        if self.values.shape[1] != len(self.grid):
            raise PanelFormatError("value columns and maturity grid disagree")
        if not np.all(np.isfinite(self.values)):
            t, i = np.argwhere(~np.isfinite(self.values))[0]
            raise PanelFormatError(
                f"missing or non-numeric yield at {self.dates[t]}, {self.grid.labels()[i]}"
            )

    @property
    def n_periods(self) -> int:
        return self.values.shape[0]


@dataclass
class MacroPanel:
    """Macro series aligned to the model sample.

    ``candidates`` hold rolling-quantile standardized series in [0, 1] used
    by regime rules; ``factors`` hold the raw observed factor series.  The
    first ``warmup`` months of the raw table were consumed by the transform
    and are not part of the sample.
    """

    dates: pd.PeriodIndex
    candidates: np.ndarray  # (T, n_candidates)
    candidate_names: tuple[str, ...]
    factors: np.ndarray  # (T, n_factors), may have zero columns
    factor_names: tuple[str, ...] = ()
    warmup: int = ROLLING_WINDOW

    def __post_init__(self) -> None:
        self.candidates = np.asarray(self.candidates, dtype=float)
        self.factors = np.asarray(self.factors, dtype=float)
        if self.factors.size == 0:
            self.factors = self.factors.reshape(len(self.dates), 0)
        if self.candidates.shape != (len(self.dates), len(self.candidate_names)):
            raise PanelFormatError("candidate block shape mismatch")
        if self.factors.shape != (len(self.dates), len(self.factor_names)):
            raise PanelFormatError("factor block shape mismatch")

    @property
    def n_periods(self) -> int:
        return len(self.dates)

    def candidate(self, name: str) -> np.ndarray:
        try:
            j = self.candidate_names.index(name)
        except ValueError:
            raise KeyError(f"unknown split candidate {name!r}") from None
        return self.candidates[:, j]


def load_yield_panel(path, grid: MaturityGrid | None = None) -> YieldPanel:
    """Read a yield CSV; with ``grid`` given, demand exactly those columns."""
    try:
        frame = pd.read_csv(path)
    except (FileNotFoundError, pd.errors.EmptyDataError) as exc:
        raise PanelFormatError(f"{path}: {exc}") from exc
    if frame.shape[0] == 0 or "date" not in frame.columns:
        raise PanelFormatError(f"{path}: need a non-empty table with a 'date' column")
    idx = _parse_month_index(frame["date"], str(path))
    cols = [c for c in frame.columns if c != "date"]
    if grid is not None:
        for lbl in grid.labels():
            if lbl not in cols:
                raise PanelFormatError(f"{path}: missing tenor column {lbl}")
        cols = grid.labels()
    else:
        maturities = []
        for c in cols:
            if not c.startswith("y"):
                raise PanelFormatError(f"{path}: unexpected column {c!r}")
            try:
                maturities.append(float(c[1:]))
            except ValueError:
                raise PanelFormatError(f"{path}: unexpected column {c!r}") from None
        grid = MaturityGrid(tuple(maturities))
    values = frame[cols].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    return YieldPanel(dates=idx, values=values, grid=grid)


def write_yield_panel(panel: YieldPanel, path) -> None:
    frame = pd.DataFrame(panel.values, columns=panel.grid.labels())
    frame.insert(0, "date", [str(p) for p in panel.dates])
    frame.to_csv(path, index=False, lineterminator="\n")


def load_macro_table(path) -> pd.DataFrame:
    """Read a raw macro CSV into a month-indexed frame."""
    try:
        frame = pd.read_csv(path)
    except (FileNotFoundError, pd.errors.EmptyDataError) as exc:
        raise PanelFormatError(f"{path}: {exc}") from exc
    if frame.shape[0] == 0 or "date" not in frame.columns:
        raise PanelFormatError(f"{path}: need a non-empty table with a 'date' column")
    idx = _parse_month_index(frame["date"], str(path))
    out = frame.drop(columns=["date"]).apply(pd.to_numeric, errors="coerce")
    if out.isna().any().any():
        col = out.columns[np.argmax(out.isna().any().to_numpy())]
        raise PanelFormatError(f"{path}: missing or non-numeric value in column {col}")
    out.index = idx
    return out


def write_macro_table(table: pd.DataFrame, path) -> None:
    out = table.copy()
    out.insert(0, "date", [str(p) for p in table.index])
    out.to_csv(path, index=False, lineterminator="\n")


def rolling_quantile_standardize(series: np.ndarray, window: int = ROLLING_WINDOW) -> np.ndarray:
    """Trailing-window quantile transform onto [0, 1].

    For each month t with at least ``window`` predecessors, the output is
    the mid-rank of x_t within the ``window`` observations strictly before
    t: (count below + half the count equal) / window.  The first ``window``
    entries are warm-up and returned as NaN.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if window < 1:
        raise ValueError("window must be at least 1")
    if x.shape[0] <= window:
        raise ValueError(f"need more than window={window} observations, got {x.shape[0]}")
    wins = np.lib.stride_tricks.sliding_window_view(x, window)[: x.shape[0] - window]
    cur = x[window:, None]
    below = (wins < cur).sum(axis=1)
    equal = (wins == cur).sum(axis=1)
    out = np.full(x.shape[0], np.nan)
    out[window:] = (below + 0.5 * equal) / window
    return out


def build_macro_panel(
    table: pd.DataFrame,
    candidate_names: tuple[str, ...] | list[str] = DEFAULT_CANDIDATE_NAMES,
    factor_names: tuple[str, ...] | list[str] = (),
    window: int = ROLLING_WINDOW,
) -> MacroPanel:
    """Standardize candidates and trim the warm-up months from a raw table."""
    for name in list(candidate_names) + list(factor_names):
        if name not in table.columns:
            raise PanelFormatError(f"macro table lacks required column {name}")
    if table.shape[0] <= window:
        raise PanelFormatError(
            f"macro table has {table.shape[0]} months; need more than window={window}"
        )
    cand = np.column_stack(
        [rolling_quantile_standardize(table[n].to_numpy(float), window) for n in candidate_names]
    )
    dates = table.index[window:]
    factors = (
        table.loc[dates, list(factor_names)].to_numpy(float)
        if factor_names
        else np.empty((len(dates), 0))
    )
    return MacroPanel(
        dates=pd.PeriodIndex(dates, freq="M"),
        candidates=cand[window:],
        candidate_names=tuple(candidate_names),
        factors=factors,
        factor_names=tuple(factor_names),
        warmup=window,
    )


def align_yields(yields: YieldPanel, macro: MacroPanel) -> YieldPanel:
    """Restrict a yield panel to the macro panel's (post warm-up) dates."""
    pos = yields.dates.get_indexer(macro.dates)
    if np.any(pos < 0):
        missing = macro.dates[np.argmax(pos < 0)]
        raise PanelFormatError(f"yield panel lacks month {missing} required by macro sample")
    return YieldPanel(dates=macro.dates, values=yields.values[pos], grid=yields.grid)


# ---------------------------------------------------------------------------
# descriptive statistics
# ---------------------------------------------------------------------------

def _autocorr(x: np.ndarray, lag: int) -> float:
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        return np.nan
    return float(xc[lag:] @ xc[:-lag]) / denom


def descriptive_stats(panel: YieldPanel, lags: tuple[int, ...] = (1, 6, 12, 30)) -> pd.DataFrame:
    """Per-maturity mean, spread, range, and autocorrelations.

    Sample standard deviation uses the n-1 denominator.  Autocorrelations of
    a constant series are NaN.  Raises if the panel is too short for the
    largest lag.
    """
    if panel.n_periods <= max(lags):
        raise ValueError(f"panel has {panel.n_periods} months; need more than max lag {max(lags)}")
    rows = []
    for i, lbl in enumerate(panel.grid.labels()):
        x = panel.values[:, i]
        row = {
            "maturity": lbl,
            "Mean": float(x.mean()),
            "Std": float(x.std(ddof=1)),
            "Min": float(x.min()),
            "Max": float(x.max()),
        }
        for lag in lags:
            row[f"rho_{lag}"] = _autocorr(x, lag)
        rows.append(row)
    return pd.DataFrame(rows).set_index("maturity")
