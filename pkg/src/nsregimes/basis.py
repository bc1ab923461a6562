"""Nelson-Siegel factor loadings on a maturity grid.

The yield on a maturity ``tau`` (in months) loads on three latent factors:

    y(tau) = L + S * (1 - exp(-lam*tau)) / (lam*tau)
               + C * ((1 - exp(-lam*tau)) / (lam*tau) - exp(-lam*tau))

``lam`` is the decay rate per month.  The level loading is constant, the
slope loading decays from one to zero, and the curvature loading is a hump
that peaks at medium maturities (near 30 months for lam = 0.0609).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DEFAULT_MATURITIES",
    "REFERENCE_DECAY",
    "MaturityGrid",
    "LoadingMatrix",
    "loading_row",
    "loading_matrix",
    "augmented_loading",
]

#: Month grid used throughout the empirical work: 3m to 120m.
DEFAULT_MATURITIES: tuple[float, ...] = (
    3.0, 6.0, 9.0, 12.0, 24.0, 36.0, 48.0, 60.0, 72.0, 84.0, 96.0, 108.0, 120.0,
)

#: Conventional monthly decay rate; fixes the curvature hump near 30 months.
REFERENCE_DECAY: float = 0.0609

# Below this value of lam*tau the closed form (1 - exp(-x))/x loses digits
# to cancellation, so a truncated series is used instead.
_SERIES_CUTOFF = 1e-6


@dataclass(frozen=True)
class MaturityGrid:
    """Strictly increasing grid of maturities in months."""

    maturities: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.maturities) == 0:
            raise ValueError("maturity grid is empty")
        arr = np.asarray(self.maturities, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("maturities must be finite")
        if np.any(arr <= 0.0):
            raise ValueError("maturities must be positive")
        if np.any(np.diff(arr) <= 0.0):
            raise ValueError("maturities must be strictly increasing")
        object.__setattr__(self, "maturities", tuple(float(m) for m in arr))

    def __len__(self) -> int:
        return len(self.maturities)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.maturities, dtype=float)

    def labels(self) -> list[str]:
        """Column labels of the form ``y3``, ``y6`` ... used in CSV headers."""
        out = []
        for m in self.maturities:
            out.append(f"y{int(m)}" if float(m).is_integer() else f"y{m:g}")
        return out


DEFAULT_GRID = MaturityGrid(DEFAULT_MATURITIES)


@dataclass(frozen=True)
class LoadingMatrix:
    """Loading matrix of shape (n_maturities, 3) for a fixed decay rate."""

    values: np.ndarray
    decay: float
    grid: MaturityGrid


def _slope_factor(x: np.ndarray) -> np.ndarray:
    """Evaluate (1 - exp(-x))/x with a series branch for tiny x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    tiny = x < _SERIES_CUTOFF
    xt = x[tiny]
    out[tiny] = 1.0 - xt / 2.0 + xt * xt / 6.0
    xs = x[~tiny]
    out[~tiny] = -np.expm1(-xs) / xs
    return out


def loading_row(decay: float, maturity: float) -> np.ndarray:
    """Loadings (level, slope, curvature) for one maturity.

    Parameters
    ----------
    decay : float
        Decay rate per month, must be positive.
    maturity : float
        Maturity in months, must be positive.
    """
    if not np.isfinite(decay) or decay <= 0.0:
        raise ValueError(f"decay must be positive, got {decay}")
    if not np.isfinite(maturity) or maturity <= 0.0:
        raise ValueError(f"maturity must be positive, got {maturity}")
    x = decay * maturity
    slope = float(_slope_factor(np.array([x]))[0])
    curv = slope - float(np.exp(-x))
    return np.array([1.0, slope, curv])


def loading_matrix(decay: float, grid: MaturityGrid = DEFAULT_GRID) -> LoadingMatrix:
    """Stack loading rows for every maturity on the grid."""
    if not np.isfinite(decay) or decay <= 0.0:
        raise ValueError(f"decay must be positive, got {decay}")
    x = decay * grid.as_array()
    slope = _slope_factor(x)
    curv = slope - np.exp(-x)
    values = np.column_stack([np.ones_like(x), slope, curv])
    values.setflags(write=False)
    return LoadingMatrix(values=values, decay=float(decay), grid=grid)


def augmented_loading(loading: LoadingMatrix | np.ndarray, n_macro: int) -> np.ndarray:
    """Block-diagonal measurement matrix for a model with observed factors.

    The yield block keeps the Nelson-Siegel loadings; each of the ``n_macro``
    observed series loads one-for-one on its own factor:

        [[ Lam, 0 ],
         [ 0,   I ]]

    With ``n_macro == 0`` the yield loadings are returned unchanged.
    """
    lam = loading.values if isinstance(loading, LoadingMatrix) else np.asarray(loading, float)
    if lam.ndim != 2 or lam.shape[1] != 3:
        raise ValueError(f"loading matrix must have three columns, got shape {lam.shape}")
    if n_macro < 0:
        raise ValueError("n_macro must be non-negative")
    if n_macro == 0:
        return np.array(lam, dtype=float)
    n = lam.shape[0]
    out = np.zeros((n + n_macro, 3 + n_macro))
    out[:n, :3] = lam
    out[n:, 3:] = np.eye(n_macro)
    return out
