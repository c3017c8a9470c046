"""Nonparametric univariate margins: Gaussian-kernel density estimates with
analytic CDF, inverse CDF, and probability-integral transforms.

The bandwidth follows Silverman's rule, 1.06 * min(sd, IQR/1.34) * n^(-1/5),
and the quantile search runs on a support extended four bandwidths past the
sample range so that pseudo-responses falling outside the training range stay
invertible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

__all__ = [
    "MarginalModel",
    "DegenerateMarginError",
    "kde_fit",
    "from_dict",
    "pit",
    "quantile",
    "logpdf",
]

UNIT_EPS = 1e-10
_GRID_SIZE = 401
_SUPPORT_BANDWIDTHS = 4.0
_CHUNK = 1024


class DegenerateMarginError(ValueError):
    """Margin cannot be estimated (constant or near-constant sample)."""


@dataclass(frozen=True)
class MarginalModel:
    """Gaussian-kernel marginal model.

    ``grid``/``cdf_grid`` bracket the quantile bisection; CDF and density
    queries are evaluated analytically from the sample.
    """

    sample: np.ndarray
    bandwidth: float
    grid: np.ndarray
    cdf_grid: np.ndarray

    @property
    def support(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def to_dict(self) -> dict:
        return {"sample": self.sample.tolist(), "bandwidth": self.bandwidth}


def kde_fit(x, bandwidth: float | None = None) -> MarginalModel:
    """Fit a Gaussian-kernel margin to a univariate sample.

    Parameters
    ----------
    x : array_like
        At least 10 observations with at least 2 distinct values.
    bandwidth : float, optional
        Override the Silverman-rule bandwidth (used when deserializing).
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 10:
        raise DegenerateMarginError("need at least 10 observations")
    if not np.all(np.isfinite(x)):
        raise DegenerateMarginError("sample contains non-finite values")
    sd = float(np.std(x, ddof=1))
    if sd <= 0.0:
        raise DegenerateMarginError("sample is constant")
    if bandwidth is None:
        q75, q25 = np.percentile(x, [75, 25])
        iqr = q75 - q25
        spread = min(sd, iqr / 1.34) if iqr > 0 else sd
        bandwidth = 1.06 * spread * x.size ** (-0.2)
    if not bandwidth > 0.0:
        raise DegenerateMarginError("bandwidth must be positive")
    lo = float(np.min(x)) - _SUPPORT_BANDWIDTHS * bandwidth
    hi = float(np.max(x)) + _SUPPORT_BANDWIDTHS * bandwidth
    grid = np.linspace(lo, hi, _GRID_SIZE)
    cdf_grid = _cdf(x, bandwidth, grid)
    # resolve flat stretches so the stored grid is strictly increasing; the
    # grid only brackets the bisection, queries use the analytic CDF
    cdf_grid = np.maximum.accumulate(cdf_grid) + np.arange(_GRID_SIZE) * 1e-15
    return MarginalModel(sample=x, bandwidth=float(bandwidth), grid=grid, cdf_grid=cdf_grid)


def from_dict(d: dict) -> MarginalModel:
    return kde_fit(np.asarray(d["sample"], dtype=float), bandwidth=float(d["bandwidth"]))


def _cdf(sample, h, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.shape)
    for start in range(0, x.size, _CHUNK):
        block = x[start : start + _CHUNK]
        z = (block[:, None] - sample[None, :]) / h
        out[start : start + _CHUNK] = ndtr(z).mean(axis=1)
    return out


def pit(m: MarginalModel, x) -> np.ndarray | float:
    """Probability integral transform, clamped to [1e-10, 1 - 1e-10]."""
    scalar = np.isscalar(x) or np.ndim(x) == 0
    finite = np.nan_to_num(np.asarray(x, dtype=float), posinf=1e300, neginf=-1e300)
    val = _cdf(m.sample, m.bandwidth, finite)
    val = np.clip(val, UNIT_EPS, 1.0 - UNIT_EPS)
    return float(val[0]) if scalar else val


def logpdf(m: MarginalModel, x) -> np.ndarray:
    """Log of the kernel density estimate."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.shape)
    n = m.sample.size
    const = np.log(n * m.bandwidth * np.sqrt(2.0 * np.pi))
    for start in range(0, x.size, _CHUNK):
        block = x[start : start + _CHUNK]
        z = (block[:, None] - m.sample[None, :]) / m.bandwidth
        mx = np.max(-0.5 * z * z, axis=1)
        out[start : start + _CHUNK] = (
            mx + np.log(np.sum(np.exp(-0.5 * z * z - mx[:, None]), axis=1)) - const
        )
    return out


def quantile(m: MarginalModel, p) -> np.ndarray | float:
    """Inverse of :func:`pit` by bisection on the extended support."""
    scalar = np.isscalar(p) or np.ndim(p) == 0
    p = np.clip(np.atleast_1d(np.asarray(p, dtype=float)), UNIT_EPS, 1.0 - UNIT_EPS)
    idx = np.searchsorted(m.cdf_grid, p)
    idx = np.clip(idx, 1, m.grid.size - 1)
    lo = m.grid[idx - 1].copy()
    hi = m.grid[idx].copy()
    scale = m.grid[-1] - m.grid[0]
    for _ in range(54):
        mid = 0.5 * (lo + hi)
        below = _cdf(m.sample, m.bandwidth, mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) < 1e-10 * scale:
            break
    out = 0.5 * (lo + hi)
    return float(out[0]) if scalar else out
