"""SNP preprocessing and latent-feature extraction for genomic prediction.

The pipeline turns a wide binary SNP matrix (values 0/2) into a handful of
continuous features: drop duplicate and low-frequency columns using training
rows only, screen the survivors with per-SNP OLS Wald tests, order by
p-value, and sum consecutive groups of G slope-weighted SNP columns into one
latent feature each.  The features then feed the D-vine regression engine.

Binary matrix format "SVM1": magic bytes b"SVM1", little-endian uint32 n and
uint32 P, then P columns of n uint8 values in {0, 2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .bicop import select_family, tau as bicop_tau
from .margins import kde_fit, pit

__all__ = [
    "SNPMatrix",
    "ScreenResult",
    "FeatureSet",
    "SNPValueError",
    "preprocess",
    "screen",
    "extract_features",
    "bivariate_analysis",
    "read_snp_binary",
    "write_snp_binary",
]

_MAGIC = b"SVM1"
_BLOCK_COLS = 4096


class SNPValueError(ValueError):
    """A SNP entry other than 0 or 2 was encountered."""


@dataclass(frozen=True)
class SNPMatrix:
    """n x P matrix of binary genotypes coded {0, 2} with column identifiers."""

    values: np.ndarray
    col_ids: tuple[str, ...]
    row_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2:
            raise ValueError("SNP matrix must be 2-D")
        if len(self.col_ids) != values.shape[1]:
            raise ValueError("col_ids length must match the column count")
        bad = ~np.isin(values, (0, 2))
        if np.any(bad):
            r, c = np.argwhere(bad)[0]
            raise SNPValueError(
                f"SNP value {values[r, c]!r} at row {r}, column {self.col_ids[c]!r}; "
                "entries must be 0 or 2"
            )
        object.__setattr__(self, "values", values.astype(np.uint8))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def take(self, col_index) -> "SNPMatrix":
        return SNPMatrix(
            values=self.values[:, col_index],
            col_ids=tuple(self.col_ids[i] for i in col_index),
            row_ids=self.row_ids,
        )


@dataclass(frozen=True)
class ScreenResult:
    """Per-SNP OLS screen: kept columns ordered by p-value (ties by column
    order), with slopes, intercepts, and two-tailed Wald p-values."""

    order: tuple[int, ...]           # column indices into the screened matrix
    col_ids: tuple[str, ...]         # ids of the ordered columns
    slopes: np.ndarray               # per input column, unordered
    intercepts: np.ndarray
    pvalues: np.ndarray
    p_cut: float


@dataclass(frozen=True)
class FeatureSet:
    """Slope-weighted SNP group sums in screening order."""

    values: np.ndarray               # n x n_features
    groups: tuple[tuple[str, ...], ...]
    weights: tuple[tuple[float, ...], ...]
    pvalue_ranges: tuple[tuple[float, float], ...]
    grouping: int


def preprocess(
    train: SNPMatrix,
    test: SNPMatrix | None = None,
    freq_threshold: float = 0.05,
) -> tuple[SNPMatrix, SNPMatrix | None]:
    """Drop duplicate columns (keeping the first) and columns whose minor
    category is rarer than ``freq_threshold`` in the training rows; the same
    columns are dropped from the test matrix."""
    if test is not None and test.col_ids != train.col_ids:
        raise ValueError("train and test must share columns")
    n, P = train.shape
    keep: list[int] = []
    seen: set[bytes] = set()
    for start in range(0, P, _BLOCK_COLS):
        block = train.values[:, start : start + _BLOCK_COLS]
        n_two = np.count_nonzero(block == 2, axis=0)
        minor = np.minimum(n_two, n - n_two) / n
        for j in range(block.shape[1]):
            if minor[j] < freq_threshold:
                continue
            key = block[:, j].tobytes()
            if key in seen:
                continue
            seen.add(key)
            keep.append(start + j)
    if not keep:
        raise ValueError("no SNP columns survive preprocessing")
    return train.take(keep), (test.take(keep) if test is not None else None)


def screen(y, snps: SNPMatrix, p_cut: float = 0.10) -> ScreenResult:
    """Per-SNP simple linear regression with a two-tailed Wald test on the
    slope (normal reference); keep p < p_cut, ordered non-decreasingly."""
    y = np.asarray(y, dtype=float).ravel()
    n, P = snps.shape
    if y.size != n:
        raise ValueError("response length must match the SNP row count")
    if n < 10:
        raise ValueError("need at least 10 observations")
    slopes = np.empty(P)
    intercepts = np.empty(P)
    pvalues = np.empty(P)
    ybar = y.mean()
    syy = float(np.sum((y - ybar) ** 2))
    for start in range(0, P, _BLOCK_COLS):
        X = snps.values[:, start : start + _BLOCK_COLS].astype(float)
        xbar = X.mean(axis=0)
        xc = X - xbar
        sxx = np.sum(xc * xc, axis=0)
        assert np.all(sxx > 0), "constant SNP column survived the frequency filter"
        sxy = xc.T @ (y - ybar)
        b1 = sxy / sxx
        rss = np.maximum(syy - b1 * sxy, 0.0)
        sigma2 = rss / (n - 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            zstat = np.abs(b1) / np.sqrt(sigma2 / sxx)
        pv = np.where(np.isfinite(zstat), 2.0 * ndtr(-zstat), 0.0)
        sl = slice(start, start + X.shape[1])
        slopes[sl] = b1
        intercepts[sl] = ybar - b1 * xbar
        pvalues[sl] = pv
    kept = np.flatnonzero(pvalues < p_cut)
    order = kept[np.lexsort((kept, pvalues[kept]))]
    return ScreenResult(
        order=tuple(int(i) for i in order),
        col_ids=tuple(snps.col_ids[i] for i in order),
        slopes=slopes,
        intercepts=intercepts,
        pvalues=pvalues,
        p_cut=p_cut,
    )


def extract_features(screen_result: ScreenResult, snps: SNPMatrix, grouping: int) -> FeatureSet:
    """Sum consecutive groups of ``grouping`` slope-weighted SNP columns (in
    p-value order) into ceil(|O|/G) continuous features."""
    if grouping <= 0:
        raise ValueError("grouping size must be positive")
    order = list(screen_result.order)
    if not order:
        raise ValueError("no screened SNPs to group")
    n = snps.shape[0]
    k = math.ceil(len(order) / grouping)
    values = np.zeros((n, k))
    groups, weights, p_ranges = [], [], []
    for d in range(k):
        block = order[d * grouping : (d + 1) * grouping]
        w = screen_result.slopes[block]
        values[:, d] = snps.values[:, block].astype(float) @ w
        groups.append(tuple(snps.col_ids[i] for i in block))
        weights.append(tuple(float(x) for x in w))
        pv = screen_result.pvalues[block]
        p_ranges.append((float(pv.min()), float(pv.max())))
    return FeatureSet(
        values=values,
        groups=tuple(groups),
        weights=tuple(weights),
        pvalue_ranges=tuple(p_ranges),
        grouping=grouping,
    )


def bivariate_analysis(y, features: FeatureSet, criterion: str = "aic") -> list[dict]:
    """Two-node D-vine per feature: fit margins, select a pair-copula family,
    and flag features whose selected copula is independence."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size < 10:
        raise ValueError("need at least 10 observations")
    my = kde_fit(y)
    v = pit(my, y)
    out = []
    for d in range(features.values.shape[1]):
        col = features.values[:, d]
        u = pit(kde_fit(col), col)
        cop = select_family(v, u, criterion=criterion)
        out.append(
            {
                "feature": d,
                "copula": cop,
                "family": cop.family,
                "rotation": cop.rotation,
                "tau": bicop_tau(cop),
                "aic": cop.aic,
                "independent": cop.family == "indep",
            }
        )
    return out


# ---------------------------------------------------------------------------
# binary column-major SNP format
# ---------------------------------------------------------------------------

def write_snp_binary(path: str, snps: SNPMatrix) -> None:
    n, P = snps.shape
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(np.uint32(n).tobytes())
        fh.write(np.uint32(P).tobytes())
        for j in range(P):
            fh.write(snps.values[:, j].tobytes())


def read_snp_binary(path: str) -> SNPMatrix:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}; expected {_MAGIC!r}")
        header = np.frombuffer(fh.read(8), dtype="<u4")
        n, P = int(header[0]), int(header[1])
        cols = []
        for start in range(0, P, _BLOCK_COLS):
            count = min(_BLOCK_COLS, P - start)
            raw = fh.read(n * count)
            if len(raw) != n * count:
                raise ValueError("truncated SNP binary file")
            cols.append(np.frombuffer(raw, dtype=np.uint8).reshape(count, n).T)
    values = np.concatenate(cols, axis=1) if cols else np.empty((n, 0), dtype=np.uint8)
    return SNPMatrix(values=values, col_ids=tuple(f"snp{j}" for j in range(P)))


def feature_manifest(features: FeatureSet) -> dict:
    """JSON manifest mapping each feature to its SNP ids, weights, and
    p-value range."""
    return {
        "grouping": features.grouping,
        "features": [
            {
                "feature": d,
                "snps": list(features.groups[d]),
                "weights": list(features.weights[d]),
                "pvalue_range": list(features.pvalue_ranges[d]),
            }
            for d in range(len(features.groups))
        ],
    }
