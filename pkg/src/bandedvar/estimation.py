"""Row-wise least-squares estimation of banded coefficient matrices.

Each equation i regresses y_{i,t} on the lagged values of the series within
bandwidth k of i, for lags 1..d. Rows are estimated independently, so the
whole fit parallelises across equations without changing the result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularDesignError
from .linalg import BandedMatrix, lstsq
from .model import BandedVarModel, TimeSeries

__all__ = [
    "RowDesign",
    "FitReport",
    "row_regressor_count",
    "band_columns",
    "build_row_design",
    "fit_row",
    "fit_banded_var",
    "row_coefficients",
]


def row_regressor_count(i: int, k: int, d: int, p: int) -> int:
    """Number of regressors for equation i: d lags times the in-band series count.

    Interior rows have (2k+1)d regressors; rows within k of either edge lose
    the out-of-range columns. Indices are 0-based.
    """
    if not 0 <= i < p:
        raise ValueError(f"row {i} out of range for p={p}")
    if not 0 <= k <= p - 1:
        raise ValueError(f"bandwidth parameter k={k} outside [0, {p - 1}]")
    if d < 1:
        raise ValueError("order d must be at least 1")
    return d * (min(p - 1, i + k) - max(0, i - k) + 1)


def band_columns(i: int, k: int, d: int, p: int):
    """(lag, series) pairs backing each design column, lag-major then series ascending."""
    lo, hi = max(0, i - k), min(p - 1, i + k)
    return [(lag, j) for lag in range(1, d + 1) for j in range(lo, hi + 1)]


@dataclass(frozen=True)
class RowDesign:
    """Design matrix and response for one equation at trial (k, d)."""

    i: int
    k: int
    d: int
    x: np.ndarray
    y: np.ndarray
    col_map: tuple  # (lag, series) per design column

    @property
    def n_obs(self) -> int:
        return self.y.shape[0]


def build_row_design(ts: TimeSeries, i: int, k: int, d: int) -> RowDesign:
    """Assemble the regression for equation i at trial bandwidth k and order d.

    The response stacks y_{i,t} for t = d..n-1; design row t holds, for each
    lag 1..d, the lag-shifted values of the series within bandwidth k of i.
    """
    p, n = ts.p, ts.n
    count = row_regressor_count(i, k, d, p)
    if n <= d + count:
        raise ValueError(
            f"series too short for row {i} at (k={k}, d={d}): "
            f"need n > {d + count}, have n = {n}"
        )
    vals = ts.values
    lo, hi = max(0, i - k), min(p - 1, i + k)
    y = vals[i, d:].copy()
    blocks = [vals[lo : hi + 1, d - lag : n - lag].T for lag in range(1, d + 1)]
    x = np.hstack(blocks)
    return RowDesign(i=i, k=k, d=d, x=x, y=y, col_map=tuple(band_columns(i, k, d, p)))


def fit_row(design: RowDesign):
    """Least-squares fit of one equation; returns (coefficients, residual sum of squares)."""
    try:
        beta = lstsq(design.x, design.y)
    except SingularDesignError as exc:
        lag, j = design.col_map[exc.column] if exc.column is not None and exc.column < len(design.col_map) else (None, None)
        detail = f" (lag {lag}, series {j})" if lag is not None else ""
        raise SingularDesignError(
            f"row {design.i}: {exc}{detail}", column=exc.column, row=design.i
        ) from None
    resid = design.y - design.x @ beta
    return beta, float(resid @ resid)


@dataclass
class FitReport:
    """Assembled model plus per-equation diagnostics.

    ``rss[i]`` is the residual sum of squares of equation i, ``betas[i]`` its
    coefficient vector (lag-major, series ascending), ``sigma_hat[i]`` the
    innovation variance estimate rss[i] / (n - d). ``means`` holds the
    per-series sample means that were subtracted when the fit demeaned.
    """

    model: BandedVarModel
    rss: np.ndarray
    betas: list = field(repr=False)
    sigma_hat: np.ndarray = field(repr=False)
    means: np.ndarray | None = None

    def to_dict(self) -> dict:
        out = {
            "model": self.model.to_dict(means=self.means),
            "rss": self.rss.tolist(),
            "sigma_hat": self.sigma_hat.tolist(),
        }
        return out


def fit_banded_var(
    ts: TimeSeries, k: int, d: int = 1, demean: bool = False, threads: int = 1
) -> FitReport:
    """Fit all p equations at bandwidth k and order d and assemble the model.

    With ``demean=True`` per-series sample means are removed first and kept in
    the report. Equations may be fitted by several worker threads; the result
    does not depend on the worker count.
    """
    work = ts
    means = None
    if demean:
        work, means = ts.demeaned()
    p, n = work.p, work.n

    def one_row(i):
        design = build_row_design(work, i, k, d)
        beta, rss = fit_row(design)
        return beta, rss, design.col_map

    results = [None] * p
    failures = []
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            raw = list(pool.map(lambda i: _guard(one_row, i), range(p)))
    else:
        raw = [_guard(one_row, i) for i in range(p)]
    for i, item in enumerate(raw):
        if isinstance(item, SingularDesignError):
            failures.append(i)
        else:
            results[i] = item
    if failures:
        raise SingularDesignError(
            f"singular design in rows {failures}", rows=failures
        )

    kk = min(k, p - 1)
    diag_sets = [
        [np.zeros(p - abs(m - kk)) for m in range(2 * kk + 1)] for _ in range(d)
    ]
    rss = np.empty(p)
    betas = []
    for i in range(p):
        beta, rss_i, col_map = results[i]
        rss[i] = rss_i
        betas.append(beta)
        for value, (lag, j) in zip(beta, col_map):
            diag_sets[lag - 1][(j - i) + kk][min(i, j)] = value
    coeffs = [BandedMatrix(p, kk, diags) for diags in diag_sets]
    model = BandedVarModel(p, d, kk, coeffs)
    return FitReport(
        model=model,
        rss=rss,
        betas=betas,
        sigma_hat=rss / (n - d),
        means=means,
    )


def _guard(fn, i):
    try:
        return fn(i)
    except SingularDesignError as exc:
        return exc


def row_coefficients(model: BandedVarModel, i: int) -> np.ndarray:
    """Extract equation i's in-band coefficients, lag-major, series ascending."""
    cols = band_columns(i, model.k0, model.d, model.p)
    return np.array([model.coeffs[lag - 1][i, j] for lag, j in cols])
