"""Autocovariance estimation by banding or thresholding the sample estimator.

The lag-j sample autocovariance uses the full-sample mean and divisor n (not
n - j). A band-truncated version is consistent for banded VAR processes at a
much smaller bandwidth than the matrix dimension; the truncation level is
tuned by minimising a wild-bootstrap estimate of the matrix L1 risk

    R_j(r) ~ (1/q) sum_k || B_r(S*_{j,k}) - S_j ||_1,

where each bootstrap replicate S* reweights the summands of the sample
autocovariance with i.i.d. unit-mean unit-variance multipliers (standard
exponential by default). Hard thresholding is tuned the same way over a grid
of cutoffs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import l1_norm
from .model import TimeSeries
from .rng import as_generator

__all__ = [
    "AutocovEstimate",
    "BootstrapRisk",
    "sample_autocov",
    "band",
    "hard_threshold",
    "default_band_width",
    "default_band_grid",
    "default_threshold_grid",
    "bootstrap_select_band",
    "bootstrap_select_threshold",
    "estimate_autocov",
]


def sample_autocov(ts: TimeSeries, j: int) -> np.ndarray:
    """Lag-j sample autocovariance (1/n) sum_t (y_t - ybar)(y_{t+j} - ybar)^T."""
    n = ts.n
    if not 0 <= j < n:
        raise ValueError(f"lag {j} out of range for a series of length {n}")
    xc = ts.values - ts.values.mean(axis=1, keepdims=True)
    return (xc[:, : n - j] @ xc[:, j:].T) / n


def band(h, r: int) -> np.ndarray:
    """Keep entries with |i - j| <= r, zero the rest."""
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("banding is defined for square matrices")
    if r < 0:
        raise ValueError("band half-width must be non-negative")
    idx = np.arange(h.shape[0])
    mask = np.abs(idx[:, None] - idx[None, :]) <= r
    return np.where(mask, h, 0.0)


def hard_threshold(h, t: float) -> np.ndarray:
    """Keep entries with |value| > t, zero the rest."""
    h = np.asarray(h, dtype=float)
    if t < 0:
        raise ValueError("threshold must be non-negative")
    return np.where(np.abs(h) > t, h, 0.0)


def default_band_width(n: int, p: int, c: float = 1.0) -> int:
    """Asymptotic truncation rule round(c log(n / log p)), floored at zero."""
    if p <= 1:
        raise ValueError("p must exceed 1")
    if c <= 0:
        raise ValueError("constant c must be positive")
    lp = math.log(p)
    if lp >= n:
        raise ValueError(f"log p = {lp:.3f} must be below n = {n}")
    return max(0, int(math.floor(c * math.log(n / lp) + 0.5)))


def default_band_grid(n: int, p: int) -> np.ndarray:
    """Candidate truncation levels 0..min(p-1, 2 * rule + 5)."""
    return np.arange(0, min(p - 1, 2 * default_band_width(n, p, 1.0) + 5) + 1)


def default_threshold_grid(sample: np.ndarray, size: int = 21) -> np.ndarray:
    """Evenly spaced cutoffs from 0 to the largest absolute entry."""
    return np.linspace(0.0, float(np.abs(sample).max()), size)


@dataclass
class BootstrapRisk:
    """Estimated risk curve over a tuning grid and the minimising choice."""

    grid: np.ndarray
    risk: np.ndarray
    q: int
    argmin: float
    lag: int
    method: str

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "lag": int(self.lag),
            "q": int(self.q),
            "grid": self.grid.tolist(),
            "risk": self.risk.tolist(),
            "argmin": self.argmin,
        }


def _bootstrap_risks(ts, j, q, rng, weights, evaluate, n_candidates):
    n = ts.n
    if not 0 <= j < n:
        raise ValueError(f"lag {j} out of range for a series of length {n}")
    if q < 1:
        raise ValueError("need at least one bootstrap replicate")
    rng = as_generator(rng, label="bootstrap")
    if weights is None:
        weights = lambda g, size: g.standard_exponential(size)
    xc = ts.values - ts.values.mean(axis=1, keepdims=True)
    left, right = xc[:, : n - j], xc[:, j:]
    risks = np.zeros(n_candidates)
    for _ in range(q):
        u = np.asarray(weights(rng, n - j), dtype=float)
        star = (left * u) @ right.T / n
        risks += evaluate(star)
    return risks / q


def bootstrap_select_band(
    ts: TimeSeries,
    j: int = 0,
    grid=None,
    q: int = 100,
    rng=None,
    weights=None,
) -> BootstrapRisk:
    """Pick the banding half-width minimising the bootstrap L1 risk.

    ``weights`` may replace the standard-exponential multiplier law with any
    ``(rng, size) -> array`` callable drawing unit-mean, unit-variance
    weights. Ties on the risk curve go to the smaller half-width.
    """
    sample = sample_autocov(ts, j)
    if grid is None:
        grid = default_band_grid(ts.n, ts.p)
    grid = np.asarray(grid)
    if grid.size == 0:
        raise ValueError("empty candidate grid")
    idx = np.arange(ts.p)
    masks = [np.abs(idx[:, None] - idx[None, :]) <= r for r in grid]

    def evaluate(star):
        return np.array(
            [l1_norm(np.where(m, star - sample, -sample)) for m in masks]
        )

    risks = _bootstrap_risks(ts, j, q, rng, weights, evaluate, grid.size)
    best = int(np.argmin(risks))
    return BootstrapRisk(
        grid=grid, risk=risks, q=q, argmin=int(grid[best]), lag=j, method="band"
    )


def bootstrap_select_threshold(
    ts: TimeSeries,
    j: int = 0,
    grid=None,
    q: int = 100,
    rng=None,
    weights=None,
) -> BootstrapRisk:
    """Pick the hard-threshold cutoff minimising the bootstrap L1 risk."""
    sample = sample_autocov(ts, j)
    if grid is None:
        grid = default_threshold_grid(sample)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty candidate grid")

    def evaluate(star):
        astar = np.abs(star)
        return np.array(
            [l1_norm(np.where(astar > t, star - sample, -sample)) for t in grid]
        )

    risks = _bootstrap_risks(ts, j, q, rng, weights, evaluate, grid.size)
    best = int(np.argmin(risks))
    return BootstrapRisk(
        grid=grid, risk=risks, q=q, argmin=float(grid[best]), lag=j, method="threshold"
    )


@dataclass
class AutocovEstimate:
    """A lag-j autocovariance estimate and how its tuning was chosen."""

    j: int
    matrix: np.ndarray
    method: str  # sample | banded | thresholded
    tuning: dict

    def meta_dict(self) -> dict:
        return {"method": self.method, "lag": int(self.j), "tuning": self.tuning}


def estimate_autocov(
    ts: TimeSeries,
    j: int = 0,
    method: str = "banded",
    r: int | None = None,
    t: float | None = None,
    q: int = 100,
    rng=None,
    c: float = 1.0,
) -> AutocovEstimate:
    """One-call estimator: sample, banded, or thresholded autocovariance.

    Banding uses an explicit half-width ``r`` when given, otherwise the
    bootstrap selection; thresholding works the same way with ``t``. The
    returned estimate records which tuning path was taken.
    """
    sample = sample_autocov(ts, j)
    if method == "sample":
        return AutocovEstimate(j=j, matrix=sample, method="sample", tuning={})
    if method == "banded":
        if r is None:
            risk = bootstrap_select_band(ts, j, q=q, rng=rng)
            r = int(risk.argmin)
            tuning = {"r": r, "selected_by": "bootstrap", "q": q}
        else:
            tuning = {"r": int(r), "selected_by": "fixed"}
        return AutocovEstimate(j=j, matrix=band(sample, int(r)), method="banded", tuning=tuning)
    if method == "thresholded":
        if t is None:
            risk = bootstrap_select_threshold(ts, j, q=q, rng=rng)
            t = float(risk.argmin)
            tuning = {"t": t, "selected_by": "bootstrap", "q": q}
        else:
            tuning = {"t": float(t), "selected_by": "fixed"}
        return AutocovEstimate(
            j=j, matrix=hard_threshold(sample, float(t)), method="thresholded", tuning=tuning
        )
    raise ValueError(f"unknown method {method!r}")
