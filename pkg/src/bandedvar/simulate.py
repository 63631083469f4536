"""Ground-truth model generation and VAR path simulation.

Two coefficient generators mirror the benchmark designs: a dense uniform
band, and a sparse mixture whose band-edge entries are forced large before
rescaling. Both rescale the matrix so its spectral norm is a draw from
U[0.3, 1.0) (or a caller-fixed value), which guarantees stationarity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonStationaryError
from .linalg import BandedMatrix, spectral_norm
from .model import BandedVarModel, TimeSeries, is_stationary
from .rng import substream

__all__ = [
    "SimConfig",
    "gen_coeff_uniform",
    "gen_coeff_mixture",
    "gen_sigma_eps_structured",
    "simulate_var",
    "make_model",
    "run_simulation",
]

DEFAULT_BURN_IN = 500


@dataclass(frozen=True)
class SimConfig:
    """Settings for one synthetic dataset."""

    p: int
    n: int
    k0: int
    seed: int
    d: int = 1
    setting: str = "uniform"  # uniform | mixture
    sigma_eps_kind: str = "identity"  # identity | structured_bbt
    target_norm: float | None = None
    burn_in: int = DEFAULT_BURN_IN
    labels: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.p < 2 * self.k0 + 1:
            raise ValueError(f"p={self.p} must be at least 2 k0 + 1 = {2 * self.k0 + 1}")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.d != 1:
            raise ValueError("ground-truth generation supports first-order models only")
        if self.setting not in ("uniform", "mixture"):
            raise ValueError(f"unknown setting {self.setting!r}")
        if self.setting == "mixture" and self.k0 < 1:
            raise ValueError("mixture setting needs k0 >= 1 (band-edge entries)")
        if self.sigma_eps_kind not in ("identity", "structured_bbt"):
            raise ValueError(f"unknown sigma_eps_kind {self.sigma_eps_kind!r}")


def _rescaled(p, k0, diags, rng, target_norm):
    raw = BandedMatrix(p, k0, diags)
    s = spectral_norm(raw.to_dense())
    if s == 0.0:
        return None
    eta = float(target_norm) if target_norm is not None else rng.uniform(0.3, 1.0)
    return raw.scaled(eta / s)


def gen_coeff_uniform(p: int, k0: int, rng, target_norm: float | None = None) -> BandedMatrix:
    """Banded coefficient matrix with in-band entries U[-1, 1], rescaled so the
    spectral norm equals a U[0.3, 1.0) draw (or ``target_norm``)."""
    if p < 2 * k0 + 1:
        raise ValueError(f"p={p} must be at least 2 k0 + 1 = {2 * k0 + 1}")
    while True:
        diags = [rng.uniform(-1.0, 1.0, size=p - abs(m - k0)) for m in range(2 * k0 + 1)]
        out = _rescaled(p, k0, diags, rng, target_norm)
        if out is not None:
            return out


def gen_coeff_mixture(p: int, k0: int, rng, target_norm: float | None = None) -> BandedMatrix:
    """Sparse banded coefficient matrix: strict-interior entries are 0 with
    probability 0.4 and N(0, 1) otherwise, band-edge entries are -4 or 4
    equiprobably; rescaled like the uniform generator."""
    if k0 < 1:
        raise ValueError("mixture generator needs k0 >= 1")
    if p < 2 * k0 + 1:
        raise ValueError(f"p={p} must be at least 2 k0 + 1 = {2 * k0 + 1}")
    while True:
        diags = []
        for m in range(2 * k0 + 1):
            size = p - abs(m - k0)
            if abs(m - k0) == k0:
                diags.append(np.where(rng.random(size) < 0.5, -4.0, 4.0))
            else:
                keep = rng.random(size) >= 0.4
                diags.append(np.where(keep, rng.standard_normal(size), 0.0))
        out = _rescaled(p, k0, diags, rng, target_norm)
        if out is not None:
            return out


def gen_sigma_eps_structured(p: int) -> np.ndarray:
    """Innovation covariance B B^T with b_11 = 1 and, elsewhere, 0.6 on the
    diagonal and 0.8 on the first off-diagonals. Banded with half-width 2."""
    if p < 2:
        raise ValueError("structured covariance needs p >= 2")
    b = 0.6 * np.eye(p)
    idx = np.arange(p - 1)
    b[idx, idx + 1] = 0.8
    b[idx + 1, idx] = 0.8
    b[0, 0] = 1.0
    return b @ b.T


def _innovation_factor(sigma: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(sigma)
        return v * np.sqrt(np.clip(w, 0.0, None))


def simulate_var(
    model: BandedVarModel,
    n: int,
    burn_in: int = DEFAULT_BURN_IN,
    rng=None,
    allow_explosive: bool = False,
    labels=None,
) -> TimeSeries:
    """Simulate n observations with Gaussian innovations, after a burn-in from
    a zero start. A missing ``sigma_eps`` means identity innovations."""
    if n < 1:
        raise ValueError("need at least one observation")
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    if not allow_explosive and not is_stationary(model):
        raise NonStationaryError(
            "refusing to simulate a non-stationary model (pass allow_explosive=True to override)"
        )
    if rng is None:
        rng = substream(0, "innovations")
    p, d = model.p, model.d
    sigma = model.sigma_eps if model.sigma_eps is not None else np.eye(p)
    factor = _innovation_factor(np.asarray(sigma))
    total = burn_in + n
    eps = factor @ rng.standard_normal((p, total))
    coeffs = [a.to_dense() for a in model.coeffs]
    out = np.zeros((p, total))
    for t in range(total):
        acc = eps[:, t].copy()
        for ell, a in enumerate(coeffs, start=1):
            if t - ell >= 0:
                acc += a @ out[:, t - ell]
        out[:, t] = acc
    return TimeSeries(out[:, burn_in:], labels=labels)


def make_model(config: SimConfig) -> BandedVarModel:
    """Draw the ground-truth model for ``config`` (substream "coeffs")."""
    rng = substream(config.seed, "coeffs")
    if config.setting == "uniform":
        a = gen_coeff_uniform(config.p, config.k0, rng, config.target_norm)
    else:
        a = gen_coeff_mixture(config.p, config.k0, rng, config.target_norm)
    if config.sigma_eps_kind == "structured_bbt":
        sigma = gen_sigma_eps_structured(config.p)
    else:
        sigma = np.eye(config.p)
    return BandedVarModel(config.p, 1, config.k0, [a], sigma)


def run_simulation(config: SimConfig):
    """Draw a model and a path for ``config``; returns (model, series)."""
    model = make_model(config)
    ts = simulate_var(
        model,
        config.n,
        burn_in=config.burn_in,
        rng=substream(config.seed, "innovations"),
        labels=config.labels,
    )
    return model, ts
