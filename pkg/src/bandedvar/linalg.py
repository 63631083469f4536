"""Dense and banded linear-algebra kernels.

A banded matrix is stored by diagonals, so a p x p matrix with bandwidth
parameter k costs O(p k) memory instead of O(p^2). Conversion to a dense
array is always an explicit call, never implicit. Dense matrices are plain
``numpy.ndarray`` values throughout the package.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import qr as _qr
from scipy.linalg import solve_triangular as _solve_triangular

from .errors import ConvergenceError, SingularDesignError

__all__ = [
    "BandedMatrix",
    "band_product",
    "lstsq",
    "l1_norm",
    "linf_norm",
    "frobenius_norm",
    "spectral_norm",
    "spectral_radius",
    "RANK_TOL",
]

# Relative pivot threshold below which a design is declared rank deficient.
RANK_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


class BandedMatrix:
    """Square matrix with entries confined to ``|i - j| <= k``, stored by diagonals.

    ``diagonals[m]`` holds the diagonal with offset ``o = m - k`` (column index
    minus row index): index 0 is the lowest sub-diagonal, index ``2k`` the
    highest super-diagonal. The diagonal at offset ``o`` has length ``p - |o|``
    and its ``t``-th entry is element ``(t, t + o)`` for ``o >= 0`` and
    ``(t - o, t)`` for ``o < 0``. Instances are immutable.
    """

    __slots__ = ("p", "k", "diagonals")

    def __init__(self, p: int, k: int, diagonals):
        p = int(p)
        k = int(k)
        if p <= 0:
            raise ValueError("dimension p must be positive")
        if not 0 <= k <= p - 1:
            raise ValueError(f"bandwidth parameter k={k} outside [0, {p - 1}]")
        diags = list(diagonals)
        if len(diags) != 2 * k + 1:
            raise ValueError(f"expected {2 * k + 1} diagonals, got {len(diags)}")
        frozen = []
        for m, d in enumerate(diags):
            arr = _frozen(d)
            want = p - abs(m - k)
            if arr.shape != (want,):
                raise ValueError(
                    f"diagonal at offset {m - k} has length {arr.shape}, expected ({want},)"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError("banded matrix entries must be finite")
            frozen.append(arr)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "diagonals", tuple(frozen))

    def __setattr__(self, name, value):
        raise AttributeError("BandedMatrix is immutable")

    @classmethod
    def zeros(cls, p: int, k: int = 0) -> "BandedMatrix":
        return cls(p, k, [np.zeros(p - abs(m - k)) for m in range(2 * k + 1)])

    @classmethod
    def identity(cls, p: int) -> "BandedMatrix":
        return cls(p, 0, [np.ones(p)])

    @classmethod
    def from_dense(cls, dense, k: int, check: bool = True) -> "BandedMatrix":
        """Build from a dense square array.

        With ``check=True`` (the default) any non-zero entry outside the band
        raises ValueError; truncation must be requested explicitly via
        :func:`bandedvar.autocov.band` first.
        """
        a = np.asarray(dense, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("dense input must be a square 2-D array")
        p = a.shape[0]
        if check and k < p - 1:
            rows, cols = np.nonzero(a)
            if np.any(np.abs(rows - cols) > k):
                bad = np.argmax(np.abs(rows - cols) > k)
                raise ValueError(
                    f"entry ({rows[bad]}, {cols[bad]}) lies outside bandwidth {k}"
                )
        return cls(p, k, [np.diagonal(a, offset=m - k).copy() for m in range(2 * k + 1)])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.p, self.p))
        for m, d in enumerate(self.diagonals):
            o = m - self.k
            idx = np.arange(self.p - abs(o))
            if o >= 0:
                out[idx, idx + o] = d
            else:
                out[idx - o, idx] = d
        return out

    def __getitem__(self, ij) -> float:
        i, j = ij
        if not (0 <= i < self.p and 0 <= j < self.p):
            raise IndexError(f"index ({i}, {j}) out of range for p={self.p}")
        o = j - i
        if abs(o) > self.k:
            return 0.0
        return float(self.diagonals[o + self.k][min(i, j)])

    def diagonal(self, offset: int = 0) -> np.ndarray:
        if abs(offset) > self.k:
            return np.zeros(self.p - abs(offset))
        return self.diagonals[offset + self.k]

    def scaled(self, c: float) -> "BandedMatrix":
        return BandedMatrix(self.p, self.k, [c * d for d in self.diagonals])

    def matvec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.p,):
            raise ValueError(f"vector length {v.shape} does not match p={self.p}")
        out = np.zeros(self.p)
        for m, d in enumerate(self.diagonals):
            o = m - self.k
            if o >= 0:
                out[: self.p - o] += d * v[o:]
            else:
                out[-o:] += d * v[: self.p + o]
        return out

    def __repr__(self):
        return f"BandedMatrix(p={self.p}, k={self.k})"


def band_product(a: BandedMatrix, b: BandedMatrix) -> BandedMatrix:
    """Multiply two banded matrices, staying in band storage.

    The result has bandwidth parameter ``min(a.k + b.k, p - 1)``; entries
    outside that band of the dense product are identically zero.
    """
    if a.p != b.p:
        raise ValueError(f"dimension mismatch: {a.p} vs {b.p}")
    p = a.p
    kc = min(a.k + b.k, p - 1)
    out = [np.zeros(p - abs(m - kc)) for m in range(2 * kc + 1)]
    for o in range(-kc, kc + 1):
        acc = out[o + kc]
        for u in range(max(-a.k, o - b.k), min(a.k, o + b.k) + 1):
            w = o - u
            lo = max(0, -o, -u)
            hi = p - max(0, o, u)
            if hi <= lo:
                continue
            # C[i, i+o] += A[i, i+u] * B[i+u, i+o]; each diagonal indexes by min
            # of its own (row, col) pair.
            da = a.diagonals[u + a.k]
            db = b.diagonals[w + b.k]
            acc[lo + min(0, o) : hi + min(0, o)] += (
                da[lo + min(0, u) : hi + min(0, u)]
                * db[lo + u + min(0, w) : hi + u + min(0, w)]
            )
    return BandedMatrix(p, kc, out)


def lstsq(x, y) -> np.ndarray:
    """Solve ``min ||y - x beta||_2`` through a Householder QR factorisation.

    Raises
    ------
    SingularDesignError
        If any pivot of R falls below ``RANK_TOL`` times the largest pivot;
        the error names the first offending column.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2:
        raise ValueError("design must be 2-D")
    if y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise ValueError(f"response length {y.shape} does not match {x.shape[0]} rows")
    if x.shape[1] == 0:
        raise ValueError("design has no columns")
    if x.shape[0] < x.shape[1]:
        raise SingularDesignError(
            f"underdetermined design: {x.shape[0]} rows < {x.shape[1]} columns",
            column=x.shape[0],
        )
    q, r = _qr(x, mode="economic", check_finite=False)
    piv = np.abs(np.diagonal(r))
    largest = piv.max()
    if largest == 0.0:
        raise SingularDesignError("design is identically zero", column=0)
    bad = np.nonzero(piv < RANK_TOL * largest)[0]
    if bad.size:
        c = int(bad[0])
        raise SingularDesignError(
            f"rank-deficient design: pivot {piv[c]:.3e} at column {c} "
            f"below {RANK_TOL:g} x largest pivot {largest:.3e}",
            column=c,
        )
    return _solve_triangular(r, q.T @ y, lower=False, check_finite=False)


def l1_norm(m) -> float:
    """Largest absolute column sum."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0
    return float(np.abs(m).sum(axis=0).max())


def linf_norm(m) -> float:
    """Largest absolute row sum."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0
    return float(np.abs(m).sum(axis=1).max())


def frobenius_norm(m) -> float:
    """Square root of the sum of squared entries."""
    m = np.asarray(m, dtype=float)
    return float(np.sqrt((m * m).sum()))


def spectral_norm(m, tol: float = 1e-10, max_iter: int = 10000, block: int = 4) -> float:
    """Largest singular value, by block power iteration on the Gram matrix.

    A small orthonormal block is iterated so that clustered top singular
    values do not stall the sweep; the leading Rayleigh-Ritz value is accepted
    once its relative change falls below ``tol``. Raises
    :class:`ConvergenceError` after ``max_iter`` sweeps, carrying the last
    estimate and the remaining gap.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("input must be 2-D")
    if not np.all(np.isfinite(m)):
        raise ValueError("entries must be finite")
    if m.size == 0:
        return 0.0
    g = m.T @ m if m.shape[1] <= m.shape[0] else m @ m.T
    nside = g.shape[0]
    b = max(1, min(block, nside))
    # Deterministic ramped start, orthonormalised; never orthogonal to the
    # leading eigenspace for the matrices seen here.
    seed = np.empty((nside, b))
    ramp = 1.0 + np.arange(nside) / (2.0 * nside)
    for c in range(b):
        seed[:, c] = np.roll(ramp, c) + c * np.linspace(0.0, 1.0, nside)
    v, _ = _qr(seed, mode="economic", check_finite=False)
    lam_prev = -np.inf
    lam = 0.0
    for _ in range(max_iter):
        w = g @ v
        small = v.T @ w
        lam = float(np.linalg.eigvalsh(0.5 * (small + small.T)).max())
        if not np.any(w):
            return 0.0
        v, _ = _qr(w, mode="economic", check_finite=False)
        if abs(lam - lam_prev) <= tol * max(abs(lam), np.finfo(float).tiny):
            return float(np.sqrt(max(lam, 0.0)))
        lam_prev = lam
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations",
        last_estimate=float(np.sqrt(max(lam, 0.0))),
        gap=abs(lam - lam_prev),
    )


def spectral_radius(m) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("input must be a square 2-D array")
    if m.size == 0:
        return 0.0
    try:
        eig = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
    return float(np.abs(eig).max())
