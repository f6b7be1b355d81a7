"""Panel container and small matrix utilities.

Holds the time-series panel type used throughout the package together with
the low-level linear-algebra helpers everything else builds on: column
standardization, half-vectorization and a deterministic truncated symmetric
eigendecomposition.

All functions are pure; panels and eigendecomposition results are immutable
(their arrays are marked read-only), so values can be shared freely across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import AsymmetryExceedsTolerance, ConstantColumn, EigenFailure

# Symmetry is checked against this bound before symmetrizing inputs.
_ASYMMETRY_TOL = 1e-6


def _as_readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TimeSeriesPanel:
    """A T x d observation matrix with time along rows.

    Parameters
    ----------
    data : ndarray of shape (T, d)
        Observations; row t is the cross-section at time t.
    series_names : tuple of str, optional
        Labels for the d columns.
    """

    data: np.ndarray
    series_names: tuple[str, ...] | None = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ValueError(f"panel data must be 2-dimensional, got ndim={data.ndim}")
        T, d = data.shape
        if T < 4:
            raise ValueError(f"panel needs at least 4 time points, got T={T}")
        if d < 2:
            raise ValueError(f"panel needs at least 2 series, got d={d}")
        if not np.all(np.isfinite(data)):
            raise ValueError("panel data contains non-finite entries")
        if self.series_names is not None:
            names = tuple(str(n) for n in self.series_names)
            if len(names) != d:
                raise ValueError(
                    f"got {len(names)} series names for {d} series"
                )
            object.__setattr__(self, "series_names", names)
        object.__setattr__(self, "data", _as_readonly(data))

    @property
    def T(self) -> int:
        """Number of time points."""
        return self.data.shape[0]

    @property
    def d(self) -> int:
        """Number of series."""
        return self.data.shape[1]


def standardize(panel: TimeSeriesPanel) -> TimeSeriesPanel:
    """Center each column to mean zero and scale to unit standard deviation.

    The standard deviation uses the T-1 denominator. Raises
    :class:`ConstantColumn` for any column whose standard deviation is zero.
    """
    x = panel.data
    mean = x.mean(axis=0)
    sd = x.std(axis=0, ddof=1)
    zero = np.flatnonzero(sd == 0.0)
    if zero.size:
        raise ConstantColumn(int(zero[0]))
    return TimeSeriesPanel((x - mean) / sd, series_names=panel.series_names)


def vech(m: np.ndarray) -> np.ndarray:
    """Half-vectorize a symmetric matrix.

    Stacks the columns of the lower triangle (diagonal included) into a
    vector of length r(r+1)/2, i.e. column-major over entries (i, j) with
    i >= j. The input is symmetrized as (M + M')/2 first; deviations from
    symmetry beyond 1e-6 raise :class:`AsymmetryExceedsTolerance`.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"vech needs a square matrix, got shape {m.shape}")
    gap = np.max(np.abs(m - m.T)) if m.size else 0.0
    if gap > _ASYMMETRY_TOL:
        raise AsymmetryExceedsTolerance(
            f"max|M - M'| = {gap:.3e} exceeds {_ASYMMETRY_TOL:.0e}"
        )
    sym = 0.5 * (m + m.T)
    rows, cols = _vech_indices(m.shape[0])
    return sym[rows, cols]


def unvech(v: np.ndarray) -> np.ndarray:
    """Rebuild the symmetric matrix whose vech is ``v`` (inverse of vech)."""
    v = np.asarray(v, dtype=float)
    p = v.shape[0]
    n = int(round((np.sqrt(8 * p + 1) - 1) / 2))
    if n * (n + 1) // 2 != p:
        raise ValueError(f"length {p} is not a triangular number")
    out = np.zeros((n, n))
    rows, cols = _vech_indices(n)
    out[rows, cols] = v
    out[cols, rows] = v
    return out


def _vech_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    # triu_indices enumerates (j, i) with j <= i in row-major order, which is
    # exactly the column-major walk of the lower triangle after swapping.
    cols, rows = np.triu_indices(n)
    return rows, cols


@dataclass(frozen=True)
class SymmetricEigenResult:
    """Top eigenpairs of a symmetric matrix.

    ``eigenvalues`` is sorted in descending order and ``eigenvectors`` holds
    the matching orthonormal columns. Each eigenvector is sign-fixed so that
    its entry of largest absolute value is positive (ties broken by lowest
    index), making repeated decompositions of the same input identical.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _as_readonly(self.eigenvalues))
        object.__setattr__(self, "eigenvectors", _as_readonly(self.eigenvectors))


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so the largest-magnitude entry is positive."""
    out = np.array(vectors, copy=True)
    # argmax returns the first maximizer, which implements the lowest-index
    # tie break.
    lead = np.argmax(np.abs(out), axis=0)
    flip = out[lead, np.arange(out.shape[1])] < 0
    out[:, flip] *= -1.0
    return out


def sym_eig_top(m: np.ndarray, k: int) -> SymmetricEigenResult:
    """Top-k eigenpairs of the symmetrized matrix (M + M')/2.

    Parameters
    ----------
    m : ndarray of shape (n, n)
        Matrix to decompose; symmetrized before factorization to absorb
        floating-point asymmetry.
    k : int
        Number of leading eigenpairs, 1 <= k <= n.

    Returns
    -------
    SymmetricEigenResult
        Eigenvalues descending, sign-fixed orthonormal eigenvectors.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if not np.all(np.isfinite(m)):
        raise EigenFailure("matrix contains non-finite entries")
    sym = 0.5 * (m + m.T)
    values = vectors = None
    if k < n:
        # Partial solver is much cheaper for the top few eigenpairs of a
        # large Gram matrix; fall back to the full decomposition if it fails.
        try:
            values, vectors = scipy.linalg.eigh(
                sym, subset_by_index=[n - k, n - 1], driver="evr"
            )
        except (scipy.linalg.LinAlgError, ValueError):
            values = vectors = None
    if values is None:
        try:
            values, vectors = np.linalg.eigh(sym)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - rare in LAPACK
            raise EigenFailure(str(exc)) from exc
        values, vectors = values[n - k :], vectors[:, n - k :]
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(vectors))):
        raise EigenFailure("eigendecomposition returned non-finite output")
    # Solvers sort ascending; flip to descending.
    return SymmetricEigenResult(values[::-1], _fix_signs(vectors[:, ::-1]))
