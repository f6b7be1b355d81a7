"""Principal-component estimation of factor models.

Estimates latent factors and loadings for one panel by PCA, builds the
orthogonal projector onto the estimated loading space, and selects the
number of factors by an information criterion in the style of Bai and
Ng (2002).

The factor normalization is the usual one: with F the T x r factor matrix
and L the d x r loading matrix, F'F / T = I_r and L' = F'X / T. The
eigendecomposition runs on whichever Gram matrix (T x T or d x d) is
smaller; the two routes are algebraically equivalent and are converted into
one another through the shared singular values of X.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigenFailure, RankDeficient
from .panel import TimeSeriesPanel, _as_readonly, sym_eig_top

# An eigenvalue below this fraction of the Gram trace is treated as rank
# collapse rather than roundoff.
_RANK_EIGEN_TOL = 1e-12
# Relative singular-value floor for loading matrices entering a projector.
_RANK_SV_TOL = 1e-10


@dataclass(frozen=True)
class FactorEstimate:
    """PCA estimate of a factor model for one panel.

    Attributes
    ----------
    factors : ndarray of shape (T, r)
        Estimated factors, normalized so factors'factors / T = I_r.
    loadings : ndarray of shape (d, r)
        Estimated loadings, loadings' = factors' X / T.
    eigenvalues : ndarray of shape (r,)
        Top r eigenvalues of X X' / (T d).
    r : int
        Number of estimated factors.
    """

    factors: np.ndarray
    loadings: np.ndarray
    eigenvalues: np.ndarray
    r: int

    def __post_init__(self):
        object.__setattr__(self, "factors", _as_readonly(self.factors))
        object.__setattr__(self, "loadings", _as_readonly(self.loadings))
        object.__setattr__(self, "eigenvalues", _as_readonly(self.eigenvalues))


@dataclass(frozen=True)
class ProjectionOperator:
    """Orthogonal projector onto the column space of estimated loadings.

    The matrix is d x d, symmetric, idempotent with trace equal to its rank,
    and has unit spectral norm. It is invariant under right-multiplication
    of the loadings by any nonsingular matrix, which is what makes it the
    right object for comparing loading spaces.
    """

    matrix: np.ndarray
    rank: int

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_readonly(self.matrix))


def estimate_pca(panel: TimeSeriesPanel, r: int) -> FactorEstimate:
    """Estimate ``r`` factors and loadings from a panel by PCA.

    Parameters
    ----------
    panel : TimeSeriesPanel
        Input data, T x d.
    r : int
        Number of factors, 1 <= r < min(d, T).

    Raises
    ------
    RankDeficient
        If the r-th eigenvalue of the Gram matrix falls below 1e-12 times
        its trace.
    """
    x = panel.data
    T, d = x.shape
    if not 1 <= r < min(d, T):
        raise ValueError(f"need 1 <= r < min(d, T) = {min(d, T)}, got r={r}")

    if T <= d:
        gram = x @ x.T
        eig = sym_eig_top(gram, r)
        mu = eig.eigenvalues
        _check_rank(mu, np.trace(gram), r)
        factors = np.sqrt(T) * eig.eigenvectors
        loadings = x.T @ factors / T
    else:
        gram = x.T @ x
        eig = sym_eig_top(gram, r)
        mu = eig.eigenvalues
        _check_rank(mu, np.trace(gram), r)
        loadings = eig.eigenvectors * np.sqrt(mu / T)
        factors = x @ eig.eigenvectors * (np.sqrt(T) / np.sqrt(mu))

    return FactorEstimate(
        factors=factors, loadings=loadings, eigenvalues=mu / (T * d), r=r
    )


def _check_rank(mu: np.ndarray, trace: float, r: int) -> None:
    if mu[r - 1] <= _RANK_EIGEN_TOL * max(trace, 0.0):
        raise RankDeficient(
            f"eigenvalue {r} of the Gram matrix is {mu[r - 1]:.3e}, "
            f"below {_RANK_EIGEN_TOL:.0e} of its trace {trace:.3e}"
        )


def projection(est: FactorEstimate) -> ProjectionOperator:
    """Build the projector onto the column space of the estimated loadings.

    Computed as Q Q' with Q an orthonormal basis of the loading columns,
    which is numerically stabler than the normal-equations formula
    L (L'L)^{-1} L' and exactly equal to it in exact arithmetic.
    """
    return ProjectionOperator(
        matrix=projection_from_loadings(est.loadings), rank=est.r
    )


def projection_from_loadings(loadings: np.ndarray) -> np.ndarray:
    """Projector onto the column space of an explicit loading matrix."""
    loadings = np.asarray(loadings, dtype=float)
    if loadings.ndim != 2:
        raise ValueError("loadings must be a 2-d matrix")
    try:
        u, s, _ = np.linalg.svd(loadings, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigenFailure(str(exc)) from exc
    r = loadings.shape[1]
    if s[r - 1] <= _RANK_SV_TOL * s[0]:
        raise RankDeficient(
            f"loading matrix is rank deficient: singular value {r} is "
            f"{s[r - 1]:.3e} against leading {s[0]:.3e}"
        )
    p = u @ u.T
    return 0.5 * (p + p.T)


def estimate_num_factors(panel: TimeSeriesPanel, r_max: int) -> int:
    """Select the number of factors by an information criterion.

    Minimizes log(SSR(r) / (dT)) plus r times the penalty
    ((d+T)/(dT)) * log(min(d,T)^2 * dT / (d+T)) over r in {0, ..., r_max},
    where SSR(r) is the residual sum of squares after removing r principal
    components and SSR(0) is the total sum of squares. Returning 0 means no
    factor structure is detected.
    """
    x = panel.data
    T, d = x.shape
    if not 1 <= r_max < min(d, T):
        raise ValueError(
            f"need 1 <= r_max < min(d, T) = {min(d, T)}, got r_max={r_max}"
        )
    gram = x @ x.T if T <= d else x.T @ x
    mu = np.linalg.eigvalsh(0.5 * (gram + gram.T))[::-1]
    total = float(np.sum(mu))
    # SSR(r) equals the sum of the trailing Gram eigenvalues.
    ssr = total - np.concatenate(([0.0], np.cumsum(mu[:r_max])))
    nt = d * T
    penalty = ((d + T) / nt) * np.log(min(d, T) ** 2 * nt / (d + T))
    with np.errstate(divide="ignore"):
        ic = np.log(np.maximum(ssr, 0.0) / nt) + penalty * np.arange(r_max + 1)
    return int(np.argmin(ic))
