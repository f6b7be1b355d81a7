"""Data-generating processes and the Monte Carlo harness.

Families named NDGP* satisfy the shared-loading-space null hypothesis,
ADGP* families violate it, the *cp* variants plant the comparison inside a
single series with a break at floor(pi * T), the *dnf* variants drive the
two regimes with different factor counts (4 pre, 3 post by default), and
EIGEXT probes rotations with extreme fixed eigenvalues. Rejection-rate runs
over any family are exposed through :func:`monte_carlo`, with the plain
midpoint Wald, the sup-Wald scan, or the untransformed baseline test as the
pipeline. Supremum-scan experiments are selected via the ``sup_wald``
pipeline rather than a separate family name.

Replications draw from independent substreams spawned from one seed, so a
run is reproducible bit for bit for a fixed (spec, seed, n_reps) regardless
of worker count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import ExcessiveFailures, InvalidDgpSpec, SpantestError, UnknownFamily
from .panel import TimeSeriesPanel, standardize
from .pca import estimate_pca
from .transform import (
    transform_changepoint,
    transform_diff_r,
    transform_two_subject,
)
from .wald import baseline_changepoint_wald, sup_wald, sup_wald_critical_value, wald

WORKERS_ENV_VAR = "SPANTEST_WORKERS"

PIPELINES = ("wald", "sup_wald", "baseline")

_GRID_B = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 2.0)
_GRID_A = (0.2, 0.4, 0.6, 0.8)
_GRID_C = (1, 2, 3)
_GRID_PI = (0.2, 0.3, 0.4, 0.5)

_PHI_DEFAULTS = {"phi_lo": 0.75, "phi_hi": 1.25}

# family -> (kind, default factor count(s), required params, optional params)
_FAMILY_INFO: dict[str, tuple[str, object, tuple[str, ...], dict]] = {
    "NDGP1": ("two_subject", 3, (), dict(_PHI_DEFAULTS)),
    "NDGP2": ("two_subject", 3, (), dict(_PHI_DEFAULTS)),
    "NDGP3": ("two_subject", 3, (), dict(_PHI_DEFAULTS)),
    "NDGP4": ("two_subject", 3, (), dict(_PHI_DEFAULTS)),
    "ADGP1": ("two_subject", 3, ("b",), {}),
    "ADGP2": ("two_subject", 3, ("a",), {"b": 1.0}),
    "ADGP3": ("two_subject", 4, ("c",), {}),
    "ADGP4": ("two_subject", 4, ("c",), {}),
    "NDGPcp1": ("changepoint", 3, (), {"pi": 0.5, **_PHI_DEFAULTS}),
    "NDGPcp2": ("changepoint", 3, (), {"pi": 0.5, **_PHI_DEFAULTS}),
    "ADGPcp1": ("changepoint", 3, (), {"pi": 0.5, "b": 1.0}),
    "ADGPcp2": ("changepoint", 3, (), {"pi": 0.5, "b": 1.0, "a": 0.4}),
    "ADGPcp3": ("changepoint", 4, (), {"pi": 0.5, "c": 1}),
    "NDGPdnf1": ("two_subject_dnf", (4, 3), (), dict(_PHI_DEFAULTS)),
    "NDGPdnf2": ("two_subject_dnf", (4, 3), (), dict(_PHI_DEFAULTS)),
    "NDGPdnf3": ("changepoint_dnf", (4, 3), (), {"pi": 0.5, **_PHI_DEFAULTS}),
    "NDGPdnf4": ("changepoint_dnf", (4, 3), (), {"pi": 0.5, **_PHI_DEFAULTS}),
    "EIGEXT": ("two_subject", 3, ("e", "f"), {}),
}

FAMILIES = tuple(_FAMILY_INFO)


def _in_grid(value: float, grid: tuple, tol: float = 1e-9) -> bool:
    return any(abs(float(value) - float(g)) <= tol for g in grid)


@dataclass(frozen=True)
class DgpSpec:
    """A simulation scenario: family name, dimensions and parameters.

    ``params`` accepts the family-specific scalars (break magnitude ``b``,
    affected fraction ``a``, shared-column count ``c``, break fraction
    ``pi``, eigenvalue extremes ``e``/``f``, and ``phi_lo``/``phi_hi``
    overriding the default (0.75, 1.25) spectrum of the random rotations).
    Values must come from the supported grids: b in {0, 1/3, 2/3, 1, 2},
    a in {0.2, 0.4, 0.6, 0.8}, c in {1, 2, 3}, pi in {0.2, 0.3, 0.4, 0.5}.
    Factor counts default per family (3, or 4 for the ADGP3/4 style
    families; 4 pre and 3 post in the dnf families) and can be overridden
    via ``r`` or ``r1``/``r2``.
    """

    family: str
    d: int
    T: int
    r: int | None = None
    r1: int | None = None
    r2: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in _FAMILY_INFO:
            raise UnknownFamily(
                f"unknown DGP family {self.family!r}; known families: "
                f"{', '.join(FAMILIES)} (sup-Wald experiments use "
                f"pipeline='sup_wald' on a base family)"
            )
        if self.d < 2 or self.T < 8:
            raise InvalidDgpSpec(f"need d >= 2 and T >= 8, got d={self.d}, T={self.T}")
        kind, default_r, required, optional = _FAMILY_INFO[self.family]

        allowed = set(required) | set(optional)
        unknown = set(self.params) - allowed
        if unknown:
            raise InvalidDgpSpec(
                f"{self.family} does not accept params {sorted(unknown)}; "
                f"allowed: {sorted(allowed)}"
            )
        missing = [k for k in required if k not in self.params]
        if missing:
            raise InvalidDgpSpec(f"{self.family} requires params {missing}")
        merged = {**optional, **self.params}

        if "b" in merged and not _in_grid(merged["b"], _GRID_B):
            raise InvalidDgpSpec(f"b={merged['b']} not in grid {_GRID_B}")
        if "a" in merged and not _in_grid(merged["a"], _GRID_A):
            raise InvalidDgpSpec(f"a={merged['a']} not in grid {_GRID_A}")
        if "c" in merged and not _in_grid(merged["c"], _GRID_C):
            raise InvalidDgpSpec(f"c={merged['c']} not in grid {_GRID_C}")
        if "pi" in merged and not _in_grid(merged["pi"], _GRID_PI):
            raise InvalidDgpSpec(f"pi={merged['pi']} not in grid {_GRID_PI}")
        if "e" in merged:
            e, f = merged["e"], merged["f"]
            if not (0.0 < e <= f):
                raise InvalidDgpSpec(f"need 0 < e <= f, got e={e}, f={f}")
        if "phi_lo" in merged:
            lo, hi = merged["phi_lo"], merged["phi_hi"]
            if not (0.0 < lo <= hi):
                raise InvalidDgpSpec(f"need 0 < phi_lo <= phi_hi, got ({lo}, {hi})")

        if kind.endswith("dnf"):
            r1 = self.r1 if self.r1 is not None else default_r[0]
            r2 = self.r2 if self.r2 is not None else default_r[1]
            if r2 > r1:
                raise InvalidDgpSpec(f"need r2 <= r1, got r1={r1}, r2={r2}")
            object.__setattr__(self, "r1", int(r1))
            object.__setattr__(self, "r2", int(r2))
        else:
            r = self.r if self.r is not None else default_r
            if r < 1:
                raise InvalidDgpSpec(f"need r >= 1, got r={r}")
            object.__setattr__(self, "r", int(r))
        object.__setattr__(self, "params", merged)

    @property
    def kind(self) -> str:
        """Workflow kind: two_subject, two_subject_dnf, changepoint, changepoint_dnf."""
        return _FAMILY_INFO[self.family][0]

    @property
    def r_effective(self) -> int:
        """Factor count used for inference on the transformed series."""
        return self.r2 if self.kind.endswith("dnf") else self.r

    def label(self) -> str:
        extras = ", ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.family}(d={self.d}, T={self.T}{', ' + extras if extras else ''})"


@dataclass(frozen=True)
class MonteCarloResult:
    """Aggregated rejection rate for one scenario and pipeline."""

    spec: DgpSpec
    n_reps: int
    level: float
    rejection_rate: float
    mean_statistic: float
    seed: int
    elapsed: float
    pipeline: str
    n_failures: int


def _haar_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix via sign-corrected QR."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def _orthonormal_columns(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def _spectrum_spanning(lo: float, hi: float, n: int, rng: np.random.Generator):
    """n values spanning [lo, hi]: extremes pinned at the ends, rest uniform.

    Pinning the extreme values at the interval endpoints (instead of drawing
    all of them uniformly) keeps the spectrum spread of every draw identical,
    which is what the rejection-rate tables this module reproduces assume:
    the reported extreme eigenvalues of the rotated loading Grams sit exactly
    at sqrt(d) times the interval ends.
    """
    if n == 1:
        return rng.uniform(lo, hi, 1)
    return np.concatenate(([lo], rng.uniform(lo, hi, n - 2), [hi]))


def random_nonsingular_phi(
    shape: int | tuple[int, int],
    lo: float,
    hi: float,
    mode: str,
    rng: np.random.Generator,
) -> np.ndarray:
    """Random transformation matrix with spectrum spanning [lo, hi].

    ``mode='eigenvalues'`` builds a symmetric square matrix U diag(lam) U'
    with Haar-orthogonal U; the smallest and largest eigenvalues sit at lo
    and hi and the rest are uniform on (lo, hi). When lo == hi the result
    collapses exactly to lo times the identity. ``mode='singular_values'``
    allows rectangular shapes and builds U diag(s) V' with the singular
    values spanning the interval the same way.
    """
    if not 0.0 < lo <= hi:
        raise ValueError(f"need 0 < lo <= hi, got lo={lo}, hi={hi}")
    if mode == "eigenvalues":
        if not isinstance(shape, int):
            raise ValueError("eigenvalue mode requires a square (integer) shape")
        n = shape
        lam = _spectrum_spanning(lo, hi, n, rng)
        if np.ptp(lam) == 0.0:
            return lam[0] * np.eye(n)
        u = _haar_orthogonal(n, rng)
        return (u * lam) @ u.T
    if mode == "singular_values":
        rows, cols = (shape, shape) if isinstance(shape, int) else shape
        if cols > rows:
            raise ValueError(f"need cols <= rows, got shape {(rows, cols)}")
        s = _spectrum_spanning(lo, hi, cols, rng)
        u = _orthonormal_columns(rows, cols, rng)
        v = _haar_orthogonal(cols, rng)
        return (u * s) @ v.T
    raise ValueError(f"unknown mode {mode!r}")


def _phi_fixed_extremes(
    r: int, e: float, f: float, rng: np.random.Generator
) -> np.ndarray:
    """Symmetric random matrix with smallest eigenvalue e and largest f."""
    if r == 1:
        return np.array([[e]])
    lam = np.concatenate(([e], rng.uniform(e, f, r - 2), [f]))
    u = _haar_orthogonal(r, rng)
    return (u * lam) @ u.T


def _ar1_matrix(
    t_len: int, n: int, coef: float, innovation_sd: float, rng: np.random.Generator
) -> np.ndarray:
    """(t_len, n) matrix of independent stationary AR(1) paths."""
    if not abs(coef) < 1:
        raise ValueError(f"|coef| must be < 1, got {coef}")
    out = np.empty((t_len, n))
    out[0] = rng.normal(0.0, innovation_sd / math.sqrt(1.0 - coef**2), n)
    if t_len > 1:
        innovations = rng.normal(0.0, innovation_sd, (t_len - 1, n))
        filtered, _ = lfilter(
            [1.0], [1.0, -coef], innovations, axis=0, zi=(coef * out[0])[None, :]
        )
        out[1:] = filtered
    return out


def ar1_path(
    t_len: int, coef: float, innovation_sd: float, rng: np.random.Generator
) -> np.ndarray:
    """Stationary AR(1) path started from its stationary distribution."""
    return _ar1_matrix(t_len, 1, coef, innovation_sd, rng)[:, 0]


# AR(1) coefficient and innovation standard deviation shared by the serially
# correlated factor and error recipes. The innovation variance 1 - 0.7^2 is
# deliberately paired with coefficient 0.5.
_AR_COEF = 0.5
_FACTOR_INNOV_SD = math.sqrt(1.0 - 0.7**2)


def _hetero_ar_errors(t_len: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Cross-sectionally heteroskedastic AR(1) errors sigma_i * v_{i,t}."""
    sigma = rng.uniform(0.5, 1.5, d)
    v = _ar1_matrix(t_len, d, _AR_COEF, 1.0, rng)
    return v * sigma


def _panel(f: np.ndarray, loadings: np.ndarray, eps: np.ndarray) -> TimeSeriesPanel:
    return TimeSeriesPanel(f @ loadings.T + eps)


def _spliced_panel(
    f_pre: np.ndarray,
    l_pre: np.ndarray,
    f_post: np.ndarray,
    l_post: np.ndarray,
    eps: np.ndarray,
) -> TimeSeriesPanel:
    signal = np.vstack([f_pre @ l_pre.T, f_post @ l_post.T])
    return TimeSeriesPanel(signal + eps)


def generate(spec: DgpSpec, rng: np.random.Generator):
    """Draw one dataset for ``spec``.

    Returns a pair of panels for the two-subject families and a single panel
    (with the break at floor(pi * T) baked in) for the change-point
    families. Draw order is fixed (loadings, transformations, factors, then
    errors) so results are reproducible for a given generator state.
    """
    fam, d, T = spec.family, spec.d, spec.T
    p = spec.params
    lo, hi = p.get("phi_lo", 0.75), p.get("phi_hi", 1.25)

    if fam in ("NDGP1", "NDGP2", "NDGP3", "NDGP4"):
        r = spec.r
        lam = rng.standard_normal((d, r))
        if fam == "NDGP1":
            l1 = lam  # Phi_1 = I
        else:
            l1 = lam @ random_nonsingular_phi(r, lo, hi, "eigenvalues", rng)
        l2 = lam @ random_nonsingular_phi(r, lo, hi, "eigenvalues", rng)
        if fam == "NDGP3":
            f1 = _ar1_matrix(T, r, _AR_COEF, _FACTOR_INNOV_SD, rng)
            f2 = _ar1_matrix(T, r, _AR_COEF, _FACTOR_INNOV_SD, rng)
        else:
            f1 = rng.standard_normal((T, r))
            f2 = rng.standard_normal((T, r))
        if fam == "NDGP2":
            e1 = _hetero_ar_errors(T, d, rng)
            e2 = _hetero_ar_errors(T, d, rng)
        elif fam == "NDGP4":
            e1 = rng.standard_normal((T, d))
            e2 = _hetero_ar_errors(T, d, rng)
        else:
            e1 = rng.standard_normal((T, d))
            e2 = rng.standard_normal((T, d))
        return _panel(f1, l1, e1), _panel(f2, l2, e2)

    if fam in ("ADGP1", "ADGP2"):
        r, b = spec.r, p["b"]
        lam = b / 2.0 + rng.standard_normal((d, r))
        l2 = lam.copy()
        if fam == "ADGP1":
            l2 -= b
        else:
            l2[: int(p["a"] * d)] -= b
        sd = math.sqrt(1.0 + b**2 / 4.0)
        f1 = rng.standard_normal((T, r))
        f2 = rng.standard_normal((T, r))
        e1 = rng.normal(0.0, sd, (T, d))
        e2 = rng.normal(0.0, sd, (T, d))
        return _panel(f1, lam, e1), _panel(f2, l2, e2)

    if fam in ("ADGP3", "ADGP4"):
        r, c = spec.r, int(p["c"])
        lam = rng.standard_normal((d, r))
        phi = rng.standard_normal((r, c))
        if fam == "ADGP3":
            pi2 = math.sqrt(2.0) * rng.standard_normal((d, r - c))
        else:
            pi2 = rng.standard_cauchy((d, r - c))
        l2 = np.hstack([pi2, lam @ phi])
        f1 = rng.standard_normal((T, r))
        f2 = rng.standard_normal((T, r))
        e1 = rng.standard_normal((T, d))
        e2 = rng.standard_normal((T, d))
        return _panel(f1, lam, e1), _panel(f2, l2, e2)

    if fam == "EIGEXT":
        r = spec.r
        lam = rng.standard_normal((d, r))
        phi = _phi_fixed_extremes(r, p["e"], p["f"], rng)
        f1 = rng.standard_normal((T, r))
        f2 = rng.standard_normal((T, r))
        e1 = rng.standard_normal((T, d))
        e2 = rng.standard_normal((T, d))
        return _panel(f1, lam, e1), _panel(f2, lam @ phi, e2)

    if fam in ("NDGPdnf1", "NDGPdnf2"):
        r1, r2 = spec.r1, spec.r2
        lam = rng.standard_normal((d, r1))
        phi2 = random_nonsingular_phi((r1, r2), lo, hi, "singular_values", rng)
        if fam == "NDGPdnf2":
            f1 = _ar1_matrix(T, r1, _AR_COEF, _FACTOR_INNOV_SD, rng)
        else:
            f1 = rng.standard_normal((T, r1))
        f2 = rng.standard_normal((T, r2))
        e1 = rng.standard_normal((T, d))
        e2 = rng.standard_normal((T, d))
        return _panel(f1, lam, e1), _panel(f2, lam @ phi2, e2)

    break_index = int(p["pi"] * T)

    if fam in ("NDGPcp1", "NDGPcp2"):
        r = spec.r
        lam = rng.standard_normal((d, r))
        if fam == "NDGPcp1":
            l1 = lam  # Phi_1 = I
        else:
            l1 = lam @ random_nonsingular_phi(r, lo, hi, "eigenvalues", rng)
        l2 = lam @ random_nonsingular_phi(r, lo, hi, "eigenvalues", rng)
        f = rng.standard_normal((T, r))
        if fam == "NDGPcp2":
            eps = _hetero_ar_errors(T, d, rng)
        else:
            eps = rng.standard_normal((T, d))
        return _spliced_panel(f[:break_index], l1, f[break_index:], l2, eps)

    if fam in ("ADGPcp1", "ADGPcp2"):
        r, b = spec.r, p["b"]
        lam = b / 2.0 + rng.standard_normal((d, r))
        l2 = lam.copy()
        if fam == "ADGPcp1":
            l2 -= b
        else:
            l2[: int(p["a"] * d)] -= b
        f = rng.standard_normal((T, r))
        eps = rng.normal(0.0, math.sqrt(1.0 + b**2 / 4.0), (T, d))
        return _spliced_panel(f[:break_index], lam, f[break_index:], l2, eps)

    if fam == "ADGPcp3":
        r, c = spec.r, int(p["c"])
        lam = rng.standard_normal((d, r))
        phi = rng.standard_normal((r, c))
        pi2 = rng.standard_cauchy((d, r - c))
        l2 = np.hstack([pi2, lam @ phi])
        f = rng.standard_normal((T, r))
        eps = rng.standard_normal((T, d))
        return _spliced_panel(f[:break_index], lam, f[break_index:], l2, eps)

    if fam in ("NDGPdnf3", "NDGPdnf4"):
        r1, r2 = spec.r1, spec.r2
        lam = rng.standard_normal((d, r1))
        l1 = lam @ random_nonsingular_phi((r1, r1), lo, hi, "singular_values", rng)
        l2 = lam @ random_nonsingular_phi((r1, r2), lo, hi, "singular_values", rng)
        if fam == "NDGPdnf3":
            f = _ar1_matrix(T, r1, _AR_COEF, _FACTOR_INNOV_SD, rng)
        else:
            f = rng.standard_normal((T, r1))
        eps = rng.standard_normal((T, d))
        # Post-break regime loads only the first r2 components of the same
        # factor process.
        return _spliced_panel(
            f[:break_index], l1, f[break_index:, :r2], l2, eps
        )

    raise UnknownFamily(f"unknown DGP family {fam!r}")  # pragma: no cover


def _simulate_once(
    spec: DgpSpec,
    pipeline: str,
    level: float,
    pi0: float,
    b_t: int | None,
    critical_value: float | None,
    rng: np.random.Generator,
) -> tuple[bool, float]:
    """One replication: draw, standardize, transform, test."""
    kind = spec.kind

    if pipeline == "baseline":
        x = standardize(generate(spec, rng))
        report = baseline_changepoint_wald(x, spec.r, b_t=b_t, level=level)
        return report.decision, report.statistic

    if kind == "two_subject":
        x1, x2 = generate(spec, rng)
        y = transform_two_subject(standardize(x1), standardize(x2), spec.r)
    elif kind == "two_subject_dnf":
        x1, x2 = generate(spec, rng)
        y = transform_diff_r(standardize(x1), standardize(x2), spec.r1, spec.r2)
    elif kind == "changepoint":
        x = standardize(generate(spec, rng))
        y = transform_changepoint(x, int(spec.params["pi"] * spec.T), spec.r)
    else:  # changepoint_dnf
        x = standardize(generate(spec, rng))
        split = int(spec.params["pi"] * spec.T)
        pre = TimeSeriesPanel(x.data[:split])
        post = TimeSeriesPanel(x.data[split:])
        y = transform_diff_r(pre, post, spec.r1, spec.r2)

    est = estimate_pca(y.as_panel(), y.r_effective)
    if pipeline == "wald":
        report = wald(est.factors, b_t=b_t, level=level)
        return report.decision, report.statistic
    report = sup_wald(
        est.factors, pi0, b_t=b_t, level=level, critical_value=critical_value
    )
    return report.reject, report.sup_statistic


def _single_threaded_blas():
    """Context manager capping BLAS at one thread, restored on exit.

    The per-replication matrices are small enough that BLAS threading only
    adds synchronization churn; replication-level parallelism is what pays.
    """
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(1)
    except Exception:  # pragma: no cover - optional dependency
        from contextlib import nullcontext

        return nullcontext()


def _limit_worker_blas():
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(1)
    except Exception:  # pragma: no cover - optional dependency
        pass


def _replication_worker(args) -> tuple[bool, float, str | None]:
    spec, pipeline, level, pi0, b_t, critical_value, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    try:
        reject, stat = _simulate_once(
            spec, pipeline, level, pi0, b_t, critical_value, rng
        )
        return bool(reject), float(stat), None
    except SpantestError as exc:
        return False, math.nan, f"{type(exc).__name__}: {exc}"


def resolve_workers(workers: int | None) -> int:
    """Worker count from the argument, the environment, or the CPU count."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def monte_carlo(
    spec: DgpSpec,
    n_reps: int,
    level: float = 0.05,
    pipeline: str = "wald",
    seed: int = 0,
    *,
    pi0: float = 0.45,
    b_t: int | None = None,
    workers: int | None = None,
    crit_n_paths: int = 50_000,
) -> MonteCarloResult:
    """Monte Carlo rejection rate of a pipeline over one scenario.

    Each replication draws fresh data from an independent substream of
    ``seed``, standardizes, applies the family's transformation workflow,
    estimates the factors of the transformed series and records the
    rejection of the chosen test at ``level``. Failed replications (for
    example a singular long-run variance) are tallied separately and the
    run aborts if they exceed 1% of ``n_reps``.
    """
    if n_reps < 1:
        raise ValueError(f"n_reps must be at least 1, got {n_reps}")
    if pipeline not in PIPELINES:
        raise ValueError(f"pipeline must be one of {PIPELINES}, got {pipeline!r}")
    if pipeline == "baseline" and spec.kind != "changepoint":
        raise InvalidDgpSpec(
            "the baseline pipeline applies only to change-point families"
        )

    critical_value = None
    if pipeline == "sup_wald":
        p = spec.r_effective * (spec.r_effective + 1) // 2
        # Computed once here so worker processes never re-simulate it.
        critical_value = sup_wald_critical_value(
            p, pi0, level, n_paths=crit_n_paths
        )

    children = np.random.SeedSequence(seed).spawn(n_reps)
    args = [
        (spec, pipeline, level, pi0, b_t, critical_value, child)
        for child in children
    ]

    start = time.perf_counter()
    n_workers = resolve_workers(workers)
    if n_workers <= 1 or n_reps == 1:
        with _single_threaded_blas():
            results = [_replication_worker(a) for a in args]
    else:
        chunksize = max(1, n_reps // (n_workers * 8))
        with ProcessPoolExecutor(
            max_workers=n_workers, initializer=_limit_worker_blas
        ) as pool:
            results = list(pool.map(_replication_worker, args, chunksize=chunksize))
    elapsed = time.perf_counter() - start

    failures = [msg for _, _, msg in results if msg is not None]
    if len(failures) > 0.01 * n_reps:
        raise ExcessiveFailures(
            f"{len(failures)} of {n_reps} replications failed; first: {failures[0]}"
        )
    n_reject = sum(1 for reject, _, msg in results if msg is None and reject)
    stats = [s for _, s, msg in results if msg is None]
    return MonteCarloResult(
        spec=spec,
        n_reps=n_reps,
        level=level,
        rejection_rate=n_reject / n_reps,
        mean_statistic=float(np.mean(stats)) if stats else math.nan,
        seed=seed,
        elapsed=elapsed,
        pipeline=pipeline,
        n_failures=len(failures),
    )
