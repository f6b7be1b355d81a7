"""Null-preserving series transformations.

The tests in this package reduce "do two panels share a loading space?" to a
midpoint structural-break problem: one series is transformed segment by
segment with averaged projection operators (P + I)/2 built from each
subject's estimated loadings. When the loading spaces coincide, both
operators act (asymptotically) as the identity on the signal and the
transformed series has constant loadings; when they differ, the operator
switch at the midpoint plants a loading break there.

Three workflows are covered: two subjects with a common factor count, a
single series with a known break date, and two subjects with different
factor counts (where the first-segment operator becomes (P2 P1 + I)/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidFactorOrder, SegmentTooShort
from .panel import TimeSeriesPanel, _as_readonly
from .pca import estimate_pca, projection


@dataclass(frozen=True)
class SegmentOperators:
    """The d x d operators applied to each segment of the transformed series."""

    first: np.ndarray
    second: np.ndarray
    first_label: str
    second_label: str

    def __post_init__(self):
        object.__setattr__(self, "first", _as_readonly(self.first))
        object.__setattr__(self, "second", _as_readonly(self.second))


@dataclass(frozen=True)
class TransformedSeries:
    """A transformed panel with the split index where the operator changes.

    Attributes
    ----------
    data : ndarray of shape (T, d)
        Transformed observations.
    split_index : int
        Time index m at which the applied operator switches; rows [0, m)
        received the first operator, rows [m, T) the second.
    provenance : SegmentOperators
        The operators that produced each segment.
    r_effective : int
        Factor count to use for inference on the transformed series.
    """

    data: np.ndarray
    split_index: int
    provenance: SegmentOperators
    r_effective: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if not 1 <= self.split_index < data.shape[0]:
            raise ValueError(
                f"split index {self.split_index} outside 1..{data.shape[0] - 1}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("transformed data contains non-finite entries")
        object.__setattr__(self, "data", _as_readonly(data))

    def as_panel(self) -> TimeSeriesPanel:
        """View the transformed series as a panel for downstream estimation."""
        return TimeSeriesPanel(self.data)


def _half_operator(p: np.ndarray) -> np.ndarray:
    return 0.5 * (p + np.eye(p.shape[0]))


def _apply_segments(
    x: np.ndarray, m: int, op_first: np.ndarray, op_second: np.ndarray
) -> np.ndarray:
    # Rows are observations, so applying A to each observation vector is a
    # right-multiplication by A'.
    return np.vstack([x[:m] @ op_first.T, x[m:] @ op_second.T])


def transform_two_subject(
    x1: TimeSeriesPanel, x2: TimeSeriesPanel, r: int
) -> TransformedSeries:
    """Transform the second panel so its loadings break only under differing spans.

    Estimates projectors P1, P2 from r-factor PCA on each panel, then maps
    the second panel through (P1 + I)/2 before its midpoint and (P2 + I)/2
    after. The midpoint is floor(T2 / 2).
    """
    if x1.d != x2.d:
        raise DimensionMismatch(
            f"panels have different cross-sections: d={x1.d} vs d={x2.d}"
        )
    if not 1 <= r < min(x1.d, x1.T, x2.T):
        raise ValueError(
            f"need 1 <= r < min(d, T) for both panels, got r={r}"
        )
    p1 = projection(estimate_pca(x1, r)).matrix
    p2 = projection(estimate_pca(x2, r)).matrix
    op1, op2 = _half_operator(p1), _half_operator(p2)
    m = x2.T // 2
    return TransformedSeries(
        data=_apply_segments(x2.data, m, op1, op2),
        split_index=m,
        provenance=SegmentOperators(
            op1, op2, "(P_subject1 + I)/2", "(P_subject2 + I)/2"
        ),
        r_effective=r,
    )


def transform_changepoint(
    x: TimeSeriesPanel, break_index: int, r: int
) -> TransformedSeries:
    """Transform a single series with a known break date.

    The pre- and post-break segments play the roles of the two subjects.
    The longer segment (ties go to the post segment) is the one transformed,
    always with the pre-segment operator on its first half and the
    post-segment operator on its second half.
    """
    if not 4 <= break_index <= x.T - 4:
        raise ValueError(
            f"break index must lie in [4, T-4] = [4, {x.T - 4}], got {break_index}"
        )
    shortest = min(break_index, x.T - break_index)
    if shortest < 2 * r + 2:
        raise SegmentTooShort(
            f"segment of length {shortest} cannot support r={r} factors "
            f"(needs at least {2 * r + 2})"
        )
    pre = TimeSeriesPanel(x.data[:break_index])
    post = TimeSeriesPanel(x.data[break_index:])
    if not 1 <= r < min(x.d, pre.T, post.T):
        raise ValueError(f"r={r} invalid for segments of panel with d={x.d}")
    p_pre = projection(estimate_pca(pre, r)).matrix
    p_post = projection(estimate_pca(post, r)).matrix
    op1, op2 = _half_operator(p_pre), _half_operator(p_post)
    target = post if post.T >= pre.T else pre
    m = target.T // 2
    return TransformedSeries(
        data=_apply_segments(target.data, m, op1, op2),
        split_index=m,
        provenance=SegmentOperators(
            op1,
            op2,
            "(P_pre_break + I)/2",
            "(P_post_break + I)/2",
        ),
        r_effective=r,
    )


def transform_diff_r(
    x1: TimeSeriesPanel, x2: TimeSeriesPanel, r1: int, r2: int
) -> TransformedSeries:
    """Transform for subjects driven by different factor counts, r2 <= r1.

    Projector invariance fails across unequal factor counts, but the product
    P2 P1 still reduces to P2 when the smaller loading space is contained in
    the larger one. The second panel is therefore mapped through
    (P2 P1 + I)/2 before its midpoint and (P2 + I)/2 after, and inference
    downstream runs with r2 factors.
    """
    if r2 > r1:
        raise InvalidFactorOrder(f"r2={r2} exceeds r1={r1}")
    if x1.d != x2.d:
        raise DimensionMismatch(
            f"panels have different cross-sections: d={x1.d} vs d={x2.d}"
        )
    if not 1 <= r1 < min(x1.d, x1.T):
        raise ValueError(f"r1={r1} invalid for first panel")
    if not 1 <= r2 < min(x2.d, x2.T):
        raise ValueError(f"r2={r2} invalid for second panel")
    p1 = projection(estimate_pca(x1, r1)).matrix
    p2 = projection(estimate_pca(x2, r2)).matrix
    op1 = 0.5 * (p2 @ p1 + np.eye(x1.d))
    op2 = _half_operator(p2)
    m = x2.T // 2
    return TransformedSeries(
        data=_apply_segments(x2.data, m, op1, op2),
        split_index=m,
        provenance=SegmentOperators(
            op1, op2, "(P_subject2 P_subject1 + I)/2", "(P_subject2 + I)/2"
        ),
        r_effective=r2,
    )
