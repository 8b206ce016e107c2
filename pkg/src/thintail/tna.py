"""Enclosed-area goodness-of-fit test (TN-A) for severity fits.

Sorted losses x_i receive plotting positions y_i = (i - 0.5)/n.  The
candidate CDF F maps each (x_i, y_i) to (F(x_i), y_i) inside the unit
square, where a perfect fit lies on the diagonal Y = X.  The statistic
is the area enclosed between the diagonal and the polyline through the
mapped points: the polyline is closed with (0, 0) and (1, 1) (matching
F(0) = 0 and F(inf) = 1), each segment is split where it crosses the
diagonal, and the absolute trapezoid areas are summed.  Smaller is
better; zero means every point sits on the diagonal.

Significance levels come from the quadratic A(p) = 2*sqrt(2)*p*(1 - sqrt(2)*p);
a p% two-tailed critical value is A(p/200).  The null hypothesis "the
data follow the candidate distribution" is rejected at p% when the
statistic strictly exceeds the critical value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import SeverityModel

__all__ = [
    "EmpiricalDistribution",
    "TnaResult",
    "DEFAULT_LEVELS",
    "empirical_from_losses",
    "to_probability_space",
    "enclosed_area",
    "significance_area",
    "critical_value",
    "invert_significance",
    "decisions_for_area",
    "tna_test",
]

_SQRT2 = math.sqrt(2.0)
DEFAULT_LEVELS = (1.0, 5.0, 10.0)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted losses with plotting positions y_i = (i - 0.5)/n."""

    x: np.ndarray
    y: np.ndarray

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class TnaResult:
    """Enclosed-area statistic with the standard accept/reject decisions.

    ``reject`` maps the two-tailed level in percent to True when the
    null is rejected there (area strictly above the critical value).
    """

    area: float
    n_points: int
    crossings: int
    reject: dict[float, bool]

    def rejected_at(self, level_percent: float) -> bool:
        return self.reject[level_percent]


def empirical_from_losses(losses) -> EmpiricalDistribution:
    """Sort losses ascending and attach plotting positions."""
    arr = np.asarray(losses, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError(f"need at least 2 losses, got {arr.size}")
    if not np.isfinite(arr).all() or (arr <= 0.0).any():
        raise ValueError("losses must be finite and > 0")
    xs = np.sort(arr)
    n = xs.size
    ys = (np.arange(1, n + 1) - 0.5) / n
    return EmpiricalDistribution(x=xs, y=ys)


def to_probability_space(emp: EmpiricalDistribution, model: SeverityModel) -> np.ndarray:
    """Map each (x_i, y_i) to (F(x_i), y_i); returns an (n, 2) array."""
    X = np.asarray(model.cdf(emp.x), dtype=float)
    return np.column_stack((X, emp.y))


def _area_and_crossings(points: np.ndarray) -> tuple[float, int]:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise ValueError("need at least 1 point of shape (n, 2)")
    if (pts < 0.0).any() or (pts > 1.0).any() or not np.isfinite(pts).all():
        raise ValueError("points must lie inside the unit square")
    if (np.diff(pts[:, 0]) < 0.0).any():
        raise ValueError("X coordinates must be nondecreasing")

    xs = np.concatenate(([0.0], pts[:, 0], [1.0]))
    ys = np.concatenate(([0.0], pts[:, 1], [1.0]))
    d = ys - xs
    w = np.diff(xs)
    d1, d2 = d[:-1], d[1:]

    crossing = d1 * d2 < 0.0
    # straight segments on one side: trapezoid between segment and diagonal
    plain = w * (np.abs(d1) + np.abs(d2)) / 2.0
    # crossing segments: split at the interior diagonal crossing
    t = np.where(crossing, d1 / np.where(crossing, d1 - d2, 1.0), 0.0)
    split = t * w * np.abs(d1) / 2.0 + (1.0 - t) * w * np.abs(d2) / 2.0
    area = float(np.where(crossing, split, plain).sum())
    return area, int(crossing.sum())


def enclosed_area(points) -> float:
    """Area enclosed between the diagonal and the polyline through ``points``.

    The polyline is augmented with the endpoints (0, 0) and (1, 1);
    vertical (zero-width) segments contribute zero.
    """
    return _area_and_crossings(points)[0]


def significance_area(p: float) -> float:
    """A(p) = 2*sqrt(2)*p*(1 - sqrt(2)*p) for 0 < p < 1/sqrt(2)."""
    p = float(p)
    if not (0.0 < p < 1.0 / _SQRT2):
        raise ValueError(f"p must lie in (0, 1/sqrt(2)), got {p!r}")
    return 2.0 * _SQRT2 * p * (1.0 - _SQRT2 * p)


def critical_value(level_percent: float, tails: int = 2) -> float:
    """Critical area for a test at ``level_percent``; two-tailed uses p/2."""
    level = float(level_percent)
    if not (0.0 < level < 100.0):
        raise ValueError(f"level_percent must lie in (0, 100), got {level!r}")
    if tails == 2:
        return significance_area(level / 200.0)
    if tails == 1:
        return significance_area(level / 100.0)
    raise ValueError(f"tails must be 1 or 2, got {tails!r}")


def invert_significance(area: float) -> float:
    """Smaller root p of A(p) = area; the attained significance of a statistic."""
    area = float(area)
    if not (0.0 <= area <= 0.5):
        raise ValueError(f"area must lie in [0, 1/2], got {area!r}")
    return (1.0 - math.sqrt(1.0 - 2.0 * area)) / (2.0 * _SQRT2)


def decisions_for_area(area: float, levels=DEFAULT_LEVELS) -> dict[float, bool]:
    """Two-tailed reject decisions; the null survives area == critical value."""
    return {level: bool(area > critical_value(level, tails=2)) for level in levels}


def tna_test(losses, model: SeverityModel, levels=DEFAULT_LEVELS) -> TnaResult:
    """Run the enclosed-area test of ``losses`` against ``model``.

    Decisions are two-tailed; the null survives a statistic exactly
    equal to the critical value.
    """
    emp = empirical_from_losses(losses)
    points = to_probability_space(emp, model)
    area, crossings = _area_and_crossings(points)
    return TnaResult(
        area=area, n_points=emp.n, crossings=crossings, reject=decisions_for_area(area, levels)
    )
