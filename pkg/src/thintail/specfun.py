"""Gamma-family special functions used by the severity distributions.

The upper incomplete gamma function is evaluated with the classical
split: a power series for the regularized lower function when
``x < a + 1`` and a modified Lentz continued fraction for the
regularized upper function when ``x >= a + 1``.  Both branches share
the scaling prefactor ``exp(a*ln(x) - x - lnGamma(a))`` so nothing
overflows for small ``a``.

All functions accept scalars or numpy arrays for ``x`` (the shape
argument ``a`` is scalar) and are pure: no shared mutable state, safe
to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Accuracy",
    "DEFAULT_ACCURACY",
    "log_gamma",
    "upper_inc_gamma",
    "regularized_upper_gamma",
]

_TINY = 1e-300  # values of Q below this are flushed to exactly 0.0


@dataclass(frozen=True)
class Accuracy:
    """Termination control for the iterative gamma evaluations."""

    rel_tol: float = 1e-15
    max_iter: int = 500

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1e-6):
            raise ValueError(f"rel_tol must lie in (0, 1e-6), got {self.rel_tol}")
        if self.max_iter < 100:
            raise ValueError(f"max_iter must be >= 100, got {self.max_iter}")


DEFAULT_ACCURACY = Accuracy()


def log_gamma(a) -> float:
    """Natural log of the complete gamma function for a > 0."""
    a = float(a)
    if not math.isfinite(a) or a <= 0.0:
        raise ValueError(f"log_gamma requires finite a > 0, got {a!r}")
    return math.lgamma(a)


def _lower_series(a: float, x: np.ndarray, prefac: np.ndarray, acc: Accuracy) -> np.ndarray:
    """Regularized lower gamma P(a, x) by power series, valid for x < a + 1."""
    term = np.full_like(x, 1.0 / a)
    total = term.copy()
    denom = a
    for _ in range(acc.max_iter):
        denom += 1.0
        term = term * (x / denom)
        total += term
        if (np.abs(term) <= acc.rel_tol * np.abs(total)).all():
            return prefac * total
    raise RuntimeError(
        f"lower-gamma series did not converge in {acc.max_iter} iterations (a={a})"
    )


def _upper_cont_frac(a: float, x: np.ndarray, prefac: np.ndarray, acc: Accuracy) -> np.ndarray:
    """Regularized upper gamma Q(a, x) by Lentz's continued fraction, x >= a + 1."""
    tiny = 1e-308
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / np.where(np.abs(b) < tiny, tiny, b)
    h = d.copy()
    for i in range(1, acc.max_iter + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if (np.abs(delta - 1.0) <= acc.rel_tol).all():
            return prefac * h
    raise RuntimeError(
        f"upper-gamma continued fraction did not converge in {acc.max_iter} iterations (a={a})"
    )


def _reg_upper(a: float, x: np.ndarray, acc: Accuracy) -> np.ndarray:
    out = np.empty(x.shape, dtype=float)

    zero = x == 0.0
    infinite = np.isinf(x)
    out[zero] = 1.0
    out[infinite] = 0.0

    rest = ~(zero | infinite)
    if rest.any():
        xr = x[rest]
        with np.errstate(over="ignore", under="ignore"):
            prefac = np.exp(a * np.log(xr) - xr - math.lgamma(a))
        vals = np.empty(xr.shape, dtype=float)

        lo = xr < a + 1.0
        if lo.any():
            vals[lo] = 1.0 - _lower_series(a, xr[lo], prefac[lo], acc)
        hi = ~lo
        if hi.any():
            vals[hi] = _upper_cont_frac(a, xr[hi], prefac[hi], acc)

        vals[vals < _TINY] = 0.0
        out[rest] = vals

    return out


def regularized_upper_gamma(a, x, acc: Accuracy = DEFAULT_ACCURACY):
    """Q(a, x) = Gamma(a, x) / Gamma(a), in [0, 1].

    ``x`` may be a scalar or an array; entries of +inf map to 0.
    """
    a = float(a)
    if not math.isfinite(a) or a <= 0.0:
        raise ValueError(f"regularized_upper_gamma requires finite a > 0, got {a!r}")
    arr = np.asarray(x, dtype=float)
    if np.isnan(arr).any() or (arr < 0.0).any():
        raise ValueError("regularized_upper_gamma requires x >= 0")
    result = _reg_upper(a, np.atleast_1d(arr), acc)
    return float(result[0]) if arr.ndim == 0 else result.reshape(arr.shape)


def upper_inc_gamma(a, x, acc: Accuracy = DEFAULT_ACCURACY):
    """Upper incomplete gamma Gamma(a, x); equals Gamma(a) at x = 0."""
    q = regularized_upper_gamma(a, x, acc)
    return q * math.exp(math.lgamma(float(a)))
