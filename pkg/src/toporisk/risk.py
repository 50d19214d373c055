"""Historical-simulation Value-at-Risk and Conditional VaR.

Both measures work on the empirical distribution of a return sample, no
parametric assumptions, and are reported in return units (a bad day is a
negative number). With returns sorted ascending:

    value_at_risk   = r_(k),  k = floor((1 - alpha) * n), zero-based
    conditional_var = mean of the max(1, k) smallest returns

so conditional_var <= value_at_risk always: the tail mean cannot exceed
the tail boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import InsufficientDataError, ParameterError

# Relative slack when flooring alpha- and fraction-derived products.
# (1 - 0.8) * 10 evaluates to 1.9999999999999996 in binary floating point;
# the intended index is 2, so values this close to an integer snap to it.
_FLOOR_SNAP_REL = 1e-9


def snapped_floor(x: float) -> int:
    """floor(x), except values within 1e-9 (relative) of an integer snap to it."""
    nearest = round(x)
    if abs(x - nearest) <= _FLOOR_SNAP_REL * max(1.0, abs(x)):
        return int(nearest)
    return int(np.floor(x))


@dataclass(frozen=True)
class TailRiskResult:
    """VaR/CVaR of one return sample at one confidence level."""

    alpha: float
    var: float
    cvar: float
    n: int
    tail_count: int


def _as_returns(sample: Any) -> np.ndarray:
    arr = np.asarray(getattr(sample, "returns", sample), dtype=np.float64)
    if arr.ndim != 1:
        raise ParameterError(f"returns must be 1-D, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise InsufficientDataError("empty return sample")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("returns must be finite")
    return arr


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")


def _var_index(alpha: float, n: int) -> int:
    return min(max(snapped_floor((1.0 - alpha) * n), 0), n - 1)


def value_at_risk(sample: Any, alpha: float = 0.95) -> float:
    """Historical VaR at confidence alpha, in return units.

    ``sample`` is a 1-D array of returns or anything with a ``returns``
    attribute (e.g. ReturnSeries). Returns the ascending order statistic
    at k = floor((1 - alpha) * n), clamped to the sample range.
    """
    _check_alpha(alpha)
    r = np.sort(_as_returns(sample))
    return float(r[_var_index(alpha, r.shape[0])])


def conditional_var(sample: Any, alpha: float = 0.95) -> float:
    """Historical CVaR (expected shortfall) at confidence alpha, in return units.

    The arithmetic mean of the max(1, floor((1 - alpha) * n)) smallest
    returns; the floor of 1 keeps the tail non-empty at high alpha.
    """
    _check_alpha(alpha)
    r = np.sort(_as_returns(sample))
    return float(np.mean(r[: _tail_count(alpha, r.shape[0])]))


def _tail_count(alpha: float, n: int) -> int:
    return min(max(1, snapped_floor((1.0 - alpha) * n)), n)


def tail_risk(sample: Any, alpha: float = 0.95) -> TailRiskResult:
    """VaR and CVaR of one sample bundled with the tail bookkeeping."""
    _check_alpha(alpha)
    r = np.sort(_as_returns(sample))
    n = r.shape[0]
    tail_count = _tail_count(alpha, n)
    return TailRiskResult(
        alpha=alpha,
        var=float(r[_var_index(alpha, n)]),
        cvar=float(np.mean(r[:tail_count])),
        n=n,
        tail_count=tail_count,
    )
