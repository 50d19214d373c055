"""Historical VaR/CVaR against a brute-force sort-and-index oracle.

The oracle computes the tail index with exact rational arithmetic
(Fraction of the decimal alpha literal), so it cannot inherit the
binary floating-point wobble the implementation has to snap away:
(1 - 0.8) * 10 is 1.9999999999999996 as a float but exactly 2 as a
rational, and the intended index is 2.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from toporisk import (
    InsufficientDataError,
    ParameterError,
    conditional_var,
    tail_risk,
    value_at_risk,
)
from toporisk.risk import snapped_floor

ALPHAS = (0.8, 0.9, 0.95, 0.99)


def oracle_index(alpha: float, n: int) -> int:
    k = int((1 - Fraction(str(alpha))) * n)  # Fraction floors toward zero
    return min(max(k, 0), n - 1)


def oracle_var(returns: list[float], alpha: float) -> float:
    s = sorted(returns)
    return s[oracle_index(alpha, len(s))]


def oracle_cvar(returns: list[float], alpha: float) -> float:
    s = sorted(returns)
    count = max(1, int((1 - Fraction(str(alpha))) * len(s)))
    count = min(count, len(s))
    return sum(s[:count]) / count


def test_worked_examples():
    r = [-0.05, -0.04, -0.03, -0.02, -0.01, 0.01, 0.02, 0.03, 0.04, 0.05]
    assert value_at_risk(r, 0.8) == -0.03
    assert math.isclose(conditional_var(r, 0.8), -0.045, rel_tol=0, abs_tol=1e-15)
    assert value_at_risk([-0.01], 0.5) == -0.01
    assert conditional_var([-0.01], 0.99) == -0.01
    assert value_at_risk([0.002] * 7, 0.95) == 0.002


def test_tail_risk_bundle():
    r = [-0.05, -0.04, -0.03, -0.02, -0.01, 0.01, 0.02, 0.03, 0.04, 0.05]
    t = tail_risk(r, 0.8)
    assert (t.alpha, t.n, t.tail_count) == (0.8, 10, 2)
    assert t.var == -0.03
    assert math.isclose(t.cvar, -0.045, rel_tol=0, abs_tol=1e-15)
    assert t.cvar <= t.var


def test_snapped_floor():
    assert snapped_floor((1 - 0.8) * 10) == 2
    assert snapped_floor(1.9999999999999996) == 2
    assert snapped_floor(1.5) == 1
    assert snapped_floor(2.0) == 2
    assert snapped_floor(-0.5) == -1
    assert snapped_floor(0.049999999) == 0


def test_parameter_validation():
    for alpha in (0.0, 1.0, 1.5, -0.2):
        with pytest.raises(ParameterError):
            value_at_risk([0.01, 0.02], alpha)
        with pytest.raises(ParameterError):
            conditional_var([0.01, 0.02], alpha)
    with pytest.raises(InsufficientDataError):
        value_at_risk([], 0.95)
    with pytest.raises(ParameterError):
        value_at_risk([0.1, math.nan], 0.95)
    with pytest.raises(ParameterError):
        value_at_risk(np.zeros((2, 2)), 0.95)


def test_oracle_equivalence_seeded():
    rng = random.Random(21)
    for _ in range(300):
        n = rng.randint(1, 200)
        returns = [rng.uniform(-0.2, 0.2) for _ in range(n)]
        alpha = rng.choice(ALPHAS)
        assert value_at_risk(returns, alpha) == oracle_var(returns, alpha)
        assert conditional_var(returns, alpha) == pytest.approx(
            oracle_cvar(returns, alpha), rel=0, abs=1e-15
        )


def test_permutation_invariance():
    rng = random.Random(22)
    for _ in range(50):
        returns = [rng.gauss(0, 0.02) for _ in range(rng.randint(1, 80))]
        shuffled = returns[:]
        rng.shuffle(shuffled)
        for alpha in ALPHAS:
            assert value_at_risk(returns, alpha) == value_at_risk(shuffled, alpha)
            assert conditional_var(returns, alpha) == conditional_var(shuffled, alpha)


def test_monotonicity_in_alpha():
    rng = random.Random(23)
    for _ in range(50):
        returns = [rng.gauss(0, 0.02) for _ in range(rng.randint(1, 120))]
        for a1, a2 in ((0.8, 0.9), (0.9, 0.95), (0.95, 0.99)):
            assert value_at_risk(returns, a1) >= value_at_risk(returns, a2)
            assert conditional_var(returns, a1) >= conditional_var(returns, a2)


def test_translation_equivariance():
    rng = random.Random(24)
    for _ in range(50):
        returns = np.array([rng.gauss(0, 0.02) for _ in range(rng.randint(1, 80))])
        c = rng.uniform(-0.5, 0.5)
        for alpha in ALPHAS:
            assert abs(
                value_at_risk(returns + c, alpha) - (value_at_risk(returns, alpha) + c)
            ) < 1e-12


def test_cvar_never_exceeds_var():
    rng = random.Random(25)
    for _ in range(100):
        returns = [rng.gauss(0, 0.05) for _ in range(rng.randint(1, 150))]
        for alpha in ALPHAS:
            assert conditional_var(returns, alpha) <= value_at_risk(returns, alpha)


def test_accepts_return_series_duck_type():
    class Sample:
        returns = np.array([-0.02, 0.01, 0.03])

    assert value_at_risk(Sample(), 0.95) == -0.02
