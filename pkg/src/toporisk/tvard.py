"""Stress sampling, diagram vectorization, TVaRD and the full risk report.

TVaRD is the Euclidean distance between fixed-length vectorizations of
two persistence diagram sets, a baseline one and one recomputed from a
random subsample of the returns (the stress scenario). The magnitude
depends on the vectorization scheme, so the scheme is pinned down here
and echoed in every report:

* infinite deaths are replaced by the larger of the two thresholds,
* per dimension, pairs sort by persistence descending (ties by birth),
* the shorter list is padded with (0, 0) pairs,
* pairs flatten as (birth, death, ...) and dimensions 0,1,2 concatenate.

Stress sampling is deterministic given the seed: SplitMix64 drives a
partial Fisher-Yates shuffle whose first floor(fraction * n) slots,
re-sorted ascending, are the kept return indices. The subsample keeps
chronological order. Sampling happens on returns, after preprocessing;
the report's config block records fraction and seed so any number can
be regenerated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, ParameterError, PipelineError, TopoRiskError
from .ingest import PriceSeries, ReturnSeries, clean_series, compute_returns, normalize
from .risk import snapped_floor, tail_risk
from .tda import (
    DEFAULT_MAX_DIM,
    DEFAULT_STRIDE,
    DEFAULT_WINDOW,
    PersistenceDiagramSet,
    build_rips_filtration,
    compute_persistence,
    delay_embed,
    distance_matrix,
)

_U64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator: 64-bit state, golden-gamma increment.

    Chosen over a platform RNG so stress samples are bit-identical for a
    given seed no matter where the tool runs.
    """

    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        if not 0 <= seed <= _U64:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self._state = seed

    def next_u64(self) -> int:
        self._state = (self._state + self.GAMMA) & _U64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        if bound <= 0:
            raise ParameterError(f"bound must be positive, got {bound}")
        return self.next_u64() % bound


@dataclass(frozen=True)
class StressConfig:
    """Stress scenario: keep floor(fraction * n) returns, chosen by seed."""

    seed: int
    fraction: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ParameterError(f"fraction must lie in (0, 1], got {self.fraction}")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= _U64:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


def sample_indices(n: int, k: int, seed: int) -> list[int]:
    """First k slots of a seeded Fisher-Yates shuffle of 0..n-1, sorted."""
    if not 0 <= k <= n:
        raise ParameterError(f"need 0 <= k <= n, got k={k}, n={n}")
    rng = SplitMix64(seed)
    idx = list(range(n))
    for i in range(k):
        j = i + rng.below(n - i)
        idx[i], idx[j] = idx[j], idx[i]
    return sorted(idx[:k])


def stress_sample(series: ReturnSeries, cfg: StressConfig) -> ReturnSeries:
    """Subsample floor(fraction * n) returns without replacement, in order.

    Deterministic for a given (series, seed); dropped_count carries over
    unchanged since the subsample introduces no new zero denominators.
    """
    n = len(series)
    if n < 2:
        raise InsufficientDataError(f"{series.ticker}: need >= 2 returns to stress-sample")
    k = snapped_floor(cfg.fraction * n)
    if k < 1:
        raise InsufficientDataError(
            f"{series.ticker}: fraction {cfg.fraction} of {n} returns selects nothing"
        )
    keep = sample_indices(n, k, cfg.seed)
    return ReturnSeries(series.ticker, series.returns[keep], series.dropped_count)


@dataclass(frozen=True)
class FeatureVector:
    """Flattened, padded diagram coordinates plus the layout that shaped them."""

    values: np.ndarray
    layout: tuple[int, ...]
    cap: float

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))


def _ordered_pairs(
    pairs: Sequence[tuple[float, float]], cap: float
) -> list[tuple[float, float]]:
    capped = [(b, cap if math.isinf(d) else d) for b, d in pairs]
    capped.sort(key=lambda p: (-(p[1] - p[0]), p[0]))
    return capped


def vectorize(
    d: PersistenceDiagramSet, counterpart: PersistenceDiagramSet
) -> tuple[FeatureVector, FeatureVector]:
    """Make the two diagram sets comparable as equal-length vectors.

    Per dimension: cap infinite deaths at max(threshold of the two
    inputs), sort by persistence descending (ties by birth ascending),
    pad the shorter side with (0, 0), flatten as (birth, death, ...);
    dimensions concatenate in increasing order.
    """
    if d.max_dim != counterpart.max_dim:
        raise ParameterError(
            f"diagram sets disagree on max_dim: {d.max_dim} vs {counterpart.max_dim}"
        )
    cap = max(d.threshold, counterpart.threshold)
    flat_a: list[float] = []
    flat_b: list[float] = []
    layout: list[int] = []
    for q in range(d.max_dim + 1):
        pairs_a = _ordered_pairs(d.diagrams.get(q, ()), cap)
        pairs_b = _ordered_pairs(counterpart.diagrams.get(q, ()), cap)
        width = max(len(pairs_a), len(pairs_b))
        pairs_a += [(0.0, 0.0)] * (width - len(pairs_a))
        pairs_b += [(0.0, 0.0)] * (width - len(pairs_b))
        layout.append(width)
        for b, dth in pairs_a:
            flat_a.extend((b, dth))
        for b, dth in pairs_b:
            flat_b.extend((b, dth))
    shape = tuple(layout)
    return (
        FeatureVector(np.array(flat_a), shape, cap),
        FeatureVector(np.array(flat_b), shape, cap),
    )


def tvard_distance(a: FeatureVector, b: FeatureVector) -> float:
    """Euclidean norm of the difference between two feature vectors."""
    if a.layout != b.layout or a.values.shape != b.values.shape:
        raise ParameterError(
            f"feature vectors not comparable: layouts {a.layout} vs {b.layout}"
        )
    return float(np.linalg.norm(a.values - b.values))


def _linf(p: tuple[float, float], q: tuple[float, float]) -> float:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def _matching_exists(
    d1: Sequence[tuple[float, float]], d2: Sequence[tuple[float, float]], c: float
) -> bool:
    """Perfect matching test for the doubled bipartite graph at cost cap c.

    Left side: points of d1 then diagonal slots for d2; right side:
    points of d2 then diagonal slots for d1. A point may match a point
    (L-infinity cost), its side's diagonal slot (half persistence), and
    slots match slots at cost 0.
    """
    n1, n2 = len(d1), len(d2)
    size = n1 + n2

    def edges(i: int) -> list[int]:
        out = []
        if i < n1:
            p = d1[i]
            out.extend(j for j in range(n2) if _linf(p, d2[j]) <= c)
            if (p[1] - p[0]) / 2.0 <= c:
                out.extend(range(n2, size))
        else:
            out.extend(j for j in range(n2) if (d2[j][1] - d2[j][0]) / 2.0 <= c)
            out.extend(range(n2, size))
        return out

    match_right: list[int] = [-1] * size

    def augment(i: int, visited: list[bool]) -> bool:
        for j in edges(i):
            if visited[j]:
                continue
            visited[j] = True
            if match_right[j] == -1 or augment(match_right[j], visited):
                match_right[j] = i
                return True
        return False

    for i in range(size):
        if not augment(i, [False] * size):
            return False
    return True


def bottleneck_distance(
    d1: Sequence[tuple[float, float]], d2: Sequence[tuple[float, float]]
) -> float:
    """Exact bottleneck distance between two finite single-dimension diagrams.

    Minimum over partial matchings of the largest L-infinity pair cost,
    with unmatched points paying their distance to the diagonal. Found by
    binary search over the finite set of candidate costs, testing perfect
    matchings on the doubled bipartite graph.
    """
    for pair in list(d1) + list(d2):
        if not (math.isfinite(pair[0]) and math.isfinite(pair[1])):
            raise ParameterError("bottleneck distance needs finite pairs; cap infinities first")
    if not d1 and not d2:
        return 0.0
    candidates = {0.0}
    candidates.update((p[1] - p[0]) / 2.0 for p in d1)
    candidates.update((p[1] - p[0]) / 2.0 for p in d2)
    candidates.update(_linf(p, q) for p in d1 for q in d2)
    costs = sorted(candidates)
    lo, hi = 0, len(costs) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _matching_exists(d1, d2, costs[mid]):
            hi = mid
        else:
            lo = mid + 1
    return costs[lo]


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything run_analysis needs beyond the price series itself."""

    seed: int
    alpha: float = 0.95
    window: int = DEFAULT_WINDOW
    stride: int = DEFAULT_STRIDE
    max_dim: int = DEFAULT_MAX_DIM
    threshold: float | None = None
    fraction: float = 0.5
    with_bottleneck: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.window < 1 or self.stride < 1:
            raise ParameterError("window and stride must be >= 1")
        if self.max_dim not in (0, 1, 2):
            raise ParameterError(f"max_dim must be 0, 1 or 2, got {self.max_dim}")
        if self.threshold is not None and (
            not math.isfinite(self.threshold) or self.threshold < 0
        ):
            raise ParameterError(f"threshold must be finite and >= 0, got {self.threshold}")
        StressConfig(seed=self.seed, fraction=self.fraction)


@dataclass(frozen=True)
class RiskReport:
    """Per-ticker bundle of tail risk, diagrams and the TVaRD comparison."""

    ticker: str
    alpha: float
    var: float
    cvar: float
    tvard: float
    bottleneck: dict[str, float] | None
    config: AnalysisConfig
    baseline_diagrams: PersistenceDiagramSet
    stress_diagrams: PersistenceDiagramSet


def _diagrams_json(ds: PersistenceDiagramSet) -> list[dict]:
    rows = []
    for q in sorted(ds.diagrams):
        for birth, death in ds.diagrams[q]:
            rows.append(
                {"dim": q, "birth": birth, "death": "inf" if math.isinf(death) else death}
            )
    return rows


def report_to_json(report: RiskReport) -> str:
    """Serialize a RiskReport with a stable key order; essential deaths as "inf"."""
    cfg = report.config
    obj = {
        "ticker": report.ticker,
        "alpha": report.alpha,
        "var": report.var,
        "cvar": report.cvar,
        "tvard": report.tvard,
        "bottleneck": report.bottleneck,
        "config": {
            "window": cfg.window,
            "stride": cfg.stride,
            "max_dim": cfg.max_dim,
            "threshold": "auto" if cfg.threshold is None else cfg.threshold,
            "fraction": cfg.fraction,
            "seed": cfg.seed,
        },
        "baseline_diagrams": _diagrams_json(report.baseline_diagrams),
        "stress_diagrams": _diagrams_json(report.stress_diagrams),
    }
    return json.dumps(obj, indent=2) + "\n"


def _diagrams_for(returns: ReturnSeries, cfg: AnalysisConfig, stage: str) -> PersistenceDiagramSet:
    try:
        cloud = delay_embed(returns, cfg.window, cfg.stride)
        dm = distance_matrix(cloud)
        filtration = build_rips_filtration(dm, cfg.max_dim, cfg.threshold)
        return compute_persistence(filtration)
    except TopoRiskError as exc:
        raise PipelineError(stage, exc) from exc


def run_analysis(prices: PriceSeries, cfg: AnalysisConfig) -> RiskReport:
    """Full per-ticker pipeline from raw prices to a RiskReport.

    clean -> normalize -> returns -> VaR/CVaR -> baseline persistence ->
    stress sample -> stress persistence -> vectorize -> TVaRD. Failures
    carry the stage name via PipelineError.
    """
    try:
        cleaned, _ = clean_series(prices)
        normalized = normalize(cleaned)
        returns = compute_returns(normalized)
    except TopoRiskError as exc:
        raise PipelineError("preprocess", exc) from exc

    try:
        tail = tail_risk(returns, cfg.alpha)
    except TopoRiskError as exc:
        raise PipelineError("risk", exc) from exc

    baseline = _diagrams_for(returns, cfg, "baseline-persistence")

    try:
        stressed = stress_sample(returns, StressConfig(seed=cfg.seed, fraction=cfg.fraction))
    except TopoRiskError as exc:
        raise PipelineError("stress-sample", exc) from exc
    stress = _diagrams_for(stressed, cfg, "stress-persistence")

    try:
        vec_base, vec_stress = vectorize(baseline, stress)
        tvard = tvard_distance(vec_base, vec_stress)
    except TopoRiskError as exc:
        raise PipelineError("tvard", exc) from exc

    bottleneck = None
    if cfg.with_bottleneck:
        cap = max(baseline.threshold, stress.threshold)
        bottleneck = {}
        for q in range(cfg.max_dim + 1):
            pairs_b = _ordered_pairs(baseline.diagrams.get(q, ()), cap)
            pairs_s = _ordered_pairs(stress.diagrams.get(q, ()), cap)
            bottleneck[f"h{q}"] = bottleneck_distance(pairs_b, pairs_s)

    return RiskReport(
        ticker=prices.ticker,
        alpha=cfg.alpha,
        var=tail.var,
        cvar=tail.cvar,
        tvard=tvard,
        bottleneck=bottleneck,
        config=cfg,
        baseline_diagrams=baseline,
        stress_diagrams=stress,
    )
