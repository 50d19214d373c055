"""Delay embedding, Vietoris-Rips filtrations, persistent homology over Z/2.

The pipeline turns a 1-D return series into a point cloud of overlapping
windows (sliding-window delay embedding), builds the Vietoris-Rips
filtration on the Euclidean distance matrix up to a scale threshold, and
reduces boundary matrices to persistence diagrams in dimensions
0..max_dim.

Two deliberate reading choices are worth knowing about:

* A single return series does not canonically define a point cloud.
  Here the points are the overlapping windows (r_t, ..., r_{t+w-1}) for
  t = 0, stride, 2*stride, ...; window 10 and stride 1 are the defaults.
* Homology coefficients are Z/2. Over a field, persistent homology and
  persistent cohomology of the same filtration give identical diagrams,
  so nothing downstream depends on which of the two is computed.

``betti_numbers_at`` recomputes Betti numbers from boundary-matrix ranks
(rank-nullity) without touching the reduction pairing, so the two code
paths check each other; do not reimplement one in terms of the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Any, NamedTuple, Sequence, Union

import numpy as np

from .errors import InsufficientDataError, InternalInvariantError, ParameterError

DEFAULT_WINDOW = 10
DEFAULT_STRIDE = 1
DEFAULT_MAX_DIM = 2

DIAGRAM_CSV_HEADER = "dim,birth,death"


@dataclass(frozen=True)
class PointCloud:
    """Finite set of points in R^w, one row per point."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ParameterError(f"points must be a non-empty 2-D array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative matrix of pairwise distances, zero diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ParameterError(f"distance matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ParameterError("distances must be finite and >= 0")
        if np.any(np.diag(m) != 0):
            raise ParameterError("distance matrix diagonal must be zero")
        if not np.array_equal(m, m.T):
            raise ParameterError("distance matrix must be symmetric")
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


class Simplex(NamedTuple):
    """Simplex of the filtration: sorted vertex indices plus its scale."""

    vertices: tuple[int, ...]
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class Filtration:
    """Simplices in canonical order: by value, then dimension, then vertices.

    Contains every simplex of dimension <= max_dim + 1 with diameter <=
    threshold; the extra dimension supplies the cofaces that can kill
    max_dim-cycles.
    """

    simplices: tuple[Simplex, ...]
    threshold: float
    max_dim: int


@dataclass(frozen=True)
class PersistenceDiagramSet:
    """Per-dimension multisets of (birth, death) pairs, death possibly inf.

    ``diagrams`` maps each q in 0..max_dim to pairs sorted by (birth,
    death); zero-persistence pairs are never present.
    """

    diagrams: dict[int, tuple[tuple[float, float], ...]]
    threshold: float
    max_dim: int


def delay_embed(series: Any, window: int = DEFAULT_WINDOW, stride: int = DEFAULT_STRIDE) -> PointCloud:
    """Embed a return series as overlapping windows in R^window.

    ``series`` is a 1-D array of returns or anything with a ``returns``
    attribute. Produces floor((L - window) / stride) + 1 points; raises
    InsufficientDataError when the series is shorter than one window.
    """
    if window < 1:
        raise ParameterError(f"window must be >= 1, got {window}")
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride}")
    r = np.asarray(getattr(series, "returns", series), dtype=np.float64)
    if r.ndim != 1:
        raise ParameterError(f"series must be 1-D, got shape {r.shape}")
    if r.shape[0] < window:
        raise InsufficientDataError(f"series length {r.shape[0]} < window {window}")
    windows = np.lib.stride_tricks.sliding_window_view(r, window)[::stride]
    return PointCloud(windows.copy())


def distance_matrix(cloud: PointCloud) -> DistanceMatrix:
    """Pairwise Euclidean distances between the cloud's points."""
    pts = cloud.points
    diff = pts[:, None, :] - pts[None, :, :]
    return DistanceMatrix(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)))


def _dm_entries(dm: Union[DistanceMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(dm, DistanceMatrix):
        return dm.entries
    return DistanceMatrix(np.asarray(dm, dtype=np.float64)).entries


def build_rips_filtration(
    dm: Union[DistanceMatrix, np.ndarray],
    max_dim: int = DEFAULT_MAX_DIM,
    threshold: float | None = None,
) -> Filtration:
    """Vietoris-Rips filtration: every simplex whose diameter fits the scale.

    Enumerates simplices of dimension <= max_dim + 1 with value = max
    pairwise distance among the vertices. ``threshold`` of None (or the
    string "auto") means the maximum matrix entry, which guarantees the
    dimension-0 merge tree completes; note the dimension-3 enumeration is
    O(n^4) at that scale, so large clouds want an explicit threshold.
    """
    entries = _dm_entries(dm)
    n = entries.shape[0]
    if max_dim not in (0, 1, 2):
        raise ParameterError(f"max_dim must be 0, 1 or 2, got {max_dim}")
    if threshold is None or (isinstance(threshold, str) and threshold.lower() == "auto"):
        thr = float(entries.max()) if n > 1 else 0.0
    else:
        thr = float(threshold)
        if thr < 0 or not math.isfinite(thr):
            raise ParameterError(f"threshold must be finite and >= 0, got {threshold}")

    simplices: list[Simplex] = [Simplex((i,), 0.0) for i in range(n)]

    adj = entries <= thr
    np.fill_diagonal(adj, False)
    ii, jj = np.nonzero(np.triu(adj, 1))
    for i, j in zip(ii.tolist(), jj.tolist()):
        simplices.append(Simplex((i, j), float(entries[i, j])))

    triangles: list[Simplex] = []
    if max_dim + 1 >= 2:
        for i, j in zip(ii.tolist(), jj.tolist()):
            # common neighbors above j keep each triangle enumerated once
            ks = np.nonzero(adj[i, j + 1 :] & adj[j, j + 1 :])[0] + j + 1
            if ks.size == 0:
                continue
            d_ij = entries[i, j]
            vals = np.maximum(d_ij, np.maximum(entries[i, ks], entries[j, ks]))
            for k, v in zip(ks.tolist(), vals.tolist()):
                triangles.append(Simplex((i, j, k), float(v)))
        simplices.extend(triangles)

    if max_dim + 1 >= 3:
        for (i, j, k), v in triangles:
            ls = np.nonzero(adj[i, k + 1 :] & adj[j, k + 1 :] & adj[k, k + 1 :])[0] + k + 1
            if ls.size == 0:
                continue
            vals = np.maximum(
                v, np.maximum(entries[i, ls], np.maximum(entries[j, ls], entries[k, ls]))
            )
            for l, tv in zip(ls.tolist(), vals.tolist()):
                simplices.append(Simplex((i, j, k, l), float(tv)))

    simplices.sort(key=lambda s: (s.value, len(s.vertices), s.vertices))
    return Filtration(tuple(simplices), thr, max_dim)


def _facets(vertices: tuple[int, ...]) -> list[tuple[int, ...]]:
    return [vertices[:i] + vertices[i + 1 :] for i in range(len(vertices))]


def _validate_filtration(f: Filtration) -> None:
    """Reject out-of-order, duplicate, oversized or face-less simplices."""
    seen: dict[tuple[int, ...], int] = {}
    prev_key: tuple | None = None
    for s in f.simplices:
        verts = s.vertices
        if len(verts) > f.max_dim + 2:
            raise InternalInvariantError(f"simplex {verts} exceeds dimension {f.max_dim + 1}")
        if any(a >= b for a, b in zip(verts, verts[1:])):
            raise InternalInvariantError(f"vertices not strictly increasing: {verts}")
        if len(verts) == 1 and s.value != 0.0:
            raise InternalInvariantError(f"vertex {verts} has nonzero value {s.value}")
        if s.value > f.threshold:
            raise InternalInvariantError(f"simplex {verts} value {s.value} above threshold")
        key = (s.value, len(verts), verts)
        if prev_key is not None and key <= prev_key:
            raise InternalInvariantError(f"filtration order violated at {verts}")
        prev_key = key
        if len(verts) > 1:
            for face in _facets(verts):
                if face not in seen:
                    raise InternalInvariantError(f"face {face} of {verts} missing or after coface")
        seen[verts] = len(seen)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def _reduce_columns(
    columns: Sequence[set[int] | None],
) -> tuple[dict[int, int], list[int]]:
    """Standard Z/2 column reduction; columns are sets of face indices.

    Returns (pivot row -> column index, list of columns that reduced to
    zero). Columns given as None are skipped (cleared from above).
    """
    owner: dict[int, set[int]] = {}
    pivot_of: dict[int, int] = {}
    zero_cols: list[int] = []
    for idx, col in enumerate(columns):
        if col is None:
            continue
        work = col
        while work:
            low = max(work)
            other = owner.get(low)
            if other is None:
                owner[low] = work
                pivot_of[low] = idx
                break
            work = work ^ other
        else:
            zero_cols.append(idx)
    return pivot_of, zero_cols


def compute_persistence(f: Filtration) -> PersistenceDiagramSet:
    """Persistence diagrams of the filtration via boundary-matrix reduction.

    Dimension 0 uses a union-find merge pass; dimensions 1 and 2 use
    column reduction over Z/2 with the clearing shortcut (columns whose
    simplex was already killed from above are skipped). Pairs with equal
    birth and death are dropped; unkilled classes of dimension <= max_dim
    get death = inf.
    """
    _validate_filtration(f)

    verts_q: dict[int, list[tuple[int, ...]]] = {0: [], 1: [], 2: [], 3: []}
    vals_q: dict[int, list[float]] = {0: [], 1: [], 2: [], 3: []}
    pos_q: dict[int, dict[tuple[int, ...], int]] = {0: {}, 1: {}, 2: {}, 3: {}}
    for s in f.simplices:
        q = len(s.vertices) - 1
        pos_q[q][s.vertices] = len(verts_q[q])
        verts_q[q].append(s.vertices)
        vals_q[q].append(s.value)

    diagrams: dict[int, list[tuple[float, float]]] = {q: [] for q in range(f.max_dim + 1)}

    # dimension 0: elder rule is trivial because every vertex is born at 0
    uf = _UnionFind(len(verts_q[0]))
    cycle_edges: list[int] = []
    for e_idx, (u, v) in enumerate(verts_q[1]):
        if uf.union(u, v):
            death = vals_q[1][e_idx]
            if death > 0.0:
                diagrams[0].append((0.0, death))
        else:
            cycle_edges.append(e_idx)
    components = sum(1 for i in range(len(verts_q[0])) if uf.find(i) == i)
    diagrams[0].extend((0.0, math.inf) for _ in range(components))

    cleared: set[int] = set()
    if f.max_dim >= 2 and verts_q[3]:
        tri_pos = pos_q[2]
        cols3 = [{tri_pos[face] for face in _facets(verts)} for verts in verts_q[3]]
        pivots3, _ = _reduce_columns(cols3)
        for tri_idx, tet_idx in pivots3.items():
            birth, death = vals_q[2][tri_idx], vals_q[3][tet_idx]
            if death > birth:
                diagrams[2].append((birth, death))
            cleared.add(tri_idx)

    paired_edges: set[int] = set()
    if f.max_dim >= 1 and verts_q[2]:
        edge_pos = pos_q[1]
        cols2 = [
            None if idx in cleared else {edge_pos[face] for face in _facets(verts)}
            for idx, verts in enumerate(verts_q[2])
        ]
        pivots2, zero2 = _reduce_columns(cols2)
        for edge_idx, tri_idx in pivots2.items():
            birth, death = vals_q[1][edge_idx], vals_q[2][tri_idx]
            if death > birth:
                diagrams[1].append((birth, death))
            paired_edges.add(edge_idx)
        if f.max_dim >= 2:
            diagrams[2].extend((vals_q[2][tri_idx], math.inf) for tri_idx in zero2)

    if f.max_dim >= 1:
        diagrams[1].extend(
            (vals_q[1][e_idx], math.inf) for e_idx in cycle_edges if e_idx not in paired_edges
        )

    final = {q: tuple(sorted(pairs)) for q, pairs in diagrams.items()}
    return PersistenceDiagramSet(final, f.threshold, f.max_dim)


def _gf2_rank(columns: list[int]) -> int:
    """Rank of a Z/2 matrix given as column bitmasks."""
    basis: dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            high = col.bit_length() - 1
            if high in basis:
                col ^= basis[high]
            else:
                basis[high] = col
                rank += 1
                break
    return rank


def betti_numbers_at(f: Filtration, epsilon: float) -> list[int]:
    """Betti numbers beta_0..beta_max_dim of the subcomplex at scale epsilon.

    Computed by rank-nullity from boundary-matrix ranks over Z/2:
    beta_q = #q-simplices - rank(boundary_q) - rank(boundary_{q+1}).
    This never consults the reduction pairing, so it serves as an
    independent check on compute_persistence.
    """
    if not math.isfinite(epsilon) or epsilon < 0:
        raise ParameterError(f"epsilon must be finite and >= 0, got {epsilon}")
    pos: dict[int, dict[tuple[int, ...], int]] = {q: {} for q in range(4)}
    for s in f.simplices:
        if s.value <= epsilon:
            q = len(s.vertices) - 1
            pos[q][s.vertices] = len(pos[q])

    ranks = [0] * 5
    for q in range(1, 4):
        face_pos = pos[q - 1]
        cols = []
        for verts in pos[q]:
            mask = 0
            for face in _facets(verts):
                mask |= 1 << face_pos[face]
            cols.append(mask)
        ranks[q] = _gf2_rank(cols)

    return [len(pos[q]) - ranks[q] - ranks[q + 1] for q in range(f.max_dim + 1)]


def _format_value(x: float) -> str:
    return "inf" if math.isinf(x) else format(x, ".12g")


def write_diagram_csv(diagrams: PersistenceDiagramSet, dest: Union[str, Path, IO[str]]) -> None:
    """Write `dim,birth,death` rows, dimensions ascending, `inf` for essential."""
    lines = [DIAGRAM_CSV_HEADER]
    for q in sorted(diagrams.diagrams):
        for birth, death in diagrams.diagrams[q]:
            lines.append(f"{q},{_format_value(birth)},{_format_value(death)}")
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)
