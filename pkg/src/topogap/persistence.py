"""Vietoris-Rips persistence over F2 in homological dimensions 0 and 1.

Dimension 0 comes from a Kruskal-style union-find sweep (finite bars are the
nonzero minimum-spanning-forest edge weights). Dimension 1 reduces the
triangle boundary matrix with the clearing shortcut: pivots of reduced
triangle columns are exactly the cycle-creating edges, so the edge-column
stage never runs. A small brute-force reducer over the full filtered
boundary matrix serves as the testing oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import TooManyVerticesError
from .functional_graph import FunctionalGraph

# The triangle stage enumerates O(n^3) simplices; the default cap keeps a
# single diagram within a predictable memory budget.
DEFAULT_VERTEX_CAP = 3000

BRUTE_FORCE_VERTEX_CAP = 10


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite (birth, death) pairs of one homological dimension."""

    dimension: int
    points: np.ndarray
    n_vertices: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if self.dimension not in (0, 1):
            raise ValueError("dimension must be 0 or 1")
        if pts.size:
            if not np.isfinite(pts).all():
                raise ValueError("diagram points must be finite")
            if (pts[:, 0] > pts[:, 1]).any():
                raise ValueError("birth must not exceed death")
        pts.setflags(write=False)

    @property
    def births(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def lifetimes(self) -> np.ndarray:
        return self.points[:, 1] - self.points[:, 0]

    def __len__(self) -> int:
        return self.points.shape[0]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

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
        self.parent[rb] = ra
        return True


def _sorted_edges(g: FunctionalGraph):
    """Edges (i < j) in filtration order: weight, then lexicographic."""
    n = g.n_vertices
    d = g.dissimilarity
    iu, ju = np.triu_indices(n, k=1)
    w = d[iu, ju]
    order = np.lexsort((ju, iu, w))
    return iu[order], ju[order], w[order]


def persistence_dim0(g: FunctionalGraph) -> PersistenceDiagram:
    """H0 diagram: (0, w) for each nonzero spanning-forest edge weight."""
    n = g.n_vertices
    iu, ju, w = _sorted_edges(g)
    uf = _UnionFind(n)
    deaths = []
    for i, j, wij in zip(iu, ju, w):
        if uf.union(int(i), int(j)) and wij > 0.0:
            deaths.append(wij)
    pts = np.zeros((len(deaths), 2))
    pts[:, 1] = deaths
    return PersistenceDiagram(dimension=0, points=pts, n_vertices=n)


def mst_edge_weights(g: FunctionalGraph) -> np.ndarray:
    """Sorted minimum-spanning-forest edge weights (zeros included)."""
    iu, ju, w = _sorted_edges(g)
    uf = _UnionFind(g.n_vertices)
    out = [wij for i, j, wij in zip(iu, ju, w) if uf.union(int(i), int(j))]
    return np.sort(np.asarray(out))


def persistence_dim1(
    g: FunctionalGraph, vertex_cap: int = DEFAULT_VERTEX_CAP
) -> PersistenceDiagram:
    """H1 diagram from triangle-column reduction over F2.

    At threshold = max weight the complex is a complete 2-skeleton, so every
    1-cycle dies and all bars are finite.
    """
    n = g.n_vertices
    if n > vertex_cap:
        raise TooManyVerticesError(f"{n} vertices exceeds cap {vertex_cap}")
    if n < 3:
        return PersistenceDiagram(dimension=1, points=np.empty((0, 2)), n_vertices=n)
    d = g.dissimilarity

    iu, ju, w = _sorted_edges(g)
    edge_index = {}
    for k, (i, j) in enumerate(zip(iu, ju)):
        edge_index[(int(i), int(j))] = k

    tris = []
    for a, b, c in combinations(range(n), 3):
        diam = max(d[a, b], d[a, c], d[b, c])
        tris.append((diam, a, b, c))
    tris.sort()

    # Columns are edge-index bitmasks; the pivot is the highest set bit.
    pivot_col: dict[int, int] = {}
    pivot_diam: dict[int, float] = {}
    pts = []
    for diam, a, b, c in tris:
        col = (
            (1 << edge_index[(a, b)])
            | (1 << edge_index[(a, c)])
            | (1 << edge_index[(b, c)])
        )
        while col:
            piv = col.bit_length() - 1
            if piv not in pivot_col:
                break
            col ^= pivot_col[piv]
        if col:
            piv = col.bit_length() - 1
            pivot_col[piv] = col
            pivot_diam[piv] = diam
            birth = w[piv]
            if diam > birth:
                pts.append((birth, diam))
    return PersistenceDiagram(
        dimension=1, points=np.asarray(pts).reshape(-1, 2), n_vertices=n
    )


def brute_force_persistence(
    g: FunctionalGraph, max_dim: int
) -> PersistenceDiagram:
    """Oracle: full simplex enumeration + dense F2 reduction, <= 10 vertices.

    Enumerates all simplices up to dimension ``max_dim + 1`` sorted by
    (diameter, dimension, vertices) and reduces the filtered boundary matrix
    column by column with no shortcuts. Drop rules match the main engine:
    zero-persistence and essential classes are discarded.
    """
    n = g.n_vertices
    if n > BRUTE_FORCE_VERTEX_CAP:
        raise TooManyVerticesError(f"{n} vertices exceeds oracle cap")
    if max_dim not in (0, 1):
        raise ValueError("max_dim must be 0 or 1")
    d = g.dissimilarity

    simplices = []  # (diam, dim, verts)
    for dim in range(max_dim + 2):
        for verts in combinations(range(n), dim + 1):
            diam = 0.0
            for a, b in combinations(verts, 2):
                diam = max(diam, d[a, b])
            simplices.append((diam, dim, verts))
    simplices.sort()
    index = {s[2]: k for k, s in enumerate(simplices)}

    columns: dict[int, int] = {}
    pairs = []  # (birth_index, death_index)
    for k, (_, dim, verts) in enumerate(simplices):
        col = 0
        if dim > 0:
            for facet in combinations(verts, dim):
                col ^= 1 << index[facet]
        while col:
            piv = col.bit_length() - 1
            if piv not in columns:
                break
            col ^= columns[piv]
        if col:
            piv = col.bit_length() - 1
            columns[piv] = col
            pairs.append((piv, k))

    pts = []
    for bi, di in pairs:
        b_diam, b_dim, _ = simplices[bi]
        d_diam, _, _ = simplices[di]
        if b_dim == max_dim and d_diam > b_diam:
            pts.append((b_diam, d_diam))
    return PersistenceDiagram(
        dimension=max_dim, points=np.asarray(pts).reshape(-1, 2), n_vertices=n
    )


def write_diagrams_csv(diagrams, path) -> None:
    """``dimension,birth,death`` rows; 17 significant digits round-trip."""
    with open(Path(path), "w") as f:
        f.write("dimension,birth,death\n")
        for diag in diagrams:
            for b, dth in diag.points:
                f.write(f"{diag.dimension},{b:.17g},{dth:.17g}\n")


def read_diagrams_csv(path, n_vertices: int = 0) -> dict[int, PersistenceDiagram]:
    """Inverse of :func:`write_diagrams_csv`, keyed by dimension."""
    by_dim: dict[int, list] = {}
    with open(Path(path)) as f:
        header = f.readline()
        if header.strip() != "dimension,birth,death":
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            dim_s, b_s, d_s = line.split(",")
            by_dim.setdefault(int(dim_s), []).append((float(b_s), float(d_s)))
    return {
        dim: PersistenceDiagram(
            dimension=dim,
            points=np.asarray(pts).reshape(-1, 2),
            n_vertices=n_vertices,
        )
        for dim, pts in by_dim.items()
    }
