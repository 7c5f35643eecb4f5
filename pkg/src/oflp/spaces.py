"""Metric spaces the facility can live in.

Four space kinds are supported: the unit segment [0,1], the unit square
[0,1]^2, the unit circle (segment [0,1] with 0 and 1 identified), and
finite trees with positive edge lengths.  Tree distances are measured
along tree paths, not in any ambient embedding.

Point representations by kind:
  segment  float in [0,1]
  square   pair of floats in [0,1]^2
  circle   float, reduced modulo 1 to the canonical representative in [0,1)
  tree     TreePoint (a vertex, or an interior point of an edge)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

SEGMENT = "segment"
SQUARE = "square"
CIRCLE = "circle"
TREE = "tree"
KINDS = (SEGMENT, SQUARE, CIRCLE, TREE)

# absolute tolerance for farthest-vertex ties and peripherality tests
TIE_TOL = 1e-9


class SpaceError(ValueError):
    """A point or argument falls outside the space's domain."""


class TreeGraph:
    """Finite tree: vertices 0..n-1, undirected edges with positive lengths.

    Validates connectivity and acyclicity (n-1 edges + connected) at
    construction.  Immutable by convention; all methods are read-only.
    """

    def __init__(self, n_vertices: int, edges: Sequence[tuple]):
        if n_vertices < 1:
            raise SpaceError("tree needs at least one vertex")
        edges = [(int(u), int(v), float(l)) for u, v, l in edges]
        if len(edges) != n_vertices - 1:
            raise SpaceError(
                f"tree on {n_vertices} vertices needs {n_vertices - 1} edges, got {len(edges)}"
            )
        adj: list[list[tuple]] = [[] for _ in range(n_vertices)]
        for idx, (u, v, l) in enumerate(edges):
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise SpaceError(f"edge {idx} endpoint out of range")
            if u == v:
                raise SpaceError(f"edge {idx} is a self-loop")
            if not (l > 0.0 and math.isfinite(l)):
                raise SpaceError(f"edge {idx} length must be positive and finite")
            adj[u].append((v, idx, l))
            adj[v].append((u, idx, l))
        # connectivity; together with the edge count this rules out cycles
        seen = [False] * n_vertices
        stack = [0]
        seen[0] = True
        while stack:
            w = stack.pop()
            for nb, _, _ in adj[w]:
                if not seen[nb]:
                    seen[nb] = True
                    stack.append(nb)
        if not all(seen):
            raise SpaceError("tree is not connected")
        self.n_vertices = n_vertices
        self.edges = edges
        self.adj = adj

    def vertex_distances(self, src: int) -> np.ndarray:
        """Path-sum distances from `src` to every vertex."""
        dist = np.full(self.n_vertices, -1.0)
        dist[src] = 0.0
        stack = [src]
        while stack:
            w = stack.pop()
            dw = dist[w]
            for nb, _, l in self.adj[w]:
                if dist[nb] < 0.0:
                    dist[nb] = dw + l
                    stack.append(nb)
        return dist

    def leaves(self) -> list[int]:
        if self.n_vertices == 1:
            return [0]
        return [v for v in range(self.n_vertices) if len(self.adj[v]) == 1]

    def __repr__(self):
        return f"TreeGraph(n_vertices={self.n_vertices}, edges={self.edges!r})"


@dataclass(frozen=True)
class TreePoint:
    """A point of a tree: either a vertex, or the interior of an edge.

    `offset` is measured from the edge's first endpoint, in edge-length
    units.  Offsets of exactly 0 or the full edge length canonicalize to
    the endpoint vertex (see `canonical_point`).
    """

    vertex: Optional[int] = None
    edge: Optional[int] = None
    offset: float = 0.0

    @staticmethod
    def at_vertex(v: int) -> "TreePoint":
        return TreePoint(vertex=int(v))

    @staticmethod
    def on_edge(edge: int, offset: float) -> "TreePoint":
        return TreePoint(edge=int(edge), offset=float(offset))


def canonical_point(tree: TreeGraph, p: TreePoint) -> TreePoint:
    """Validate a tree point and canonicalize edge endpoints to vertices."""
    if p.vertex is not None:
        if not (0 <= p.vertex < tree.n_vertices):
            raise SpaceError(f"vertex {p.vertex} out of range")
        return TreePoint(vertex=int(p.vertex))
    if p.edge is None:
        raise SpaceError("tree point needs a vertex or an edge")
    if not (0 <= p.edge < len(tree.edges)):
        raise SpaceError(f"edge {p.edge} out of range")
    u, v, l = tree.edges[p.edge]
    off = float(p.offset)
    if not (0.0 <= off <= l):
        raise SpaceError(f"offset {off} outside [0, {l}] on edge {p.edge}")
    if off == 0.0:
        return TreePoint(vertex=u)
    if off == l:
        return TreePoint(vertex=v)
    return TreePoint(edge=int(p.edge), offset=off)


class AugmentedTree:
    """A tree with extra points promoted to vertices, distances preserved.

    Base vertices keep their ids; new vertices get ids n, n+1, ... in
    edge order.  `point_vertex[i]` is the augmented-vertex id of the i-th
    input point, `origin[w]` maps an augmented vertex back to base
    coordinates, and `edge_origin[j]` records which base edge (and which
    offset range on it) the j-th augmented edge covers.
    """

    def __init__(self, base: TreeGraph, points: Sequence[TreePoint]):
        pts = [canonical_point(base, p) for p in points]
        by_edge: dict[int, set] = {}
        for p in pts:
            if p.edge is not None:
                by_edge.setdefault(p.edge, set()).add(p.offset)
        next_id = base.n_vertices
        interior_vertex: dict[tuple, int] = {}
        origin = [TreePoint(vertex=i) for i in range(base.n_vertices)]
        new_edges: list[tuple] = []
        edge_origin: list[tuple] = []
        for idx, (u, v, length) in enumerate(base.edges):
            chain = [(0.0, u)]
            for off in sorted(by_edge.get(idx, ())):
                interior_vertex[(idx, off)] = next_id
                origin.append(TreePoint(edge=idx, offset=off))
                chain.append((off, next_id))
                next_id += 1
            chain.append((length, v))
            for (o1, a), (o2, b) in zip(chain, chain[1:]):
                new_edges.append((a, b, o2 - o1))
                edge_origin.append((idx, o1, o2))
        self.base = base
        self.graph = TreeGraph(next_id, new_edges)
        self.origin = origin
        self.edge_origin = edge_origin
        self.point_vertex = [
            p.vertex if p.vertex is not None else interior_vertex[(p.edge, p.offset)]
            for p in pts
        ]

    def to_base(self, vertex_id: int) -> TreePoint:
        return self.origin[vertex_id]


def tree_distance(tree: TreeGraph, p: TreePoint, q: TreePoint) -> float:
    p = canonical_point(tree, p)
    q = canonical_point(tree, q)
    if p.vertex is not None and q.vertex is not None:
        return float(tree.vertex_distances(p.vertex)[q.vertex])
    aug = AugmentedTree(tree, [p, q])
    vp, vq = aug.point_vertex
    return float(aug.graph.vertex_distances(vp)[vq])


def _path_vertices(graph: TreeGraph, src: int, dst: int) -> list[int]:
    """Vertex sequence of the unique src->dst path."""
    parent = [-1] * graph.n_vertices
    parent[src] = src
    stack = [src]
    while stack:
        w = stack.pop()
        if w == dst:
            break
        for nb, _, _ in graph.adj[w]:
            if parent[nb] < 0:
                parent[nb] = w
                stack.append(nb)
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def tree_path_point(tree: TreeGraph, a: TreePoint, b: TreePoint, t: float) -> TreePoint:
    """The point w on the a-b path with d(a, w) = t * d(a, b)."""
    if not (0.0 <= t <= 1.0):
        raise SpaceError(f"interpolation parameter {t} outside [0, 1]")
    aug = AugmentedTree(tree, [a, b])
    va, vb = aug.point_vertex
    if va == vb:
        return aug.to_base(va)
    path = _path_vertices(aug.graph, va, vb)
    # edge lengths along the path
    lengths = []
    for x, y in zip(path, path[1:]):
        for nb, eidx, l in aug.graph.adj[x]:
            if nb == y:
                lengths.append((eidx, l))
                break
    total = sum(l for _, l in lengths)
    target = t * total
    eps = 1e-12 * max(1.0, total)
    acc = 0.0
    for (x, y), (eidx, l) in zip(zip(path, path[1:]), lengths):
        if target <= acc + l + eps:
            rem = target - acc
            if rem <= eps:
                return aug.to_base(x)
            if rem >= l - eps:
                return aug.to_base(y)
            base_edge, o1, o2 = aug.edge_origin[eidx]
            u, v, _ = aug.graph.edges[eidx]
            # o1 is the base offset at the stored u-endpoint of the edge
            off = o1 + rem if x == u else o2 - rem
            return canonical_point(tree, TreePoint(edge=base_edge, offset=off))
        acc += l
    return aug.to_base(path[-1])


def tree_farthest(
    tree: TreeGraph,
    frm: TreePoint,
    prefer: Optional[TreePoint] = None,
    tol: float = TIE_TOL,
) -> tuple[TreePoint, float]:
    """Vertex of `tree` farthest from `frm`.

    If `prefer` is a vertex attaining the maximum within `tol` it is
    returned; remaining ties break toward the smallest vertex id.
    """
    frm = canonical_point(tree, frm)
    if frm.vertex is not None:
        dist = tree.vertex_distances(frm.vertex)
    else:
        aug = AugmentedTree(tree, [frm])
        dist = aug.graph.vertex_distances(aug.point_vertex[0])[: tree.n_vertices]
    mx = float(dist.max())
    if prefer is not None:
        prefer = canonical_point(tree, prefer)
        if prefer.vertex is not None and dist[prefer.vertex] >= mx - tol:
            return TreePoint(vertex=prefer.vertex), float(dist[prefer.vertex])
    vid = int(np.nonzero(dist >= mx - tol)[0][0])
    return TreePoint(vertex=vid), float(dist[vid])


@dataclass(frozen=True)
class TreeSplit:
    """Outcome of splitting a tree at the midpoint of a path a-b.

    `sides[i]` is True when agent i lands in the component containing a.
    The midpoint itself belongs to the complement (the b side).
    """

    sides: tuple
    n_a: int
    n_b: int
    midpoint: TreePoint


def tree_split_at_midpoint(
    tree: TreeGraph, agents: Sequence[TreePoint], a: TreePoint, b: TreePoint
) -> TreeSplit:
    """Partition agents by the midpoint of the a-b path.

    The tree is augmented so agents and the midpoint become vertices
    (distances preserved); the a-side is the connected component of the
    augmented tree minus the midpoint that contains a.
    """
    d_ab = tree_distance(tree, a, b)
    if d_ab <= 0.0:
        raise SpaceError("degenerate split: a and b coincide")
    m = tree_path_point(tree, a, b, 0.5)
    agents = list(agents)
    aug = AugmentedTree(tree, agents + [a, b, m])
    agent_v = aug.point_vertex[: len(agents)]
    va = aug.point_vertex[-3]
    vm = aug.point_vertex[-1]
    # component of the augmented tree minus the midpoint, containing a
    comp = set()
    stack = [va]
    comp.add(va)
    while stack:
        w = stack.pop()
        for nb, _, _ in aug.graph.adj[w]:
            if nb != vm and nb not in comp:
                comp.add(nb)
                stack.append(nb)
    sides = tuple(v in comp for v in agent_v)
    n_a = sum(sides)
    return TreeSplit(sides=sides, n_a=n_a, n_b=len(agents) - n_a, midpoint=m)


def tree_diameter(tree: TreeGraph) -> float:
    """Largest vertex-to-vertex distance, by double sweep."""
    d0 = tree.vertex_distances(0)
    u = int(np.argmax(d0))
    return float(tree.vertex_distances(u).max())


def is_peripheral(tree: TreeGraph, v: TreePoint, tol: float = TIE_TOL) -> bool:
    """Whether vertex v is an endpoint of some diameter of the tree."""
    v = canonical_point(tree, v)
    if v.vertex is None:
        raise SpaceError("peripherality is defined for vertices")
    if tree.n_vertices == 1:
        return True
    diam = tree_diameter(tree)
    ecc = float(tree.vertex_distances(v.vertex).max())
    return ecc >= diam - tol


@dataclass(frozen=True)
class Space:
    """Which metric space an instance lives in."""

    kind: str
    tree: Optional[TreeGraph] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpaceError(f"unknown space kind {self.kind!r}")
        if (self.kind == TREE) != (self.tree is not None):
            raise SpaceError("tree graph must be present exactly for tree spaces")


def segment_space() -> Space:
    return Space(SEGMENT)


def square_space() -> Space:
    return Space(SQUARE)


def circle_space() -> Space:
    return Space(CIRCLE)


def tree_space(tree: TreeGraph) -> Space:
    return Space(TREE, tree=tree)


def circle_canonical(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise SpaceError("circle coordinate must be finite")
    return x % 1.0


def check_point(space: Space, p):
    """Validate `p` for `space`, returning its canonical representation."""
    if space.kind == SEGMENT:
        x = float(p)
        if not (0.0 <= x <= 1.0):
            raise SpaceError(f"segment point {x} outside [0, 1]")
        return x
    if space.kind == SQUARE:
        x, y = float(p[0]), float(p[1])
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise SpaceError(f"square point {(x, y)} outside [0, 1]^2")
        return (x, y)
    if space.kind == CIRCLE:
        return circle_canonical(p)
    return canonical_point(space.tree, p)


def distance(space: Space, p, q) -> float:
    """Metric distance between two points of the space."""
    p = check_point(space, p)
    q = check_point(space, q)
    if space.kind == SEGMENT:
        return abs(p - q)
    if space.kind == SQUARE:
        return math.hypot(p[0] - q[0], p[1] - q[1])
    if space.kind == CIRCLE:
        diff = abs(p - q)
        return min(diff, 1.0 - diff)
    return tree_distance(space.tree, p, q)
