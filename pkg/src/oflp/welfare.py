"""Social welfare, exact optima via closed-form candidate sets, and an
independent grid oracle for cross-checking.

Obnoxious welfare of a location y is the sum of agent distances to y.
In the dual-preference setting (segment only) type-1 agents contribute
1 - d(y, x_i) and type-0 agents contribute d(y, x_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .spaces import (
    CIRCLE,
    SEGMENT,
    SQUARE,
    TREE,
    AugmentedTree,
    Space,
    SpaceError,
    TreePoint,
    check_point,
)

OBNOXIOUS = "obnoxious"
DUAL = "dual"


class ContractError(ValueError):
    """Welfare model and profile disagree (e.g. dual mode without types)."""


@dataclass(frozen=True)
class Profile:
    """Reported agent locations, with optional type bits for the dual setting.

    Type 1 agents want the facility near, type 0 agents want it far.
    """

    points: tuple
    types: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if self.types is not None:
            types = tuple(int(t) for t in self.types)
            if len(types) != len(self.points):
                raise ContractError("types must have the same length as points")
            if any(t not in (0, 1) for t in types):
                raise ContractError("types must be 0/1 bits")
            object.__setattr__(self, "types", types)

    @property
    def n(self) -> int:
        return len(self.points)


def _check_mode(space: Space, profile: Profile, mode: str) -> None:
    if mode not in (OBNOXIOUS, DUAL):
        raise ContractError(f"unknown welfare mode {mode!r}")
    if mode == DUAL:
        if profile.types is None:
            raise ContractError("dual welfare needs agent types")
        if space.kind != SEGMENT:
            raise ContractError("dual welfare is defined on the segment only")


def _coords(space: Space, profile: Profile) -> np.ndarray:
    pts = [check_point(space, p) for p in profile.points]
    return np.asarray(pts, dtype=float)


def social_welfare(space: Space, profile: Profile, y, mode: str = OBNOXIOUS) -> float:
    """Welfare of placing the facility at y."""
    _check_mode(space, profile, mode)
    y = check_point(space, y)
    if profile.n == 0:
        return 0.0
    if space.kind == TREE:
        aug = AugmentedTree(space.tree, list(profile.points) + [y])
        dist = aug.graph.vertex_distances(aug.point_vertex[-1])
        return float(sum(dist[v] for v in aug.point_vertex[:-1]))
    xs = _coords(space, profile)
    if mode == DUAL:
        d = np.abs(xs - y)
        t = np.asarray(profile.types)
        return float(np.where(t == 1, 1.0 - d, d).sum())
    if space.kind == SEGMENT:
        return float(K.seg_welfare(xs, y))
    if space.kind == CIRCLE:
        return float(K.circle_welfare(xs, y))
    return float(K.square_welfare(xs[:, 0], xs[:, 1], y[0], y[1]))


def _candidates(space: Space, profile: Profile, mode: str) -> list:
    """Exact argmax candidate set, in lexicographic order.

    Welfare is convex on segment/square (optimum at an extreme point) and
    piecewise linear on the circle with breakpoints only at agent
    positions and their antipodes; tree optima are attained at leaves.
    Dual welfare on the segment is piecewise linear with breakpoints at
    agent positions.
    """
    if mode == DUAL:
        cands = {0.0, 1.0}
        cands.update(float(x) for x in profile.points)
        return sorted(cands)
    if space.kind == SEGMENT:
        return [0.0, 1.0]
    if space.kind == SQUARE:
        return [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
    if space.kind == CIRCLE:
        cands = {0.0} if profile.n == 0 else set()
        for x in profile.points:
            x = check_point(space, x)
            cands.add(x)
            cands.add((x + 0.5) % 1.0)
        return sorted(cands)
    return [TreePoint.at_vertex(v) for v in space.tree.leaves()]


def optimal_location(space: Space, profile: Profile, mode: str = OBNOXIOUS):
    """Welfare-maximizing location and its value.

    Ties break toward the lexicographically smallest candidate (smallest
    vertex id for trees).
    """
    _check_mode(space, profile, mode)
    best = None
    best_val = -math.inf
    for cand in _candidates(space, profile, mode):
        val = social_welfare(space, profile, cand, mode)
        if val > best_val:
            best, best_val = cand, val
    return best, float(best_val)


def _square_grid_max(ax, ay, m):
    """Exact max of obnoxious welfare over the (m+1)^2 lattice.

    Branch and bound on index rectangles: welfare is a sum of n functions
    that are 1-Lipschitz in the Euclidean metric, so the value inside a
    rectangle never exceeds the center value plus n times the center-to-
    corner radius.  Uses only the metric bound, no convexity.
    """
    n = ax.shape[0]
    h = 1.0 / m
    # seed with the four corners and the center
    seeds_x = np.array([0.0, 0.0, 1.0, 1.0, (m // 2) * h])
    seeds_y = np.array([0.0, 1.0, 0.0, 1.0, (m // 2) * h])
    vals = K.square_welfare_many(ax, ay, seeds_x, seeds_y)
    j = int(np.argmax(vals))
    best_val = float(vals[j])
    best_pt = (float(seeds_x[j]), float(seeds_y[j]))
    stack = [(0, m, 0, m)]
    while stack:
        ix0, ix1, iy0, iy1 = stack.pop()
        nx, ny = ix1 - ix0 + 1, iy1 - iy0 + 1
        if nx * ny <= 64:
            gx, gy = np.meshgrid(
                np.arange(ix0, ix1 + 1) * h, np.arange(iy0, iy1 + 1) * h, indexing="ij"
            )
            gx, gy = gx.ravel(), gy.ravel()
            block = K.square_welfare_many(ax, ay, gx, gy)
            jj = int(np.argmax(block))
            if block[jj] > best_val:
                best_val = float(block[jj])
                best_pt = (float(gx[jj]), float(gy[jj]))
            continue
        cx = 0.5 * (ix0 + ix1) * h
        cy = 0.5 * (iy0 + iy1) * h
        r = math.hypot((ix1 - ix0) * h / 2.0, (iy1 - iy0) * h / 2.0)
        if K.square_welfare(ax, ay, cx, cy) + n * r <= best_val + 1e-12:
            continue
        if nx >= ny:
            mid = (ix0 + ix1) // 2
            stack.append((ix0, mid, iy0, iy1))
            stack.append((mid + 1, ix1, iy0, iy1))
        else:
            mid = (iy0 + iy1) // 2
            stack.append((ix0, ix1, iy0, mid))
            stack.append((ix0, ix1, mid + 1, iy1))
    return best_pt, best_val


def _tree_grid_max(space: Space, profile: Profile, m: int):
    tree = space.tree
    aug = AugmentedTree(tree, list(profile.points))
    n = profile.n
    # distances from every agent to every augmented vertex
    if n:
        D = np.stack([aug.graph.vertex_distances(v) for v in aug.point_vertex])
    else:
        D = np.zeros((0, aug.graph.n_vertices))
    vertex_vals = D[:, : tree.n_vertices].sum(axis=0) if n else np.zeros(tree.n_vertices)
    best_pt = TreePoint.at_vertex(0)
    best_val = float(vertex_vals[0])
    for v in range(1, tree.n_vertices):
        if vertex_vals[v] > best_val:
            best_val = float(vertex_vals[v])
            best_pt = TreePoint.at_vertex(v)
    # group augmented edges by base edge, then evaluate the per-edge grid
    by_base: dict[int, list[int]] = {}
    for j, (e, _, _) in enumerate(aug.edge_origin):
        by_base.setdefault(e, []).append(j)
    for e, (_, _, length) in enumerate(tree.edges):
        ts = np.linspace(0.0, length, m + 1)
        sub = sorted(by_base[e], key=lambda j: aug.edge_origin[j][1])
        bounds = [aug.edge_origin[j][1] for j in sub] + [length]
        which = np.clip(np.searchsorted(bounds, ts, side="right") - 1, 0, len(sub) - 1)
        for k, j in enumerate(sub):
            sel = ts[which == k]
            if sel.size == 0:
                continue
            _, o1, o2 = aug.edge_origin[j]
            u, v, _ = aug.graph.edges[j]
            if n:
                vals = np.minimum(
                    D[:, u][:, None] + (sel - o1), D[:, v][:, None] + (o2 - sel)
                ).sum(axis=0)
            else:
                vals = np.zeros(sel.size)
            jj = int(np.argmax(vals))
            if vals[jj] > best_val:
                best_val = float(vals[jj])
                best_pt = check_point(space, TreePoint.on_edge(e, float(sel[jj])))
    return best_pt, best_val


def grid_oracle(space: Space, profile: Profile, m: int, mode: str = OBNOXIOUS):
    """Best welfare over an evenly spaced grid of resolution m.

    Segment/circle use m+1 points, the square the (m+1)x(m+1) lattice,
    trees m+1 points per edge.  Since each distance term is 1-Lipschitz
    along geodesics, the true optimum exceeds the returned value by at
    most n*h/2 where h is the grid step.
    """
    _check_mode(space, profile, mode)
    if m < 2:
        raise SpaceError("grid resolution must be at least 2")
    if space.kind == SEGMENT:
        grid = np.linspace(0.0, 1.0, m + 1)
        xs = _coords(space, profile)
        if mode == DUAL:
            d = np.abs(xs[:, None] - grid[None, :])
            t = np.asarray(profile.types)[:, None]
            vals = np.where(t == 1, 1.0 - d, d).sum(axis=0) if profile.n else np.zeros(m + 1)
        else:
            vals = K.seg_welfare_many(xs, grid) if profile.n else np.zeros(m + 1)
        j = int(np.argmax(vals))
        return float(grid[j]), float(vals[j])
    if space.kind == CIRCLE:
        grid = np.arange(m + 1) / m % 1.0
        xs = _coords(space, profile)
        vals = K.circle_welfare_many(xs, grid) if profile.n else np.zeros(m + 1)
        j = int(np.argmax(vals))
        return float(grid[j]), float(vals[j])
    if space.kind == SQUARE:
        xs = _coords(space, profile)
        if profile.n == 0:
            return (0.0, 0.0), 0.0
        pt, val = _square_grid_max(xs[:, 0], xs[:, 1], m)
        return pt, val
    return _tree_grid_max(space, profile, m)
