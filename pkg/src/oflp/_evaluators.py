"""Count-based mechanism evaluators.

Every mechanism's output is a function of small vote tallies, and each
agent contributes to those tallies through a membership indicator that
depends only on its own report.  An Evaluator precomputes the per-agent
indicators, the (at most four) possible outputs, and each agent's true
utility at every possible output, so deviation searches and multi-lambda
sweeps re-evaluate the mechanism in O(1) per query.

`tests/test_game_checks.py` cross-checks evaluator outcomes against the
full mechanism implementations on fuzzed instances.
"""

from __future__ import annotations

import numpy as np

from .mechanisms import (
    bit_outcome,
    circle_outcome,
    dual_outcome,
    tree_mechanism_endpoints,
    tree_outcome,
)
from .spaces import (
    CIRCLE,
    SEGMENT,
    SQUARE,
    TREE,
    AugmentedTree,
    Space,
    TreePoint,
    canonical_point,
    check_point,
    circle_canonical,
    distance,
    tree_distance,
    tree_path_point,
)
from .welfare import DUAL, OBNOXIOUS, Profile


class Evaluator:
    """Fast re-evaluation of one mechanism on one instance.

    Attributes:
      outcome_points: the possible outputs, as points of the space.
      contrib: (n, d) integer tally contributions, one row per agent.
      total: column sums of contrib.
      utilities: (n, len(outcome_points)) true utilities of each agent at
        each possible output.
    """

    def __init__(self, space: Space, profile: Profile, prediction, lam: float):
        self.space = space
        self.profile = profile
        self.lam = float(lam)
        self.n = profile.n
        self.mode = DUAL if profile.types is not None else OBNOXIOUS
        kind = space.kind
        if self.mode == DUAL:
            self._init_dual(prediction)
        elif kind == SEGMENT:
            self._init_segment(prediction)
        elif kind == SQUARE:
            self._init_square(prediction)
        elif kind == CIRCLE:
            self._init_circle(prediction)
        else:
            self._init_tree(prediction)
        self.total = self.contrib.sum(axis=0) if self.n else np.zeros(
            self.contrib.shape[1], dtype=np.int64
        )
        self._build_utilities()

    # ---- per-space setup ----

    def _init_segment(self, prediction):
        self.pred_bit = int(float(prediction))
        xs = np.asarray([float(p) for p in self.profile.points])
        self.contrib = (xs <= 0.5).astype(np.int64).reshape(self.n, 1)
        self.outcome_points = [0.0, 1.0]

    def _init_square(self, prediction):
        self.pred_bits = (int(float(prediction[0])), int(float(prediction[1])))
        pts = np.asarray([check_point(self.space, p) for p in self.profile.points])
        pts = pts.reshape(self.n, 2)
        self.contrib = (pts <= 0.5).astype(np.int64)
        self.outcome_points = [
            (0.0, 0.0),
            (0.0, 1.0),
            (1.0, 0.0),
            (1.0, 1.0),
        ]  # index = 2*bx + by

    def _init_circle(self, prediction):
        self.pc = circle_canonical(prediction)
        xs = np.asarray([circle_canonical(x) for x in self.profile.points])
        rel = (xs - self.pc + 0.25) % 1.0
        self.contrib = ((rel > 0.0) & (rel <= 0.5)).astype(np.int64).reshape(self.n, 1)
        self.outcome_points = [self.pc, (self.pc + 0.5) % 1.0]

    def _init_tree(self, prediction):
        tree = self.space.tree
        a, b = tree_mechanism_endpoints(tree, prediction)
        self.tree_a, self.tree_b = a, b
        self.outcome_points = [a, b]
        if a == b:  # single-vertex tree: everyone counts toward n_2
            self._side = lambda pts: np.zeros(len(pts), dtype=np.int64)
            self.contrib = np.zeros((self.n, 1), dtype=np.int64)
            return
        m = tree_path_point(tree, a, b, 0.5)
        aug = AugmentedTree(tree, [m])
        vm = aug.point_vertex[0]
        va = canonical_point(tree, a).vertex  # a is a vertex; base ids are preserved
        # component labels of augmented vertices with the midpoint removed
        label = np.zeros(aug.graph.n_vertices, dtype=np.int64)
        stack = [va]
        label[va] = 1
        while stack:
            w = stack.pop()
            for nb, _, _ in aug.graph.adj[w]:
                if nb != vm and label[nb] == 0:
                    label[nb] = 1
                    stack.append(nb)
        label[vm] = 0  # the midpoint belongs to the b side
        # locate each base edge's augmented sub-edges for interior queries
        sub_by_edge: dict[int, list[tuple]] = {}
        for j, (e, o1, o2) in enumerate(aug.edge_origin):
            u, v, _ = aug.graph.edges[j]
            sub_by_edge.setdefault(e, []).append((o1, o2, u, v))
        for subs in sub_by_edge.values():
            subs.sort()
        m_vertex = aug.to_base(vm)

        def side(points):
            out = np.empty(len(points), dtype=np.int64)
            for i, p in enumerate(points):
                p = canonical_point(tree, p)
                if p.vertex is not None:
                    out[i] = label[p.vertex]
                    continue
                if p.edge == m_vertex.edge and p.offset == m_vertex.offset:
                    out[i] = 0
                    continue
                for o1, o2, u, v in sub_by_edge[p.edge]:
                    if o1 <= p.offset <= o2:
                        # interior of a sub-edge: same side as its non-midpoint end
                        out[i] = label[v] if u == vm else label[u]
                        break
            return out

        self._side = side
        self.contrib = side(self.profile.points).reshape(self.n, 1)

    def _init_dual(self, prediction):
        self.pred_bit = int(float(prediction))
        xs = np.asarray([float(p) for p in self.profile.points])
        ys = np.asarray(self.profile.types, dtype=float)
        self.contrib = self._dual_contrib(xs, ys).reshape(self.n, 1)
        self.outcome_points = [0.0, 1.0]

    def _dual_contrib(self, xs, ys):
        if self.pred_bit == 0:
            xs = 1.0 - xs
        x_star = xs * (1.0 - ys) + (1.0 - xs) * ys
        return (x_star <= (1.0 - self.lam) / 2.0).astype(np.int64)

    def _build_utilities(self):
        n_out = len(self.outcome_points)
        u = np.empty((self.n, n_out))
        for j, pt in enumerate(self.outcome_points):
            for i, x in enumerate(self.profile.points):
                d = distance(self.space, pt, x)
                if self.mode == DUAL and self.profile.types[i] == 1:
                    u[i, j] = 1.0 - d
                else:
                    u[i, j] = d
        self.utilities = u

    # ---- queries ----

    def outcome_index(self, total=None, lam: float | None = None) -> int:
        """Index into outcome_points given tally totals (defaults: truthful)."""
        if total is None:
            total = self.total
        if lam is None:
            lam = self.lam
        n = self.n
        kind = self.space.kind
        if self.mode == DUAL:
            if lam != self.lam:
                raise ValueError("dual tallies are lambda-specific")
            out = dual_outcome(int(total[0]), n - int(total[0]))
            return out if self.pred_bit == 1 else 1 - out
        bonus = lam * n
        if kind == SEGMENT:
            return bit_outcome(int(total[0]), n - int(total[0]), self.pred_bit, bonus)
        if kind == SQUARE:
            bx = bit_outcome(int(total[0]), n - int(total[0]), self.pred_bits[0], bonus)
            by = bit_outcome(int(total[1]), n - int(total[1]), self.pred_bits[1], bonus)
            return 2 * bx + by
        if kind == CIRCLE:
            return circle_outcome(int(total[0]), n - int(total[0]), lam, n)
        return tree_outcome(int(total[0]), n - int(total[0]), lam, n)

    def contrib_of_reports(self, reports, types=None) -> np.ndarray:
        """Tally contributions of hypothetical reports.

        `reports` format matches the space's point type; for dual mode
        `types` carries the reported type bits.
        """
        kind = self.space.kind
        if self.mode == DUAL:
            xs = np.asarray(reports, dtype=float)
            ys = np.asarray(types, dtype=float)
            return self._dual_contrib(xs, ys).reshape(-1, 1)
        if kind == SEGMENT:
            xs = np.asarray(reports, dtype=float)
            return (xs <= 0.5).astype(np.int64).reshape(-1, 1)
        if kind == SQUARE:
            pts = np.asarray(reports, dtype=float).reshape(-1, 2)
            return (pts <= 0.5).astype(np.int64)
        if kind == CIRCLE:
            xs = np.asarray([circle_canonical(x) for x in reports])
            rel = (xs - self.pc + 0.25) % 1.0
            return ((rel > 0.0) & (rel <= 0.5)).astype(np.int64).reshape(-1, 1)
        return self._side(list(reports)).reshape(-1, 1)
