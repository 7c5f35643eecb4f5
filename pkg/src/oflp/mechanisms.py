"""The prediction-augmented mechanisms and the threshold family.

Every mechanism takes a trust parameter lam in [0, 1]: the predicted
location receives lam*n bonus votes (kept as an exact real; for dyadic
lam and integer counts the float comparisons are exact).  lam=1 forces
the prediction on segment, square and circle; on trees the prediction
may not be among the two possible outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .spaces import (
    CIRCLE,
    SEGMENT,
    SQUARE,
    TREE,
    Space,
    SpaceError,
    TreeGraph,
    TreePoint,
    canonical_point,
    check_point,
    circle_canonical,
    is_peripheral,
    tree_farthest,
    tree_split_at_midpoint,
)
from .welfare import DUAL, OBNOXIOUS, ContractError, Profile


@dataclass(frozen=True)
class Trace:
    """Chosen location plus the vote counts that produced it."""

    chosen: object
    counts: dict
    prediction_bonus: float
    details: dict = field(default_factory=dict)


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not (0.0 <= lam <= 1.0):
        raise SpaceError(f"lambda {lam} outside [0, 1]")
    return lam


def _check_bit(x) -> int:
    x = float(x)
    if x not in (0.0, 1.0):
        raise SpaceError(f"prediction coordinate {x} is not 0 or 1")
    return int(x)


def bit_outcome(n_low: int, n_high: int, pred_bit: int, bonus: float) -> int:
    """One coordinate of the voting rule.

    n_low agents (coordinate in [0, 1/2]) vote for output 1, n_high
    (coordinate in (1/2, 1]) vote for output 0; the predicted bit gets
    the bonus votes and wins ties.
    """
    votes_one = n_low + (bonus if pred_bit == 1 else 0.0)
    votes_zero = n_high + (bonus if pred_bit == 0 else 0.0)
    if pred_bit == 1:
        return 1 if votes_one >= votes_zero else 0
    return 0 if votes_zero >= votes_one else 1


def robust_coordinatewise_voting(
    profile: Profile, prediction, lam: float, dim: int
) -> Trace:
    """Majority voting per coordinate with lam*n bonus votes for the
    predicted corner; output is a corner of [0,1]^dim."""
    lam = _check_lambda(lam)
    if dim not in (1, 2):
        raise SpaceError("dimension must be 1 or 2")
    n = profile.n
    if dim == 1:
        pts = np.asarray([check_point(Space(SEGMENT), p) for p in profile.points])
        pts = pts.reshape(n, 1)
        pred = (_check_bit(prediction),)
    else:
        pts_list = [check_point(Space(SQUARE), p) for p in profile.points]
        pts = np.asarray(pts_list, dtype=float).reshape(n, 2)
        pred = (_check_bit(prediction[0]), _check_bit(prediction[1]))
    bonus = lam * n
    bits = []
    per_coord = []
    for k in range(dim):
        n_low = int(np.count_nonzero(pts[:, k] <= 0.5)) if n else 0
        n_high = n - n_low
        per_coord.append((n_low, n_high))
        bits.append(bit_outcome(n_low, n_high, pred[k], bonus))
    chosen = float(bits[0]) if dim == 1 else (float(bits[0]), float(bits[1]))
    return Trace(
        chosen=chosen,
        counts={"per_coordinate": tuple(per_coord)},
        prediction_bonus=bonus,
    )


def circle_outcome(n_p: int, n_q: int, lam: float, n: int) -> int:
    """0 = keep the predicted point, 1 = its antipode."""
    return 0 if n_p <= n_q + lam * n else 1


def robust_majority_circle(profile: Profile, prediction, lam: float) -> Trace:
    """Return the predicted point unless the quarter-arc around it holds
    more than n_Q + lam*n agents; then return the antipode."""
    lam = _check_lambda(lam)
    pc = circle_canonical(prediction)
    n = profile.n
    xs = np.asarray([circle_canonical(x) for x in profile.points])
    # rotate so the prediction sits at 1/4; its arc becomes (0, 1/2]
    rel = (xs - pc + 0.25) % 1.0
    n_p = int(np.count_nonzero((rel > 0.0) & (rel <= 0.5))) if n else 0
    n_q = n - n_p
    q = (pc + 0.5) % 1.0
    chosen = pc if circle_outcome(n_p, n_q, lam, n) == 0 else q
    return Trace(
        chosen=chosen,
        counts={"n_P": n_p, "n_Q": n_q},
        prediction_bonus=lam * n,
        details={"antipode": q},
    )


def tree_outcome(n_a: int, n_b: int, lam: float, n: int) -> int:
    """0 = the far endpoint a, 1 = the near endpoint b."""
    return 0 if n_a + lam * n <= n_b else 1


def tree_mechanism_endpoints(
    tree: TreeGraph, prediction: TreePoint
) -> tuple[TreePoint, TreePoint]:
    """The two candidate outputs a (farthest vertex from the prediction)
    and b (farthest from a, the prediction itself when possible).

    On the agent-augmented tree the farthest vertex from any vertex is
    always attained at an original vertex (interior points of an edge are
    strictly closer than its farther endpoint), so the search can run on
    the base tree regardless of where agents sit.
    """
    prediction = canonical_point(tree, prediction)
    if prediction.vertex is None:
        raise SpaceError("tree prediction must be a vertex")
    a, _ = tree_farthest(tree, prediction)
    b, _ = tree_farthest(tree, a, prefer=prediction)
    return a, b


def robust_majority_tree(
    tree: TreeGraph, profile: Profile, prediction: TreePoint, lam: float
) -> Trace:
    lam = _check_lambda(lam)
    if tree.n_vertices < 1:
        raise SpaceError("empty tree")
    a, b = tree_mechanism_endpoints(tree, prediction)
    n = profile.n
    peripheral = is_peripheral(tree, canonical_point(tree, prediction))
    if a == b:  # single-vertex tree
        return Trace(
            chosen=a,
            counts={"n_1": 0, "n_2": n},
            prediction_bonus=lam * n,
            details={"a": a, "b": b, "midpoint": a, "prediction_peripheral": peripheral},
        )
    split = tree_split_at_midpoint(tree, profile.points, a, b)
    chosen = a if tree_outcome(split.n_a, split.n_b, lam, n) == 0 else b
    return Trace(
        chosen=chosen,
        counts={"n_1": split.n_a, "n_2": split.n_b},
        prediction_bonus=lam * n,
        details={
            "a": a,
            "b": b,
            "midpoint": split.midpoint,
            "sides": split.sides,
            "prediction_peripheral": peripheral,
        },
    )


def dual_outcome(n_1: int, n_2: int) -> int:
    """1 iff the below-threshold transformed locations hold a strict
    majority (in the frame where the prediction is 1)."""
    return 1 if n_1 > n_2 else 0


def transformed_robust_majority(profile: Profile, prediction, lam: float) -> Trace:
    """Dual-preference rule: transform type-1 agents to 1 - x_i, count
    transformed locations at or below (1 - lam)/2, return the prediction
    on a strict majority.

    Stated for prediction 1; for prediction 0 the coordinate flip
    x -> 1 - x is applied before and after.
    """
    lam = _check_lambda(lam)
    if profile.types is None:
        raise ContractError("dual mechanism needs agent types")
    pred = _check_bit(prediction)
    n = profile.n
    xs = np.asarray([check_point(Space(SEGMENT), p) for p in profile.points])
    ys = np.asarray(profile.types, dtype=float)
    if pred == 0:
        xs = 1.0 - xs
    x_star = xs * (1.0 - ys) + (1.0 - xs) * ys
    thr = (1.0 - lam) / 2.0
    n_1 = int(np.count_nonzero(x_star <= thr)) if n else 0
    n_2 = n - n_1
    out = dual_outcome(n_1, n_2)
    chosen = float(out if pred == 1 else 1 - out)
    return Trace(
        chosen=chosen,
        counts={"n_1": n_1, "n_2": n_2},
        prediction_bonus=lam * n,
        details={"x_star": tuple(float(v) for v in x_star), "flipped": pred == 0},
    )


def threshold_mechanism(
    k: int, profile: Profile, r: float = 0.0, s: float = 1.0
) -> float:
    """Deterministic strategyproof segment rule: output r when at most k
    agents sit at or below the midpoint (r+s)/2, else s."""
    n = profile.n
    if not (0 <= k <= n):
        raise SpaceError(f"threshold k={k} outside [0, {n}]")
    if not r < s:
        raise SpaceError("threshold mechanism needs r < s")
    v = (r + s) / 2.0
    count = sum(1 for x in profile.points if float(x) <= v)
    return r if count <= k else s


def run_mechanism(space: Space, profile: Profile, prediction, lam: float) -> Trace:
    """Dispatch to the space's mechanism (dual rule when types present)."""
    if profile.types is not None:
        if space.kind != SEGMENT:
            raise ContractError("typed profiles are segment-only")
        return transformed_robust_majority(profile, prediction, lam)
    if space.kind == SEGMENT:
        return robust_coordinatewise_voting(profile, prediction, lam, dim=1)
    if space.kind == SQUARE:
        return robust_coordinatewise_voting(profile, prediction, lam, dim=2)
    if space.kind == CIRCLE:
        return robust_majority_circle(profile, prediction, lam)
    return robust_majority_tree(space.tree, profile, prediction, lam)
