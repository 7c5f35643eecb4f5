"""Empirical strategyproofness checks by deviation search.

These are falsifiers, not provers: unilateral checks scan a misreport
grid exhaustively, coalition checks enumerate coalitions and joint
misreports up to a budget (seeded subsampling beyond it).  Misreports
that produce identical vote tallies produce identical outcomes, so joint
enumeration runs over tally-equivalence classes of the grid, each
represented by its first grid point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, inf
from typing import Optional

import numpy as np

from ._evaluators import Evaluator
from .spaces import (
    CIRCLE,
    SEGMENT,
    SQUARE,
    TREE,
    Space,
    SpaceError,
    TreePoint,
    distance,
)
from .welfare import DUAL, OBNOXIOUS, Profile

GAIN_TOL = 1e-12


@dataclass(frozen=True)
class DeviationReport:
    """Result of a deviation search.

    `misreports` holds (agent index, reported point, reported type or
    None).  `gain_factor` is the smallest utility ratio after/before over
    the coalition (inf when a zero utility became positive); 1.0 when no
    violation was found.
    """

    violated: bool
    coalition: tuple = ()
    misreports: tuple = ()
    utilities_before: tuple = ()
    utilities_after: tuple = ()
    gain_factor: float = 1.0


def agent_utility(space: Space, location, chosen, mode: str = OBNOXIOUS, agent_type=None) -> float:
    """True utility of an agent at `location` for facility at `chosen`."""
    d = distance(space, chosen, location)
    if mode == DUAL and agent_type == 1:
        return 1.0 - d
    return d


def misreport_grid(space: Space, resolution: int):
    """Evenly spaced candidate reports: `resolution` points per dimension
    (per edge for trees, vertices included)."""
    if resolution < 2:
        raise SpaceError("misreport grid resolution must be at least 2")
    if space.kind in (SEGMENT, CIRCLE):
        return list(np.linspace(0.0, 1.0, resolution))
    if space.kind == SQUARE:
        axis = np.linspace(0.0, 1.0, resolution)
        return [(float(x), float(y)) for x in axis for y in axis]
    pts = [TreePoint.at_vertex(v) for v in range(space.tree.n_vertices)]
    for e, (_, _, length) in enumerate(space.tree.edges):
        for off in np.linspace(0.0, length, resolution)[1:-1]:
            pts.append(TreePoint.on_edge(e, float(off)))
    return pts


def _grid_classes(ev: Evaluator, grid, include_type_flips: bool):
    """Tally-equivalence classes of the grid.

    Returns (contribs, representatives) where representatives[i] is the
    first grid entry (point, type) realizing contribs[i].
    """
    if ev.mode == DUAL:
        entries = []
        for x in grid:
            if include_type_flips:
                entries.extend(((x, 0), (x, 1)))
            else:
                entries.append((x, None))
        reps, contribs = [], []
        seen = {}
        for x, t in entries:
            ts = [t] if t is not None else [0, 1]
            for tt in ts if t is None else [t]:
                c = int(ev.contrib_of_reports([x], [tt])[0, 0])
                if c not in seen:
                    seen[c] = True
                    reps.append((x, tt if include_type_flips else None))
                    contribs.append(np.array([c]))
        return contribs, reps
    rows = ev.contrib_of_reports(grid)
    _, first = np.unique(rows, axis=0, return_index=True)
    first = sorted(int(i) for i in first)  # keep first-seen grid order
    return [rows[i] for i in first], [(grid[i], None) for i in first]


def check_unilateral(
    space: Space,
    profile: Profile,
    prediction,
    lam: float,
    resolution: int = 101,
    include_type_flips: bool = False,
    tol: float = GAIN_TOL,
) -> DeviationReport:
    """Exhaustive single-agent misreport search over the grid.

    Violated iff some agent can strictly increase its true utility by
    more than `tol` with a single replaced report.
    """
    ev = Evaluator(space, profile, prediction, lam)
    cur = ev.outcome_index()
    grid = misreport_grid(space, resolution)
    contribs, reps = _grid_classes(ev, grid, include_type_flips)
    for i in range(ev.n):
        base = ev.total - ev.contrib[i]
        u_cur = ev.utilities[i, cur]
        for c, rep in zip(contribs, reps):
            o = ev.outcome_index(base + c)
            if o != cur and ev.utilities[i, o] > u_cur + tol:
                u_new = float(ev.utilities[i, o])
                gain = inf if u_cur <= 0.0 else u_new / u_cur
                return DeviationReport(
                    violated=True,
                    coalition=(i,),
                    misreports=((i, rep[0], rep[1]),),
                    utilities_before=(float(u_cur),),
                    utilities_after=(u_new,),
                    gain_factor=gain,
                )
    return DeviationReport(violated=False)


def check_coalition(
    space: Space,
    profile: Profile,
    prediction,
    lam: float,
    coalition_size: int,
    resolution: int = 101,
    gamma: float = 1.0,
    include_type_flips: bool = False,
    seed: int = 0,
    budget: int = 100_000,
    tol: float = GAIN_TOL,
) -> DeviationReport:
    """Search for a coalition (size up to `coalition_size`) whose joint
    misreport strictly beats gamma times every member's truthful utility.

    Evaluates u_after > gamma * u_before + tol multiplicatively, so a
    zero truthful utility can only be "beaten" by a positive one.
    Exhaustive when the work fits in `budget`, else seeded subsampling.
    """
    n = profile.n
    if not (1 <= coalition_size <= n):
        raise SpaceError(f"coalition size {coalition_size} outside [1, {n}]")
    if gamma < 1.0:
        raise SpaceError("gamma must be at least 1")
    ev = Evaluator(space, profile, prediction, lam)
    cur = ev.outcome_index()
    grid = misreport_grid(space, resolution)
    contribs, reps = _grid_classes(ev, grid, include_type_flips)
    n_cls = len(contribs)

    def try_deviation(coalition, assignment) -> Optional[DeviationReport]:
        total = ev.total.copy()
        for i, c in zip(coalition, assignment):
            total = total - ev.contrib[i] + contribs[c]
        o = ev.outcome_index(total)
        if o == cur:
            return None
        before, after = [], []
        for i in coalition:
            ub, ua = float(ev.utilities[i, cur]), float(ev.utilities[i, o])
            if not ua > gamma * ub + tol:
                return None
            before.append(ub)
            after.append(ua)
        gain = min(
            (inf if b <= 0.0 else a / b) for a, b in zip(after, before)
        )
        return DeviationReport(
            violated=True,
            coalition=tuple(coalition),
            misreports=tuple(
                (i, reps[c][0], reps[c][1]) for i, c in zip(coalition, assignment)
            ),
            utilities_before=tuple(before),
            utilities_after=tuple(after),
            gain_factor=gain,
        )

    total_work = sum(
        comb(n, s) * n_cls**s for s in range(1, coalition_size + 1)
    )
    if total_work <= budget:
        for s in range(1, coalition_size + 1):
            for coalition in itertools.combinations(range(n), s):
                for assignment in itertools.product(range(n_cls), repeat=s):
                    rep = try_deviation(coalition, assignment)
                    if rep is not None:
                        return rep
    else:
        rng = np.random.default_rng(seed)
        for _ in range(budget):
            s = int(rng.integers(1, coalition_size + 1))
            coalition = tuple(sorted(rng.choice(n, size=s, replace=False).tolist()))
            assignment = tuple(rng.integers(0, n_cls, size=s).tolist())
            rep = try_deviation(coalition, assignment)
            if rep is not None:
                return rep
    return DeviationReport(violated=False)
