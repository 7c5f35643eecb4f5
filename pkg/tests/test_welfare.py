import math

import numpy as np
import pytest

from oflp.spaces import (
    SpaceError,
    TreeGraph,
    TreePoint,
    circle_space,
    distance,
    segment_space,
    square_space,
    tree_space,
)
from oflp.welfare import (
    DUAL,
    OBNOXIOUS,
    ContractError,
    Profile,
    grid_oracle,
    optimal_location,
    social_welfare,
)

SEG = segment_space()
SQ = square_space()
CIRC = circle_space()


class TestSocialWelfareExamples:
    def test_segment_values(self):
        prof = Profile((0.5, 0.5, 1.0, 1.0, 1.0))
        assert social_welfare(SEG, prof, 0.0) == pytest.approx(4.0)
        assert social_welfare(SEG, prof, 1.0) == pytest.approx(1.0)

    def test_empty_profile(self):
        assert social_welfare(SEG, Profile(()), 0.3) == 0.0

    def test_dual_value(self):
        prof = Profile((0.3, 0.6), types=(0, 1))
        # type-0 at 0.3 contributes d = 0.7; type-1 at 0.6 contributes 1 - 0.4
        assert social_welfare(SEG, prof, 1.0, mode=DUAL) == pytest.approx(1.3)

    def test_square_value(self):
        prof = Profile(((1.0, 1.0), (0.5, 0.5)))
        expected = math.sqrt(2) + math.hypot(0.5, 0.5)
        assert social_welfare(SQ, prof, (0.0, 0.0)) == pytest.approx(expected)

    def test_circle_value(self):
        assert social_welfare(CIRC, Profile((0.25,)), 0.75) == pytest.approx(0.5)

    def test_tree_value(self):
        tree = TreeGraph(3, [(0, 1, 1.0), (1, 2, 2.0)])
        prof = Profile((TreePoint.at_vertex(0), TreePoint.on_edge(1, 0.5)))
        assert social_welfare(tree_space(tree), prof, TreePoint.at_vertex(2)) == pytest.approx(
            3.0 + 1.5
        )


class TestContract:
    def test_dual_needs_types(self):
        with pytest.raises(ContractError):
            social_welfare(SEG, Profile((0.5,)), 0.0, mode=DUAL)

    def test_dual_segment_only(self):
        with pytest.raises(ContractError):
            social_welfare(CIRC, Profile((0.5,), types=(1,)), 0.0, mode=DUAL)

    def test_types_length(self):
        with pytest.raises(ContractError):
            Profile((0.1, 0.2), types=(1,))

    def test_types_bits(self):
        with pytest.raises(ContractError):
            Profile((0.1,), types=(2,))

    def test_unknown_mode(self):
        with pytest.raises(ContractError):
            social_welfare(SEG, Profile((0.5,)), 0.0, mode="strange")


class TestOptimalLocation:
    def test_segment(self):
        loc, val = optimal_location(SEG, Profile((0.5, 0.5, 1.0, 1.0, 1.0)))
        assert loc == 0.0 and val == pytest.approx(4.0)

    def test_segment_tie_prefers_smallest(self):
        loc, _ = optimal_location(SEG, Profile((0.5,)))
        assert loc == 0.0

    def test_square_example(self):
        prof = Profile(((0.5, 1.0), (1.0, 0.5), (1.0, 1.0), (0.5, 0.5)))
        loc, val = optimal_location(SQ, prof)
        assert loc == (0.0, 0.0)
        assert val == pytest.approx((2.0 * math.sqrt(5) + 3.0 * math.sqrt(2)) / 2.0)

    def test_circle_single_agent(self):
        loc, val = optimal_location(CIRC, Profile((0.25,)))
        assert loc == pytest.approx(0.75) and val == pytest.approx(0.5)

    def test_tree(self):
        tree = TreeGraph(4, [(0, 1, 1.0), (0, 2, 3.0), (0, 3, 2.0)])
        loc, val = optimal_location(tree_space(tree), Profile((TreePoint.at_vertex(1),)))
        assert loc == TreePoint.at_vertex(2) and val == pytest.approx(4.0)

    def test_dual_candidates(self):
        prof = Profile((0.3, 0.6), types=(0, 1))
        loc, val = optimal_location(SEG, prof, mode=DUAL)
        # exhaustive grid check
        grid = np.linspace(0, 1, 2001)
        vals = [social_welfare(SEG, prof, float(y), mode=DUAL) for y in grid]
        assert val >= max(vals) - 1e-12

    def test_empty(self):
        loc, val = optimal_location(SEG, Profile(()))
        assert val == 0.0


class TestGridOracle:
    def test_segment_m2(self):
        loc, val = grid_oracle(SEG, Profile((0.5,)), m=2)
        assert val == pytest.approx(0.5)

    def test_circle_m4(self):
        loc, val = grid_oracle(CIRC, Profile((0.25,)), m=4)
        assert loc == pytest.approx(0.75) and val == pytest.approx(0.5)

    def test_resolution_error(self):
        with pytest.raises(SpaceError):
            grid_oracle(SEG, Profile((0.5,)), m=1)

    @pytest.mark.parametrize("kind", ["segment", "square", "circle", "tree"])
    def test_agreement_with_exact(self, kind):
        # [DERIVED] oracle gap bounded by n*h/2 (1-Lipschitz distance terms)
        rng = np.random.default_rng(11)
        m = 400
        for _ in range(40):
            n = int(rng.integers(1, 7))
            if kind == "segment":
                sp, prof = SEG, Profile(tuple(rng.uniform(0, 1, n)))
                h = 1.0 / m
            elif kind == "circle":
                sp, prof = CIRC, Profile(tuple(rng.uniform(0, 1, n)))
                h = 1.0 / m
            elif kind == "square":
                sp = SQ
                prof = Profile(tuple((float(x), float(y)) for x, y in rng.uniform(0, 1, (n, 2))))
                h = math.sqrt(2) / m
            else:
                nv = int(rng.integers(2, 7))
                edges = [
                    (int(rng.integers(0, i)), i, float(rng.uniform(0.1, 2)))
                    for i in range(1, nv)
                ]
                tree = TreeGraph(nv, edges)
                sp = tree_space(tree)
                prof = Profile(
                    tuple(TreePoint.at_vertex(int(v)) for v in rng.integers(0, nv, n))
                )
                h = max(e[2] for e in edges) / m
            _, opt = optimal_location(sp, prof)
            _, approx = grid_oracle(sp, prof, m)
            assert approx <= opt + 1e-9
            assert opt - approx <= n * h / 2 + 1e-9

    def test_dual_oracle(self):
        prof = Profile((0.3, 0.6), types=(0, 1))
        _, opt = optimal_location(SEG, prof, mode=DUAL)
        _, approx = grid_oracle(SEG, prof, 1000, mode=DUAL)
        assert abs(opt - approx) <= 2 * (1.0 / 1000) / 2 + 1e-12


class TestInvariants:
    def test_permutation_invariance(self):
        rng = np.random.default_rng(12)
        pts = tuple(rng.uniform(0, 1, 8))
        perm = tuple(pts[i] for i in rng.permutation(8))
        for sp in (SEG, CIRC):
            for y in (0.0, 0.3, 1.0):
                assert social_welfare(sp, Profile(pts), y) == pytest.approx(
                    social_welfare(sp, Profile(perm), y), abs=1e-12
                )

    def test_duplication_homogeneity(self):
        # dyadic coordinates make the k-fold sums exact in floating point
        rng = np.random.default_rng(13)
        pts = tuple(float(v) / 64.0 for v in rng.integers(0, 65, 6))
        for k in (2, 3):
            dup = pts * k
            for sp in (SEG, CIRC):
                _, opt1 = optimal_location(sp, Profile(pts))
                _, optk = optimal_location(sp, Profile(dup))
                assert optk == k * opt1
                assert social_welfare(sp, Profile(dup), 0.25) == k * social_welfare(
                    sp, Profile(pts), 0.25
                )

    def test_dual_endpoint_identity(self):
        # transformed point x* = 1 - x for type-1: d(0,x) + d(0,x*) = 1
        for k in range(0, 1025):
            x = k / 1024.0
            x_star = 1.0 - x
            assert distance(SEG, 0.0, x) + distance(SEG, 0.0, x_star) == 1.0

    def test_dual_interior_inequality(self):
        rng = np.random.default_rng(14)
        for _ in range(2000):
            x, y = rng.uniform(0, 1, 2)
            x_star = 1.0 - x
            assert distance(SEG, y, x) + distance(SEG, y, x_star) <= 1.0 + 1e-12

    def test_circle_candidates_cover_optimum(self):
        rng = np.random.default_rng(15)
        for _ in range(50):
            prof = Profile(tuple(rng.uniform(0, 1, int(rng.integers(1, 6)))))
            _, opt = optimal_location(CIRC, prof)
            _, approx = grid_oracle(CIRC, prof, 2000)
            assert opt >= approx - 1e-9
