import numpy as np
import pytest

from oflp._evaluators import Evaluator
from oflp.mechanisms import (
    bit_outcome,
    robust_coordinatewise_voting,
    robust_majority_circle,
    robust_majority_tree,
    run_mechanism,
    threshold_mechanism,
    transformed_robust_majority,
    tree_mechanism_endpoints,
)
from oflp.spaces import (
    SpaceError,
    TreeGraph,
    TreePoint,
    circle_space,
    segment_space,
    square_space,
    tree_space,
)
from oflp.welfare import ContractError, Profile

SEG = segment_space()
SQ = square_space()
CIRC = circle_space()


class TestSegmentVoting:
    def test_majority_overridden_near_boundary(self):
        # two low agents vs one high, but low votes mean output 1
        tr = robust_coordinatewise_voting(Profile((0.2, 0.3, 0.8)), 1.0, 0.0, dim=1)
        assert tr.chosen == 1.0
        assert tr.counts["per_coordinate"] == ((2, 1),)

    def test_tie_goes_to_prediction(self):
        tr = robust_coordinatewise_voting(Profile((0.3, 0.8)), 0.0, 0.0, dim=1)
        assert tr.chosen == 0.0

    def test_boundary_half_votes_low(self):
        tr = robust_coordinatewise_voting(Profile((0.5,)), 0.0, 0.0, dim=1)
        assert tr.counts["per_coordinate"] == ((1, 0),)
        assert tr.chosen == 1.0

    def test_lambda_one_forces_prediction(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            prof = Profile(tuple(rng.uniform(0, 1, int(rng.integers(1, 9)))))
            pred = float(rng.integers(0, 2))
            assert robust_coordinatewise_voting(prof, pred, 1.0, dim=1).chosen == pred

    def test_empty_profile_returns_prediction(self):
        assert robust_coordinatewise_voting(Profile(()), 1.0, 0.0, dim=1).chosen == 1.0

    def test_prediction_must_be_corner(self):
        with pytest.raises(SpaceError):
            robust_coordinatewise_voting(Profile((0.5,)), 0.3, 0.0, dim=1)

    def test_lambda_range(self):
        with pytest.raises(SpaceError):
            robust_coordinatewise_voting(Profile((0.5,)), 1.0, 1.5, dim=1)

    def test_flip_equivariance(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            pts = tuple(x for x in rng.uniform(0, 1, 6) if x != 0.5)
            lam = float(rng.integers(0, 5)) / 4.0
            pred = float(rng.integers(0, 2))
            a = robust_coordinatewise_voting(Profile(pts), pred, lam, dim=1).chosen
            flipped = tuple(1.0 - x for x in pts)
            if any(f == 0.5 for f in flipped):
                continue
            b = robust_coordinatewise_voting(Profile(flipped), 1.0 - pred, lam, dim=1).chosen
            assert b == 1.0 - a

    def test_monotone_lambda_up_closed(self):
        rng = np.random.default_rng(2)
        for _ in range(40):
            prof = Profile(tuple(rng.uniform(0, 1, int(rng.integers(1, 9)))))
            pred = float(rng.integers(0, 2))
            hits = [
                robust_coordinatewise_voting(prof, pred, lam, dim=1).chosen == pred
                for lam in np.linspace(0, 1, 11)
            ]
            first = hits.index(True) if True in hits else len(hits)
            assert all(hits[first:])


class TestSquareVoting:
    def test_coordinatewise(self):
        prof = Profile(((0.2, 0.8), (0.3, 0.9), (0.8, 0.1)))
        tr = robust_coordinatewise_voting(prof, (1.0, 0.0), 0.0, dim=2)
        assert tr.chosen == (1.0, 0.0)

    def test_lambda_one_forces_prediction(self):
        prof = Profile(((0.9, 0.9), (0.8, 0.8)))
        tr = robust_coordinatewise_voting(prof, (1.0, 1.0), 1.0, dim=2)
        assert tr.chosen == (1.0, 1.0)

    def test_counts_sum(self):
        rng = np.random.default_rng(3)
        n = 7
        prof = Profile(tuple((float(x), float(y)) for x, y in rng.uniform(0, 1, (n, 2))))
        tr = robust_coordinatewise_voting(prof, (0.0, 1.0), 0.25, dim=2)
        for n_low, n_high in tr.counts["per_coordinate"]:
            assert n_low + n_high == n


class TestCircle:
    def test_quarter_arc_flips(self):
        tr = robust_majority_circle(Profile((0.1, 0.2, 0.3)), 0.25, 0.0)
        assert tr.chosen == pytest.approx(0.75)
        assert tr.counts == {"n_P": 3, "n_Q": 0}

    def test_bonus_keeps_prediction(self):
        tr = robust_majority_circle(Profile((0.1, 0.2, 0.3, 0.6)), 0.25, 0.5)
        assert tr.chosen == pytest.approx(0.25)
        assert tr.counts == {"n_P": 3, "n_Q": 1}

    def test_empty_returns_prediction(self):
        assert robust_majority_circle(Profile(()), 0.25, 0.0).chosen == pytest.approx(0.25)

    def test_lambda_one_forces_prediction(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            prof = Profile(tuple(rng.uniform(0, 1, 5)))
            pred = float(rng.uniform(0, 1))
            assert robust_majority_circle(prof, pred, 1.0).chosen == pytest.approx(pred)

    def test_half_open_arc_boundary(self):
        # the point antipodal-boundary: rel exactly 0.5 counts for P,
        # rel exactly 0 (the antipode) counts for Q
        tr = robust_majority_circle(Profile((0.5, 0.75)), 0.25, 0.0)
        assert tr.counts == {"n_P": 1, "n_Q": 1}
        assert tr.chosen == pytest.approx(0.25)  # tie kept by prediction

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            pts = rng.uniform(0, 1, 5)
            pred = float(rng.uniform(0, 1))
            lam = float(rng.integers(0, 5)) / 4.0
            shift = float(rng.integers(0, 64)) / 64.0
            a = robust_majority_circle(Profile(tuple(pts)), pred, lam)
            b = robust_majority_circle(
                Profile(tuple((x + shift) % 1.0 for x in pts)), (pred + shift) % 1.0, lam
            )
            da = (b.chosen - a.chosen - shift) % 1.0
            assert min(da, 1 - da) < 1e-9


class TestTree:
    def _path3(self):
        return TreeGraph(3, [(0, 1, 1.0), (1, 2, 1.0)])

    def test_majority_keeps_far_endpoint(self):
        tree = self._path3()
        prof = Profile((TreePoint.at_vertex(2),) * 3 + (TreePoint.at_vertex(0),))
        tr = robust_majority_tree(tree, prof, TreePoint.at_vertex(0), 0.0)
        # a = v2 (farthest from prediction), b = v0; n_1 = 3 > n_2 = 1 -> b
        assert tr.chosen == TreePoint.at_vertex(0)
        assert tr.counts == {"n_1": 3, "n_2": 1}

    def test_minority_outputs_far_endpoint(self):
        tree = self._path3()
        prof = Profile((TreePoint.at_vertex(2),) + (TreePoint.at_vertex(0),) * 3)
        tr = robust_majority_tree(tree, prof, TreePoint.at_vertex(0), 0.0)
        assert tr.chosen == TreePoint.at_vertex(2)

    def test_single_agent_at_far_endpoint(self):
        tree = self._path3()
        prof = Profile((TreePoint.at_vertex(2),))
        tr = robust_majority_tree(tree, prof, TreePoint.at_vertex(0), 0.0)
        assert tr.chosen == TreePoint.at_vertex(0)

    def test_endpoints_prefer_prediction(self):
        tree = self._path3()
        a, b = tree_mechanism_endpoints(tree, TreePoint.at_vertex(0))
        assert (a, b) == (TreePoint.at_vertex(2), TreePoint.at_vertex(0))

    def test_non_peripheral_prediction_flagged(self):
        tree = TreeGraph(4, [(0, 1, 1.0), (0, 2, 3.0), (0, 3, 2.0)])
        tr = robust_majority_tree(tree, Profile(()), TreePoint.at_vertex(1), 0.0)
        assert tr.details["prediction_peripheral"] is False
        tr2 = robust_majority_tree(tree, Profile(()), TreePoint.at_vertex(2), 0.0)
        assert tr2.details["prediction_peripheral"] is True

    def test_prediction_must_be_vertex(self):
        with pytest.raises(SpaceError):
            robust_majority_tree(
                self._path3(), Profile(()), TreePoint.on_edge(0, 0.5), 0.0
            )

    def test_single_vertex_tree(self):
        tree = TreeGraph(1, [])
        tr = robust_majority_tree(tree, Profile((TreePoint.at_vertex(0),)), TreePoint.at_vertex(0), 0.5)
        assert tr.chosen == TreePoint.at_vertex(0)

    def test_bonus_shifts_to_near_endpoint(self):
        tree = self._path3()
        prof = Profile((TreePoint.at_vertex(2),) + (TreePoint.at_vertex(0),) * 3)
        # lam=0 gives a (=v2); bonus 0.75*4 = 3 makes n_1 + 3 = 4 > 3 -> b
        tr = robust_majority_tree(tree, prof, TreePoint.at_vertex(0), 0.75)
        assert tr.chosen == TreePoint.at_vertex(0)


class TestDual:
    def test_example_lambda_zero(self):
        prof = Profile((0.3, 0.6, 0.9), types=(0, 1, 0))
        tr = transformed_robust_majority(prof, 1.0, 0.0)
        assert tr.chosen == 1.0
        assert tr.counts == {"n_1": 2, "n_2": 1}
        assert tr.details["x_star"] == pytest.approx((0.3, 0.4, 0.9))

    def test_example_lambda_half(self):
        prof = Profile((0.3, 0.6, 0.9), types=(0, 1, 0))
        tr = transformed_robust_majority(prof, 1.0, 0.5)
        assert tr.chosen == 0.0
        assert tr.counts == {"n_1": 0, "n_2": 3}

    def test_all_type_one_at_one(self):
        prof = Profile((1.0, 1.0), types=(1, 1))
        assert transformed_robust_majority(prof, 1.0, 0.0).chosen == 1.0

    def test_prediction_zero_flip(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            n = int(rng.integers(1, 7))
            pts = tuple(float(x) for x in rng.uniform(0, 1, n))
            types = tuple(int(t) for t in rng.integers(0, 2, n))
            lam = float(rng.integers(0, 5)) / 4.0
            a = transformed_robust_majority(Profile(pts, types=types), 0.0, lam)
            b = transformed_robust_majority(
                Profile(tuple(1.0 - x for x in pts), types=types), 1.0, lam
            )
            assert a.chosen == 1.0 - b.chosen

    def test_needs_types(self):
        with pytest.raises(ContractError):
            transformed_robust_majority(Profile((0.5,)), 1.0, 0.0)

    def test_strict_majority_required(self):
        # n_1 == n_2 -> not a strict majority -> output 0 (non-prediction)
        prof = Profile((0.2, 0.8), types=(0, 0))
        tr = transformed_robust_majority(prof, 1.0, 0.0)
        assert tr.counts == {"n_1": 1, "n_2": 1}
        assert tr.chosen == 0.0


class TestThreshold:
    def test_examples(self):
        prof = Profile((0.3, 0.4, 0.9))
        assert threshold_mechanism(1, prof) == 1.0
        assert threshold_mechanism(2, prof) == 0.0

    def test_empty(self):
        assert threshold_mechanism(0, Profile(())) == 0.0

    def test_k_range(self):
        with pytest.raises(SpaceError):
            threshold_mechanism(5, Profile((0.1,)))
        with pytest.raises(SpaceError):
            threshold_mechanism(-1, Profile((0.1,)))

    def test_custom_endpoints(self):
        prof = Profile((0.1, 0.2))
        assert threshold_mechanism(0, prof, r=0.0, s=0.5) == 0.5
        with pytest.raises(SpaceError):
            threshold_mechanism(0, prof, r=0.5, s=0.5)


class TestBitOutcome:
    def test_prediction_wins_ties(self):
        assert bit_outcome(1, 1, 1, 0.0) == 1
        assert bit_outcome(1, 1, 0, 0.0) == 0

    def test_bonus(self):
        assert bit_outcome(3, 1, 0, 2.0) == 0
        assert bit_outcome(4, 1, 0, 2.0) == 1


class TestDispatchAndEvaluator:
    def test_dispatch_dual_when_types(self):
        prof = Profile((0.3, 0.6, 0.9), types=(0, 1, 0))
        assert run_mechanism(SEG, prof, 1.0, 0.0).chosen == 1.0
        with pytest.raises(ContractError):
            run_mechanism(CIRC, prof, 0.25, 0.0)

    def test_output_set_membership(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            prof = Profile(tuple(rng.uniform(0, 1, 4)))
            lam = float(rng.integers(0, 5)) / 4.0
            assert run_mechanism(SEG, prof, 1.0, lam).chosen in (0.0, 1.0)
            assert run_mechanism(CIRC, prof, 0.3, lam).chosen in (
                pytest.approx(0.3),
                pytest.approx(0.8),
            )

    def test_evaluator_agrees_with_mechanisms(self):
        # [DERIVED] incremental evaluator reproduces the direct mechanisms
        rng = np.random.default_rng(8)
        for _ in range(60):
            kind = ["segment", "square", "circle", "tree", "dual"][int(rng.integers(5))]
            n = int(rng.integers(1, 7))
            lam = float(rng.integers(0, 5)) / 4.0
            if kind == "segment":
                sp, prof, pred = SEG, Profile(tuple(rng.uniform(0, 1, n))), float(rng.integers(2))
            elif kind == "square":
                sp = SQ
                prof = Profile(tuple((float(x), float(y)) for x, y in rng.uniform(0, 1, (n, 2))))
                pred = (float(rng.integers(2)), float(rng.integers(2)))
            elif kind == "circle":
                sp, prof, pred = CIRC, Profile(tuple(rng.uniform(0, 1, n))), float(rng.uniform(0, 1))
            elif kind == "tree":
                nv = int(rng.integers(2, 6))
                tree = TreeGraph(
                    nv,
                    [(int(rng.integers(0, i)), i, float(rng.uniform(0.2, 2))) for i in range(1, nv)],
                )
                sp = tree_space(tree)
                prof = Profile(tuple(TreePoint.at_vertex(int(v)) for v in rng.integers(0, nv, n)))
                pred = TreePoint.at_vertex(int(rng.integers(nv)))
            else:
                sp = SEG
                prof = Profile(
                    tuple(float(x) for x in rng.uniform(0, 1, n)),
                    types=tuple(int(t) for t in rng.integers(0, 2, n)),
                )
                pred = float(rng.integers(2))
            tr = run_mechanism(sp, prof, pred, lam)
            ev = Evaluator(sp, prof, pred, lam)
            chosen = ev.outcome_points[ev.outcome_index()]
            if kind in ("segment", "circle", "dual"):
                assert chosen == pytest.approx(tr.chosen)
            else:
                assert chosen == tr.chosen
