import math

import numpy as np
import pytest

from bsdl.circle import (
    BisectionInverse,
    ChartAffineLift,
    CircleLift,
    ComposedLift,
    DenjoyLift,
    FunctionLift,
    GOLDEN_MEAN,
    GluedLift,
    MobiusLift,
    PiecewiseLift,
    RotationLift,
    chart_from_real,
    chart_to_real,
    circle_dist,
    compose,
    denjoy_lift,
    load_lift_spec,
    parse_k_spec,
    rotation_number,
    wrap,
)


def naive_rotation_number(F, n=20000, x0=0.17):
    # independent straight-line estimate, no rewrapping tricks
    y = x0
    for _ in range(n):
        y = float(F.raw(np.float64(y)))
    return ((y - x0) / n) % 1.0


class TestChart:
    def test_round_trip_real_points(self):
        xs = np.array([-1e6, -37.5, -1.0, -1e-8, 0.0, 1e-8, 0.5, 3.0, 1e6])
        us = chart_from_real(xs)
        back = chart_to_real(us)
        assert np.all(np.abs(back - xs) <= 1e-8 * (1.0 + np.abs(xs)))

    def test_infinity_is_the_glued_point(self):
        assert chart_from_real(np.inf) == 0.0
        assert chart_to_real(0.0) == np.inf

    def test_chart_is_increasing_in_x(self):
        xs = np.linspace(-50.0, 50.0, 1001)
        us = chart_from_real(xs)
        assert np.all(np.diff(us) > 0.0)
        assert np.all((us > 0.0) & (us < 1.0))

    def test_circle_dist(self):
        assert circle_dist(0.1, 0.9) == pytest.approx(0.2)
        assert circle_dist(0.0, 0.5) == pytest.approx(0.5)
        assert float(circle_dist(2.3, 0.3)) == pytest.approx(0.0)


class TestRotationLift:
    def test_rotation_number_one_third_certified(self):
        est = rotation_number(RotationLift(1.0 / 3.0))
        assert abs(est.value - 1.0 / 3.0) <= est.error_bound
        assert est.rational_witness is not None
        p, q, x, res = est.rational_witness
        assert (p, q) == (1, 3)
        assert res < 1e-8

    def test_ln2_rotation_has_no_witness(self):
        est = rotation_number(RotationLift(math.log(2.0)), iterates=10**4)
        assert est.rational_witness is None
        assert abs(est.value - math.log(2.0)) <= est.error_bound

    def test_exact_iterate(self):
        F = RotationLift(0.3)
        assert F.iterate(0.25, 10) == pytest.approx(0.25 + 3.0, abs=1e-12)
        assert F.iterate(0.25, -10) == pytest.approx(0.25 - 3.0, abs=1e-12)

    def test_compose_fuses(self):
        g = compose(RotationLift(0.25), RotationLift(0.5))
        assert isinstance(g, RotationLift)
        assert g.alpha == 0.75


class TestChartAffineLift:
    def test_fixes_glued_point_exactly(self):
        F = ChartAffineLift(2.0, 0.0)
        assert F(0.0) == 0.0
        assert F(3.0) == 3.0

    def test_matches_real_line_action(self):
        F = ChartAffineLift(2.0, 1.0)
        xs = np.array([-5.0, -0.3, 0.0, 0.7, 4.0, 1e5])
        u = chart_from_real(xs)
        out = chart_to_real(np.array([F(v) for v in u]))
        assert np.all(np.abs(out - (2.0 * xs + 1.0)) <= 1e-6 * (1.0 + np.abs(xs)))

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_conjugation_relation_is_exact(self, n):
        f = ChartAffineLift(1.0, 1.0)
        h = ChartAffineLift(float(n), 0.0)
        lhs = compose(compose(h, f), h.inverse())
        rhs_a, rhs_b = f.params_power(n)
        assert isinstance(lhs, ChartAffineLift)
        assert lhs.a == rhs_a == 1.0
        assert lhs.b == rhs_b == float(n)

    def test_inverse_fuses_to_identity(self):
        f = ChartAffineLift(1.0, 1.0)
        g = compose(f, f.inverse())
        assert isinstance(g, ChartAffineLift)
        assert (g.a, g.b) == (1.0, 0.0)

    def test_pointwise_relation_residual_without_fusion(self):
        n = 3
        f = ChartAffineLift(1.0, 1.0)
        h = ChartAffineLift(3.0, 0.0)
        hinv = h.inverse()
        xs = np.arange(0.0, 1.0, 1.0 / 97.0)
        lhs = h.raw(f.raw(hinv.raw(xs)))
        rhs = f.iterate(xs, n)
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_power_formula_matches_repeated_application(self):
        F = ChartAffineLift(2.0, 0.5)
        x = 0.37
        y = x
        for _ in range(6):
            y = F(y)
        assert F.iterate(x, 6) == pytest.approx(y, abs=1e-10)

    def test_parabolic_translation_rotation_number_zero(self):
        est = rotation_number(ChartAffineLift(1.0, 1.0), iterates=10**4)
        assert est.rational_witness is not None
        p, q, _, res = est.rational_witness
        assert (p, q) == (0, 1)
        assert res == 0.0

    def test_validate_passes(self):
        ChartAffineLift(0.5, -2.0).validate()


class TestMobiusLift:
    def test_agrees_with_affine_translation(self):
        M = MobiusLift([[1.0, 1.0], [0.0, 1.0]])
        A = ChartAffineLift(1.0, 1.0)
        xs = np.arange(0.0, 2.0, 1.0 / 193.0)
        assert np.max(np.abs(M.raw(xs) - A.raw(xs))) < 1e-10

    def test_agrees_with_affine_scaling(self):
        M = MobiusLift([[2.0, 0.0], [0.0, 1.0]])
        A = ChartAffineLift(2.0, 0.0)
        xs = np.arange(0.0, 1.0, 1.0 / 193.0)
        assert np.max(np.abs(M.raw(xs) - A.raw(xs))) < 1e-10

    def test_rotation_by_half(self):
        M = MobiusLift([[0.0, -1.0], [1.0, 0.0]])
        est = rotation_number(M, iterates=2000)
        assert est.rational_witness is not None
        assert est.rational_witness[:2] == (1, 2)
        assert abs(est.value - 0.5) <= est.error_bound

    def test_inverse_round_trip_mod_one(self):
        M = MobiusLift([[3.0, 1.0], [1.0, 2.0]])
        G = M.inverse()
        xs = np.arange(0.0, 1.0, 1.0 / 101.0)
        d = circle_dist(G.raw(M.raw(xs)), xs)
        assert np.max(d) < 1e-10

    def test_rejects_negative_determinant(self):
        with pytest.raises(ValueError):
            MobiusLift([[0.0, 1.0], [1.0, 0.0]])


class TestPiecewiseLift:
    def make(self):
        return PiecewiseLift([0.0, 0.25, 0.6], [0.1, 0.5, 0.8]).validate()

    def test_hits_breakpoints(self):
        F = self.make()
        assert F(0.0) == pytest.approx(0.1, abs=1e-14)
        assert F(0.25) == pytest.approx(0.5, abs=1e-14)
        assert F(0.6) == pytest.approx(0.8, abs=1e-14)

    def test_inverse_is_exact_lift_inverse(self):
        F = self.make()
        G = F.inverse()
        xs = np.arange(0.0, 1.0, 1.0 / 211.0)
        assert np.max(np.abs(G.raw(F.raw(xs)) - xs)) < 1e-12
        assert np.max(np.abs(F.raw(G.raw(xs)) - xs)) < 1e-12

    def test_inverse_with_wrapping_table(self):
        F = PiecewiseLift([0.0, 0.5], [0.7, 1.2]).validate()
        G = F.inverse()
        xs = np.arange(0.0, 1.0, 1.0 / 211.0)
        assert np.max(np.abs(G.raw(F.raw(xs)) - xs)) < 1e-12

    def test_seeded_random_tables_invert(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            k = int(rng.integers(2, 9))
            bx = np.sort(rng.uniform(0.0, 1.0, size=k))
            if np.min(np.diff(bx)) < 1e-3:
                continue
            by = np.sort(rng.uniform(0.0, 1.0, size=k)) + rng.uniform(-1.0, 1.0)
            if np.min(np.diff(by)) < 1e-3 or not (by[-1] < by[0] + 1.0):
                continue
            F = PiecewiseLift(bx, by).validate()
            G = F.inverse()
            xs = rng.uniform(-1.0, 2.0, size=64)
            assert np.max(np.abs(G.raw(F.raw(xs)) - xs)) < 1e-10

    def test_rejects_bad_tables(self):
        with pytest.raises(ValueError):
            PiecewiseLift([0.0, 0.5], [0.2, 0.1])
        with pytest.raises(ValueError):
            PiecewiseLift([0.5, 0.2], [0.1, 0.2])
        with pytest.raises(ValueError):
            PiecewiseLift([0.0, 0.5], [0.0, 1.1])


class TestGluedLift:
    def test_block_endpoints_are_fixed(self):
        F = GluedLift(2, 2.0, 0.0)
        assert F(0.0) == 0.0
        assert F(0.5) == 0.5
        assert F(1.0) == 1.0

    def test_fixed_points_certify_rotation_zero(self):
        est = rotation_number(GluedLift(2, 1.0, 1.0), iterates=2000)
        assert est.rational_witness is not None
        p, q, x, res = est.rational_witness
        assert (p, q) == (0, 1)
        assert res == 0.0

    def test_power_matches_repeated_application(self):
        F = GluedLift(3, 2.0, 0.3)
        x = 0.41
        y = x
        for _ in range(5):
            y = F(y)
        assert F.iterate(x, 5) == pytest.approx(y, abs=1e-10)

    def test_compose_fuses_blockwise(self):
        f = GluedLift(2, 1.0, 1.0)
        h = GluedLift(2, 3.0, 0.0)
        lhs = compose(compose(h, f), h.inverse())
        assert isinstance(lhs, GluedLift)
        assert lhs.m == 2
        assert (lhs.a, lhs.b) == (1.0, 3.0)

    def test_inverse_round_trip(self):
        F = GluedLift(3, 2.0, -0.7)
        G = F.inverse()
        xs = np.arange(0.0, 1.0, 1.0 / 211.0)
        assert np.max(np.abs(G.raw(F.raw(xs)) - xs)) < 1e-10


class TestBisectionInverse:
    def test_inverts_a_generic_lift(self):
        F = FunctionLift(lambda x: x + 0.1 + 0.05 * np.sin(2.0 * np.pi * x)).validate()
        G = BisectionInverse(F)
        xs = np.arange(0.0, 1.0, 1.0 / 101.0)
        assert np.max(np.abs(F.raw(G.raw(xs)) - xs)) < 1e-11
        assert np.max(np.abs(G.raw(F.raw(xs)) - xs)) < 1e-11

    def test_inverse_of_inverse_returns_target(self):
        F = FunctionLift(lambda x: x + 0.3)
        G = BisectionInverse(F)
        assert G.inverse() is F


class TestRotationNumberGeneric:
    def test_matches_naive_estimate_on_perturbed_rotation(self):
        F = FunctionLift(
            lambda x: x + 0.29 + 0.04 * np.sin(2.0 * np.pi * x)
        ).validate()
        est = rotation_number(F, iterates=20000)
        ref = naive_rotation_number(F, n=20000)
        assert circle_dist(est.value, ref) < 2e-4

    def test_conjugation_invariance(self):
        alpha = 0.3137
        F = RotationLift(alpha)
        g = PiecewiseLift([0.0, 0.3, 0.7], [0.0, 0.45, 0.8]).validate()
        conj = ComposedLift(ComposedLift(g, F), g.inverse())
        est = rotation_number(conj, iterates=50000)
        assert circle_dist(est.value, alpha) < 1e-4

    def test_error_bound_honest_for_rotation(self):
        for alpha in (0.1234, math.log(2.0), GOLDEN_MEAN):
            est = rotation_number(RotationLift(alpha), iterates=5000)
            assert circle_dist(est.value, alpha) <= est.error_bound


class TestDenjoy:
    def test_depth_zero_is_rotation(self):
        F = denjoy_lift(GOLDEN_MEAN, 0, 0.6)
        assert isinstance(F, RotationLift)

    def test_piecewise_affine_and_valid(self):
        F = denjoy_lift(GOLDEN_MEAN, 8, 0.6)
        assert isinstance(F, DenjoyLift)
        assert F.depth == 8
        assert len(F.inserted_intervals) == 17
        total = sum(b - a for a, b in F.inserted_intervals)
        assert 0.0 < total < 1.0

    def test_rotation_number_close_to_alpha_no_witness(self):
        F = denjoy_lift(GOLDEN_MEAN, 8, 0.6)
        est = rotation_number(F, iterates=10**4)
        assert circle_dist(est.value, GOLDEN_MEAN) < 1e-3
        assert est.rational_witness is None

    def test_intervals_map_onto_next_intervals(self):
        F = denjoy_lift(GOLDEN_MEAN, 6, 0.6)
        # reconstruct the chain: image of each interval is again an interval
        ivals = F.inserted_intervals
        starts = np.array([a for a, _ in ivals])
        for a, b in ivals:
            fa, fb = wrap(F(a)), wrap(F(b))
            width = (fb - fa) % 1.0
            hits = circle_dist(fa, starts) < 1e-9
            if hits.any():
                j = int(np.argmax(hits))
                assert abs(width - (ivals[j][1] - ivals[j][0])) < 1e-9

    def test_gap_orbit_rarely_enters_intervals(self):
        F = denjoy_lift(GOLDEN_MEAN, 8, 0.6)
        x = F.embed_old_point(0.1234567)
        lo = np.array([a for a, _ in F.inserted_intervals])
        hi = np.array([b for _, b in F.inserted_intervals])
        inside = 0
        y = x
        for _ in range(4000):
            y = wrap(F(y))
            inside += int(np.any((y > lo + 1e-12) & (y < hi - 1e-12)))
        assert inside / 4000.0 < 0.05

    def test_embedding_conjugates_rotation_off_the_seams(self):
        F = denjoy_lift(GOLDEN_MEAN, 8, 0.6)
        u = 0.245
        x = F.embed_old_point(u)
        y = F.embed_old_point(wrap(u + GOLDEN_MEAN))
        assert circle_dist(wrap(F(x)), y) < 1e-9

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            denjoy_lift(0.5, 4, 0.6)  # orbit collides
        with pytest.raises(ValueError):
            denjoy_lift(GOLDEN_MEAN, 4, 1.5)
        with pytest.raises(ValueError):
            denjoy_lift(GOLDEN_MEAN, -1, 0.5)


class TestValidate:
    def test_rejects_non_monotone(self):
        with pytest.raises(ValueError):
            FunctionLift(lambda x: x + 0.3 * np.sin(2.0 * np.pi * x)).validate()

    def test_rejects_wrong_degree(self):
        with pytest.raises(ValueError):
            FunctionLift(lambda x: 1.5 * x).validate()


class TestSpecs:
    def test_parse_rotation_fraction(self):
        F = parse_k_spec("rot:1/3")
        assert isinstance(F, RotationLift)
        assert F.alpha == pytest.approx(1.0 / 3.0)

    def test_parse_named_angles(self):
        assert parse_k_spec("rot:golden").alpha == pytest.approx(GOLDEN_MEAN)
        assert parse_k_spec("rot:ln2").alpha == pytest.approx(math.log(2.0))

    def test_parse_identity_affine_denjoy(self):
        assert parse_k_spec("id").alpha == 0.0
        A = parse_k_spec("affine:2,0.5")
        assert isinstance(A, ChartAffineLift)
        assert (A.a, A.b) == (2.0, 0.5)
        D = parse_k_spec("denjoy:golden,4,0.6")
        assert isinstance(D, DenjoyLift)

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_k_spec("whirl:3")
        with pytest.raises(ValueError):
            parse_k_spec("nonsense")

    def test_load_lift_spec(self):
        assert isinstance(load_lift_spec({"type": "rotation", "alpha": 0.25}), RotationLift)
        assert isinstance(load_lift_spec({"type": "affine", "a": 2.0, "b": 0.0}), ChartAffineLift)
        assert isinstance(
            load_lift_spec({"type": "mobius", "matrix": [[1.0, 1.0], [0.0, 1.0]]}),
            MobiusLift,
        )
        assert isinstance(
            load_lift_spec({"type": "denjoy", "alpha": GOLDEN_MEAN, "depth": 4, "gap_ratio": 0.6}),
            DenjoyLift,
        )
        assert isinstance(
            load_lift_spec({"type": "piecewise", "bx": [0.0, 0.5], "by": [0.1, 0.6]}),
            PiecewiseLift,
        )
        with pytest.raises(ValueError):
            load_lift_spec({"type": "spiral"})
        with pytest.raises(ValueError):
            load_lift_spec("rot:1/3")
