import math
from fractions import Fraction

import numpy as np
import pytest

from bsdl.bsgroup import finite_bs_orbit, power_lift, relation_report
from bsdl.catalog import (
    CATALOG,
    build_action,
    faithfulness_evidence,
    morse_smale_example,
    nonfaithful_circle,
    periodic_circle_example,
    periodic_torus_example,
    perturbed_torus,
    product_action,
    standard_line,
    standard_torus,
)
from bsdl.circle import DenjoyLift, chart_from_real, circle_dist, rotation_number, wrap
from bsdl.torus import rotation_vector, torus_dist


class TestRegistry:
    def test_entry_ids_and_spaces(self):
        assert set(CATALOG) == {
            "standard-line",
            "standard-torus",
            "product",
            "periodic-circle",
            "periodic-torus",
            "perturbed-torus",
            "morse-smale",
            "nonfaithful-circle",
        }
        circle = {k for k, e in CATALOG.items() if e.space == "circle"}
        assert circle == {"standard-line", "periodic-circle", "nonfaithful-circle"}

    def test_unknown_id_raises(self):
        with pytest.raises(KeyError):
            build_action("spiral")

    def test_all_entries_build_and_satisfy_relation(self):
        for name, entry in CATALOG.items():
            act = entry.build()
            rep = relation_report(act, grid=2500)
            assert rep.passed, f"{name}: {rep.to_json()}"
            assert act.space == entry.space
            assert act.name.startswith(name)

    def test_explicit_params(self):
        act = build_action("standard-line", n=5)
        assert act.n == 5 and act.h.a == 5.0
        act = build_action("product", k="rot:1/4")
        assert act.h.fiber.alpha == 0.25
        act = build_action("perturbed-torus", eps=0.5 - math.log(2))
        assert abs(act.h.fiber.alpha - 0.5) < 1e-15

    def test_expected_for_resolves_callables(self):
        exp = CATALOG["periodic-circle"].expected_for(4)
        assert exp["rho_f"] == Fraction(1, 3)
        assert exp["witness"] == (1, 3)
        assert exp["minimal_size"] == 3


class TestStandardLine:
    def test_generator_fixed_points(self):
        act = standard_line(2)
        # chart position of infinity is 0, of the real origin 1/2
        assert act.f.raw(0.0) == 0.0
        assert act.h.raw(0.0) == 0.0
        assert abs(float(act.h.raw(0.5)) - 0.5) < 1e-12

    def test_h_maps_chart_one_to_chart_n(self):
        for n in (2, 3, 5):
            act = standard_line(n)
            u1 = chart_from_real(1.0)
            un = chart_from_real(float(n))
            assert abs(float(act.h.raw(u1)) - un) < 1e-12

    def test_rotation_number_and_witness(self):
        act = standard_line(2)
        est = rotation_number(act.f, iterates=4000)
        assert est.rational_witness is not None
        assert est.rational_witness[:2] == (0, 1)

    def test_orbit_of_origin_spreads_through_arcs(self):
        act = standard_line(2)
        gens = [act.f, act.h, act.f.inverse(), act.h.inverse()]
        pts = {0.5}
        frontier = [0.5]
        for _ in range(8):
            nxt = []
            for p in frontier:
                for g in gens:
                    q = float(wrap(g(p)))
                    key = round(q, 9)
                    if key not in pts:
                        pts.add(key)
                        nxt.append(q)
            frontier = nxt
        arr = np.sort(np.array(sorted(pts)))
        rng = np.random.default_rng(23)
        centers = rng.uniform(0.12, 0.88, size=200)
        for c in centers:
            i = np.searchsorted(arr, c - 0.01)
            assert i < arr.size and arr[i] <= c + 0.01, f"empty arc at {c:.4f}"


class TestPeriodicExamples:
    def test_rejects_n_two(self):
        with pytest.raises(ValueError):
            periodic_circle_example(2)
        with pytest.raises(ValueError):
            periodic_torus_example(2)

    @pytest.mark.parametrize("n", [3, 4])
    def test_witness_matches_expected(self, n):
        act = periodic_circle_example(n)
        exp = CATALOG["periodic-circle"].expected_for(n)
        est = rotation_number(act.f, iterates=4000)
        assert est.rational_witness is not None
        assert est.rational_witness[:2] == exp["witness"]
        assert abs(est.value - float(exp["rho_f"])) <= est.error_bound

    def test_f_has_no_fixed_point_but_power_does(self):
        act = periodic_circle_example(3)
        xs = np.arange(0.0, 1.0, 1.0 / 4096.0)
        assert np.min(circle_dist(act.f.raw(xs), xs)) > 1e-3
        f2 = power_lift(act.f, 2)
        assert float(circle_dist(f2.raw(0.0), 0.0)) < 1e-12

    def test_periodic_orbit_of_block_endpoints(self):
        act = periodic_circle_example(3)
        orb = finite_bs_orbit(act, 0.0)
        assert orb.closed and orb.size == 2

    def test_torus_f_has_no_fixed_point_but_power_does(self):
        act = periodic_torus_example(3)
        g = np.arange(64) / 64.0
        vs = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
        assert np.min(torus_dist(act.f.raw(vs), vs)) > 1e-3
        F2 = power_lift(act.f, 2)
        v0 = np.array([0.0, 0.0])
        assert float(torus_dist(F2.raw(v0), v0)) < 1e-12

    def test_torus_finite_orbit(self):
        act = periodic_torus_example(3)
        orb = finite_bs_orbit(act, (0.0, 0.0))
        assert orb.closed and orb.size == 2


class TestTorusFamilies:
    def test_standard_rotation_vector(self):
        # the base factor is parabolic, so the time average decays like 1/N
        act = standard_torus(2)
        est = rotation_vector(act.f, v0=(0.3, 0.6), iterates=2000)
        assert abs(est.value[0]) < 1e-3
        assert abs(est.value[0]) <= est.error_bound
        assert est.value[1] == 0.0

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_fiber_rotation_number_is_log_n(self, n):
        act = standard_torus(n)
        est = rotation_number(act.h.fiber, iterates=10**5)
        assert abs(est.value - math.log(n) % 1.0) < 1e-4

    def test_product_rational_fiber_orbit(self):
        act = product_action(2, k="rot:1/3")
        orb = finite_bs_orbit(act, (0.0, 0.0))
        assert orb.closed and orb.size == 3
        thetas = sorted(round(p[1], 6) for p in orb.points)
        assert thetas == [0.0, pytest.approx(1 / 3), pytest.approx(2 / 3)]

    def test_product_denjoy_fiber(self):
        act = product_action(2, k="denjoy:golden,8,0.5")
        assert isinstance(act.h.fiber, DenjoyLift)
        est = rotation_number(act.h.fiber, iterates=4000)
        assert est.rational_witness is None

    def test_standard_torus_has_no_finite_orbit(self):
        act = standard_torus(2)
        orb = finite_bs_orbit(act, (0.0, 0.0), max_size=300)
        assert not orb.closed

    def test_perturbed_rational_angle(self):
        act = perturbed_torus(2, eps=0.7 - math.log(2))
        est = rotation_number(act.h.fiber, iterates=4000)
        assert est.rational_witness is not None
        assert est.rational_witness[:2] == (7, 10)

    def test_perturbed_small_eps_no_witness(self):
        act = perturbed_torus(2, eps=1e-3)
        est = rotation_number(act.h.fiber, iterates=10**4)
        assert est.rational_witness is None

    def test_perturbed_zero_is_standard(self):
        a0 = perturbed_torus(2, 0.0)
        assert a0.h.fiber.alpha == math.log(2) % 1.0


class TestMorseSmale:
    def test_global_fixed_point_at_infinity(self):
        act = morse_smale_example(2)
        v = np.array([0.0, 0.0])
        assert np.all(act.f.raw(v) == v)
        assert np.all(act.h.raw(v) == v)
        orb = finite_bs_orbit(act, (0.0, 0.0))
        assert orb.closed and orb.size == 1

    def test_h_fixes_real_origin_but_f_does_not(self):
        act = morse_smale_example(2)
        v = np.array([0.5, 0.5])
        assert float(torus_dist(act.h.raw(v), v)) < 1e-12
        assert float(torus_dist(act.f.raw(v), v)) > 0.2

    def test_rotation_vector_zero(self):
        act = morse_smale_example(2)
        est = rotation_vector(act.f, v0=(0.0, 0.0), iterates=100)
        assert est.value == (0.0, 0.0)


class TestFaithfulness:
    @pytest.mark.parametrize(
        "name", ["standard-line", "periodic-circle", "morse-smale"]
    )
    def test_faithful_entries(self, name):
        rep = faithfulness_evidence(build_action(name))
        assert rep.faithful_evidence
        assert rep.trivial_words == []

    def test_standard_torus_evidence(self):
        rep = faithfulness_evidence(standard_torus(2), grid=64)
        assert rep.faithful_evidence

    def test_nonfaithful_kernel_found(self):
        rep = faithfulness_evidence(nonfaithful_circle(2, k="rot:golden"))
        assert not rep.faithful_evidence
        assert rep.min_residual == 0.0
        assert "b" in rep.trivial_words

    def test_nonfaithful_orbit_is_k_orbit(self):
        act = nonfaithful_circle(2, k="rot:1/3")
        orb = finite_bs_orbit(act, 0.1)
        assert orb.closed and orb.size == 3
        act = nonfaithful_circle(2, k="rot:golden")
        orb = finite_bs_orbit(act, 0.1, max_size=300)
        assert not orb.closed
