"""Acceptance battery: the twelve numbered checks, one test line each.

The battery runs once per session (criterion 12 makes that two passes of
the other eleven) and every test inspects its own row, so a red line
points directly at the failing criterion with its recorded evidence.
"""

import pytest

from bsdl.acceptance import run_all


@pytest.fixture(scope="module")
def battery():
    rows = run_all(seed=7)
    return {r["id"]: r for r in rows}


def _check(battery, cid):
    row = battery[cid]
    mark = "PASS" if row["passed"] else "FAIL"
    print(f"[{cid:2d}] {row['name']:26s} {mark} ({row['elapsed']:.2f}s)")
    assert row["passed"], row["details"]


def test_criterion_01_relation_suite(battery):
    _check(battery, 1)


def test_criterion_02_matrix_classification(battery):
    _check(battery, 2)


def test_criterion_03_rotation_numbers(battery):
    _check(battery, 3)


def test_criterion_04_rotation_sets(battery):
    _check(battery, 4)


def test_criterion_05_conjugation_lemma(battery):
    _check(battery, 5)


def test_criterion_06_circle_trichotomy(battery):
    _check(battery, 6)


def test_criterion_07_constructive_minimal_set(battery):
    _check(battery, 7)


def test_criterion_08_periodic_no_fixed_points(battery):
    _check(battery, 8)


def test_criterion_09_fixed_point_persistence(battery):
    _check(battery, 9)


def test_criterion_10_perturbed_trichotomy(battery):
    _check(battery, 10)


def test_criterion_11_differentials(battery):
    _check(battery, 11)


def test_criterion_12_determinism(battery):
    _check(battery, 12)
