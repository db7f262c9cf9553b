"""Homeomorphisms of the 2-torus as lifts F: R^2 -> R^2 with
F(v + m) = F(v) + A m for integer vectors m and a fixed A in GL(2, Z).

The first coordinate is the projectively glued circle used throughout
(`bsdl.circle`), the second an ordinary R/Z factor, so product maps are
built from two circle lifts and inherit their exact composition rules.
Linear models A v + b cover the algebraic examples whose translation
parts are forced by the group relation.

Rotation vectors and rotation sets are displacement averages of lifts
with identity linear part; they live in R^2 (changing the lift shifts
them by integers, which is why the relation constrains them only mod
Z^2, see `bs_rotation_constraint`).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .circle import CircleLift, circle_dist, compose as compose_circle
from .gl2z import IntMatrix2, rational_to_json

__all__ = [
    "TorusLift",
    "ProductTorusLift",
    "LinearTorusLift",
    "FunctionTorusLift",
    "ComposedTorusLift",
    "compose2",
    "wrap2",
    "torus_dist",
    "rotation_vector",
    "RotationVectorEstimate",
    "rotation_set",
    "RotationSetEstimate",
    "convex_hull",
    "hausdorff_distance",
    "conjugate_rotation_set_check",
    "ConjugacyRotationReport",
    "bs_rotation_constraint",
    "RotationConstraintReport",
]

PERIODICITY_TOL = 1e-10


def thread_count() -> int:
    """Worker count for grid sweeps, from BSDL_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("BSDL_THREADS", "1")))
    except ValueError:
        return 1


def wrap2(v):
    """Componentwise reduction to [0, 1)^2."""
    v = np.asarray(v, dtype=float)
    return v - np.floor(v)


def torus_dist(p, q):
    """Sup metric on the torus: the larger of the two circle distances."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.max(circle_dist(p, q), axis=-1)


class TorusLift:
    """Base class for torus lifts; `linear_part` is the induced map on
    H_1 = Z^2 and governs how the lift commutes with deck translations."""

    label = ""
    linear_part = IntMatrix2.identity()

    def raw(self, v):
        raise NotImplementedError

    def __call__(self, v):
        out = self.raw(np.asarray(v, dtype=float))
        return out

    def validate(self, grid: int = 8, tol: float = PERIODICITY_TOL):
        """Check equivariance F(v + m) = F(v) + A m on a sample grid."""
        g = np.arange(grid) / grid
        vs = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
        base = self.raw(vs)
        A = self.linear_part
        for m in ((1, 0), (0, 1), (1, 1), (-1, 2)):
            shifted = self.raw(vs + np.array(m, dtype=float))
            expected = base + np.array(A.apply(m), dtype=float)
            err = np.max(np.abs(shifted - expected))
            if err > tol:
                raise ValueError(
                    f"{type(self).__name__}: deck translation {m} defect "
                    f"{err:.3e} exceeds {tol:.1e}"
                )
        return self

    def inverse(self) -> "TorusLift":
        raise NotImplementedError(f"{type(self).__name__} has no inverse rule")

    def iterate(self, v, m: int):
        if m == 0:
            return np.asarray(v, dtype=float)
        g = self if m > 0 else self.inverse()
        w = np.asarray(v, dtype=float)
        for _ in range(abs(m)):
            w = g.raw(w)
        return w

    def seam_distance(self, v):
        """Distance from v to the nearest non-smooth locus, None if smooth."""
        return None


class ProductTorusLift(TorusLift):
    """(u, t) -> (F(u), K(t)) for two circle lifts."""

    def __init__(self, base: CircleLift, fiber: CircleLift, label: str = ""):
        self.base = base
        self.fiber = fiber
        self.label = label or f"({base.label} x {fiber.label})"

    def raw(self, v):
        v = np.asarray(v, dtype=float)
        return np.stack(
            [self.base.raw(v[..., 0]), self.fiber.raw(v[..., 1])], axis=-1
        )

    def inverse(self):
        return ProductTorusLift(self.base.inverse(), self.fiber.inverse())

    def iterate(self, v, m: int):
        v = np.asarray(v, dtype=float)
        return np.stack(
            [self.base.iterate(v[..., 0], m), self.fiber.iterate(v[..., 1], m)],
            axis=-1,
        )

    def seam_distance(self, v):
        v = np.asarray(v, dtype=float)
        cands = []
        d = self.base.seam_distance(float(v[..., 0]))
        if d is not None:
            cands.append(d)
        d = self.fiber.seam_distance(float(v[..., 1]))
        if d is not None:
            cands.append(d)
        return min(cands) if cands else None


class LinearTorusLift(TorusLift):
    """v -> A v + b with A in GL(2, Z)."""

    def __init__(self, A: IntMatrix2, b=(0.0, 0.0), label: str = ""):
        if not A.is_unimodular():
            raise ValueError(f"linear part must have determinant +-1, got {A.det()}")
        self.linear_part = A
        self.b = (float(b[0]), float(b[1]))
        self._mat = np.array(A.rows(), dtype=float)
        self.label = label or f"linear{A.rows()}"

    def raw(self, v):
        v = np.asarray(v, dtype=float)
        return v @ self._mat.T + np.array(self.b)

    def inverse(self):
        Ainv = self.linear_part.inverse()
        mb = Ainv.rows()
        b2 = (
            -(mb[0][0] * self.b[0] + mb[0][1] * self.b[1]),
            -(mb[1][0] * self.b[0] + mb[1][1] * self.b[1]),
        )
        return LinearTorusLift(Ainv, b2)

    def iterate(self, v, m: int):
        if m == 0:
            return np.asarray(v, dtype=float)
        g = self if m > 0 else self.inverse()
        A = g.linear_part
        if A == IntMatrix2.identity():
            return np.asarray(v, dtype=float) + abs(m) * np.array(g.b)
        P = IntMatrix2.identity()
        S = np.zeros(2)
        for _ in range(abs(m)):
            S = np.array(P.rows(), dtype=float) @ np.array(g.b) + S
            P = g.linear_part * P
        return np.asarray(v, dtype=float) @ np.array(P.rows(), dtype=float).T + S


class FunctionTorusLift(TorusLift):
    """Lift given by an arbitrary callable on (..., 2) arrays."""

    def __init__(self, fn, linear_part=None, inverse_fn=None, label: str = "fn2"):
        self._fn = fn
        self._inverse_fn = inverse_fn
        self.linear_part = linear_part or IntMatrix2.identity()
        self.label = label

    def raw(self, v):
        return np.asarray(self._fn(np.asarray(v, dtype=float)), dtype=float)

    def inverse(self):
        if self._inverse_fn is None:
            raise NotImplementedError("no inverse supplied for this lift")
        return FunctionTorusLift(
            self._inverse_fn,
            self.linear_part.inverse(),
            self._fn,
            label=self.label + "^-1",
        )


class ComposedTorusLift(TorusLift):
    def __init__(self, outer: TorusLift, inner: TorusLift, label: str = ""):
        self.outer = outer
        self.inner = inner
        self.linear_part = outer.linear_part * inner.linear_part
        self.label = label or f"({outer.label} o {inner.label})"

    def raw(self, v):
        return self.outer.raw(self.inner.raw(np.asarray(v, dtype=float)))

    def inverse(self):
        return ComposedTorusLift(self.inner.inverse(), self.outer.inverse())

    def seam_distance(self, v):
        v = np.asarray(v, dtype=float)
        cands = []
        d = self.inner.seam_distance(v)
        if d is not None:
            cands.append(d)
        d = self.outer.seam_distance(self.inner.raw(v))
        if d is not None:
            cands.append(d)
        return min(cands) if cands else None


def compose2(outer: TorusLift, inner: TorusLift) -> TorusLift:
    """Torus lift of outer o inner, with exact parameter fusion for
    product and linear pairs."""
    if isinstance(outer, ProductTorusLift) and isinstance(inner, ProductTorusLift):
        return ProductTorusLift(
            compose_circle(outer.base, inner.base),
            compose_circle(outer.fiber, inner.fiber),
        )
    if isinstance(outer, LinearTorusLift) and isinstance(inner, LinearTorusLift):
        A = outer.linear_part * inner.linear_part
        ob = np.array(outer.b)
        nb = np.array(outer._mat) @ np.array(inner.b) + ob
        return LinearTorusLift(A, (nb[0], nb[1]))
    return ComposedTorusLift(outer, inner)


# ---------------------------------------------------------------------------
# rotation vectors and sets


@dataclass
class RotationVectorEstimate:
    value: tuple
    iterates_used: int
    error_bound: float

    def to_json(self):
        return {
            "value": [float(self.value[0]), float(self.value[1])],
            "iterates_used": self.iterates_used,
            "error_bound": self.error_bound,
        }


def _require_identity_linear_part(F, what):
    if F.linear_part != IntMatrix2.identity():
        raise ValueError(
            f"{what} needs a lift with identity action on homology, "
            f"got {F.linear_part.rows()}"
        )


def rotation_vector(
    F: TorusLift, v0=(0.0, 0.0), iterates: int = 10**4
) -> RotationVectorEstimate:
    """Mean displacement of the orbit of v0 under the lift F.

    The error bound is heuristic: the deviation between the two half-orbit
    means, floored at the trivial 1/N term scaled by the displacement
    spread.
    """
    _require_identity_linear_part(F, "rotation_vector")
    v = wrap2(np.asarray(v0, dtype=float))
    half = iterates // 2
    total = np.zeros(2)
    first = np.zeros(2)
    lo = np.full(2, np.inf)
    hi = np.full(2, -np.inf)
    for k in range(iterates):
        fv = F.raw(v)
        d = fv - v
        total += d
        if k < half:
            first += d
        lo = np.minimum(lo, d)
        hi = np.maximum(hi, d)
        v = fv - np.floor(fv)
    mean = total / iterates
    mean_first = first / max(half, 1)
    mean_second = (total - first) / max(iterates - half, 1)
    spread = float(np.linalg.norm(hi - lo))
    err = max(
        float(np.max(np.abs(mean_first - mean_second))), spread / iterates, 1e-12
    )
    return RotationVectorEstimate(
        value=(float(mean[0]), float(mean[1])),
        iterates_used=iterates,
        error_bound=err,
    )


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points):
    """Vertices of the convex hull, counterclockwise (monotone chain).

    Collinear clouds collapse to their two extreme points, single points
    to themselves.
    """
    pts = np.unique(np.round(np.asarray(points, dtype=float), 12), axis=0)
    if pts.shape[0] <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    P = pts[order]

    def build(seq):
        h = []
        for p in seq:
            while len(h) >= 2 and _cross(h[-2], h[-1], p) <= 0.0:
                h.pop()
            h.append((float(p[0]), float(p[1])))
        return h

    lower = build(P)
    upper = build(P[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _point_to_segment(p, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def _point_to_hull(p, hull):
    hull = np.asarray(hull, dtype=float)
    p = np.asarray(p, dtype=float)
    n = hull.shape[0]
    if n == 1:
        return float(np.linalg.norm(p - hull[0]))
    if n == 2:
        return _point_to_segment(p, hull[0], hull[1])
    inside = all(
        _cross(hull[i], hull[(i + 1) % n], p) >= -1e-12 for i in range(n)
    )
    if inside:
        return 0.0
    return min(
        _point_to_segment(p, hull[i], hull[(i + 1) % n]) for i in range(n)
    )


def hausdorff_distance(hull_a, hull_b) -> float:
    """Hausdorff distance between two convex regions given by hull vertices."""
    a = np.atleast_2d(np.asarray(hull_a, dtype=float))
    b = np.atleast_2d(np.asarray(hull_b, dtype=float))
    d1 = max(_point_to_hull(p, b) for p in a)
    d2 = max(_point_to_hull(q, a) for q in b)
    return max(d1, d2)


@dataclass
class RotationSetEstimate:
    """Convex hull of orbitwise mean displacements.

    vertices are counterclockwise hull vertices in R^2; is_point flags a
    diameter below 1e-3, the working resolution for distinguishing a
    point rotation set from a genuine continuum.
    """

    vertices: np.ndarray
    diameter: float
    is_point: bool
    error_bound: float
    grid: int
    iterates_used: int

    @property
    def center(self):
        v = np.atleast_2d(self.vertices)
        return (float(np.mean(v[:, 0])), float(np.mean(v[:, 1])))

    def to_json(self):
        return {
            "vertices": [[float(x), float(y)] for x, y in np.atleast_2d(self.vertices)],
            "diameter": self.diameter,
            "is_point": self.is_point,
            "error_bound": self.error_bound,
            "grid": self.grid,
            "iterates_used": self.iterates_used,
        }


def _mean_displacements(F, starts, iterates, transient):
    v = np.array(starts, dtype=float)
    total = np.zeros_like(v)
    lo = np.full(2, np.inf)
    hi = np.full(2, -np.inf)
    for k in range(transient + iterates):
        fv = F.raw(v)
        d = fv - v
        if k >= transient:
            total += d
            lo = np.minimum(lo, d.reshape(-1, 2).min(axis=0))
            hi = np.maximum(hi, d.reshape(-1, 2).max(axis=0))
        v = fv - np.floor(fv)
    return total / iterates, lo, hi


def rotation_set(
    F: TorusLift,
    grid: int = 32,
    iterates: int = 10**4,
    transient: int = 100,
    point_tol: float = 1e-3,
) -> RotationSetEstimate:
    """Outer numerical estimate of the rotation set of the lift F.

    Runs mean displacements from a grid x grid array of starts (after a
    short transient) and returns the convex hull of the resulting cloud.
    Worker threads split the grid when BSDL_THREADS is set; chunking does
    not change any orbit, so the result is identical either way.
    """
    _require_identity_linear_part(F, "rotation_set")
    g = (np.arange(grid) + 0.5) / grid
    starts = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    workers = thread_count()
    if workers > 1:
        chunks = np.array_split(starts, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    lambda c: _mean_displacements(F, c, iterates, transient), chunks
                )
            )
        means = np.concatenate([p[0] for p in parts])
        lo = np.min([p[1] for p in parts], axis=0)
        hi = np.max([p[2] for p in parts], axis=0)
    else:
        means, lo, hi = _mean_displacements(F, starts, iterates, transient)
    hull = convex_hull(means)
    pts = np.atleast_2d(hull)
    diam = 0.0
    for i in range(pts.shape[0]):
        d = np.linalg.norm(pts - pts[i], axis=1)
        diam = max(diam, float(np.max(d)))
    spread = float(np.linalg.norm(hi - lo))
    err = max(spread / math.sqrt(iterates), 1.0 / iterates)
    return RotationSetEstimate(
        vertices=pts,
        diameter=diam,
        is_point=diam < point_tol,
        error_bound=err,
        grid=grid,
        iterates_used=iterates,
    )


@dataclass
class ConjugacyRotationReport:
    hausdorff: float
    tolerance: float
    consistent: bool
    mapped_vertices: np.ndarray
    target_vertices: np.ndarray

    def to_json(self):
        return {
            "hausdorff": self.hausdorff,
            "tolerance": self.tolerance,
            "consistent": self.consistent,
            "mapped_vertices": [
                [float(x), float(y)] for x, y in np.atleast_2d(self.mapped_vertices)
            ],
            "target_vertices": [
                [float(x), float(y)] for x, y in np.atleast_2d(self.target_vertices)
            ],
        }


def conjugate_rotation_set_check(
    F: TorusLift,
    G: TorusLift,
    A: IntMatrix2,
    grid: int = 16,
    iterates: int = 4000,
    tol: float = 1e-2,
) -> ConjugacyRotationReport:
    """Test the rotation-set covariance rho(H F H^-1) = A rho(F) mod Z^2
    for a claimed conjugacy with linear part A carrying F to G.

    Both rotation sets are estimated numerically, the hull of F is pushed
    through A, and the two hulls are compared in Hausdorff distance after
    translating by the best integer vector.
    """
    RF = rotation_set(F, grid=grid, iterates=iterates)
    RG = rotation_set(G, grid=grid, iterates=iterates)
    M = np.array(A.rows(), dtype=float)
    mapped = np.atleast_2d(RF.vertices) @ M.T
    mapped_hull = convex_hull(mapped)
    shift = np.round(
        np.mean(np.atleast_2d(RG.vertices), axis=0)
        - np.mean(np.atleast_2d(mapped_hull), axis=0)
    )
    mapped_hull = np.atleast_2d(mapped_hull) + shift
    hd = hausdorff_distance(mapped_hull, RG.vertices)
    opnorm = float(np.max(np.sum(np.abs(M), axis=1)))
    tolerance = max(tol, opnorm * RF.error_bound + RG.error_bound)
    return ConjugacyRotationReport(
        hausdorff=hd,
        tolerance=tolerance,
        consistent=hd <= tolerance,
        mapped_vertices=mapped_hull,
        target_vertices=np.atleast_2d(RG.vertices),
    )


@dataclass
class RotationConstraintReport:
    """Outcome of the relation constraint (n I - A_h) rho(f) in Z^2.

    q_float is the left side at the numerical rotation vector, q_int its
    integer rounding, residual the rounding defect. When the constraint
    matrix is invertible, snapped is the exact rational rotation vector
    solving (n I - A_h) rho = q_int.
    """

    n: int
    matrix: IntMatrix2
    q_float: tuple
    q_int: tuple
    residual: float
    satisfied: bool
    snapped: tuple | None

    def to_json(self):
        return {
            "n": self.n,
            "constraint_matrix": self.matrix.to_json(),
            "q_float": [float(self.q_float[0]), float(self.q_float[1])],
            "q_int": [int(self.q_int[0]), int(self.q_int[1])],
            "residual": self.residual,
            "satisfied": self.satisfied,
            "snapped": None
            if self.snapped is None
            else [rational_to_json(self.snapped[0]), rational_to_json(self.snapped[1])],
        }


def bs_rotation_constraint(
    rho, A_h: IntMatrix2, n: int, tol: float = 1e-2
) -> RotationConstraintReport:
    """Check a rotation vector against the constraint the group relation
    imposes: conjugating by h multiplies rho(f) by A_h on homology while
    f^n multiplies it by n, so (n I - A_h) rho(f) must be an integer
    vector. Accepts rho as a pair or a RotationVectorEstimate.
    """
    if isinstance(rho, RotationVectorEstimate):
        rho = rho.value
    r0, r1 = float(rho[0]), float(rho[1])
    rows = A_h.rows()
    M = IntMatrix2.from_rows(
        (n - rows[0][0], -rows[0][1]), (-rows[1][0], n - rows[1][1])
    )
    m = M.rows()
    q0 = m[0][0] * r0 + m[0][1] * r1
    q1 = m[1][0] * r0 + m[1][1] * r1
    qi0, qi1 = int(round(q0)), int(round(q1))
    residual = max(abs(q0 - qi0), abs(q1 - qi1))
    satisfied = residual <= tol
    snapped = None
    if satisfied and M.det() != 0:
        d = Fraction(M.det())
        # adjugate solve, exact
        s0 = Fraction(m[1][1] * qi0 - m[0][1] * qi1) / d
        s1 = Fraction(-m[1][0] * qi0 + m[0][0] * qi1) / d
        snapped = (s0, s1)
    return RotationConstraintReport(
        n=n,
        matrix=M,
        q_float=(q0, q1),
        q_int=(qi0, qi1),
        residual=residual,
        satisfied=satisfied,
        snapped=snapped,
    )
