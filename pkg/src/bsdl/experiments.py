"""Perturbation harness: invariant circles by graph transform, rotation
number of the restricted return map, trichotomy classification, and
persistent common fixed points.

Perturbations are applied only inside relation-preserving families:
fiber changes of a product action, and simultaneous conjugation of both
generators by a small diffeomorphism. Arbitrary independent bumps on f
and h would break h f h^-1 = f^n, so they are out of scope. Outcomes
are reported together with the diagnostics that justify them; when the
evidence is inconclusive the harness says Unknown instead of guessing.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np
from scipy.interpolate import CubicSpline

from .bsgroup import BSAction, FiniteOrbit, finite_bs_orbit, make_action
from .circle import (
    FunctionLift,
    RotationNumberEstimate,
    circle_dist,
    compose as compose_circle,
    rotation_number,
    wrap,
)
from .estimators import CellSet, _largest_gap, fixed_cells
from .gl2z import IntMatrix2
from .torus import (
    FunctionTorusLift,
    ProductTorusLift,
    RotationConstraintReport,
    RotationSetEstimate,
    TorusLift,
    bs_rotation_constraint,
    compose2,
    rotation_set,
    torus_dist,
    wrap2,
)


class GraphFoldError(RuntimeError):
    """The pushed graph stopped being a graph over the fiber angle."""


class NonConvergentError(RuntimeError):
    """Graph transform failed to reach the residual target."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals or [])


@dataclass
class InvariantCircleEstimate:
    """Sampled graph theta -> u of an h-invariant circle.

    Graph values are stored as real numbers in a window of width one
    centered at the seed, so a circle hugging the glued point does not
    get chopped by the wrap seam. residual is the sup over samples of
    the vertical circle distance between h(graph point) and the graph;
    it is recomputed from scratch after the transform, so a small value
    certifies invariance independently of how the graph was found.
    side is Attracting for forward iteration, Repelling for backward.
    """

    thetas: np.ndarray
    graph: np.ndarray
    residual: float
    side: str
    iterations: int
    tol: float

    def __post_init__(self):
        self._interp = _periodic_interp(self.thetas, self.graph)

    def at(self, theta):
        th = np.mod(np.asarray(theta, dtype=float), 1.0)
        return self._interp(th)

    def spread(self):
        return float(np.max(self.graph) - np.min(self.graph))

    def to_json(self):
        return {
            "samples": int(len(self.thetas)),
            "residual": self.residual,
            "side": self.side,
            "iterations": self.iterations,
            "tol": self.tol,
            "u_mean": float(np.mean(self.graph)),
            "u_min": float(np.min(self.graph)),
            "u_max": float(np.max(self.graph)),
        }


def _periodic_interp(thetas, values):
    """Period-one C^2 cubic spline through (thetas, values).

    A clamped monotone interpolant would be safer against overshoot,
    but its derivative limiting at interior extrema floors the
    achievable self-residual near 1e-8 at 512 samples; the periodic
    spline interpolates smooth graphs to round-off. Fold safety is
    handled before interpolation, on the angle sequence itself.
    """
    t = np.concatenate([thetas, [thetas[0] + 1.0]])
    v = np.concatenate([values, [values[0]]])
    sp = CubicSpline(t, v, bc_type="periodic")
    lo = float(thetas[0])

    def ev(x):
        x = np.asarray(x, dtype=float)
        return sp(lo + np.mod(x - lo, 1.0))

    return ev


def find_invariant_circle(
    h: TorusLift,
    seed,
    direction: str = "forward",
    samples: int = 512,
    max_iter: int = 200,
    tol: float = 1e-10,
) -> InvariantCircleEstimate:
    """Graph transform for a normally hyperbolic h-invariant circle.

    The candidate graph is pushed by h (forward, for an attracting
    circle) or h^-1 (backward, repelling), the image points are
    reprojected to a graph over the uniform fiber grid by monotone
    cubic interpolation, and the loop runs until the recomputed
    residual drops below tol. seed may be a constant u value, an array
    of u over the grid, a callable theta -> u, or a previous estimate.
    The residual is checked before the first push, so an exactly
    invariant seed converges in zero iterations.
    """
    direction = direction.lower()
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be forward or backward: {direction!r}")
    thetas = np.arange(samples) / samples
    if isinstance(seed, InvariantCircleEstimate):
        g = np.asarray(seed.at(thetas), dtype=float)
    elif callable(seed):
        g = np.asarray(seed(thetas), dtype=float)
    elif np.ndim(seed) == 0:
        g = np.full(samples, float(seed))
    else:
        g = np.asarray(seed, dtype=float)
        if g.shape != (samples,):
            raise ValueError(f"seed array must have shape ({samples},)")
        g = g.copy()
    center = float(g[0])
    F = h if direction == "forward" else h.inverse()
    side = "Attracting" if direction == "forward" else "Repelling"

    def recenter(u):
        return center + (np.mod(u - center + 0.5, 1.0) - 0.5)

    def push(g):
        img = F.raw(np.stack([g, thetas], axis=-1))
        up = recenter(img[..., 0])
        tp = np.mod(img[..., 1], 1.0)
        # a degree-one monotone image has exactly one cyclic descent;
        # anything else means the pushed curve folded over the fiber
        descents = int(np.sum(tp[1:] <= tp[:-1])) + int(tp[0] <= tp[-1])
        if descents != 1:
            raise GraphFoldError(
                f"pushed curve is not a graph ({descents} descents "
                f"over {samples} samples)"
            )
        order = np.argsort(tp, kind="stable")
        return _periodic_interp(tp[order], up[order])(thetas)

    def residual_of(g):
        interp = _periodic_interp(thetas, g)
        img = h.raw(np.stack([g, thetas], axis=-1))
        target = interp(np.mod(img[..., 1], 1.0))
        return float(np.max(circle_dist(img[..., 0], target)))

    res = residual_of(g)
    history = [res]
    iters = 0
    while res > tol and iters < max_iter:
        g = push(g)
        iters += 1
        res = residual_of(g)
        history.append(res)
    if res > tol:
        raise NonConvergentError(
            f"graph transform stalled at residual {res:.3e} after "
            f"{iters} iterations (tol {tol:.1e})",
            history,
        )
    return InvariantCircleEstimate(thetas, g, res, side, iters, tol)


@dataclass
class TrichotomyReport:
    """Classification of the minimal set living on an invariant circle.

    rotation_number is the estimate for h restricted to the circle;
    outcome is FiniteOrbits, MinimalCircle, MinimalCantor, or Unknown,
    and evidence holds the diagnostics that back it (witness data,
    orbit closure, gap profiles, per-resolution cell counts).
    """

    rotation_number: RotationNumberEstimate
    outcome: str
    evidence: dict = field(default_factory=dict)
    orbit: FiniteOrbit | None = None

    def to_json(self):
        rho = self.rotation_number
        w = rho.rational_witness
        return {
            "outcome": self.outcome,
            "rotation_number": {
                "value": rho.value,
                "iterates_used": rho.iterates_used,
                "error_bound": rho.error_bound,
                "rational_witness": None
                if w is None
                else {"p": w[0], "q": w[1], "angle": w[2], "residual": w[3]},
            },
            "evidence": self.evidence,
            "orbit": None if self.orbit is None else self.orbit.to_json(),
        }


def restricted_circle_map(h: TorusLift, circle: InvariantCircleEstimate):
    """Return map of h on an invariant graph as a circle lift.

    When the graph is a horizontal fiber of a product action the fiber
    factor is returned as-is, exactly; interpolating through the graph
    would smear an exactly rational fiber angle by the interpolation
    error and fake or destroy rational witnesses. Otherwise the angle
    coordinate of h along the graph is wrapped into a function lift.
    """
    if circle.spread() < 1e-12 and isinstance(h, ProductTorusLift):
        return h.fiber, "product-fiber"

    def angle_map(t):
        t = np.asarray(t, dtype=float)
        u = np.asarray(circle.at(t), dtype=float)
        return h.raw(np.stack([u, np.broadcast_to(t, u.shape)], axis=-1))[..., 1]

    return FunctionLift(angle_map, label="h on invariant circle"), "graph"


def classify_perturbed(
    action: BSAction,
    circle: InvariantCircleEstimate = None,
    resolutions=(256, 512, 1024),
    orbit_iterates: int = 100000,
    transient: int = 200,
    q_max: int = 64,
    merge_tol: float = 1e-6,
    max_orbit: int = 5000,
) -> TrichotomyReport:
    """Decide the minimal-set trichotomy on an h-invariant circle.

    A rational rotation number (certified by a witness) sends the
    search to finite_bs_orbit from the witness point; FiniteOrbits is
    reported only when that orbit actually closes. An irrational one is
    classified through the largest-gap profile of the restricted orbit,
    reusing one orbit across all resolutions. Anything inconclusive is
    Unknown.
    """
    if action.space != "torus":
        raise ValueError("trichotomy classification expects a torus action")
    if circle is None:
        circle = find_invariant_circle(action.h, 0.0)

    evidence = {
        "circle_residual": circle.residual,
        "circle_spread": circle.spread(),
    }
    P = fixed_cells(action.f, resolutions[0])
    dense_t = np.arange(4 * resolutions[0]) / (4 * resolutions[0])
    circle_pts = np.stack([wrap(circle.at(dense_t)), dense_t], axis=-1)
    circ_cells0 = CellSet.from_points(circle_pts, resolutions[0], "torus")
    meets = len(P.intersect(circ_cells0)) > 0
    evidence["fixed_cells"] = len(P)
    evidence["fixed_meets_circle"] = meets

    restriction, kind = restricted_circle_map(action.h, circle)
    evidence["restriction"] = kind
    rho = rotation_number(restriction, iterates=orbit_iterates, q_max=q_max)

    if not meets:
        evidence["reason"] = "f-fixed cells never meet the circle"
        return TrichotomyReport(rho, "Unknown", evidence)

    if rho.rational_witness is not None:
        p, q, angle, wres = rho.rational_witness
        evidence["witness"] = {"p": p, "q": q, "angle": angle, "residual": wres}
        x0 = np.array([wrap(float(circle.at(angle))), wrap(angle)])
        orb = finite_bs_orbit(
            action, x0, merge_tol=merge_tol, max_size=max_orbit
        )
        evidence["orbit_size"] = orb.size
        evidence["orbit_closed"] = orb.closed
        if orb.closed:
            evidence["orbit_defect"] = orb.defect
            return TrichotomyReport(rho, "FiniteOrbits", evidence, orb)
        evidence["reason"] = "rational witness but the orbit did not close"
        return TrichotomyReport(rho, "Unknown", evidence, orb)

    # irrational: one long restricted orbit, gap statistics at several
    # sample sizes, cell coverage at several resolutions
    t = 0.0
    for _ in range(transient):
        t = restriction.raw(t)
    angles = np.empty(int(orbit_iterates))
    for k in range(int(orbit_iterates)):
        angles[k] = t
        t = restriction.raw(t)
    angles = wrap(angles)
    sizes = sorted({min(s, len(angles)) for s in (1000, 10000, 100000)})
    profile = {s: _largest_gap(angles[:s]) for s in sizes}
    evidence["gap_profile"] = {str(s): profile[s] for s in sizes}
    g_last = profile[sizes[-1]]

    orbit_pts = np.stack([wrap(circle.at(angles)), angles], axis=-1)
    per_res = []
    all_strict = True
    all_above_cell = True
    for R in resolutions:
        tg = np.arange(4 * R) / (4 * R)
        cpts = np.stack([wrap(circle.at(tg)), tg], axis=-1)
        ccells = CellSet.from_points(cpts, R, "torus")
        ocells = CellSet.from_points(orbit_pts, R, "torus")
        strict = ocells.issubset(ccells.dilate()) and len(ocells) < len(ccells)
        per_res.append(
            {
                "resolution": R,
                "circle_cells": len(ccells),
                "orbit_cells": len(ocells),
                "strict_subset": strict,
            }
        )
        all_strict = all_strict and strict
        all_above_cell = all_above_cell and g_last > 10.0 / R
    evidence["refinements"] = per_res

    if g_last < 5.0 / math.sqrt(sizes[-1]) and g_last <= 0.5 * profile[sizes[0]]:
        return TrichotomyReport(rho, "MinimalCircle", evidence)
    stabilized = (
        len(sizes) >= 2
        and abs(profile[sizes[-2]] - g_last) <= 0.1 * g_last
    )
    if stabilized and all_above_cell:
        evidence["cantor_strict_subset"] = all_strict
        return TrichotomyReport(rho, "MinimalCantor", evidence)
    evidence["reason"] = "gap profile neither vanishing nor stabilized"
    return TrichotomyReport(rho, "Unknown", evidence)


def persistent_fixed_point(
    action: BSAction, search_resolution: int = 64, tol: float = 1e-8
):
    """Common fixed point of f and h, or None.

    Grid-scans the h-displacement (the grid contains the exact lattice
    corner, so a fixed glued point is hit exactly), Newton-refines the
    best candidates on h(v) - v with central-difference Jacobians, and
    keeps a refined point only when both generator residuals pass tol.
    """
    f, h = action.f, action.h
    S = int(search_resolution)
    if action.space == "circle":
        xs = np.arange(S) / S
        disp = circle_dist(h.raw(xs), xs)
        order = np.argsort(disp, kind="stable")
        for idx in order[:12]:
            if disp[idx] > 0.1:
                break
            x = float(xs[idx])
            for _ in range(40):
                gx = float(h.raw(x)) - x
                if abs(gx) < 1e-14:
                    break
                s = 1e-6
                dg = (float(h.raw(x + s)) - float(h.raw(x - s))) / (2 * s) - 1.0
                if dg == 0.0:
                    break
                x = x - gx / dg
            x = float(wrap(x))
            if (
                circle_dist(h.raw(x), x) < tol
                and circle_dist(f.raw(x), x) < tol
            ):
                return x
        return None

    g = np.arange(S) / S
    uu, tt = np.meshgrid(g, g, indexing="ij")
    vs = np.stack([uu.ravel(), tt.ravel()], axis=-1)
    disp = torus_dist(h.raw(vs), vs)
    order = np.argsort(disp, kind="stable")
    tried = []
    for idx in order[:12]:
        if disp[idx] > 0.2:
            break
        v = vs[idx].copy()
        if any(torus_dist(v, w) < 2.0 / S for w in tried):
            continue
        tried.append(v.copy())
        for _ in range(40):
            gv = h.raw(v) - v
            if float(np.max(np.abs(gv))) < 1e-14:
                break
            s = 1e-6
            cols = []
            for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
                cols.append((h.raw(v + s * e) - h.raw(v - s * e)) / (2 * s))
            J = np.stack(cols, axis=-1) - np.eye(2)
            try:
                step = np.linalg.solve(J, -gv)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(J, -gv, rcond=None)[0]
            v = v + step
        v = wrap2(v)
        if (
            torus_dist(h.raw(v), v) < tol
            and torus_dist(f.raw(v), v) < tol
        ):
            return v
    return None


@dataclass
class RotationPersistenceReport:
    """Lattice test for the rotation set of f in a BS pair.

    The relation forces (n - 1) rho(f) into Z^2 when h acts trivially
    on homology, so the estimated point must snap to the lattice with
    spacing 1/(n-1); within half a spacing of the origin the snap must
    give (0, 0) exactly. passed requires a point estimate snapping to
    the origin.
    """

    n: int
    estimate: RotationSetEstimate
    constraint: RotationConstraintReport
    snapped: tuple | None
    snap_distance: float
    window: float
    passed: bool

    def to_json(self):
        return {
            "n": self.n,
            "estimate": self.estimate.to_json(),
            "constraint": self.constraint.to_json(),
            "snapped": None
            if self.snapped is None
            else [
                [s.numerator, s.denominator] for s in self.snapped
            ],
            "snap_distance": self.snap_distance,
            "window": self.window,
            "passed": self.passed,
        }


def rotation_set_persistence(
    f: TorusLift, n: int, grid: int = 16, iterates: int = 4000
) -> RotationPersistenceReport:
    """Estimate the rotation set of f and snap it to the (1/(n-1))-lattice."""
    est = rotation_set(f, grid=grid, iterates=iterates)
    window = 1.0 / (2.0 * (n - 1))
    center = np.mean(est.vertices, axis=0)
    constraint = bs_rotation_constraint(
        tuple(center), IntMatrix2.identity(), n, tol=0.5
    )
    snapped = constraint.snapped
    if snapped is None:
        snap_distance = float("inf")
        passed = False
    else:
        snap_distance = max(
            abs(float(center[0]) - float(snapped[0])),
            abs(float(center[1]) - float(snapped[1])),
        )
        passed = (
            est.is_point
            and snap_distance < window
            and snapped == (Fraction(0), Fraction(0))
        )
    return RotationPersistenceReport(
        n=n,
        estimate=est,
        constraint=constraint,
        snapped=snapped,
        snap_distance=snap_distance,
        window=window,
        passed=passed,
    )


def near_identity_diffeo(
    size: float = 1e-3, seed: int = 0, modes: int = 2
) -> FunctionTorusLift:
    """Random torus diffeomorphism v -> v + size * B(v), sup|B| = 1.

    B is a seeded random trigonometric displacement field with integer
    frequencies up to `modes`, normalized to unit sup norm on a sample
    grid, so `size` is the C0 distance to the identity. The inverse is
    computed by fixed-point iteration, which contracts because
    size * Lip(B) stays well below one for the sizes used here.
    """
    rng = np.random.default_rng(seed)
    ks = [
        (p, q)
        for p in range(-modes, modes + 1)
        for q in range(0, modes + 1)
        if q > 0 or p > 0
    ]
    amp = rng.normal(size=(2, len(ks)))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(2, len(ks)))

    def raw_field(v):
        u = v[..., 0]
        t = v[..., 1]
        out0 = np.zeros_like(u)
        out1 = np.zeros_like(u)
        for j, (p, q) in enumerate(ks):
            ang = 2.0 * np.pi * (p * u + q * t)
            out0 = out0 + amp[0, j] * np.cos(ang + phase[0, j])
            out1 = out1 + amp[1, j] * np.cos(ang + phase[1, j])
        return np.stack([out0, out1], axis=-1)

    gg = np.arange(64) / 64
    mu, mt = np.meshgrid(gg, gg, indexing="ij")
    mesh = np.stack([mu.ravel(), mt.ravel()], axis=-1)
    scale = 1.0 / float(np.max(np.abs(raw_field(mesh))))

    def fn(v):
        v = np.asarray(v, dtype=float)
        return v + size * scale * raw_field(v)

    def inv(w):
        w = np.asarray(w, dtype=float)
        y = w.copy()
        for _ in range(60):
            y2 = w - size * scale * raw_field(y)
            done = float(np.max(np.abs(y2 - y))) < 1e-15
            y = y2
            if done:
                break
        return y

    return FunctionTorusLift(
        fn, None, inv, label=f"bump(size={size:g},seed={seed})"
    )


def conjugated_action(action: BSAction, psi) -> BSAction:
    """Conjugate both generators by psi; the relation survives exactly.

    psi f psi^-1 and psi h psi^-1 satisfy the same group relation as
    (f, h), so this is the safe way to perturb an action by an
    arbitrary small diffeomorphism. The relation is still re-verified
    numerically, catching a psi whose numerical inverse is too loose.
    """
    comp = compose_circle if action.space == "circle" else compose2
    pinv = psi.inverse()
    f2 = comp(psi, comp(action.f, pinv))
    h2 = comp(psi, comp(action.h, pinv))
    return make_action(
        f2,
        h2,
        action.n,
        name=f"{action.name or 'action'} conjugated by {psi.label}",
    )
