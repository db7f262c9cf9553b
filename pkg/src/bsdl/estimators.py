"""Grid estimators for fixed sets, limit sets, and minimal-set type.

Displacement tests run on cell centers of a uniform partition of the
circle or torus, with one refinement pass so flagged cells are re-tested
at double resolution and half tolerance. Minimal-set classification
compares largest-empty-arc statistics of a long orbit across sample
sizes: for an orbit equidistributing on a full circle the largest gap
decays like log(N)/N, while on a Cantor set it stabilizes at the widest
complementary gap.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .bsgroup import BSAction, finite_bs_orbit
from .circle import CircleLift, circle_dist, wrap
from .torus import TorusLift, torus_dist, wrap2

FIXED_POINT_TOL = 1e-8


def _space_of(F):
    if isinstance(F, TorusLift):
        return "torus"
    if isinstance(F, CircleLift):
        return "circle"
    raise TypeError(f"not a circle or torus lift: {type(F).__name__}")


def _cells_of(points, resolution, space):
    """Cell indices hit by an array of points (wrapped first)."""
    pts = np.asarray(points, dtype=float)
    if space == "circle":
        idx = np.minimum((wrap(pts) * resolution).astype(int), resolution - 1)
        return frozenset(int(i) for i in np.atleast_1d(idx).ravel())
    ij = np.minimum(
        (wrap2(pts.reshape(-1, 2)) * resolution).astype(int), resolution - 1
    )
    return frozenset((int(a), int(b)) for a, b in ij)


@dataclass
class CellSet:
    """Subset of the uniform cell partition at a fixed resolution.

    Circle cells are column indices i, standing for [i/R, (i+1)/R);
    torus cells are index pairs (i, j) for the product of two such
    intervals.
    """

    resolution: int
    space: str
    cells: frozenset = frozenset()

    def __post_init__(self):
        if self.space not in ("circle", "torus"):
            raise ValueError(f"unknown space {self.space!r}")
        if self.resolution < 1:
            raise ValueError("resolution must be positive")
        self.cells = frozenset(
            tuple(c) if isinstance(c, (tuple, list)) else int(c)
            for c in self.cells
        )

    @classmethod
    def from_points(cls, points, resolution, space):
        return cls(resolution, space, _cells_of(points, resolution, space))

    def __len__(self):
        return len(self.cells)

    def __contains__(self, cell):
        if isinstance(cell, (tuple, list)):
            cell = tuple(int(c) for c in cell)
        return cell in self.cells

    def __iter__(self):
        return iter(sorted(self.cells))

    def _compatible(self, other):
        if self.resolution != other.resolution or self.space != other.space:
            raise ValueError("cell sets live on different grids")

    def issubset(self, other):
        self._compatible(other)
        return self.cells <= other.cells

    def intersect(self, other):
        self._compatible(other)
        return CellSet(self.resolution, self.space, self.cells & other.cells)

    def union(self, other):
        self._compatible(other)
        return CellSet(self.resolution, self.space, self.cells | other.cells)

    def centers(self):
        """Cell centers, sorted by index; (k,) or (k, 2) array."""
        idx = sorted(self.cells)
        if self.space == "circle":
            return (np.array(idx, dtype=float) + 0.5) / self.resolution
        if not idx:
            return np.zeros((0, 2))
        return (np.array(idx, dtype=float) + 0.5) / self.resolution

    def dilate(self, steps: int = 1):
        """Grow by full neighborhoods (8 neighbors on the torus), wrapping."""
        R = self.resolution
        out = set(self.cells)
        for _ in range(steps):
            grown = set(out)
            if self.space == "circle":
                for i in out:
                    grown.add((i - 1) % R)
                    grown.add((i + 1) % R)
            else:
                for (i, j) in out:
                    for di in (-1, 0, 1):
                        for dj in (-1, 0, 1):
                            grown.add(((i + di) % R, (j + dj) % R))
            out = grown
        return CellSet(R, self.space, out)

    def measure(self):
        """Total cell area as a fraction of the whole space."""
        denom = float(self.resolution)
        if self.space == "torus":
            denom = denom * denom
        return len(self.cells) / denom

    def to_json(self):
        listed = [
            list(c) if isinstance(c, tuple) else c for c in sorted(self.cells)
        ]
        return {
            "resolution": self.resolution,
            "space": self.space,
            "cells": listed,
        }


def fixed_cells(f, resolution: int = 256, delta: float = None) -> CellSet:
    """Cells whose center moves less than delta under f, refined once.

    The test runs at half resolution first; flagged cells are subdivided
    and their children re-tested at delta / 2, so the returned set lives
    at the requested resolution. Default delta is twice the coarse cell
    diameter, 4 / resolution.
    """
    if resolution < 2 or resolution % 2:
        raise ValueError("resolution must be an even integer >= 2")
    space = _space_of(f)
    coarse = resolution // 2
    if delta is None:
        delta = 4.0 / resolution
    fine_delta = delta / 2.0
    if space == "circle":
        c = (np.arange(coarse) + 0.5) / coarse
        flag = np.nonzero(circle_dist(f.raw(c), c) < delta)[0]
        if flag.size == 0:
            return CellSet(resolution, space, frozenset())
        kids = np.concatenate([2 * flag, 2 * flag + 1])
        xs = (kids + 0.5) / resolution
        keep = circle_dist(f.raw(xs), xs) < fine_delta
        return CellSet(resolution, space, frozenset(int(k) for k in kids[keep]))
    g = (np.arange(coarse) + 0.5) / coarse
    uu, tt = np.meshgrid(g, g, indexing="ij")
    vs = np.stack([uu.ravel(), tt.ravel()], axis=-1)
    disp = torus_dist(f.raw(vs), vs)
    ii, jj = np.meshgrid(np.arange(coarse), np.arange(coarse), indexing="ij")
    fi = ii.ravel()[disp < delta]
    fj = jj.ravel()[disp < delta]
    if fi.size == 0:
        return CellSet(resolution, space, frozenset())
    kid_i = []
    kid_j = []
    for di in (0, 1):
        for dj in (0, 1):
            kid_i.append(2 * fi + di)
            kid_j.append(2 * fj + dj)
    kid_i = np.concatenate(kid_i)
    kid_j = np.concatenate(kid_j)
    cand = np.stack(
        [(kid_i + 0.5) / resolution, (kid_j + 0.5) / resolution], axis=-1
    )
    keep = torus_dist(f.raw(cand), cand) < fine_delta
    cells = frozenset(
        (int(a), int(b)) for a, b in zip(kid_i[keep], kid_j[keep])
    )
    return CellSet(resolution, space, cells)


def alpha_limit(h, x, transient: int = 200, samples: int = 500) -> np.ndarray:
    """Tail of the backward orbit of x under h, wrapped.

    Iterates h^-1 for `transient` steps, then records the next `samples`
    backward images; the tail approximates the alpha-limit set of x.
    """
    g = h.inverse()
    space = _space_of(h)
    rewrap = wrap if space == "circle" else wrap2
    y = rewrap(np.asarray(x, dtype=float))
    for _ in range(transient):
        y = rewrap(g.raw(y))
    out = []
    for _ in range(samples):
        out.append(np.array(y, copy=True))
        y = rewrap(g.raw(y))
    return np.array(out)


def birkhoff_displacement(F, x, iterates: int = 10000):
    """Average displacement (1/N) sum_k (F(x_k) - x_k) along the orbit.

    The orbit point is rewrapped each step, so each displacement is read
    off the fundamental domain; the average agrees with the rotation
    number or vector estimate over the same orbit up to round-off.
    """
    space = _space_of(F)
    rewrap = wrap if space == "circle" else wrap2
    v = rewrap(np.asarray(x, dtype=float))
    total = np.zeros(2) if space == "torus" else 0.0
    for _ in range(int(iterates)):
        w = F.raw(v)
        total = total + (w - v)
        v = rewrap(w)
    if space == "circle":
        return float(total) / float(iterates)
    return total / float(iterates)


@dataclass
class DifferentialReport:
    """Central-difference Jacobian with a step-halving diagnostic.

    richardson is the ratio of successive difference norms under step
    halving, near 4 for a clean second-order stencil; it is None when
    the differences sit at round-off level, in which case the estimate
    is converged and the ratio would be noise. seam_distance is the
    distance to the nearest non-smooth point of the map, None for
    everywhere-smooth lifts.
    """

    jacobian: np.ndarray
    moduli: tuple
    step: float
    richardson: float | None
    converged: bool
    seam_distance: float | None

    def to_json(self):
        return {
            "jacobian": [[float(v) for v in row] for row in self.jacobian],
            "moduli": [float(m) for m in self.moduli],
            "step": self.step,
            "richardson": self.richardson,
            "converged": self.converged,
            "seam_distance": self.seam_distance,
        }


def differential_at(f, x, step: float = 1e-3) -> DifferentialReport:
    """Jacobian of f at x by central differences at step, step/2, step/4.

    The reported matrix uses the smallest step. Eigenvalue moduli are
    sorted ascending, so an attracting-repelling saddle reads off as
    (contraction, expansion).
    """
    space = _space_of(f)
    if space == "circle":
        x0 = float(x)

        def jac(s):
            d = (float(f.raw(x0 + s)) - float(f.raw(x0 - s))) / (2.0 * s)
            return np.array([[d]])

    else:
        x0 = np.asarray(x, dtype=float)
        basis = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))

        def jac(s):
            cols = [
                (f.raw(x0 + s * e) - f.raw(x0 - s * e)) / (2.0 * s)
                for e in basis
            ]
            return np.stack(cols, axis=-1)

    J1 = jac(step)
    J2 = jac(step / 2.0)
    J3 = jac(step / 4.0)
    d1 = float(np.max(np.abs(J1 - J2)))
    d2 = float(np.max(np.abs(J2 - J3)))
    scale = max(1.0, float(np.max(np.abs(J1))))
    if d1 < 1e-12 * scale or d2 < 1e-13 * scale:
        ratio = None
        converged = True
    else:
        ratio = d1 / d2
        converged = 3.5 <= ratio <= 4.5
    moduli = tuple(sorted(float(abs(z)) for z in np.linalg.eigvals(J3)))
    sd = f.seam_distance(x0)
    return DifferentialReport(J3, moduli, step, ratio, converged, sd)


def _largest_gap(vals):
    """Widest empty arc left by a set of circle points, in [0, 1]."""
    s = np.sort(wrap(np.asarray(vals, dtype=float)).ravel())
    if s.size <= 1:
        return 1.0
    d = np.diff(s)
    inner = float(np.max(d)) if d.size else 0.0
    return max(inner, float(1.0 - s[-1] + s[0]))


@dataclass
class MinimalSetEstimate:
    """Outcome of the minimal-set search for one action.

    label is FiniteOrbit, MinimalCircle, MinimalCantor, or Unknown.
    points is a sample of the candidate minimal set (the finite orbit
    itself, or a subsample of the long generator orbit). cells covers
    the candidate set at the working resolution, fixed is the estimated
    fixed-cell set of f, and k_family[l] approximates the intersection
    of h^j-preimages of the fixed set for |j| <= l.
    """

    label: str
    points: np.ndarray
    cells: CellSet
    fixed: CellSet
    k_family: list
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        pts = np.asarray(self.points)
        if pts.ndim <= 1:
            listed = [float(p) for p in pts.ravel()[:2000]]
        else:
            listed = [[float(a) for a in row] for row in pts[:2000]]
        return {
            "label": self.label,
            "cells": self.cells.to_json(),
            "fixed_count": len(self.fixed),
            "k_counts": [len(k) for k in self.k_family],
            "diagnostics": self.diagnostics,
            "points": listed,
        }


def _orbit_tail(h, x0, space, transient, iterates):
    rewrap = wrap if space == "circle" else wrap2
    y = rewrap(np.asarray(x0, dtype=float))
    for _ in range(transient):
        y = rewrap(h.raw(y))
    if space == "circle":
        pts = np.empty(iterates)
    else:
        pts = np.empty((iterates, 2))
    for k in range(iterates):
        pts[k] = y
        y = rewrap(h.raw(y))
    return pts


def bs_minimal_set(
    action: BSAction,
    resolution: int = 256,
    depth: int = 8,
    orbit_iterates: int = 100000,
    transient: int = 200,
    merge_tol: float = 1e-6,
    max_orbit: int = 2000,
) -> MinimalSetEstimate:
    """Locate the minimal set of the action inside the fixed set of f.

    The candidate region is fix(f) estimated by cell displacement; the
    family K_l intersects it with dilated forward and backward h-images
    of its own centers, shrinking toward the h-invariant part. A start
    point is picked in the surviving region by minimizing f-displacement
    over a subgrid that includes exact cell corners, then classified:
    a closing generator orbit gives FiniteOrbit, otherwise the long
    h-orbit is classified by its largest-gap profile. Empty candidate
    regions (f has no fixed points at this tolerance) report Unknown.
    """
    space = action.space
    P = fixed_cells(action.f, resolution)
    diag = {
        "resolution": resolution,
        "fixed_count": len(P),
        # labels rest on finite orbits and grid gap statistics, not on
        # invariant-measure hypotheses; they are evidence, not certificates
        "evidence": "finite orbit and gap statistics",
    }
    empty = CellSet(resolution, space, frozenset())
    if len(P) == 0:
        diag["reason"] = "no cells with small f-displacement"
        shape = (0,) if space == "circle" else (0, 2)
        return MinimalSetEstimate(
            "Unknown", np.zeros(shape), empty, P, [P], diag
        )

    h = action.h
    hinv = h.inverse()
    rewrap = wrap if space == "circle" else wrap2
    target = P.dilate()
    if space == "circle":
        mask = np.zeros(resolution, dtype=bool)
        mask[list(target.cells)] = True
    else:
        mask = np.zeros((resolution, resolution), dtype=bool)
        ti = np.array([c[0] for c in target.cells])
        tj = np.array([c[1] for c in target.cells])
        mask[ti, tj] = True

    def hits(pts):
        # (m, k[, 2]) samples -> (m,) flags: some sample lands in the
        # dilated fixed set
        if space == "circle":
            idx = np.minimum(
                (wrap(pts) * resolution).astype(int), resolution - 1
            )
            return mask[idx].any(axis=-1)
        idx = np.minimum(
            (wrap2(pts) * resolution).astype(int), resolution - 1
        )
        return mask[idx[..., 0], idx[..., 1]].any(axis=-1)

    # Sample closed cells corner-first: corners sit on invariant circles
    # that centers always miss, and under an expanding h the preimage of
    # the fixed band is thinner than one cell after a few steps.
    cells_now = sorted(P.cells)
    if space == "circle":
        offs = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
        fwd = (np.array(cells_now, dtype=float)[:, None] + offs) / resolution
    else:
        o = np.array([0.0, 0.5, 1.0])
        ou, ot = np.meshgrid(o, o, indexing="ij")
        offs = np.stack([ou.ravel(), ot.ravel()], axis=-1)
        fwd = (
            np.array(cells_now, dtype=float)[:, None, :] + offs[None, :, :]
        ) / resolution
    bwd = fwd.copy()
    K = P
    family = [P]
    for _ in range(depth):
        fwd = rewrap(h.raw(fwd))
        bwd = rewrap(hinv.raw(bwd))
        keep = hits(fwd) & hits(bwd)
        cells_now = [c for c, ok in zip(cells_now, keep) if ok]
        fwd = fwd[keep]
        bwd = bwd[keep]
        K = CellSet(resolution, space, cells_now)
        family.append(K)
    diag["k_counts"] = [len(k) for k in family]

    seed_region = K if len(K) else P
    diag["k_empty"] = len(K) == 0
    lead = min(seed_region.cells)
    if space == "circle":
        grid = np.linspace(lead / resolution, (lead + 1) / resolution, 9)
        disp = circle_dist(action.f.raw(grid), grid)
        x0 = float(grid[int(np.argmin(disp))])
    else:
        i, j = lead
        gu = np.linspace(i / resolution, (i + 1) / resolution, 5)
        gt = np.linspace(j / resolution, (j + 1) / resolution, 5)
        uu, tt = np.meshgrid(gu, gt, indexing="ij")
        cand = np.stack([uu.ravel(), tt.ravel()], axis=-1)
        disp = torus_dist(action.f.raw(cand), cand)
        x0 = cand[int(np.argmin(disp))]
    diag["start"] = (
        float(x0) if space == "circle" else [float(v) for v in x0]
    )

    orb = finite_bs_orbit(action, x0, merge_tol=merge_tol, max_size=max_orbit)
    diag["orbit_closed"] = orb.closed
    diag["orbit_size"] = orb.size
    if orb.closed:
        diag["orbit_defect"] = orb.defect
        cells = CellSet.from_points(orb.points, resolution, space)
        return MinimalSetEstimate(
            "FiniteOrbit", orb.points, cells, P, family, diag
        )

    pts = _orbit_tail(h, x0, space, transient, int(orbit_iterates))
    if space == "circle":
        coords = pts
    else:
        g0 = _largest_gap(pts[:, 0])
        g1 = _largest_gap(pts[:, 1])
        axis = 0 if g0 <= g1 else 1
        coords = pts[:, axis]
        diag["axis"] = axis
        diag["axis_gaps"] = [g0, g1]

    N = coords.shape[0]
    sizes = sorted({min(s, N) for s in (1000, 10000, 100000)})
    profile = {s: _largest_gap(coords[:s]) for s in sizes}
    diag["gap_profile"] = {str(s): profile[s] for s in sizes}
    g_last = profile[sizes[-1]]
    cell = 1.0 / resolution
    label = "Unknown"
    if g_last < 5.0 / math.sqrt(sizes[-1]) and g_last <= 0.5 * profile[sizes[0]]:
        label = "MinimalCircle"
    elif (
        len(sizes) >= 2
        and abs(profile[sizes[-2]] - g_last) <= 0.1 * g_last
        and g_last > 10.0 * cell
    ):
        label = "MinimalCantor"

    stride = max(1, N // 5000)
    sample = pts[::stride]
    cells = CellSet.from_points(pts, resolution, space)
    return MinimalSetEstimate(label, sample, cells, P, family, diag)
