"""Circle homeomorphisms as monotone lifts F: R -> R with F(x+1) = F(x)+1.

The circle is R/Z. The projective line R u {oo} is identified with it
through the chart u = 1/2 + arctan(x)/pi, which sends oo to u = 0 and
glues the two real ends there. Affine maps x -> a x + b with a > 0 fix
oo, so their circle lifts fix 0, and compositions of such lifts reduce
to exact arithmetic on (a, b). Evaluation near u = 0 goes through the
reciprocal form of arctan, so the distance to the glued point keeps
full relative precision instead of drowning in cancellation.

Conventions used throughout the package:

* lifts are strictly increasing and commute with x -> x + 1;
* the displacement F(x) - x is periodic, so every lift carries cached
  displacement bounds for bracketing inversions;
* `iterate(x, m)` is the m-th iterate at a point, with closed forms for
  rotations, chart-affine maps and glued block maps (exponents produced
  by group words get large and looping would be hopeless).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CircleLift",
    "RotationLift",
    "ChartAffineLift",
    "MobiusLift",
    "PiecewiseLift",
    "GluedLift",
    "DenjoyLift",
    "ComposedLift",
    "FunctionLift",
    "BisectionInverse",
    "compose",
    "rotation_number",
    "RotationNumberEstimate",
    "denjoy_lift",
    "chart_from_real",
    "chart_to_real",
    "wrap",
    "circle_dist",
    "parse_k_spec",
    "load_lift_spec",
    "GOLDEN_MEAN",
]

DEGREE_CHECK_TOL = 1e-12
PROPERTY_CHECK_TOL = 1e-10
INVERSE_TOL = 1e-12
BISECTION_STEPS = 80
GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0


def wrap(x):
    """Reduce to [0, 1)."""
    return np.asarray(x, dtype=float) - np.floor(x)


def circle_dist(a, b):
    """Distance on R/Z, at most 1/2."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d = d - np.floor(d)
    return np.minimum(d, 1.0 - d)


def chart_from_real(x):
    """Chart coordinate of a real point (or +-inf) on the projective line."""
    x = np.asarray(x, dtype=float)
    u = 0.5 + np.arctan(x) / np.pi
    u = np.where(np.isinf(x), 0.0, u)
    if u.ndim == 0:
        return float(u)
    return u


def chart_to_real(u):
    """Real coordinate of a chart point; u = 0 maps to +inf (the glued point)."""
    u = np.asarray(u, dtype=float)
    r = u - np.floor(u)
    with np.errstate(divide="ignore"):
        x = -1.0 / np.tan(np.pi * r)
    x = np.where(r == 0.0, np.inf, x)
    if x.ndim == 0:
        return float(x)
    return x


def _atan_frac(y):
    """0.5 + arctan(y)/pi computed so both tails keep relative precision."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        hi = 1.0 - np.arctan(1.0 / y) / np.pi
        lo = np.arctan(-1.0 / y) / np.pi
    mid = 0.5 + np.arctan(y) / np.pi
    out = np.where(y > 1.0, hi, np.where(y < -1.0, lo, mid))
    return np.where(np.isnan(y), np.nan, out)


class CircleLift:
    """Base class for monotone degree-one lifts."""

    label = ""

    def raw(self, x):
        raise NotImplementedError

    def __call__(self, x):
        out = self.raw(np.asarray(x, dtype=float))
        if np.ndim(x) == 0:
            return float(out)
        return out

    # -- validation ------------------------------------------------------

    def validate(self, grid: int = 256, tol: float = DEGREE_CHECK_TOL):
        """Spot-check degree one and strict monotonicity on a grid."""
        xs = np.arange(grid) / grid
        lo = self.raw(xs)
        hi = self.raw(xs + 1.0)
        err = np.max(np.abs(hi - lo - 1.0))
        if err > tol:
            raise ValueError(
                f"{type(self).__name__}{' ' + self.label if self.label else ''}: "
                f"degree-one defect {err:.3e} exceeds {tol:.1e}"
            )
        fine = np.sort(np.concatenate([xs, xs + 0.5 / grid]))
        vals = self.raw(fine)
        if np.any(np.diff(vals) <= 0.0):
            raise ValueError(f"{type(self).__name__}: lift is not strictly increasing")
        return self

    def displacement_bounds(self, grid: int = 512):
        xs = np.arange(grid) / grid
        d = self.raw(xs) - xs
        return float(np.min(d)), float(np.max(d))

    # -- algebra ---------------------------------------------------------

    def inverse(self) -> "CircleLift":
        return BisectionInverse(self)

    def iterate(self, x, m: int):
        """m-th iterate (m may be negative) applied to x."""
        if m == 0:
            return np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        g = self if m > 0 else self.inverse()
        y = np.asarray(x, dtype=float)
        for _ in range(abs(m)):
            y2 = g.raw(y)
            if np.array_equal(y2, y):
                break  # orbit froze at double precision, powers stop moving
            y = y2
        if np.ndim(x) == 0:
            return float(y)
        return y

    def seam_distance(self, x):
        """Distance from x to the nearest non-smooth point, None if smooth."""
        return None


class RotationLift(CircleLift):
    """x -> x + alpha."""

    def __init__(self, alpha: float, label: str = ""):
        self.alpha = float(alpha)
        self.label = label or f"rot({self.alpha:g})"

    def raw(self, x):
        return x + self.alpha

    def inverse(self):
        return RotationLift(-self.alpha, label=f"rot({-self.alpha:g})")

    def iterate(self, x, m: int):
        out = np.asarray(x, dtype=float) + m * self.alpha
        return float(out) if np.ndim(x) == 0 else out


class ChartAffineLift(CircleLift):
    """Circle lift of x -> a x + b (a > 0) through the projective chart.

    Fixes the glued point, so the lift is pinned by F(0) = 0. Parameter
    composition, inversion and integer powers are exact, which is what
    makes group relations evaluate to literally zero residual for the
    affine model actions.
    """

    def __init__(self, a: float, b: float, label: str = ""):
        if not (a > 0.0) or not np.isfinite(b):
            raise ValueError(f"need a > 0 and finite b, got a={a}, b={b}")
        self.a = float(a)
        self.b = float(b)
        self.label = label or f"affine({self.a:g},{self.b:g})"

    def raw(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        r = x - k
        with np.errstate(divide="ignore", over="ignore"):
            t = np.tan(np.pi * r)
            xr = np.where(t == 0.0, -np.inf, -1.0 / t)
            # a * xr may overflow to inf for r within a few ulp of the
            # glued point; the arctan re-chart saturates there anyway
            y = self.a * xr + self.b
        return k + np.where(r == 0.0, 0.0, _atan_frac(y))

    def inverse(self):
        return ChartAffineLift(1.0 / self.a, -self.b / self.a)

    def params_power(self, m: int):
        if self.a == 1.0:
            return 1.0, self.b * m
        am = self.a ** m
        return am, self.b * (am - 1.0) / (self.a - 1.0)

    def iterate(self, x, m: int):
        if m == 0:
            return np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        am, bm = self.params_power(m)
        if not (np.isfinite(am) and np.isfinite(bm)) or am <= 0.0:
            return super().iterate(x, m)
        return ChartAffineLift(am, bm)(x)


class MobiusLift(CircleLift):
    """Circle lift of a general Mobius map with positive determinant.

    Works projectively: the chart angle phi = pi (u - 1/2) parametrizes
    directions, the matrix acts on direction vectors and the image angle
    is unrolled around the base point so evaluation stays pointwise.
    """

    def __init__(self, mat, label: str = ""):
        m = np.asarray(mat, dtype=float)
        if m.shape != (2, 2) or m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] <= 0.0:
            raise ValueError("need a 2x2 matrix with positive determinant")
        self.mat = m
        self.label = label or "mobius"
        (a, b), (c, d) = m
        # image angle of the glued point, and its chart position: these pin
        # the lift branch at F(0) = u0 in [0, 1)
        self._m0 = math.atan2(-a, -c) % math.pi
        self._u0 = (self._m0 / math.pi + 0.5) % 1.0
        self.validate()

    def raw(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        r = x - k
        phi = np.pi * (r - 0.5)
        s, c = np.sin(phi), np.cos(phi)
        (a, b), (cc, d) = self.mat
        v1 = a * s + b * c
        v2 = cc * s + d * c
        ang = np.arctan2(v1, v2) % np.pi
        ang = np.where(ang < self._m0 - 1e-15, ang + np.pi, ang)
        return k + self._u0 + (ang - self._m0) / np.pi

    def inverse(self):
        (a, b), (c, d) = self.mat
        return MobiusLift([[d, -b], [-c, a]], label=self.label + "^-1")


class PiecewiseLift(CircleLift):
    """Piecewise-affine lift through breakpoints (bx_i, by_i).

    bx is ascending in [0, 1); by holds real lift values with
    by[-1] < by[0] + 1. Between breakpoints the lift interpolates
    affinely; inversion swaps the roles of the two tables exactly.
    """

    def __init__(self, bx, by, label: str = ""):
        bx = np.asarray(bx, dtype=float)
        by = np.asarray(by, dtype=float)
        if bx.ndim != 1 or bx.shape != by.shape or bx.size < 1:
            raise ValueError("breakpoint tables must be matching 1-d arrays")
        if np.any(bx < 0.0) or np.any(bx >= 1.0) or np.any(np.diff(bx) <= 0.0):
            raise ValueError("bx must be strictly increasing within [0, 1)")
        if np.any(np.diff(by) <= 0.0) or not (by[-1] < by[0] + 1.0):
            raise ValueError("by must be strictly increasing with span < 1")
        self.bx = bx
        self.by = by
        self._xs = np.concatenate([bx, [bx[0] + 1.0]])
        self._ys = np.concatenate([by, [by[0] + 1.0]])
        self.label = label or f"piecewise[{bx.size}]"

    def raw(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        r = x - k
        shift = r < self.bx[0]
        rr = np.where(shift, r + 1.0, r)
        return k + np.interp(rr, self._xs, self._ys) - shift.astype(float)

    def inverse(self):
        # unwrap image breakpoints into a canonical [0,1) table
        pos = wrap(self.by)
        order = np.argsort(pos, kind="stable")
        nbx = pos[order]
        vals = self.bx[order]
        adj = np.zeros_like(vals)
        for i in range(1, vals.size):
            adj[i] = adj[i - 1]
            if vals[i] + adj[i] <= vals[i - 1] + adj[i - 1]:
                adj[i] += 1.0
        nby = vals + adj
        # pin the branch so the inverse undoes this lift exactly, not just
        # up to an integer translation: G(by[0]) must equal bx[0]
        i0 = int(np.nonzero(order == 0)[0][0])
        nby -= adj[i0] + np.floor(self.by[0])
        return PiecewiseLift(nbx, nby, label=self.label + "^-1")

    def seam_distance(self, x):
        r = wrap(x)
        return float(np.min(circle_dist(r, self.bx)))


class GluedLift(CircleLift):
    """m renormalized copies of a chart-affine map, one per block [i/m, (i+1)/m).

    Each block carries the same conjugated copy of x -> a x + b, with the
    block endpoints playing the role of the glued point. Composition and
    powers act blockwise on (a, b), hence stay exact.
    """

    def __init__(self, m: int, a: float, b: float, label: str = ""):
        if m < 1:
            raise ValueError(f"need at least one block, got m={m}")
        self.m = int(m)
        self.base = ChartAffineLift(a, b)
        self.label = label or f"glued({m};{a:g},{b:g})"

    @property
    def a(self):
        return self.base.a

    @property
    def b(self):
        return self.base.b

    def raw(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        r = x - k
        i = np.minimum(np.floor(r * self.m), self.m - 1)
        v = np.clip(r * self.m - i, 0.0, 1.0)
        return k + (i + self.base.raw(v)) / self.m

    def inverse(self):
        return GluedLift(self.m, 1.0 / self.a, -self.b / self.a)

    def iterate(self, x, m: int):
        if m == 0:
            return np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        am, bm = self.base.params_power(m)
        if not (np.isfinite(am) and np.isfinite(bm)) or am <= 0.0:
            return super().iterate(x, m)
        return GluedLift(self.m, am, bm)(x)

    def seam_distance(self, x):
        r = wrap(x)
        seams = np.arange(self.m) / self.m
        return float(np.min(circle_dist(r, seams)))


class ComposedLift(CircleLift):
    """Lift of outer o inner."""

    def __init__(self, outer: CircleLift, inner: CircleLift, label: str = ""):
        self.outer = outer
        self.inner = inner
        self.label = label or f"({outer.label} o {inner.label})"

    def raw(self, x):
        return self.outer.raw(self.inner.raw(np.asarray(x, dtype=float)))

    def inverse(self):
        return ComposedLift(self.inner.inverse(), self.outer.inverse())

    def seam_distance(self, x):
        cands = []
        d = self.inner.seam_distance(x)
        if d is not None:
            cands.append(d)
        d = self.outer.seam_distance(self.inner(x))
        if d is not None:
            cands.append(d)
        return min(cands) if cands else None


class FunctionLift(CircleLift):
    """Lift given by an arbitrary vectorized callable."""

    def __init__(self, fn, inverse_fn=None, label: str = "fn"):
        self._fn = fn
        self._inverse_fn = inverse_fn
        self.label = label

    def raw(self, x):
        return np.asarray(self._fn(np.asarray(x, dtype=float)), dtype=float)

    def inverse(self):
        if self._inverse_fn is not None:
            return FunctionLift(self._inverse_fn, self._fn, label=self.label + "^-1")
        return BisectionInverse(self)


class BisectionInverse(CircleLift):
    """Numerical inverse of a lift by bracketed bisection.

    The bracket comes from the displacement bounds of the forward map;
    a fixed iteration count keeps evaluation deterministic and lands the
    preimage well below the 1e-12 tolerance contract.
    """

    def __init__(self, target: CircleLift, grid: int = 512):
        self.target = target
        dmin, dmax = target.displacement_bounds(grid)
        # a monotone lift can overshoot grid extrema by at most one cell
        pad = 1.0 / grid + 1e-9
        self._lo_off = dmax + pad
        self._hi_off = dmin - pad
        self.label = target.label + "^-1"

    def raw(self, x):
        x = np.asarray(x, dtype=float)
        lo = x - self._lo_off
        hi = x - self._hi_off
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            below = self.target.raw(mid) < x
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def inverse(self):
        return self.target


def compose(outer: CircleLift, inner: CircleLift) -> CircleLift:
    """Lift of the composition outer o inner, fusing parameters when the
    two maps live in the same exact family."""
    if isinstance(outer, RotationLift) and isinstance(inner, RotationLift):
        return RotationLift(outer.alpha + inner.alpha)
    if isinstance(outer, ChartAffineLift) and isinstance(inner, ChartAffineLift):
        return ChartAffineLift(outer.a * inner.a, outer.a * inner.b + outer.b)
    if (
        isinstance(outer, GluedLift)
        and isinstance(inner, GluedLift)
        and outer.m == inner.m
    ):
        return GluedLift(outer.m, outer.a * inner.a, outer.a * inner.b + outer.b)
    return ComposedLift(outer, inner)


# ---------------------------------------------------------------------------
# rotation numbers


@dataclass
class RotationNumberEstimate:
    """Birkhoff estimate of a rotation number with an optional certificate.

    value            estimate in [0, 1)
    iterates_used    orbit length N behind (F^N(x) - x)/N
    rational_witness (p, q, x, residual) certifying an approximate
                     periodic point of rotation p/q, or None
    error_bound      1/N plus the evaluation tolerance
    """

    value: float
    iterates_used: int
    rational_witness: tuple | None
    error_bound: float

    def to_json(self):
        w = None
        if self.rational_witness is not None:
            p, q, x, res = self.rational_witness
            w = {"p": int(p), "q": int(q), "x": float(x), "residual": float(res)}
        return {
            "value": self.value,
            "iterates_used": self.iterates_used,
            "rational_witness": w,
            "error_bound": self.error_bound,
        }


def rotation_number(
    F: CircleLift,
    iterates: int = 10**5,
    q_max: int = 64,
    tol: float = 1e-8,
    x0: float = 0.0,
    cert_grid: int = 256,
) -> RotationNumberEstimate:
    """Rotation number of the circle map under F.

    The estimate is (F^N(x0) - x0)/N mod 1. Certification scans periods
    q <= q_max over a uniform grid (which contains 0, so fixed points
    sitting at chart-rational positions certify exactly): a witness is a
    grid point x with |F^q(x) - x - p| < tol.
    """
    if iterates < 1:
        raise ValueError("iterates must be positive")
    if type(F).iterate is not CircleLift.iterate:
        # closed-form power available
        end = F.iterate(x0, iterates)
        value = float(wrap((end - x0) / iterates))
    else:
        # step with the orbit point rewrapped to [0,1); the displacement is
        # periodic, so the Birkhoff sum is unchanged and the fractional part
        # never loses precision to a large integer part
        y = float(wrap(x0))
        total = 0.0
        for _ in range(iterates):
            fy = float(F.raw(np.float64(y)))
            total += fy - y
            y = fy - math.floor(fy)
        value = float(wrap(total / iterates))
    witness = None
    xs = np.arange(cert_grid) / cert_grid
    ys = xs.copy()
    for q in range(1, q_max + 1):
        ys = F.raw(ys)
        disp = ys - xs
        p = np.round(disp)
        resid = np.abs(disp - p)
        i = int(np.argmin(resid))
        if resid[i] < tol and abs(p[i]) <= q:
            witness = (int(p[i]), q, float(xs[i]), float(resid[i]))
            break
    return RotationNumberEstimate(
        value=value,
        iterates_used=int(iterates),
        rational_witness=witness,
        error_bound=1.0 / iterates + INVERSE_TOL,
    )


# ---------------------------------------------------------------------------
# blown-up rotations


class DenjoyLift(PiecewiseLift):
    """Piecewise-affine lift from blowing up a finite orbit segment of an
    irrational rotation; see `denjoy_lift`."""

    def __init__(self, bx, by, alpha, depth, gap_ratio, intervals, to_new, label=""):
        super().__init__(bx, by, label=label or f"denjoy({alpha:g},{depth})")
        self.alpha = float(alpha)
        self.depth = int(depth)
        self.gap_ratio = float(gap_ratio)
        self.inserted_intervals = intervals
        self._to_new = to_new

    def embed_old_point(self, u_old: float) -> float:
        """New-circle position of a point of the base rotation circle."""
        return float(self._to_new(u_old))


def denjoy_lift(alpha: float, depth: int, gap_ratio: float) -> CircleLift:
    """Blow up the orbit points k*alpha (|k| <= depth) of the rotation by
    alpha into intervals of length proportional to gap_ratio^|k|.

    The map sends inserted interval I_k affinely onto I_{k+1}; away from
    the inserted family it is the rotation transported through the
    insertion, which is again affine gap-to-gap, so the whole lift is an
    explicit piecewise-affine homeomorphism. Truncation leaves two loose
    ends: the last forward interval exits through a short arc around the
    image of the (depth+1)-st orbit point, and a tiny funnel arc feeds
    the first backward interval. Both arcs are recorded sub-cell-size so
    orbits visit them rarely; at any finite depth the map is only
    conjugate to the rotation away from these seams, and `depth` is
    carried on the result so downstream reports can flag it.
    """
    alpha = float(alpha)
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    if not (0.0 < gap_ratio < 1.0):
        raise ValueError(f"gap_ratio must lie in (0, 1), got {gap_ratio}")
    if depth == 0:
        return RotationLift(wrap(alpha), label=f"denjoy-limit({alpha:g})")

    ks = np.arange(-depth, depth + 1)
    pos = wrap(ks * alpha)
    lens = gap_ratio ** np.abs(ks).astype(float)
    sp = np.sort(pos)
    gaps = np.concatenate([np.diff(sp), [sp[0] + 1.0 - sp[-1]]])
    if np.min(gaps) < 1e-9:
        raise ValueError("orbit points collide; alpha is too close to rational")
    scale = 1.0 / (1.0 + float(np.sum(lens)))

    order = np.argsort(pos)
    sort_pos = pos[order]
    sort_len = lens[order]
    cum = np.concatenate([[0.0], np.cumsum(sort_len)])

    def to_new(u):
        """Insertion map: old position -> new position (left limit)."""
        u = wrap(u)
        i = np.searchsorted(sort_pos, u)
        return (u + cum[i]) * scale

    left = (sort_pos + cum[:-1]) * scale          # left endpoints, sorted order
    right = left + sort_len * scale
    idx_of_k = {int(ks[order[i]]): i for i in range(ks.size)}

    dom, img = [], []
    for k in range(-depth, depth):
        i, j = idx_of_k[k], idx_of_k[k + 1]
        dom.extend([left[i], right[i]])
        img.extend([left[j], right[j]])

    # forward seam: I_depth exits through a short arc around z
    i = idx_of_k[depth]
    z = float(to_new(wrap((depth + 1) * alpha)))
    ib = idx_of_k[-depth]  # I_{-depth} will enter the image set via seam B
    img_sorted = np.sort(np.asarray(img + [left[ib], right[ib]], dtype=float))
    j = np.searchsorted(img_sorted, z)
    room = min(
        z - (img_sorted[j - 1] if j > 0 else img_sorted[-1] - 1.0),
        (img_sorted[j] if j < img_sorted.size else img_sorted[0] + 1.0) - z,
    )
    delta = 0.25 * min(room, sort_len[i] * scale)
    dom.extend([left[i], right[i]])
    img.extend([z - delta, z + delta])

    # backward seam: a narrow funnel arc around ystar feeds I_{-depth}
    i = idx_of_k[-depth]
    ystar = float(to_new(wrap(-(depth + 1) * alpha)))
    dom_sorted = np.sort(np.asarray(dom, dtype=float))
    j = np.searchsorted(dom_sorted, ystar)
    room = min(
        ystar - (dom_sorted[j - 1] if j > 0 else dom_sorted[-1] - 1.0),
        (dom_sorted[j] if j < dom_sorted.size else dom_sorted[0] + 1.0) - ystar,
    )
    # width 1e-6 * room keeps forward re-entry into the truncated interval
    # chain off the scale of 1e5-iterate orbit budgets
    delta2 = 1e-6 * room
    dom.extend([ystar - delta2, ystar + delta2])
    img.extend([left[i], right[i]])

    dom = np.asarray(dom, dtype=float)
    img = np.asarray(img, dtype=float)
    dom_wrapped = wrap(dom)
    order2 = np.argsort(dom_wrapped)
    bx = dom_wrapped[order2]
    iw = wrap(img[order2])
    by = np.empty_like(iw)
    by[0] = iw[0]
    for t in range(1, iw.size):
        by[t] = by[t - 1] + wrap(iw[t] - iw[t - 1])
    if np.any(np.diff(bx) <= 0.0) or not (by[-1] < by[0] + 1.0):
        raise ValueError("seam arcs collided with interval endpoints; "
                         "try a different depth or alpha")

    intervals = [(float(left[t]), float(right[t])) for t in range(ks.size)]
    lift = DenjoyLift(bx, by, alpha, depth, gap_ratio, intervals, to_new)
    lift.validate()
    return lift


# ---------------------------------------------------------------------------
# lift specs


def load_lift_spec(obj) -> CircleLift:
    """Build a lift from a JSON-style dict.

    Supported types: rotation {alpha}, mobius {matrix}, denjoy
    {alpha, depth, gap_ratio}, piecewise {bx, by}, affine {a, b}.
    """
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValueError(f"lift spec must be a dict with a 'type', got {obj!r}")
    kind = obj["type"]
    if kind == "rotation":
        return RotationLift(float(obj["alpha"])).validate()
    if kind == "affine":
        return ChartAffineLift(float(obj["a"]), float(obj["b"])).validate()
    if kind == "mobius":
        return MobiusLift(obj["matrix"])
    if kind == "denjoy":
        return denjoy_lift(
            float(obj["alpha"]), int(obj["depth"]), float(obj["gap_ratio"])
        )
    if kind == "piecewise":
        return PiecewiseLift(obj["bx"], obj["by"]).validate()
    raise ValueError(f"unknown lift type {kind!r}")


_NAMED_ANGLES = {
    "golden": GOLDEN_MEAN,
}


def _parse_angle(tok: str) -> float:
    tok = tok.strip()
    if tok in _NAMED_ANGLES:
        return _NAMED_ANGLES[tok]
    if tok.startswith("ln"):
        return math.log(float(tok[2:].lstrip(":"))) % 1.0
    if "/" in tok:
        p, q = tok.split("/")
        return float(int(p)) / float(int(q))
    return float(tok)


def parse_k_spec(spec: str) -> CircleLift:
    """Parse a compact fiber-map spec string.

    Formats: "id", "rot:<angle>", "affine:<a>,<b>",
    "denjoy:<angle>,<depth>,<ratio>", where <angle> is a float, a
    fraction "p/q", "ln<n>" for log n mod 1, or "golden".
    """
    spec = spec.strip()
    if spec in ("id", "identity"):
        return RotationLift(0.0, label="id")
    if ":" not in spec:
        raise ValueError(f"cannot parse fiber spec {spec!r}")
    kind, _, rest = spec.partition(":")
    if kind == "rot":
        return RotationLift(wrap(_parse_angle(rest)))
    if kind == "affine":
        a, b = rest.split(",")
        return ChartAffineLift(float(a), float(b)).validate()
    if kind == "denjoy":
        parts = rest.split(",")
        if len(parts) != 3:
            raise ValueError("denjoy spec needs <angle>,<depth>,<ratio>")
        return denjoy_lift(_parse_angle(parts[0]), int(parts[1]), float(parts[2]))
    raise ValueError(f"unknown fiber spec kind {kind!r}")
