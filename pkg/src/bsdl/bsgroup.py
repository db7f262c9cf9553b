"""Words in the two-generator presentation < a, b | a b a^-1 = b^n > and
their actions through a chosen pair of homeomorphisms (f for b, h for a).

A word is read as a composition: the rightmost letter acts first, so
"a b A" applied to x is h(f(h^-1(x))) and the defining relation says
that equals f^n. Every element has the solvable-group normal form
a^-p b^m a^q; it is computed through the faithful affine model
x -> n^k x + w with w in Z[1/n], using exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .circle import (
    ChartAffineLift,
    CircleLift,
    ComposedLift,
    GluedLift,
    RotationLift,
    circle_dist,
    compose as compose_circle,
    wrap,
)
from .gl2z import IntMatrix2
from .torus import (
    LinearTorusLift,
    ProductTorusLift,
    TorusLift,
    compose2,
    torus_dist,
    wrap2,
)

__all__ = [
    "Word",
    "NormalForm",
    "normalize",
    "word_to_affine",
    "BSAction",
    "make_action",
    "power_lift",
    "word_lift",
    "evaluate",
    "relation_residual",
    "RelationReport",
    "relation_report",
    "FiniteOrbit",
    "finite_bs_orbit",
]


class Word:
    """Reduced word in generators a, b stored as (letter, exponent) runs."""

    __slots__ = ("syllables",)

    def __init__(self, syllables=()):
        merged = []
        for gen, exp in syllables:
            if gen not in ("a", "b"):
                raise ValueError(f"unknown generator {gen!r}")
            exp = int(exp)
            if exp == 0:
                continue
            if merged and merged[-1][0] == gen:
                total = merged[-1][1] + exp
                merged.pop()
                if total != 0:
                    merged.append((gen, total))
            else:
                merged.append((gen, exp))
        self.syllables = tuple(merged)

    @staticmethod
    def parse(text: str) -> "Word":
        """Parse "a b^-2 A" style strings; uppercase letters invert."""
        syl = []
        i = 0
        while i < len(text):
            c = text[i]
            if c.isspace() or c == "*":
                i += 1
                continue
            if c not in "abAB":
                raise ValueError(f"cannot parse {text!r} at position {i}")
            gen = c.lower()
            sign = -1 if c.isupper() else 1
            i += 1
            exp = 1
            if i < len(text) and text[i] == "^":
                i += 1
                j = i
                if i < len(text) and text[i] in "+-":
                    i += 1
                while i < len(text) and text[i].isdigit():
                    i += 1
                if i == j or not text[j:i].lstrip("+-"):
                    raise ValueError(f"missing exponent in {text!r}")
                exp = int(text[j:i])
            syl.append((gen, sign * exp))
        return Word(syl)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.syllables + other.syllables)

    def inverse(self) -> "Word":
        return Word([(g, -e) for g, e in reversed(self.syllables)])

    def __pow__(self, k: int) -> "Word":
        if k == 0:
            return Word()
        base = self if k > 0 else self.inverse()
        out = base
        for _ in range(abs(k) - 1):
            out = out * base
        return out

    def __eq__(self, other):
        return isinstance(other, Word) and self.syllables == other.syllables

    def __hash__(self):
        return hash(self.syllables)

    def __len__(self):
        return sum(abs(e) for _, e in self.syllables)

    def __str__(self):
        if not self.syllables:
            return "1"
        parts = []
        for g, e in self.syllables:
            parts.append(g if e == 1 else f"{g}^{e}")
        return " ".join(parts)

    def __repr__(self):
        return f"Word({str(self)!r})"


def word_to_affine(word: Word, n: int):
    """Image of the word in the affine model x -> n^k x + w, exactly.

    Returns (k, w) with k an int and w a Fraction in Z[1/n]. The model
    is faithful, so two words are equal in the group iff these agree.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    k = 0
    w = Fraction(0)
    for gen, exp in word.syllables:
        if gen == "a":
            k2, w2 = exp, Fraction(0)
        else:
            k2, w2 = 0, Fraction(exp)
        # acc := acc o syllable
        w = w + Fraction(n) ** k * w2
        k = k + k2
    return k, w


@dataclass
class NormalForm:
    """a^-p b^m a^q with p, q >= 0; p is minimal for the element."""

    p: int
    m: int
    q: int
    n: int

    def to_word(self) -> Word:
        return Word([("a", -self.p), ("b", self.m), ("a", self.q)])

    def to_json(self):
        return {"p": self.p, "m": self.m, "q": self.q, "n": self.n}

    def __str__(self):
        return str(self.to_word())


def normalize(word: Word, n: int) -> NormalForm:
    """Normal form of a word in < a, b | a b a^-1 = b^n >.

    p is the smallest power of n clearing the denominator of the
    translation part, raised further only if needed to keep q >= 0.
    """
    k, w = word_to_affine(word, n)
    p = 0
    scaled = w
    while scaled.denominator != 1:
        scaled *= n
        p += 1
    if k + p < 0:
        extra = -(k + p)
        scaled *= Fraction(n) ** extra
        p += extra
    assert scaled.denominator == 1
    return NormalForm(p=p, m=int(scaled), q=k + p, n=n)


# ---------------------------------------------------------------------------
# actions


def _identity_like(F):
    if isinstance(F, CircleLift):
        return RotationLift(0.0, label="id")
    return LinearTorusLift(IntMatrix2.identity(), label="id")


def power_lift(F, m: int):
    """Lift of the m-th power, collapsing exact families in closed form."""
    if m == 0:
        return _identity_like(F)
    if m < 0:
        return power_lift(F.inverse(), -m)
    if isinstance(F, RotationLift):
        return RotationLift(F.alpha * m)
    if isinstance(F, ChartAffineLift):
        a, b = F.params_power(m)
        if np.isfinite(a) and a > 0.0 and np.isfinite(b):
            return ChartAffineLift(a, b)
    if isinstance(F, GluedLift):
        a, b = F.base.params_power(m)
        if np.isfinite(a) and a > 0.0 and np.isfinite(b):
            return GluedLift(F.m, a, b)
    if isinstance(F, ProductTorusLift):
        return ProductTorusLift(power_lift(F.base, m), power_lift(F.fiber, m))
    comp = compose_circle if isinstance(F, CircleLift) else compose2
    out = F
    for _ in range(m - 1):
        out = comp(out, F)
    return out


@dataclass
class BSAction:
    """A pair (f, h) intended to satisfy h f h^-1 = f^n.

    space is "circle" or "torus"; f, h are the corresponding lifts.
    The letter b of the presentation acts by f, the letter a by h.
    """

    n: int
    f: object
    h: object
    space: str
    name: str = ""
    notes: str = ""

    def generator(self, letter: str):
        if letter == "b":
            return self.f
        if letter == "a":
            return self.h
        raise ValueError(f"unknown generator {letter!r}")

    def dist(self, p, q):
        if self.space == "circle":
            return circle_dist(p, q)
        return torus_dist(p, q)

    def wrap_point(self, p):
        if self.space == "circle":
            return wrap(p)
        return wrap2(p)


def word_lift(action: BSAction, word: Word):
    """Materialize the lift of a word, fusing parameters where possible."""
    comp = compose_circle if action.space == "circle" else compose2
    L = None
    for gen, exp in word.syllables:
        g = power_lift(action.generator(gen), exp)
        L = g if L is None else comp(L, g)
    if L is None:
        return _identity_like(action.f)
    return L


def evaluate(action: BSAction, word: Word, x):
    """Apply the word to a point (or array of points), rightmost letter
    first."""
    y = np.asarray(x, dtype=float)
    for gen, exp in reversed(word.syllables):
        y = action.generator(gen).iterate(y, exp)
    if np.ndim(x) == 0 and action.space == "circle":
        return float(y)
    return y


def _sample_points(space: str, count: int):
    if space == "circle":
        return np.arange(count) / count
    side = max(2, int(round(count ** 0.5)))
    g = np.arange(side) / side
    return np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)


def relation_residual(
    f, h, n: int, power: int = 1, grid: int = 10000
) -> float:
    """Sup distance between h^p f h^-p and f^(n^p) over a sample grid.

    Exactly zero when both sides collapse to the same fused parameters.
    """
    space = "circle" if isinstance(f, CircleLift) else "torus"
    comp = compose_circle if space == "circle" else compose2
    hp = power_lift(h, power)
    lhs = comp(hp, comp(f, hp.inverse()))
    rhs = power_lift(f, n ** power)
    if _params_equal(lhs, rhs):
        return 0.0
    xs = _sample_points(space, grid)
    a = lhs.raw(xs)
    b = rhs.raw(xs)
    if space == "circle":
        return float(np.max(circle_dist(a, b)))
    return float(np.max(torus_dist(a, b)))


def _params_equal(u, v):
    if isinstance(u, RotationLift) and isinstance(v, RotationLift):
        return u.alpha == v.alpha
    if isinstance(u, ChartAffineLift) and isinstance(v, ChartAffineLift):
        return (u.a, u.b) == (v.a, v.b)
    if isinstance(u, GluedLift) and isinstance(v, GluedLift):
        return (u.m, u.a, u.b) == (v.m, v.a, v.b)
    if isinstance(u, ProductTorusLift) and isinstance(v, ProductTorusLift):
        return _params_equal(u.base, v.base) and _params_equal(u.fiber, v.fiber)
    if isinstance(u, LinearTorusLift) and isinstance(v, LinearTorusLift):
        return u.linear_part == v.linear_part and u.b == v.b
    return False


@dataclass
class RelationReport:
    """Numerical verification of the defining relation for an action."""

    primary_residual: float
    primary_tol: float
    secondary_residual: float
    secondary_tol: float
    grid: int
    space: str

    @property
    def primary_passed(self):
        return self.primary_residual <= self.primary_tol

    @property
    def secondary_passed(self):
        return self.secondary_residual <= self.secondary_tol

    @property
    def passed(self):
        return self.primary_passed and self.secondary_passed

    def to_json(self):
        return {
            "primary_residual": self.primary_residual,
            "primary_tol": self.primary_tol,
            "primary_passed": self.primary_passed,
            "secondary_residual": self.secondary_residual,
            "secondary_tol": self.secondary_tol,
            "secondary_passed": self.secondary_passed,
            "passed": self.passed,
            "grid": self.grid,
            "space": self.space,
        }


def relation_report(
    action: BSAction,
    grid: int = 10000,
    primary_tol: float = 1e-8,
    secondary_tol: float = 1e-6,
) -> RelationReport:
    """Check h f h^-1 = f^n on a grid, and the derived identity
    h^2 f h^-2 = f^(n^2) as a stress test of iterated powers."""
    r1 = relation_residual(action.f, action.h, action.n, power=1, grid=grid)
    r2 = relation_residual(action.f, action.h, action.n, power=2, grid=grid)
    return RelationReport(
        primary_residual=r1,
        primary_tol=primary_tol,
        secondary_residual=r2,
        secondary_tol=secondary_tol,
        grid=grid,
        space=action.space,
    )


def make_action(
    f, h, n: int, name: str = "", check: bool = True, tol: float = 1e-8
) -> BSAction:
    """Bundle a pair into a BSAction, verifying the relation numerically.

    The space is inferred from the lift types. With check=True (default)
    a primary relation residual above tol raises.
    """
    if isinstance(f, CircleLift) and isinstance(h, CircleLift):
        space = "circle"
    elif isinstance(f, TorusLift) and isinstance(h, TorusLift):
        space = "torus"
    else:
        raise TypeError(
            f"mismatched lift types {type(f).__name__}, {type(h).__name__}"
        )
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    action = BSAction(n=n, f=f, h=h, space=space, name=name)
    if check:
        resid = relation_residual(f, h, n, power=1, grid=2048)
        if resid > tol:
            raise ValueError(
                f"pair does not satisfy h f h^-1 = f^{n}: residual {resid:.3e}"
            )
    return action


# ---------------------------------------------------------------------------
# orbits


@dataclass
class FiniteOrbit:
    """Closure of a point under f, h and their inverses, up to merging.

    closed means the search saturated below max_size; defect is the
    largest distance from a generator image of an orbit point back to
    the orbit (None when the orbit was too large to verify).
    """

    points: np.ndarray
    size: int
    closed: bool
    merge_tol: float
    defect: float | None = None
    start: object = None

    def to_json(self):
        pts = self.points
        if pts.ndim == 1:
            listed = [float(p) for p in pts]
        else:
            listed = [[float(a), float(b)] for a, b in pts]
        return {
            "size": self.size,
            "closed": self.closed,
            "merge_tol": self.merge_tol,
            "defect": self.defect,
            "points": listed,
        }


def finite_bs_orbit(
    action: BSAction,
    x0,
    merge_tol: float = 1e-6,
    max_size: int = 10000,
    verify_cap: int = 3000,
) -> FiniteOrbit:
    """Breadth-first closure of x0 under both generators and inverses.

    Points closer than merge_tol (circle or torus metric) are merged via
    a spatial hash, so a numerically periodic orbit closes up. If the
    search exceeds max_size the orbit is reported open. Closed orbits of
    moderate size get a verification pass recomputing every generator
    image against the final point set.
    """
    dim = 1 if action.space == "circle" else 2
    gens = [
        action.f,
        action.h,
        action.f.inverse(),
        action.h.inverse(),
    ]
    K = int(np.ceil(1.0 / merge_tol))

    def norm_point(p):
        if dim == 1:
            return float(wrap(p))
        return tuple(np.asarray(wrap2(p), dtype=float))

    def key_of(p):
        if dim == 1:
            return (int(p / merge_tol) % K,)
        return (int(p[0] / merge_tol) % K, int(p[1] / merge_tol) % K)

    def close(p, q):
        if dim == 1:
            return circle_dist(p, q) < merge_tol
        return torus_dist(np.asarray(p), np.asarray(q)) < merge_tol

    buckets: dict = {}
    points: list = []

    def find(p):
        k = key_of(p)
        for off in _neighbor_offsets(dim):
            kk = tuple((k[i] + off[i]) % K for i in range(dim))
            for idx in buckets.get(kk, ()):
                if close(p, points[idx]):
                    return idx
        return None

    def add(p):
        idx = len(points)
        points.append(p)
        buckets.setdefault(key_of(p), []).append(idx)
        return idx

    start = norm_point(np.asarray(x0, dtype=float))
    add(start)
    frontier = [start]
    overflow = False
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = norm_point(g.raw(np.asarray(p, dtype=float)))
                if find(q) is None:
                    add(q)
                    nxt.append(q)
            if len(points) > max_size:
                overflow = True
                break
        if overflow:
            break
        frontier = nxt

    pts = np.asarray(points, dtype=float)
    closed = not overflow
    defect = None
    if closed and len(points) <= verify_cap:
        defect = 0.0
        for g in gens:
            imgs = action.wrap_point(g.raw(pts))
            for img in np.atleast_1d(imgs) if dim == 1 else imgs:
                d = float(
                    np.min(
                        circle_dist(img, pts)
                        if dim == 1
                        else torus_dist(img[None, :], pts)
                    )
                )
                defect = max(defect, d)
    return FiniteOrbit(
        points=pts,
        size=len(points),
        closed=closed,
        merge_tol=merge_tol,
        defect=defect,
        start=start,
    )


def _neighbor_offsets(dim):
    if dim == 1:
        return ((-1,), (0,), (1,))
    return tuple((i, j) for i in (-1, 0, 1) for j in (-1, 0, 1))
