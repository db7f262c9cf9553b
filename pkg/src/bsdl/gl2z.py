"""Exact arithmetic for 2x2 integer matrices and rational affine planar maps.

Everything here is integer or Fraction arithmetic. No floats enter: the
isotopy-class bookkeeping of torus actions (finite order, GL(2,Z)
conjugacy, the linear relation A_h A_f A_h^-1 = A_f^n, fixed points of
the induced rational affine map) is decided exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "IntMatrix2",
    "AffineMapQ2",
    "finite_order",
    "conjugate_in_gl2z",
    "bs_linear_compatible",
    "affine_fixed_point",
    "rational_to_json",
    "rational_from_json",
]

# Enumeration in conjugate_in_gl2z walks coefficient shells; this caps the
# total number of candidates so a degenerate call cannot hang.
MAX_CONJUGACY_CANDIDATES = 20_000_000


@dataclass(frozen=True)
class IntMatrix2:
    """2x2 integer matrix [[a, b], [c, d]]."""

    a: int
    b: int
    c: int
    d: int

    @staticmethod
    def identity() -> "IntMatrix2":
        return IntMatrix2(1, 0, 0, 1)

    @staticmethod
    def from_rows(rows, second=None) -> "IntMatrix2":
        if second is not None:
            rows = (rows, second)
        (a, b), (c, d) = rows
        return IntMatrix2(int(a), int(b), int(c), int(d))

    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def trace(self) -> int:
        return self.a + self.d

    def is_unimodular(self) -> bool:
        return abs(self.det()) == 1

    def __mul__(self, other: "IntMatrix2") -> "IntMatrix2":
        return IntMatrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "IntMatrix2":
        return IntMatrix2(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "IntMatrix2":
        """Exact inverse; only defined for det = +-1."""
        det = self.det()
        if abs(det) != 1:
            raise ValueError(f"inverse requires det +-1, got det={det}")
        # adjugate divided by det; det is +-1 so entries stay integral
        return IntMatrix2(self.d * det, -self.b * det, -self.c * det, self.a * det)

    def __pow__(self, k: int) -> "IntMatrix2":
        if k < 0:
            return self.inverse() ** (-k)
        out = IntMatrix2.identity()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def apply(self, v):
        """Apply to a length-2 vector of ints or Fractions."""
        x, y = v
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def rows(self):
        return ((self.a, self.b), (self.c, self.d))

    def to_json(self):
        return [[self.a, self.b], [self.c, self.d]]

    @staticmethod
    def from_json(obj) -> "IntMatrix2":
        if (
            not isinstance(obj, (list, tuple))
            or len(obj) != 2
            or any(len(r) != 2 for r in obj)
        ):
            raise ValueError(f"matrix JSON must be [[a,b],[c,d]], got {obj!r}")
        vals = [obj[0][0], obj[0][1], obj[1][0], obj[1][1]]
        for v in vals:
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValueError(f"matrix entries must be integers, got {v!r}")
        return IntMatrix2(*vals)


def rational_to_json(q: Fraction) -> dict:
    q = Fraction(q)
    return {"num": q.numerator, "den": q.denominator}


def rational_from_json(obj) -> Fraction:
    if not isinstance(obj, dict) or set(obj) != {"num", "den"}:
        raise ValueError(f"rational JSON must be {{'num': p, 'den': q}}, got {obj!r}")
    num, den = obj["num"], obj["den"]
    if not isinstance(num, int) or not isinstance(den, int) or den <= 0:
        raise ValueError(f"rational JSON needs integer num and positive den, got {obj!r}")
    return Fraction(num, den)


def _require_unimodular(m: IntMatrix2, name: str) -> None:
    if not m.is_unimodular():
        raise ValueError(f"{name} must lie in GL(2,Z): det={m.det()}")


def finite_order(A: IntMatrix2) -> int | None:
    """Order of A in GL(2,Z) if finite, else None.

    Finite orders of 2x2 integer matrices are restricted to
    {1, 2, 3, 4, 6}, so checking powers up to 6 decides the question.
    """
    _require_unimodular(A, "A")
    ident = IntMatrix2.identity()
    power = ident
    for k in range(1, 7):
        power = power * A
        if power == ident:
            return k
    return None


def _sylvester_rows(A: IntMatrix2, B: IntMatrix2):
    """4x4 integer matrix of X -> A X - X B on vec(X) = (x11, x12, x21, x22)."""
    a = A.rows()
    b = B.rows()
    rows = []
    for i in range(2):
        for j in range(2):
            row = [0, 0, 0, 0]
            for k in range(2):
                row[2 * k + j] += a[i][k]      # (A X)_{ij} hits X_{kj}
                row[2 * i + k] -= b[k][j]      # (X B)_{ij} hits X_{ik}
            rows.append(row)
    return rows


def _integer_kernel_basis(rows):
    """Basis of the integer kernel {v in Z^m : M v = 0} via column reduction.

    Column operations are accumulated in a unimodular U, so the returned
    vectors generate the full (saturated) kernel lattice, not a finite
    index sublattice.
    """
    nrows = len(rows)
    ncols = len(rows[0])
    acols = [[rows[i][j] for i in range(nrows)] for j in range(ncols)]
    ucols = [[1 if i == j else 0 for i in range(ncols)] for j in range(ncols)]
    lead = 0
    for r in range(nrows):
        while True:
            live = [j for j in range(lead, ncols) if acols[j][r] != 0]
            if len(live) <= 1:
                break
            piv = min(live, key=lambda j: abs(acols[j][r]))
            for j in live:
                if j == piv:
                    continue
                q = acols[j][r] // acols[piv][r]
                if q:
                    for i in range(nrows):
                        acols[j][i] -= q * acols[piv][i]
                    for i in range(ncols):
                        ucols[j][i] -= q * ucols[piv][i]
        live = [j for j in range(lead, ncols) if acols[j][r] != 0]
        if live:
            j = live[0]
            acols[lead], acols[j] = acols[j], acols[lead]
            ucols[lead], ucols[j] = ucols[j], ucols[lead]
            lead += 1
    return [ucols[j] for j in range(ncols) if all(v == 0 for v in acols[j])]


def _shell_tuples(dim: int, shell: int):
    rng = range(-shell, shell + 1)
    for tup in itertools.product(rng, repeat=dim):
        if max(abs(t) for t in tup) == shell:
            yield tup


def conjugate_in_gl2z(A: IntMatrix2, B: IntMatrix2, bound: int = 50) -> IntMatrix2 | None:
    """Search X in GL(2,Z) with X B X^-1 = A.

    Solves X B = A X as a 4x4 integer linear system, takes an integer
    basis of the solution lattice and enumerates coefficient vectors in
    sup-norm shells up to `bound`, returning the first combination with
    det +-1. None means no conjugator exists with coefficients within
    the bound (for a trivial solution lattice, none exists at all).
    """
    _require_unimodular(A, "A")
    _require_unimodular(B, "B")
    if A == B:
        return IntMatrix2.identity()
    basis = _integer_kernel_basis(_sylvester_rows(A, B))
    if not basis:
        return None
    dim = len(basis)
    if (2 * bound + 1) ** dim > MAX_CONJUGACY_CANDIDATES:
        raise ValueError(
            f"enumeration of {(2 * bound + 1) ** dim} candidates exceeds cap; "
            "reduce bound"
        )
    for shell in range(1, bound + 1):
        for coeffs in _shell_tuples(dim, shell):
            e = [0, 0, 0, 0]
            for c, vec in zip(coeffs, basis):
                if c:
                    for i in range(4):
                        e[i] += c * vec[i]
            X = IntMatrix2(e[0], e[1], e[2], e[3])
            if abs(X.det()) != 1:
                continue
            if X * B == A * X:
                return X
    return None


def bs_linear_compatible(Af: IntMatrix2, Ah: IntMatrix2, n: int) -> bool:
    """Whether Ah Af Ah^-1 = Af^n holds exactly."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    _require_unimodular(Af, "Af")
    _require_unimodular(Ah, "Ah")
    return Ah * Af * Ah.inverse() == Af ** n


@dataclass(frozen=True)
class AffineMapQ2:
    """Affine map v -> L v + t of the plane with Fraction entries."""

    linear: tuple  # ((l11, l12), (l21, l22)) Fractions
    translation: tuple  # (t1, t2) Fractions

    @staticmethod
    def from_entries(l11, l12, l21, l22, t1, t2) -> "AffineMapQ2":
        f = Fraction
        return AffineMapQ2(
            ((f(l11), f(l12)), (f(l21), f(l22))),
            (f(t1), f(t2)),
        )

    @staticmethod
    def relation_constraint(Ah: IntMatrix2, Q, n: int) -> "AffineMapQ2":
        """The contraction v -> (Ah v + Q) / n induced by the group relation.

        Q is an integer translation vector; the map has linear
        determinant det(Ah) / n^2, so modulus 1/n^2 in the unimodular case.
        """
        if n < 2:
            raise ValueError(f"n must be >= 2, got {n}")
        q1, q2 = Q
        f = Fraction
        return AffineMapQ2(
            (
                (f(Ah.a, n), f(Ah.b, n)),
                (f(Ah.c, n), f(Ah.d, n)),
            ),
            (f(int(q1), n), f(int(q2), n)),
        )

    def apply(self, v):
        x, y = Fraction(v[0]), Fraction(v[1])
        (l11, l12), (l21, l22) = self.linear
        t1, t2 = self.translation
        return (l11 * x + l12 * y + t1, l21 * x + l22 * y + t2)

    def det_linear(self) -> Fraction:
        (l11, l12), (l21, l22) = self.linear
        return l11 * l22 - l12 * l21

    def to_json(self):
        (l11, l12), (l21, l22) = self.linear
        t1, t2 = self.translation
        return {
            "linear": [
                [rational_to_json(l11), rational_to_json(l12)],
                [rational_to_json(l21), rational_to_json(l22)],
            ],
            "translation": [rational_to_json(t1), rational_to_json(t2)],
        }


def affine_fixed_point(B: AffineMapQ2):
    """The unique fixed point of B as exact Fractions, or None if 1 is an
    eigenvalue of the linear part (fixed point absent or non-unique)."""
    (l11, l12), (l21, l22) = B.linear
    t1, t2 = B.translation
    # solve (I - L) v = t by Cramer's rule
    a11, a12 = 1 - l11, -l12
    a21, a22 = -l21, 1 - l22
    det = a11 * a22 - a12 * a21
    if det == 0:
        return None
    x = (t1 * a22 - a12 * t2) / det
    y = (a11 * t2 - t1 * a21) / det
    return (x, y)
