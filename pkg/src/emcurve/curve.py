"""Exact group law on the curve over Q, reduction mod good primes, torsion.

Points carry exact Fraction coordinates; equality is structural on reduced
fractions.  No floating point anywhere: the descent and torsion arguments
need exactness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .family import CurveParams
from .numtheory import legendre

DEFAULT_COUNT_BOUND = 10**4


class BadReductionError(ValueError):
    pass


class PointNotOnCurve(ValueError):
    pass


@dataclass(frozen=True)
class RationalPoint:
    x: Fraction | None
    y: Fraction | None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __repr__(self) -> str:
        if self.is_infinity:
            return "O"
        return f"({self.x}, {self.y})"


INFINITY = RationalPoint(None, None)


def point(x, y) -> RationalPoint:
    return RationalPoint(Fraction(x), Fraction(y))


def curve_rhs(c: CurveParams, x: Fraction) -> Fraction:
    a, b, cc = c.cubic_coefficients()
    return ((x + a) * x + b) * x + cc


def contains(c: CurveParams, p: RationalPoint) -> bool:
    """Exact membership test, including the point at infinity."""
    if p.is_infinity:
        return True
    return p.y * p.y == curve_rhs(c, p.x)


def negate(p: RationalPoint) -> RationalPoint:
    if p.is_infinity:
        return p
    return RationalPoint(p.x, -p.y)


def add(c: CurveParams, p: RationalPoint, q: RationalPoint) -> RationalPoint:
    """Chord-tangent addition.  Errors if either input is off the curve."""
    for r in (p, q):
        if not contains(c, r):
            raise PointNotOnCurve(f"{r} is not on the curve for m={c.m}")
    if p.is_infinity:
        return q
    if q.is_infinity:
        return p
    a2, a4, _ = c.cubic_coefficients()
    if p.x == q.x:
        if p.y == -q.y:
            return INFINITY
        # Tangent line; y != 0 here since y = -y was handled above.
        slope = (3 * p.x * p.x + 2 * a2 * p.x + a4) / (2 * p.y)
    else:
        slope = (q.y - p.y) / (q.x - p.x)
    x3 = slope * slope - a2 - p.x - q.x
    y3 = slope * (p.x - x3) - p.y
    return RationalPoint(x3, y3)


def scalar_mul(c: CurveParams, k: int, p: RationalPoint) -> RationalPoint:
    if k < 0:
        return scalar_mul(c, -k, negate(p))
    out = INFINITY
    acc = p
    while k:
        if k & 1:
            out = add(c, out, acc)
        acc = add(c, acc, acc)
        k >>= 1
    return out


@dataclass(frozen=True)
class ReducedCurve:
    """y^2 = x^3 + a x^2 + b x + c over F_place, place an odd good prime."""

    place: int
    a: int
    b: int
    c: int

    def rhs(self, x: int) -> int:
        return (((x + self.a) * x + self.b) * x + self.c) % self.place


def reduce_mod(c: CurveParams, ell: int) -> ReducedCurve:
    """Reduce the cubic mod an odd prime of good reduction."""
    if ell == 2 or not c.has_good_reduction(ell):
        raise BadReductionError(f"{ell} is a prime of bad reduction for m={c.m}")
    a, b, cc = c.cubic_coefficients()
    return ReducedCurve(place=ell, a=a % ell, b=b % ell, c=cc % ell)


class CountBoundExceeded(RuntimeError):
    pass


def count_points_mod(rc: ReducedCurve, *, bound: int = DEFAULT_COUNT_BOUND) -> int:
    """#E(F_ell) including infinity, by enumerating x.  Intended for small ell."""
    ell = rc.place
    if ell > bound:
        raise CountBoundExceeded(f"point count at {ell} exceeds bound {bound}")
    n = 1
    for x in range(ell):
        v = rc.rhs(x)
        if v == 0:
            n += 1
        elif legendre(v, ell) == 1:
            n += 2
    return n


@dataclass(frozen=True)
class TorsionGroup:
    structure: str
    generators: tuple[RationalPoint, ...]

    @property
    def points(self) -> tuple[RationalPoint, ...]:
        return (INFINITY,) + self.generators

    @property
    def order(self) -> int:
        return 1 + len(self.generators)


def _is_small_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(math.isqrt(n)) + 1):
        if n % d == 0:
            return False
    return True


def _good_odd_primes(c: CurveParams, count: int) -> list[int]:
    out = []
    ell = 3
    while len(out) < count:
        if _is_small_prime(ell) and c.has_good_reduction(ell):
            out.append(ell)
        ell += 2
    return out


def torsion_bound_generic(c: CurveParams, *, primes_to_try: int = 8) -> int:
    """gcd of #E(F_ell) over several good odd ell: an upper bound on |tors|."""
    g = 0
    for ell in _good_odd_primes(c, primes_to_try):
        g = math.gcd(g, count_points_mod(reduce_mod(c, ell)))
        if g == 4:
            break
    return g


def torsion_group(c: CurveParams) -> TorsionGroup:
    """The full torsion subgroup: Z/2 x Z/2 on the three rational roots.

    The three 2-torsion points come from the rational roots of the cubic.
    The matching upper bound |tors| <= 4 comes from injecting torsion into
    E(F_3), where the curve reduces to y^2 = x^3 - x with exactly 4 points;
    3 is good whenever m >= 6 is admissible (then 3 | m).  For m = 4 (where
    3 | m^4-1) the bound falls back to a gcd of point counts at several good
    primes.  Either route failing to give 4 is an internal inconsistency.
    """
    two_torsion = tuple(point(e, 0) for e in c.roots)
    for pt in two_torsion:
        if not contains(c, pt):
            raise PointNotOnCurve(f"root point {pt} not on curve for m={c.m}")
    if c.has_good_reduction(3):
        n3 = count_points_mod(reduce_mod(c, 3))
        if n3 != 4:
            raise AssertionError(
                f"count at 3 gave {n3}, expected 4; curve data for m={c.m} is inconsistent"
            )
        # Cross-check the same bound with the generic multi-prime route.
        if torsion_bound_generic(c) != 4:
            raise AssertionError(
                f"generic torsion bound disagrees with mod-3 count for m={c.m}"
            )
    else:
        if torsion_bound_generic(c, primes_to_try=12) != 4:
            raise AssertionError(
                f"generic torsion bound did not reach 4 for m={c.m}"
            )
    return TorsionGroup(structure="Z/2 x Z/2", generators=two_torsion)
