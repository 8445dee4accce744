"""Naive and canonical heights, the height pairing, and rank certificates.

The canonical height is computed straight from its defining doubling limit,
h-hat(P) = (1/2) lim H(2^N P) / 4^N, with exact integer arithmetic.  The
x-coordinate of 2^N P is iterated as an integer pair via the duplication
formula; the pair is kept reduced by stripping the bad primes, which is exact
because the resultant of the duplication numerator and denominator is
supported on the discriminant primes.  Coordinates grow 4x in bit length per
doubling, so a bit-length cap bounds the work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .curve import RationalPoint, add, contains
from .family import CurveParams

DEFAULT_TOL = 1e-3
DEFAULT_MAX_BITS = 10**6
RANK_PIVOT_FACTOR = 50.0


class HeightBudgetExceeded(RuntimeError):
    """Tolerance unmet when the bit-length cap was hit; carries the last estimate."""

    def __init__(self, estimate: "HeightEstimate"):
        super().__init__(
            f"height iteration hit the bit cap at N={estimate.iterations} "
            f"with error bound {estimate.error_bound:.3g}"
        )
        self.estimate = estimate


@dataclass(frozen=True)
class HeightEstimate:
    value: float
    iterations: int
    error_bound: float


@dataclass(frozen=True)
class PairingMatrix:
    points: tuple[RationalPoint, ...]
    entries: tuple[tuple[float, ...], ...]
    determinant: float


def naive_height(p: RationalPoint) -> float:
    """log max(|num|, |den|) of x(P) in lowest terms; H((0, y)) = 0."""
    if p.is_infinity:
        raise ValueError("naive height of the identity is handled by canonical_height")
    num, den = abs(p.x.numerator), p.x.denominator
    return math.log(max(num, den, 1))


def _duplication_step(
    u: int, v: int, coeffs: tuple[int, int, int], strip: tuple[int, ...]
) -> tuple[int, int]:
    """x(2P) = (u', v') from x(P) = u/v on y^2 = x^3 + a x^2 + b x + c.

    Numerator u^4 - 2b u^2 v^2 - 8c u v^3 + (b^2 - 4ac) v^4 over 4 v f(u/v) v^3;
    common factors are supported on `strip` (discriminant primes), so dividing
    those out re-reduces the fraction exactly.
    """
    a, b, c = coeffs
    u2 = u * u
    v2 = v * v
    uv = u * v
    nu = u2 * u2 - 2 * b * u2 * v2 - 8 * c * uv * v2 + (b * b - 4 * a * c) * v2 * v2
    dv = 4 * v * (u2 * u + a * u2 * v + b * u * v2 + c * v2 * v)
    if dv < 0:
        nu, dv = -nu, -dv
    for p in strip:
        while nu % p == 0 and dv % p == 0:
            nu //= p
            dv //= p
    return nu, dv


def canonical_height(
    c: CurveParams,
    p: RationalPoint,
    tol: float = DEFAULT_TOL,
    *,
    max_bits: int = DEFAULT_MAX_BITS,
) -> HeightEstimate:
    """Neron-Tate height by the doubling limit, exactly 0 on torsion.

    Stops once successive normalized estimates differ by less than tol;
    raises HeightBudgetExceeded (carrying the last estimate) if the
    coordinate bit-length cap is reached first.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not contains(c, p):
        raise ValueError(f"{p} is not on the curve for m={c.m}")
    if p.is_infinity or p.y == 0:
        return HeightEstimate(value=0.0, iterations=0, error_bound=0.0)

    coeffs = c.cubic_coefficients()
    strip = c.s_primes
    u, v = p.x.numerator, p.x.denominator
    est_prev = math.log(max(abs(u), v, 1)) / 2.0
    n = 0
    gap_prev = math.inf
    while True:
        # A 2-torsion x would zero the denominator; non-torsion points never hit it.
        u, v = _duplication_step(u, v, coeffs, strip)
        n += 1
        est = math.log(max(abs(u), abs(v), 1)) / (2.0 * 4.0**n)
        gap = abs(est - est_prev)
        # The gap sequence is not monotone (early coincidental plateaus
        # occur), so demand two consecutive sub-tolerance gaps.
        if gap < tol and gap_prev < tol:
            return HeightEstimate(value=est, iterations=n, error_bound=gap)
        est_prev = est
        gap_prev = gap
        if max(abs(u).bit_length(), abs(v).bit_length()) * 4 > max_bits:
            raise HeightBudgetExceeded(
                HeightEstimate(value=est, iterations=n, error_bound=gap)
            )


def height_pairing(
    c: CurveParams,
    p: RationalPoint,
    q: RationalPoint,
    tol: float = DEFAULT_TOL,
    *,
    max_bits: int = DEFAULT_MAX_BITS,
) -> float:
    """<P, Q> = h-hat(P+Q) - h-hat(P) - h-hat(Q), each height at tol/3."""
    each = tol / 3.0
    hsum = canonical_height(c, add(c, p, q), each, max_bits=max_bits).value
    hp = canonical_height(c, p, each, max_bits=max_bits).value
    hq = canonical_height(c, q, each, max_bits=max_bits).value
    return hsum - hp - hq


def pairing_matrix(
    c: CurveParams,
    pts: list[RationalPoint] | tuple[RationalPoint, ...],
    tol: float = DEFAULT_TOL,
    *,
    max_bits: int = DEFAULT_MAX_BITS,
) -> PairingMatrix:
    pts = tuple(pts)
    k = len(pts)
    entries = [[0.0] * k for _ in range(k)]
    for i in range(k):
        for j in range(i, k):
            val = height_pairing(c, pts[i], pts[j], tol, max_bits=max_bits)
            entries[i][j] = entries[j][i] = val
    rows = tuple(tuple(r) for r in entries)
    return PairingMatrix(points=pts, entries=rows, determinant=_det(rows))


def _det(rows: tuple[tuple[float, ...], ...]) -> float:
    n = len(rows)
    a = [list(r) for r in rows]
    det = 1.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0.0:
            return 0.0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            for cc in range(col, n):
                a[r][cc] -= f * a[col][cc]
    return det


def independence_rank(
    c: CurveParams,
    pts: list[RationalPoint] | tuple[RationalPoint, ...],
    tol: float = DEFAULT_TOL,
    *,
    max_bits: int = DEFAULT_MAX_BITS,
) -> int:
    """Certified lower bound on the Mordell-Weil rank.

    Numerical rank of the Gram matrix of the height pairing: pivots from
    Gaussian elimination with full pivoting, counted while they exceed
    50*tol.  Positive-semidefiniteness of the pairing makes this a lower
    bound on the number of independent points.
    """
    gram = pairing_matrix(c, pts, tol, max_bits=max_bits)
    a = [list(r) for r in gram.entries]
    n = len(a)
    threshold = RANK_PIVOT_FACTOR * tol
    rank = 0
    for _ in range(n):
        piv_r, piv_c, piv = 0, 0, 0.0
        for i in range(n):
            for j in range(n):
                if abs(a[i][j]) > piv:
                    piv_r, piv_c, piv = i, j, abs(a[i][j])
        if piv <= threshold:
            break
        rank += 1
        pr = a[piv_r]
        pv = pr[piv_c]
        for i in range(n):
            if i == piv_r:
                continue
            f = a[i][piv_c] / pv
            for j in range(n):
                a[i][j] -= f * pr[j]
        for j in range(n):
            pr[j] = 0.0
        for i in range(n):
            a[i][piv_c] = 0.0
    return rank
