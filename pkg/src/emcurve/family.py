"""Parameter admissibility and curve data for the family.

The family is y^2 = x(x - n1)(x - n2) + t^2 with n1 = (m^2+1)^2,
n2 = -(m^2-1)^2, t = 2m(m^4-1), which factors as
y^2 = (x - (m^4-1))(x + (m^4-1))(x - 4m^2).  A parameter m is admissible when
it is even, m-1 and m+1 are both prime, and m^2+1 is squarefree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .numtheory import factorize, is_prime


class InadmissibleParameter(ValueError):
    """m fails the admissibility conditions."""

    def __init__(self, report: "AdmissibilityReport"):
        super().__init__(f"m = {report.m} is not admissible: {report.describe()}")
        self.report = report


@dataclass(frozen=True)
class AdmissibilityReport:
    """squarefree_check is only evaluated once the twin condition holds."""

    m: int
    is_even: bool
    twin_primes: bool
    squarefree_check: bool

    @property
    def admissible(self) -> bool:
        return self.is_even and self.twin_primes and self.squarefree_check

    def describe(self) -> str:
        if self.admissible:
            return "even; m-1, m+1 both prime; m^2+1 squarefree"
        parts = []
        if not self.is_even:
            parts.append("odd")
        elif not self.twin_primes:
            parts.append("m-1, m+1 not twin primes")
        else:
            parts.append("m^2+1 not squarefree")
        return "; ".join(parts)


@dataclass(frozen=True)
class CurveParams:
    """All curve data derived from an admissible m.

    p_primes, q_primes, r_primes partition the odd bad primes: divisors of
    m^4-1, m^4-1-4m^2 and m^4-1+4m^2 respectively (pairwise coprime since m
    is even).  s_primes is the full bad set including 2.
    """

    m: int
    n1: int
    n2: int
    t: int
    e1: int
    e2: int
    e3: int
    a_value: int  # m^4 - 1
    q_value: int  # m^4 - 1 - 4m^2
    r_value: int  # m^4 - 1 + 4m^2
    p_primes: tuple[int, ...]
    q_primes: tuple[int, ...]
    r_primes: tuple[int, ...]
    q_squarefree: bool
    r_squarefree: bool

    @property
    def roots(self) -> tuple[int, int, int]:
        return (self.e1, self.e2, self.e3)

    @property
    def s_primes(self) -> tuple[int, ...]:
        return tuple(sorted((2,) + self.p_primes + self.q_primes + self.r_primes))

    @property
    def discriminant_divisor(self) -> int:
        return 2**6 * self.a_value**2 * self.q_value**2 * self.r_value**2

    def cubic_coefficients(self) -> tuple[int, int, int]:
        """(a, b, c) of y^2 = x^3 + a x^2 + b x + c.

        Since e1 + e2 = 0 the expansion collapses to
        x^3 - 4m^2 x^2 - A^2 x + 4m^2 A^2 with A = m^4 - 1.
        """
        A = self.a_value
        return (-4 * self.m**2, -(A**2), 4 * self.m**2 * A**2)

    def has_good_reduction(self, ell: int) -> bool:
        return self.discriminant_divisor % ell != 0


def is_admissible(m: int, **factor_kwargs) -> AdmissibilityReport:
    """Admissibility report for m >= 2.

    Every admissible m >= 6 satisfies m = 0 (mod 3) because m-1 and m+1 are
    then primes exceeding 3; m = 4 is the one admissible value where that
    derivation fails (m - 1 = 3).
    """
    if m < 2:
        raise ValueError("m >= 2 required")
    even = m % 2 == 0
    twins = even and is_prime(m - 1) and is_prime(m + 1)
    sqfree = False
    if even and twins:
        sqfree = factorize(m * m + 1, **factor_kwargs).is_squarefree()
    return AdmissibilityReport(
        m=m, is_even=even, twin_primes=twins, squarefree_check=sqfree
    )


def build_curve(m: int, **factor_kwargs) -> CurveParams:
    """Construct CurveParams for an admissible m; factorizations complete.

    Raises InadmissibleParameter for bad m and propagates factorization
    timeouts.  Squarefreeness of m^4-1 +- 4m^2 is recorded, not required; the
    Selmer computation checks the r-side flag itself.
    """
    report = is_admissible(m, **factor_kwargs)
    if not report.admissible:
        raise InadmissibleParameter(report)
    a_value = m**4 - 1
    q_value = a_value - 4 * m**2
    r_value = a_value + 4 * m**2
    fa = factorize(a_value, **factor_kwargs)
    fq = factorize(q_value, **factor_kwargs)
    fr = factorize(r_value, **factor_kwargs)
    return CurveParams(
        m=m,
        n1=(m * m + 1) ** 2,
        n2=-((m * m - 1) ** 2),
        t=2 * m * a_value,
        e1=a_value,
        e2=-a_value,
        e3=4 * m * m,
        a_value=a_value,
        q_value=q_value,
        r_value=r_value,
        p_primes=fa.primes(),
        q_primes=fq.primes(),
        r_primes=fr.primes(),
        q_squarefree=fq.is_squarefree(),
        r_squarefree=fr.is_squarefree(),
    )


def scan_admissible(lo: int, hi: int, **factor_kwargs) -> Iterator[int]:
    """Yield the admissible even m in [lo, hi], ascending."""
    if not 2 <= lo <= hi:
        raise ValueError("need 2 <= lo <= hi")
    start = lo + (lo % 2)
    for m in range(start, hi + 1, 2):
        if is_admissible(m, **factor_kwargs).admissible:
            yield m
