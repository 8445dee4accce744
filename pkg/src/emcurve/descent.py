"""Square classes, the descent map, lemma filters, and 2-Selmer assembly.

Candidate pairs live in Q(S,2) x Q(S,2) where Q(S,2) is generated by [-1],
[2] and the odd bad primes.  The four torsion images span an order-4
subgroup H; candidates are enumerated one per H-coset, normalized so that
b1 > 0 and b2 is odd (each coset contains exactly one such pair, and the
normalization implies b1*b2 is never divisible by 4).  The pipeline per
coset is: real place, then the five exclusion rules, then the
quadratic-symbol necessary conditions, then certified local solvability at
2, 3 and every odd bad prime; good primes above 3 need no test because the
homogeneous space is smooth there and carries mod-ell points by Hasse-Weil.

Internally classes are bitmasks over the generator list; symbol tables per
odd bad prime make the filters O(popcount).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

from .curve import RationalPoint, contains
from .family import CurveParams
from .localsolve import (
    LocalVerdict,
    decide_local,
    is_square_qp,
    real_solvable as _real_verdict,
)
from .numtheory import factorize, is_prime, legendre


class SquarefreePrecondition(RuntimeError):
    """m^4 - 1 + 4m^2 is not squarefree; the exclusion lemmas assume it is."""


class UnsupportedClass(ValueError):
    """A square class has support outside the allowed generator set."""


@dataclass(frozen=True)
class SquareClass:
    """Element of Q*/(Q*)^2: a sign times a squarefree product of primes."""

    sign: int
    primes: tuple[int, ...]

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +-1")
        if any(self.primes[i] >= self.primes[i + 1] for i in range(len(self.primes) - 1)):
            raise ValueError("primes must be strictly increasing")

    @property
    def value(self) -> int:
        out = self.sign
        for p in self.primes:
            out *= p
        return out

    @property
    def is_identity(self) -> bool:
        return self.sign == 1 and not self.primes

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        sym = set(self.primes) ^ set(other.primes)
        return SquareClass(self.sign * other.sign, tuple(sorted(sym)))

    def __repr__(self) -> str:
        return f"[{self.value}]"


IDENTITY_CLASS = SquareClass(1, ())


def square_class(n: int, *, within: CurveParams | None = None, **factor_kwargs) -> SquareClass:
    """Squarefree kernel of a nonzero integer as a SquareClass.

    With `within`, demands support inside {2} u S of the curve and raises
    UnsupportedClass otherwise.
    """
    if n == 0:
        raise ValueError("square class of 0 undefined")
    sign = 1 if n > 0 else -1
    odd_part = tuple(
        p for p, e in factorize(abs(n), **factor_kwargs).factors if e % 2 == 1
    )
    cls = SquareClass(sign, odd_part)
    if within is not None:
        allowed = set(within.s_primes)
        if not set(cls.primes) <= allowed:
            raise UnsupportedClass(
                f"{cls} has support outside the bad-place set {sorted(allowed)}"
            )
    return cls


def square_class_of_rational(x: Fraction, **kwargs) -> SquareClass:
    """[a/b] = [a*b] for a nonzero rational in lowest terms."""
    return square_class(x.numerator * x.denominator, **kwargs)


@dataclass
class DescentPair:
    """Candidate ([b1], [b2]) with its pipeline status and evidence.

    status: undecided | excluded | necessary_fail | member.
    reason is set for the two failure statuses (first failing rule, in the
    printed order of the exclusion lemma); local_evidence maps places to
    verdicts accumulated by the pipeline.
    """

    b1: SquareClass
    b2: SquareClass
    status: str = "undecided"
    reason: str | None = None
    local_evidence: dict = field(default_factory=dict)

    def key(self) -> tuple[int, int]:
        return (self.b1.value, self.b2.value)


@dataclass(frozen=True)
class SelmerResult:
    curve: CurveParams
    members: tuple[DescentPair, ...]
    size_log2: int
    s2: int
    theorem_w: int
    corollary_value: int | None
    status_counts: dict

    @property
    def rank_upper_bound(self) -> int:
        return self.s2


class DescentContext:
    """Bitmask arithmetic and symbol tables for one curve's Q(S,2)."""

    def __init__(self, curve: CurveParams):
        self.curve = curve
        self.gens: tuple[int, ...] = (-1, 2) + curve.p_primes + curve.q_primes + curve.r_primes
        self.index = {g: i for i, g in enumerate(self.gens)}
        self.nbits = len(self.gens)
        self.sign_bit = 1 << 0
        self.two_bit = 1 << 1

        def mask_of(primes):
            m = 0
            for p in primes:
                m |= 1 << self.index[p]
            return m

        self.p_mask = mask_of(curve.p_primes)
        self.q_mask = mask_of(curve.q_primes)
        self.r_mask = mask_of(curve.r_primes)
        # Odd generators congruent to 3 mod 4 (the sign acts like one).
        self.mod4_mask = self.sign_bit | mask_of(
            [g for g in self.gens[2:] if g % 4 == 3]
        )
        # chi tables: for each odd bad prime pi, the Legendre symbol of every
        # generator; the entry at pi itself is 0 and must never be consumed.
        self.chi_table: dict[int, tuple[int, ...]] = {}
        for pi in curve.p_primes + curve.q_primes + curve.r_primes:
            row = []
            for g in self.gens:
                row.append(0 if g == pi else legendre(g, pi))
            self.chi_table[pi] = tuple(row)
        # Torsion images phi(T) as mask pairs: (2AB, 2A), (-2A, 2AC), (-B, C).
        pqa = self.two_bit | self.p_mask
        self.h2 = (self.two_bit | self.p_mask | self.q_mask, pqa)
        self.h4 = (self.sign_bit | self.q_mask, self.r_mask)
        self.h3 = (self.h2[0] ^ self.h4[0], self.h2[1] ^ self.h4[1])

    # -- mask <-> class ------------------------------------------------------

    def mask_of_class(self, cls: SquareClass) -> int:
        m = 0 if cls.sign == 1 else self.sign_bit
        for p in cls.primes:
            if p not in self.index:
                raise UnsupportedClass(f"prime {p} outside the generator set")
            m |= 1 << self.index[p]
        return m

    def class_of_mask(self, mask: int) -> SquareClass:
        sign = -1 if mask & self.sign_bit else 1
        primes = tuple(
            sorted(self.gens[i] for i in range(1, self.nbits) if mask >> i & 1)
        )
        return SquareClass(sign, primes)

    def value_of_mask(self, mask: int) -> int:
        out = -1 if mask & self.sign_bit else 1
        for i in range(1, self.nbits):
            if mask >> i & 1:
                out *= self.gens[i]
        return out

    def chi(self, pi: int, mask: int) -> int:
        """Legendre symbol of the class `mask` at pi; pi must not divide it."""
        row = self.chi_table[pi]
        out = 1
        for i in range(self.nbits):
            if mask >> i & 1:
                out *= row[i]
        return out

    def mod4(self, mask: int) -> int:
        """Residue mod 4 of an odd class value."""
        return 3 if bin(mask & self.mod4_mask).count("1") % 2 else 1

    # -- coset machinery ------------------------------------------------------

    def canonical_rep(self, b1m: int, b2m: int) -> tuple[int, int]:
        """The H-coset representative with b1 > 0 and b2 odd."""
        if b2m & self.two_bit:
            b1m ^= self.h2[0]
            b2m ^= self.h2[1]
        if b1m & self.sign_bit:
            b1m ^= self.h4[0]
            b2m ^= self.h4[1]
        return b1m, b2m

    def torsion_image_masks(self) -> tuple[tuple[int, int], ...]:
        return ((0, 0), self.h2, self.h3, self.h4)

    def rep_of_index(self, idx: int) -> tuple[int, int]:
        """Representative #idx: b1 ranges over subsets of the gens minus the
        sign (a contiguous shift), b2 over subsets of the gens minus 2."""
        half = 1 << (self.nbits - 1)
        a, b = divmod(idx, half)
        b1m = a << 1
        b2m = (b & 1) | (b >> 1) << 2
        return b1m, b2m

    def coset_reps(self) -> Iterator[tuple[int, int]]:
        """All 4^(1 + #odd bad primes) coset representatives, in index order."""
        for idx in range(self.coset_count()):
            yield self.rep_of_index(idx)

    def coset_count(self) -> int:
        return 1 << (2 * (self.nbits - 1))

    # -- pipeline pieces -------------------------------------------------------

    def exclusion_reason(self, b1m: int, b2m: int) -> str | None:
        """First exclusion rule that fires, in the printed order (i)-(v)."""
        if b2m & self.sign_bit:
            return "(i) b2 < 0"
        if b2m & self.q_mask:
            return "(ii) b2 = 0 mod q_i"
        if b1m & self.r_mask:
            return "(iii) b1 = 0 mod r_i"
        if (b1m ^ b2m) & self.p_mask:
            return "(iv) v_p(b1*b2) = 1"
        if (b1m ^ b2m) & self.two_bit:
            return "(v) b1*b2 = 2 mod 4"
        return None

    def necessary_failures(self, b1m: int, b2m: int) -> list[str]:
        """Violated symbol conditions, assuming no exclusion rule fired."""
        out = []
        both = b1m & b2m & self.p_mask
        neither = ~(b1m | b2m)
        for p in self.curve.p_primes:
            bit = 1 << self.index[p]
            if both & bit:
                # The class of b1*b2/p^2 is the symmetric difference of the
                # masks (the shared p-bit squares away); prepend a sign flip.
                val = self.chi_table[p][0] * self.chi(p, b1m ^ b2m)
                if val != 1:
                    out.append(f"(i) chi_{p}(-b1*b2/p^2) != 1")
            elif neither & bit:
                if self.chi(p, b1m) != self.chi(p, b2m):
                    out.append(f"(i) chi_{p}(b1) != chi_{p}(b2)")
        for q in self.curve.q_primes:
            target = legendre(2, q) if b1m >> self.index[q] & 1 else 1
            if self.chi(q, b2m & ~(1 << self.index[q])) != target:
                out.append(f"(ii) chi_{q}(b2) condition")
        for r in self.curve.r_primes:
            target = legendre(2, r) if b2m >> self.index[r] & 1 else 1
            if self.chi(r, b1m & ~(1 << self.index[r])) != target:
                out.append(f"(iii) chi_{r}(b1) condition")
        if self.mod4(b1m) != 1:
            out.append("(iv) b1 != 1 mod 4")
        return out

    def local_places(self) -> tuple[int, ...]:
        odd = sorted(set(self.curve.s_primes) - {2})
        places = [2, 3] + [p for p in odd if p != 3]
        return tuple(dict.fromkeys(places))


def q_s_2(curve: CurveParams) -> list[SquareClass]:
    """Generators of Q(S,2): [-1], [2], and each odd bad prime."""
    out = [SquareClass(-1, ()), SquareClass(1, (2,))]
    for p in curve.p_primes + curve.q_primes + curve.r_primes:
        out.append(SquareClass(1, (p,)))
    return out


def phi_image(curve: CurveParams, pt: RationalPoint, **factor_kwargs) -> DescentPair:
    """Image of a rational point under the descent map.

    Generic case ([x - e1], [x + e1]); the printed special cases at the
    2-torsion abscissae x = e1 and x = e2; identity pair at infinity.  The
    third root e3 falls under the generic formula.
    """
    if not contains(curve, pt):
        raise ValueError(f"{pt} is not on the curve for m={curve.m}")
    A = curve.a_value
    if pt.is_infinity:
        return DescentPair(IDENTITY_CLASS, IDENTITY_CLASS)
    if pt.x == curve.e1:
        b1 = square_class(2 * A * curve.q_value, **factor_kwargs)
        b2 = square_class(2 * A, **factor_kwargs)
    elif pt.x == curve.e2:
        b1 = square_class(-2 * A, **factor_kwargs)
        b2 = square_class(2 * A * curve.r_value, **factor_kwargs)
    else:
        b1 = square_class_of_rational(pt.x - curve.e1, **factor_kwargs)
        b2 = square_class_of_rational(pt.x + curve.e1, **factor_kwargs)
    return DescentPair(b1, b2)


def candidate_pairs(curve: CurveParams) -> Iterator[DescentPair]:
    """One candidate per coset of the torsion image, in canonical mask order.

    Representatives have b1 > 0 and b2 odd, hence b1*b2 is never 0 mod 4.
    """
    ctx = DescentContext(curve)
    for b1m, b2m in ctx.coset_reps():
        yield DescentPair(ctx.class_of_mask(b1m), ctx.class_of_mask(b2m))


def lemma_exclusion_filter(curve: CurveParams, pair: DescentPair) -> str | None:
    """First matching exclusion among the five printed rules, else None."""
    ctx = DescentContext(curve)
    return ctx.exclusion_reason(
        ctx.mask_of_class(pair.b1), ctx.mask_of_class(pair.b2)
    )


def necessary_conditions(curve: CurveParams, pair: DescentPair) -> tuple[bool, list[str]]:
    """Symbol conditions every Selmer member satisfies; (ok, failed rules)."""
    ctx = DescentContext(curve)
    fails = ctx.necessary_failures(
        ctx.mask_of_class(pair.b1), ctx.mask_of_class(pair.b2)
    )
    return (not fails, fails)


def real_solvable(curve: CurveParams, pair: DescentPair) -> LocalVerdict:
    return _real_verdict(pair.b1.value, pair.b2.value)


def local_solvable(
    curve: CurveParams,
    pair: DescentPair,
    place: int,
    depth: int | None = None,
    **solver_kwargs,
) -> LocalVerdict:
    """Certified Q_place solvability of the pair's homogeneous space."""
    if place != 2 and not is_prime(place):
        raise ValueError(f"place must be a prime, got {place}")
    return decide_local(
        pair.b1.value,
        pair.b2.value,
        curve.a_value,
        curve.q_value,
        curve.r_value,
        place,
        depth=depth,
        **solver_kwargs,
    )


def _run_pipeline_range(
    curve: CurveParams,
    lo: int,
    hi: int,
    want_witness: bool,
    observer: Callable[[DescentPair], None] | None = None,
) -> tuple[list[DescentPair], dict]:
    """Run the full pipeline on coset representatives lo..hi (by index)."""
    ctx = DescentContext(curve)
    places = ctx.local_places()
    counts = {"excluded": 0, "necessary_fail": 0, "member": 0}
    members: list[DescentPair] = []
    for idx in range(lo, hi):
        b1m, b2m = ctx.rep_of_index(idx)
        # Rule (i) doubles as the real place, so the exclusion scan covers
        # the whole pre-filter pipeline.
        reason = ctx.exclusion_reason(b1m, b2m)
        if reason is not None:
            counts["excluded"] += 1
            if observer:
                observer(_make_pair(ctx, b1m, b2m, "excluded", reason))
            continue
        fails = ctx.necessary_failures(b1m, b2m)
        if fails:
            counts["necessary_fail"] += 1
            if observer:
                observer(_make_pair(ctx, b1m, b2m, "necessary_fail", "; ".join(fails)))
            continue
        pair = _make_pair(ctx, b1m, b2m, "undecided", None)
        pair.local_evidence[math.inf] = _real_verdict(pair.b1.value, pair.b2.value)
        solvable = True
        for ell in places:
            verdict = decide_local(
                pair.b1.value,
                pair.b2.value,
                curve.a_value,
                curve.q_value,
                curve.r_value,
                ell,
                want_witness=want_witness,
            )
            pair.local_evidence[ell] = verdict
            if not verdict.is_solvable:
                solvable = False
                break
        if solvable:
            pair.status = "member"
            counts["member"] += 1
            members.append(pair)
        else:
            pair.status = "excluded"
            pair.reason = f"locally unsolvable at {ell}"
            counts["excluded"] += 1
        if observer:
            observer(pair)
    return members, counts


def _make_pair(ctx, b1m, b2m, status, reason) -> DescentPair:
    return DescentPair(
        b1=ctx.class_of_mask(b1m),
        b2=ctx.class_of_mask(b2m),
        status=status,
        reason=reason,
    )


def _worker(args):
    curve, lo, hi, want_witness = args
    members, counts = _run_pipeline_range(curve, lo, hi, want_witness)
    return [(p.b1.value, p.b2.value) for p in members], counts


def selmer_group(
    curve: CurveParams,
    *,
    jobs: int = 1,
    want_witness: bool = True,
    observer: Callable[[DescentPair], None] | None = None,
) -> SelmerResult:
    """Full 2-Selmer computation: filters, symbols, certified local tests.

    Refuses when m^4-1+4m^2 is not squarefree (a hypothesis of the exclusion
    lemmas), and raises rather than guess when any local verdict cannot be
    certified.  s2 satisfies |Sel| = 2^(2+s2) where |Sel| counts 4 elements
    per member coset.
    """
    if not curve.r_squarefree:
        raise SquarefreePrecondition(
            f"m^4-1+4m^2 = {curve.r_value} is not squarefree for m={curve.m}"
        )
    ctx = DescentContext(curve)
    total = ctx.coset_count()
    if jobs > 1 and observer is None:
        chunk = (total + jobs - 1) // jobs
        tasks = [
            (curve, k * chunk, min((k + 1) * chunk, total), want_witness)
            for k in range(jobs)
        ]
        members_keys: list[tuple[int, int]] = []
        counts = {"excluded": 0, "necessary_fail": 0, "member": 0}
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            for keys, sub in ex.map(_worker, tasks):
                members_keys.extend(keys)
                for k, v in sub.items():
                    counts[k] += v
        # Re-run the members serially to regain witnesses deterministically.
        members = []
        for b1v, b2v in members_keys:
            pair = DescentPair(
                square_class(b1v, within=curve), square_class(b2v, within=curve)
            )
            pair.local_evidence[math.inf] = _real_verdict(b1v, b2v)
            for ell in ctx.local_places():
                pair.local_evidence[ell] = decide_local(
                    b1v, b2v, curve.a_value, curve.q_value, curve.r_value, ell,
                    want_witness=want_witness,
                )
            pair.status = "member"
            members.append(pair)
    else:
        members, counts = _run_pipeline_range(
            curve, 0, total, want_witness, observer
        )

    members.sort(key=lambda p: p.key())
    count = len(members)
    s2 = count.bit_length() - 1
    if 1 << s2 != count:
        raise AssertionError(
            f"member coset count {count} is not a power of two for m={curve.m}"
        )
    _check_group_closure(ctx, members)
    corollary = corollary_rank(curve)
    return SelmerResult(
        curve=curve,
        members=tuple(members),
        size_log2=2 + s2,
        s2=s2,
        theorem_w=theorem_lower_bound(curve),
        corollary_value=corollary,
        status_counts=counts,
    )


def _check_group_closure(ctx: DescentContext, members: list[DescentPair]) -> None:
    keys = {
        ctx.canonical_rep(ctx.mask_of_class(p.b1), ctx.mask_of_class(p.b2))
        for p in members
    }
    for a in keys:
        for b in keys:
            prod = ctx.canonical_rep(a[0] ^ b[0], a[1] ^ b[1])
            if prod not in keys:
                raise AssertionError(
                    "member set not closed under componentwise multiplication"
                )


def theorem_lower_bound(curve: CurveParams) -> int:
    """Count of primes p | m^4-1 whose symbol pattern forces (p-ish, p) in Sel.

    p = 1 mod 4 needs (p/q_i) = (p/r_j) = 1 for all q_i, r_j; p = 3 mod 4
    needs (p/q_i) = (-p/r_j) = 1 instead.
    """
    w = 0
    for p in curve.p_primes:
        if p % 4 == 1:
            ok = all(legendre(p, q) == 1 for q in curve.q_primes) and all(
                legendre(p, r) == 1 for r in curve.r_primes
            )
        else:
            ok = all(legendre(p, q) == 1 for q in curve.q_primes) and all(
                legendre(-p, r) == 1 for r in curve.r_primes
            )
        if ok:
            w += 1
    return w


def corollary_rank(curve: CurveParams) -> int | None:
    """1 + #{p | m^4-1} when both m^4-1-4m^2 and m^4-1+4m^2 are prime, else None."""
    q_prime = len(curve.q_primes) == 1 and curve.q_primes[0] == curve.q_value
    r_prime = len(curve.r_primes) == 1 and curve.r_primes[0] == curve.r_value
    if q_prime and r_prime:
        return len(curve.p_primes) + 1
    return None
