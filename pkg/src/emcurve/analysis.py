"""End-to-end analysis of one parameter and its machine-readable record.

The record is built from plain JSON types so that parse(serialize(x)) == x
holds exactly: arbitrary-precision integers are carried as decimal strings
and floats rely on repr round-tripping.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from . import ENGINE_VERSION
from .curve import point, torsion_group
from .descent import selmer_group
from .family import build_curve, is_admissible
from .heights import (
    DEFAULT_MAX_BITS,
    DEFAULT_TOL,
    HeightBudgetExceeded,
    independence_rank,
    pairing_matrix,
)
from .numtheory import DEFAULT_RHO_BUDGET


@dataclass(frozen=True)
class EngineConfig:
    seed: int = 0
    rho_budget: int = DEFAULT_RHO_BUDGET
    tol: float = DEFAULT_TOL
    max_bits: int = DEFAULT_MAX_BITS
    jobs: int = 1


@dataclass
class AnalysisRecord:
    """Everything one parameter produces, in JSON-plain form."""

    m: int
    engine_version: str
    admissible: bool
    admissibility: dict
    torsion_structure: str
    torsion_points: list
    pairing_entries: list
    pairing_determinant: float
    independence: int
    heights_tol: float
    s2: int
    size_log2: int
    theorem_w: int
    corollary_value: int | None
    members: list
    status_counts: dict
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AnalysisRecord":
        return cls(**json.loads(text))

    def csv_row(self) -> list[str]:
        return [
            str(self.m),
            self.torsion_structure,
            str(self.independence),
            f"{self.pairing_determinant!r}",
            str(self.s2),
            str(self.theorem_w),
            "" if self.corollary_value is None else str(self.corollary_value),
            str(len(self.members)),
        ]

    CSV_HEADER = [
        "m", "torsion", "rank_lower_bound", "pairing_det",
        "s2", "theorem_w", "corollary", "member_cosets",
    ]


def run_analysis(
    m: int,
    config: EngineConfig = EngineConfig(),
    *,
    cache=None,
    observer=None,
) -> AnalysisRecord:
    """Admissibility, torsion, height pairing, and the full descent for m.

    Raises InadmissibleParameter for bad m; propagates factorization
    timeouts, height budget errors and local-solver failures (callers map
    those to exit codes).
    """
    factor_kwargs = {"seed": config.seed, "rho_budget": config.rho_budget,
                     "cache": cache}
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    curve = build_curve(m, **factor_kwargs)
    report = is_admissible(m, **factor_kwargs)
    timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    tors = torsion_group(curve)
    timings["torsion"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    p1 = point(0, curve.t)
    p2 = point(curve.n1, curve.t)
    tol = config.tol
    while True:
        try:
            gram = pairing_matrix(curve, (p1, p2), tol, max_bits=config.max_bits)
            rank = independence_rank(curve, (p1, p2), tol, max_bits=config.max_bits)
            break
        except HeightBudgetExceeded:
            # Bit cap hit before the gap criterion; a coarser tolerance still
            # leaves margins far above the rank threshold.
            tol *= 10
            if tol > 1.0:
                raise
    timings["heights"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    selmer = selmer_group(curve, jobs=config.jobs, observer=observer)
    timings["selmer"] = time.perf_counter() - t0

    return AnalysisRecord(
        m=m,
        engine_version=ENGINE_VERSION,
        admissible=report.admissible,
        admissibility={
            "is_even": report.is_even,
            "twin_primes": report.twin_primes,
            "squarefree_check": report.squarefree_check,
        },
        torsion_structure=tors.structure,
        torsion_points=[None]
        + [[str(pt.x), str(pt.y)] for pt in tors.generators],
        pairing_entries=[list(row) for row in gram.entries],
        pairing_determinant=gram.determinant,
        independence=rank,
        heights_tol=tol,
        s2=selmer.s2,
        size_log2=selmer.size_log2,
        theorem_w=selmer.theorem_w,
        corollary_value=selmer.corollary_value,
        members=[[str(p.b1.value), str(p.b2.value)] for p in selmer.members],
        status_counts=dict(selmer.status_counts),
        timings=timings,
    )
