"""Search for (B, C) making a Nahm sum equal to a known character combination.

Pipeline per matrix A:

1. solve the TBA equations once,
2. enumerate B on a rational grid, one denominator at a time,
3. screen with the residual asymptotic identity (vectorised float64 pass,
   then exact re-check at working precision) and reconstruct C,
4. expand the Nahm sum and compare it exactly against the target list.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Sequence

import mpmath
import numpy as np

from .characters import TargetCombination, combination_series, minimal_targets, predicted_combinations
from .liealg import DynkinSpec, MatrixQ, cartan_matrix, coset_family_matrix, matrix_invert, minimal_family_matrix
from .nahmsum import NahmDatum, nahm_sum
from .qseries import PuiseuxSeries, as_fraction, dedekind_eta, fraction_str, theta_lattice
from .tba import PrecisionConfig, TBASolution, asymptotic_C, asymptotic_residual, solve_x

log = logging.getLogger(__name__)

FAMILIES = ("minimal", "coset", "explicit")
# Float prefilter keeps a candidate when |residual| <= PREFILTER_REL * (bound on rounding scale).
PREFILTER_REL = 1e-8
CHUNK = 1 << 15


class AmbiguousMatchError(RuntimeError):
    pass


class SearchAborted(RuntimeError):
    """Raised when a search fails part-way; ``partial`` holds the matches found so far."""

    def __init__(self, message: str, partial: list):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class SearchConfig:
    family: str
    n: int | None = None
    k: int | None = None
    A: MatrixQ | None = None
    targets: tuple[TargetCombination, ...] | None = None
    range: tuple[Fraction, Fraction] | None = None
    denominators: tuple[int, ...] = (1, 2, 3, 4)
    order: int = 20
    precision: PrecisionConfig = field(default_factory=PrecisionConfig)
    jobs: int = 1
    prefilter: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {', '.join(FAMILIES)}")
        if self.family == "minimal" and (self.n is None or self.n < 1):
            raise ValueError("minimal family needs n >= 1")
        if self.family == "coset" and (self.k is None or self.k < 2):
            raise ValueError("coset family needs k >= 2")
        if self.family == "explicit" and (self.A is None or not self.targets):
            raise ValueError("explicit family needs A and a nonempty target list")
        if not self.denominators or any(d < 1 for d in self.denominators):
            raise ValueError("denominators must be a nonempty list of positive integers")
        object.__setattr__(self, "denominators", tuple(self.denominators))
        if self.range is not None:
            lo, hi = (as_fraction(v) for v in self.range)
            if lo > hi:
                raise ValueError("empty search range")
            object.__setattr__(self, "range", (lo, hi))
        if self.order < 0:
            raise ValueError("order must be nonnegative")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")

    def matrix(self) -> MatrixQ:
        if self.family == "minimal":
            return minimal_family_matrix(self.n)
        if self.family == "coset":
            return coset_family_matrix(self.k)
        return self.A

    @property
    def rank(self) -> int:
        return self.matrix().rows

    @property
    def effective_range(self) -> tuple[Fraction, Fraction]:
        if self.range is not None:
            return self.range
        bound = Fraction(2) if self.rank >= 4 else Fraction(8)
        return (-bound, bound)

    def target_list(self) -> list[TargetCombination]:
        if self.family == "minimal":
            return minimal_targets(self.n)
        if self.family == "coset":
            return predicted_combinations(self.k)
        return list(self.targets)


@dataclass(frozen=True)
class MatchRecord:
    B: tuple[Fraction, ...]
    C: Fraction
    matched: str
    verified_order: int
    c_value: mpmath.mpf
    residual: mpmath.mpf
    denominator: int

    def to_json(self) -> dict:
        return {
            "B": [fraction_str(b) for b in self.B],
            "C": fraction_str(self.C),
            "matched": self.matched,
            "order": self.verified_order,
            "residual": mpmath.nstr(self.residual, 2),
        }


# -- candidates --------------------------------------------------------------------


def _numerator_blocks(cfg: SearchConfig, r: int) -> Iterator[tuple[int, np.ndarray]]:
    """(d, integer numerator array of shape (m, r)) in emission order, already deduplicated."""
    lo, hi = cfg.effective_range
    seen: list[int] = []
    for d in sorted(set(cfg.denominators)):
        span = np.arange(math.ceil(lo * d), math.floor(hi * d) + 1, dtype=np.int64)
        if span.size == 0:
            seen.append(d)
            continue
        # Lexicographic order: the last coordinate varies fastest.
        grid = np.stack(np.meshgrid(*([span] * r), indexing="ij"), axis=-1).reshape(-1, r)
        keep = np.ones(len(grid), dtype=bool)
        for e in seen:
            # p/d lies on the (1/e)-lattice iff p*e is divisible by d.
            keep &= ~np.all((grid * e) % d == 0, axis=1)
        seen.append(d)
        yield d, grid[keep]


def enumerate_candidates(cfg: SearchConfig, r: int | None = None) -> Iterator[tuple[Fraction, ...]]:
    """All B whose entries share a denominator from ``cfg.denominators`` and lie in range.

    A vector is emitted once, under the first denominator whose lattice holds it.
    """
    r = cfg.rank if r is None else r
    for d, block in _numerator_blocks(cfg, r):
        for row in block:
            yield tuple(Fraction(int(p), d) for p in row)


def candidate_count(cfg: SearchConfig) -> int:
    return sum(len(block) for _, block in _numerator_blocks(cfg, cfg.rank))


# -- screening and matching -------------------------------------------------------------


@lru_cache(maxsize=64)
def cached_solution(A: MatrixQ, precision: PrecisionConfig) -> TBASolution:
    return solve_x(A, precision)


def screen_candidate(A: MatrixQ, B: Sequence, sol: TBASolution, cfg: PrecisionConfig | None = None):
    """(passes, C or None, asymptotic C value, residual)."""
    cfg = cfg or PrecisionConfig(working_digits=sol.digits)
    B = tuple(as_fraction(b) for b in B)
    residual = asymptotic_residual(A, B, sol, cfg)
    value, C = asymptotic_C(A, B, sol, cfg)
    passes = abs(residual) <= cfg.filter_tolerance and C is not None
    return passes, (C if passes else None), value, residual


@lru_cache(maxsize=512)
def _target_series(target: TargetCombination, order: int) -> PuiseuxSeries:
    return combination_series(target, order)


def match_series(f: PuiseuxSeries, targets: Iterable[TargetCombination], order: int) -> TargetCombination | None:
    """The unique target equal to ``f`` (same leading exponent, every known coefficient)."""
    hits = []
    for t in targets:
        s = _target_series(t, order)
        if s.offset == f.offset and f.agrees_with(s):
            hits.append(t)
    if len(hits) > 1:
        raise AmbiguousMatchError("several targets agree: " + "; ".join(t.name for t in hits))
    return hits[0] if hits else None


def prefilter_block(sol: TBASolution, B: np.ndarray) -> np.ndarray:
    """Boolean mask of rows of float ``B`` that may satisfy the residual identity."""
    value, scale = sol.expansion.residual_batch(B)
    return np.abs(value) <= PREFILTER_REL * (scale + 1.0)


def _evaluate(A: MatrixQ, B: tuple, d: int, sol: TBASolution, cfg: SearchConfig, targets) -> MatchRecord | None:
    passes, C, value, residual = screen_candidate(A, B, sol, cfg.precision)
    if not passes:
        return None
    series = nahm_sum(NahmDatum(A, B, C), cfg.order)
    target = match_series(series, targets, cfg.order)
    if target is None:
        log.info("B=%s passes the filter (C=%s) but matches no target", [fraction_str(b) for b in B], C)
        return None
    return MatchRecord(B, C, target.name, cfg.order, value, residual, d)


_WORKER: dict = {}


def _worker_init(cfg: SearchConfig) -> None:
    A = cfg.matrix()
    _WORKER["cfg"] = cfg
    _WORKER["A"] = A
    _WORKER["sol"] = cached_solution(A, cfg.precision)
    _WORKER["targets"] = cfg.target_list()


def _worker_eval(job: tuple[tuple, int]):
    B, d = job
    return _evaluate(_WORKER["A"], B, d, _WORKER["sol"], _WORKER["cfg"], _WORKER["targets"])


def _survivors(cfg: SearchConfig, sol: TBASolution) -> Iterator[tuple[tuple, int]]:
    r = sol.rank
    for d, block in _numerator_blocks(cfg, r):
        total = kept = 0
        for start in range(0, len(block), CHUNK):
            chunk = block[start : start + CHUNK]
            total += len(chunk)
            if cfg.prefilter:
                chunk = chunk[prefilter_block(sol, chunk / d)]
            kept += len(chunk)
            for row in chunk:
                yield tuple(Fraction(int(p), d) for p in row), d
        log.info("denominator %d: %d candidates, %d past the float prefilter", d, total, kept)


def iter_search(cfg: SearchConfig) -> Iterator[MatchRecord]:
    """Matches in (denominator, lexicographic B) order."""
    A = cfg.matrix()
    sol = cached_solution(A, cfg.precision)
    targets = cfg.target_list()
    for t in targets:
        _target_series(t, cfg.order)
    jobs = _survivors(cfg, sol)
    if cfg.jobs == 1:
        for B, d in jobs:
            rec = _evaluate(A, B, d, sol, cfg, targets)
            if rec is not None:
                yield rec
        return
    with ProcessPoolExecutor(cfg.jobs, initializer=_worker_init, initargs=(cfg,)) as pool:
        for rec in pool.map(_worker_eval, jobs, chunksize=16):
            if rec is not None:
                yield rec


def run_search(cfg: SearchConfig) -> list[MatchRecord]:
    found: list[MatchRecord] = []
    try:
        for rec in iter_search(cfg):
            found.append(rec)
    except Exception as exc:
        raise SearchAborted(f"search stopped after {len(found)} matches: {exc}", found) from exc
    return found


def records_to_json(records: Sequence[MatchRecord]) -> str:
    return json.dumps([r.to_json() for r in records], indent=2) + "\n"


def records_to_csv(records: Sequence[MatchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["B", "C", "matched"])
    for r in records:
        w.writerow([" ".join(fraction_str(b) for b in r.B), fraction_str(r.C), r.matched])
    return buf.getvalue()


# -- catalogues, duality and the k=4 families -------------------------------------------


def known_B_minimal(n: int) -> list[tuple[Fraction, ...]]:
    """Zero, then (..., 0, 1), (..., 0, 1, 2), up to (1, 2, ..., n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return [tuple(Fraction(0) for _ in range(n - i)) + tuple(Fraction(j) for j in range(1, i + 1)) for i in range(n + 1)]


def known_B_coset(k: int) -> list[tuple[Fraction, ...]]:
    """Zero plus the columns of minus the inverse A_{k-1} Cartan matrix."""
    if k < 2:
        raise ValueError("k must be at least 2")
    inv = matrix_invert(cartan_matrix(DynkinSpec("A", k - 1)))
    zero = tuple(Fraction(0) for _ in range(k - 1))
    return [zero] + [tuple(-v for v in col) for col in inv.columns()]


def dual_transform(A: MatrixQ, B: Sequence, C) -> tuple[MatrixQ, tuple[Fraction, ...], Fraction]:
    """A* = A^-1, B* = A^-1 B, C* = B^t A^-1 B / 2 - r/24 - C."""
    B = tuple(as_fraction(b) for b in B)
    C = as_fraction(C)
    Ai = matrix_invert(A)
    Bs = Ai.apply(B)
    Cs = Ai.quadratic_form(B) / 2 - Fraction(A.rows, 24) - C
    return Ai, Bs, Cs


class FamilyIdentity(NamedTuple):
    B: tuple[Fraction, ...]
    C: Fraction | None
    lhs: PuiseuxSeries | None
    rhs: PuiseuxSeries
    equal: bool


def family_B(j: int, variant: str) -> tuple[Fraction, ...]:
    if variant == "even":
        t = Fraction(3 * j, 2)
    elif variant == "odd":
        t = Fraction(3 * j + 1, 2)
    else:
        raise ValueError("variant must be 'even' or 'odd'")
    return (t, Fraction(0), -t)


def infinite_family_identity(j: int, variant: str, order: int = 15,
                             precision: PrecisionConfig | None = None) -> FamilyIdentity:
    """Compare the k=4 Nahm sum at the j-th family vector with eta^-1 sum_n q^(3(n+b)^2/4)."""
    B = family_B(j, variant)
    shift = Fraction(0) if variant == "even" else Fraction(1, 3)
    rhs = theta_lattice(Fraction(3, 4), shift, order) * dedekind_eta(order).invert()
    A = coset_family_matrix(4)
    precision = precision or PrecisionConfig()
    sol = cached_solution(A, precision)
    _, C = asymptotic_C(A, B, sol, precision)
    if C is None:
        return FamilyIdentity(B, None, None, rhs, False)
    lhs = nahm_sum(NahmDatum(A, B, C), order)
    return FamilyIdentity(B, C, lhs, rhs, lhs.offset == rhs.offset and lhs.agrees_with(rhs))

