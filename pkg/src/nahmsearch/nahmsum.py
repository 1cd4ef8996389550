"""Exact evaluation of the Nahm sum f_{A,B,C} as a truncated series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .liealg import MatrixQ
from .qseries import PuiseuxSeries, as_fraction, fraction_str

DEFAULT_ORDER = 20


class NotPositiveDefiniteError(ValueError):
    pass


@dataclass(frozen=True)
class NahmDatum:
    A: MatrixQ
    B: tuple[Fraction, ...]
    C: Fraction

    def __post_init__(self):
        object.__setattr__(self, "B", tuple(as_fraction(b) for b in self.B))
        object.__setattr__(self, "C", as_fraction(self.C))
        if not self.A.is_square or self.A.rows != len(self.B):
            raise ValueError("A must be r x r and B of length r")
        if not self.A.is_symmetric():
            raise ValueError("A must be symmetric")
        if not self.A.is_positive_definite():
            raise NotPositiveDefiniteError("A must be positive definite")

    @property
    def rank(self) -> int:
        return self.A.rows

    def exponent(self, n: Sequence[int]) -> Fraction:
        """``n^t A n / 2 + B^t n`` (without C)."""
        return self.A.quadratic_form(n) / 2 + sum((b * k for b, k in zip(self.B, n)), Fraction(0))

    def with_C(self, C) -> NahmDatum:
        return NahmDatum(self.A, self.B, as_fraction(C))

    def to_json(self) -> dict:
        return {"A": self.A.to_json(), "B": [fraction_str(b) for b in self.B], "C": fraction_str(self.C)}

    @classmethod
    def from_json(cls, data) -> NahmDatum:
        return cls(MatrixQ.from_json(data["A"]), tuple(as_fraction(b) for b in data["B"]), as_fraction(data["C"]))


class _IntegerForm:
    """``D * (n^t A n / 2 + B^t n)`` evaluated in exact integers."""

    def __init__(self, A: MatrixQ, B: Sequence[Fraction]):
        dens = [(a / 2).denominator for row in A.entries for a in row] + [b.denominator for b in B]
        D = 1
        for d in dens:
            D = D * d // math.gcd(D, d)
        self.D = D
        self.quad = [[int(a * D / 2) for a in row] for row in A.entries]
        self.lin = [int(b * D) for b in B]

    def __call__(self, n: Sequence[int]) -> int:
        r = len(n)
        total = 0
        for i in range(r):
            if n[i]:
                row = self.quad[i]
                total += n[i] * (sum(row[j] * n[j] for j in range(r)) + self.lin[i])
        return total


def _ellipsoid_points(A: np.ndarray, B: np.ndarray, ceiling: float) -> Iterator[tuple[int, ...]]:
    """Nonnegative integer points with ``n.A.n/2 + B.n <= ceiling`` (plus a float margin).

    Fincke-Pohst walk over the ellipsoid ``(n-c)^t A (n-c) <= rho`` with
    ``c = -A^-1 B``; callers must re-test every point exactly.
    """
    r = len(B)
    centre = -np.linalg.solve(A, B)
    rho = 2.0 * ceiling + float(centre @ A @ centre)
    slack = 1e-7 * (1.0 + abs(rho))
    rho += slack
    if rho < 0:
        return
    R = np.linalg.cholesky(A).T  # A = R^t R, R upper triangular
    n = [0] * r

    def walk(i: int, used: float) -> Iterator[tuple[int, ...]]:
        partial = sum(R[i, j] * (n[j] - centre[j]) for j in range(i + 1, r))
        room = rho - used
        if room < 0:
            return
        half = math.sqrt(room) / R[i, i]
        mid = centre[i] - partial / R[i, i]
        lo = max(0, math.ceil(mid - half - 1e-9))
        hi = math.floor(mid + half + 1e-9)
        for v in range(lo, hi + 1):
            n[i] = v
            t = R[i, i] * (v - centre[i]) + partial
            if i == 0:
                yield tuple(n)
            else:
                yield from walk(i - 1, used + t * t)
        n[i] = 0

    yield from walk(r - 1, 0.0)


@lru_cache(maxsize=4096)
def _inverse_pochhammer(n: int, length: int) -> tuple[int, ...]:
    """Coefficients of ``1/(q)_n``: partitions into parts of size at most n."""
    p = [0] * length
    if length:
        p[0] = 1
    for part in range(1, n + 1):
        for i in range(part, length):
            p[i] += p[i - part]
    return tuple(p)


@lru_cache(maxsize=65536)
def _denominator_product(ns: tuple[int, ...], length: int) -> tuple[int, ...]:
    """Coefficients of ``prod_i 1/(q)_{n_i}`` up to ``q^(length-1)`` (ns sorted)."""
    if not ns:
        return (1,) + (0,) * (length - 1)
    head = np.array(_inverse_pochhammer(ns[-1], length), dtype=object)
    rest = np.array(_denominator_product(ns[:-1], length), dtype=object)
    return tuple(np.convolve(head, rest)[:length])


def lattice_terms(datum: NahmDatum, order: int) -> tuple[Fraction, list[tuple[tuple[int, ...], Fraction]]]:
    """All ``n >= 0`` whose exponent is within ``order`` of the minimal one.

    Returns ``(min exponent, [(n, exponent), ...])`` with exponents excluding C.
    """
    A = np.array(datum.A.to_floats())
    B = np.array([float(b) for b in datum.B])
    form = _IntegerForm(datum.A, datum.B)
    # Minimum over the orthant: every minimiser has exponent <= 0 = f(0).
    low = min((form(n) for n in _ellipsoid_points(A, B, 0.0)), default=0)
    low = min(low, 0)
    qmin = Fraction(low, form.D)
    ceiling_int = low + order * form.D
    ceiling = float(Fraction(ceiling_int, form.D))
    points = []
    for n in _ellipsoid_points(A, B, ceiling):
        v = form(n)
        if v <= ceiling_int:
            points.append((n, Fraction(v, form.D)))
    return qmin, points


def nahm_sum(datum: NahmDatum, order: int = DEFAULT_ORDER) -> PuiseuxSeries:
    """``f_{A,B,C}`` known through (leading exponent + ``order``)."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    qmin, points = lattice_terms(datum, order)
    ceiling = qmin + order
    acc: dict[Fraction, int] = {}
    for n, e in points:
        length = math.floor(ceiling - e) + 1
        coeffs = _denominator_product(tuple(sorted(k for k in n if k)), length)
        base = e + datum.C
        for t, c in enumerate(coeffs):
            if c:
                key = base + t
                acc[key] = acc.get(key, 0) + int(c)
    den = datum.C.denominator
    for _, e in points:
        den = den * e.denominator // math.gcd(den, e.denominator)
    return PuiseuxSeries.from_exponents(acc, ceiling + datum.C, den)

