"""Character series: (p,2) minimal models, affine su(2)_k, u(1)_k and su(2)_k/u(1) cosets.

All series are exact and carry their known range: a character requested at
``order`` is known through its leading exponent plus ``order``.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Union

from .qseries import PuiseuxSeries, SeriesError, TwoVarSeries, _lcm, dedekind_eta, fraction_str


class LabelError(ValueError):
    pass


class DivisionNotExactError(ArithmeticError):
    """Laurent division by z^(1/2) - z^(-1/2) left a remainder."""


# -- labels ---------------------------------------------------------------------


def _normalise_m(m: int, k: int) -> int:
    """Representative of m mod 2k in (-k, k]."""
    m = m % (2 * k)
    return m - 2 * k if m > k else m


@dataclass(frozen=True, order=True)
class MinimalLabel:
    p: int
    s: int

    def __post_init__(self):
        if self.p < 5 or self.p % 2 == 0:
            raise LabelError(f"p must be odd and at least 5, got {self.p}")
        if not 1 <= self.s <= (self.p - 1) // 2:
            raise LabelError(f"s must lie in 1..{(self.p - 1) // 2}, got {self.s}")

    def canonical(self) -> MinimalLabel:
        return self

    def __str__(self) -> str:
        return f"minimal:p={self.p},s={self.s}"


@dataclass(frozen=True, order=True)
class AffineLabel:
    k: int
    l: int

    def __post_init__(self):
        if self.k < 1:
            raise LabelError("level must be at least 1")
        if not 0 <= self.l <= self.k:
            raise LabelError(f"l must lie in 0..{self.k}, got {self.l}")

    def canonical(self) -> AffineLabel:
        return self

    def __str__(self) -> str:
        return f"affine:k={self.k},l={self.l}"


@dataclass(frozen=True, order=True)
class U1Label:
    k: int
    m: int

    def __post_init__(self):
        if self.k < 1:
            raise LabelError("level must be at least 1")
        if not -self.k < self.m <= self.k:
            raise LabelError(f"m must lie in {-self.k + 1}..{self.k}, got {self.m}")

    def canonical(self) -> U1Label:
        return self

    def __str__(self) -> str:
        return f"u1:k={self.k},m={self.m}"


@dataclass(frozen=True, order=True)
class CosetLabel:
    k: int
    l: int
    m: int

    def __post_init__(self):
        AffineLabel(self.k, self.l)
        U1Label(self.k, self.m)
        if (self.l + self.m) % 2:
            raise LabelError(f"l + m must be even, got l={self.l}, m={self.m}")

    def field_identified(self) -> CosetLabel:
        """(l, m) -> (k - l, m + k), m taken mod 2k."""
        return CosetLabel(self.k, self.k - self.l, _normalise_m(self.m + self.k, self.k))

    def canonical(self) -> CosetLabel:
        """Smallest l, then |m|, among the field-identified and conjugate labels."""
        other = self.field_identified()
        best = min((abs(x.l), abs(x.m)) for x in (self, other))
        return CosetLabel(self.k, best[0], best[1])

    def __str__(self) -> str:
        return f"coset:k={self.k},l={self.l},m={self.m}"


CharacterLabel = Union[MinimalLabel, AffineLabel, U1Label, CosetLabel]

_LABEL_RE = re.compile(r"^(minimal|affine|u1|coset):(.*)$")


def parse_label(text: str) -> CharacterLabel:
    """Inverse of ``str(label)``, e.g. ``"coset:k=4,l=2,m=0"``."""
    match = _LABEL_RE.match(text.strip())
    if not match:
        raise LabelError(f"unrecognised label {text!r}")
    kind, body = match.groups()
    try:
        fields = dict(part.split("=") for part in body.split(","))
        values = {key.strip(): int(v) for key, v in fields.items()}
    except ValueError as exc:
        raise LabelError(f"malformed label {text!r}") from exc
    cls = {"minimal": MinimalLabel, "affine": AffineLabel, "u1": U1Label, "coset": CosetLabel}[kind]
    try:
        return cls(**values)
    except TypeError as exc:
        raise LabelError(f"wrong fields for {kind} label: {text!r}") from exc


@dataclass(frozen=True)
class TargetCombination:
    terms: tuple[tuple[CharacterLabel, int], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("empty combination")
        if any(mult < 1 for _, mult in self.terms):
            raise ValueError("multiplicities must be positive")
        kinds = {(type(lab), getattr(lab, "k", getattr(lab, "p", None))) for lab, _ in self.terms}
        if len(kinds) != 1:
            raise ValueError("all labels of a combination must belong to one model")

    @classmethod
    def from_counts(cls, counts: dict) -> TargetCombination:
        return cls(tuple(sorted(counts.items())))

    @property
    def name(self) -> str:
        return " + ".join(str(lab) if mult == 1 else f"{mult}*{lab}" for lab, mult in self.terms)

    def __str__(self) -> str:
        return self.name

    @property
    def divisor(self) -> int:
        return reduce(math.gcd, (mult for _, mult in self.terms))

    def divided(self, d: int) -> TargetCombination:
        return TargetCombination(tuple((lab, mult // d) for lab, mult in self.terms))


# -- minimal models ---------------------------------------------------------------


@lru_cache(maxsize=256)
def minimal_character(p: int, s: int, order: int = 20) -> PuiseuxSeries:
    """chi_{1,s} of the (p,2) minimal model as an alternating theta sum over eta."""
    MinimalLabel(p, s)
    if order < 0:
        raise ValueError("order must be nonnegative")

    def exponent(j: int, sign: int) -> Fraction:
        return Fraction((4 * p * j + p + sign * 2 * s) ** 2, 8 * p)

    lead = exponent(0, -1)
    ceiling = lead + order
    terms: dict[Fraction, int] = {}
    j = 0
    while True:
        hit = False
        for jj in {j, -j}:
            for sign, c in ((-1, 1), (1, -1)):
                e = exponent(jj, sign)
                if e <= ceiling:
                    terms[e] = terms.get(e, 0) + c
                    hit = True
        if not hit:
            break
        j += 1
    numerator = PuiseuxSeries.from_exponents(terms, ceiling)
    eta_inv = dedekind_eta(order).invert()
    return (numerator * eta_inv).truncate(lead - Fraction(1, 24) + order)


def minimal_targets(n: int) -> list[TargetCombination]:
    """The n+1 single characters of the (2n+3, 2) model."""
    if n < 1:
        raise ValueError("n must be at least 1")
    p = 2 * n + 3
    return [TargetCombination(((MinimalLabel(p, s), 1),)) for s in range(1, n + 2)]


# -- affine su(2)_k ---------------------------------------------------------------

_Laurent = dict  # z2 -> int


def _theta_difference(m: int, level: int, order: int) -> list[_Laurent]:
    """q-coefficients 0..order of sum_n q^(level n^2 + m n) z^(level n + m/2) minus the m -> -m term.

    This is the theta difference with its leading q^(m^2 / 4 level) removed.
    """
    out: list[_Laurent] = [dict() for _ in range(order + 1)]
    bound = math.isqrt(order // level + 1) + 2
    for n in range(-bound - m, bound + m + 1):
        for sign, c in ((1, 1), (-1, -1)):
            e = level * n * n + sign * m * n
            if 0 <= e <= order:
                z2 = 2 * level * n + sign * m
                slot = out[e]
                slot[z2] = slot.get(z2, 0) + c
    return [{z: c for z, c in t.items() if c} for t in out]


def _laurent_mul(a: _Laurent, b: _Laurent) -> _Laurent:
    out: _Laurent = {}
    for z, x in a.items():
        for w, y in b.items():
            out[z + w] = out.get(z + w, 0) + x * y
    return out


def _divide_by_weyl_denominator(p: _Laurent) -> _Laurent:
    """Exact quotient of p by z^(1/2) - z^(-1/2) (exponents in half units)."""
    if not p:
        return {}
    top, bottom = max(p), min(p)
    d: _Laurent = {}
    for e in range(top, bottom, -1):
        val = p.get(e, 0) + d.get(e + 1, 0)
        if val:
            d[e - 1] = val
    if p.get(bottom, 0) != -d.get(bottom + 1, 0):
        raise DivisionNotExactError("numerator not divisible by the Weyl denominator")
    return d


@lru_cache(maxsize=256)
def affine_su2_character(k: int, l: int, order: int = 20) -> TwoVarSeries:
    """Weyl-Kac quotient for su(2)_k, solved order by order in q."""
    AffineLabel(k, l)
    if order < 0:
        raise ValueError("order must be nonnegative")
    num = _theta_difference(l + 1, k + 2, order)
    den = _theta_difference(1, 2, order)
    if den[0] != {1: 1, -1: -1}:
        raise DivisionNotExactError("unexpected leading Weyl denominator")
    chi: list[_Laurent] = []
    for t in range(order + 1):
        rest = dict(num[t])
        for s in range(1, t + 1):
            if den[s] and chi[t - s]:
                for z, c in _laurent_mul(den[s], chi[t - s]).items():
                    rest[z] = rest.get(z, 0) - c
        chi.append(_divide_by_weyl_denominator({z: c for z, c in rest.items() if c}))
    h = Fraction((l + 1) ** 2, 4 * (k + 2)) - Fraction(1, 8)
    N = h.denominator
    base = h.numerator
    terms = {(base + N * t, z): c for t, poly in enumerate(chi) for z, c in poly.items()}
    return TwoVarSeries(N, terms, base + N * order)


@lru_cache(maxsize=256)
def u1_character(k: int, m: int, order: int = 20) -> TwoVarSeries:
    """Theta_{m,k}(q, z) / eta(q)."""
    U1Label(k, m)
    lead = Fraction(m * m, 4 * k)
    ceiling = lead + order
    terms: dict[tuple[Fraction, int], int] = {}
    j = 0
    while True:
        hit = False
        for jj in {j, -j}:
            w = m + 2 * k * jj
            e = Fraction(w * w, 4 * k)
            if e <= ceiling:
                terms[(e, w)] = 1
                hit = True
        if not hit:
            break
        j += 1
    N = _lcm(4 * k, 24)
    theta = TwoVarSeries(N, {(int(e * N), w): c for (e, w), c in terms.items()}, int(ceiling * N))
    return (theta * dedekind_eta(order).invert()).truncate(lead - Fraction(1, 24) + order)


@lru_cache(maxsize=1024)
def coset_character(k: int, l: int, m: int, order: int = 20) -> PuiseuxSeries:
    """eta(q) q^(-m^2/4k) times the z^(m/2) coefficient of the affine character."""
    CosetLabel(k, l, m)
    h = Fraction((l + 1) ** 2, 4 * (k + 2)) - Fraction(1, 8)
    need = order
    while True:
        part = affine_su2_character(k, l, need).z_coefficient(m)
        if part.valuation_index is None:
            need += max(1, need)
            continue
        lag = part.offset - h
        if need - lag >= order:
            break
        need = order + math.ceil(lag)
    part = part.shift(Fraction(-m * m, 4 * k))
    lead = part.offset + Fraction(1, 24)
    return (part * dedekind_eta(order + 1)).truncate(lead + order)


def character_series(label: CharacterLabel, order: int = 20) -> PuiseuxSeries:
    if isinstance(label, MinimalLabel):
        return minimal_character(label.p, label.s, order)
    if isinstance(label, CosetLabel):
        return coset_character(label.k, label.l, label.m, order)
    raise LabelError(f"{label} has no pure q-series")


def combination_series(t: TargetCombination, order: int = 20) -> PuiseuxSeries:
    total = None
    for label, mult in t.terms:
        term = character_series(label, order).scale(mult)
        total = term if total is None else total + term
    return total


# -- predicted targets --------------------------------------------------------------


def coset_sum(k: int, l: int) -> TargetCombination:
    """sum over m = l mod 2 in (-k, k] of chi_{l;m}, with labels made canonical."""
    counts = Counter(CosetLabel(k, l, m).canonical() for m in range(-k + 1, k + 1) if (m - l) % 2 == 0)
    return TargetCombination.from_counts(counts)


def predicted_combinations(k: int) -> list[TargetCombination]:
    """Coset sums for l = 0..floor(k/2) (even k) or 0..(k+1)/2 (odd k).

    Repeated combinations are listed once.  For even k each combination with
    more than one distinct character and a common multiplicity divisor is
    followed by its reduced form.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    top = k // 2 if k % 2 == 0 else (k + 1) // 2
    out: list[TargetCombination] = []
    for l in range(0, min(top, k) + 1):
        combo = coset_sum(k, l)
        if combo not in out:
            out.append(combo)
    if k % 2 == 0:
        for combo in list(out):
            d = combo.divisor
            if d > 1 and len(combo.terms) > 1:
                reduced = combo.divided(d)
                if reduced not in out:
                    out.append(reduced)
    return out


def label_series(label: CharacterLabel, order: int = 20) -> PuiseuxSeries | TwoVarSeries:
    """Pure q-series for minimal and coset labels, (q, z) series for affine and u(1) labels."""
    if isinstance(label, AffineLabel):
        return affine_su2_character(label.k, label.l, order)
    if isinstance(label, U1Label):
        return u1_character(label.k, label.m, order)
    return character_series(label, order)


def dump_label(label: CharacterLabel, order: int) -> dict:
    return {"label": str(label), "series": label_series(label, order).to_json()}

