"""Exact truncated q-series with fractional exponents.

A :class:`PuiseuxSeries` stores coefficients on the lattice ``(1/N)Z`` together
with a hard "known up to" exponent.  Anything above that exponent is unknown,
and asking for it raises :class:`TruncationError` instead of returning zero.
:class:`TwoVarSeries` adds a Laurent variable ``z`` with half-integer
exponents, which the affine characters need.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

import mpmath

Rational = Union[int, Fraction]


class SeriesError(ValueError):
    """Base class for series arithmetic failures."""


class LatticeError(SeriesError):
    """Offsets of two operands are not congruent on the common lattice."""


class TruncationError(SeriesError):
    """A coefficient beyond the known range was requested."""


class NonUnitError(SeriesError, ZeroDivisionError):
    """Attempt to invert a series without a nonzero leading coefficient."""


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions and strings like ``"-3/4"`` into a Fraction.

    Floats are rejected; every rational entering the library must be exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            n, d = int(num), int(den)
            if d == 0:
                raise ValueError(f"zero denominator in {value!r}")
            return Fraction(n, d)
        return Fraction(int(text))
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def fraction_str(x: Fraction) -> str:
    return str(Fraction(x))


def _lcm(*values: int) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


class PuiseuxSeries:
    """Truncated series ``sum c_i q^(i/N)`` with exact rational coefficients.

    ``prec`` is the lattice index of the last known exponent, or ``None`` for
    an exact (finite) series such as a polynomial.
    """

    __slots__ = ("den", "terms", "prec")

    def __init__(self, den: int, terms: Mapping[int, Rational], prec: int | None):
        if den < 1:
            raise ValueError("lattice denominator must be positive")
        clean = {}
        for i, c in terms.items():
            if prec is not None and i > prec:
                continue
            c = Fraction(c)
            if c:
                clean[int(i)] = c
        self.den = int(den)
        self.terms = clean
        self.prec = None if prec is None else int(prec)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_exponents(
        cls,
        terms: Mapping[Fraction, Rational],
        precision: Fraction | None,
        den: int | None = None,
    ) -> PuiseuxSeries:
        """Build from ``{exponent: coefficient}`` with an absolute precision."""
        denoms = [Fraction(e).denominator for e in terms]
        if precision is not None:
            denoms.append(Fraction(precision).denominator)
        n = _lcm(den or 1, *denoms)
        idx = {}
        for e, c in terms.items():
            i = int(Fraction(e) * n)
            idx[i] = idx.get(i, 0) + Fraction(c)
        prec = None if precision is None else int(Fraction(precision) * n)
        return cls(n, idx, prec)

    @classmethod
    def constant(cls, c: Rational = 1) -> PuiseuxSeries:
        return cls(1, {0: c}, None)

    @classmethod
    def monomial(cls, exponent: Rational, c: Rational = 1) -> PuiseuxSeries:
        return cls.from_exponents({Fraction(exponent): c}, None)

    @classmethod
    def from_coefficients(
        cls, coeffs: Iterable[Rational], offset: Rational = 0, den: int = 1, exact: bool = False
    ) -> PuiseuxSeries:
        """Dense constructor: ``coeffs[i]`` multiplies ``q^(offset + i/den)``."""
        offset = Fraction(offset)
        coeffs = list(coeffs)
        n = _lcm(den, offset.denominator)
        step = n // den
        start = int(offset * n)
        terms = {start + step * i: c for i, c in enumerate(coeffs)}
        prec = None if exact else start + step * (len(coeffs) - 1)
        return cls(n, terms, prec)

    # -- basic properties -------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.prec is None

    @property
    def valuation_index(self) -> int | None:
        return min(self.terms) if self.terms else None

    @property
    def offset(self) -> Fraction:
        """Exponent of the leading nonzero term (the known bound for zero series)."""
        v = self.valuation_index
        if v is None:
            return Fraction(self.prec or 0, self.den)
        return Fraction(v, self.den)

    @property
    def precision(self) -> Fraction | None:
        """Largest exponent whose coefficient is known; ``None`` if exact."""
        return None if self.prec is None else Fraction(self.prec, self.den)

    @property
    def order(self) -> int:
        """Number of lattice steps known past the offset."""
        v = self.valuation_index
        if self.prec is None:
            return 0 if v is None else max(self.terms) - v
        return self.prec - (self.prec if v is None else v)

    @property
    def coeffs(self) -> list[Fraction]:
        """Dense coefficient list from the offset through the known range."""
        v = self.valuation_index
        if v is None:
            return [Fraction(0)]
        return [self.terms.get(v + i, Fraction(0)) for i in range(self.order + 1)]

    def leading_coefficient(self) -> Fraction:
        v = self.valuation_index
        if v is None:
            raise NonUnitError("zero series has no leading coefficient")
        return self.terms[v]

    def coefficient(self, exponent: Rational) -> Fraction:
        e = Fraction(exponent)
        if self.prec is not None and e > self.precision:
            raise TruncationError(f"q^{e} is beyond the known range q^{self.precision}")
        scaled = e * self.den
        if scaled.denominator != 1:
            return Fraction(0)
        return self.terms.get(int(scaled), Fraction(0))

    def items(self) -> Iterator[tuple[Fraction, Fraction]]:
        for i in sorted(self.terms):
            yield Fraction(i, self.den), self.terms[i]

    def rescale(self, den: int) -> PuiseuxSeries:
        if den % self.den:
            raise LatticeError(f"cannot rescale lattice 1/{self.den} to 1/{den}")
        m = den // self.den
        prec = None if self.prec is None else self.prec * m
        return PuiseuxSeries(den, {i * m: c for i, c in self.terms.items()}, prec)

    def truncate(self, precision: Rational) -> PuiseuxSeries:
        """Forget everything above ``precision`` (absolute exponent)."""
        precision = Fraction(precision)
        n = _lcm(self.den, precision.denominator)
        s = self.rescale(n)
        p = int(precision * n)
        if s.prec is not None:
            p = min(p, s.prec)
        return PuiseuxSeries(n, s.terms, p)

    def shift(self, exponent: Rational) -> PuiseuxSeries:
        """Multiply by ``q^exponent``."""
        e = Fraction(exponent)
        n = _lcm(self.den, e.denominator)
        s = self.rescale(n)
        k = int(e * n)
        prec = None if s.prec is None else s.prec + k
        return PuiseuxSeries(n, {i + k: c for i, c in s.terms.items()}, prec)

    # -- arithmetic ------------------------------------------------------------

    def _aligned(self, other: PuiseuxSeries) -> tuple[PuiseuxSeries, PuiseuxSeries]:
        n = _lcm(self.den, other.den)
        return self.rescale(n), other.rescale(n)

    @staticmethod
    def _coerce(value) -> PuiseuxSeries:
        if isinstance(value, PuiseuxSeries):
            return value
        if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
            return PuiseuxSeries.constant(value)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._aligned(other)
        prec = _min_prec(a.prec, b.prec)
        terms = dict(a.terms)
        for i, c in b.terms.items():
            terms[i] = terms.get(i, 0) + c
        return PuiseuxSeries(a.den, terms, prec)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries(self.den, {i: -c for i, c in self.terms.items()}, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def scale(self, c: Rational) -> PuiseuxSeries:
        c = Fraction(c)
        return PuiseuxSeries(self.den, {i: v * c for i, v in self.terms.items()}, self.prec)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        a, b = self._aligned(other)
        prec = _product_prec(a, b)
        terms: dict[int, Fraction] = {}
        for i, x in a.terms.items():
            for j, y in b.terms.items():
                k = i + j
                if prec is not None and k > prec:
                    continue
                terms[k] = terms.get(k, 0) + x * y
        return PuiseuxSeries(a.den, terms, prec)

    __rmul__ = __mul__

    def invert(self, order: Rational | None = None) -> PuiseuxSeries:
        """Multiplicative inverse.

        For truncated input the relative order is inherited.  Exact input
        (a polynomial) needs ``order``: how far past the leading exponent the
        inverse should be known, in powers of q.
        """
        v = self.valuation_index
        if v is None:
            raise NonUnitError("cannot invert a series with zero leading coefficient")
        lead = self.terms[v]
        if self.prec is not None:
            steps = self.prec - v
        else:
            if order is None:
                raise ValueError("inverting an exact series requires an order")
            steps = math.floor(Fraction(order) * self.den)
        if order is not None:
            steps = min(steps, math.floor(Fraction(order) * self.den))
        tail = [(i - v, c / lead) for i, c in self.terms.items() if i != v and i - v <= steps]
        inv = [Fraction(0)] * (steps + 1)
        inv[0] = Fraction(1)
        for n in range(1, steps + 1):
            s = Fraction(0)
            for k, c in tail:
                if k <= n:
                    s += c * inv[n - k]
            inv[n] = -s
        return PuiseuxSeries(self.den, {i - v: c / lead for i, c in enumerate(inv)}, steps - v)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(1 / Fraction(other))
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        return self * other.invert()

    def __pow__(self, n: int) -> PuiseuxSeries:
        if n < 0:
            return self.invert() ** (-n)
        out = PuiseuxSeries.constant(1)
        for _ in range(n):
            out = out * self
        return out

    # -- comparison ----------------------------------------------------------

    def agrees_with(self, other) -> bool:
        """Exact equality on the overlap of the two known ranges."""
        other = self._coerce(other)
        if other is NotImplemented:
            raise TypeError("can only compare with a series or a rational")
        a, b = self._aligned(other)
        prec = _min_prec(a.prec, b.prec)
        keys = set(a.terms) | set(b.terms)
        for i in keys:
            if prec is not None and i > prec:
                continue
            if a.terms.get(i, 0) != b.terms.get(i, 0):
                return False
        return True

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.agrees_with(other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        shown = []
        for e, c in list(self.items())[:8]:
            shown.append(f"{c}*q^{e}")
        tail = " + ..." if len(self.terms) > 8 else ""
        big_o = "" if self.prec is None else f" + O(q^>{self.precision})"
        return f"PuiseuxSeries({' + '.join(shown) or '0'}{tail}{big_o})"

    def to_text(self) -> str:
        """One ``q^e: c`` line per nonzero known coefficient."""
        lines = [f"q^{e}: {c}" for e, c in self.items()]
        return "\n".join(lines) if lines else "0"

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        data = {
            "lattice_den": self.den,
            "offset": fraction_str(self.offset),
            "coeffs": [fraction_str(c) for c in self.coeffs],
            "order": self.order,
        }
        if self.prec is None:
            data["exact"] = True
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> PuiseuxSeries:
        den = int(data["lattice_den"])
        offset = as_fraction(data["offset"])
        if (offset * den).denominator != 1:
            raise LatticeError(f"offset {offset} is not on the lattice (1/{den})Z")
        coeffs = [as_fraction(c) for c in data["coeffs"]]
        order = int(data["order"])
        if len(coeffs) != order + 1:
            raise ValueError("coeffs must have order + 1 entries")
        return cls.from_coefficients(coeffs, offset, den, exact=bool(data.get("exact", False)))


def _min_prec(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _product_prec(a: PuiseuxSeries, b: PuiseuxSeries) -> int | None:
    # The unknown tail of one factor meets the lowest term of the other.
    if any(s.prec is None and not s.terms for s in (a, b)):
        return None
    bounds = []
    for x, y in ((a, b), (b, a)):
        if x.prec is not None:
            vy = y.valuation_index
            bounds.append(x.prec + (y.prec if vy is None else vy))
    return min(bounds) if bounds else None


# -- building blocks ----------------------------------------------------------


def pochhammer(n: int, order: int | None = None) -> PuiseuxSeries:
    """``(q)_n = prod_{j=1}^n (1 - q^j)`` as an exact polynomial.

    With ``order`` the result is truncated to powers ``<= order``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    limit = n * (n + 1) // 2 if order is None else min(order, n * (n + 1) // 2)
    poly = [0] * (limit + 1)
    poly[0] = 1
    for j in range(1, n + 1):
        for i in range(limit, j - 1, -1):
            poly[i] -= poly[i - j]
    s = PuiseuxSeries(1, dict(enumerate(poly)), None)
    return s if order is None else PuiseuxSeries(1, s.terms, order)


def dedekind_eta(order: int) -> PuiseuxSeries:
    """``q^(1/24) prod (1 - q^n)`` known through ``q^(1/24 + order)``.

    Uses Euler's pentagonal number theorem.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    coeffs = [0] * (order + 1)
    k = 0
    while True:
        hit = False
        for m in ((k, -k) if k else (0,)):
            e = m * (3 * m - 1) // 2
            if e <= order:
                coeffs[e] += -1 if m % 2 else 1
                hit = True
        if not hit and k > 0:
            break
        k += 1
    return PuiseuxSeries.from_coefficients(coeffs, Fraction(1, 24), 1).rescale(24)


def theta_lattice(a: Rational, b: Rational, order: Rational) -> PuiseuxSeries:
    """``sum_{j in Z} q^(a (j+b)^2)`` known through its leading exponent + ``order``."""
    a, b, order = Fraction(a), Fraction(b), Fraction(order)
    if a <= 0:
        raise ValueError("theta_lattice needs a > 0")
    centre = -b
    j0 = math.floor(centre)
    lead = min(a * (j + b) ** 2 for j in (j0, j0 + 1))
    ceiling = lead + order
    radius = math.isqrt(math.ceil(ceiling / a) if ceiling > 0 else 0) + 2
    terms: dict[Fraction, int] = {}
    for j in range(j0 - radius, j0 + radius + 2):
        e = a * (j + b) ** 2
        if e <= ceiling:
            terms[e] = terms.get(e, 0) + 1
    return PuiseuxSeries.from_exponents(terms, ceiling)


# -- rational reconstruction --------------------------------------------------


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    v = x if isinstance(x, mpmath.mpf) else mpmath.mpf(x)
    if not mpmath.isfinite(v):
        raise ValueError("cannot reconstruct a non-finite value")
    sign, man, exp, _ = v._mpf_
    man, exp = (-1) ** sign * int(man), int(exp)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2 ** (-exp))


def continued_fraction_convergents(x: Fraction) -> Iterator[Fraction]:
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    while True:
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def rational_reconstruct(x, max_denominator: int = 10**4, tol=Fraction(1, 10**30)) -> Fraction | None:
    """Recover ``p/q`` from a high-precision real, or ``None``.

    Walks the continued-fraction convergents in order of increasing
    denominator and returns the first within ``tol`` of ``x``.
    """
    value = _to_fraction(x)
    tol = _to_fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    for conv in continued_fraction_convergents(value):
        if conv.denominator > max_denominator:
            return None
        if abs(value - conv) <= tol:
            return conv
    return None


# -- two-variable series --------------------------------------------------------


class TwoVarSeries:
    """Series in ``q`` whose coefficients are Laurent polynomials in ``z``.

    Keys are ``(q_index, z2)`` meaning ``q^(q_index/den) z^(z2/2)``.
    """

    __slots__ = ("den", "terms", "prec")

    def __init__(self, den: int, terms: Mapping[tuple[int, int], Rational], prec: int | None):
        clean = {}
        for (i, z2), c in terms.items():
            if prec is not None and i > prec:
                continue
            c = Fraction(c)
            if c:
                clean[(int(i), int(z2))] = c
        self.den = int(den)
        self.terms = clean
        self.prec = None if prec is None else int(prec)

    @classmethod
    def from_puiseux(cls, s: PuiseuxSeries, z2: int = 0) -> TwoVarSeries:
        return cls(s.den, {(i, z2): c for i, c in s.terms.items()}, s.prec)

    @property
    def precision(self) -> Fraction | None:
        return None if self.prec is None else Fraction(self.prec, self.den)

    @property
    def valuation_index(self) -> int | None:
        return min(i for i, _ in self.terms) if self.terms else None

    @property
    def offset(self) -> Fraction:
        v = self.valuation_index
        return Fraction(self.prec or 0, self.den) if v is None else Fraction(v, self.den)

    def rescale(self, den: int) -> TwoVarSeries:
        if den % self.den:
            raise LatticeError(f"cannot rescale lattice 1/{self.den} to 1/{den}")
        m = den // self.den
        prec = None if self.prec is None else self.prec * m
        return TwoVarSeries(den, {(i * m, z): c for (i, z), c in self.terms.items()}, prec)

    def truncate(self, precision: Rational) -> TwoVarSeries:
        precision = Fraction(precision)
        n = _lcm(self.den, precision.denominator)
        s = self.rescale(n)
        p = int(precision * n)
        if s.prec is not None:
            p = min(p, s.prec)
        return TwoVarSeries(n, s.terms, p)

    def z_coefficient(self, z2: int) -> PuiseuxSeries:
        """The pure q-series multiplying ``z^(z2/2)``."""
        return PuiseuxSeries(self.den, {i: c for (i, z), c in self.terms.items() if z == z2}, self.prec)

    def leading_z_polynomial(self) -> dict[int, Fraction]:
        v = self.valuation_index
        return {} if v is None else {z: c for (i, z), c in self.terms.items() if i == v}

    def z_exponents(self) -> list[int]:
        """Distinct doubled z-exponents present, ascending."""
        return sorted({z for _, z in self.terms})

    def to_text(self) -> str:
        lines = []
        for z2 in self.z_exponents():
            lines += [f"z^{fraction_str(Fraction(z2, 2))} q^{e}: {c}" for e, c in self.z_coefficient(z2).items()]
        return "\n".join(lines) if lines else "0"

    def to_json(self) -> dict:
        return {
            "z_components": [
                {"z": fraction_str(Fraction(z2, 2)), "series": self.z_coefficient(z2).to_json()} for z2 in self.z_exponents()
            ]
        }

    def z_inverted(self) -> TwoVarSeries:
        return TwoVarSeries(self.den, {(i, -z): c for (i, z), c in self.terms.items()}, self.prec)

    def _as_two_var(self, other) -> TwoVarSeries:
        if isinstance(other, TwoVarSeries):
            return other
        if isinstance(other, PuiseuxSeries):
            return TwoVarSeries.from_puiseux(other)
        raise TypeError(f"cannot combine TwoVarSeries with {type(other).__name__}")

    def _aligned(self, other: TwoVarSeries):
        n = _lcm(self.den, other.den)
        return self.rescale(n), other.rescale(n)

    def __add__(self, other):
        a, b = self._aligned(self._as_two_var(other))
        terms = dict(a.terms)
        for k, c in b.terms.items():
            terms[k] = terms.get(k, 0) + c
        return TwoVarSeries(a.den, terms, _min_prec(a.prec, b.prec))

    __radd__ = __add__

    def __neg__(self):
        return TwoVarSeries(self.den, {k: -c for k, c in self.terms.items()}, self.prec)

    def __sub__(self, other):
        return self + (-self._as_two_var(other))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return TwoVarSeries(self.den, {k: c * other for k, c in self.terms.items()}, self.prec)
        a, b = self._aligned(self._as_two_var(other))
        bounds = []
        for x, y in ((a, b), (b, a)):
            if x.prec is not None:
                vy = y.valuation_index
                bounds.append(x.prec + (y.prec if vy is None else vy))
        prec = min(bounds) if bounds else None
        terms: dict[tuple[int, int], Fraction] = {}
        for (i, z), x in a.terms.items():
            for (j, w), y in b.terms.items():
                if prec is not None and i + j > prec:
                    continue
                key = (i + j, z + w)
                terms[key] = terms.get(key, 0) + x * y
        return TwoVarSeries(a.den, terms, prec)

    __rmul__ = __mul__

    def agrees_with(self, other) -> bool:
        a, b = self._aligned(self._as_two_var(other))
        prec = _min_prec(a.prec, b.prec)
        for k in set(a.terms) | set(b.terms):
            if prec is not None and k[0] > prec:
                continue
            if a.terms.get(k, 0) != b.terms.get(k, 0):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, (TwoVarSeries, PuiseuxSeries)):
            return NotImplemented
        return self.agrees_with(other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"TwoVarSeries(den={self.den}, terms={len(self.terms)}, precision={self.precision})"
