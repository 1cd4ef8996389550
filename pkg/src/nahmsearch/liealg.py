"""Cartan matrices of the A and T (tadpole) families and exact rational matrices."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .qseries import as_fraction, fraction_str


class SingularMatrixError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DynkinSpec:
    family: str
    rank: int

    def __post_init__(self):
        if self.family not in ("A", "T"):
            raise ValueError(f"unsupported Dynkin family {self.family!r}")
        if self.rank < 1:
            raise ValueError("rank must be at least 1")

    @property
    def dual_coxeter(self) -> int:
        return self.rank + 1 if self.family == "A" else 2 * self.rank + 1

    def __str__(self) -> str:
        return f"{self.family}{self.rank}"


class MatrixQ:
    """Dense immutable matrix of Fractions."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Iterable[Iterable]):
        grid = tuple(tuple(as_fraction(v) if not isinstance(v, Fraction) else v for v in row) for row in entries)
        if not grid or not grid[0]:
            raise ValueError("matrix must be nonempty")
        if any(len(row) != len(grid[0]) for row in grid):
            raise ValueError("ragged matrix")
        self.entries = grid
        self.rows = len(grid)
        self.cols = len(grid[0])

    @classmethod
    def identity(cls, n: int) -> MatrixQ:
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def scalar(cls, c) -> MatrixQ:
        return cls([[c]])

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, MatrixQ):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self) -> str:
        body = ", ".join("(" + ", ".join(fraction_str(v) for v in row) + ")" for row in self.entries)
        return f"MatrixQ({body})"

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def transpose(self) -> MatrixQ:
        return MatrixQ(zip(*self.entries))

    def is_symmetric(self) -> bool:
        return self.is_square and self == self.transpose()

    def __neg__(self) -> MatrixQ:
        return MatrixQ([[-v for v in row] for row in self.entries])

    def __add__(self, other: MatrixQ) -> MatrixQ:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return MatrixQ([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def scale(self, c) -> MatrixQ:
        c = Fraction(c)
        return MatrixQ([[c * v for v in row] for row in self.entries])

    def __matmul__(self, other: MatrixQ) -> MatrixQ:
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        cols = list(zip(*other.entries))
        return MatrixQ([[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols] for row in self.entries])

    def apply(self, v: Sequence[Fraction]) -> tuple[Fraction, ...]:
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(sum((a * Fraction(b) for a, b in zip(row, v)), Fraction(0)) for row in self.entries)

    def quadratic_form(self, v: Sequence[Fraction]) -> Fraction:
        return sum((Fraction(a) * b for a, b in zip(v, self.apply(v))), Fraction(0))

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.entries)

    def columns(self) -> list[tuple[Fraction, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def to_floats(self) -> list[list[float]]:
        return [[float(v) for v in row] for row in self.entries]

    def determinant(self) -> Fraction:
        if not self.is_square:
            raise ValueError("determinant of a non-square matrix")
        m = [list(row) for row in self.entries]
        n = self.rows
        det = Fraction(1)
        for c in range(n):
            p = next((r for r in range(c, n) if m[r][c] != 0), None)
            if p is None:
                return Fraction(0)
            if p != c:
                m[c], m[p] = m[p], m[c]
                det = -det
            det *= m[c][c]
            for r in range(c + 1, n):
                f = m[r][c] / m[c][c]
                if f:
                    for k in range(c, n):
                        m[r][k] -= f * m[c][k]
        return det

    def leading_minors(self) -> list[Fraction]:
        return [MatrixQ([row[:k] for row in self.entries[:k]]).determinant() for k in range(1, self.rows + 1)]

    def is_positive_definite(self) -> bool:
        """Sylvester's criterion with exact minors."""
        return self.is_symmetric() and all(m > 0 for m in self.leading_minors())

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[fraction_str(v) for v in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data) -> MatrixQ:
        """Accepts the ``{"rows", "cols", "entries"}`` object or a bare nested list."""
        if isinstance(data, dict):
            m = cls(data["entries"])
            if (m.rows, m.cols) != (int(data["rows"]), int(data["cols"])):
                raise ValueError("declared shape does not match entries")
            return m
        return cls([[v if isinstance(v, str) else _exact_number(v) for v in row] for row in data])


def _exact_number(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError(f"matrix entries must be integers or 'p/q' strings, got {v!r}")
    return v


def matrix_invert(m: MatrixQ) -> MatrixQ:
    """Gauss-Jordan inverse over the rationals."""
    if not m.is_square:
        raise ValueError("only square matrices can be inverted")
    n = m.rows
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m.entries)]
    for c in range(n):
        p = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if p is None:
            raise SingularMatrixError("matrix is singular")
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [v / piv for v in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[c])]
    return MatrixQ([row[n:] for row in aug])


def kronecker(m: MatrixQ, n: MatrixQ) -> MatrixQ:
    rows = []
    for i in range(m.rows):
        for k in range(n.rows):
            rows.append([m[i, j] * n[k, l] for j in range(m.cols) for l in range(n.cols)])
    return MatrixQ(rows)


def cartan_matrix(spec: DynkinSpec) -> MatrixQ:
    r = spec.rank
    rows = [[2 if i == j else -1 if abs(i - j) == 1 else 0 for j in range(r)] for i in range(r)]
    if spec.family == "T":
        rows[r - 1][r - 1] = 1
    return MatrixQ(rows)


def nahm_matrix(x: DynkinSpec, y: DynkinSpec) -> MatrixQ:
    """``C(X) (x) C(Y)^-1``."""
    return kronecker(cartan_matrix(x), matrix_invert(cartan_matrix(y)))


def effective_central_charge(x: DynkinSpec, y: DynkinSpec) -> Fraction:
    hx, hy = x.dual_coxeter, y.dual_coxeter
    return Fraction(x.rank * y.rank * hx, hx + hy)


A1 = DynkinSpec("A", 1)


def minimal_family_matrix(n: int) -> MatrixQ:
    """Nahm matrix of the pair (A1, T_n), i.e. the (2n+3, 2) minimal model."""
    return nahm_matrix(A1, DynkinSpec("T", n))


def coset_family_matrix(k: int) -> MatrixQ:
    """Nahm matrix of the pair (A1, A_{k-1}), i.e. the su(2)_k/u(1) coset."""
    if k < 2:
        raise ValueError("coset family needs k >= 2")
    return nahm_matrix(A1, DynkinSpec("A", k - 1))
