"""Solution of x_i = prod_j (1 - x_j)^{A_ij} and the q -> 1 asymptotics of Nahm sums.

The two asymptotic expressions are polynomials in B of degree two (the value
of C) and three (the consistency residual).  :class:`Asymptotics` expands them
once per matrix into coefficient tensors over the Bernoulli-polynomial values
phi_1(b_i), phi_2(b_i), phi_3(b_i); evaluating a candidate B is then a few
contractions, which is what makes screening large grids cheap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import mpmath
import numpy as np
from mpmath import mp, mpf

from .liealg import MatrixQ, matrix_invert
from .qseries import rational_reconstruct

log = logging.getLogger(__name__)


class NoConvergenceError(RuntimeError):
    def __init__(self, message: str, residual):
        super().__init__(f"{message} (last residual {mpmath.nstr(residual, 5)})")
        self.residual = residual


@dataclass(frozen=True)
class PrecisionConfig:
    """Working precision and the tolerances tied to it.

    Unset tolerances follow the precision: solver ``10^-(digits-10)``, filter
    and reconstruction ``10^-(digits/2)``.  At 60 digits that is 1e-50 / 1e-30.
    """

    working_digits: int = 60
    solver_tol: str | None = None
    filter_tol: str | None = None
    recon_tol: str | None = None
    max_iterations: int = 100_000
    max_denominator: int = 10**4

    def __post_init__(self):
        if self.working_digits < 30:
            raise ValueError("working_digits must be at least 30")
        for name in ("solver_tol", "filter_tol", "recon_tol"):
            value = getattr(self, name)
            if value is not None and not mpf(value) > 0:
                raise ValueError(f"{name} must be positive")

    def _tol(self, value, digits: int) -> mpf:
        with mp.workdps(self.working_digits):
            return mpf(value) if value is not None else mpf(10) ** (-digits)

    @property
    def solver_tolerance(self) -> mpf:
        return self._tol(self.solver_tol, self.working_digits - 10)

    @property
    def filter_tolerance(self) -> mpf:
        return self._tol(self.filter_tol, self.working_digits // 2)

    @property
    def recon_tolerance(self) -> mpf:
        return self._tol(self.recon_tol, self.working_digits // 2)

    def doubled(self) -> PrecisionConfig:
        return PrecisionConfig(working_digits=2 * self.working_digits, max_iterations=self.max_iterations,
                               max_denominator=self.max_denominator)


@dataclass(eq=False)
class TBASolution:
    A: MatrixQ
    x: tuple
    F: mpmath.matrix
    residual: mpf
    digits: int
    iterations: int = 0
    _expansion: "Asymptotics | None" = field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return len(self.x)

    @cached_property
    def expansion(self) -> "Asymptotics":
        return Asymptotics(self)

    def report(self) -> dict:
        with mp.workdps(self.digits):
            return {
                "x": [mpmath.nstr(v, self.digits - 5) for v in self.x],
                "residual": mpmath.nstr(self.residual, 3),
                "ceff_dilog": mpmath.nstr(dilog_ceff(self.x, self.digits), self.digits - 10),
            }


def _to_mp_matrix(m: MatrixQ) -> mpmath.matrix:
    return mpmath.matrix([[mpf(v.numerator) / v.denominator for v in row] for row in m.entries])


def _residual(A, x) -> tuple[list, mpf]:
    r = len(x)
    logs = [mpmath.log(1 - v) for v in x]
    image = [mpmath.exp(mpmath.fsum(A[i, j] * logs[j] for j in range(r))) for i in range(r)]
    return image, max(abs(image[i] - x[i]) for i in range(r))


def _newton_polish(A, x, tol, max_steps: int = 60):
    """Newton on g_i(v) = log(1 - e^{v_i}) - sum_j A_ij v_j with v = log(1 - x)."""
    r = len(x)
    v = [mpmath.log(1 - xi) for xi in x]
    for _ in range(max_steps):
        ev = [mpmath.exp(t) for t in v]
        g = mpmath.matrix([mpmath.log(1 - ev[i]) - mpmath.fsum(A[i, j] * v[j] for j in range(r)) for i in range(r)])
        J = mpmath.matrix(r, r)
        for i in range(r):
            for j in range(r):
                J[i, j] = -A[i, j]
            J[i, i] -= ev[i] / (1 - ev[i])
        step = mpmath.lu_solve(J, g)
        v = [v[i] - step[i] for i in range(r)]
        if max(abs(s) for s in step) < tol * tol:
            break
    return [1 - mpmath.exp(t) for t in v]


def solve_x(A: MatrixQ, cfg: PrecisionConfig | None = None, polish: bool = True) -> TBASolution:
    """The solution of x = (1-x)^A inside the open unit cube.

    Damped fixed-point iteration from x = 1/2 with the damping halved
    whenever the residual grows.  With ``polish`` the iteration stops once the
    residual is below ``sqrt(tol)`` and Newton steps finish the job.
    """
    cfg = cfg or PrecisionConfig()
    if not A.is_positive_definite():
        raise ValueError("A must be symmetric positive definite")
    with mp.workdps(cfg.working_digits + 10):
        Am = _to_mp_matrix(A)
        tol = cfg.solver_tolerance
        switch = mpmath.sqrt(tol) if polish else tol
        r = A.rows
        x = [mpf(1) / 2] * r
        theta = mpf(1)
        image, res = _residual(Am, x)
        it = 0
        while res > switch:
            if it >= cfg.max_iterations:
                raise NoConvergenceError("fixed-point iteration did not converge", res)
            it += 1
            trial = [(1 - theta) * x[i] + theta * image[i] for i in range(r)]
            if any(not (0 < t < 1) for t in trial):
                theta /= 2
                continue
            new_image, new_res = _residual(Am, trial)
            if new_res > res:
                theta /= 2
            x, image, res = trial, new_image, new_res
        if polish and res > tol:
            x = _newton_polish(Am, x, tol)
            image, res = _residual(Am, x)
        if res > tol or any(not (0 < t < 1) for t in x):
            raise NoConvergenceError("solution does not meet tolerance", res)
        log.debug("solved x for rank %d in %d iterations, residual %s", r, it, mpmath.nstr(res, 3))
    with mp.workdps(cfg.working_digits):
        x = tuple(+v for v in x)
        F = f_matrix(A, x, cfg.working_digits)
        return TBASolution(A, x, F, +res, cfg.working_digits, it)


def f_matrix(A: MatrixQ, x: Sequence, digits: int = 60) -> mpmath.matrix:
    """F = (A^-1 + diag(x/(1-x)))^-1 at the given precision."""
    with mp.workdps(digits):
        inner = _to_mp_matrix(matrix_invert(A))
        for i, xi in enumerate(x):
            inner[i, i] += xi / (1 - xi)
        F = inner**-1
        # Symmetrise away the rounding of the inversion.
        r = len(x)
        for i in range(r):
            for j in range(i + 1, r):
                F[i, j] = F[j, i] = (F[i, j] + F[j, i]) / 2
        return F


def rogers_dilog(y) -> mpf:
    """L(y) = Li_2(y) + log(y) log(1-y) / 2."""
    return mpmath.polylog(2, y) + mpmath.log(y) * mpmath.log(1 - y) / 2


def dilog_ceff(x: Sequence, digits: int = 60) -> mpf:
    """(6/pi^2) sum_i L(x_i)."""
    with mp.workdps(digits):
        return 6 / mpmath.pi**2 * mpmath.fsum(rogers_dilog(mpf(v)) for v in x)


def bernoulli_values(B: Sequence[Fraction]) -> tuple[list, list, list]:
    """phi_1, phi_2, phi_3 at each b (current mp precision)."""
    bs = [mpf(b.numerator) / b.denominator for b in map(Fraction, B)]
    p1 = [b - mpf(1) / 2 for b in bs]
    p2 = [b * b - b + mpf(1) / 6 for b in bs]
    p3 = [b**3 - 3 * b * b / 2 + b / 2 for b in bs]
    return p1, p2, p3


def _obj(values) -> np.ndarray:
    return np.array(values, dtype=object)


class Asymptotics:
    """Coefficient tensors of the C formula and of the residual formula for one A.

    C(B)        = c0 + c2.p2 + c1.p1 + p1.C11.p1
    residual(B) = k0 + k3.p3 + k2.p2 + k1.p1 + p2.K21.p1 + p1.K11.p1 + K111[p1,p1,p1]

    with ``p_n = phi_n(b)`` componentwise.
    """

    def __init__(self, sol: TBASolution):
        self.digits = sol.digits
        with mp.workdps(sol.digits + 10):
            self._build(sol)
        self._floats = {
            name: np.array(getattr(self, name), dtype=float)
            for name in ("c0", "c1", "c2", "C11", "k0", "k1", "k2", "k3", "K21", "K11", "K111")
        }

    def _build(self, sol: TBASolution) -> None:
        r = sol.rank
        x = [mpf(v) for v in sol.x]
        F = _obj([[mpf(sol.F[i, j]) for j in range(r)] for i in range(r)])
        d = _obj([F[i, i] for i in range(r)])
        one = lambda v: 1 - v  # noqa: E731
        al = _obj([v / one(v) for v in x])
        be = _obj([v / one(v) ** 2 for v in x])
        ga = _obj([v * (1 + v) / one(v) ** 3 for v in x])
        de = _obj([(v**3 + 4 * v**2 + v) / one(v) ** 4 for v in x])
        ep = _obj([(v**4 + 11 * v**3 + 11 * v**2 + v) / one(v) ** 5 for v in x])
        F2, F3, F4 = F * F, F * F * F, F * F * F * F
        es = np.einsum
        q = lambda n, m: mpf(n) / m  # noqa: E731

        # C formula.
        self.c2 = al * q(1, 2)
        self.c1 = be * d * q(1, 2) - q(1, 2) * es("i,i,ij,j->j", be, d, F, al)
        self.C11 = -q(1, 2) * es("i,ij,j->ij", al, F, al)
        self.c0 = (
            q(1, 8) * es("i,i,i->", ga, d, d)
            - q(1, 12) * es("i,ij,j->", be, F3, be)
            - q(1, 8) * es("i,i,ij,j,j->", be, d, F, d, be)
        )

        # Residual formula: single sums.
        k3 = -be * q(1, 6)
        k2 = -q(1, 4) * d * ga
        k1 = -q(1, 8) * d * d * de
        k0 = -q(1, 48) * es("i,i,i,i->", d, d, d, ep)
        K21 = np.zeros((r, r), dtype=object) * mpf(0)
        K11 = np.zeros((r, r), dtype=object) * mpf(0)
        # Double sums (K21[a, b] multiplies p2_a p1_b).
        K21 = K21 + q(1, 4) * es("ij,i,j->ji", F, al, be)
        K21 = K21 + q(1, 4) * es("ij,i,j->ij", F, be, al)
        K11 = K11 + q(1, 2) * es("ij,j,i,j->ij", F, d, al, ga)
        k2 = k2 + q(1, 4) * es("ij,j,i,j->i", F, d, be, be)
        k1 = k1 + q(1, 8) * es("ij,j,j,i,j->i", F, d, d, al, de)
        K11 = K11 + q(1, 4) * es("ij,i,j->ij", F2, be, be)
        k1 = k1 + q(1, 4) * es("ij,j,i,j->i", F2, d, be, ga)
        k1 = k1 + q(1, 8) * es("i,ij,j,i,j->j", d, F, d, be, ga)
        k1 = k1 + q(1, 8) * es("i,ij,j,i,j->i", d, F, d, ga, be)
        k1 = k1 + q(1, 12) * es("ij,i,j->j", F3, be, ga)
        k1 = k1 + q(1, 12) * es("ij,i,j->i", F3, ga, be)
        k0 = k0 + q(1, 16) * es("i,ij,j,j,i,j->", d, F, d, d, be, de)
        k0 = k0 + q(1, 12) * es("ij,j,i,j->", F3, d, be, de)
        k0 = k0 + q(1, 48) * es("ij,i,j->", F4, ga, ga)
        k0 = k0 + q(1, 16) * es("i,ij,j,i,j->", d, F2, d, ga, ga)
        # Triple sums.
        K111 = -q(1, 2) * es("ij,jk,i,j,k->ijk", F, F, al, be, al)
        K11 = K11 - q(1, 4) * es("ij,j,jk,i,j,k->ik", F, d, F, al, ga, al)
        k1 = k1 - q(1, 4) * es("i,ij,jk,i,j,k->k", d, F, F2, be, be, be)
        k1 = k1 - q(1, 8) * es("i,ij,jk,k,i,j,k->j", d, F, F, d, be, be, be)
        k1 = k1 - q(1, 4) * es("ij,jk,ik,i,j,k->j", F, F, F2, be, be, be)
        k0 = k0 - q(1, 8) * es("i,ij,jk,k,i,j,k->", d, F, F2, d, be, be, ga)
        k0 = k0 - q(1, 16) * es("i,ij,j,jk,k,i,j,k->", d, F, d, F, d, be, ga, be)
        k0 = k0 - q(1, 12) * es("i,ij,jk,i,j,k->", d, F, F3, be, ga, be)
        k0 = k0 - q(1, 8) * es("ij,jk,ik,i,j,k->", F2, F2, F, be, ga, be)
        k0 = k0 - q(1, 8) * es("ij,j,jk,ik,i,j,k->", F, d, F, F2, be, ga, be)
        K11 = K11 - q(1, 2) * es("ij,jk,k,i,j,k->ij", F, F, d, al, be, be)
        k1 = k1 - q(1, 4) * es("ij,jk,k,i,j,k->i", F, F2, d, al, be, ga)
        K11 = K11 - q(1, 2) * es("ij,jk,i,j,k->ik", F, F2, al, be, be)
        k1 = k1 - q(1, 4) * es("ij,j,jk,k,i,j,k->i", F, d, F, d, al, ga, be)
        k1 = k1 - q(1, 6) * es("ij,jk,i,j,k->i", F, F3, al, ga, be)
        # Quadruple sums.
        K11 = K11 + q(1, 4) * es("ij,jk,kl,i,j,k,l->il", F, F2, F, al, be, be, al)
        k0 = k0 + q(1, 16) * es("ij,ik,jl,kl,i,j,k,l->", F, F2, F2, F, be, be, be, be)
        k0 = k0 + q(1, 24) * es("ij,ik,kl,jl,il,jk,i,j,k,l->", F, F, F, F, F, F, be, be, be, be)
        k0 = k0 + q(1, 16) * es("i,ij,jk,kl,l,i,j,k,l->", d, F, F2, F, d, be, be, be, be)
        K111 = K111 + q(1, 6) * es("ij,jk,jl,i,j,k,l->ikl", F, F, F, al, be, al, al)
        k0 = k0 + q(1, 48) * es("i,ij,jk,jl,k,l,i,j,k,l->", d, F, F, F, d, d, be, be, be, be)
        k0 = k0 + q(1, 8) * es("i,ij,jk,jl,kl,i,j,k,l->", d, F, F, F, F2, be, be, be, be)
        k1 = k1 + q(1, 8) * es("ij,jk,jl,k,l,i,j,k,l->i", F, F, F, d, d, al, be, be, be)
        k1 = k1 + q(1, 4) * es("ij,jk,jl,kl,i,j,k,l->i", F, F, F, F2, al, be, be, be)
        k1 = k1 + q(1, 4) * es("ij,jk,kl,l,i,j,k,l->i", F, F2, F, d, al, be, be, be)
        K11 = K11 + q(1, 4) * es("i,ij,jk,jl,i,j,k,l->kl", d, F, F, F, be, be, al, al)

        self.k0, self.k1, self.k2, self.k3 = k0, k1, k2, k3
        self.K21, self.K11, self.K111 = K21, K11, K111

    # -- exact-precision evaluation --------------------------------------------

    def c_value(self, B: Sequence[Fraction]) -> mpf:
        with mp.workdps(self.digits + 10):
            p1, p2, _ = (_obj(v) for v in bernoulli_values(B))
            val = self.c0 + np.dot(self.c2, p2) + np.dot(self.c1, p1) + p1 @ self.C11 @ p1
            return +val

    def residual(self, B: Sequence[Fraction]) -> mpf:
        with mp.workdps(self.digits + 10):
            p1, p2, p3 = (_obj(v) for v in bernoulli_values(B))
            val = (
                self.k0
                + np.dot(self.k3, p3)
                + np.dot(self.k2, p2)
                + np.dot(self.k1, p1)
                + p2 @ self.K21 @ p1
                + p1 @ self.K11 @ p1
                + np.einsum("ijk,i,j,k->", self.K111, p1, p1, p1)
            )
            return +val

    # -- float prefilter ---------------------------------------------------------

    def residual_batch(self, B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Float64 residuals for many candidates at once, with a magnitude scale.

        ``B`` has shape (m, r).  The scale is the same polynomial evaluated with
        absolute values everywhere, which bounds the rounding error.
        """
        f = self._floats
        p1 = B - 0.5
        p2 = B * B - B + 1.0 / 6.0
        p3 = B**3 - 1.5 * B * B + 0.5 * B

        def poly(t, a1, a2, a3):
            return (
                t["k0"]
                + a3 @ t["k3"]
                + a2 @ t["k2"]
                + a1 @ t["k1"]
                + np.einsum("ni,ij,nj->n", a2, t["K21"], a1)
                + np.einsum("ni,ij,nj->n", a1, t["K11"], a1)
                + np.einsum("ijk,ni,nj,nk->n", t["K111"], a1, a1, a1, optimize=True)
            )

        value = poly(f, p1, p2, p3)
        absf = {k: np.abs(v) for k, v in f.items()}
        scale = poly(absf, np.abs(p1), np.abs(p2), np.abs(p3))
        return value, scale


def asymptotic_C(A: MatrixQ, B: Sequence[Fraction], sol: TBASolution, cfg: PrecisionConfig | None = None):
    """(value of C from the asymptotics, its rational reconstruction or None)."""
    cfg = cfg or PrecisionConfig(working_digits=sol.digits)
    _check_solution(A, B, sol)
    value = sol.expansion.c_value(B)
    return value, rational_reconstruct(value, cfg.max_denominator, cfg.recon_tolerance)


def asymptotic_residual(A: MatrixQ, B: Sequence[Fraction], sol: TBASolution, cfg: PrecisionConfig | None = None) -> mpf:
    """Value of the second asymptotic identity; vanishes for modular candidates."""
    _check_solution(A, B, sol)
    return sol.expansion.residual(B)


def _check_solution(A: MatrixQ, B, sol: TBASolution) -> None:
    if sol.A != A:
        raise ValueError("TBA solution belongs to a different matrix")
    if len(B) != sol.rank:
        raise ValueError("B has the wrong length")
