"""Deliberately naive reference implementations used to cross-check the package.

Nothing here shares code with the package beyond plain data types.
"""

from __future__ import annotations

from fractions import Fraction

from mpmath import mp, mpf


def poly_mul(a: list, b: list, length: int) -> list:
    out = [0] * length
    for i, x in enumerate(a[:length]):
        if x:
            for j, y in enumerate(b[: length - i]):
                out[i + j] += x * y
    return out


def euler_product(length: int) -> list[int]:
    """Coefficients of prod_{n>=1} (1 - q^n) by repeated multiplication."""
    out = [1] + [0] * (length - 1)
    for n in range(1, length):
        factor = [0] * length
        factor[0] = 1
        factor[n] = -1
        out = poly_mul(out, factor, length)
    return out


def partitions_with_parts_at_most(m: int, length: int) -> list[int]:
    """p(n | parts <= m) by brute recursion with memo."""
    memo: dict = {}

    def count(n: int, largest: int) -> int:
        if n == 0:
            return 1
        if largest == 0:
            return 0
        key = (n, largest)
        if key not in memo:
            memo[key] = sum(count(n - k * largest, largest - 1) for k in range(n // largest + 1))
        return memo[key]

    return [count(n, m) for n in range(length)]


def inverse_pochhammer_dense(n: int, length: int) -> list[int]:
    """1/(q)_n as a geometric-series product."""
    out = [1] + [0] * (length - 1)
    for j in range(1, n + 1):
        geo = [1 if i % j == 0 else 0 for i in range(length)]
        out = poly_mul(out, geo, length)
    return out


def rank1_nahm_sum(a: Fraction, b: Fraction, c: Fraction, order: int) -> dict[Fraction, int]:
    """{exponent: coefficient} of sum_k q^(a k^2/2 + b k + c)/(q)_k through lead + order."""
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    exps = []
    k = 0
    while True:
        e = a * k * k / 2 + b * k
        if k > 0 and e > order + abs(b) * 4 and e > exps[-1]:
            break
        exps.append(e)
        k += 1
    lead = min(exps)
    top = lead + order
    out: dict[Fraction, int] = {}
    for k, e in enumerate(exps):
        if e > top:
            continue
        length = int(top - e) + 1
        for i, coeff in enumerate(inverse_pochhammer_dense(k, length)):
            if coeff:
                key = e + i + c
                out[key] = out.get(key, 0) + coeff
    return {e: v for e, v in out.items() if v}


def theta_terms(a: Fraction, b: Fraction, top: Fraction, radius: int = 60) -> dict[Fraction, int]:
    out: dict[Fraction, int] = {}
    for j in range(-radius, radius + 1):
        e = a * (j + b) ** 2
        if e <= top:
            out[e] = out.get(e, 0) + 1
    return out


def asymptotics_by_loops(x, F, B):
    """(C, residual) by literal index loops over both asymptotic identities."""
    r = len(x)
    R = range(r)
    al = [v / (1 - v) for v in x]
    be = [v / (1 - v) ** 2 for v in x]
    ga = [v * (1 + v) / (1 - v) ** 3 for v in x]
    de = [(v**3 + 4 * v**2 + v) / (1 - v) ** 4 for v in x]
    ep = [(v**4 + 11 * v**3 + 11 * v**2 + v) / (1 - v) ** 5 for v in x]
    b = [mpf(t.numerator) / t.denominator for t in B]
    p1 = [t - mpf(1) / 2 for t in b]
    p2 = [t * t - t + mpf(1) / 6 for t in b]
    p3 = [t**3 - mpf(3) / 2 * t * t + t / 2 for t in b]

    C = mpf(0)
    for i in R:
        C += p2[i] / 2 * al[i] + p1[i] / 2 * be[i] * F[i][i] + mpf(1) / 8 * ga[i] * F[i][i] ** 2
    for i in R:
        for j in R:
            C += (
                -p1[i] * al[i] * F[i][j] * p1[j] * al[j] / 2
                - be[i] * F[i][i] * F[i][j] * p1[j] * al[j] / 2
                - be[i] * F[i][j] ** 3 * be[j] / 12
                - be[i] * F[i][i] * F[i][j] * F[j][j] * be[j] / 8
            )

    S = mpf(0)
    for i in R:
        S += -be[i] * p3[i] / 6 - F[i][i] * p2[i] / 4 * ga[i] - F[i][i] ** 2 * p1[i] * de[i] / 8 - F[i][i] ** 3 * ep[i] / 48
    for i in R:
        for j in R:
            f, fi, fj = F[i][j], F[i][i], F[j][j]
            S += (
                f * p1[i] * al[i] * p2[j] / 4 * be[j]
                + f * p2[i] / 4 * be[i] * p1[j] * al[j]
                + f * fj * p1[i] * al[i] * p1[j] * ga[j] / 2
                + f * fj * p2[i] / 4 * be[i] * be[j]
                + f * fj**2 * p1[i] * al[i] * de[j] / 8
                + f**2 * p1[i] * be[i] * p1[j] * be[j] / 4
                + f**2 * fj * p1[i] * be[i] * ga[j] / 4
                + fi * f * fj * be[i] * p1[j] * ga[j] / 8
                + fi * f * fj * p1[i] * ga[i] * be[j] / 8
                + f**3 * be[i] * p1[j] * ga[j] / 12
                + f**3 * p1[i] * ga[i] * be[j] / 12
                + fi * f * fj**2 * be[i] * de[j] / 16
                + f**3 * fj * be[i] * de[j] / 12
                + f**4 * ga[i] * ga[j] / 48
                + fi * f**2 * fj * ga[i] * ga[j] / 16
            )
    for i in R:
        for j in R:
            for k in R:
                Fij, Fjk, Fik = F[i][j], F[j][k], F[i][k]
                Fii, Fjj, Fkk = F[i][i], F[j][j], F[k][k]
                S += (
                    -Fij * Fjk * p1[i] * al[i] * p1[j] * be[j] * p1[k] * al[k] / 2
                    - Fij * Fjj * Fjk * p1[i] * al[i] * ga[j] * p1[k] * al[k] / 4
                    - Fii * Fij * Fjk**2 * be[i] * be[j] * p1[k] * be[k] / 4
                    - Fii * Fij * Fjk * Fkk * be[i] * p1[j] * be[j] * be[k] / 8
                    - Fij * Fjk * Fik**2 * be[i] * p1[j] * be[j] * be[k] / 4
                    - Fii * Fij * Fjk**2 * Fkk * be[i] * be[j] * ga[k] / 8
                    - Fii * Fij * Fjj * Fjk * Fkk * be[i] * ga[j] * be[k] / 16
                    - Fii * Fij * Fjk**3 * be[i] * ga[j] * be[k] / 12
                    - Fij**2 * Fjk**2 * Fik * be[i] * ga[j] * be[k] / 8
                    - Fij * Fjj * Fjk * Fik**2 * be[i] * ga[j] * be[k] / 8
                    - Fij * Fjk * Fkk * p1[i] * al[i] * p1[j] * be[j] * be[k] / 2
                    - Fij * Fjk**2 * Fkk * p1[i] * al[i] * be[j] * ga[k] / 4
                    - Fij * Fjk**2 * p1[i] * al[i] * be[j] * p1[k] * be[k] / 2
                    - Fij * Fjj * Fjk * Fkk * p1[i] * al[i] * ga[j] * be[k] / 4
                    - Fij * Fjk**3 * p1[i] * al[i] * ga[j] * be[k] / 6
                )
    for i in R:
        for j in R:
            for k in R:
                for l in R:
                    Fij, Fjk, Fik, Fkl, Fjl, Fil = F[i][j], F[j][k], F[i][k], F[k][l], F[j][l], F[i][l]
                    Fii, Fkk, Fll = F[i][i], F[k][k], F[l][l]
                    bb = be[i] * be[j] * be[k] * be[l]
                    S += (
                        Fij * Fjk**2 * Fkl * p1[i] * al[i] * be[j] * be[k] * p1[l] * al[l] / 4
                        + Fij * Fik**2 * Fjl**2 * Fkl * bb / 16
                        + Fij * Fik * Fkl * Fjl * Fil * Fjk * bb / 24
                        + Fii * Fij * Fjk**2 * Fkl * Fll * bb / 16
                        + Fij * Fjk * Fjl * p1[i] * al[i] * be[j] * p1[k] * al[k] * p1[l] * al[l] / 6
                        + Fii * Fij * Fjk * Fjl * Fkk * Fll * bb / 48
                        + Fii * Fij * Fjk * Fjl * Fkl**2 * bb / 8
                        + Fij * Fjk * Fjl * Fkk * Fll * p1[i] * al[i] * be[j] * be[k] * be[l] / 8
                        + Fij * Fjk * Fjl * Fkl**2 * p1[i] * al[i] * be[j] * be[k] * be[l] / 4
                        + Fij * Fjk**2 * Fkl * Fll * p1[i] * al[i] * be[j] * be[k] * be[l] / 4
                        + Fii * Fij * Fjk * Fjl * be[i] * be[j] * p1[k] * al[k] * p1[l] * al[l] / 4
                    )
    return C, S


def solution_lists(sol):
    """x and F of a solution as plain lists at the solution's precision."""
    with mp.workdps(sol.digits):
        x = [mpf(v) for v in sol.x]
        F = [[mpf(sol.F[i, j]) for j in range(sol.rank)] for i in range(sol.rank)]
    return x, F
