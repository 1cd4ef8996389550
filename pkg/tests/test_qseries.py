from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nahmsearch.qseries import (
    NonUnitError,
    PuiseuxSeries,
    TruncationError,
    TwoVarSeries,
    as_fraction,
    dedekind_eta,
    pochhammer,
    rational_reconstruct,
    theta_lattice,
)
from oracles import euler_product, partitions_with_parts_at_most

F = Fraction


def dense(series: PuiseuxSeries, step=1):
    """Coefficients at offset, offset+step, ... through the known range."""
    out = []
    e = series.offset
    while e <= series.precision:
        out.append(series.coefficient(e))
        e += step
    return out


small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def series(draw, den=None):
    den = den or draw(st.sampled_from([1, 2, 3, 6]))
    n = draw(st.integers(1, 8))
    coeffs = draw(st.lists(small_fracs, min_size=n, max_size=n))
    offset = F(draw(st.integers(-6, 6)), den)
    return PuiseuxSeries.from_coefficients(coeffs, offset, den)


class TestRationals:
    def test_parsing(self):
        assert as_fraction("-1/60") == F(-1, 60)
        assert as_fraction(" 3 ") == 3
        assert as_fraction(F(2, 4)) == F(1, 2)

    @pytest.mark.parametrize("bad", ["1/0", "abc", "1.5", 0.5, True, ""])
    def test_rejects(self, bad):
        with pytest.raises((ValueError, TypeError, ZeroDivisionError)):
            as_fraction(bad)


class TestArithmetic:
    def test_cancellation(self):
        one_minus_q = PuiseuxSeries.from_exponents({0: 1, 1: -1}, None)
        total = one_minus_q + PuiseuxSeries.monomial(1)
        assert total.is_exact and dict(total.items()) == {F(0): 1}

    def test_geometric_inverse(self):
        inv = PuiseuxSeries.from_exponents({0: 1, 1: -1}, None).invert(10)
        assert dense(inv) == [1] * 11

    def test_eta_inverse_identity(self):
        eta = dedekind_eta(15)
        prod = eta * eta.invert()
        assert prod.precision == 15
        assert dense(prod) == [1] + [0] * 15

    def test_inverse_offset_negates(self):
        assert dedekind_eta(5).invert().offset == F(-1, 24)

    def test_inverse_of_non_unit(self):
        with pytest.raises(NonUnitError):
            PuiseuxSeries(1, {}, 5).invert()

    def test_mixed_offsets_combine_on_common_lattice(self):
        a = PuiseuxSeries.from_coefficients([1, 0, 1, 1, 2], F(-1, 48))
        b = PuiseuxSeries.from_coefficients([1, 1, 1, 1, 2], F(23, 48))
        s = a + b
        assert s.den % 48 == 0
        assert s.coefficient(F(-1, 48)) == 1 and s.coefficient(F(23, 48)) == 1
        assert s.precision == min(a.precision, b.precision)

    def test_truncation_is_tracked(self):
        s = dedekind_eta(3)
        with pytest.raises(TruncationError):
            s.coefficient(F(1, 24) + 4)

    def test_product_precision_is_pessimistic(self):
        a = PuiseuxSeries.from_coefficients([1, 1, 1], 0)  # known to q^2
        b = PuiseuxSeries.from_coefficients([1, 2, 3, 4, 5], 1)  # known to q^5
        assert (a * b).precision == min(2 + 1, 5 + 0)

    @settings(max_examples=60, deadline=None)
    @given(series(), series(), series())
    def test_ring_laws(self, a, b, c):
        assert (a + b) == (b + a)
        assert (a * b) == (b * a)
        assert ((a + b) + c) == (a + (b + c))
        assert ((a * b) * c) == (a * (b * c))
        assert (a * (b + c)) == (a * b + a * c)

    @settings(max_examples=60, deadline=None)
    @given(series())
    def test_inverse_two_sided(self, a):
        if not a.terms:
            return
        inv = a.invert()
        one = a * inv
        assert one.offset == 0 and one == PuiseuxSeries.constant(1)
        assert inv * a == PuiseuxSeries.constant(1)

    def test_json_round_trip(self):
        s = dedekind_eta(6).invert()
        data = s.to_json()
        assert set(data) >= {"lattice_den", "offset", "coeffs", "order"}
        assert data["offset"] == "-1/24"
        back = PuiseuxSeries.from_json(data)
        assert back == s and back.precision == s.precision

    def test_text_format(self):
        assert PuiseuxSeries.constant(1).truncate(0).to_text() == "q^0: 1"


class TestPochhammerAndEta:
    def test_empty_product(self):
        assert dict(pochhammer(0).items()) == {F(0): 1}

    def test_n2(self):
        assert dict(pochhammer(2).items()) == {F(0): 1, F(1): -1, F(2): -1, F(3): 1}

    def test_degree(self):
        p = pochhammer(5)
        assert p.coefficient(0) == 1
        assert max(e for e, _ in p.items()) == 15

    def test_eta_coefficients(self):
        eta = dedekind_eta(7)
        assert eta.offset == F(1, 24) and eta.den == 24
        assert dense(eta) == [1, -1, -1, 0, 0, 1, 0, 1]

    def test_eta_matches_euler_product(self):
        eta = dedekind_eta(40)
        assert dense(eta) == euler_product(41)

    def test_inverse_truncated_product_is_partition_numbers(self):
        T = 25
        prod = PuiseuxSeries.constant(1)
        for j in range(1, T + 1):
            prod = prod * PuiseuxSeries.from_exponents({0: 1, j: -1}, None)
        inv = prod.invert(T)
        assert dense(inv) == partitions_with_parts_at_most(T, T + 1)

    def test_inverse_q3(self):
        inv = pochhammer(3).invert(12)
        assert dense(inv)[:7] == [1, 1, 2, 3, 4, 5, 7]
        assert dense(inv) == partitions_with_parts_at_most(3, 13)


class TestTheta:
    def test_three_quarters(self):
        t = theta_lattice(F(3, 4), 0, 7)
        assert dict(t.items()) == {F(0): 1, F(3, 4): 2, F(3): 2, F(27, 4): 2}

    def test_shifted_by_third(self):
        t = theta_lattice(F(3, 4), F(1, 3), 2)
        items = dict(t.items())
        assert t.offset == F(1, 12)
        assert items[F(1, 12)] == 1 and items[F(1, 3)] == 1

    def test_half_shift_pairs(self):
        t = theta_lattice(F(1), F(1, 2), 30)
        assert all(c == 2 for _, c in t.items())

    @settings(max_examples=30, deadline=None)
    @given(st.fractions(min_value=F(1, 8), max_value=3, max_denominator=8), small_fracs)
    def test_reflection(self, a, b):
        assert theta_lattice(a, b, 6) == theta_lattice(a, -b, 6)


class TestReconstruction:
    def test_minus_one_sixtieth(self):
        with mpmath.workdps(60):
            x = mpmath.mpf("-0.0166666666666666666666666666666666666666666666666666666666667")
            assert rational_reconstruct(x, 10**4, F(1, 10**30)) == F(-1, 60)

    def test_exact_half(self):
        assert rational_reconstruct(mpmath.mpf(0.5)) == F(1, 2)

    def test_pi_is_rejected(self):
        with mpmath.workdps(60):
            assert rational_reconstruct(+mpmath.pi, 10**4, F(1, 10**30)) is None

    def test_smallest_denominator_wins(self):
        assert rational_reconstruct(F(1, 3) + F(1, 10**9), 10**6, F(1, 10**6)) == F(1, 3)

    def test_keeps_precision_of_input(self):
        with mpmath.workdps(60):
            x = mpmath.mpf(-1) / 24
        assert rational_reconstruct(x) == F(-1, 24)


class TestTwoVar:
    def test_product_and_extraction(self):
        a = TwoVarSeries(1, {(0, 1): 1, (0, -1): 1}, 3)
        b = TwoVarSeries(1, {(0, 1): 1, (1, -1): -1}, 3)
        p = a * b
        assert p.z_coefficient(2) == PuiseuxSeries(1, {0: 1}, 3)
        assert p.z_coefficient(0) == PuiseuxSeries(1, {0: 1, 1: -1}, 3)
        assert p.z_coefficient(-2) == PuiseuxSeries(1, {1: -1}, 3)

    def test_z_inversion(self):
        a = TwoVarSeries(2, {(1, 3): 2, (2, -1): 1}, 6)
        assert a.z_inverted().z_inverted() == a
        assert a.z_inverted().z_coefficient(-3) == a.z_coefficient(3)

    def test_text_and_json(self):
        a = TwoVarSeries(2, {(0, 1): 1, (2, -1): 3}, 4)
        assert a.to_text().splitlines() == ["z^-1/2 q^1: 3", "z^1/2 q^0: 1"]
        data = a.to_json()["z_components"]
        assert [c["z"] for c in data] == ["-1/2", "1/2"]
        assert PuiseuxSeries.from_json(data[1]["series"]) == a.z_coefficient(1)
