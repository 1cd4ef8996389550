from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nahmsearch.characters import combination_series, predicted_combinations
from nahmsearch.liealg import MatrixQ, coset_family_matrix, minimal_family_matrix
from nahmsearch.nahmsum import NahmDatum, NotPositiveDefiniteError, lattice_terms, nahm_sum
from nahmsearch.qseries import PuiseuxSeries
from oracles import rank1_nahm_sum

F = Fraction


def relative(series, n):
    return [series.coefficient(series.offset + i) for i in range(n)]


class TestExamples:
    def test_minimal_model_b0(self):
        f = nahm_sum(NahmDatum(MatrixQ([[2]]), (0,), F(-1, 60)), 10)
        assert f.offset == F(-1, 60)
        assert relative(f, 7) == [1, 1, 1, 1, 2, 2, 3]

    def test_k2_doubled_character(self):
        f = nahm_sum(NahmDatum(MatrixQ([[1]]), (F(-1, 2),), F(1, 24)), 10)
        assert f.offset == F(1, 24)
        assert relative(f, 5) == [2, 2, 2, 4, 4]

    def test_order_zero_is_q_to_the_c(self):
        f = nahm_sum(NahmDatum(MatrixQ([[1]]), (0,), 0), 0)
        assert dict(f.items()) == {F(0): 1} and f.precision == 0

    def test_negative_b_moves_offset(self):
        A = coset_family_matrix(4)
        terms = lattice_terms(NahmDatum(A, (F(3, 2), 0, F(-3, 2)), 0), 0)
        assert terms[0] == F(-3, 4)

    def test_coset_example(self):
        A = coset_family_matrix(4)
        f = nahm_sum(NahmDatum(A, (F(-1, 2), -1, F(-1, 2)), F(1, 24)), 20)
        target = next(t for t in predicted_combinations(4) if t.name == "2*coset:k=4,l=2,m=0 + 2*coset:k=4,l=2,m=2")
        g = combination_series(target, 20)
        assert f.offset == g.offset and f.agrees_with(g)
        assert f.precision == g.precision

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefiniteError):
            NahmDatum(MatrixQ([[1, 2], [2, 1]]), (0, 0), 0)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            NahmDatum(MatrixQ([[1]]), (0, 0), 0)

    def test_json_round_trip(self):
        d = NahmDatum(coset_family_matrix(4), ("-1/2", "-1", "-1/2"), "1/24")
        data = d.to_json()
        assert data["B"] == ["-1/2", "-1", "-1/2"] and data["C"] == "1/24"
        assert NahmDatum.from_json(data) == d


rank1_a = st.fractions(min_value=F(1, 4), max_value=4, max_denominator=4)
rank1_b = st.fractions(min_value=-2, max_value=2, max_denominator=4)


class TestProperties:
    @settings(max_examples=40, deadline=None)
    @given(rank1_a, rank1_b, st.fractions(min_value=-1, max_value=1, max_denominator=60))
    def test_rank1_agrees_with_direct_loop(self, a, b, c):
        f = nahm_sum(NahmDatum(MatrixQ([[a]]), (b,), c), 8)
        ref = rank1_nahm_sum(a, b, c, 8)
        lead = min(ref)
        assert f.offset == lead
        assert f.precision == lead + 8
        assert dict(f.items()) == {e: v for e, v in ref.items() if e <= lead + 8}

    @settings(max_examples=15, deadline=None)
    @given(st.fractions(min_value=-1, max_value=1, max_denominator=24), st.fractions(min_value=-1, max_value=1, max_denominator=24))
    def test_shift_identity(self, c1, c2):
        A = minimal_family_matrix(2)
        B = (0, 1)
        f1 = nahm_sum(NahmDatum(A, B, c1), 8)
        f2 = nahm_sum(NahmDatum(A, B, c2), 8)
        assert f1 == f2.shift(c1 - c2)

    @pytest.mark.parametrize("B", [(0, 0, 0), (F(-1, 4), F(-1, 2), F(-3, 4)), (F(3, 2), 0, F(-3, 2))])
    def test_monotone_truncation(self, B):
        d = NahmDatum(coset_family_matrix(4), B, 0)
        low, high = nahm_sum(d, 6), nahm_sum(d, 14)
        assert low.offset == high.offset and low.agrees_with(high)
        assert high.precision - low.precision == 8

    def test_rank3_against_explicit_lattice_sum(self):
        A = coset_family_matrix(4)
        B = (F(-1, 4), F(-1, 2), F(-3, 4))
        order = 6
        f = nahm_sum(NahmDatum(A, B, 0), order)
        top = f.offset + order
        total = PuiseuxSeries(4, {}, None)
        box = range(0, 12)
        for n in ((a, b, c) for a in box for b in box for c in box):
            e = A.quadratic_form(n) / 2 + sum(x * y for x, y in zip(B, n))
            if e > top:
                continue
            term = PuiseuxSeries.monomial(e)
            for k in n:
                for j in range(1, k + 1):
                    term = term * PuiseuxSeries.from_exponents({0: 1, j: -1}, None).invert(top - e)
            total = total + term.truncate(top)
        assert total.truncate(top) == f
