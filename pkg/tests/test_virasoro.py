"""Oscillator/degree-operator tests and the intersection table, with the
string-equation and genus-0 closed forms as independent oracles."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qgenus.errors import DomainError, TruncationError
from qgenus.rings import SparsePoly, UT, UX
from qgenus.virasoro import (AnnihilationReport, FockPoly, IntersectionTable,
                             alpha_apply, annihilation_check, canon_index,
                             correlator_weight, counts_from_degrees,
                             free_energy, genus_of, genus_zero_closed_form,
                             index_stats, l_apply, l_bracket_residual,
                             string_oracle, t_to_x, tau_series, x_to_t)

F = Fraction


def fock(poly) -> FockPoly:
    if not isinstance(poly, SparsePoly):
        poly = SparsePoly.const(UX, poly)
    return FockPoly(poly, 99)


def x(k, e=1):
    return SparsePoly.gen(UX, k, e)


SAMPLES = [
    fock(1),
    fock(x(0)),
    fock(x(0) ** 2 + 3 * x(1)),
    fock(x(0) * x(1) * x(2) - F(1, 2) * x(0) ** 3),
]


# ------------------------------------------------------------- oscillators

@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("l", [0, 1, 2])
@pytest.mark.parametrize("signs", [(1, 1), (1, -1), (-1, 1), (-1, -1)])
def test_alpha_commutators(k, l, signs):
    r_half = signs[0] * (2 * k + 1)
    s_half = signs[1] * (2 * l + 1)
    p = SAMPLES[3]
    lhs = alpha_apply(r_half, alpha_apply(s_half, p)) - \
        alpha_apply(s_half, alpha_apply(r_half, p))
    if r_half + s_half == 0:
        expected = p.scale(F(r_half, 2))
    else:
        expected = p.scale(0)
    w = min(lhs.trusted, expected.trusted)
    assert lhs.through(w) == expected.through(w)


def test_alpha_rejects_integer_modes():
    with pytest.raises(DomainError):
        alpha_apply(2, SAMPLES[0])


# ---------------------------------------------------------- degree operators

def test_l_known_values():
    assert l_apply(1, fock(x(1))).poly == F(3, 2) * x(0)
    assert l_apply(0, fock(1)).poly == SparsePoly.const(UX, F(1, 16))
    assert l_apply(-2, fock(1)).poly == F(1, 2) * x(0) * x(1)
    assert l_apply(1, fock(x(0) ** 2)).poly == SparsePoly.const(UX, F(1, 2))


def test_central_term_on_vacuum():
    one = fock(1)
    got = l_apply(2, l_apply(-2, one)).poly - l_apply(-2, l_apply(2, one)).poly
    # = 4 L_0(1) + (2^3-2)/12 = 1/4 + 1/2
    assert got == SparsePoly.const(UX, F(3, 4))


@pytest.mark.parametrize("m,n", [(1, -1), (2, -2), (2, -1), (1, 0), (0, -1),
                                 (2, 1), (-1, -2), (3, -2), (0, 2), (-3, 2)])
@pytest.mark.parametrize("i", range(len(SAMPLES)))
def test_bracket_relations(m, n, i):
    res = l_bracket_residual(m, n, SAMPLES[i])
    assert res.is_zero_through(res.trusted), f"[{m},{n}] fails on sample {i}"


@pytest.mark.parametrize("m,n", [(0, -1), (1, -1), (2, -1), (1, 0), (2, 0),
                                 (2, 1)])
@pytest.mark.parametrize("i", range(len(SAMPLES)))
def test_shifted_bracket_relations(m, n, i):
    res = l_bracket_residual(m, n, SAMPLES[i], shifted=True)
    assert res.is_zero_through(res.trusted)


def test_shift_needs_n_at_least_minus_one():
    with pytest.raises(DomainError):
        l_apply(-2, SAMPLES[0], shifted=True)


@given(st.integers(0, 3), st.integers(0, 2), st.integers(0, 2))
def test_l_zero_is_weight_grading(k, e, j):
    p = fock(x(k, e + 1) * x(k + j + 1))
    w = (e + 1) * (2 * k + 1) + 2 * (k + j + 1) + 1
    expected = p.scale(F(w, 2) + F(1, 16))
    got = l_apply(0, p)
    assert got.poly == expected.poly


# ------------------------------------------------------- coordinate change

def test_jozefiak_change_of_variables():
    t0, t2 = SparsePoly.gen(UT, 0), SparsePoly.gen(UT, 2)
    p = t0 ** 3 - 2 * t2
    img = t_to_x(p)
    assert img == -x(0) ** 3 + 6 * x(2)
    assert x_to_t(img) == p


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(1, 3)), max_size=3))
def test_jozefiak_round_trip(mono):
    powers = {}
    for k, e in mono:
        powers[k] = powers.get(k, 0) + e
    p = SparsePoly.monomial(UT, powers, F(3, 7))
    assert x_to_t(t_to_x(p)) == p


# ------------------------------------------------------ intersection table

@pytest.fixture(scope="module")
def table():
    return IntersectionTable().build_through(6)


def test_index_bookkeeping():
    assert canon_index((1, 0, 2, 0, 0)) == (1, 0, 2)
    assert index_stats((3, 1)) == (4, 1)
    assert counts_from_degrees([0, 0, 0, 1]) == (3, 1)
    assert genus_of((3,)) == 0
    assert genus_of((0, 0, 0, 0, 1)) == 2
    assert genus_of((2, 1)) is None  # the dimension constraint has no genus


def test_frozen_known_entries(table):
    assert table.value((3,)) == 1
    assert table.value((0, 1)) == F(1, 24)
    assert table.value((1, 0, 1)) == F(1, 24)
    assert table.value((0, 2)) == F(1, 24)
    assert table.value((3, 1)) == 1
    assert table.value((4, 0, 1)) == 1
    assert table.value((2, 0, 0, 1)) == F(1, 24)
    assert table.value((0, 0, 0, 0, 1)) == F(1, 1152)
    assert table.correlator([0, 0, 0]) == 1


def test_invalid_entries_are_rejected(table):
    with pytest.raises(DomainError):
        table.value((2, 1))
    with pytest.raises(DomainError):
        table.value(())
    with pytest.raises(TruncationError):
        table.value((0,) * 19 + (1,))  # valid (genus 7) but beyond build range


def test_string_equation_oracle(table):
    checked = 0
    for K, v in table.entries():
        if K and K[0] >= 1 and K != (3,):
            assert string_oracle(table, K) == v, f"string oracle fails at {K}"
            checked += 1
    assert checked > 10


def test_dilaton_relation(table):
    # removing one degree-1 insertion rescales by 2g - 2 + (n-1)
    checked = 0
    for K, v in table.entries():
        if len(K) >= 2 and K[1] >= 1:
            base = list(K)
            base[1] -= 1
            base = canon_index(base)
            g = genus_of(K)
            n, _ = index_stats(K)
            if genus_of(base) is not None and 2 * g - 2 + (n - 1) > 0:
                assert v == (2 * g - 2 + n - 1) * table.value(base)
                checked += 1
    assert checked > 5


def test_genus_zero_closed_form(table):
    checked = 0
    for K, v in table.entries():
        if genus_of(K) == 0:
            assert v == genus_zero_closed_form(K), K
            checked += 1
    assert checked > 10
    # the closed form rejects entries of other genera
    with pytest.raises(DomainError):
        genus_zero_closed_form((0, 1))


def test_table_json_round_trip(table):
    clone = IntersectionTable.loads(table.dumps())
    assert clone.complete_through == table.complete_through
    assert dict(clone.entries()) == dict(table.entries())
    with pytest.raises(DomainError):
        IntersectionTable.loads('{"format": "something-else"}')


# ------------------------------------------------- generating function

def test_free_energy_low_weight_coefficients(table):
    Fgen = free_energy(9, table)
    assert Fgen.poly.coefficient({0: 3}) == -F(1, 6)
    assert Fgen.poly.coefficient({1: 1}) == -F(1, 24)
    assert Fgen.poly.coefficient({0: 3, 1: 1}) == F(1, 6)
    assert correlator_weight((3, 1)) == 6


def test_tau_series_combines_exponential(table):
    tau = tau_series(7, table)
    assert tau.poly.constant_term() == 1
    assert tau.poly.coefficient({0: 3}) == -F(1, 6)
    assert tau.poly.coefficient({0: 6}) == F(1, 72)


@pytest.mark.parametrize("n", [-1, 0, 1, 2])
def test_shifted_operators_annihilate_tau(n, table):
    report = annihilation_check(n, 6, table)
    assert isinstance(report, AnnihilationReport)
    assert report.ok, f"residual {report.residual}"


def test_wrong_shift_direction_fails():
    # guard on the convention: subtracting the shift term instead leaves
    # the string residual (1/2) x_0^2 at weight 2
    tau = tau_series(5)
    wrong = l_apply(-1, tau).poly - F(1, 2) * tau.poly.differentiate(0)
    assert wrong.weight_truncate(2) == F(1, 2) * x(0) ** 2


def test_free_energy_requires_complete_table(table):
    with pytest.raises(TruncationError):
        free_energy(50, table)
