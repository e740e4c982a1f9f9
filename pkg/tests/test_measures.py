import itertools

from fractions import Fraction

import pytest

from hypothesis import given, settings, strategies as st

from couplings.catalog import (
    crossing_pair_measure, cycle_matrix, lumpable_four_state_matrix, permutation_pair_measure,
    random_classes_measure, uniform_matrix,
)
from couplings.errors import (
    BadLength, DimensionMismatch, InvalidMeasure, OutOfRangeSymbol, SupportTooLarge,
)
from couplings.matrix_core import FLOAT, is_irreducible, sample_rational_matrix, validate_stochastic
from couplings.measures import (
    FunctionMeasure, StateFunction, format_function, identity, independence_coupling, is_consistent,
    maximal_support, parse_function, push_forward, support_size, uniqueness_of_coupling,
)


half, third = Fraction(1, 2), Fraction(1, 3)


def f(text, n=None):
    text = text.strip('()')
    return parse_function(text, n or len(text))


def test_parse_compact_and_comma_forms():
    assert parse_function('(1212)', 4).image == (1, 2, 1, 2)
    assert parse_function('(1,2,1,2)', 4) == parse_function('1212', 4)
    ten = parse_function('(10,1,2,3,4,5,6,7,8,9)', 10)
    assert ten(1) == 10
    assert format_function(ten) == '(10,1,2,3,4,5,6,7,8,9)'


def test_parse_errors():
    with pytest.raises(BadLength):
        parse_function('(121)', 4)
    with pytest.raises(OutOfRangeSymbol):
        parse_function('(1215)', 4)
    with pytest.raises(BadLength):
        parse_function('(1234567891)', 10)


def test_state_function_helpers():
    swap, collapse = f('21'), f('11')
    assert swap.compose(collapse) == f('22')
    assert collapse.compose(swap) == f('11')
    assert swap.is_permutation() and not swap.is_constant()
    assert collapse.is_constant()
    assert str(identity(3)) == '(123)'


def test_measure_validation():
    with pytest.raises(InvalidMeasure):
        FunctionMeasure([(f('12'), half), (f('12'), half)])
    with pytest.raises(InvalidMeasure):
        FunctionMeasure([(f('12'), half)])
    with pytest.raises(InvalidMeasure):
        FunctionMeasure([(f('12'), 1), (f('21'), 0)])
    with pytest.raises(DimensionMismatch):
        FunctionMeasure([(f('12'), half), (f('123'), half)])
    with pytest.raises(InvalidMeasure):
        FunctionMeasure([])


def test_atoms_are_sorted():
    mu = FunctionMeasure([(f('3434'), half), (f('1221'), half)])
    assert mu.support == (f('1221'), f('3434'))
    assert mu.weight_of(f('3434')) == half
    assert mu.weight_of(f('1111')) == 0


def test_float_weights_infer_float_mode():
    mu = FunctionMeasure([(f('12'), 0.25), (f('21'), 0.75)])
    assert mu.mode == FLOAT


def test_push_forward_of_random_classes_measure():
    q = Fraction(1, 4)
    assert push_forward(random_classes_measure()) == validate_stochastic([[half, 0, half, 0],
                                                                          [0, half, 0, half],
                                                                          [q, q, q, q],
                                                                          [q, q, q, q]])


def test_two_measures_one_matrix():
    P = lumpable_four_state_matrix()
    assert is_consistent(permutation_pair_measure(), P)
    assert is_consistent(crossing_pair_measure(), P)


def test_inconsistency_residuals():
    report = is_consistent(FunctionMeasure.point_mass(identity(4)), lumpable_four_state_matrix())
    assert not report
    assert (1, 1, half) in report.residuals
    assert report.to_json()['consistent'] is False


def test_consistency_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        is_consistent(random_classes_measure(), uniform_matrix(3))


def test_mixture_is_consistent():
    P = lumpable_four_state_matrix()
    mixed = permutation_pair_measure().mixture(crossing_pair_measure(), Fraction(1, 3))
    assert len(mixed) == 4
    assert is_consistent(mixed, P)


def test_independence_coupling_two_states():
    P = validate_stochastic([[half, half], [third, 2 * third]])
    mu = independence_coupling(P)
    assert len(mu) == 4
    assert mu.weight_of(f('12')) == third
    assert mu.weight_of(f('21')) == Fraction(1, 6)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 4), seed=st.integers(0, 10 ** 6), density=st.sampled_from([0.5, 1.0]))
def test_independence_coupling_is_consistent(n, seed, density):
    P = sample_rational_matrix(n, seed, density=density)
    mu = independence_coupling(P)
    assert len(mu) == support_size(P)
    assert sum(mu.weights) == 1
    assert is_consistent(mu, P)


def test_maximal_support_cap():
    assert len(maximal_support(uniform_matrix(3))) == 27
    with pytest.raises(SupportTooLarge):
        maximal_support(uniform_matrix(4), cap=100)


def test_unique_when_no_fractional_rows():
    assert uniqueness_of_coupling(cycle_matrix(3)).unique


def test_unique_with_one_fractional_row():
    assert uniqueness_of_coupling(validate_stochastic([[half, half], [1, 0]])).unique


def test_second_coupling_two_states():
    P = validate_stochastic([[half, half], [third, 2 * third]])
    result = uniqueness_of_coupling(P)
    assert not result.unique
    assert result.rows == (1, 2)
    assert result.columns == (1, 1)
    assert dict(result.witness.atoms) == {f('11'): third, f('12'): Fraction(1, 6), f('22'): half}


ROWS = [(1, 0, 0), (0, 1, 0), (0, 0, 1),
        (half, half, 0), (half, 0, half), (0, half, half), (third, third, third)]


def three_state_family():
    for rows in itertools.product(ROWS, repeat=3):
        P = validate_stochastic([list(row) for row in rows])
        if is_irreducible(P):
            yield P


def test_uniqueness_both_directions():
    checked = 0
    for P in three_state_family():
        fractional = sum(any(0 < p < 1 for p in row) for row in P.entries)
        result = uniqueness_of_coupling(P)
        assert result.unique == (fractional <= 1)
        if not result.unique:
            assert is_consistent(result.witness, P)
            assert result.witness != independence_coupling(P)
        checked += 1
    assert checked > 20


def test_state_function_rejects_out_of_range():
    with pytest.raises(OutOfRangeSymbol):
        StateFunction((1, 3))
