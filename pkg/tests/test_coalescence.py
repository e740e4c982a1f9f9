from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from scipy import stats

from couplings.catalog import (
    corpus_measures, crossing_pair_measure, cycle_matrix, measure_of, periodic_matrix,
    permutation_pair_measure, random_classes_measure, six_state_nonblock_measure, uniform_matrix,
)
from couplings.coalescence import (
    Partition, distinct_counts, equality_patterns, exact_coalescence, kmax_upper_bounds,
    pairwise_coalescence_possible, reachable_multichain_states, simulate_cftp, simulate_forward,
)
from couplings.errors import CouplingError, NotIrreducible, StateBudgetExceeded
from couplings.matrix_core import (
    invariant_distribution, is_aperiodic, is_irreducible, period_and_cyclic_classes, permutation_matrix,
    sample_rational_matrix, validate_stochastic,
)
from couplings.measures import FunctionMeasure, independence_coupling, parse_function, push_forward


P13_24 = Partition(((1, 3), (2, 4)))
P14_23 = Partition(((1, 4), (2, 3)))


def slow_mixer():
    """k = 1, but no two states can meet in fewer than three steps"""
    return measure_of(3, '(231)', '(113)')


def test_partition_is_canonical():
    assert Partition(((4, 2), (3, 1))) == P13_24
    assert str(P13_24) == '{1,3}{2,4}'
    assert Partition.from_labels([7, 3, 7, 3]) == P13_24
    assert list(P13_24.labels()) == [0, 1, 0, 1]
    assert P13_24.block_of(4) == 1


def test_partition_rejects_bad_blocks():
    with pytest.raises(CouplingError):
        Partition(((1, 2), (2, 3)))
    with pytest.raises(CouplingError):
        Partition(((1, 2), (4,)))


def test_transversal():
    blocks = Partition(((1, 2), (3, 4), (5, 6)))
    assert Partition(((1, 3, 5), (2, 4, 6))).is_transversal_of(blocks)
    assert not Partition(((1, 2, 5), (3, 4, 6))).is_transversal_of(blocks)


def test_distinct_counts_and_patterns():
    Z = np.array([[0, 1, 0, 1], [2, 2, 2, 2], [3, 0, 1, 2]])
    assert list(distinct_counts(Z)) == [2, 1, 4]
    assert equality_patterns(Z).tolist() == [[0, 1, 0, 1], [0, 0, 0, 0], [0, 1, 2, 3]]


def test_random_limit_partitions():
    report = exact_coalescence(random_classes_measure())
    assert report.k == 2
    assert report.limit_partitions == (P13_24, P14_23)
    assert not report.deterministic
    assert report.block_sizes == ((2, 2), (2, 2))
    assert report.block_sizes_agree


def test_permutation_measure_never_coalesces():
    report = exact_coalescence(permutation_pair_measure())
    assert report.k == 4
    assert report.deterministic
    assert report.limit_partitions == (Partition.singletons(4),)


def test_crossing_pair_has_two_partitions():
    report = exact_coalescence(crossing_pair_measure())
    assert report.k == 2
    assert report.limit_partitions == (P13_24, P14_23)


def test_literal_six_state_measure():
    report = exact_coalescence(six_state_nonblock_measure())
    blocks = Partition(((1, 2), (3, 4), (5, 6)))
    assert report.k == 2
    assert not report.deterministic
    assert Partition(((1, 3, 5), (2, 4, 6))) in report.limit_partitions
    assert Partition(((1, 4, 6), (2, 3, 5))) in report.limit_partitions
    assert all(p.is_transversal_of(blocks) for p in report.limit_partitions)


def aperiodic_chains_coalesce(seeds):
    for seed in seeds:
        P = sample_rational_matrix(3, seed)
        assert is_aperiodic(P)
        assert exact_coalescence(independence_coupling(P)).k == 1


def test_independence_coupling_of_aperiodic_chains_coalesces():
    aperiodic_chains_coalesce(range(10))


@pytest.mark.slow
def test_independence_coupling_of_aperiodic_chains_at_scale():
    aperiodic_chains_coalesce(range(50))


@pytest.mark.parametrize('period', [2, 3, 4])
def test_independence_coupling_of_periodic_chain(period):
    P = periodic_matrix(period)
    report = exact_coalescence(independence_coupling(P))
    classes = Partition(tuple(tuple(sorted(c)) for c in period_and_cyclic_classes(P).classes))
    assert report.k == period
    assert report.limit_partitions == (classes,)


@pytest.mark.parametrize('name, mu', corpus_measures().items())
def test_coalescence_number_is_at_least_the_period(name, mu):
    assert exact_coalescence(mu).k >= period_and_cyclic_classes(push_forward(mu)).period


def test_reducible_push_forward_rejected():
    with pytest.raises(NotIrreducible):
        exact_coalescence(FunctionMeasure.point_mass(parse_function('(123)', 3)))


def test_state_budget():
    with pytest.raises(StateBudgetExceeded):
        exact_coalescence(independence_coupling(uniform_matrix(4)), budget=5)


def test_reachable_levels_start_at_identity():
    levels = list(reachable_multichain_states(random_classes_measure()))
    assert levels[0].tolist() == [[0, 1, 2, 3]]
    assert sum(len(level) for level in levels) == exact_coalescence(random_classes_measure()).reachable_census


def test_pairwise():
    assert not pairwise_coalescence_possible(permutation_pair_measure(), 1, 2)
    assert not pairwise_coalescence_possible(random_classes_measure(), 1, 2)
    assert pairwise_coalescence_possible(random_classes_measure(), 1, 3)
    assert pairwise_coalescence_possible(random_classes_measure(), 2, 2)
    assert pairwise_coalescence_possible(slow_mixer(), 1, 2)
    with pytest.raises(CouplingError):
        pairwise_coalescence_possible(random_classes_measure(), 1, 5)


def test_forward_run_lands_on_a_limit_partition():
    mu = random_classes_measure()
    seen = Counter()
    for seed in range(200):
        run = simulate_forward(mu, seed)
        assert run.stabilized
        seen[run.partition] += 1
    assert set(seen) == {P13_24, P14_23}


def test_forward_run_is_reproducible():
    mu = independence_coupling(sample_rational_matrix(4, seed=5))
    assert simulate_forward(mu, 17) == simulate_forward(mu, 17)


def test_forward_run_already_stable():
    run = simulate_forward(permutation_pair_measure(), 0)
    assert run.stabilized and run.steps == 0


def test_forward_run_horizon():
    run = simulate_forward(slow_mixer(), 0, horizon=1)
    assert not run.stabilized
    assert run.to_json()['status'] == 'DidNotStabilize'
    assert run.to_json()['steps_to_stability'] is None


def test_cftp_horizon():
    run = simulate_cftp(slow_mixer(), 0, horizon=2)
    assert not run.coalesced
    assert run.to_json()['status'] == 'DidNotCoalesce'


def test_cftp_never_coalesces_on_bijections():
    assert not simulate_cftp(permutation_pair_measure(), 0, horizon=10 ** 4).coalesced


def test_cftp_is_reproducible():
    mu = slow_mixer()
    assert simulate_cftp(mu, 3) == simulate_cftp(mu, 3)


def cftp_goodness_of_fit(mu, samples):
    pi = np.array([float(w) for w in invariant_distribution(push_forward(mu)).weights])
    counts = np.bincount([simulate_cftp(mu, seed).sample - 1 for seed in range(samples)], minlength=mu.n)
    return stats.chisquare(counts, pi * samples).pvalue


def test_cftp_samples_the_invariant_distribution():
    mu = independence_coupling(sample_rational_matrix(3, seed=2))
    assert cftp_goodness_of_fit(mu, 2000) > 0.001


@pytest.mark.slow
def test_cftp_samples_the_invariant_distribution_at_scale():
    for seed in range(5):
        mu = independence_coupling(sample_rational_matrix(3, seed=seed))
        assert cftp_goodness_of_fit(mu, 10 ** 4) > 0.001


@pytest.mark.slow
def test_monte_carlo_partitions_match_exact_ones():
    for mu in (random_classes_measure(), crossing_pair_measure(), permutation_pair_measure(),
               measure_of(4, '(1212)', '(2121)', '(3434)', '(4343)')):
        report = exact_coalescence(mu)
        seen = {simulate_forward(mu, seed, k=report.k).partition for seed in range(10 ** 4)}
        exact = set(report.limit_partitions)
        assert seen == exact


def test_kmax_of_uniform_matrix():
    bounds = kmax_upper_bounds(uniform_matrix(4))
    assert (bounds.lower, bounds.upper) == (1, 4)
    assert bounds.invariant_bound == 4
    assert bounds.column_bound == 4
    assert bounds.off_diagonal_bound == 5


def test_kmax_of_cycle():
    bounds = kmax_upper_bounds(cycle_matrix(3))
    assert (bounds.lower, bounds.upper) == (3, 3)
    assert bounds.column_bound is None


def test_kmax_heavy_state_forces_coalescence():
    P = validate_stochastic([[Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 4), Fraction(3, 4)]])
    assert kmax_upper_bounds(P).upper == 1


def permutation_mixture(seed, n=4, terms=3):
    rng = np.random.default_rng(seed)
    weights = rng.integers(1, 8, size=terms)
    total = np.full((n, n), Fraction(0), dtype=object)
    for w in weights:
        image = tuple(int(j) + 1 for j in rng.permutation(n))
        total = total + Fraction(int(w), int(weights.sum())) * permutation_matrix(image)
    return validate_stochastic(total.tolist())


def test_kmax_float_bound_matches_exact_bound():
    P = validate_stochastic([['0', '4/7', '0', '3/7'],
                             ['4/7', '1/14', '5/14', '0'],
                             ['5/14', '0', '9/14', '0'],
                             ['1/14', '5/14', '0', '4/7']])
    assert kmax_upper_bounds(P).upper == 4
    assert kmax_upper_bounds(P.to_float()).upper == 4

    for seed in range(100):
        P = permutation_mixture(seed)
        if not is_irreducible(P):
            continue
        assert kmax_upper_bounds(P.to_float()).upper == kmax_upper_bounds(P).upper
