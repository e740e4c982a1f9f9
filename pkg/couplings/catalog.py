"""
Small worked instances used by the tests, the fixtures and the CLI docs.
"""

import numpy as np

from fractions import Fraction

from couplings.coalescence import Partition
from couplings.constructions import nonblock_measure, pn_block_measure, product_measure, universal_block_measure
from couplings.inverse import FunctionSet
from couplings.matrix_core import RATIONAL, permutation_matrix, validate_stochastic
from couplings.measures import FunctionMeasure, parse_function


def measure_of(n, *maps, weights=None):
    functions = [parse_function(text, n) for text in maps]
    if weights is None:
        return FunctionMeasure.uniform(functions)
    return FunctionMeasure(zip(functions, map(Fraction, weights)), RATIONAL)


def random_classes_measure():
    """Two limit partitions, {1,3}{2,4} and {1,4}{2,3}, each with positive probability"""
    return measure_of(4, '(1212)', '(1221)', '(3434)', '(3443)')


def lumpable_four_state_matrix():
    half = Fraction(1, 2)
    return validate_stochastic([[half, 0, half, 0],
                                [0, half, 0, half],
                                [0, half, half, 0],
                                [half, 0, 0, half]])


def permutation_pair_measure():
    """Two permutations; nothing ever coalesces"""
    return measure_of(4, '(1234)', '(3421)')


def crossing_pair_measure():
    """Same matrix as permutation_pair_measure, k = 2 with random classes"""
    return measure_of(4, '(3434)', '(1221)')


SIX_STATE_NONBLOCK_MAPS = ('(121212)', '(212121)', '(343443)', '(434334)', '(566565)', '(655656)')


def six_state_nonblock_measure():
    return measure_of(6, *SIX_STATE_NONBLOCK_MAPS)


LINKED_THREE_STATE_MAPS = ('(111)', '(311)', '(121)', '(321)', '(231)',
                           '(112)', '(312)', '(122)', '(322)', '(232)',
                           '(113)', '(313)', '(123)', '(323)', '(233)')


def linked_three_state_set():
    """Every member sends 1 to 2 exactly when it sends 2 to 3"""
    return FunctionSet(3, (parse_function(text, 3) for text in LINKED_THREE_STATE_MAPS))


def uniform_matrix(n):
    return validate_stochastic([[Fraction(1, n)] * n for _ in range(n)])


def cycle_matrix(n):
    """Deterministic one-way cycle i -> i+1 mod n"""
    return validate_stochastic(permutation_matrix(tuple(i % n + 1 for i in range(1, n + 1))))


def two_block_matrix(alpha=Fraction(1, 2)):
    """
    Lumps to [[a, 1-a], [1-a, a]] over {1,2},{3,4}; the within-block part of the
    first block is a times the all-1/2 matrix, so pairs there can meet.
    """
    a = Fraction(alpha)
    return validate_stochastic([[a / 2, a / 2, 1 - a, 0],
                                [a / 2, a / 2, 0, 1 - a],
                                [1 - a, 0, a / 3, 2 * a / 3],
                                [0, 1 - a, 2 * a / 3, a / 3]])


def rigid_two_block_matrix():
    """
    Lumps to the all-1/2 matrix over {1,2},{3,4}, but inside each block the
    chain only swaps, so the product measure never joins 1 and 2.
    """
    half = Fraction(1, 2)
    return validate_stochastic([[0, half, half, 0],
                                [half, 0, 0, half],
                                [half, 0, 0, half],
                                [0, half, half, 0]])


def two_blocks():
    return Partition(((1, 2), (3, 4)))


def periodic_matrix(period, class_size=2, seed=0):
    """
    Random rational chain that moves from cyclic class r to class r+1 mod period;
    class r holds states r*class_size+1 .. (r+1)*class_size.
    """
    rng = np.random.default_rng(seed)
    n = period * class_size
    rows = []
    for state in range(n):
        target = (state // class_size + 1) % period
        weights = rng.integers(1, 7, size=class_size)
        row = [Fraction(0)] * n
        for offset, w in enumerate(weights):
            row[target * class_size + offset] = Fraction(int(w), int(weights.sum()))
        rows.append(row)
    return validate_stochastic(rows)


def corpus_measures():
    """Small measures with irreducible push-forwards, keyed by name"""
    return {
        'random_classes': random_classes_measure(),
        'permutation_pair': permutation_pair_measure(),
        'crossing_pair': crossing_pair_measure(),
        'six_state_nonblock': six_state_nonblock_measure(),
        'universal_block': universal_block_measure(Partition(((1, 2), (3, 4, 5)))),
        'two_block_product': product_measure(two_block_matrix(), two_blocks()),
        'pn_block_6_3': pn_block_measure(6, 3),
        'nonblock_6_2': nonblock_measure(6, 2),
    }
