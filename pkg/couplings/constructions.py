"""
Explicit couplings: the two-stage product measure over a lumping partition,
universal block measures, and the rotation family on P_n with its block and
non-block members.
"""

import itertools
import math
import numpy as np

from fractions import Fraction
from logging import debug, info

from couplings.coalescence import Partition, exact_coalescence, pairwise_coalescence_possible
from couplings.errors import (
    InvalidMeasure, NotADivisor, PreconditionFailed, SupportTooLarge,
)
from couplings.lumpability import block_permutation, necessary_conditions_check
from couplings.matrix_core import (
    RATIONAL, bvn_decompose, close_to, format_scalar, permutation_matrix, scalar_array, to_scalar,
    TransitionMatrix,
)
from couplings.measures import FunctionMeasure, StateFunction, is_consistent
from couplings.settings import current


class PermutationMixture:
    """
    A measure on permutations of 1..size; permutations are 1-based image tuples.
    """

    def __init__(self, terms, mode=RATIONAL):
        combined = {}
        for weight, permutation in terms:
            permutation = tuple(int(p) for p in permutation)
            if sorted(permutation) != list(range(1, len(permutation) + 1)):
                raise InvalidMeasure(f"{permutation} is not a permutation")
            weight = to_scalar(weight, mode)
            if not weight > 0:
                raise InvalidMeasure(f"Weight of {permutation} must be positive")
            combined[permutation] = combined.get(permutation, 0) + weight
        if not combined:
            raise InvalidMeasure("A permutation mixture needs at least one term")

        sizes = {len(p) for p in combined}
        if len(sizes) != 1:
            raise InvalidMeasure(f"Permutations of different sizes: {sorted(sizes)}")
        if not close_to(sum(combined.values()), 1, mode):
            raise InvalidMeasure("Permutation weights do not sum to 1")

        self.size = sizes.pop()
        self.mode = mode
        self.terms = tuple(sorted(((w, p) for p, w in combined.items()), key=lambda term: term[1]))

    @classmethod
    def from_decomposition(cls, decomposition):
        return cls(decomposition.terms, decomposition.mode)

    @classmethod
    def from_lambda(cls, lam):
        return cls.from_decomposition(bvn_decompose(lam))

    @classmethod
    def uniform(cls, permutations):
        permutations = sorted(set(map(tuple, permutations)))
        return cls([(Fraction(1, len(permutations)), p) for p in permutations])

    @classmethod
    def point_mass(cls, permutation):
        return cls([(Fraction(1), permutation)])

    def matrix(self):
        total = sum(weight * permutation_matrix(p, self.mode) for weight, p in self.terms)
        return TransitionMatrix(scalar_array(total, self.mode), self.mode)

    def to_json(self):
        return {'size': self.size,
                'terms': [{'weight': format_scalar(w, self.mode), 'permutation': list(p)}
                          for w, p in self.terms]}

    @classmethod
    def from_json(cls, data):
        weights = [term['weight'] for term in data['terms']]
        mode = 'float' if any(isinstance(w, float) for w in weights) else RATIONAL
        return cls([(term['weight'], term['permutation']) for term in data['terms']], mode)


def product_measure(P, partition, rho=None, cap=None):
    """
    Draw a block permutation from rho, then move every state independently
    inside its prescribed target block with probability p_ij / lambda_rs
    :param rho: PermutationMixture consistent with the lumped matrix; derived by BvN when omitted
    :return: FunctionMeasure consistent with P whose atoms all permute the blocks
    """
    conditions = necessary_conditions_check(P, partition)
    if not conditions.passed:
        raise PreconditionFailed(conditions.failed_check())

    lam = conditions.lam
    rho = PermutationMixture.from_lambda(lam) if rho is None else rho
    if rho.size != len(partition):
        raise PreconditionFailed('rho_size', f'{rho.size} permutation symbols for {len(partition)} blocks')
    if not rho.matrix() == lam:
        raise PreconditionFailed('rho_consistent_with_lambda')

    cap = current().support_cap if cap is None else cap
    labels = partition.labels()
    blocks = [np.array(block) - 1 for block in partition.blocks]
    entries = P.entries
    atoms = {}

    for weight, sigma in rho.terms:
        weight = to_scalar(weight, P.mode)
        choices = []
        for i in range(P.n):
            r = labels[i]
            s = sigma[r] - 1
            choices.append([(j, entries[i, j] / lam.entries[r, s]) for j in blocks[s] if entries[i, j] > 0])

        count = math.prod(len(c) for c in choices)
        if len(atoms) + count > cap:
            raise SupportTooLarge(len(atoms) + count, cap)

        for picks in itertools.product(*choices):
            f = StateFunction(tuple(j + 1 for j, _ in picks))
            atoms[f] = atoms.get(f, 0) + weight * math.prod(q for _, q in picks)

    mu = FunctionMeasure(atoms.items(), P.mode)
    debug(f'Product measure with {len(mu)} atoms over {len(rho.terms)} block permutations')
    assert is_consistent(mu, P)
    assert all(block_permutation(f, partition) is not None for f in mu.support)
    return mu


def verify_product_block(P, partition, rho=None):
    """
    The product measure has k = number of blocks iff every pair in the first block
    can coalesce. Both sides are computed and must agree.
    """
    mu = product_measure(P, partition, rho)
    first = partition.blocks[0]
    pairwise = all(pairwise_coalescence_possible(mu, i, j) for i, j in itertools.combinations(first, 2))
    k = exact_coalescence(mu).k
    assert pairwise == (k == len(partition)), f'pairwise={pairwise} but k={k}'
    info(f'Product measure over {partition}: k = {k}, block measure = {pairwise}')
    return pairwise


def universal_block_measure(partition):
    """
    Uniform measure on the functions constant on each block that send the blocks,
    by some permutation of block indices, into distinct blocks.
    """
    blocks = partition.blocks
    ell = len(blocks)
    functions = []
    for sigma in itertools.permutations(range(ell)):
        for values in itertools.product(*(blocks[sigma[r]] for r in range(ell))):
            image = [0] * partition.n
            for r, block in enumerate(blocks):
                for state in block:
                    image[state - 1] = values[r]
            functions.append(StateFunction(tuple(image)))

    assert len(functions) == math.factorial(ell) * math.prod(len(b) for b in blocks)
    return FunctionMeasure.uniform(functions)


def rotation_blocks(n, ell):
    """Consecutive blocks S_r = ((r-1)l+1, ..., rl) as 1-based tuples"""
    return [tuple(range(r * ell + 1, (r + 1) * ell + 1)) for r in range(n // ell)]


def rotation_family(n, ell, vectors):
    """
    The n functions f_ij = (h | pi_2 h | ... | pi_b h) with h the (j-1)-fold left
    rotation of block S_i and vectors[i] = (pi_2, ..., pi_b) acting on positions.
    """
    blocks = rotation_blocks(n, ell)
    functions = []
    for i, block in enumerate(blocks):
        for j in range(ell):
            h = block[j:] + block[:j]
            image = list(h)
            for pi in vectors[i]:
                image.extend(h[p] for p in pi)
            functions.append(StateFunction(tuple(image)))
    return functions


def _check_divisor(n, ell):
    if ell < 1 or n < 1 or n % ell:
        raise NotADivisor(ell, n)


def pn_block_measure(n, ell):
    """
    Block measure for P_n with k = ell: the rotation family with every position
    permutation the identity. Coalescence classes are {j, l+j, ..., (b-1)l+j}.
    """
    _check_divisor(n, ell)
    b = n // ell
    identity = tuple(range(ell))
    mu = FunctionMeasure.uniform(rotation_family(n, ell, [(identity,) * (b - 1)] * b))
    assert len(mu) == n
    return mu


def pn_block_classes(n, ell):
    _check_divisor(n, ell)
    return Partition(tuple(tuple(range(j, n + 1, ell)) for j in range(1, ell + 1)))


def canonical_position_vectors(ell, b):
    """The first b vectors of b-1 permutations of range(ell), in lexicographic order"""
    vectors = itertools.product(itertools.permutations(range(ell)), repeat=b - 1)
    return list(itertools.islice(vectors, b))


def nonblock_measure(n, ell):
    """
    Non-block coupling of P_n with k = ell: every block maps onto one block at the
    first step with b distinct position patterns, so the classes are random transversals.
    """
    if n < 4:
        raise PreconditionFailed('n >= 4', f'n = {n}')
    if ell < 2 or n % ell:
        raise PreconditionFailed('ell divides n and ell >= 2', f'n = {n}, ell = {ell}')
    b = n // ell
    if b < 2:
        raise PreconditionFailed('n / ell >= 2', f'n = {n}, ell = {ell}')

    vectors = canonical_position_vectors(ell, b)
    assert len(set(vectors)) == b
    mu = FunctionMeasure.uniform(rotation_family(n, ell, vectors))
    assert len(mu) == n
    return mu


def block_partition(n, ell):
    return Partition(tuple(rotation_blocks(n, ell)))
