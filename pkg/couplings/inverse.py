"""
Which transition matrices can be realized by couplings supported inside a given
set of functions, decided exactly by linear programming.
"""

import itertools
import math
import numpy as np

from dataclasses import dataclass
from fractions import Fraction
from logging import debug, info, warning

from couplings.coalescence import Partition, exact_coalescence
from couplings.constructions import product_measure
from couplings.errors import (
    CapExceeded, CouplingError, DimensionMismatch, FloatModeRejected, StateBudgetExceeded, SupportTooLarge,
)
from couplings.lumpability import enumerate_lumpable_partitions, necessary_conditions_check
from couplings.matrix_core import RATIONAL, sample_random_matrix
from couplings.measures import (
    FunctionMeasure, StateFunction, format_function, identity, independence_coupling,
    maximal_support, parse_function, push_forward, uniqueness_of_coupling,
)
from couplings.settings import current
from couplings.simplex import solve


SUBSET = 'subset-support'
EXACT = 'exact-support'
MODES = {'subset': SUBSET, SUBSET: SUBSET, 'exact': EXACT, EXACT: EXACT}

EXHAUSTIVE = 'exhaustive-small'
RANDOM = 'random-supports'
STRATEGIES = (EXHAUSTIVE, RANDOM)


class FunctionSet:
    """
    A finite set of functions on 1..n, kept in lexicographic order.
    """

    def __init__(self, n, members):
        members = tuple(sorted(set(members)))
        for f in members:
            if f.n != n:
                raise DimensionMismatch(n, f.n)
        self.n = n
        self.members = members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, f):
        return f in set(self.members)

    def __eq__(self, other):
        return isinstance(other, FunctionSet) and (self.n, self.members) == (other.n, other.members)

    __hash__ = None

    def __repr__(self):
        return f'FunctionSet(n={self.n}, {len(self)} functions)'

    def without(self, *functions):
        removed = set(functions)
        return FunctionSet(self.n, [f for f in self.members if f not in removed])

    @classmethod
    def all_functions(cls, n):
        return cls(n, (StateFunction(image) for image in itertools.product(range(1, n + 1), repeat=n)))

    @classmethod
    def permutations(cls, n):
        return cls(n, (StateFunction(image) for image in itertools.permutations(range(1, n + 1))))

    @classmethod
    def forbidden_transition(cls, n, i, j):
        """All f with f(i) != j"""
        return cls(n, (f for f in cls.all_functions(n) if f(i) != j))

    @classmethod
    def linked_transitions(cls, n, first, second):
        """All f with f(i1) = j1 exactly when f(i2) = j2"""
        (i1, j1), (i2, j2) = first, second
        if i1 == i2:
            raise CouplingError("Linked transitions need two distinct source states")
        return cls(n, (f for f in cls.all_functions(n) if (f(i1) == j1) == (f(i2) == j2)))

    def to_json(self):
        return {'n': self.n, 'members': [format_function(f) for f in self.members]}

    @classmethod
    def from_json(cls, data):
        n = int(data['n'])
        return cls(n, (parse_function(text, n) for text in data['members']))


def family_fxy(n):
    """
    The n(n-1) near-identity maps f_xy: x -> y, every other state fixed
    """
    if n < 2:
        raise CouplingError(f"family_fxy needs n >= 2, got {n}")
    functions = []
    for x in range(1, n + 1):
        for y in range(1, n + 1):
            if x != y:
                image = list(identity(n).image)
                image[x - 1] = y
                functions.append(StateFunction(tuple(image)))
    return FunctionSet(n, functions)


@dataclass(frozen=True)
class LpCertificate:
    feasible: bool
    mode: str
    witness: FunctionMeasure = None
    min_weight: Fraction = None

    @property
    def weights(self):
        return dict(self.witness.atoms) if self.witness is not None else None

    def __bool__(self):
        return self.feasible

    def to_json(self):
        data = {'feasible': self.feasible, 'mode': self.mode}
        if self.feasible:
            data['min_weight'] = str(self.min_weight)
            data['witness'] = self.witness.to_json()
        return data


def membership(P, G, mode=SUBSET, cap=None):
    """
    Decide whether some coupling of P is supported inside G (subset-support) or on
    exactly G (exact-support), with an exact witness
    :param P: Rational TransitionMatrix
    :param G: FunctionSet
    :param mode: 'subset-support' or 'exact-support'
    :return: LpCertificate
    """
    if P.mode != RATIONAL:
        raise FloatModeRejected('membership')
    if G.n != P.n:
        raise DimensionMismatch(P.n, G.n)
    if mode not in MODES:
        raise CouplingError(f"Unknown membership mode: {mode}")
    mode = MODES[mode]
    cap = current().lp_variable_cap if cap is None else cap
    if len(G) > cap:
        raise CapExceeded(f"{len(G)} LP variables exceed the cap of {cap}")

    n = P.n
    positive = P.positive
    usable = [f for f in G if positive[np.arange(n), f.array].all()]
    if mode == EXACT and len(usable) < len(G):
        debug(f'{len(G) - len(usable)} function(s) use a zero transition; exact support impossible')
        return LpCertificate(False, mode)
    if not usable:
        return LpCertificate(False, mode)

    # one equation per positive entry; zero entries only constrain unusable functions
    rows = {(i, j): r for r, (i, j) in enumerate(zip(*np.nonzero(positive)))}
    A = np.zeros((len(rows), len(usable)), dtype=int)
    for column, f in enumerate(usable):
        for i, j in enumerate(f.array):
            A[rows[(i, j)], column] = 1
    if not A.any(axis=1).all():
        return LpCertificate(False, mode)
    b = [P.entries[i, j] for (i, j) in rows]

    if mode == SUBSET:
        result = solve(A, b)
        if not result.feasible:
            return LpCertificate(False, mode)
        alpha = result.x
        atoms = [(f, a) for f, a in zip(usable, alpha) if a > 0]
        witness = FunctionMeasure(atoms, RATIONAL)
        min_weight = witness.min_weight
    else:
        # alpha_f = t + beta_f, maximize t
        counts = A.sum(axis=1)[:, None]
        objective = [0] * len(usable) + [1]
        result = solve(np.hstack([A, counts]), b, objective)
        if not result.feasible or result.value <= 0:
            return LpCertificate(False, mode)
        t = result.value
        alpha = [beta + t for beta in result.x[:-1]]
        witness = FunctionMeasure(zip(usable, alpha), RATIONAL)
        min_weight = t

    debug(f'{mode} membership feasible with {len(witness)} atoms after {result.pivots} pivots')
    assert push_forward(witness) == P
    return LpCertificate(True, mode, witness, min_weight)


def fxy_criterion(P):
    """Realizable by near-identity maps iff the off-diagonal entries sum to 1"""
    return sum(P.entries[i, j] for i in range(P.n) for j in range(P.n) if i != j) == 1


def permutation_criterion(P):
    return P.is_doubly_stochastic()


def removed_function_criterion(P, f, mode=SUBSET):
    """
    Two states, one function f = (uv) removed: subset support needs p_{2,v} <= p_{1,u'};
    exact support on the remaining three needs the strict inequality and p_{1,u}, p_{2,v} > 0.
    """
    if P.n != 2:
        raise DimensionMismatch(2, P.n)
    u, v = f.image
    u_other = 3 - u
    p2v, p1u_other, p1u = P[1, v - 1], P[0, u_other - 1], P[0, u - 1]
    if MODES[mode] == SUBSET:
        return p2v <= p1u_other
    return p2v < p1u_other and p1u > 0 and p2v > 0


def linkage_criterion(P, first, second):
    """Necessary for linked transitions: p_{i1,j1} = p_{i2,j2}"""
    (i1, j1), (i2, j2) = first, second
    return P[i1 - 1, j1 - 1] == P[i2 - 1, j2 - 1]


@dataclass(frozen=True)
class LebEstimate:
    estimate: Fraction
    stderr: float
    hits: int
    samples: int
    seed: object = None

    def to_json(self):
        return {'seed': self.seed, 'samples': self.samples, 'hits': self.hits,
                'estimate': float(self.estimate), 'stderr': self.stderr}


def estimate_leb_measure(G, samples, seed=0):
    """
    Monte Carlo share of random matrices realizable inside G, with its binomial standard error
    """
    if samples < 1:
        raise CouplingError(f"Need at least one sample, got {samples}")
    rng = np.random.default_rng(seed)
    hits = 0
    for sample in range(samples):
        P = sample_random_matrix(G.n, rng).to_rational()
        hits += membership(P, G, SUBSET).feasible
        if (sample + 1) % 1000 == 0:
            debug(f'{sample + 1}/{samples} samples, {hits} realizable')

    p = Fraction(hits, samples)
    stderr = math.sqrt(float(p) * (1 - float(p)) / samples)
    info(f'Leb estimate {float(p):.4f} +/- {stderr:.4f} over {samples} samples (seed {seed})')
    return LebEstimate(p, stderr, hits, samples, seed)


@dataclass(frozen=True)
class ExplorationReport:
    K: tuple
    witnesses: dict
    coverage: str
    lp_solves: int
    feasible_supports: int

    def to_json(self):
        return {'K': list(self.K),
                'witnesses': {str(k): self.witnesses[k].to_json() for k in self.K},
                'coverage': self.coverage,
                'lp_solves': self.lp_solves,
                'feasible_supports': self.feasible_supports}


class _Explorer:
    def __init__(self, P):
        self.P = P
        self.witnesses = {}
        self.feasible = {}

    def record(self, mu, source):
        key = frozenset(mu.support)
        if key in self.feasible:
            return
        self.feasible[key] = mu
        try:
            k = exact_coalescence(mu).k
        except StateBudgetExceeded as e:
            warning(f'Skipping {source}: {e}')
            return
        if k not in self.witnesses:
            info(f'k = {k} reached by {source} ({len(mu)} atoms)')
            self.witnesses[k] = mu

    def seed_constructions(self):
        P = self.P
        try:
            self.record(independence_coupling(P), 'the independence coupling')
        except SupportTooLarge as e:
            warning(f'Skipping the independence coupling: {e}')

        try:
            uniqueness = uniqueness_of_coupling(P)
            if not uniqueness.unique:
                self.record(uniqueness.witness, 'the second coupling')
        except SupportTooLarge as e:
            warning(f'Skipping the second coupling: {e}')

        partitions = [Partition.singletons(P.n)]
        if P.n <= current().partition_cap:
            partitions += [partition for partition, _ in enumerate_lumpable_partitions(P)]
        for partition in partitions:
            if not necessary_conditions_check(P, partition).passed:
                continue
            try:
                self.record(product_measure(P, partition), f'the product measure over {partition}')
            except SupportTooLarge as e:
                warning(f'Skipping the product measure over {partition}: {e}')

    def try_support(self, support):
        if frozenset(support) in self.feasible:
            return
        certificate = membership(self.P, FunctionSet(self.P.n, support), EXACT)
        if certificate.feasible:
            self.record(certificate.witness, f'a support of {len(support)} functions')

    def mix(self, limit):
        """Unions of feasible supports are feasible: mixtures of their witnesses"""
        pairs = itertools.combinations(list(self.feasible.values()), 2)
        for a, b in itertools.islice(pairs, limit):
            self.record(a.mixture(b), 'a mixture')


def explore_K(P, budget=1000, strategy=EXHAUSTIVE, seed=0, candidates=None, max_support_size=None):
    """
    Coalescence numbers reachable by couplings of P, each with a witness measure.

    Seeds come from the explicit constructions; candidate supports inside the
    maximal support are then tested for exact-support feasibility, at most
    `budget` of them, and pairwise mixtures of feasible witnesses are added.
    """
    if P.mode != RATIONAL:
        raise FloatModeRejected('explore_K')
    if strategy not in STRATEGIES:
        raise CouplingError(f"Unknown strategy: {strategy}")

    maximal = maximal_support(P)
    exhaustive_search = strategy == EXHAUSTIVE and candidates is None
    cap = current().explore_support_cap
    if exhaustive_search and max_support_size is None and len(maximal) > cap:
        raise CapExceeded(f"Maximal support has {len(maximal)} functions, above the "
                          f"exhaustive cap of {cap}; pass candidate supports or a maximum size")

    explorer = _Explorer(P)
    explorer.seed_constructions()
    solves = 0
    complete = False

    if strategy == EXHAUSTIVE:
        label = 'candidates' if candidates is not None else f'max_size={max_support_size}'
        if candidates is None:
            largest = len(maximal) if max_support_size is None else min(max_support_size, len(maximal))
            candidates = itertools.chain.from_iterable(
                itertools.combinations(maximal, size) for size in range(1, largest + 1))
            complete = largest == len(maximal)

        exhausted = True
        for support in candidates:
            if solves >= budget:
                exhausted = False
                break
            explorer.try_support(list(support))
            solves += 1
        complete = complete and exhausted
        coverage = 'exhaustive' if complete else f'partial({label}, trials={solves})'
    else:
        rng = np.random.default_rng(seed)
        info(f'Random support search with seed {seed}, {budget} trials')
        for _ in range(budget):
            q = rng.random()
            chosen = [f for f, keep in zip(maximal, rng.random(len(maximal)) < q) if keep]
            if chosen:
                explorer.try_support(chosen)
                solves += 1
        coverage = f'partial(seed={seed}, trials={budget})'

    explorer.mix(budget)
    K = tuple(sorted(explorer.witnesses))
    info(f'K contains {list(K)} ({coverage})')
    return ExplorationReport(K, dict(explorer.witnesses), coverage, solves, len(explorer.feasible))
