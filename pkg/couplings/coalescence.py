"""
Coalescence analysis of a grand coupling.

exact_coalescence runs a breadth-first search over multichain states z in S^n,
starting from the identity vector and applying every support function
coordinatewise. The number of distinct entries never increases along a path and
k(mu) is almost surely constant, so k is the smallest distinct count reachable.
Once a path sits at that count every support function acts injectively on the
values it holds, so its equality pattern is frozen: the limit partitions are
exactly the equality patterns of reachable states with k distinct entries.
"""

import math
import numpy as np

from dataclasses import dataclass
from logging import debug, info

from couplings.errors import CouplingError, NotIrreducible, StateBudgetExceeded
from couplings.matrix_core import RATIONAL, invariant_distribution, is_irreducible, period_and_cyclic_classes
from couplings.measures import push_forward
from couplings.settings import current


@dataclass(frozen=True, order=True)
class Partition:
    """
    Blocks of 1-based states, each block sorted, blocks ordered by least element.
    """
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(int(s) for s in block)) for block in self.blocks),
                              key=lambda block: block[0] if block else 0))
        states = [s for block in blocks for s in block]
        if any(not block for block in blocks):
            raise CouplingError("Partition blocks must be non-empty")
        if sorted(states) != list(range(1, len(states) + 1)):
            raise CouplingError(f"Blocks {[list(b) for b in blocks]} do not partition 1..{len(states)}")
        object.__setattr__(self, 'blocks', blocks)

    @property
    def n(self):
        return sum(len(block) for block in self.blocks)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __str__(self):
        return ''.join('{' + ','.join(str(s) for s in block) + '}' for block in self.blocks)

    @classmethod
    def singletons(cls, n):
        return cls(tuple((s,) for s in range(1, n + 1)))

    @classmethod
    def trivial(cls, n):
        return cls((tuple(range(1, n + 1)),))

    @classmethod
    def from_labels(cls, labels):
        """Equality pattern of a vector: states i, j share a block iff labels[i] == labels[j]"""
        groups = {}
        for state, label in enumerate(labels, start=1):
            groups.setdefault(label, []).append(state)
        return cls(tuple(groups.values()))

    def labels(self):
        """0-based block index of every state, as a numpy array"""
        labels = np.empty(self.n, dtype=np.intp)
        for index, block in enumerate(self.blocks):
            labels[np.array(block) - 1] = index
        return labels

    def block_of(self, state):
        for index, block in enumerate(self.blocks):
            if state in block:
                return index
        raise KeyError(state)

    def block_sizes(self):
        return tuple(sorted(len(block) for block in self.blocks))

    def is_trivial(self):
        return len(self.blocks) in (1, self.n)

    def is_transversal_of(self, other):
        """Every block of self meets every block of other exactly once"""
        other_labels = other.labels()
        return all(sorted(other_labels[np.array(block) - 1]) == list(range(len(other)))
                   for block in self.blocks)

    def to_json(self):
        return [list(block) for block in self.blocks]

    @classmethod
    def from_json(cls, data):
        return cls(tuple(tuple(block) for block in data))


@dataclass(frozen=True)
class CoalescenceReport:
    k: int
    limit_partitions: tuple
    reachable_census: int

    @property
    def deterministic(self):
        return len(self.limit_partitions) == 1

    @property
    def block_sizes(self):
        return tuple(p.block_sizes() for p in self.limit_partitions)

    @property
    def block_sizes_agree(self):
        return len(set(self.block_sizes)) == 1

    def to_json(self):
        return {
            'k': self.k,
            'deterministic': self.deterministic,
            'limit_partitions': [p.to_json() for p in self.limit_partitions],
            'reachable_census': self.reachable_census,
            'block_sizes': [list(sizes) for sizes in self.block_sizes],
            'block_sizes_agree': self.block_sizes_agree,
        }


def distinct_counts(Z):
    """Number of distinct entries in every row of a 2-d integer array"""
    ordered = np.sort(Z, axis=1)
    return 1 + np.count_nonzero(np.diff(ordered, axis=1), axis=1)


def equality_patterns(Z, chunk=1 << 15):
    """
    Canonical equality pattern of every row: entry i is the first index holding z[i]
    """
    patterns = []
    for start in range(0, len(Z), chunk):
        block = Z[start:start + chunk]
        patterns.append(np.argmax(block[:, :, None] == block[:, None, :], axis=2))
    return np.concatenate(patterns) if patterns else np.empty((0, Z.shape[1]), dtype=np.intp)


def _encoder(n):
    if n ** n < 2 ** 62:
        return (n ** np.arange(n, dtype=np.int64))
    return np.array([n ** e for e in range(n)], dtype=object)


def reachable_multichain_states(mu, budget=None):
    """
    Breadth-first levels of multichain states reachable from the identity.
    Yields one 0-based array of previously unseen states (rows) per level.
    """
    budget = current().state_budget if budget is None else budget
    F = mu.support_matrix()
    n = mu.n
    weights = _encoder(n)

    frontier = np.arange(n, dtype=np.intp)[None, :]
    visited = np.asarray(frontier @ weights)
    census = 1
    yield frontier

    while len(frontier):
        candidates = F[:, frontier].reshape(-1, n)
        codes, first = np.unique(candidates @ weights, return_index=True)
        fresh = ~np.isin(codes, visited)
        frontier = candidates[first[fresh]]
        if not len(frontier):
            break

        census += len(frontier)
        if census > budget:
            raise StateBudgetExceeded(budget)
        visited = np.union1d(visited, codes[fresh])
        debug(f'BFS level: {len(frontier)} new states, {census} total')
        yield frontier


def exact_coalescence(mu, budget=None):
    """
    Coalescence number and the set of achievable limit partitions of mu
    :param mu: FunctionMeasure whose push-forward is irreducible
    :param budget: Maximum number of multichain states to visit
    :return: CoalescenceReport
    """
    if not is_irreducible(push_forward(mu)):
        raise NotIrreducible("Push-forward of the measure is not irreducible")

    k = mu.n + 1
    patterns = set()
    census = 0
    for level in reachable_multichain_states(mu, budget):
        census += len(level)
        counts = distinct_counts(level)
        low = int(counts.min())
        if low > k:
            continue
        if low < k:
            k, patterns = low, set()
        at_minimum = level[counts == k]
        patterns.update(map(tuple, np.unique(equality_patterns(at_minimum), axis=0)))

    limit_partitions = tuple(sorted(Partition.from_labels(p) for p in patterns))
    info(f'k = {k} with {len(limit_partitions)} limit partition(s) over {census} states')
    return CoalescenceReport(k, limit_partitions, census)


def pairwise_coalescence_possible(mu, i, j):
    """
    True iff the pair chain started at (i, j) can reach the diagonal
    """
    for state in (i, j):
        if not 1 <= state <= mu.n:
            raise CouplingError(f"State {state} is outside 1..{mu.n}")
    if i == j:
        return True

    F = mu.support_matrix()
    n = mu.n
    seen = np.zeros((n, n), dtype=bool)
    frontier = np.array([[i - 1, j - 1]])
    seen[i - 1, j - 1] = True

    while len(frontier):
        a, b = F[:, frontier[:, 0]].ravel(), F[:, frontier[:, 1]].ravel()
        if np.any(a == b):
            return True
        fresh = ~seen[a, b]
        if not fresh.any():
            break
        pairs = np.unique(np.stack([a[fresh], b[fresh]], axis=1), axis=0)
        seen[pairs[:, 0], pairs[:, 1]] = True
        frontier = pairs

    return False


def default_horizon(mu):
    return math.ceil(50 * mu.n / float(mu.min_weight))


def _atom_sampler(mu, rng, chunk=4096):
    """Endless stream of atom indices by inversion of the cumulative weights"""
    cumulative = np.cumsum([float(w) for w in mu.weights])
    cumulative[-1] = 1.0
    last = len(cumulative) - 1
    while True:
        for u in rng.random(chunk):
            yield min(int(np.searchsorted(cumulative, u, side='right')), last)


@dataclass(frozen=True)
class ForwardRun:
    partition: Partition
    steps: int
    stabilized: bool
    seed: object = None

    def to_json(self):
        return {'seed': self.seed, 'partition': self.partition.to_json(),
                'steps_to_stability': self.steps if self.stabilized else None,
                'status': 'stabilized' if self.stabilized else 'DidNotStabilize'}


def simulate_forward(mu, seed, horizon=None, k=None):
    """
    Compose iid draws forward, X_t = F_t o ... o F_1, until the number of
    distinct positions falls to k; report that equality partition.
    :param k: Known coalescence number; computed exactly when omitted
    """
    if horizon is not None and horizon < 1:
        raise CouplingError(f"Horizon must be at least 1, got {horizon}")
    k = exact_coalescence(mu).k if k is None else k
    horizon = default_horizon(mu) if horizon is None else horizon

    rng = np.random.default_rng(seed)
    F = mu.support_matrix()
    z = np.arange(mu.n)
    if len(np.unique(z)) <= k:
        return ForwardRun(Partition.from_labels(z), 0, True, seed)

    draws = _atom_sampler(mu, rng)
    for t in range(1, horizon + 1):
        z = F[next(draws)][z]
        if len(np.unique(z)) <= k:
            return ForwardRun(Partition.from_labels(z), t, True, seed)

    debug(f'Forward run with seed {seed} did not stabilize within {horizon} steps')
    return ForwardRun(Partition.from_labels(z), horizon, False, seed)


@dataclass(frozen=True)
class CftpRun:
    sample: int
    steps: int
    coalesced: bool
    seed: object = None

    def to_json(self):
        if not self.coalesced:
            return {'seed': self.seed, 'status': 'DidNotCoalesce', 'steps': self.steps}
        return {'seed': self.seed, 'status': 'coalesced', 'sample': self.sample, 'steps': self.steps}


def simulate_cftp(mu, seed, horizon=None):
    """
    Coupling from the past: G_t = F_1 o F_2 o ... o F_t with each new draw
    innermost; stop once G_t is constant and return its value.
    """
    if horizon is not None and horizon < 1:
        raise CouplingError(f"Horizon must be at least 1, got {horizon}")
    horizon = default_horizon(mu) if horizon is None else horizon

    rng = np.random.default_rng(seed)
    F = mu.support_matrix()
    G = np.arange(mu.n)
    draws = _atom_sampler(mu, rng)
    for t in range(1, horizon + 1):
        G = G[F[next(draws)]]
        if np.all(G == G[0]):
            return CftpRun(int(G[0]) + 1, t, True, seed)

    return CftpRun(None, horizon, False, seed)


def reciprocal_floor(w, mode):
    """floor(1/w); a float weight within rounding of 1/m counts as exactly 1/m"""
    if mode == RATIONAL:
        return math.floor(1 / w)
    return math.floor(1 / w * (1 + current().residual_tol))


@dataclass(frozen=True)
class KmaxBounds:
    lower: int
    upper: int
    invariant_bound: int
    column_bound: object
    off_diagonal_bound: object

    def to_json(self):
        return {'lower': self.lower, 'upper': self.upper,
                'invariant_bound': self.invariant_bound,
                'column_bound': self.column_bound,
                'off_diagonal_bound': self.off_diagonal_bound}


def kmax_upper_bounds(P):
    """
    Bounds on the largest coalescence number any coupling of P can have.

    pi_s > 1/m forces k < m, so floor(1/pi_s) bounds k for every s. A column
    minimum c = min_i p_is gives floor(1/c), and the off-diagonal minimum
    c' = min_{i != s} p_is gives floor(1/c') + 1. The period is a lower bound.
    """
    if not is_irreducible(P):
        raise NotIrreducible()

    pi = invariant_distribution(P).weights
    invariant_bound = min(reciprocal_floor(w, P.mode) for w in pi)

    column_bound, off_diagonal_bound = None, None
    for s in range(P.n):
        column = P.entries[:, s]
        smallest = min(column)
        if smallest > 0:
            bound = reciprocal_floor(smallest, P.mode)
            column_bound = bound if column_bound is None else min(column_bound, bound)
        others = [column[i] for i in range(P.n) if i != s]
        if others and min(others) > 0:
            bound = reciprocal_floor(min(others), P.mode) + 1
            off_diagonal_bound = bound if off_diagonal_bound is None else min(off_diagonal_bound, bound)

    candidates = [P.n, invariant_bound] + [b for b in (column_bound, off_diagonal_bound) if b is not None]
    upper = min(candidates)
    lower = period_and_cyclic_classes(P).period
    assert lower <= upper
    return KmaxBounds(lower, upper, invariant_bound, column_bound, off_diagonal_bound)
