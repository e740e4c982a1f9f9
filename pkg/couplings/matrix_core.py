"""
Stochastic-matrix arithmetic in two modes.

Rational mode stores ``fractions.Fraction`` entries in a numpy object array and
every test is an exact equality. Float mode stores float64 and compares within
the active stochastic tolerance. A matrix never mixes the two.
"""

import math
import networkx
import numpy as np

from dataclasses import dataclass
from fractions import Fraction
from logging import debug, warning
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from couplings.errors import (
    CouplingError, NegativeEntry, NotDoublyStochastic, NotIrreducible, NotSquare, RowSumNotOne,
)
from couplings.settings import current


RATIONAL = 'rational'
FLOAT = 'float'
MODES = (RATIONAL, FLOAT)


def to_scalar(value, mode):
    """
    Convert one input value to the scalar type of a mode
    :param value: int, float, Fraction or a "p/q" string
    :param mode: 'rational' or 'float'
    :return: Fraction or float
    """
    if mode == RATIONAL:
        if isinstance(value, (float, np.floating)):
            return Fraction(float(value))
        return Fraction(str(value).strip()) if isinstance(value, str) else Fraction(value)
    return float(Fraction(value.strip())) if isinstance(value, str) else float(value)


def format_scalar(value, mode):
    return str(Fraction(value)) if mode == RATIONAL else float(value)


def infer_mode(raw):
    for value in np.asarray(raw, dtype=object).ravel():
        if isinstance(value, (float, np.floating)):
            return FLOAT
    return RATIONAL


def scalar_array(raw, mode):
    array = np.asarray(raw, dtype=object)
    converted = np.empty(array.shape, dtype=object if mode == RATIONAL else np.float64)
    for index, value in np.ndenumerate(array):
        converted[index] = to_scalar(value, mode)
    converted.setflags(write=False)
    return converted


def close_to(a, b, mode, tol=None):
    if mode == RATIONAL:
        return a == b
    tol = current().stochastic_tol if tol is None else tol
    return abs(float(a) - float(b)) <= tol


class TransitionMatrix:
    """
    An n x n row-stochastic matrix. Build through validate_stochastic.
    """

    def __init__(self, entries, mode):
        assert mode in MODES
        self.entries = entries
        self.mode = mode

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def positive(self):
        return np.asarray(self.entries > 0, dtype=bool)

    def __getitem__(self, index):
        return self.entries[index]

    def __eq__(self, other):
        if not isinstance(other, TransitionMatrix) or other.n != self.n:
            return NotImplemented
        if self.mode == other.mode == RATIONAL:
            return bool(np.all(self.entries == other.entries))
        return bool(np.allclose(self.to_float().entries, other.to_float().entries,
                                rtol=0, atol=current().stochastic_tol))

    __hash__ = None

    def __repr__(self):
        rows = [[format_scalar(v, self.mode) for v in row] for row in self.entries]
        return f'TransitionMatrix({self.mode}, {rows})'

    def is_doubly_stochastic(self):
        return all(close_to(total, 1, self.mode) for total in self.entries.sum(axis=0))

    def to_float(self):
        if self.mode == FLOAT:
            return self
        return TransitionMatrix(scalar_array(self.entries.astype(float), FLOAT), FLOAT)

    def to_rational(self):
        """
        Exact conversion: every float becomes its exact binary fraction and each
        row is rescaled by its exact sum so that it sums to exactly 1.
        """
        if self.mode == RATIONAL:
            return self
        rows = []
        for row in self.entries:
            exact = [Fraction(float(v)) for v in row]
            total = sum(exact)
            rows.append([v / total for v in exact])
        return TransitionMatrix(scalar_array(rows, RATIONAL), RATIONAL)

    def to_json(self):
        return {
            'n': self.n,
            'mode': self.mode,
            'rows': [[format_scalar(v, self.mode) for v in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data):
        rows = data['rows']
        mode = data.get('mode') or infer_mode(rows)
        matrix = validate_stochastic(rows, mode=mode)
        if 'n' in data and int(data['n']) != matrix.n:
            raise CouplingError(f"Declared n={data['n']} but rows describe n={matrix.n}")
        return matrix


@dataclass(frozen=True)
class Distribution:
    weights: tuple
    mode: str

    @property
    def n(self):
        return len(self.weights)

    @property
    def array(self):
        return np.array(self.weights, dtype=object if self.mode == RATIONAL else np.float64)

    def to_json(self):
        return {'n': self.n, 'mode': self.mode,
                'weights': [format_scalar(w, self.mode) for w in self.weights]}


@dataclass(frozen=True)
class CyclicStructure:
    period: int
    classes: tuple

    def class_of(self, state):
        for index, block in enumerate(self.classes):
            if state in block:
                return index
        raise KeyError(state)

    def to_json(self):
        return {'period': self.period, 'classes': [sorted(c) for c in self.classes]}


@dataclass(frozen=True)
class BvnDecomposition:
    """
    Convex combination of permutation matrices; permutations are 1-based image tuples.
    """
    terms: tuple
    mode: str

    def reconstruct(self):
        n = len(self.terms[0][1])
        total = np.zeros((n, n), dtype=object if self.mode == RATIONAL else np.float64)
        if self.mode == RATIONAL:
            total[:] = Fraction(0)
        for weight, permutation in self.terms:
            total = total + weight * permutation_matrix(permutation, self.mode)
        return TransitionMatrix(scalar_array(total, self.mode), self.mode)

    def to_json(self):
        return {'mode': self.mode,
                'terms': [{'weight': format_scalar(w, self.mode), 'permutation': list(p)}
                          for w, p in self.terms]}


def permutation_matrix(image, mode=RATIONAL):
    n = len(image)
    matrix = np.zeros((n, n), dtype=object if mode == RATIONAL else np.float64)
    matrix[:] = Fraction(0) if mode == RATIONAL else 0.0
    for i, j in enumerate(image):
        matrix[i, j - 1] = Fraction(1) if mode == RATIONAL else 1.0
    return matrix


def validate_stochastic(raw, mode=None, tol=None):
    """
    Validate a square array of scalars as a row-stochastic matrix
    :param raw: n x n nested sequence or array
    :param mode: 'rational' or 'float'; inferred from the entries when omitted
    :param tol: row-sum tolerance in float mode
    :return: TransitionMatrix
    """
    shape = np.shape(np.asarray(raw, dtype=object))
    if len(shape) != 2 or shape[0] != shape[1] or shape[0] < 1:
        raise NotSquare(shape)

    mode = mode or infer_mode(raw)
    if mode not in MODES:
        raise CouplingError(f"Unknown arithmetic mode: {mode}")
    entries = scalar_array(raw, mode)

    for (i, j), value in np.ndenumerate(entries):
        if value < 0:
            raise NegativeEntry(i + 1, j + 1, format_scalar(value, mode))
    for i, row in enumerate(entries):
        total = sum(row) if mode == RATIONAL else float(np.sum(row))
        if not close_to(total, 1, mode, tol):
            raise RowSumNotOne(i + 1, format_scalar(total, mode))

    return TransitionMatrix(entries, mode)


def transition_graph(P):
    graph = networkx.DiGraph()
    graph.add_nodes_from(range(P.n))
    graph.add_edges_from(zip(*np.nonzero(P.positive)))
    return graph


def is_irreducible(P):
    return networkx.is_strongly_connected(transition_graph(P))


def period_and_cyclic_classes(P):
    """
    Period from BFS levels rooted at state 1: d is the gcd of level(u) + 1 - level(v)
    over all edges, and state v sits in cyclic class level(v) mod d.
    """
    graph = transition_graph(P)
    if not networkx.is_strongly_connected(graph):
        raise NotIrreducible()

    level = networkx.single_source_shortest_path_length(graph, 0)
    period = 0
    for u, v in graph.edges:
        period = math.gcd(period, level[u] + 1 - level[v])

    classes = tuple(frozenset(v + 1 for v in range(P.n) if level[v] % period == r)
                    for r in range(period))
    debug(f'period {period}, cyclic classes {[sorted(c) for c in classes]}')
    return CyclicStructure(period, classes)


def is_aperiodic(P):
    return period_and_cyclic_classes(P).period == 1


def invariant_distribution(P):
    """
    Grassmann-Taksar-Heyman elimination. Subtraction-free, so it stays exact on
    Fraction entries and stable on floats.
    """
    if not is_irreducible(P):
        raise NotIrreducible()

    n = P.n
    A = np.array(P.entries, dtype=object if P.mode == RATIONAL else np.float64)

    for k in range(n - 1):
        scale = np.sum(A[k, k + 1:n])
        if scale <= 0:
            raise NotIrreducible()
        A[k + 1:n, k] = A[k + 1:n, k] / scale
        A[k + 1:n, k + 1:n] = A[k + 1:n, k + 1:n] + np.outer(A[k + 1:n, k], A[k, k + 1:n])

    x = np.empty(n, dtype=A.dtype)
    x[n - 1] = Fraction(1) if P.mode == RATIONAL else 1.0
    for k in range(n - 2, -1, -1):
        x[k] = np.dot(x[k + 1:n], A[k + 1:n, k])
    x = x / np.sum(x)

    if P.mode == FLOAT:
        residual = float(np.max(np.abs(x @ P.entries - x)))
        if residual > current().residual_tol:
            warning(f'Invariant distribution residual {residual:.3e} exceeds '
                    f'{current().residual_tol:.1e}')
    else:
        assert np.all(x.dot(P.entries) == x)

    return Distribution(tuple(x.tolist()), P.mode)


def open_unit_uniforms(draw, shape):
    """
    Uniforms on the open interval (0,1): draw(size) samples [0,1) and exact zeros are redrawn
    """
    q = np.array(draw(shape), dtype=np.float64)
    zeros = q == 0
    while zeros.any():
        q[zeros] = draw(int(zeros.sum()))
        zeros = q == 0
    return q


def sample_random_matrix(n, seed):
    """
    Draw P from the random-matrix law: iid uniforms q_ij on (0,1), rows divided by their sums
    :param n: State count
    :param seed: Integer seed or numpy Generator
    :return: Float-mode TransitionMatrix
    """
    if n < 1:
        raise CouplingError(f"State count must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    q = open_unit_uniforms(rng.random, (n, n))
    p = q / q.sum(axis=1, keepdims=True)
    p.setflags(write=False)
    return TransitionMatrix(p, FLOAT)


def sample_rational_matrix(n, seed, denominator=12, density=1.0):
    """
    Random exact matrix with integer weights in 1..denominator, each row normalized.
    With density < 1 entries are zeroed at random (the diagonal is always kept).
    """
    rng = np.random.default_rng(seed)
    weights = rng.integers(1, denominator + 1, size=(n, n))
    if density < 1.0:
        keep = rng.random((n, n)) < density
        np.fill_diagonal(keep, True)
        weights = weights * keep
    rows = [[Fraction(int(w), int(row.sum())) for w in row] for row in weights]
    return TransitionMatrix(scalar_array(rows, RATIONAL), RATIONAL)


def bvn_decompose(D):
    """
    Greedy Birkhoff-von Neumann extraction: take a perfect matching of the
    positive pattern (Hopcroft-Karp), peel off its minimum entry, repeat.
    Each round zeroes at least one entry, so at most (n-1)^2 + 1 terms.
    """
    for j, total in enumerate(D.entries.sum(axis=0)):
        if not close_to(total, 1, D.mode):
            raise NotDoublyStochastic(j + 1, format_scalar(total, D.mode))

    n = D.n
    tol = current().stochastic_tol
    remaining = np.array(D.entries, dtype=object if D.mode == RATIONAL else np.float64)
    terms = []

    while True:
        pattern = remaining > 0 if D.mode == RATIONAL else remaining > tol
        pattern = np.asarray(pattern, dtype=bool)
        if not pattern.any():
            break

        matching = maximum_bipartite_matching(csr_matrix(pattern.astype(np.int8)), perm_type='column')
        if np.any(matching < 0):
            if D.mode == FLOAT:
                warning(f'No perfect matching left; stopping BvN with residual mass {remaining.sum():.3e}')
                break
            raise CouplingError("Residual of a doubly stochastic matrix has no perfect matching")

        rows = np.arange(n)
        weight = min(remaining[rows, matching])
        remaining[rows, matching] = remaining[rows, matching] - weight
        terms.append((weight, tuple(int(j) + 1 for j in matching)))
        debug(f'BvN term {len(terms)}: weight {weight}, permutation {terms[-1][1]}')

    assert len(terms) <= (n - 1) ** 2 + 1
    if D.mode == FLOAT:
        total = sum(w for w, _ in terms)
        if abs(total - 1) > tol:
            warning(f'BvN weights sum to {total:.6f}; renormalizing')
        terms = [(w / total, p) for w, p in terms]
    return BvnDecomposition(tuple(terms), D.mode)
