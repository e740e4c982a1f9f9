"""
Functions on S = {1..n}, finitely supported measures on them, and the couplings
of a transition matrix that can be written down explicitly.
"""

import itertools
import math
import numpy as np
import re

from dataclasses import dataclass
from fractions import Fraction
from logging import debug, info

from couplings.errors import (
    BadLength, DimensionMismatch, InvalidMeasure, NotIrreducible, OutOfRangeSymbol, SupportTooLarge,
)
from couplings.matrix_core import (
    FLOAT, RATIONAL, close_to, format_scalar, is_irreducible, scalar_array, to_scalar,
    TransitionMatrix,
)
from couplings.settings import current


@dataclass(frozen=True, order=True)
class StateFunction:
    """
    A total map f: S -> S stored as the 1-based image tuple (f(1), ..., f(n)).
    """
    image: tuple

    def __post_init__(self):
        image = tuple(int(j) for j in self.image)
        object.__setattr__(self, 'image', image)
        for j in image:
            if not 1 <= j <= len(image):
                raise OutOfRangeSymbol(str(image), j, len(image))

    @property
    def n(self):
        return len(self.image)

    @property
    def array(self):
        """0-based numpy view, so that f.array[z] applies f to a vector of 0-based states"""
        return np.array(self.image, dtype=np.intp) - 1

    def __call__(self, state):
        return self.image[state - 1]

    def compose(self, other):
        """(self o other)(i) = self(other(i))"""
        return StateFunction(tuple(self(other(i)) for i in range(1, self.n + 1)))

    def is_permutation(self):
        return len(set(self.image)) == self.n

    def is_constant(self):
        return len(set(self.image)) == 1

    def __str__(self):
        return format_function(self)


def format_function(f):
    if f.n <= 9:
        return '(' + ''.join(str(j) for j in f.image) + ')'
    return '(' + ','.join(str(j) for j in f.image) + ')'


def parse_function(text, n):
    """
    Parse "(1212)" (n <= 9) or "(1,2,1,2)" into a StateFunction on n states
    :param text: Display string, parentheses optional
    :param n: State count
    :return: StateFunction
    """
    inner = re.sub(r'\s+', '', str(text))
    if inner.startswith('(') and inner.endswith(')'):
        inner = inner[1:-1]

    if ',' in inner:
        symbols = inner.split(',')
    elif n <= 9:
        symbols = list(inner)
    else:
        raise BadLength(text, n)

    if len(symbols) != n:
        raise BadLength(text, n)

    image = []
    for symbol in symbols:
        if not symbol.isdigit() or not 1 <= int(symbol) <= n:
            raise OutOfRangeSymbol(text, symbol, n)
        image.append(int(symbol))

    return StateFunction(tuple(image))


def identity(n):
    return StateFunction(tuple(range(1, n + 1)))


class FunctionMeasure:
    """
    A probability measure with finite support on functions S -> S.

    Atoms are kept in lexicographic order of their image vectors; every stored
    weight is strictly positive, so the atom list is the support.
    """

    def __init__(self, atoms, mode=None):
        atoms = list(atoms)
        if not atoms:
            raise InvalidMeasure("A measure needs at least one atom")

        if mode is None:
            mode = FLOAT if any(isinstance(w, (float, np.floating)) for _, w in atoms) else RATIONAL
        atoms = [(f, to_scalar(w, mode)) for f, w in atoms]

        n = atoms[0][0].n
        seen = set()
        for f, weight in atoms:
            if f.n != n:
                raise DimensionMismatch(n, f.n)
            if f in seen:
                raise InvalidMeasure(f"Function {f} appears twice")
            if not weight > 0:
                raise InvalidMeasure(f"Weight of {f} must be positive, got {weight}")
            seen.add(f)

        total = sum(w for _, w in atoms)
        if not close_to(total, 1, mode):
            raise InvalidMeasure(f"Weights sum to {format_scalar(total, mode)}, not 1")

        self.n = n
        self.mode = mode
        self.atoms = tuple(sorted(atoms, key=lambda atom: atom[0].image))

    @property
    def support(self):
        return tuple(f for f, _ in self.atoms)

    @property
    def weights(self):
        return tuple(w for _, w in self.atoms)

    @property
    def min_weight(self):
        return min(self.weights)

    def support_matrix(self):
        """0-based k x n integer array, one row per atom"""
        return np.array([f.image for f in self.support], dtype=np.intp) - 1

    def weight_of(self, f):
        return dict(self.atoms).get(f, 0)

    def __len__(self):
        return len(self.atoms)

    def __eq__(self, other):
        if not isinstance(other, FunctionMeasure):
            return NotImplemented
        return self.n == other.n and self.atoms == other.atoms

    __hash__ = None

    def __repr__(self):
        shown = ', '.join(f'{f}: {format_scalar(w, self.mode)}' for f, w in self.atoms[:6])
        more = ', ...' if len(self.atoms) > 6 else ''
        return f'FunctionMeasure(n={self.n}, {{{shown}{more}}})'

    @classmethod
    def uniform(cls, functions):
        functions = sorted(set(functions))
        return cls([(f, Fraction(1, len(functions))) for f in functions], RATIONAL)

    @classmethod
    def point_mass(cls, f):
        return cls([(f, Fraction(1))], RATIONAL)

    def mixture(self, other, t=Fraction(1, 2)):
        """t * self + (1 - t) * other, for 0 < t < 1"""
        if other.n != self.n:
            raise DimensionMismatch(self.n, other.n)
        mode = RATIONAL if self.mode == other.mode == RATIONAL else FLOAT
        t = to_scalar(t, mode)
        combined = {}
        for f, w in self.atoms:
            combined[f] = combined.get(f, 0) + t * to_scalar(w, mode)
        for f, w in other.atoms:
            combined[f] = combined.get(f, 0) + (1 - t) * to_scalar(w, mode)
        return FunctionMeasure(combined.items(), mode)

    def to_json(self):
        return {'n': self.n,
                'atoms': [{'map': format_function(f), 'weight': format_scalar(w, self.mode)}
                          for f, w in self.atoms]}

    @classmethod
    def from_json(cls, data):
        n = int(data['n'])
        weights = [atom['weight'] for atom in data['atoms']]
        mode = FLOAT if any(isinstance(w, float) for w in weights) else RATIONAL
        return cls([(parse_function(atom['map'], n), atom['weight']) for atom in data['atoms']], mode)


@dataclass(frozen=True)
class ConsistencyReport:
    consistent: bool
    residuals: tuple  # (i, j, push-forward minus p_ij), 1-based, nonzero entries only

    def __bool__(self):
        return self.consistent

    def to_json(self, mode=RATIONAL):
        return {'consistent': self.consistent,
                'residuals': [{'row': i, 'column': j, 'residual': format_scalar(r, mode)}
                              for i, j, r in self.residuals]}


def push_forward(mu):
    """p_ij = total weight of atoms sending i to j"""
    n = mu.n
    if mu.mode == RATIONAL:
        entries = np.full((n, n), Fraction(0), dtype=object)
    else:
        entries = np.zeros((n, n))
    rows = np.arange(n)
    for f, weight in mu.atoms:
        entries[rows, f.array] = entries[rows, f.array] + weight

    return TransitionMatrix(scalar_array(entries, mu.mode), mu.mode)


def is_consistent(mu, P):
    if mu.n != P.n:
        raise DimensionMismatch(P.n, mu.n)

    mode = RATIONAL if mu.mode == P.mode == RATIONAL else FLOAT
    pushed = push_forward(mu)
    residuals = []
    for (i, j), p in np.ndenumerate(P.entries):
        q = pushed.entries[i, j]
        if not close_to(to_scalar(q, mode), to_scalar(p, mode), mode):
            residuals.append((i + 1, j + 1, to_scalar(q, mode) - to_scalar(p, mode)))

    if residuals:
        debug(f'{len(residuals)} inconsistent entries, first at {residuals[0][:2]}')
    return ConsistencyReport(not residuals, tuple(residuals))


def positive_choices(P):
    """Per row, the 0-based columns with p_ij > 0"""
    return [np.flatnonzero(row).tolist() for row in P.positive]


def support_size(P):
    return math.prod(len(columns) for columns in positive_choices(P))


def maximal_support(P, cap=None):
    """
    All f with p_{i,f(i)} > 0 for every i, in lexicographic order
    """
    cap = current().support_cap if cap is None else cap
    size = support_size(P)
    if size > cap:
        raise SupportTooLarge(size, cap)
    return [StateFunction(tuple(j + 1 for j in image))
            for image in itertools.product(*positive_choices(P))]


def independence_coupling(P, cap=None):
    """
    The product coupling: mu({f}) = prod_i p_{i, f(i)}
    """
    atoms = []
    for f in maximal_support(P, cap):
        atoms.append((f, math.prod(P.entries[i, j] for i, j in enumerate(f.array))))
    debug(f'Independence coupling has {len(atoms)} atoms')
    return FunctionMeasure(atoms, P.mode)


@dataclass(frozen=True)
class Uniqueness:
    unique: bool
    witness: FunctionMeasure = None
    rows: tuple = None       # the two fractional rows (first, second), 1-based
    columns: tuple = None    # (r, s), 1-based

    def to_json(self):
        if self.unique:
            return {'unique': True}
        return {'unique': False, 'rows': list(self.rows), 'columns': list(self.columns),
                'witness': self.witness.to_json()}


def fractional_rows(P):
    return [i for i, row in enumerate(P.entries) if any(0 < p < 1 for p in row)]


def _witness_columns(P, first, second):
    for r in range(P.n):
        if not 0 < P.entries[first, r] < 1:
            continue
        for s in range(P.n):
            if 0 < P.entries[second, s] <= P.entries[first, r]:
                return r, s
    return None


def uniqueness_of_coupling(P, cap=None):
    """
    Unique iff at most one row holds an entry in (0,1). Otherwise build a second
    coupling that forces f(first) = r whenever f(second) = s.
    """
    if not is_irreducible(P):
        raise NotIrreducible()

    rows = fractional_rows(P)
    if len(rows) <= 1:
        return Uniqueness(True)

    first, second = rows[0], rows[1]
    chosen = _witness_columns(P, first, second)
    if chosen is None:
        first, second = second, first
        chosen = _witness_columns(P, first, second)
    assert chosen is not None
    r, s = chosen
    info(f'Second coupling built on rows {first + 1},{second + 1} with (r,s)=({r + 1},{s + 1})')

    entries = P.entries
    p_second = entries[second, s]
    atoms = []
    for f in maximal_support(P, cap):
        image = f.array
        rest = math.prod(entries[i, image[i]] for i in range(P.n) if i not in (first, second))
        hits_r, hits_s = image[first] == r, image[second] == s
        if hits_r and hits_s:
            weight = p_second * rest
        elif hits_r:
            weight = (entries[first, r] - p_second) / (1 - p_second) * entries[second, image[second]] * rest
        elif not hits_s:
            weight = entries[first, image[first]] * entries[second, image[second]] * rest / (1 - p_second)
        else:
            weight = 0
        if weight > 0:
            atoms.append((f, weight))

    witness = FunctionMeasure(atoms, P.mode)
    assert is_consistent(witness, P)
    return Uniqueness(False, witness, (first + 1, second + 1), (r + 1, s + 1))
