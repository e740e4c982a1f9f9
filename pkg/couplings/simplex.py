"""
Exact two-phase simplex over Fraction tableaux with Bland's anti-cycling rule.

Problems are in standard form: maximize c.x subject to A x = b, x >= 0.
"""

import numpy as np

from dataclasses import dataclass
from fractions import Fraction
from logging import debug


OPTIMAL = 'optimal'
UNBOUNDED = 'unbounded'
INFEASIBLE = 'infeasible'


def fractions(values):
    array = np.array(values, dtype=object)
    for index, value in np.ndenumerate(array):
        array[index] = Fraction(value)
    return array


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: tuple = None
    value: Fraction = None
    pivots: int = 0

    @property
    def feasible(self):
        return self.status != INFEASIBLE


class SimplexTableau:
    """
    Row m of the tableau holds reduced costs z_j - c_j and, in the last column,
    the current objective value. Columns N..N+m-1 are phase-one artificials.
    """

    def __init__(self, A, b):
        A, b = fractions(A), fractions(b)
        m, N = A.shape
        flip = np.array([v < 0 for v in b], dtype=bool)
        A[flip] = -A[flip]
        b[flip] = -b[flip]

        T = np.full((m + 1, N + m + 1), Fraction(0), dtype=object)
        T[:m, :N] = A
        T[:m, N:N + m] = fractions(np.eye(m, dtype=int))
        T[:m, -1] = b

        self.T = T
        self.N = N
        self.basis = list(range(N, N + m))
        self.pivots = 0

    @property
    def m(self):
        return len(self.basis)

    def pivot(self, i, j):
        T = self.T
        T[i] = T[i] / T[i, j]
        column = T[:, j].copy()
        column[i] = Fraction(0)
        self.T = T - np.outer(column, T[i])
        self.basis[i] = j
        self.pivots += 1

    def iterate(self, columns):
        """Bland's rule: lowest-index improving column, ratio ties to the lowest basic index"""
        while True:
            costs = self.T[-1]
            entering = [j for j in columns if costs[j] < 0]
            if not entering:
                return OPTIMAL
            j = entering[0]

            rows = [i for i in range(self.m) if self.T[i, j] > 0]
            if not rows:
                return UNBOUNDED
            i = min(rows, key=lambda r: (self.T[r, -1] / self.T[r, j], self.basis[r]))
            self.pivot(i, j)

    def phase_one(self):
        """
        Drive the artificials to zero. Returns False when A x = b, x >= 0 has no solution.
        Redundant rows are dropped and artificial columns removed on success.
        """
        m, N = self.m, self.N
        self.T[-1, :] = Fraction(0)
        self.T[-1, :N] = -self.T[:m, :N].sum(axis=0) if m else self.T[-1, :N]
        self.T[-1, -1] = -self.T[:m, -1].sum() if m else Fraction(0)

        self.iterate(range(N + m))
        if self.T[-1, -1] < 0:
            debug(f'Phase one ends infeasible after {self.pivots} pivots')
            return False

        redundant = []
        for i in range(m):
            if self.basis[i] < N:
                continue
            candidates = [j for j in range(N) if self.T[i, j] != 0]
            if candidates:
                self.pivot(i, candidates[0])
            else:
                redundant.append(i)

        keep = [i for i in range(m) if i not in redundant] + [m]
        self.T = self.T[keep][:, list(range(N)) + [N + m]]
        self.basis = [self.basis[i] for i in keep[:-1]]
        debug(f'Phase one feasible after {self.pivots} pivots, {len(redundant)} redundant rows')
        return True

    def maximize(self, c):
        c = fractions(c)
        c_basis = np.array([c[j] for j in self.basis], dtype=object)
        self.T[-1, :-1] = (c_basis @ self.T[:-1, :-1] if self.m else 0) - c
        self.T[-1, -1] = c_basis @ self.T[:-1, -1] if self.m else Fraction(0)
        return self.iterate(range(self.N))

    def solution(self):
        x = [Fraction(0)] * self.N
        for i, j in enumerate(self.basis):
            x[j] = self.T[i, -1]
        return tuple(x)


def solve(A, b, c=None):
    """
    Maximize c.x subject to A x = b, x >= 0; with c omitted only feasibility is decided
    :return: LpSolution with an exact basic solution when feasible
    """
    tableau = SimplexTableau(A, b)
    if not tableau.phase_one():
        return LpSolution(INFEASIBLE, pivots=tableau.pivots)
    if c is None:
        return LpSolution(OPTIMAL, tableau.solution(), Fraction(0), tableau.pivots)

    status = tableau.maximize(c)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=tableau.pivots)
    return LpSolution(OPTIMAL, tableau.solution(), tableau.T[-1, -1], tableau.pivots)
