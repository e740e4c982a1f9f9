"""
Strong lumpability of a chain with respect to a partition of its states, and
the block-measure criteria built on it.
"""

import numpy as np

from dataclasses import dataclass
from logging import debug, info

from couplings.coalescence import Partition, exact_coalescence
from couplings.errors import CapExceeded, DimensionMismatch, FloatModeRejected
from couplings.matrix_core import (
    RATIONAL, close_to, is_irreducible, scalar_array, TransitionMatrix,
)
from couplings.measures import format_function
from couplings.settings import current


@dataclass(frozen=True)
class LumpingResult:
    lumpable: bool
    lam: TransitionMatrix = None
    violation: tuple = None  # (r, s, i, i'), 1-based

    def to_json(self):
        if self.lumpable:
            return {'lumpable': True, 'lambda': self.lam.to_json()}
        r, s, i, i2 = self.violation
        return {'lumpable': False, 'violation': {'source_block': r, 'target_block': s,
                                                 'row': i, 'other_row': i2}}


def block_transition_sums(P, partition):
    """
    n x l table whose (i, s) entry is the probability of jumping from i into block s
    """
    if partition.n != P.n:
        raise DimensionMismatch(P.n, partition.n)
    sums = np.empty((P.n, len(partition)), dtype=P.entries.dtype)
    for s, block in enumerate(partition.blocks):
        columns = np.array(block) - 1
        for i in range(P.n):
            sums[i, s] = sum(P.entries[i, columns])
    return sums


def lumpability_test(P, partition):
    """
    Kemeny-Snell test: the block sums must be constant over each source block
    :return: LumpingResult with the lumped matrix or the first violation in row-major order
    """
    sums = block_transition_sums(P, partition)
    leaders = [block[0] - 1 for block in partition.blocks]
    labels = partition.labels()

    for i in range(P.n):
        r = labels[i]
        for s in range(len(partition)):
            if not close_to(sums[i, s], sums[leaders[r], s], P.mode):
                debug(f'Not lumpable: block sums differ for rows {leaders[r] + 1} and {i + 1}')
                return LumpingResult(False, violation=(int(r) + 1, s + 1, leaders[r] + 1, i + 1))

    lam = scalar_array(sums[leaders], P.mode)
    if P.mode != RATIONAL:
        lam = lam / lam.sum(axis=1, keepdims=True)
    return LumpingResult(True, TransitionMatrix(lam, P.mode))


def all_partitions(n):
    """
    Every partition of 1..n, generated from restricted-growth strings
    """
    def grow(prefix, top):
        if len(prefix) == n:
            yield Partition.from_labels(prefix)
            return
        for label in range(top + 2):
            yield from grow(prefix + [label], max(top, label))

    yield from grow([0], 0)


def enumerate_lumpable_partitions(P, cap=None):
    """
    All non-trivial partitions the chain lumps to, with their lumped matrices
    """
    if P.mode != RATIONAL:
        raise FloatModeRejected('enumerate_lumpable_partitions')
    cap = current().partition_cap if cap is None else cap
    if P.n > cap:
        raise CapExceeded(f"Partition enumeration on {P.n} states exceeds the cap of {cap}")

    found = []
    for partition in all_partitions(P.n):
        if partition.is_trivial():
            continue
        result = lumpability_test(P, partition)
        if result.lumpable:
            found.append((partition, result.lam))

    info(f'{len(found)} non-trivial lumpable partition(s) on {P.n} states')
    return found


@dataclass(frozen=True)
class BlockCheck:
    is_block: bool
    permutation_table: dict = None
    violation: str = None
    k: int = None

    def to_json(self):
        data = {'is_block': self.is_block, 'k': self.k}
        if self.permutation_table is not None:
            data['permutation_table'] = {format_function(f): list(p)
                                         for f, p in sorted(self.permutation_table.items())}
        if self.violation is not None:
            data['violation'] = self.violation
        return data


def block_permutation(f, partition):
    """
    The block permutation f induces, or None when f does not map blocks into blocks bijectively
    """
    labels = partition.labels()
    images = []
    for block in partition.blocks:
        targets = {int(labels[f(s) - 1]) for s in block}
        if len(targets) != 1:
            return None
        images.append(targets.pop() + 1)
    if len(set(images)) != len(images):
        return None
    return tuple(images)


def block_measure_check(mu, partition, report=None):
    """
    A block measure permutes the blocks with every atom and coalesces exactly to the blocks
    :param report: Precomputed exact_coalescence(mu), to avoid a second search
    """
    if partition.n != mu.n:
        raise DimensionMismatch(mu.n, partition.n)

    table = {}
    for f in mu.support:
        image = block_permutation(f, partition)
        if image is None:
            return BlockCheck(False, violation=f'{format_function(f)} does not permute the blocks of {partition}')
        table[f] = image

    report = exact_coalescence(mu) if report is None else report
    if report.k != len(partition):
        return BlockCheck(False, table, f'k = {report.k} but the partition has {len(partition)} blocks', report.k)

    if report.limit_partitions != (partition,):
        others = ' '.join(str(p) for p in report.limit_partitions)
        return BlockCheck(False, table, f'limit partitions are {others}, not {partition} alone', report.k)
    return BlockCheck(True, table, k=report.k)


@dataclass(frozen=True)
class NecessaryConditions:
    constant_rows: bool
    lambda_doubly_stochastic: bool
    lambda_irreducible: bool
    lam: TransitionMatrix = None

    @property
    def passed(self):
        return self.constant_rows and self.lambda_doubly_stochastic and self.lambda_irreducible

    def failed_check(self):
        for name in ('constant_rows', 'lambda_doubly_stochastic', 'lambda_irreducible'):
            if not getattr(self, name):
                return name
        return None

    def to_json(self):
        data = {'constant_rows': self.constant_rows,
                'lambda_doubly_stochastic': self.lambda_doubly_stochastic,
                'lambda_irreducible': self.lambda_irreducible}
        if self.lam is not None:
            data['lambda'] = self.lam.to_json()
        return data


def necessary_conditions_check(P, partition):
    """
    Conditions every partition with a block measure must satisfy; any False rules one out
    """
    result = lumpability_test(P, partition)
    if not result.lumpable:
        return NecessaryConditions(False, False, False)
    lam = result.lam
    return NecessaryConditions(True, lam.is_doubly_stochastic(), is_irreducible(lam), lam)


@dataclass(frozen=True)
class ClassesCheck:
    is_block: bool
    partitions: tuple
    k: int

    @property
    def partition(self):
        return self.partitions[0] if self.is_block else None

    def to_json(self):
        data = {'is_block': self.is_block, 'k': self.k}
        if self.is_block:
            data['partition'] = self.partition.to_json()
        else:
            data['partitions'] = [p.to_json() for p in self.partitions]
        return data


def deterministic_classes_check(mu):
    """
    mu is a block measure iff its coalescence classes are almost surely constant
    """
    report = exact_coalescence(mu)
    if report.deterministic:
        classes = report.limit_partitions[0]
        assert block_measure_check(mu, classes, report).is_block
    return ClassesCheck(report.deterministic, report.limit_partitions, report.k)
