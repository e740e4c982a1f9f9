#! /usr/bin/env python3
#
# coalesce.py
#
# Command-line front end for the grand-coupling analyses:
#     1. Read matrices, measures, partitions and function sets as JSON (files or "-" for stdin)
#     2. Run one analysis per subcommand
#     3. Print a JSON report (or a pandas-rendered text report) to standard output
#


# imports
import argparse
import json
import logging
import pandas
import sys

from dataclasses import dataclass
from logging import debug, info

from couplings import coalescence, constructions, inverse, lumpability, matrix_core, measures
from couplings.coalescence import Partition
from couplings.constructions import PermutationMixture
from couplings.errors import CouplingError
from couplings.inverse import FunctionSet
from couplings.matrix_core import validate_stochastic
from couplings.measures import FunctionMeasure
from couplings.settings import Settings, configure, from_environment, read_config
from utilities import available, load_json, positive_int, readable, readable_or_stdin, write_report


# Set up logging
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']

# create help strings for the log level option
log_levels_str = "\n    ".join(LOG_LEVELS)

DEFAULT_SEED = 0


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    inputs: dict
    seed: int
    budgets: dict
    output_format: str

    @classmethod
    def from_args(cls, args):
        inputs = {key: str(getattr(args, key)) for key in ('matrix', 'measure', 'partition', 'functions', 'rho')
                  if getattr(args, key, None) is not None}
        budgets = {key: getattr(args, key) for key in ('budget', 'samples', 'horizon', 'max_support')
                   if getattr(args, key, None) is not None}
        return cls(args.subcommand, inputs, getattr(args, 'seed', DEFAULT_SEED), budgets, args.format)


# input loaders
def load_matrix(path):
    data = load_json(path)
    rows = data['rows'] if isinstance(data, dict) else data
    mode = data.get('mode') if isinstance(data, dict) else None
    return validate_stochastic(rows, mode=mode)


def load_measure(path):
    return FunctionMeasure.from_json(load_json(path))


def load_partition(path):
    data = load_json(path)
    return Partition.from_json(data['blocks'] if isinstance(data, dict) else data)


def load_functions(path):
    return FunctionSet.from_json(load_json(path))


def load_rho(path):
    return PermutationMixture.from_json(load_json(path)) if path else None


# subcommand handlers, each returning a JSON-ready report
def run_validate(args):
    return {'valid': True, 'matrix': load_matrix(args.matrix).to_json()}


def run_invariant(args):
    return matrix_core.invariant_distribution(load_matrix(args.matrix)).to_json()


def run_period(args):
    return matrix_core.period_and_cyclic_classes(load_matrix(args.matrix)).to_json()


def run_bvn(args):
    return matrix_core.bvn_decompose(load_matrix(args.matrix)).to_json()


def run_indep(args):
    return measures.independence_coupling(load_matrix(args.matrix)).to_json()


def run_unique(args):
    return measures.uniqueness_of_coupling(load_matrix(args.matrix)).to_json()


def run_consistent(args):
    P = load_matrix(args.matrix)
    return measures.is_consistent(load_measure(args.measure), P).to_json(P.mode)


def run_coalesce(args):
    return coalescence.exact_coalescence(load_measure(args.measure), args.budget).to_json()


def run_pairwise(args):
    i, j = args.states
    possible = coalescence.pairwise_coalescence_possible(load_measure(args.measure), i, j)
    return {'states': [i, j], 'possible': possible}


def run_simulate(args):
    return coalescence.simulate_forward(load_measure(args.measure), args.seed, args.horizon).to_json()


def run_cftp(args):
    return coalescence.simulate_cftp(load_measure(args.measure), args.seed, args.horizon).to_json()


def run_kmax(args):
    return coalescence.kmax_upper_bounds(load_matrix(args.matrix)).to_json()


def run_lump(args):
    return lumpability.lumpability_test(load_matrix(args.matrix), load_partition(args.partition)).to_json()


def run_lump_all(args):
    found = lumpability.enumerate_lumpable_partitions(load_matrix(args.matrix))
    return {'partitions': [{'partition': p.to_json(), 'lambda': lam.to_json()} for p, lam in found]}


def run_necessary(args):
    return lumpability.necessary_conditions_check(load_matrix(args.matrix), load_partition(args.partition)).to_json()


def run_blockcheck(args):
    return lumpability.block_measure_check(load_measure(args.measure), load_partition(args.partition)).to_json()


def run_classes(args):
    return lumpability.deterministic_classes_check(load_measure(args.measure)).to_json()


def run_product(args):
    P, partition, rho = load_matrix(args.matrix), load_partition(args.partition), load_rho(args.rho)
    if args.verify:
        return {'block_measure': constructions.verify_product_block(P, partition, rho)}
    return constructions.product_measure(P, partition, rho).to_json()


def run_universal_block(args):
    return constructions.universal_block_measure(load_partition(args.partition)).to_json()


def run_construct_nonblock(args):
    return constructions.nonblock_measure(args.n, args.ell).to_json()


def run_construct_pnblock(args):
    return constructions.pn_block_measure(args.n, args.ell).to_json()


def run_member(args):
    return inverse.membership(load_matrix(args.matrix), load_functions(args.functions), args.mode).to_json()


def run_family_fxy(args):
    return inverse.family_fxy(args.n).to_json()


def run_estimate(args):
    return inverse.estimate_leb_measure(load_functions(args.functions), args.samples, args.seed).to_json()


def run_explore_k(args):
    report = inverse.explore_K(load_matrix(args.matrix), args.budget, args.strategy, args.seed,
                               max_support_size=args.max_support)
    return {'seed': args.seed, **report.to_json()}


# report rendering
def render_json(report):
    return json.dumps(report, indent=2)


def render_text(report, indent=''):
    lines = []
    for key, value in report.items():
        if isinstance(value, dict) and 'rows' in value:
            frame = pandas.DataFrame(value['rows'], index=range(1, value['n'] + 1),
                                     columns=range(1, value['n'] + 1))
            lines.append(f'{indent}{key} ({value["mode"]}):')
            lines.append(frame.to_string())
        elif isinstance(value, dict) and 'atoms' in value:
            frame = pandas.DataFrame(value['atoms'])
            lines.append(f'{indent}{key} ({len(frame)} atoms):')
            lines.append(frame.to_string(index=False))
        elif isinstance(value, dict):
            lines.append(f'{indent}{key}:')
            lines.append(render_text(value, indent + '    '))
        elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            lines.append(f'{indent}{key}:')
            lines.append(pandas.DataFrame(value).to_string(index=False))
        else:
            lines.append(f'{indent}{key}: {value}')
    return '\n'.join(lines)


def render(report, output_format):
    if output_format == 'text':
        return render_text(report)
    return render_json(report)


# Define the command line interface
def cli(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--format', choices=['json', 'text'], default='json',
        help='Report format on standard output. Defaults to json.'
    )
    common.add_argument(
        '--config', type=readable,
        help='INI configuration file with [numeric] and [budgets] sections'
    )
    common.add_argument(
        '-o', '--output', type=available,
        help='Write the report to this file instead of standard output'
    )
    common.add_argument(
        '-l', '--log-level', metavar='LEVEL',
        choices=LOG_LEVELS, default='WARNING',
        help="Set the minimum logging level. Defaults to WARNING.\n"
            "Options, in most to least verbose order, are:\n"
            f"    {log_levels_str}"
    )

    parser = argparse.ArgumentParser(
        description='Construct and analyze grand couplings of finite Markov chains',
        formatter_class=argparse.RawTextHelpFormatter
    )
    subparsers = parser.add_subparsers(dest='subcommand', metavar='SUBCOMMAND', required=True)

    def add(name, handler, help_text, *flags):
        sub = subparsers.add_parser(name, parents=[common], help=help_text, description=help_text,
                                    formatter_class=argparse.RawTextHelpFormatter)
        for flag in flags:
            flag(sub)
        sub.set_defaults(handler=handler)
        return sub

    def matrix(sub):
        sub.add_argument('--matrix', type=readable_or_stdin, required=True,
                         help='Transition matrix JSON ("-" for standard input)')

    def measure(sub):
        sub.add_argument('--measure', type=readable_or_stdin, required=True,
                         help='Function measure JSON ("-" for standard input)')

    def partition(sub):
        sub.add_argument('--partition', type=readable_or_stdin, required=True,
                         help='Partition JSON, e.g. [[1,2],[3,4,5]]')

    def functions(sub):
        sub.add_argument('--functions', type=readable_or_stdin, required=True,
                         help='Function set JSON ("-" for standard input)')

    def seed(sub):
        sub.add_argument('--seed', type=int, default=DEFAULT_SEED,
                         help=f'Random seed. Defaults to {DEFAULT_SEED}.')

    def horizon(sub):
        sub.add_argument('--horizon', type=positive_int,
                         help='Maximum number of steps. Defaults to 50 * n / (smallest atom weight).')

    def size(sub):
        sub.add_argument('--n', type=positive_int, required=True, help='Number of states')
        sub.add_argument('--ell', type=positive_int, required=True, help='Number of classes, a divisor of n')

    def state_budget(sub):
        sub.add_argument('--budget', type=positive_int,
                         help='Maximum multichain states to visit. Defaults to the configured state budget.')

    add('validate', run_validate, 'Validate a transition matrix', matrix)
    add('invariant', run_invariant, 'Invariant distribution of an irreducible matrix', matrix)
    add('period', run_period, 'Period and cyclic classes', matrix)
    add('bvn', run_bvn, 'Birkhoff-von Neumann decomposition of a doubly stochastic matrix', matrix)
    add('indep', run_indep, 'Independence coupling of a matrix', matrix)
    add('unique', run_unique, 'Decide whether a matrix has a unique grand coupling', matrix)
    add('consistent', run_consistent, 'Check a measure against a matrix', matrix, measure)
    add('coalesce', run_coalesce, 'Exact coalescence number and limit partitions', measure, state_budget)
    pairwise = add('pairwise', run_pairwise, 'Can two states ever coalesce', measure)
    pairwise.add_argument('--states', type=positive_int, nargs=2, required=True, metavar=('I', 'J'))
    add('simulate', run_simulate, 'Forward simulation to a stable partition', measure, seed, horizon)
    add('cftp', run_cftp, 'Coupling from the past', measure, seed, horizon)
    add('kmax', run_kmax, 'Bounds on the largest achievable coalescence number', matrix)
    add('lump', run_lump, 'Lumpability test for one partition', matrix, partition)
    add('lump-all', run_lump_all, 'All non-trivial partitions a rational matrix lumps to', matrix)
    add('necessary', run_necessary, 'Necessary conditions for a block measure', matrix, partition)
    add('blockcheck', run_blockcheck, 'Check whether a measure is a block measure', measure, partition)
    add('classes', run_classes, 'Are the coalescence classes almost surely constant', measure)
    product = add('product', run_product, 'Two-stage product measure over a lumping partition',
                  matrix, partition)
    product.add_argument('--rho', type=readable_or_stdin,
                         help='Permutation mixture JSON; derived by BvN decomposition when omitted')
    product.add_argument('--verify', action='store_true',
                         help='Report whether the product measure is a block measure instead')
    add('universal-block', run_universal_block, 'Universal block measure of a partition', partition)
    add('construct-nonblock', run_construct_nonblock, 'Non-block coupling of P_n with k = ell', size)
    add('construct-pnblock', run_construct_pnblock, 'Block coupling of P_n with k = ell', size)
    member = add('member', run_member, 'Is the matrix realizable inside a function set', matrix, functions)
    member.add_argument('--mode', choices=['subset', 'exact'], default='subset',
                        help='subset: support inside the set; exact: support equal to the set')
    fxy = add('family-fxy', run_family_fxy, 'The near-identity function family')
    fxy.add_argument('--n', type=positive_int, required=True, help='Number of states')
    estimate = add('estimate', run_estimate, 'Monte Carlo share of random matrices realizable inside a set',
                   functions, seed)
    estimate.add_argument('--samples', type=positive_int, default=1000,
                          help='Number of sampled matrices. Defaults to 1000.')
    explore = add('explore-k', run_explore_k, 'Search achievable coalescence numbers', matrix, seed)
    explore.add_argument('--budget', type=positive_int, default=1000,
                         help='Maximum candidate supports to test. Defaults to 1000.')
    explore.add_argument('--strategy', choices=list(inverse.STRATEGIES), default=inverse.EXHAUSTIVE)
    explore.add_argument('--max-support', type=positive_int,
                         help='Largest candidate support size for exhaustive-small')

    return parser.parse_args(argv)


def configure_settings(args):
    settings = read_config(args.config) if args.config else Settings()
    return configure(from_environment(settings))


# Define the main function
def main(argv=None):
    # Parse the command line
    args = cli(argv)

    # Set up logging
    logging.basicConfig(stream=sys.stderr, format=LOG_FORMAT, level=args.log_level)

    try:
        settings = configure_settings(args)
        run = RunConfig.from_args(args)
        debug(f'{run} with {settings}')
        report = args.handler(args)
    except CouplingError as e:
        print(f'{type(e).__name__}: {e}', file=sys.stderr)
        return 1
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        print(f'InvalidInput: {e}', file=sys.stderr)
        return 1

    write_report(render(report, args.format), args.output)
    info(f'{args.subcommand} finished')
    return 0


if __name__ == '__main__':
    sys.exit(main())
