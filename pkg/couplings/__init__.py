from couplings.coalescence import (
    CoalescenceReport, Partition, exact_coalescence, kmax_upper_bounds, pairwise_coalescence_possible,
    simulate_cftp, simulate_forward,
)
from couplings.constructions import (
    PermutationMixture, nonblock_measure, pn_block_measure, product_measure, universal_block_measure,
    verify_product_block,
)
from couplings.errors import CouplingError
from couplings.inverse import (
    FunctionSet, LpCertificate, estimate_leb_measure, explore_K, family_fxy, membership,
)
from couplings.lumpability import (
    block_measure_check, deterministic_classes_check, enumerate_lumpable_partitions, lumpability_test,
    necessary_conditions_check,
)
from couplings.matrix_core import (
    TransitionMatrix, bvn_decompose, invariant_distribution, is_irreducible, period_and_cyclic_classes,
    sample_random_matrix, validate_stochastic,
)
from couplings.measures import (
    FunctionMeasure, StateFunction, independence_coupling, is_consistent, parse_function, push_forward,
    uniqueness_of_coupling,
)
from couplings.settings import Settings, configure, current


__version__ = '0.1.0'
