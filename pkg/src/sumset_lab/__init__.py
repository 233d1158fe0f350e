"""Exact computational toolkit for sets in G^n whose sumset avoids Z0^n.

Regularity decomposition, pseudorandomness tests, maximal correlation of
couplings and structure extraction, all over materialised bitsets with
exact rational bookkeeping.
"""
from .constructions import (
    ImplicitSet,
    coset_counterexample,
    level_set_family,
    optimality_example,
    tribes,
    tribes_parameters,
)
from .correlation import (
    JointDistribution,
    avoidance_coupling,
    conditional_pair,
    is_rho_one,
    maximal_correlation_pair,
    rho,
)
from .counting import count_tuples_into, empirical_count_ratio, tuple_space_size
from .errors import *  # noqa: F401,F403
from .groups import (
    FiniteAbelianGroup,
    GroupSubset,
    QuotientMap,
    is_in_strict_coset,
    make_group,
    quotient,
    subgroup_generated,
)
from .regularity import RegularityParams, decompose, energy, fiber_psr_fraction, is_pseudorandom
from .structure import StructureCertificate, StructureParams, extract_structure, verify_certificate
from .tensor_sets import (
    CombinerTable,
    TensorSet,
    avoids,
    cylinder,
    density,
    generic_avoids,
    generic_image,
    restrict,
    sumset,
)

__version__ = "0.1.0"
