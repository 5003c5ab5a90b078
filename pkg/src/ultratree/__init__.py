"""Finite ultrametric spaces, R-trees and non-surjectivity certificates for contractive maps."""

__version__ = "0.1.0"

from .contraction import (
    CertificationError,
    ContractivePartition,
    DeficiencyCertificate,
    InsufficientDepth,
    NotContractive,
    PartitionFailure,
    SelfMap,
    banach_fixed_point,
    contractive_ball_partition,
    deficiency_certificate,
    find_contractive_nbhd,
    is_level_contractive,
    lipschitz_constant,
    radial_modulus,
    radial_report,
    shrink_check,
    surjectivity_oracle,
)
from .dynamics import contractive_nonminimality, eventual_image, minimality_check, orbit
from .metric import (
    ZERO,
    Ball,
    Dist,
    DistanceLadder,
    FiniteUltrametricSpace,
    MalformedInputError,
    ViolationWitness,
    ball_members,
    check_ball_laws,
    diameter,
    partition_into_balls,
    uniform_value_partition,
    validate_ultrametric,
)
from .rtree import (
    RNode,
    RTree,
    TreeIsometry,
    build_tree,
    cantor,
    cone_members,
    end_distance,
    generate_from_ladder,
    incompatible,
    is_perfect_truncation,
    nodes_at_level,
    padic,
    random_perfect,
    realize_space,
)

__all__ = [
    "__version__",
    "Ball",
    "CertificationError",
    "ContractivePartition",
    "DeficiencyCertificate",
    "Dist",
    "DistanceLadder",
    "FiniteUltrametricSpace",
    "InsufficientDepth",
    "MalformedInputError",
    "NotContractive",
    "PartitionFailure",
    "RNode",
    "RTree",
    "SelfMap",
    "TreeIsometry",
    "ViolationWitness",
    "ZERO",
    "ball_members",
    "banach_fixed_point",
    "build_tree",
    "cantor",
    "check_ball_laws",
    "cone_members",
    "contractive_ball_partition",
    "contractive_nonminimality",
    "deficiency_certificate",
    "diameter",
    "end_distance",
    "eventual_image",
    "find_contractive_nbhd",
    "generate_from_ladder",
    "incompatible",
    "is_level_contractive",
    "is_perfect_truncation",
    "lipschitz_constant",
    "minimality_check",
    "nodes_at_level",
    "orbit",
    "padic",
    "partition_into_balls",
    "radial_modulus",
    "radial_report",
    "random_perfect",
    "realize_space",
    "shrink_check",
    "surjectivity_oracle",
    "uniform_value_partition",
    "validate_ultrametric",
]
