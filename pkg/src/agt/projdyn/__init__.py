"""Projective dynamics over the reals."""
from .contraction import (
    ContractionCertificate,
    contraction_check,
    contraction_radius,
    contraction_ratio_threshold,
    lipschitz_constant_bound,
    lipschitz_ratio_bound,
    local_lipschitz,
    pick_contracting_level,
)
from .linalg import (
    KAKDecomp,
    act_hyperplane,
    act_point,
    exterior_power,
    hyperplane_distance,
    kak,
    proj_metric,
)
from .commutator import (
    CommutatorReport,
    IteratedReport,
    commutator,
    commutator_defect,
    iterated_commutators,
    random_perturbation,
)
from .separation import SeparatingFamily, separating_search
from .tits import PingPongCert, PipelineParams, construct_free_pair
