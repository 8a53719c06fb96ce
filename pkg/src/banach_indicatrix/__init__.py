"""Dyadic cube systems on finite metric spaces and the Banach indicatrix of sampled mappings."""
from .dyadic_system import (
    DyadicCube,
    DyadicParams,
    DyadicSystem,
    PropertyReport,
    auto_params,
    build_dyadic_system,
    cube_members,
    verify_properties,
)
from .exhaustion import ExhaustionSequence, build_exhaustion, redefine_on_complement
from .indicatrix import (
    MatchRule,
    MultiplicityProfile,
    SampledMapping,
    count_level,
    exact_multiplicity,
    level_indicator,
    limit_multiplicity,
    multiplicity_profile,
    sampled_mapping,
)
from .metric_space import PointCloudSpace, ball, build_point_cloud, estimate_doubling, measure
from .variation import (
    IdentityReport,
    Sampled1DFunction,
    banach_check,
    change_of_variables_check,
    crossing_count,
    integrate_indicatrix,
    total_variation,
)

__version__ = "0.1.0"
