"""Robust movable-antenna placement and beamforming under imperfect CSI."""
from .channel import (
    ChannelMap,
    PathSet,
    SamplingGrid,
    build_channel_map,
    channel_at_positions,
    field_response,
    synthesize_paths,
)
from .csi_error import GaussianModel, NormBoundedModel, sample_gaussian_error, worst_case_error
from .errors import (
    ConsistencyError,
    DegenerateChannelError,
    EnumerationLimitError,
    InfeasibleError,
    InvalidParameterError,
    RobustMAError,
)
from .outage import OutageEstimate, simulate_outage, validate_bernstein
from .placement import (
    PlacementSelection,
    fpa_positions,
    fpa_with_as,
    optimize_placement_bruteforce,
    optimize_placement_dp,
)
from .robust import (
    RHO_THRESHOLD,
    BernsteinResult,
    Beamformer,
    Branch,
    WorstCaseResult,
    bernstein_lhs,
    bernstein_r0,
    f_of_y,
    f_prime,
    mrt,
    received_power,
    worst_case_power,
    y_extreme,
    y_zero,
)

__version__ = "0.1.0"
