"""Critical transmission range analysis for airborne backbone networks.

Given the circular (or otherwise predictable) flight paths of a fleet of
airborne networking platforms, compute the exact time-varying topology and
the smallest transmission range that keeps the fleet connected: always
(CTR), under any single region failure (CTR_f), or within a delay bound
(CTR_D).
"""

from .dtn import (
    TopologySequence,
    compute_ctr_d,
    connected_with_delay,
    connected_with_delay_all_starts,
    d_max,
    delay_bound,
    superimposed_connected,
    temporal_delays,
    topology_sequence,
)
from .errors import DomainError, InfeasibleError, PackingError, ScenarioError, UnsupportedError
from .fault import (
    FaultPoint,
    compute_ctr_f,
    coverage_timeline,
    existence_intervals,
    fault_point_location,
    region_based_connectivity,
)
from .kinematics import (
    AnalysisHorizon,
    AngularVelocity,
    OrbitSpec,
    ParametricPath,
    common_period,
    pairwise_distance_squared,
    threshold_crossings,
)
from .scenario import Area, Scenario, generate_random_scenario, parse_scenario, serialize_scenario
from .timeline import EventTimeline, build_link_timeline, intervals, merge_timelines
from .topology import Snapshot, always_connected, compute_ctr, is_connected

__version__ = "0.1.0"
