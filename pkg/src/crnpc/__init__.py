"""Underlay cognitive-radio power control with interference-channel learning.

A secondary network probes a primary ACM link, senses the resulting MCS
cooperatively, and localizes the unknown normalized interference gains with
cutting-plane methods (analytic center or center of gravity) while
maximizing its own capacity on the estimated constraint.
"""

from .constraints import (
    ConstraintSet,
    GammaRatios,
    InequalityPair,
    binary_to_pair,
    feedback_to_pair,
    gamma_ratios,
    threshold_ratios,
    window_filter,
)
from .control import (
    EpsilonSchedule,
    capacity,
    epsilon,
    exploit_waterfill,
    explore_sample,
)
from .engine import (
    EnsembleResult,
    Feedback,
    Learner,
    RunTrace,
    error_metric,
    flops_to_target,
    run_ensemble,
    run_fading,
    run_indexed,
    run_static,
)
from .errors import (
    ChordCollapse,
    ConfigError,
    DegeneratePolyhedron,
    EmptyPolyhedron,
    EmptySlice,
    EmptyVoteSet,
    NonPositiveThreshold,
    ObservedAboveReference,
    SimulationError,
    TruthOutsidePrior,
    ZeroEstimate,
)
from .polytope import (
    BoundingBox,
    Polyhedron,
    analytic_center,
    bounding_box,
    center_of_gravity,
    chebyshev_center,
    d_max,
    hit_and_run,
    lp_solve,
)
from .pu_link import (
    OUTAGE,
    AcmProtocol,
    McsEntry,
    PuState,
    interference_thresholds,
    pu_sinr,
    select_mcs,
)
from .scenario import (
    FadingConfig,
    ScenarioConfig,
    Topology,
    evolve_block_fading,
    generate_topology,
    load_config,
)
from .sensing import SensingModel, fuse_plurality, su_classify

__version__ = "0.1.0"
