"""RIS-aided UAV downlink: hybrid offline-online rate optimization and benchmarks."""

__version__ = "0.1.0"

from .config import (  # noqa: F401
    ConfigError,
    GeometryError,
    ScaHyperParams,
    ScenarioConfig,
    SolverError,
    SscaHyperParams,
    desk_scenario,
    load_config,
    full_scale_scenario,
    save_config,
    with_beta_db,
    with_horizon,
)
from .channel import ChannelBatch, ChannelSample, ChannelSampler, distances, los_components  # noqa: F401
from .rate import (  # noqa: F401
    BeamVector,
    EvalResult,
    PhaseVector,
    effective_channel,
    mc_expected_rate,
    mrt_beamformer,
    rate,
)
from .scheduling import ScheduleMatrix, offline_schedule, online_schedule  # noqa: F401
from .ssca import PhaseSchedule, SscaState, batch_objective, optimize_phases, phase_gradient, ssca_step  # noqa: F401
from .trajectory import (  # noqa: F401
    ConvexSubproblem,
    SlackVars,
    SolveReport,
    Trajectory,
    abc_coefficients,
    build_subproblem,
    sca_trajectory,
    solve_subproblem,
    straight_line,
    taylor_rate,
)
from .pipeline import (  # noqa: F401
    SCHEMES,
    CampaignResult,
    OfflineSolution,
    offline_optimize,
    online_run,
    run_scheme,
    sweep,
    write_campaign,
)
