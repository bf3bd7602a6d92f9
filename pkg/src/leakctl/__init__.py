"""Simulation and tune-up toolkit for leakage suppression via small static
parameter offsets in driven few-level systems."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateTrajectory,
    DimError,
    DivergentDuration,
    FitError,
    IntegrationError,
    InvalidOperator,
    LabelError,
    LeakctlError,
    OptError,
    SingularAnharmonicity,
)
from .framework import MagnusReport, error_propagator, magnus_residual
from .metrics import (
    Channel,
    averaged_fidelity_1q,
    averaged_fidelity_1q_unitary,
    averaged_fidelity_2q,
    iswap_ideal,
    leakage_population,
    populations,
    state_fidelity,
    trace_gate_fidelity,
)
from .models import (
    LadderModel,
    OffsetSet,
    SingleQubitModel,
    TwoQubitModel,
    ZERO_OFFSETS,
    iswap_duration,
)
from .propagation import (
    EvolutionResult,
    IntegratorConfig,
    lindblad_evolve,
    propagate_unitary,
)
from .pulses import (
    GtcParams,
    PulseSchedule,
    Segment,
    drag_fields,
    duration_for_area,
    gtc_schedule,
    sine_envelope,
)
from .scenarios import (
    DEFAULT_GTC_PARAMS,
    DEFAULT_PARAMS,
    PhysicalParams,
    Scenario,
    build_scenario,
    decoherent_fidelity,
    drag_scenario,
    leak_fidelity,
    population_trajectory,
)
from .tuneup import (
    CalibrationError,
    DragComparison,
    OptimizationResult,
    QuadFit,
    SweepSpec,
    drag_compare,
    fit_quadratic,
    gtc_crosstalk_study,
    optimize_offsets,
    quantize_offsets,
    robustness_grid,
    scenario_objective,
    sweep,
)
