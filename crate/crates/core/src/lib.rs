//! Piecewise polynomial joint trajectories built from three-segment
//! constraint schemes (4-3-4, 5-4-5, 6-5-6, two constraint variants each),
//! with accuracy metrics against a reference, via-point continuity analysis,
//! a PD-tracked hip joint simulation and a generation-time benchmark.

pub mod cli;
pub mod metrics;
pub mod poly;
pub mod scheme;
pub mod sim;
pub mod solve;

pub use metrics::{
    ade, continuity_report, mae, rmse, sample, via_point_rmse, ContinuityReport, MetricsReport,
    SampledSeries,
};
pub use poly::{DerivativeOrder, Kinematics, Polynomial};
pub use scheme::{
    builtin_scheme, builtin_scheme_by_name, generate_gait, generate_phase, PhaseInput, PhaseLabel,
    PiecewiseTrajectory, SchemeFamily, SchemeId, SchemeSpec, Waypoint,
};
pub use sim::{simulate_tracking, BodyParams, PdGains, SimOptions};
pub use solve::{assemble_system, residuals, solve_segment, Anchor, Constraint, SolvedSegment};
