//! Stationary points, metric reconstruction, monotonicity monitors and
//! asymptotic diagnostics.

mod claims;
mod compare;
mod critical;
mod monotonicity;
mod reconstruct;
mod report;
mod ricci_flat;
pub mod stats;

pub use claims::{ClaimFlag, Relation};
pub use compare::{oracle_compare, OracleReport};
pub use critical::{critical_points, f_hat_minimum, point_e, subset_point, StationaryKind, StationaryPoint};
pub use monotonicity::{monotonicity_monitors, SKIP, SLACK};
pub use reconstruct::{
    arclength, reconstruct_ricci_flat_metric, reconstruct_soliton_metric, round_trip, xy_states, MetricSeries,
    RoundTrip,
};
pub use report::{asymptotic_report, DiagnosticsReport, XyLimits, DEFAULT_TAIL_FRACTION};
pub use ricci_flat::{ricci_flat_convergence, CONVERGENCE_TOL};
