//! Equilibria, persistent periodic orbits and the phase portrait of the
//! sphere flow for small `eps`.
//!
//! Stability is always read off the actual linearization (eigenvalues at
//! equilibria, return-map multipliers at orbits). First-order sign criteria
//! are computed next to it; at equilibria a disagreement is an error, at
//! orbits the relation is recorded.

mod chart;
mod equilibrium;
mod melnikov;
mod poincare;
mod survey;

use serde::Serialize;

pub use chart::{chart_jacobian, chart_point, chart_vector_field, Pole};
pub use equilibrium::{
    eigenvalues_2x2, find_equilibrium, first_order_prediction, trace_coefficient, EquilibriumBranch,
};
pub use melnikov::{melnikov_di, melnikov_i, melnikov_roots, periodic_trapezoid, MelnikovProfile, MelnikovRoot};
pub use poincare::{
    classify_multiplier, continue_periodic_orbit, poincare_map, return_derivative, PeriodicOrbitBranch, ReturnPoint,
};
pub use survey::{
    distance_to_orbit, fibonacci_seeds, limit_set_survey, survey_horizon, LimitObject, SurveyEntry,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        })
    }
}
