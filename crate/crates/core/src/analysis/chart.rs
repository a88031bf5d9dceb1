//! The sphere flow near a pole in the pole frame, in the graph coordinates
//! `(x1, x2)` with `x3 = +-sqrt(1 - x1^2 - x2^2)`.
//!
//! ```text
//! H1 = |X0| x2 + eps (G1 x2 - G2 x3)
//! H2 = -|X0| x1 - eps (G1 x1 - G3 x3)
//! ```
//!
//! The south chart is the same expression with the negative root, which is
//! the north chart of the antipodal field. Signs that differ between the two
//! poles all come from `x3` and its derivatives here.

use nalgebra::{Matrix2, Vector2, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flows::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pole {
    /// The side of the unperturbed rotation axis.
    North,
    /// The antipodal side.
    South,
}

impl Pole {
    /// Sign of `x3` on this pole's chart.
    pub fn sign(self) -> f64 {
        match self {
            Pole::North => 1.0,
            Pole::South => -1.0,
        }
    }
}

/// Lifts chart coordinates to the sphere (pole frame).
pub fn chart_point(scn: &Scenario, pole: Pole, x1: f64, x2: f64) -> Result<Vector3<f64>> {
    let r2 = x1 * x1 + x2 * x2;
    if !(r2 < 1.0 - scn.tolerances.chart_delta) {
        return Err(Error::ChartDomainExceeded { x1, x2 });
    }
    Ok(Vector3::new(x1, x2, pole.sign() * (1.0 - r2).sqrt()))
}

/// `(H1, H2)` at chart coordinates `(x1, x2)`.
pub fn chart_vector_field(scn: &Scenario, pole: Pole, x1: f64, x2: f64) -> Result<(f64, f64)> {
    let s = chart_point(scn, pole, x1, x2)?;
    let ds = s.cross(&scn.pole_rate(&s));
    Ok((ds[0], ds[1]))
}

/// Exact Jacobian of `(H1, H2)` with respect to `(x1, x2)`.
pub fn chart_jacobian(scn: &Scenario, pole: Pole, x1: f64, x2: f64) -> Result<Matrix2<f64>> {
    let s = chart_point(scn, pole, x1, x2)?;
    let w = scn.pole_rate(&s);
    let dw = scn.field().rate_jacobian(&s) * scn.epsilon();
    let mut jac = Matrix2::zeros();
    for (col, ds) in [Vector3::new(1.0, 0.0, -x1 / s[2]), Vector3::new(0.0, 1.0, -x2 / s[2])].iter().enumerate() {
        let d = ds.cross(&w) + s.cross(&(dw * ds));
        jac[(0, col)] = d[0];
        jac[(1, col)] = d[1];
    }
    Ok(jac)
}

/// Residual of the chart field as a vector.
pub(crate) fn chart_residual(scn: &Scenario, pole: Pole, x: &Vector2<f64>) -> Result<Vector2<f64>> {
    chart_vector_field(scn, pole, x[0], x[1]).map(|(h1, h2)| Vector2::new(h1, h2))
}
