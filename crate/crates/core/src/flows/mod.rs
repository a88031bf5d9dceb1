//! The three equivalent dynamical systems and the projection between them.
//!
//! - group flow: `A' = A [X0 + eps g(A)]`, with `g(A)` the field at `A^-1 q`;
//! - inverted flow: `C' = -[X0 + eps g(C q)] C`, for `C = A^-1`;
//! - sphere flow: `x' = -[X0 + eps g(x)] x`, the image of both under
//!   `A -> A^-1 q`.
//!
//! [`flow_chart`] runs the sphere flow in the pole frame's spherical
//! coordinates with longitude as the clock.

mod integrator;
mod scenario;
mod trajectory;

use std::f64::consts::PI;

use nalgebra::{Vector2, Vector3};

pub use integrator::{cf4_adaptive, cf4_step, dopri5, Side, StepControl};
pub use scenario::{Scenario, Tolerances};
pub use trajectory::{CsvState, Trajectory};

use crate::error::{Error, Result};
use crate::fields::SphericalPoint;
use crate::liegroup::{Rotation, UnitVector};

fn control(scn: &Scenario) -> StepControl {
    StepControl::new(scn.tolerances.rtol, scn.tolerances.atol, scn.max_step())
}

/// Integrates the group flow from `a0` for `t_end`, sampling every step.
pub fn flow_group(scn: &Scenario, a0: &Rotation, t_end: f64) -> Result<Trajectory<Rotation>> {
    flow_group_sampled(scn, a0, t_end, &[])
}

/// As [`flow_group`], also landing exactly on every time in `stops`.
pub fn flow_group_sampled(scn: &Scenario, a0: &Rotation, t_end: f64, stops: &[f64]) -> Result<Trajectory<Rotation>> {
    let q = scn.q().rate();
    let mut traj = Trajectory::new(scn.hash());
    traj.push(0.0, *a0);
    cf4_adaptive(
        |a| Ok(scn.total_rate(&a.tr_mul(&q))),
        Side::Right,
        a0,
        t_end,
        stops,
        &control(scn),
        |t, a| traj.push(t, *a),
    )?;
    Ok(traj)
}

/// Integrates the inverted flow `C' = -[X0 + eps g(C q)] C` from `c0`.
pub fn flow_inverted(scn: &Scenario, c0: &Rotation, t_end: f64, stops: &[f64]) -> Result<Trajectory<Rotation>> {
    let q = scn.q().rate();
    let mut traj = Trajectory::new(scn.hash());
    traj.push(0.0, *c0);
    cf4_adaptive(
        |c| Ok(-scn.total_rate(&(c * q))),
        Side::Left,
        c0,
        t_end,
        stops,
        &control(scn),
        |t, c| traj.push(t, *c),
    )?;
    Ok(traj)
}

/// Integrates the sphere flow from `x0` for `t_end`, sampling every step.
pub fn flow_sphere(scn: &Scenario, x0: &UnitVector, t_end: f64) -> Result<Trajectory<UnitVector>> {
    flow_sphere_sampled(scn, x0, t_end, &[])
}

/// As [`flow_sphere`], also landing exactly on every time in `stops`.
pub fn flow_sphere_sampled(
    scn: &Scenario,
    x0: &UnitVector,
    t_end: f64,
    stops: &[f64],
) -> Result<Trajectory<UnitVector>> {
    flow_sphere_with(scn, x0, t_end, stops, &control(scn))
}

pub(crate) fn flow_sphere_with(
    scn: &Scenario,
    x0: &UnitVector,
    t_end: f64,
    stops: &[f64],
    ctl: &StepControl,
) -> Result<Trajectory<UnitVector>> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidInput(format!("t_end must be positive, got {t_end}")));
    }
    let mut traj = Trajectory::new(scn.hash());
    traj.push(0.0, *x0);
    dopri5(
        |_, x: &Vector3<f64>| Ok(x.cross(&scn.total_rate(x))),
        0.0,
        *x0.coords(),
        t_end,
        stops,
        ctl,
        |x| *x /= x.norm(),
        |t, x| traj.push(t, UnitVector::from_unchecked(*x)),
    )?;
    Ok(traj)
}

/// The orbit-space point of a group element: `A^-1 q`.
pub fn project(a: &Rotation, scn: &Scenario) -> UnitVector {
    UnitVector::from_unchecked(a.inverse().apply(&scn.q().rate()))
}

/// Colatitude and longitude rates of the sphere flow in the pole frame.
///
/// `phi' = -eps (b cos(theta) - c sin(theta))` and
/// `theta' = -|X0| - eps a + eps cot(phi) (b sin(theta) + c cos(theta))`,
/// evaluated by projecting the Cartesian field on the coordinate directions.
pub fn chart_rates(scn: &Scenario, phi: f64, theta: f64) -> (f64, f64) {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let s = Vector3::new(sp * ct, sp * st, cp);
    let ds = s.cross(&scn.pole_rate(&s));
    let e_phi = Vector3::new(cp * ct, cp * st, -sp);
    let e_theta = Vector3::new(-st, ct, 0.0);
    (ds.dot(&e_phi), ds.dot(&e_theta) / sp)
}

/// Samples of the chart flow with longitude as the independent variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartTrajectory {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Physical time elapsed since the start; positive.
    pub elapsed: Vec<f64>,
}

impl ChartTrajectory {
    pub fn end(&self) -> (f64, f64, f64) {
        let n = self.thetas.len() - 1;
        (self.thetas[n], self.phis[n], self.elapsed[n])
    }
}

/// Integrates `d(phi)/d(theta)` and the elapsed physical time from `p0` up to longitude `theta_end`.
///
/// Longitude decreases in physical time, so increasing `theta` follows the
/// trajectory backward; `elapsed` is the positive duration covered. The full
/// rescaled system is integrated, not a truncation in `eps`.
pub fn flow_chart(scn: &Scenario, p0: &SphericalPoint, theta_end: f64) -> Result<ChartTrajectory> {
    let tol = &scn.tolerances;
    let (lo, hi) = (tol.phi_min, PI - tol.phi_min);
    let guard = 1e-3 * scn.speed();
    let rhs = |theta: f64, y: &Vector2<f64>| -> Result<Vector2<f64>> {
        let phi = y[0];
        if !(phi > lo && phi < hi) {
            return Err(Error::PolarBandExit { theta, phi });
        }
        let (dphi, dtheta) = chart_rates(scn, phi, theta);
        if !(dtheta < -guard) {
            return Err(Error::DegenerateClock { theta, rate: dtheta });
        }
        Ok(Vector2::new(dphi / dtheta, -1.0 / dtheta))
    };
    let ctl = StepControl::new(tol.chart_tol, tol.chart_tol, 2.0 * PI / tol.max_step_divisions);
    let mut out = ChartTrajectory { thetas: vec![p0.theta], phis: vec![p0.phi], elapsed: vec![0.0] };
    rhs(p0.theta, &Vector2::new(p0.phi, 0.0))?;
    dopri5(rhs, p0.theta, Vector2::new(p0.phi, 0.0), theta_end, &[], &ctl, |_| {}, |th, y| {
        out.thetas.push(th);
        out.phis.push(y[0]);
        out.elapsed.push(y[1]);
    })?;
    Ok(out)
}
