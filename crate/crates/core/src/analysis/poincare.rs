//! The return map to the half-meridian `theta = 0` and its fixed points.
//!
//! `poincare_map` follows one full turn of longitude from 0 to `2 pi`.
//! Longitude decreases in physical time, so this map `P` runs the flow
//! backward; it is the map with `P(phi) = phi + (eps/|X0|) I(phi) + O(eps^2)`.
//! The forward-time return map is `P^-1`, and the multiplier reported for a
//! periodic orbit is its derivative `1 / P'`.

use std::f64::consts::PI;

use super::melnikov::melnikov_di;
use super::Stability;
use crate::error::{Error, Result};
use crate::fields::SphericalPoint;
use crate::flows::{flow_chart, flow_sphere_sampled, Scenario, Trajectory};
use crate::liegroup::UnitVector;

const FD_STEP: f64 = 1e-6;
const MAX_ITER: usize = 40;

/// One turn of longitude from `(phi1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnPoint {
    pub phi_return: f64,
    /// Physical duration of the turn.
    pub t_return: f64,
}

pub fn poincare_map(scn: &Scenario, phi1: f64) -> Result<ReturnPoint> {
    let p0 = SphericalPoint::new(phi1, 0.0)?;
    let (_, phi_return, t_return) = flow_chart(scn, &p0, 2.0 * PI)?.end();
    Ok(ReturnPoint { phi_return, t_return })
}

/// `P(phi) - phi`.
fn displacement(scn: &Scenario, phi: f64) -> Result<f64> {
    Ok(poincare_map(scn, phi)?.phi_return - phi)
}

/// `P'(phi)` by central difference on the displacement, so that the identity map gives exactly 1.
pub fn return_derivative(scn: &Scenario, phi: f64) -> Result<f64> {
    let dp = displacement(scn, phi + FD_STEP)?;
    let dm = displacement(scn, phi - FD_STEP)?;
    Ok(1.0 + (dp - dm) / (2.0 * FD_STEP))
}

/// A periodic orbit continued from a simple zero of the persistence integral.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbitBranch {
    pub phi0: f64,
    pub epsilon: f64,
    /// Fixed point of the return map.
    pub fixed_phi: f64,
    /// `|P(fixed_phi) - fixed_phi|`.
    pub fixed_point_residual: f64,
    /// Physical period.
    pub period_physical: f64,
    /// Derivative of the forward-time return map at the fixed point.
    pub multiplier: f64,
    /// `P'` at the fixed point.
    pub backward_derivative: f64,
    pub stability: Stability,
    /// `I'(phi0)`.
    pub integral_slope: f64,
    /// Whether "negative integral slope means stable" matches `stability`.
    pub slope_criterion_agrees: bool,
    /// One period of the orbit in the original frame.
    pub orbit_samples: Trajectory<UnitVector>,
    pub iterations: usize,
}

/// Stability of a forward return map with derivative `multiplier`.
pub fn classify_multiplier(multiplier: f64) -> Stability {
    if multiplier.abs() < 1.0 - 1e-10 {
        Stability::Stable
    } else if multiplier.abs() > 1.0 + 1e-10 {
        Stability::Unstable
    } else {
        Stability::Marginal
    }
}

/// Newton on `P(phi) - phi` from `phi0`, then one sampled revolution.
pub fn continue_periodic_orbit(scn: &Scenario, phi0: f64) -> Result<PeriodicOrbitBranch> {
    let tol = scn.tolerances.newton;
    let mut phi = phi0;
    let mut d = displacement(scn, phi)?;
    let mut iterations = 0;
    while d.abs() > tol {
        if iterations == MAX_ITER {
            return Err(Error::NewtonDivergence(format!("fixed point not reached, |P - phi| = {:e}", d.abs())));
        }
        iterations += 1;
        let slope = return_derivative(scn, phi)? - 1.0;
        if !(slope.abs() > 1e-14) {
            return Err(Error::NonSimpleRoot { slope });
        }
        let step = d / slope;
        phi -= step;
        if !(phi > scn.tolerances.phi_min && phi < PI - scn.tolerances.phi_min) || (phi - phi0).abs() > 0.5 {
            return Err(Error::NewtonDivergence(format!("iterate {phi} left the admissible band")));
        }
        d = displacement(scn, phi)?;
        if step.abs() < 1e-15 {
            break;
        }
    }
    let ret = poincare_map(scn, phi)?;
    let backward_derivative = return_derivative(scn, phi)?;
    let multiplier = 1.0 / backward_derivative;
    let stability = classify_multiplier(multiplier);
    let integral_slope = melnikov_di(scn, phi0);
    let slope_says = if integral_slope < 0.0 { Stability::Stable } else { Stability::Unstable };

    let s0 = SphericalPoint::new(phi, 0.0)?.to_cartesian();
    let x0 = UnitVector::normalize(scn.frame().inverse().apply(&s0))?;
    let n = 256;
    let stops: Vec<f64> = (1..n).map(|k| ret.t_return * k as f64 / n as f64).collect();
    let orbit_samples = flow_sphere_sampled(scn, &x0, ret.t_return, &stops)?;

    Ok(PeriodicOrbitBranch {
        phi0,
        epsilon: scn.epsilon(),
        fixed_phi: phi,
        fixed_point_residual: d.abs(),
        period_physical: ret.t_return,
        multiplier,
        backward_derivative,
        stability,
        integral_slope,
        slope_criterion_agrees: slope_says == stability,
        orbit_samples,
        iterations,
    })
}
