//! Lifting orbit-space objects back to SO(3).
//!
//! An equilibrium `x` of the sphere flow is a rotating wave
//! `A(t) = exp(alpha Q t) A_eps` with `A_eps x = q`; a periodic orbit of
//! period `T` is a modulated wave `A(t) = exp(beta Q t) B(t)` with `B`
//! `T`-periodic. `alpha` comes from conjugating the generator at `x`;
//! `beta` from the monodromy of the inverted flow over one period.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::Serialize;

use crate::analysis::{EquilibriumBranch, PeriodicOrbitBranch};
use crate::error::{Error, Result};
use crate::flows::{flow_group_sampled, flow_inverted, Scenario, Trajectory};
use crate::liegroup::{angle_about, exp_so3, frame_to_pole, Rotation, UnitVector};

const OFF_AXIS_TOL: f64 = 1e-9;
const MONODROMY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveKind {
    Rotating,
    Modulated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveReconstruction {
    pub kind: WaveKind,
    /// `A_eps` for rotating waves, `B(0)` for modulated ones.
    pub base_rotation: Rotation,
    /// `alpha` (rotating) or `beta` (modulated), in radians per unit time.
    pub frequency: f64,
    /// The period of the shape change, modulated waves only.
    pub relative_period: Option<f64>,
    /// `B(t)` over one relative period, modulated waves only.
    pub periodic_part_samples: Option<Trajectory<Rotation>>,
    /// Frobenius distance from the conjugated generator to the `Q` line (rotating),
    /// or from the monodromy axis to `q` (modulated).
    pub residual_off_axis: f64,
    /// Frequency measured from the integrated phase by least squares.
    pub measured_frequency: f64,
    /// Largest distance of the integrated wave from its predicted SO(2) orbit (rotating),
    /// or `|B(T) - B(0)|` (modulated).
    pub consistency_error: f64,
}

/// A rotation `C` with `C q = x`, built from pole frames.
pub fn frame_through(q: &UnitVector, x: &UnitVector) -> Rotation {
    frame_to_pole(x).inverse() * frame_to_pole(q)
}

/// Least-squares slope of `y` against `t`.
fn regression_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let (mt, my) = (t.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let num: f64 = t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let den: f64 = t.iter().map(|a| (a - mt).powi(2)).sum();
    num / den
}

fn unwrap_angles(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut offset = 0.0;
    for (i, a) in raw.iter().enumerate() {
        if i > 0 {
            let prev = raw[i - 1];
            if a - prev > PI {
                offset -= 2.0 * PI;
            } else if a - prev < -PI {
                offset += 2.0 * PI;
            }
        }
        out.push(a + offset);
    }
    out
}

/// The rotating wave through an equilibrium.
pub fn lift_equilibrium(scn: &Scenario, eq: &EquilibriumBranch) -> Result<WaveReconstruction> {
    let q = scn.q_dir();
    let c = frame_through(&q, &eq.location);
    let a_eps = c.inverse();
    let v = a_eps.apply(&scn.total_rate(eq.location.coords()));
    let alpha = v.dot(q.coords());
    let residual = std::f64::consts::SQRT_2 * (v - q.coords() * alpha).norm();
    if residual > OFF_AXIS_TOL {
        return Err(Error::OffAxisResidualExceeded { residual });
    }

    let horizon = 3.0 * scn.period();
    let n = 96;
    let stops: Vec<f64> = (1..n).map(|k| horizon * k as f64 / n as f64).collect();
    let traj = flow_group_sampled(scn, &a_eps, horizon, &stops)?;
    let mut worst: f64 = 0.0;
    let mut times = Vec::with_capacity(n + 1);
    let mut raw = Vec::with_capacity(n + 1);
    for (t, a) in traj.iter() {
        let r = *a * a_eps.inverse();
        let angle = angle_about(&r, q.coords());
        worst = worst.max(a.distance(&(exp_so3(scn.q(), angle) * a_eps)));
        times.push(t);
        raw.push(angle);
    }
    let measured_frequency = regression_slope(&times, &unwrap_angles(&raw));

    Ok(WaveReconstruction {
        kind: WaveKind::Rotating,
        base_rotation: a_eps,
        frequency: alpha,
        relative_period: None,
        periodic_part_samples: None,
        residual_off_axis: residual,
        measured_frequency,
        consistency_error: worst,
    })
}

/// The modulated wave through a periodic orbit.
pub fn lift_periodic(scn: &Scenario, orbit: &PeriodicOrbitBranch) -> Result<WaveReconstruction> {
    let q = scn.q_dir();
    let period = orbit.period_physical;
    let x0 = orbit.orbit_samples.states[0];
    let c0 = frame_through(&q, &x0);

    // one relative period of the inverted flow, tighter than the default so the
    // axis check is not limited by integration error
    let mut tight = scn.clone();
    tight.tolerances.rtol = tight.tolerances.rtol.min(1e-12);
    tight.tolerances.atol = tight.tolerances.atol.min(1e-12);
    let inverted = flow_inverted(&tight, &c0, period, &[])?;
    let (_, c_end) = inverted.last().expect("trajectory has its end state");
    let r = c0.inverse() * *c_end;
    let defect = (r.apply(q.coords()) - q.coords()).norm();
    if defect > MONODROMY_TOL {
        return Err(Error::MonodromyNotAboutQ { defect });
    }
    let theta_r = angle_about(&r, q.coords());
    let beta = -theta_r / period;
    if PI - theta_r.abs() < 5e-4 {
        let other = beta - beta.signum() * 2.0 * PI / period;
        return Err(Error::AmbiguousBranch { a: beta, b: other });
    }

    let n = 128;
    let stops: Vec<f64> = (1..n).map(|k| period * k as f64 / n as f64).collect();
    let a_traj = flow_group_sampled(&tight, &c0.inverse(), period, &stops)?;
    let mut b_traj = Trajectory::new(a_traj.scenario_hash);
    for (t, a) in a_traj.iter() {
        b_traj.push(t, exp_so3(scn.q(), -beta * t) * *a);
    }
    let closure = b_traj.states[0].distance(b_traj.last().unwrap().1);
    // the forward group flow over one period, measured independently of the monodromy
    let (_, a_end) = a_traj.last().unwrap();
    let measured_frequency = angle_about(&(*a_end * a_traj.states[0].inverse()), q.coords()) / period;

    Ok(WaveReconstruction {
        kind: WaveKind::Modulated,
        base_rotation: b_traj.states[0],
        frequency: beta,
        relative_period: Some(period),
        periodic_part_samples: Some(b_traj),
        residual_off_axis: defect,
        measured_frequency,
        consistency_error: closure,
    })
}

/// Both sides of the rotating-wave angle identity:
/// the cosine between the wave's frequency vector `A0 X0` and `q`, and the
/// cosine between its orbit-space point `A0^-1 q` and the rotation axis.
pub fn wave_angle_check(scn: &Scenario, a0: &Rotation) -> (f64, f64) {
    let axis = scn.x1_0();
    let lhs = a0.apply(axis.coords()).dot(scn.q_dir().coords());
    let rhs = a0.inverse().apply(scn.q_dir().coords()).dot(axis.coords());
    (lhs, rhs)
}

/// Orbit-space images of one circle of frequency vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleImage {
    /// Signed heights `p . x1_0` of the projected samples.
    pub heights: Vec<f64>,
}

impl CircleImage {
    /// Distance from the origin to the plane of the image circle.
    pub fn plane_distance(&self) -> f64 {
        (self.heights.iter().sum::<f64>() / self.heights.len() as f64).abs()
    }

    /// Largest deviation of a sample from the common plane.
    pub fn spread(&self) -> f64 {
        let mean = self.heights.iter().sum::<f64>() / self.heights.len() as f64;
        self.heights.iter().map(|h| (h - mean).abs()).fold(0.0, f64::max)
    }

    pub fn signed_height(&self) -> f64 {
        self.heights.iter().sum::<f64>() / self.heights.len() as f64
    }
}

/// Projects rotating waves whose unit frequency vectors run over the circle
/// `{X : X . q = cos_angle}`. `twists` are extra rotations about the
/// unperturbed axis applied before the frame, so the same frequency vector is
/// reached by different group elements.
pub fn project_frequency_circle(scn: &Scenario, cos_angle: f64, samples: usize, twists: &[f64]) -> CircleImage {
    let q = *scn.q_dir().coords();
    let helper = if q[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = q.cross(&helper).normalize();
    let v = q.cross(&u);
    let axis = scn.x1_0();
    let sin_angle = (1.0 - cos_angle * cos_angle).max(0.0).sqrt();
    let mut heights = Vec::with_capacity(samples);
    for k in 0..samples {
        let a = 2.0 * PI * k as f64 / samples as f64;
        let freq = UnitVector::from_unchecked(q * cos_angle + (u * a.cos() + v * a.sin()) * sin_angle);
        let twist = twists[k % twists.len().max(1)];
        let a0 = frame_through(&axis, &freq) * exp_so3(scn.x0(), twist / scn.speed());
        let p = a0.inverse().apply(&q);
        heights.push(p.dot(axis.coords()));
    }
    CircleImage { heights }
}
