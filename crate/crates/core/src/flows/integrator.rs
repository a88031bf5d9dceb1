//! Adaptive integrators.
//!
//! [`dopri5`] is the Dormand-Prince 5(4) pair on `R^N` with an optional
//! projection after every accepted step. [`cf4_adaptive`] integrates
//! `Y' = Y [w(Y)]x` or `Y' = [w(Y)]x Y` on SO(3) with the fourth-order
//! commutator-free exponential method; it has no embedded pair, so the local
//! error comes from step doubling. Both use the same PI step controller.

use nalgebra::{Matrix3, SVector, Vector3};

use crate::error::{Error, Result};
use crate::liegroup::{exp_so3, AlgebraElement, Rotation};

/// Step-control settings shared by both integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(rtol: f64, atol: f64, max_step: f64) -> Self {
        Self { rtol, atol, max_step, initial_step: None, max_steps: 5_000_000 }
    }
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Proportional-integral controller for a method whose error estimate has order 5.
#[derive(Debug, Clone, Copy)]
struct PiController {
    prev_err: f64,
    rejected: bool,
}

impl PiController {
    const ALPHA: f64 = 0.7 / 5.0;
    const BETA: f64 = 0.4 / 5.0;

    fn new() -> Self {
        Self { prev_err: 1e-4, rejected: false }
    }

    /// Returns (accept, factor for the next step).
    fn judge(&mut self, err: f64) -> (bool, f64) {
        if err <= 1.0 {
            let err = err.max(1e-10);
            let mut fac = SAFETY * err.powf(-Self::ALPHA) * self.prev_err.powf(Self::BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if self.rejected {
                fac = fac.min(1.0);
            }
            self.prev_err = err;
            self.rejected = false;
            (true, fac)
        } else {
            self.rejected = true;
            (false, (SAFETY * err.powf(-0.2)).max(FAC_MIN))
        }
    }
}

fn underflow(h: f64, t: f64) -> bool {
    !(h > 1e-14 * t.abs().max(1.0))
}

/// Next stop strictly after `t`, if any.
fn next_stop(stops: &[f64], idx: &mut usize, t: f64) -> Option<f64> {
    while *idx < stops.len() && stops[*idx] <= t {
        *idx += 1;
    }
    stops.get(*idx).copied()
}

/// Clips `h` so the step lands exactly on the next stop or the end.
fn clip(t: f64, h: f64, target: f64) -> (f64, bool) {
    if t + h >= target || target - (t + h) < 1e-12 * h {
        (target - t, true)
    } else {
        (h, false)
    }
}

// Dormand-Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` to `t_end`.
///
/// `project` runs on every accepted state (use it to renormalize onto a
/// manifold). Steps land exactly on every time in `stops` inside
/// `(t0, t_end]`. `observe` sees every accepted state, including the end.
#[allow(clippy::too_many_arguments)]
pub fn dopri5<const N: usize, F, P, O>(
    mut f: F,
    t0: f64,
    y0: SVector<f64, N>,
    t_end: f64,
    stops: &[f64],
    ctl: &StepControl,
    project: P,
    mut observe: O,
) -> Result<SVector<f64, N>>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
    P: Fn(&mut SVector<f64, N>),
    O: FnMut(f64, &SVector<f64, N>),
{
    if !(t_end > t0) {
        return Err(Error::InvalidInput(format!("integration interval [{t0}, {t_end}] is empty")));
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut h = ctl
        .initial_step
        .unwrap_or_else(|| {
            let scale = y.iter().zip(k1.iter()).map(|(yi, ki)| ki.abs() / (ctl.atol + ctl.rtol * yi.abs())).fold(0.0, f64::max);
            if scale > 0.0 { 0.1 * scale.powf(-0.2) } else { ctl.max_step }
        })
        .min(ctl.max_step)
        .min(t_end - t0);
    let mut pi = PiController::new();
    let mut stop_idx = 0;
    let mut steps = 0;
    while t < t_end {
        steps += 1;
        if steps > ctl.max_steps || underflow(h, t) {
            return Err(Error::StepSizeUnderflow { t });
        }
        let target = next_stop(stops, &mut stop_idx, t).filter(|s| *s < t_end).unwrap_or(t_end);
        let (hs, lands) = clip(t, h, target);

        let k2 = f(t + C2 * hs, &(y + k1 * (A21 * hs)))?;
        let k3 = f(t + C3 * hs, &(y + (k1 * A31 + k2 * A32) * hs))?;
        let k4 = f(t + C4 * hs, &(y + (k1 * A41 + k2 * A42 + k3 * A43) * hs))?;
        let k5 = f(t + C5 * hs, &(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * hs))?;
        let k6 = f(t + hs, &(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * hs))?;
        let y_new = y + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * hs;
        let k7 = f(t + hs, &y_new)?;
        let err_vec = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * hs;

        let mut sum = 0.0;
        for i in 0..N {
            let sc = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
            sum += (err_vec[i] / sc).powi(2);
        }
        let err = (sum / N as f64).sqrt();
        let (accept, fac) = pi.judge(err);
        if accept {
            t = if lands { target } else { t + hs };
            y = y_new;
            project(&mut y);
            observe(t, &y);
            if t < t_end {
                k1 = f(t, &y)?;
            }
            // a step clipped onto a stop keeps the controller's earlier proposal
            let proposed = h;
            h = (hs * fac).min(ctl.max_step);
            if lands {
                h = h.max(proposed.min(ctl.max_step));
            }
        } else {
            h = hs * fac;
        }
    }
    Ok(y)
}

/// Which side the generator multiplies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `Y' = Y [w(Y)]x`
    Right,
    /// `Y' = [w(Y)]x Y`
    Left,
}

/// `exp([v]x)`, the rotation by `|v|` about `v`.
fn exp_rate(v: &Vector3<f64>) -> Matrix3<f64> {
    *exp_so3(&AlgebraElement::from_rate(*v), 1.0).matrix()
}

/// One step of the fourth-order commutator-free method.
pub fn cf4_step<F>(y: &Matrix3<f64>, h: f64, side: Side, rate: &mut F) -> Result<Matrix3<f64>>
where
    F: FnMut(&Matrix3<f64>) -> Result<Vector3<f64>>,
{
    let mul = |e: Matrix3<f64>, y: &Matrix3<f64>| match side {
        Side::Left => e * y,
        Side::Right => y * e,
    };
    let f1 = rate(y)?;
    let y2 = mul(exp_rate(&(f1 * (0.5 * h))), y);
    let f2 = rate(&y2)?;
    let y3 = mul(exp_rate(&(f2 * (0.5 * h))), y);
    let f3 = rate(&y3)?;
    let y4 = mul(exp_rate(&((f3 - f1 * 0.5) * h)), &y2);
    let f4 = rate(&y4)?;
    let first = exp_rate(&((f1 * 3.0 + f2 * 2.0 + f3 * 2.0 - f4) * (h / 12.0)));
    let second = exp_rate(&((-f1 + f2 * 2.0 + f3 * 2.0 + f4 * 3.0) * (h / 12.0)));
    Ok(match side {
        Side::Left => second * first * y,
        Side::Right => y * first * second,
    })
}

/// Adaptive CF4 on SO(3) with step-doubling error control.
pub fn cf4_adaptive<F, O>(
    mut rate: F,
    side: Side,
    y0: &Rotation,
    t_end: f64,
    stops: &[f64],
    ctl: &StepControl,
    mut observe: O,
) -> Result<Rotation>
where
    F: FnMut(&Matrix3<f64>) -> Result<Vector3<f64>>,
    O: FnMut(f64, &Rotation),
{
    if !(t_end > 0.0) {
        return Err(Error::InvalidInput(format!("t_end must be positive, got {t_end}")));
    }
    let mut t = 0.0;
    let mut y = *y0.matrix();
    let w0 = rate(&y)?.norm();
    let mut h = ctl
        .initial_step
        .unwrap_or(if w0 > 0.0 { 0.1 / w0 } else { ctl.max_step })
        .min(ctl.max_step)
        .min(t_end);
    let mut pi = PiController::new();
    let mut stop_idx = 0;
    let mut steps = 0;
    while t < t_end {
        steps += 1;
        if steps > ctl.max_steps || underflow(h, t) {
            return Err(Error::StepSizeUnderflow { t });
        }
        let target = next_stop(stops, &mut stop_idx, t).filter(|s| *s < t_end).unwrap_or(t_end);
        let (hs, lands) = clip(t, h, target);
        let big = cf4_step(&y, hs, side, &mut rate)?;
        let mid = cf4_step(&y, 0.5 * hs, side, &mut rate)?;
        let fine = cf4_step(&mid, 0.5 * hs, side, &mut rate)?;
        // entries are bounded by 1, so a single scale serves all of them
        let err = (fine - big).amax() / 15.0 / (ctl.atol + ctl.rtol);
        let (accept, fac) = pi.judge(err);
        if accept {
            t = if lands { target } else { t + hs };
            y = *Rotation::from_matrix_unchecked(fine).renormalized().matrix();
            observe(t, &Rotation::from_matrix_unchecked(y));
            let proposed = h;
            h = (hs * fac).min(ctl.max_step);
            if lands {
                h = h.max(proposed.min(ctl.max_step));
            }
        } else {
            h = hs * fac;
        }
    }
    Ok(Rotation::from_matrix_unchecked(y))
}
