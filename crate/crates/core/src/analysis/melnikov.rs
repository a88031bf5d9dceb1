//! The persistence integral
//!
//! ```text
//! I(phi) = integral over t in [0, 2 pi] of  b(phi, t) cos t - c(phi, t) sin t
//! ```
//!
//! with `b = G2`, `c = G3` on the circle of colatitude `phi`. Simple zeros
//! mark the circles of the unperturbed foliation that persist as periodic
//! orbits.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::flows::Scenario;

const MAX_NODES: usize = 1 << 16;

/// Composite trapezoid on a `2 pi`-periodic integrand, doubling until two
/// successive values agree to `tol`.
pub fn periodic_trapezoid(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let mut n = 8;
    let h = |n: usize| 2.0 * PI / n as f64;
    let mut sum: f64 = (0..n).map(|k| f(k as f64 * h(n))).sum();
    let mut prev = sum * h(n);
    loop {
        // the new nodes are the midpoints of the old ones
        let mid: f64 = (0..n).map(|k| f((k as f64 + 0.5) * h(n))).sum();
        sum += mid;
        n *= 2;
        let cur = sum * h(n);
        if (cur - prev).abs() <= tol || n >= MAX_NODES {
            return cur;
        }
        prev = cur;
    }
}

fn circle_point(phi: f64, t: f64) -> Vector3<f64> {
    let (sp, cp) = phi.sin_cos();
    Vector3::new(sp * t.cos(), sp * t.sin(), cp)
}

/// `I(phi)`.
pub fn melnikov_i(scn: &Scenario, phi: f64) -> f64 {
    let f = scn.field();
    periodic_trapezoid(
        |t| {
            let s = circle_point(phi, t);
            f.component(2).eval(&s) * t.cos() - f.component(3).eval(&s) * t.sin()
        },
        scn.tolerances.quadrature,
    )
}

/// `I'(phi)` by quadrature of the differentiated integrand.
pub fn melnikov_di(scn: &Scenario, phi: f64) -> f64 {
    let f = scn.field();
    let (g2x, g2y, g2z) = (f.component(2).partial(0), f.component(2).partial(1), f.component(2).partial(2));
    let (g3x, g3y, g3z) = (f.component(3).partial(0), f.component(3).partial(1), f.component(3).partial(2));
    let (sp, cp) = phi.sin_cos();
    periodic_trapezoid(
        |t| {
            let s = circle_point(phi, t);
            let ds = Vector3::new(cp * t.cos(), cp * t.sin(), -sp);
            let db = g2x.eval(&s) * ds[0] + g2y.eval(&s) * ds[1] + g2z.eval(&s) * ds[2];
            let dc = g3x.eval(&s) * ds[0] + g3y.eval(&s) * ds[1] + g3z.eval(&s) * ds[2];
            db * t.cos() - dc * t.sin()
        },
        scn.tolerances.quadrature,
    )
}

/// A simple zero of the persistence integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelnikovRoot {
    pub phi0: f64,
    /// `I'(phi0)` by quadrature.
    pub derivative: f64,
    /// `I'(phi0)` by central difference, step 1e-6.
    pub derivative_fd: f64,
    pub value: f64,
}

/// `I` on the scan grid and its zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct MelnikovProfile {
    pub phis: Vec<f64>,
    pub values: Vec<f64>,
    pub roots: Vec<MelnikovRoot>,
    /// Zeros whose derivative is too small to call simple.
    pub non_simple: Vec<f64>,
    /// `I` vanishes identically to first order.
    pub degenerate: bool,
    /// Sum of absolute field coefficients; the reference for all thresholds.
    pub scale: f64,
}

fn refine(scn: &Scenario, mut a: f64, mut fa: f64, mut b: f64) -> f64 {
    // bisection down to a tight bracket, then one secant step inside it
    let mut fb = melnikov_i(scn, b);
    while b - a > 1e-13 {
        let m = 0.5 * (a + b);
        let fm = melnikov_i(scn, m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    if fb != fa {
        let x = a - fa * (b - a) / (fb - fa);
        if x >= a && x <= b {
            return x;
        }
    }
    0.5 * (a + b)
}

/// Scans `I` on the configured grid and locates its simple zeros.
pub fn melnikov_roots(scn: &Scenario) -> MelnikovProfile {
    let tol = &scn.tolerances;
    let n = tol.scan_points.max(2);
    let (lo, hi) = (tol.phi_min, PI - tol.phi_min);
    let phis: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let values: Vec<f64> = phis.iter().map(|p| melnikov_i(scn, *p)).collect();
    let scale = scn.field().coefficient_scale();
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let degenerate = scale == 0.0 || max_abs < 1e-12 * scale;
    let mut profile = MelnikovProfile { phis, values, roots: vec![], non_simple: vec![], degenerate, scale };
    if degenerate {
        return profile;
    }
    let mut candidates = Vec::new();
    for i in 0..n {
        let (p, v) = (profile.phis[i], profile.values[i]);
        if v == 0.0 {
            candidates.push(p);
        } else if i + 1 < n && profile.values[i + 1] != 0.0 && (v > 0.0) != (profile.values[i + 1] > 0.0) {
            candidates.push(refine(scn, p, v, profile.phis[i + 1]));
        }
    }
    let h = 1e-6;
    for phi0 in candidates {
        let derivative = melnikov_di(scn, phi0);
        let derivative_fd = (melnikov_i(scn, phi0 + h) - melnikov_i(scn, phi0 - h)) / (2.0 * h);
        if derivative.abs() < 1e-8 * scale {
            profile.non_simple.push(phi0);
        } else {
            profile.roots.push(MelnikovRoot { phi0, derivative, derivative_fd, value: melnikov_i(scn, phi0) });
        }
    }
    profile
}
