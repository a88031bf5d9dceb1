//! Long-run fate of quasi-uniform seeds.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use super::chart::Pole;
use super::equilibrium::EquilibriumBranch;
use super::poincare::PeriodicOrbitBranch;
use crate::error::{Error, Result};
use crate::flows::{dopri5, Scenario, StepControl};
use crate::liegroup::UnitVector;

const EQUILIBRIUM_RADIUS: f64 = 1e-4;
const ORBIT_RADIUS: f64 = 1e-3;

/// Where a seed ends up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitObject {
    Equilibrium { pole: Pole },
    PeriodicOrbit { index: usize },
    /// First-order degenerate perturbation; seeds keep circulating without an attractor.
    Degenerate,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyEntry {
    pub seed: UnitVector,
    pub final_point: UnitVector,
    pub limit: LimitObject,
    /// Distance from the final point to the object it was assigned to.
    pub distance: f64,
}

/// `n` points of the Fibonacci lattice on the sphere.
pub fn fibonacci_seeds(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            Vector3::new(r * a.cos(), r * a.sin(), z)
        })
        .collect()
}

/// Survey horizon `min(50 / (eps |X0|), 1e5)`.
pub fn survey_horizon(scn: &Scenario) -> f64 {
    (50.0 / (scn.epsilon() * scn.speed())).min(1e5)
}

fn segment_distance(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

/// Distance from `p` to the closed polyline through an orbit's samples.
pub fn distance_to_orbit(p: &Vector3<f64>, orbit: &PeriodicOrbitBranch) -> f64 {
    let pts = &orbit.orbit_samples.states;
    let n = pts.len();
    (0..n)
        .map(|i| segment_distance(p, pts[i].coords(), pts[(i + 1) % n].coords()))
        .fold(f64::INFINITY, f64::min)
}

fn classify(
    x: &UnitVector,
    equilibria: &[EquilibriumBranch],
    orbits: &[PeriodicOrbitBranch],
    degenerate: bool,
) -> (LimitObject, f64) {
    let mut best = (LimitObject::Unclassified, f64::INFINITY);
    for eq in equilibria {
        let d = eq.location.distance(x);
        if d < EQUILIBRIUM_RADIUS && d < best.1 {
            best = (LimitObject::Equilibrium { pole: eq.pole }, d);
        }
    }
    if best.0 != LimitObject::Unclassified {
        return best;
    }
    for (index, orbit) in orbits.iter().enumerate() {
        let d = distance_to_orbit(x.coords(), orbit);
        if d < ORBIT_RADIUS && d < best.1 {
            best = (LimitObject::PeriodicOrbit { index }, d);
        }
    }
    if best.0 == LimitObject::Unclassified && degenerate {
        best.0 = LimitObject::Degenerate;
    }
    best
}

/// Integrates each seed over the survey horizon and names its limit.
///
/// Seeds are placed in the pole frame so the lattice's symmetry axis is the
/// unperturbed rotation axis.
pub fn limit_set_survey(
    scn: &Scenario,
    equilibria: &[EquilibriumBranch],
    orbits: &[PeriodicOrbitBranch],
    degenerate: bool,
    n_seeds: usize,
) -> Result<Vec<SurveyEntry>> {
    if !(scn.epsilon() > 0.0) {
        return Err(Error::InvalidInput("the limit-set survey needs eps > 0".into()));
    }
    let horizon = survey_horizon(scn);
    let binv = scn.frame().inverse();
    let ctl = StepControl::new(1e-9, 1e-9, scn.max_step());
    fibonacci_seeds(n_seeds)
        .into_par_iter()
        .map(|s| {
            let seed = UnitVector::from_unchecked(binv.apply(&s));
            let end = dopri5(
                |_, x: &Vector3<f64>| Ok(x.cross(&scn.total_rate(x))),
                0.0,
                *seed.coords(),
                horizon,
                &[],
                &ctl,
                |x| *x /= x.norm(),
                |_, _| {},
            )?;
            let final_point = UnitVector::from_unchecked(end);
            let (limit, distance) = classify(&final_point, equilibria, orbits, degenerate);
            Ok(SurveyEntry { seed, final_point, limit, distance })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_lattice_is_on_the_sphere_and_balanced() {
        let pts = fibonacci_seeds(50);
        assert_eq!(pts.len(), 50);
        assert!(pts.iter().all(|p| (p.norm() - 1.0).abs() < 1e-15));
        let centroid: Vector3<f64> = pts.iter().sum::<Vector3<f64>>() / 50.0;
        assert!(centroid.norm() < 0.05);
        assert!(pts.iter().all(|p| p[2].abs() > 1e-3));
    }

    #[test]
    fn segment_distance_cases() {
        let a = Vector3::zeros();
        let b = Vector3::x();
        assert_eq!(segment_distance(&Vector3::new(0.5, 1.0, 0.0), &a, &b), 1.0);
        assert_eq!(segment_distance(&Vector3::new(2.0, 0.0, 0.0), &a, &b), 1.0);
    }
}
