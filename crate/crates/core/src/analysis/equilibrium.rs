use nalgebra::{Complex, Matrix2, Vector2, Vector3};

use super::chart::{chart_jacobian, chart_point, chart_residual, Pole};
use super::Stability;
use crate::error::{Error, Result};
use crate::flows::Scenario;
use crate::liegroup::UnitVector;

const MAX_ITER: usize = 50;
const MAX_RADIUS: f64 = 0.5;

/// A persistent equilibrium near one pole.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumBranch {
    pub pole: Pole,
    pub epsilon: f64,
    /// The equilibrium in the original frame.
    pub location: UnitVector,
    /// Chart coordinates of the equilibrium.
    pub chart: [f64; 2],
    /// First-order chart displacement per unit `eps`.
    pub predicted_first_order: [f64; 2],
    /// Coefficient of `eps` in the trace of the chart linearization at the pole.
    pub trace_first_order: f64,
    /// Eigenvalues of the chart Jacobian at the equilibrium.
    pub eigenvalues: [Complex<f64>; 2],
    /// Verdict of the eigenvalues.
    pub stability: Stability,
    /// Verdict of the sign of `eps * trace_first_order`.
    pub criterion: Stability,
    /// `|(X0 + eps g(s)) s|` at the equilibrium.
    pub residual: f64,
    pub iterations: usize,
}

/// Eigenvalues of a real 2x2 matrix, larger real part first.
pub fn eigenvalues_2x2(m: &Matrix2<f64>) -> [Complex<f64>; 2] {
    let half_tr = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let det = m.determinant();
    let disc = half_tr * half_tr - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [Complex::new(half_tr + r, 0.0), Complex::new(half_tr - r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [Complex::new(half_tr, r), Complex::new(half_tr, -r)]
    }
}

/// `sigma * (dG3/dx2 - dG2/dx1)` at the pole `(0, 0, sigma)`.
pub fn trace_coefficient(scn: &Scenario, pole: Pole) -> f64 {
    let p = Vector3::new(0.0, 0.0, pole.sign());
    let f = scn.field();
    pole.sign() * (f.component(3).partial(1).eval(&p) - f.component(2).partial(0).eval(&p))
}

/// `sigma * (G3, G2) / |X0|` at the pole `(0, 0, sigma)`.
pub fn first_order_prediction(scn: &Scenario, pole: Pole) -> [f64; 2] {
    let p = Vector3::new(0.0, 0.0, pole.sign());
    let f = scn.field();
    let k = pole.sign() / scn.speed();
    [k * f.component(3).eval(&p), k * f.component(2).eval(&p)]
}

fn classify(rate: f64, tol: f64) -> Stability {
    if rate < -tol {
        Stability::Stable
    } else if rate > tol {
        Stability::Unstable
    } else {
        Stability::Marginal
    }
}

/// Newton on the chart field from the pole, then classification.
pub fn find_equilibrium(scn: &Scenario, pole: Pole) -> Result<EquilibriumBranch> {
    let mut x = Vector2::zeros();
    let mut iterations = 0;
    let mut converged = false;
    let scale = scn.speed().max(1.0);
    for it in 0..MAX_ITER {
        iterations = it;
        let h = chart_residual(scn, pole, &x)?;
        if h.amax() <= 1e-15 * scale {
            converged = true;
            break;
        }
        let jac = chart_jacobian(scn, pole, x[0], x[1])?;
        let step = jac
            .lu()
            .solve(&h)
            .ok_or_else(|| Error::NewtonDivergence("singular chart Jacobian".into()))?;
        x -= step;
        if !(x.norm() <= MAX_RADIUS) {
            return Err(Error::NewtonDivergence(format!("iterate left the radius {MAX_RADIUS} disk: {x:?}")));
        }
        if step.amax() <= 1e-16 {
            iterations = it + 1;
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NewtonDivergence(format!("no convergence in {MAX_ITER} iterations")));
    }
    let s = chart_point(scn, pole, x[0], x[1])?;
    let residual = s.cross(&scn.pole_rate(&s)).norm();
    if residual > 1e-11 * scale {
        return Err(Error::NewtonDivergence(format!("residual {residual:e} above 1e-11")));
    }
    let eigenvalues = eigenvalues_2x2(&chart_jacobian(scn, pole, x[0], x[1])?);
    let tol = 1e-12 * scn.speed();
    let stability = classify(eigenvalues[0].re, tol);
    let trace_first_order = trace_coefficient(scn, pole);
    let criterion = classify(0.5 * scn.epsilon() * trace_first_order, tol);
    if scn.epsilon() > 0.0
        && criterion != Stability::Marginal
        && stability != Stability::Marginal
        && criterion != stability
    {
        return Err(Error::StabilityCriterionMismatch {
            criterion: criterion.to_string(),
            eigen: stability.to_string(),
        });
    }
    Ok(EquilibriumBranch {
        pole,
        epsilon: scn.epsilon(),
        location: UnitVector::from_unchecked(scn.frame().inverse().apply(&s)),
        chart: [x[0], x[1]],
        predicted_first_order: first_order_prediction(scn, pole),
        trace_first_order,
        eigenvalues,
        stability,
        criterion,
        residual,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{PerturbationField, Polynomial};

    fn scn(field: PerturbationField, eps: f64) -> Scenario {
        Scenario::from_rates(Vector3::new(0.3, -0.4, 0.0).normalize(), Vector3::new(0.0, 0.6, 0.8), field, eps).unwrap()
    }

    #[test]
    fn zero_field_marginal_at_pole() {
        let s = scn(PerturbationField::zero(), 0.05);
        for pole in [Pole::North, Pole::South] {
            let eq = find_equilibrium(&s, pole).unwrap();
            assert_eq!(eq.chart, [0.0, 0.0]);
            assert_eq!(eq.stability, Stability::Marginal);
            assert!((eq.eigenvalues[0].re).abs() < 1e-15);
            assert!((eq.eigenvalues[0].im.abs() - 1.0).abs() < 1e-14);
        }
        let north = find_equilibrium(&s, Pole::North).unwrap();
        assert!(north.location.distance(&s.x1_0()) < 1e-15);
    }

    #[test]
    fn epsilon_zero_sits_on_pole() {
        let s = scn(PerturbationField::equatorial_trap(), 0.0);
        let eq = find_equilibrium(&s, Pole::South).unwrap();
        assert!(eq.location.distance(&s.x2_0()) <= 1e-12);
    }

    #[test]
    fn polar_shift_first_order_location() {
        let s = Scenario::from_rates(Vector3::z(), Vector3::z(), PerturbationField::polar_shift(), 0.01).unwrap();
        let eq = find_equilibrium(&s, Pole::North).unwrap();
        assert_eq!(eq.predicted_first_order, [0.5, 0.3]);
        let err = ((eq.chart[0] - 0.005).powi(2) + (eq.chart[1] - 0.003).powi(2)).sqrt();
        assert!(err <= 5e-4, "{err}");
        // a tilted axis with constant field: the equilibrium is the normalized total rate
        let w = Vector3::new(0.005, 0.003, 1.0).normalize();
        assert!((eq.chart[0] - w[0]).abs() < 1e-15 && (eq.chart[1] - w[1]).abs() < 1e-15);
        assert_eq!(eq.stability, Stability::Marginal);
    }

    #[test]
    fn equatorial_trap_poles_both_attract() {
        let s = scn(PerturbationField::equatorial_trap(), 0.01);
        let north = find_equilibrium(&s, Pole::North).unwrap();
        let south = find_equilibrium(&s, Pole::South).unwrap();
        // by hand: d(x1 x3)/dx1 = x3, so the trace coefficient is -x3 * sigma = -1 at both poles
        assert_eq!(north.trace_first_order, -1.0);
        assert_eq!(south.trace_first_order, -1.0);
        assert_eq!(north.stability, Stability::Stable);
        assert_eq!(south.stability, Stability::Stable);
        assert!(north.residual <= 1e-11 && south.residual <= 1e-11);
    }

    #[test]
    fn south_trace_sign_follows_the_chart() {
        // dG3/dx2 = 1 everywhere: north repels, south attracts
        let field = PerturbationField::new(Polynomial::zero(), Polynomial::zero(), Polynomial::monomial([0, 1, 0], 1.0), 0.1).unwrap();
        let s = scn(field, 0.02);
        let north = find_equilibrium(&s, Pole::North).unwrap();
        let south = find_equilibrium(&s, Pole::South).unwrap();
        assert_eq!((north.trace_first_order, north.stability), (1.0, Stability::Unstable));
        assert_eq!((south.trace_first_order, south.stability), (-1.0, Stability::Stable));
        for eq in [&north, &south] {
            let slope = eq.eigenvalues[0].re / s.epsilon();
            assert!((slope - eq.trace_first_order / 2.0).abs() < 0.05);
        }
    }

    #[test]
    fn eigen_closed_form() {
        let m = Matrix2::new(1.0, 2.0, 3.0, 4.0);
        let ev = eigenvalues_2x2(&m);
        let sym = m.complex_eigenvalues();
        let mut want: Vec<f64> = sym.iter().map(|c| c.re).collect();
        want.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((ev[0].re - want[0]).abs() < 1e-14 && (ev[1].re - want[1]).abs() < 1e-14);
        let rot = Matrix2::new(-0.1, 2.0, -2.0, -0.1);
        let ev = eigenvalues_2x2(&rot);
        assert_eq!(ev[0], Complex::new(-0.1, 2.0));
    }

    #[test]
    fn divergence_is_reported() {
        let big = PerturbationField::new(Polynomial::zero(), Polynomial::constant(1e3), Polynomial::zero(), 1.0).unwrap();
        let s = scn(big, 1.0);
        assert!(matches!(find_equilibrium(&s, Pole::North), Err(Error::NewtonDivergence(_))));
    }
}
