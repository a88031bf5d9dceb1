//! SO(2)-invariant perturbation fields.
//!
//! A field is three polynomials `G1, G2, G3` in the ambient coordinates of
//! the pole-aligned frame. They fill the skew matrix
//!
//! ```text
//! |  0   -G1   G2 |
//! |  G1   0   -G3 |
//! | -G2   G3   0  |
//! ```
//!
//! whose rate vector is `(G3, G2, G1)`. Evaluation in the original frame
//! conjugates by the scenario's pole frame.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::liegroup::{AlgebraElement, Rotation, UnitVector};

/// Default cap on total polynomial degree.
pub const DEFAULT_MAX_DEGREE: u32 = 8;
/// Default largest admissible perturbation size.
pub const DEFAULT_EPSILON_CAP: f64 = 0.1;

/// A real polynomial in `(x1, x2, x3)`, keyed by exponent triples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: BTreeMap<[u32; 3], f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn monomial(exponents: [u32; 3], coefficient: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(exponents, coefficient);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = ([u32; 3], f64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Adds `coefficient * x^exponents`, merging with an existing term.
    pub fn add_term(&mut self, exponents: [u32; 3], coefficient: f64) {
        if coefficient == 0.0 {
            return;
        }
        let entry = self.terms.entry(exponents).or_insert(0.0);
        *entry += coefficient;
        if *entry == 0.0 {
            self.terms.remove(&exponents);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &f64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e[0] + e[1] + e[2]).max().unwrap_or(0)
    }

    /// Sum of absolute coefficients.
    pub fn coefficient_scale(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn eval(&self, x: &Vector3<f64>) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let mut max = [0u32; 3];
        for e in self.terms.keys() {
            for i in 0..3 {
                max[i] = max[i].max(e[i]);
            }
        }
        let powers: [Vec<f64>; 3] = std::array::from_fn(|i| {
            let mut p = Vec::with_capacity(max[i] as usize + 1);
            p.push(1.0);
            for k in 1..=max[i] as usize {
                p.push(p[k - 1] * x[i]);
            }
            p
        });
        self.terms
            .iter()
            .map(|(e, c)| c * powers[0][e[0] as usize] * powers[1][e[1] as usize] * powers[2][e[2] as usize])
            .sum()
    }

    /// Partial derivative with respect to `x_{axis+1}`.
    pub fn partial(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[axis] == 0 {
                continue;
            }
            let mut d = *e;
            d[axis] -= 1;
            out.add_term(d, c * e[axis] as f64);
        }
        out
    }

    pub fn gradient(&self, x: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(self.partial(0).eval(x), self.partial(1).eval(x), self.partial(2).eval(x))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, c * s)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn times(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }

    /// The polynomial `y -> p(M y)`.
    pub fn compose_linear(&self, m: &Matrix3<f64>) -> Self {
        let rows: [Polynomial; 3] = std::array::from_fn(|i| {
            Self::from_terms((0..3).map(|j| {
                let mut e = [0; 3];
                e[j] = 1;
                (e, m[(i, j)])
            }))
        });
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let mut term = Self::constant(*c);
            for i in 0..3 {
                for _ in 0..e[i] {
                    term = term.times(&rows[i]);
                }
            }
            out = out.plus(&term);
        }
        out
    }
}

/// A point in spherical coordinates: colatitude `phi` and longitude `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    pub phi: f64,
    pub theta: f64,
}

impl SphericalPoint {
    /// `phi` must lie strictly inside `(0, pi)`; `theta` is reduced mod 2 pi.
    pub fn new(phi: f64, theta: f64) -> Result<Self> {
        if !(phi > 0.0 && phi < PI) || !theta.is_finite() {
            return Err(Error::InvalidSphericalPoint { phi, theta });
        }
        Ok(Self { phi, theta: theta.rem_euclid(2.0 * PI) })
    }

    pub fn from_cartesian(s: &Vector3<f64>) -> Result<Self> {
        let phi = s[2].clamp(-1.0, 1.0).acos();
        let theta = s[1].atan2(s[0]);
        Self::new(phi, theta)
    }

    pub fn to_cartesian(&self) -> Vector3<f64> {
        let (sp, cp) = self.phi.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        Vector3::new(sp * ct, sp * st, cp)
    }
}

/// The perturbation `(G1, G2, G3)` in the pole-aligned frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationField {
    g: [Polynomial; 3],
    epsilon_cap: f64,
}

impl PerturbationField {
    pub fn new(g1: Polynomial, g2: Polynomial, g3: Polynomial, epsilon_cap: f64) -> Result<Self> {
        Self::with_max_degree(g1, g2, g3, epsilon_cap, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(
        g1: Polynomial,
        g2: Polynomial,
        g3: Polynomial,
        epsilon_cap: f64,
        max_degree: u32,
    ) -> Result<Self> {
        for p in [&g1, &g2, &g3] {
            if p.degree() > max_degree {
                return Err(Error::DegreeExceeded { degree: p.degree(), max: max_degree });
            }
            if p.terms().any(|(_, c)| !c.is_finite()) {
                return Err(Error::InvalidInput("non-finite field coefficient".into()));
            }
        }
        if !(epsilon_cap >= 0.0) || !epsilon_cap.is_finite() {
            return Err(Error::InvalidInput(format!("epsilon_cap must be finite and >= 0, got {epsilon_cap}")));
        }
        Ok(Self { g: [g1, g2, g3], epsilon_cap })
    }

    pub fn zero() -> Self {
        Self { g: Default::default(), epsilon_cap: DEFAULT_EPSILON_CAP }
    }

    /// `G2 = x1 x3`: both poles attract, the equator is a repelling orbit.
    pub fn equatorial_trap() -> Self {
        Self {
            g: [Polynomial::zero(), Polynomial::monomial([1, 0, 1], 1.0), Polynomial::zero()],
            epsilon_cap: DEFAULT_EPSILON_CAP,
        }
    }

    /// Constant `G2 = 0.3, G3 = 0.5`: tilts the rotation axis.
    pub fn polar_shift() -> Self {
        Self {
            g: [Polynomial::zero(), Polynomial::constant(0.3), Polynomial::constant(0.5)],
            epsilon_cap: DEFAULT_EPSILON_CAP,
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "equatorial_trap" => Some(Self::equatorial_trap()),
            "polar_shift" => Some(Self::polar_shift()),
            "zero" => Some(Self::zero()),
            _ => None,
        }
    }

    pub fn with_epsilon_cap(mut self, cap: f64) -> Self {
        self.epsilon_cap = cap;
        self
    }

    pub fn epsilon_cap(&self) -> f64 {
        self.epsilon_cap
    }

    /// `G1`, `G2`, `G3` for `index` 1, 2, 3.
    pub fn component(&self, index: usize) -> &Polynomial {
        &self.g[index - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.g.iter().all(Polynomial::is_zero)
    }

    /// Sum of absolute coefficients over all three components.
    pub fn coefficient_scale(&self) -> f64 {
        self.g.iter().map(Polynomial::coefficient_scale).sum()
    }

    /// Rate vector `(G3, G2, G1)` at an ambient point of the pole frame.
    pub fn rate_at(&self, s: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(self.g[2].eval(s), self.g[1].eval(s), self.g[0].eval(s))
    }

    /// Ambient Jacobian of [`Self::rate_at`]; row `i` is the gradient of rate component `i`.
    pub fn rate_jacobian(&self, s: &Vector3<f64>) -> Matrix3<f64> {
        let rows = [self.g[2].gradient(s), self.g[1].gradient(s), self.g[0].gradient(s)];
        Matrix3::from_rows(&[rows[0].transpose(), rows[1].transpose(), rows[2].transpose()])
    }

    /// The same physical perturbation expressed in a frame turned by `r`:
    /// the returned field has rate `r * rate(r^-1 s)`.
    pub fn rotated(&self, r: &Rotation) -> Self {
        let rinv = r.inverse();
        let pulled: [Polynomial; 3] = [
            self.g[2].compose_linear(rinv.matrix()),
            self.g[1].compose_linear(rinv.matrix()),
            self.g[0].compose_linear(rinv.matrix()),
        ];
        let m = r.matrix();
        let mix = |i: usize| {
            (0..3).fold(Polynomial::zero(), |acc, j| acc.plus(&pulled[j].scaled(m[(i, j)])))
        };
        let rate = [mix(0), mix(1), mix(2)];
        let [r0, r1, r2] = rate;
        Self { g: [r2, r1, r0], epsilon_cap: self.epsilon_cap }
    }
}

/// The perturbation in the pole frame at `s`.
pub fn eval_gss(field: &PerturbationField, s: &UnitVector) -> AlgebraElement {
    AlgebraElement::from_rate(field.rate_at(s.coords()))
}

/// The perturbation in the original frame at `x`, given the pole frame `frame`.
pub fn eval_gs(field: &PerturbationField, x: &UnitVector, frame: &Rotation) -> AlgebraElement {
    let s = frame.apply(x.coords());
    AlgebraElement::from_rate(frame.inverse().apply(&field.rate_at(&s)))
}

/// `(a, b, c) = (G1, G2, G3)` at the Cartesian image of `p`.
pub fn eval_abc(field: &PerturbationField, p: &SphericalPoint) -> (f64, f64, f64) {
    let s = p.to_cartesian();
    let r = field.rate_at(&s);
    (r[2], r[1], r[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::{exp_so3, frame_to_pole};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn brute_eval(p: &Polynomial, x: &Vector3<f64>) -> f64 {
        p.terms()
            .map(|(e, c)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    fn unit(v: [f64; 3]) -> UnitVector {
        UnitVector::normalize(Vector3::from(v)).unwrap()
    }

    fn sample_field() -> PerturbationField {
        PerturbationField::new(
            Polynomial::from_terms([([0, 0, 0], 0.2), ([2, 1, 0], -0.7)]),
            Polynomial::from_terms([([1, 0, 1], 1.0), ([0, 3, 0], 0.4)]),
            Polynomial::from_terms([([0, 1, 0], -0.3), ([1, 1, 2], 0.9)]),
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn gss_zero_field() {
        let s = unit([0.3, -0.2, 0.9]);
        assert_eq!(eval_gss(&PerturbationField::zero(), &s), AlgebraElement::zero());
    }

    #[test]
    fn gss_factor_vanishes_on_equator() {
        let g = eval_gss(&PerturbationField::equatorial_trap(), &unit([1.0, 0.0, 0.0]));
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn gss_matches_displayed_layout() {
        let g = eval_gss(&PerturbationField::polar_shift(), &UnitVector::north());
        let (g1, g2, g3) = (0.0, 0.3, 0.5);
        let displayed = Matrix3::new(0.0, -g1, g2, g1, 0.0, -g3, -g2, g3, 0.0);
        assert_eq!(g.matrix(), displayed);
    }

    #[test]
    fn gs_identity_frame_equals_gss() {
        let f = sample_field();
        let x = unit([0.1, 0.5, -0.4]);
        assert_eq!(eval_gs(&f, &x, &Rotation::identity()), eval_gss(&f, &x));
    }

    #[test]
    fn gs_conjugation_consistency() {
        let f = sample_field();
        let b = frame_to_pole(&unit([0.3, -0.8, 0.2]));
        for k in 0..20 {
            let t = k as f64 * 0.37;
            let x = unit([t.cos(), (1.3 * t).sin(), 0.4 - 0.05 * t]);
            let lhs = eval_gs(&f, &x, &b).matrix();
            let bx = UnitVector::from_unchecked(b.apply(x.coords()));
            let rhs = b.inverse().matrix() * eval_gss(&f, &bx).matrix() * b.matrix();
            assert!((lhs - rhs).amax() <= 1e-12);
        }
    }

    #[test]
    fn abc_examples() {
        let f = PerturbationField::equatorial_trap();
        let (_, b, _) = eval_abc(&f, &SphericalPoint::new(PI / 2.0, 0.0).unwrap());
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-16);
        let p = SphericalPoint::new(PI / 4.0, 0.0).unwrap();
        let (_, b, _) = eval_abc(&f, &p);
        assert_abs_diff_eq!(b, 0.5, epsilon = 1e-15);
        let s = Vector3::new((PI / 4.0).sin(), 0.0, (PI / 4.0).cos());
        assert_abs_diff_eq!(b, brute_eval(f.component(2), &s), epsilon = 1e-15);
    }

    #[test]
    fn abc_near_pole_is_longitude_free() {
        let f = sample_field();
        let a0 = eval_abc(&f, &SphericalPoint::new(1e-300, 0.0).unwrap()).0;
        for k in 0..12 {
            let p = SphericalPoint::new(1e-300, k as f64 * 0.5).unwrap();
            assert_eq!(eval_abc(&f, &p).0, a0);
        }
        assert_abs_diff_eq!(a0, f.component(1).eval(&Vector3::z()), epsilon = 1e-15);
    }

    #[test]
    fn degree_cap_and_validation() {
        let high = Polynomial::monomial([5, 4, 0], 1.0);
        let err = PerturbationField::new(high, Polynomial::zero(), Polynomial::zero(), 0.1);
        assert!(matches!(err, Err(Error::DegreeExceeded { degree: 9, max: 8 })));
        assert!(SphericalPoint::new(0.0, 1.0).is_err());
        assert!(SphericalPoint::new(PI, 1.0).is_err());
        assert_abs_diff_eq!(SphericalPoint::new(1.0, -0.5).unwrap().theta, 2.0 * PI - 0.5);
    }

    #[test]
    fn partials_by_hand() {
        let p = Polynomial::from_terms([([2, 1, 0], 3.0), ([0, 0, 4], -1.0)]);
        assert_eq!(p.partial(0), Polynomial::monomial([1, 1, 0], 6.0));
        assert_eq!(p.partial(2), Polynomial::monomial([0, 0, 3], -4.0));
        assert!(p.partial(1).partial(1).is_zero());
    }

    #[test]
    fn rotated_field_is_the_same_perturbation() {
        let f = sample_field();
        let r = exp_so3(&AlgebraElement::new(Vector3::new(0.3, -0.2, 0.9)), 1.0);
        let g = f.rotated(&r);
        for k in 0..20 {
            let t = k as f64 * 0.41;
            let s = Vector3::new(t.sin(), (0.7 * t).cos(), 0.3).normalize();
            let lhs = g.rate_at(&r.apply(&s));
            let rhs = r.apply(&f.rate_at(&s));
            assert!((lhs - rhs).amax() <= 1e-12);
        }
    }

    #[test]
    fn so2_invariance_of_group_perturbation() {
        let f = sample_field();
        let q = Vector3::new(0.2, 0.4, 0.8).normalize();
        let b = frame_to_pole(&unit([0.5, 0.1, -0.3]));
        let qe = AlgebraElement::from_rate(q);
        let g_of = |a: &Rotation| {
            let x = UnitVector::normalize(a.inverse().apply(&q)).unwrap();
            eval_gs(&f, &x, &b)
        };
        for k in 0..25 {
            let a = exp_so3(&AlgebraElement::new(Vector3::new(0.3 * k as f64, -0.2, 0.7)), 1.0);
            let shifted = exp_so3(&qe, 0.9 * k as f64 - 4.0) * a;
            assert!((g_of(&shifted).axis() - g_of(&a).axis()).amax() <= 1e-12);
        }
    }

    fn poly_strategy() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(((0u32..3, 0u32..3, 0u32..3), -2.0f64..2.0), 0..6)
            .prop_map(|ts| Polynomial::from_terms(ts.into_iter().map(|((i, j, k), c)| ([i, j, k], c))))
    }

    proptest! {
        #[test]
        fn eval_matches_monomial_sum(p in poly_strategy(), x in prop::array::uniform3(-1.5f64..1.5)) {
            let x = Vector3::from(x);
            prop_assert!((p.eval(&x) - brute_eval(&p, &x)).abs() <= 1e-14 * (1.0 + p.coefficient_scale() * 20.0));
        }

        #[test]
        fn compose_linear_matches_substitution(p in poly_strategy(), m in prop::array::uniform9(-1.0f64..1.0), y in prop::array::uniform3(-1.0f64..1.0)) {
            let m = Matrix3::from_row_slice(&m);
            let y = Vector3::from(y);
            let lhs = p.compose_linear(&m).eval(&y);
            let rhs = p.eval(&(m * y));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + p.coefficient_scale() * 30.0));
        }

        #[test]
        fn partial_matches_difference(p in poly_strategy(), x in prop::array::uniform3(-1.0f64..1.0), axis in 0usize..3) {
            let x = Vector3::from(x);
            let h = 1e-6;
            let mut xp = x; xp[axis] += h;
            let mut xm = x; xm[axis] -= h;
            let fd = (p.eval(&xp) - p.eval(&xm)) / (2.0 * h);
            prop_assert!((p.partial(axis).eval(&x) - fd).abs() <= 1e-7 * (1.0 + p.coefficient_scale()));
        }
    }
}
