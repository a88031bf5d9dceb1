use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::fields::PerturbationField;
use crate::liegroup::{frame_to_pole, AlgebraElement, Rotation, UnitVector};

/// Numerical tolerances for every stage of the analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance of the group and sphere integrators.
    pub rtol: f64,
    /// Absolute tolerance of the group and sphere integrators.
    pub atol: f64,
    /// Tolerance of the angle-chart integrator used by the return map.
    pub chart_tol: f64,
    /// Newton residual target for equilibria and return-map fixed points.
    pub newton: f64,
    /// Agreement between successive trapezoid refinements.
    pub quadrature: f64,
    /// Colatitude band guard for the angle chart.
    pub phi_min: f64,
    /// Keep-out margin from the chart boundary `x1^2 + x2^2 = 1`.
    pub chart_delta: f64,
    /// Samples per unperturbed period; the largest step is `period / max_step_divisions`.
    pub max_step_divisions: f64,
    /// Points in the persistence-integral root scan.
    pub scan_points: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            chart_tol: 1e-12,
            newton: 1e-12,
            quadrature: 1e-12,
            phi_min: 1e-3,
            chart_delta: 1e-6,
            max_step_divisions: 32.0,
            scan_points: 720,
        }
    }
}

/// One perturbed system: unperturbed generator, symmetry axis, field, size.
///
/// `x0` and `q` are algebra elements; their rate vectors are the rotation
/// axes. The pole frame maps the unperturbed rotation axis to `e3` and is
/// the frame in which the field is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    x0: AlgebraElement,
    q: AlgebraElement,
    field: PerturbationField,
    epsilon: f64,
    frame: Rotation,
    pub tolerances: Tolerances,
}

impl Scenario {
    pub fn new(x0: AlgebraElement, q: AlgebraElement, field: PerturbationField, epsilon: f64) -> Result<Self> {
        let speed = x0.norm();
        if !(speed > 0.0) || !speed.is_finite() {
            return Err(Error::InvalidInput(format!("unperturbed generator must be nonzero, |X0| = {speed}")));
        }
        if !((q.norm() - 1.0).abs() <= 1e-12) {
            return Err(Error::NotUnitVector { norm: q.norm(), tol: 1e-12 });
        }
        let frame = frame_to_pole(&UnitVector::normalize(x0.rate())?);
        let scn = Self { x0, q, field, epsilon: 0.0, frame, tolerances: Tolerances::default() };
        scn.with_epsilon(epsilon)
    }

    /// Builds from rotation-axis vectors; `q` is normalized.
    pub fn from_rates(x0: Vector3<f64>, q: Vector3<f64>, field: PerturbationField, epsilon: f64) -> Result<Self> {
        let qn = q.norm();
        if !(qn > 1e-12) || !qn.is_finite() {
            return Err(Error::InvalidInput(format!("symmetry axis must be nonzero, |q| = {qn}")));
        }
        Self::new(AlgebraElement::from_rate(x0), AlgebraElement::from_rate(q / qn), field, epsilon)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || epsilon > self.field.epsilon_cap() {
            return Err(Error::InvalidInput(format!(
                "epsilon {epsilon} outside [0, {}]",
                self.field.epsilon_cap()
            )));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    /// Replaces the pole frame by another one that also maps the rotation axis to `e3`.
    ///
    /// The field is taken as written in the new frame; use
    /// [`PerturbationField::rotated`] to carry the same perturbation over.
    pub fn with_frame(mut self, frame: Rotation, field: PerturbationField) -> Result<Self> {
        let image = frame.apply(self.x1_0().coords());
        if (image - Vector3::z()).norm() > 1e-12 {
            return Err(Error::InvalidInput("frame does not map the rotation axis to e3".into()));
        }
        self.frame = frame;
        self.field = field;
        Ok(self)
    }

    pub fn x0(&self) -> &AlgebraElement {
        &self.x0
    }

    pub fn q(&self) -> &AlgebraElement {
        &self.q
    }

    pub fn field(&self) -> &PerturbationField {
        &self.field
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The pole frame `B`.
    pub fn frame(&self) -> &Rotation {
        &self.frame
    }

    /// `|X0|`.
    pub fn speed(&self) -> f64 {
        self.x0.norm()
    }

    /// Unperturbed period `2 pi / |X0|`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.speed()
    }

    /// The rotation axis of the unperturbed generator (north pole of the orbit space).
    pub fn x1_0(&self) -> UnitVector {
        UnitVector::from_unchecked(self.x0.rate() / self.speed())
    }

    /// The antipode of [`Self::x1_0`].
    pub fn x2_0(&self) -> UnitVector {
        self.x1_0().neg()
    }

    /// The symmetry axis as a point of the sphere.
    pub fn q_dir(&self) -> UnitVector {
        UnitVector::from_unchecked(self.q.rate())
    }

    /// Total rotation rate `X0 + eps g(x)` at a point of the orbit space, original frame.
    pub fn total_rate(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let mut w = self.x0.rate();
        if self.epsilon != 0.0 {
            let s = self.frame.apply(x);
            w += self.frame.inverse().apply(&self.field.rate_at(&s)) * self.epsilon;
        }
        w
    }

    /// Total rotation rate in the pole frame: `|X0| e3 + eps G(s)`.
    pub fn pole_rate(&self, s: &Vector3<f64>) -> Vector3<f64> {
        let mut w = Vector3::new(0.0, 0.0, self.speed());
        if self.epsilon != 0.0 {
            w += self.field.rate_at(s) * self.epsilon;
        }
        w
    }

    /// Upper bound on integrator steps.
    pub fn max_step(&self) -> f64 {
        self.period() / self.tolerances.max_step_divisions
    }

    /// FNV-1a over the bit patterns of every input.
    pub fn hash(&self) -> u64 {
        let mut h = Fnv::new();
        for v in [self.x0.axis(), self.q.axis()] {
            v.iter().for_each(|x| h.f64(*x));
        }
        h.f64(self.epsilon);
        h.f64(self.field.epsilon_cap());
        for i in 1..=3 {
            h.u64(i as u64);
            for (e, c) in self.field.component(i).terms() {
                e.iter().for_each(|k| h.u64(*k as u64));
                h.f64(*c);
            }
        }
        self.frame.matrix().iter().for_each(|x| h.f64(*x));
        h.finish()
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
    fn u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
    fn finish(&self) -> u64 {
        self.0
    }
}
