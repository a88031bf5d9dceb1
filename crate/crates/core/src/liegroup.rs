//! Arithmetic on so(3) and SO(3).
//!
//! The hat map uses the layout
//!
//! ```text
//!          | 0   a  -b |
//! hat(v) = |-a   0   c |      with v = (c, b, a),
//!          | b  -c   0 |
//! ```
//!
//! so `hat(v) * w == w.cross(v)`, the negative of the usual cross-product
//! matrix. An element's [`AlgebraElement::axis`] is the vector in this layout;
//! its [`AlgebraElement::rate`] is the angular-velocity vector of the rotations
//! it generates: `exp_so3(X, t)` turns vectors counterclockwise about
//! `X.rate()` by the angle `|X| t`. Frequency vectors, poles and symmetry axes
//! in the rest of the crate are rate vectors.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Skew-symmetry tolerance accepted by [`vee`].
pub const SKEW_TOL: f64 = 1e-10;
/// Unit-norm tolerance for [`UnitVector`].
pub const UNIT_TOL: f64 = 1e-12;
/// Orthogonality tolerance for freshly constructed rotations.
pub const ORTH_TOL: f64 = 1e-12;
/// Orthogonality tolerance after long integrations.
pub const ORTH_TOL_LOOSE: f64 = 1e-9;
/// Distance from pi below which [`log_so3`] refuses to pick a branch.
pub const LOG_MARGIN: f64 = 1e-6;
/// Below this value of `|X| t` the exponential uses its Taylor branch.
const EXP_SERIES_CUTOFF: f64 = 1e-4;
/// Orthogonality error above which [`Rotation::renormalized`] re-projects.
const RENORM_TRIGGER: f64 = 1e-11;

/// The skew matrix of `v` in the layout above.
pub fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    let (c, b, a) = (v[0], v[1], v[2]);
    Matrix3::new(0.0, a, -b, -a, 0.0, c, b, -c, 0.0)
}

/// Inverse of [`hat`] on skew matrices.
pub fn vee(m: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let sym_norm = sym.amax();
    if sym_norm > SKEW_TOL {
        return Err(Error::NonSkewInput { sym_norm, tol: SKEW_TOL });
    }
    // Average the two mirrored entries so tiny asymmetries cancel.
    let a = 0.5 * (m[(0, 1)] - m[(1, 0)]);
    let b = 0.5 * (m[(2, 0)] - m[(0, 2)]);
    let c = 0.5 * (m[(1, 2)] - m[(2, 1)]);
    Ok(Vector3::new(c, b, a))
}

/// The standard cross-product matrix `[v]x`, with `[v]x w = v x w`.
pub(crate) fn cross_matrix(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

/// An element of so(3), stored by its axis vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraElement {
    axis: Vector3<f64>,
}

impl AlgebraElement {
    pub fn new(axis: Vector3<f64>) -> Self {
        Self { axis }
    }

    pub fn zero() -> Self {
        Self { axis: Vector3::zeros() }
    }

    /// The element whose rotations have angular velocity `rate`.
    pub fn from_rate(rate: Vector3<f64>) -> Self {
        Self { axis: -rate }
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        vee(m).map(Self::new)
    }

    pub fn axis(&self) -> Vector3<f64> {
        self.axis
    }

    pub fn rate(&self) -> Vector3<f64> {
        -self.axis
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        hat(&self.axis)
    }

    /// `|X|`, the Euclidean norm of the axis.
    pub fn norm(&self) -> f64 {
        self.axis.norm()
    }

    /// `||X|| = sqrt(2) |X|`, the Frobenius norm of the matrix.
    pub fn matrix_norm(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { axis: self.axis * s }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { axis: self.axis + other.axis }
    }

    /// `X w`, i.e. `w x axis`.
    pub fn act(&self, w: &Vector3<f64>) -> Vector3<f64> {
        w.cross(&self.axis)
    }
}

/// An element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    matrix: Matrix3<f64>,
}

impl Rotation {
    pub fn identity() -> Self {
        Self { matrix: Matrix3::identity() }
    }

    /// Checked construction with tolerance [`ORTH_TOL`].
    pub fn new(matrix: Matrix3<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, ORTH_TOL)
    }

    pub fn with_tolerance(matrix: Matrix3<f64>, tol: f64) -> Result<Self> {
        let r = Self { matrix };
        let orth_err = r.orthogonality_error();
        let det = matrix.determinant();
        if !(orth_err <= tol) || !((det - 1.0).abs() <= tol) {
            return Err(Error::NotRotation { orth_err, det });
        }
        Ok(r)
    }

    pub(crate) fn from_matrix_unchecked(matrix: Matrix3<f64>) -> Self {
        Self { matrix }
    }

    /// Rotation by `angle` counterclockwise about the unit vector `axis`.
    pub fn about(axis: &Vector3<f64>, angle: f64) -> Self {
        exp_so3(&AlgebraElement::from_rate(axis.normalize()), angle)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> Self {
        Self { matrix: self.matrix.transpose() }
    }

    pub fn compose(&self, rhs: &Rotation) -> Self {
        Self { matrix: self.matrix * rhs.matrix }
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.matrix * v
    }

    /// Largest entry of `R^T R - I`.
    pub fn orthogonality_error(&self) -> f64 {
        (self.matrix.transpose() * self.matrix - Matrix3::identity()).amax()
    }

    /// Re-projects onto SO(3) by the symmetric polar factor once drift exceeds 1e-11.
    pub fn renormalized(&self) -> Self {
        if self.orthogonality_error() <= RENORM_TRIGGER {
            return *self;
        }
        let mut m = self.matrix;
        for _ in 0..8 {
            let Some(inv_t) = m.transpose().try_inverse() else { break };
            let next = (m + inv_t) * 0.5;
            let delta = (next - m).amax();
            m = next;
            if delta < 1e-16 {
                break;
            }
        }
        Self { matrix: m }
    }

    /// Frobenius distance between the matrices.
    pub fn distance(&self, other: &Rotation) -> f64 {
        (self.matrix - other.matrix).norm()
    }
}

impl std::ops::Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        self.compose(&rhs)
    }
}

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector {
    coords: Vector3<f64>,
}

impl UnitVector {
    /// Checked construction with tolerance [`UNIT_TOL`].
    pub fn new(coords: Vector3<f64>) -> Result<Self> {
        let norm = coords.norm();
        if !((norm - 1.0).abs() <= UNIT_TOL) {
            return Err(Error::NotUnitVector { norm, tol: UNIT_TOL });
        }
        Ok(Self { coords })
    }

    pub fn normalize(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::NotUnitVector { norm, tol: UNIT_TOL });
        }
        Ok(Self { coords: v / norm })
    }

    pub(crate) fn from_unchecked(coords: Vector3<f64>) -> Self {
        Self { coords }
    }

    pub fn north() -> Self {
        Self { coords: Vector3::z() }
    }

    pub fn coords(&self) -> &Vector3<f64> {
        &self.coords
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.coords.dot(&other.coords)
    }

    pub fn distance(&self, other: &UnitVector) -> f64 {
        (self.coords - other.coords).norm()
    }

    pub fn neg(&self) -> Self {
        Self { coords: -self.coords }
    }
}

/// `exp(t hat(X))` in Rodrigues form.
pub fn exp_so3(x: &AlgebraElement, t: f64) -> Rotation {
    let m = x.matrix() * t;
    let theta = x.norm() * t.abs();
    let th2 = theta * theta;
    let (a, b) = if theta < EXP_SERIES_CUTOFF {
        (
            1.0 - th2 / 6.0 + th2 * th2 / 120.0 - th2 * th2 * th2 / 5040.0,
            0.5 - th2 / 24.0 + th2 * th2 / 720.0 - th2 * th2 * th2 / 40320.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / th2)
    };
    Rotation { matrix: Matrix3::identity() + m * a + m * m * b }
}

/// Principal logarithm; refuses rotations whose angle is within [`LOG_MARGIN`] of pi.
pub fn log_so3(r: &Rotation) -> Result<AlgebraElement> {
    let m = r.matrix();
    let skew = (m - m.transpose()) * 0.5;
    let s = Vector3::new(
        0.5 * (skew[(1, 2)] - skew[(2, 1)]),
        0.5 * (skew[(2, 0)] - skew[(0, 2)]),
        0.5 * (skew[(0, 1)] - skew[(1, 0)]),
    );
    let cos = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let sin = s.norm();
    let angle = sin.atan2(cos);
    if angle >= std::f64::consts::PI - LOG_MARGIN {
        return Err(Error::NearAntipodalRotation { angle, margin: LOG_MARGIN });
    }
    // skew = (sin(angle)/angle) hat(w)
    let factor = if angle < EXP_SERIES_CUTOFF {
        let a2 = angle * angle;
        1.0 + a2 / 6.0 + 7.0 * a2 * a2 / 360.0
    } else {
        angle / angle.sin()
    };
    Ok(AlgebraElement::new(s * factor))
}

/// The element `A X A^{-1}`, whose axis is `A X⃗`.
pub fn conjugate_axis(a: &Rotation, x: &AlgebraElement) -> AlgebraElement {
    AlgebraElement::new(a.apply(&x.axis()))
}

/// A rotation `B` with `B u = (0, 0, 1)`.
///
/// Rotates about `u x e3` by the angle between `u` and `e3`; for `u = -e3`
/// (within 1e-12) it is the half turn about `e1`.
pub fn frame_to_pole(u: &UnitVector) -> Rotation {
    let u = u.coords();
    let e3 = Vector3::z();
    if (u + e3).norm() <= 1e-12 {
        return Rotation { matrix: Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0)) };
    }
    let k = u.cross(&e3);
    let c = u.dot(&e3);
    let kx = cross_matrix(&k);
    Rotation { matrix: Matrix3::identity() + kx + kx * kx * (1.0 / (1.0 + c)) }
}

/// Signed angle of a rotation about the unit rate vector `axis`, assuming it fixes `axis`.
pub(crate) fn angle_about(r: &Rotation, axis: &Vector3<f64>) -> f64 {
    let m = r.matrix();
    let std_vee = Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    );
    let sin = std_vee.dot(axis);
    let cos = (m.trace() - 1.0) * 0.5;
    sin.atan2(cos)
}
