//! Exact small-matrix rotation algebra on SO(3).
//!
//! Everything here is a pure function over plain 3×3 matrices. Rotations are
//! carried as raw matrices (no quaternions) so that matrix identities can be
//! tested without representation conversions; [`renormalize`] restores the
//! manifold after numerical integration.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance for constructed invariants (orthonormality, unit axis).
pub const CONSTRUCTION_TOL: f64 = 1e-9;
/// Maximum Frobenius distance from SO(3) that `renormalize` accepts.
pub const RENORMALIZE_RADIUS: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum So3Error {
    #[error("matrix is not antisymmetric: ‖m + mᵀ‖_F = {deviation:.3e}")]
    NotAntisymmetric { deviation: f64 },
    #[error("rotation axis is not unit length: ‖u‖ = {norm}")]
    NonUnitAxis { norm: f64 },
    #[error("matrix is not orthonormal: deviation {deviation:.3e}")]
    NotOrthonormal { deviation: f64 },
    #[error("matrix is too far from SO(3): Frobenius distance {distance:.3e}")]
    TooFarFromRotation { distance: f64 },
}

/// A proper rotation: RᵀR = I within 1e-9 and det(R) = 1 within 1e-9.
///
/// The invariant holds after every construction; arithmetic that can drift
/// (integration) must go back through [`renormalize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    /// Validates the orthonormality and determinant invariants.
    pub fn new(m: Mat3) -> Result<Self, So3Error> {
        let ortho = (m.transpose() * m - Mat3::identity()).norm();
        let det_dev = (m.determinant() - 1.0).abs();
        let deviation = ortho.max(det_dev);
        if deviation > CONSTRUCTION_TOL {
            return Err(So3Error::NotOrthonormal { deviation });
        }
        Ok(Self(m))
    }

    /// Caller guarantees the invariant (used where it holds by construction).
    fn new_unchecked(m: Mat3) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Transpose, which for a rotation is also the inverse.
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }
}

impl std::ops::Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix::new_unchecked(self.0 * rhs.0)
    }
}

impl std::ops::Mul<Vec3> for RotationMatrix {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

impl std::ops::Mul<&RotationMatrix> for &RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, rhs: &RotationMatrix) -> RotationMatrix {
        RotationMatrix::new_unchecked(self.0 * rhs.0)
    }
}

/// [v]ₓ, the antisymmetric matrix with skew(v)·w = v × w.
#[rustfmt::skip]
pub fn skew(v: Vec3) -> Mat3 {
    Mat3::new(
        0.0,  -v.z,   v.y,
        v.z,   0.0,  -v.x,
       -v.y,   v.x,   0.0,
    )
}

/// Inverse of [`skew`]. Rejects matrices whose symmetric part exceeds 1e-9.
pub fn vex(m: Mat3) -> Result<Vec3, So3Error> {
    let deviation = (m + m.transpose()).norm();
    if deviation > CONSTRUCTION_TOL {
        return Err(So3Error::NotAntisymmetric { deviation });
    }
    Ok(Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// ψ(A) = vex(P_a(A)) = ½[a₃₂−a₂₃, a₁₃−a₃₁, a₂₁−a₁₂] for arbitrary A.
pub fn psi(a: Mat3) -> Vec3 {
    0.5 * Vec3::new(
        a[(2, 1)] - a[(1, 2)],
        a[(0, 2)] - a[(2, 0)],
        a[(1, 0)] - a[(0, 1)],
    )
}

/// Rodrigues form R = I + sin(θ)[u]ₓ + (1−cos θ)[u]ₓ² for a unit axis u.
pub fn angle_axis(theta: f64, u: Vec3) -> Result<RotationMatrix, So3Error> {
    let norm = u.norm();
    if (norm - 1.0).abs() > CONSTRUCTION_TOL {
        return Err(So3Error::NonUnitAxis { norm });
    }
    let k = skew(u);
    // 1 − cos θ written as 2 sin²(θ/2) to avoid cancellation near θ = 0.
    let one_minus_cos = 2.0 * (0.5 * theta).sin().powi(2);
    let m = Mat3::identity() + theta.sin() * k + one_minus_cos * (k * k);
    Ok(RotationMatrix::new_unchecked(m))
}

/// Normalized distance |R|_I = √(¼ tr(I−R)) ∈ [0, 1].
pub fn so3_distance(r: &RotationMatrix) -> f64 {
    let tr = r.matrix().trace();
    (0.25 * (3.0 - tr)).clamp(0.0, 1.0).sqrt()
}

/// Nearest rotation to `m` (polar factor via SVD). Rejects inputs farther
/// than Frobenius 0.1 from SO(3); idempotent on exact rotations.
pub fn renormalize(m: Mat3) -> Result<RotationMatrix, So3Error> {
    let svd = m.svd(true, true);
    let u = svd.u.ok_or(So3Error::TooFarFromRotation { distance: f64::NAN })?;
    let v_t = svd.v_t.ok_or(So3Error::TooFarFromRotation { distance: f64::NAN })?;
    // det(U Vᵀ) = ±1; flip the smallest singular direction to stay proper.
    let sign = (u * v_t).determinant().signum();
    let r = u * Mat3::from_diagonal(&Vec3::new(1.0, 1.0, sign)) * v_t;
    let distance = (m - r).norm();
    if distance > RENORMALIZE_RADIUS {
        return Err(So3Error::TooFarFromRotation { distance });
    }
    RotationMatrix::new(r)
}
