//! SO(3) primitives: the hat/vee isomorphism between ℝ³ and skew-symmetric
//! matrices, the exponential and logarithm maps, the adjoint action,
//! orthogonal projection onto the rotation group, and Euler-angle conversion.
//!
//! All angles are radians. The Euler convention is intrinsic Z-Y-X
//! (yaw-pitch-roll): `R = R_z(yaw) · R_y(pitch) · R_x(roll)`.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// ℝ³ vector (angular velocities in rad/s, torques in N·m, algebra elements).
pub type Vec3 = Vector3<f64>;
/// 3×3 real matrix.
pub type Mat3 = Matrix3<f64>;

/// Maximum allowed ‖RᵀR − I‖_F for a matrix admitted as a rotation.
pub const ORTHONORMALITY_TOL: f64 = 1e-9;
/// Maximum allowed symmetric part for a matrix admitted by [`vee`].
pub const SKEW_TOL: f64 = 1e-9;
/// Below this rotation angle, exp/log switch to their series expansions.
const SMALL_ANGLE: f64 = 1e-4;
/// Angles closer to π than this use the diagonal-based axis extraction.
const NEAR_PI: f64 = 1e-4;
/// Pitch angles within this of ±π/2 take the gimbal-lock branch.
const GIMBAL_TOL: f64 = 1e-6;
/// Maximum Frobenius distance from SO(3) accepted by [`project_to_so3`].
const PROJECTION_DISTANCE_LIMIT: f64 = 0.1;

/// Errors from rotation-group primitives.
#[derive(Debug, Error)]
pub enum So3Error {
    /// A matrix offered as a rotation is not orthonormal to tolerance.
    #[error("matrix is not orthonormal: ‖RᵀR − I‖_F = {defect:.3e} exceeds {ORTHONORMALITY_TOL:.0e}")]
    NotOrthonormal { defect: f64 },
    /// A matrix offered as a rotation is orthonormal but orientation-reversing.
    #[error("matrix is not a proper rotation: det = {det:.6}")]
    NotProperRotation { det: f64 },
    /// [`vee`] received a matrix with a non-negligible symmetric part.
    #[error("matrix is not skew-symmetric: symmetric part has norm {defect:.3e}, tolerance {SKEW_TOL:.0e}")]
    NotSkew { defect: f64 },
    /// [`project_to_so3`] received a degenerate or reflected matrix.
    #[error("cannot project onto SO(3): det = {det:.6} is not positive")]
    ProjectionDegenerate { det: f64 },
    /// [`project_to_so3`] received a matrix too far from the rotation group.
    #[error("matrix is {distance:.4} from SO(3) in Frobenius norm, beyond the supported {PROJECTION_DISTANCE_LIMIT}")]
    TooFarFromRotation { distance: f64 },
}

/// A rotation matrix, guaranteed orthonormal to [`ORTHONORMALITY_TOL`] with
/// positive determinant.
///
/// The invariant is enforced by [`Rotation::from_matrix`]; operations that
/// preserve SO(3) exactly (composition, transpose, exponential) construct
/// results without re-checking.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    /// The identity rotation.
    pub const IDENTITY: Rotation = Rotation(Mat3::new(
        1.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, //
        0.0, 0.0, 1.0,
    ));

    /// Admits `m` as a rotation after verifying orthonormality and orientation.
    pub fn from_matrix(m: Mat3) -> Result<Rotation, So3Error> {
        let defect = orthonormality_defect(&m);
        if !(defect <= ORTHONORMALITY_TOL) {
            return Err(So3Error::NotOrthonormal { defect });
        }
        let det = m.determinant();
        if !(det > 0.0) {
            return Err(So3Error::NotProperRotation { det });
        }
        Ok(Rotation(m))
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// The inverse rotation, Rᵀ.
    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    /// Rotates a vector: R·v.
    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Rotates a vector by the inverse: Rᵀ·v.
    pub fn rotate_back(&self, v: &Vec3) -> Vec3 {
        self.0.tr_mul(v)
    }

    /// Geodesic rotation angle in [0, π].
    pub fn angle(&self) -> f64 {
        log_so3(self).norm()
    }
}

impl std::ops::Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Rotation::IDENTITY
    }
}

/// ‖MᵀM − I‖_F, the deviation of `m` from orthonormality.
pub fn orthonormality_defect(m: &Mat3) -> f64 {
    (m.tr_mul(m) - Mat3::identity()).norm()
}

/// The hat map ℝ³ → 𝔰𝔬(3): `hat(v)·w = v × w`.
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -v.z, v.y, //
        v.z, 0.0, -v.x, //
        -v.y, v.x, 0.0,
    )
}

/// The skew part (M − Mᵀ)/2.
pub fn skew(m: &Mat3) -> Mat3 {
    (m - m.transpose()) * 0.5
}

/// Extracts the vector of the skew part of `m` without a skewness check:
/// ½·[m₃₂−m₂₃, m₁₃−m₃₁, m₂₁−m₁₂].
pub(crate) fn vee_skew_part(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// The vee map 𝔰𝔬(3) → ℝ³, inverse of [`hat`].
///
/// Errors if the symmetric part of `m` exceeds [`SKEW_TOL`] in Frobenius
/// norm, which signals a malformed intermediate rather than a rounding crumb.
pub fn vee(m: &Mat3) -> Result<Vec3, So3Error> {
    let defect = ((m + m.transpose()) * 0.5).norm();
    if !(defect <= SKEW_TOL) {
        return Err(So3Error::NotSkew { defect });
    }
    Ok(vee_skew_part(m))
}

/// The exponential map: Rodrigues' formula with a series branch below
/// angle 1e−4 to avoid the 0/0 coefficients.
pub fn exp_so3(v: &Vec3) -> Rotation {
    let theta = v.norm();
    let vhat = hat(v);
    let t2 = theta * theta;
    let (a, b) = if theta < SMALL_ANGLE {
        // sinθ/θ and (1−cosθ)/θ² expanded to O(θ⁴).
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / t2)
    };
    Rotation(Mat3::identity() + vhat * a + vhat * vhat * b)
}

/// The logarithm map, returning the rotation vector with norm in [0, π].
///
/// The angle comes from `atan2(‖vee(R−Rᵀ)/2‖, (tr R − 1)/2)`, which stays
/// well conditioned near π. Close to π the axis is recovered from the
/// largest diagonal entry of (R+Rᵀ)/2; its sign is taken from the skew part
/// while that still resolves it, and otherwise — at π, where ±axis describe
/// the same rotation — fixed so the first component of the axis exceeding
/// 1e−8 in magnitude is positive.
pub fn log_so3(r: &Rotation) -> Vec3 {
    let m = r.matrix();
    let w = vee_skew_part(m);
    let cos_theta = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let sin_theta = w.norm();
    let theta = sin_theta.atan2(cos_theta);

    if theta < SMALL_ANGLE {
        // log(R) ≈ w·(1 + θ²/6 + 7θ⁴/360); w already carries sinθ ≈ θ.
        let t2 = theta * theta;
        return w * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0);
    }
    if std::f64::consts::PI - theta > NEAR_PI {
        return w * (theta / sin_theta);
    }

    // Near π: n·nᵀ = (S − cosθ·I)/(1 − cosθ) with S = (R+Rᵀ)/2.
    let s = (m + m.transpose()) * 0.5;
    let denom = 1.0 - cos_theta;
    let mut k = 0;
    for i in 1..3 {
        if s[(i, i)] > s[(k, k)] {
            k = i;
        }
    }
    let mut axis = Vec3::new(
        s[(0, k)] / denom,
        s[(1, k)] / denom,
        s[(2, k)] / denom,
    );
    axis[k] = ((s[(k, k)] - cos_theta) / denom).max(0.0).sqrt();
    let nk = axis[k];
    if nk > 0.0 {
        for i in 0..3 {
            if i != k {
                axis[i] /= nk;
            }
        }
    }
    let norm = axis.norm();
    if norm > 0.0 {
        axis /= norm;
    }
    // Strictly below π the skew part w = sinθ·n still knows the sign of the
    // axis; respect it while it stands clear of rounding noise. Within
    // ~1e−8 of π itself, ±axis generate the same rotation to below the
    // round-trip tolerance, so fall back to a fixed convention.
    if sin_theta > 1e-8 {
        if axis.dot(&w) < 0.0 {
            axis = -axis;
        }
    } else {
        for i in 0..3 {
            if axis[i].abs() > 1e-8 {
                if axis[i] < 0.0 {
                    axis = -axis;
                }
                break;
            }
        }
    }
    axis * theta
}

/// The adjoint action of SO(3) on its algebra: `Ad_R(v) = R·v`.
pub fn adjoint_action(r: &Rotation, v: &Vec3) -> Vec3 {
    r.rotate(v)
}

/// Projects a matrix onto SO(3) in the Frobenius-nearest (polar) sense via
/// the Newton iteration X ← ½(X + X⁻ᵀ).
///
/// Accepts matrices with positive determinant within
/// [`PROJECTION_DISTANCE_LIMIT`] of the group; anything else errors.
pub fn project_to_so3(m: &Mat3) -> Result<Rotation, So3Error> {
    let det = m.determinant();
    if !(det > 0.0) {
        return Err(So3Error::ProjectionDegenerate { det });
    }
    let mut x = *m;
    for _ in 0..40 {
        let inv_t = match x.try_inverse() {
            Some(inv) => inv.transpose(),
            None => return Err(So3Error::ProjectionDegenerate { det }),
        };
        let next = (x + inv_t) * 0.5;
        let moved = (next - x).norm();
        x = next;
        if moved < 1e-15 {
            break;
        }
    }
    let defect = orthonormality_defect(&x);
    if !(defect <= ORTHONORMALITY_TOL) {
        return Err(So3Error::NotOrthonormal { defect });
    }
    let distance = (m - x).norm();
    if distance > PROJECTION_DISTANCE_LIMIT {
        return Err(So3Error::TooFarFromRotation { distance });
    }
    Ok(Rotation(x))
}

/// Euler angles in radians for the intrinsic Z-Y-X convention:
/// `R = R_z(yaw) · R_y(pitch) · R_x(roll)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerZyx {
    /// Rotation about the body x-axis (φ).
    pub roll: f64,
    /// Rotation about the intermediate y-axis (θ), in [−π/2, π/2].
    pub pitch: f64,
    /// Rotation about the fixed z-axis (ψ).
    pub yaw: f64,
}

impl EulerZyx {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> EulerZyx {
        EulerZyx { roll, pitch, yaw }
    }

    pub fn from_degrees(roll: f64, pitch: f64, yaw: f64) -> EulerZyx {
        EulerZyx::new(roll.to_radians(), pitch.to_radians(), yaw.to_radians())
    }

    /// (roll, pitch, yaw) in degrees.
    pub fn to_degrees(&self) -> (f64, f64, f64) {
        (
            self.roll.to_degrees(),
            self.pitch.to_degrees(),
            self.yaw.to_degrees(),
        )
    }
}

fn rot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(
        1.0, 0.0, 0.0, //
        0.0, c, -s, //
        0.0, s, c,
    )
}

fn rot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(
        c, 0.0, s, //
        0.0, 1.0, 0.0, //
        -s, 0.0, c,
    )
}

fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(
        c, -s, 0.0, //
        s, c, 0.0, //
        0.0, 0.0, 1.0,
    )
}

/// Builds the rotation R = R_z(yaw)·R_y(pitch)·R_x(roll).
pub fn from_euler_zyx(e: &EulerZyx) -> Rotation {
    Rotation(rot_z(e.yaw) * rot_y(e.pitch) * rot_x(e.roll))
}

/// Recovers Z-Y-X Euler angles from a rotation.
///
/// Within [`GIMBAL_TOL`] of pitch ±π/2 the roll/yaw split is degenerate; the
/// roll is folded to zero and the remaining rotation reported as yaw, which
/// keeps `from_euler_zyx(to_euler_zyx(R))` equal to `R`.
pub fn to_euler_zyx(r: &Rotation) -> EulerZyx {
    let m = r.matrix();
    let sin_pitch = (-m[(2, 0)]).clamp(-1.0, 1.0);
    let pitch = sin_pitch.asin();
    // cos(pitch) < GIMBAL_TOL ⟺ |pitch ∓ π/2| ≲ GIMBAL_TOL.
    if (1.0 - sin_pitch * sin_pitch).sqrt() < GIMBAL_TOL {
        EulerZyx::new(0.0, pitch, (-m[(0, 1)]).atan2(m[(1, 1)]))
    } else {
        EulerZyx::new(
            m[(2, 1)].atan2(m[(2, 2)]),
            pitch,
            m[(1, 0)].atan2(m[(0, 0)]),
        )
    }
}
