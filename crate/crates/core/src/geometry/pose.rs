use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

/// Rigid transform `x -> R x + t`.
///
/// Camera poses are stored camera-to-world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SE3Pose {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

impl Default for SE3Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl SE3Pose {
    pub fn identity() -> Self {
        Self { rotation: UnitQuaternion::identity(), translation: Vector3::zeros() }
    }

    /// Builds a pose, renormalising the rotation.
    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation: renormalize(rotation), translation }
    }

    /// From raw `(w, x, y, z)` quaternion components; the quaternion is
    /// normalised. Returns `None` for a (near) zero quaternion.
    pub fn from_wxyz(w: f64, x: f64, y: f64, z: f64, translation: Vector3<f64>) -> Option<Self> {
        let q = nalgebra::Quaternion::new(w, x, y, z);
        let n = q.norm();
        if !(n > 1e-12) || !n.is_finite() {
            return None;
        }
        Some(Self { rotation: UnitQuaternion::new_normalize(q), translation })
    }

    pub fn from_rotation_matrix(r: &Matrix3<f64>, translation: Vector3<f64>) -> Self {
        let rot = Rotation3::from_matrix_unchecked(*r);
        Self::new(UnitQuaternion::from_rotation_matrix(&rot), translation)
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let inv = self.rotation.inverse();
        Self { rotation: renormalize(inv), translation: -(inv * self.translation) }
    }

    /// `self * other`: applies `other` first.
    pub fn compose(&self, other: &SE3Pose) -> Self {
        Self {
            rotation: renormalize(self.rotation * other.rotation),
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn rotation_angle(&self) -> f64 {
        self.rotation.angle()
    }

    /// Pose of `other` relative to `self`: `self⁻¹ · other`.
    pub fn relative_to(&self, other: &SE3Pose) -> Self {
        self.inverse().compose(other)
    }
}

fn renormalize(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::new_normalize(q.into_inner())
}

/// Similarity transform `x -> s R x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sim3Transform {
    pub scale: f64,
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

impl Default for Sim3Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Sim3Transform {
    pub fn identity() -> Self {
        Self { scale: 1.0, rotation: UnitQuaternion::identity(), translation: Vector3::zeros() }
    }

    /// Panics if `scale` is not a positive finite number.
    pub fn new(scale: f64, rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        assert!(scale > 0.0 && scale.is_finite(), "Sim3 scale must be positive, got {scale}");
        Self { scale, rotation: renormalize(rotation), translation }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.scale * (self.rotation * p) + self.translation
    }

    pub fn inverse(&self) -> Self {
        let inv = self.rotation.inverse();
        let s = 1.0 / self.scale;
        Self { scale: s, rotation: renormalize(inv), translation: -(s * (inv * self.translation)) }
    }

    pub fn compose(&self, other: &Sim3Transform) -> Self {
        Self {
            scale: self.scale * other.scale,
            rotation: renormalize(self.rotation * other.rotation),
            translation: self.scale * (self.rotation * other.translation) + self.translation,
        }
    }

    /// Applies the similarity to a camera pose (camera-to-world).
    pub fn apply_pose(&self, pose: &SE3Pose) -> SE3Pose {
        SE3Pose::new(self.rotation * pose.rotation, self.apply(&pose.translation))
    }
}

impl From<SE3Pose> for Sim3Transform {
    fn from(p: SE3Pose) -> Self {
        Self { scale: 1.0, rotation: p.rotation, translation: p.translation }
    }
}
