//! Random view synthesis: rotate normalized 3D poses and project them to 2D
//! keypoints for camera augmentation.
//!
//! The pose frame is x-right, y-up, z-depth. The virtual camera sits at the
//! origin looking along +z; a pose is rotated, pushed out along the camera
//! axis, and projected with a perspective divide.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_pose_2d, GeometryError, Pose2D, Pose3D, SkeletonSchema};

/// Joint selection from the 17-joint 3D skeleton to the 13-joint 2D skeleton.
/// Entry `k` gives the 3D joint backing 2D joint `k`; the nose is taken from
/// the neck (head-area) joint, limbs map by name.
pub const H36M17_TO_COCO13: [usize; 13] = [9, 11, 14, 12, 15, 13, 16, 4, 1, 5, 2, 6, 3];

#[derive(Debug, thiserror::Error)]
pub enum ProjectionError {
    #[error("joint {joint} too close to the camera (depth {depth:.4})")]
    BehindCamera { joint: usize, depth: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A camera pose expressed as rotation angles applied to the subject.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraRotation {
    pub azimuth: f64,
    pub elevation: f64,
    pub roll: f64,
}

impl CameraRotation {
    pub fn identity() -> Self {
        Self {
            azimuth: 0.0,
            elevation: 0.0,
            roll: 0.0,
        }
    }

    pub fn new(azimuth: f64, elevation: f64, roll: f64) -> Self {
        Self {
            azimuth,
            elevation,
            roll,
        }
    }
}

/// Perspective projection parameters and rotation sampling ranges.
///
/// Ranges are symmetric half-widths in radians; `camera_distance` is in
/// units of the normalized pose scale and must exceed the pose radius.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProjectionConfig {
    pub camera_distance: f64,
    pub azimuth_range: f64,
    pub elevation_range: f64,
    pub roll_range: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            camera_distance: 3.0,
            azimuth_range: std::f64::consts::PI,
            elevation_range: 30f64.to_radians(),
            roll_range: 30f64.to_radians(),
        }
    }
}

impl ProjectionConfig {
    pub fn with_ranges_deg(camera_distance: f64, azimuth: f64, elevation: f64, roll: f64) -> Self {
        Self {
            camera_distance,
            azimuth_range: azimuth.to_radians(),
            elevation_range: elevation.to_radians(),
            roll_range: roll.to_radians(),
        }
    }
}

/// Uniformly sample a rotation within the configured ranges.
pub fn sample_rotation<R: Rng>(rng: &mut R, config: &ProjectionConfig) -> CameraRotation {
    let draw = |rng: &mut R, half: f64| {
        if half == 0.0 {
            0.0
        } else {
            rng.random_range(-half..=half)
        }
    };
    CameraRotation {
        azimuth: draw(rng, config.azimuth_range),
        elevation: draw(rng, config.elevation_range),
        roll: draw(rng, config.roll_range),
    }
}

/// Rotation matrix: azimuth about the vertical (y), then elevation about the
/// camera-right axis (x), then roll about the camera axis (z).
pub fn rotation_matrix(rot: &CameraRotation) -> Array2<f64> {
    let (sa, ca) = rot.azimuth.sin_cos();
    let (se, ce) = rot.elevation.sin_cos();
    let (sr, cr) = rot.roll.sin_cos();
    let ry = ndarray::array![[ca, 0.0, sa], [0.0, 1.0, 0.0], [-sa, 0.0, ca]];
    let rx = ndarray::array![[1.0, 0.0, 0.0], [0.0, ce, -se], [0.0, se, ce]];
    let rz = ndarray::array![[cr, -sr, 0.0], [sr, cr, 0.0], [0.0, 0.0, 1.0]];
    rz.dot(&rx).dot(&ry)
}

/// Rotate, translate along the camera axis, and perspective-project the
/// selected 13 joints. Returns raw image coordinates (pre-normalization).
pub fn project_points(
    coords: &Array2<f64>,
    rot: &CameraRotation,
    config: &ProjectionConfig,
) -> Result<Array2<f64>, ProjectionError> {
    let r = rotation_matrix(rot);
    let rotated = coords.dot(&r.t());
    let mut out = Array2::zeros((H36M17_TO_COCO13.len(), 2));
    for (k, &j) in H36M17_TO_COCO13.iter().enumerate() {
        let depth = rotated[[j, 2]] + config.camera_distance;
        if depth <= 0.1 * config.camera_distance {
            return Err(ProjectionError::BehindCamera { joint: j, depth });
        }
        out[[k, 0]] = rotated[[j, 0]] / depth;
        out[[k, 1]] = rotated[[j, 1]] / depth;
    }
    Ok(out)
}

/// Project a normalized 3D pose to a normalized 13-joint 2D pose.
pub fn project_pose(
    pose: &Pose3D,
    rot: &CameraRotation,
    config: &ProjectionConfig,
) -> Result<Pose2D, ProjectionError> {
    if pose.schema().joint_count() != 17 {
        return Err(GeometryError::SchemaMismatch(format!(
            "projection expects the 17-joint schema, got `{}`",
            pose.schema().name
        ))
        .into());
    }
    let raw = project_points(pose.coords(), rot, config)?;
    let pose2d = Pose2D::new(raw, SkeletonSchema::coco13())?;
    Ok(normalize_pose_2d(&pose2d)?)
}

/// Two independent random views of one pose, used as an anchor/positive pair.
pub fn synth_view_pair<R: Rng>(
    pose: &Pose3D,
    rng: &mut R,
    config: &ProjectionConfig,
) -> Result<(Pose2D, Pose2D), ProjectionError> {
    let rot_a = sample_rotation(rng, config);
    let rot_b = sample_rotation(rng, config);
    let a = project_pose(pose, &rot_a, config)?;
    let b = project_pose(pose, &rot_b, config)?;
    Ok((a, b))
}
