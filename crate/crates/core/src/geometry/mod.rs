//! Pose representations, normalization, Procrustes alignment, and the
//! NP-MPJPE matching indicator.
//!
//! All operations are pure functions on immutable inputs and safe to call
//! from any number of threads.

mod jacobi;
mod procrustes;

pub use jacobi::{jacobi_svd, symmetric_eigen};
pub use procrustes::{align_rigid, fit_similarity, mean_point_distance, Similarity};

use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

/// Distances below this are treated as degenerate when normalizing.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Default NP-MPJPE matching threshold for training and evaluation.
pub const DEFAULT_KAPPA: f64 = 0.1;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate pose: {0}")]
    DegeneratePose(String),
    #[error("schema `{schema}` has no `{joint}` joint")]
    MissingJoint { schema: String, joint: &'static str },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("non-finite coordinate at joint {0}")]
    NonFiniteCoord(usize),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("failed to read schema file: {0}")]
    SchemaIo(String),
}

/// Landmark joints the geometry operations need to locate by role.
///
/// `hip`/`spine`/`thorax` drive 3D normalization and may be absent from 2D
/// schemas; the shoulder and hip sides are required everywhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedJoints {
    pub hip: Option<usize>,
    pub spine: Option<usize>,
    pub thorax: Option<usize>,
    pub left_hip: usize,
    pub right_hip: usize,
    pub left_shoulder: usize,
    pub right_shoulder: usize,
}

/// A fixed keypoint layout: joint names, landmark roles, and the left/right
/// permutation used for mirroring.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkeletonSchema {
    pub name: String,
    pub joint_names: Vec<String>,
    pub named: NamedJoints,
    pub mirror_map: Vec<usize>,
}

impl SkeletonSchema {
    pub fn joint_count(&self) -> usize {
        self.joint_names.len()
    }

    /// Check structural invariants: mirror map is an involution and every
    /// named index is in range.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let n = self.joint_count();
        if self.mirror_map.len() != n {
            return Err(GeometryError::InvalidSchema(format!(
                "mirror map has {} entries for {} joints",
                self.mirror_map.len(),
                n
            )));
        }
        for (i, &m) in self.mirror_map.iter().enumerate() {
            if m >= n {
                return Err(GeometryError::InvalidSchema(format!(
                    "mirror map entry {m} out of range"
                )));
            }
            if self.mirror_map[m] != i {
                return Err(GeometryError::InvalidSchema(format!(
                    "mirror map is not an involution at joint {i}"
                )));
            }
        }
        let named = [
            self.named.hip,
            self.named.spine,
            self.named.thorax,
            Some(self.named.left_hip),
            Some(self.named.right_hip),
            Some(self.named.left_shoulder),
            Some(self.named.right_shoulder),
        ];
        for idx in named.into_iter().flatten() {
            if idx >= n {
                return Err(GeometryError::InvalidSchema(format!(
                    "named joint index {idx} out of range"
                )));
            }
        }
        Ok(())
    }

    /// Load a schema description from a JSON file.
    pub fn from_json_file(path: &Path) -> Result<Arc<Self>, GeometryError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeometryError::SchemaIo(e.to_string()))?;
        let schema: SkeletonSchema = serde_json::from_str(&text)
            .map_err(|e| GeometryError::InvalidSchema(e.to_string()))?;
        schema.validate()?;
        Ok(Arc::new(schema))
    }

    /// Built-in 17-joint 3D skeleton.
    pub fn h36m17() -> Arc<Self> {
        H36M17.clone()
    }

    /// Built-in 13-joint 2D skeleton (12 body keypoints plus the nose).
    pub fn coco13() -> Arc<Self> {
        COCO13.clone()
    }

    /// Look up a built-in schema by name.
    pub fn builtin(name: &str) -> Option<Arc<Self>> {
        match name {
            "h36m17" => Some(Self::h36m17()),
            "coco13" => Some(Self::coco13()),
            _ => None,
        }
    }

    fn require(&self, role: Option<usize>, joint: &'static str) -> Result<usize, GeometryError> {
        role.ok_or_else(|| GeometryError::MissingJoint {
            schema: self.name.clone(),
            joint,
        })
    }
}

static H36M17: Lazy<Arc<SkeletonSchema>> = Lazy::new(|| {
    let schema = SkeletonSchema {
        name: "h36m17".into(),
        joint_names: [
            "Hip", "RHip", "RKnee", "RFoot", "LHip", "LKnee", "LFoot", "Spine", "Thorax", "Neck",
            "Head", "LShoulder", "LElbow", "LWrist", "RShoulder", "RElbow", "RWrist",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        named: NamedJoints {
            hip: Some(0),
            spine: Some(7),
            thorax: Some(8),
            left_hip: 4,
            right_hip: 1,
            left_shoulder: 11,
            right_shoulder: 14,
        },
        mirror_map: vec![0, 4, 5, 6, 1, 2, 3, 7, 8, 9, 10, 14, 15, 16, 11, 12, 13],
    };
    schema.validate().expect("built-in h36m17 schema is valid");
    Arc::new(schema)
});

static COCO13: Lazy<Arc<SkeletonSchema>> = Lazy::new(|| {
    let schema = SkeletonSchema {
        name: "coco13".into(),
        joint_names: [
            "Nose", "LShoulder", "RShoulder", "LElbow", "RElbow", "LWrist", "RWrist", "LHip",
            "RHip", "LKnee", "RKnee", "LAnkle", "RAnkle",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        named: NamedJoints {
            hip: None,
            spine: None,
            thorax: None,
            left_hip: 7,
            right_hip: 8,
            left_shoulder: 1,
            right_shoulder: 2,
        },
        mirror_map: vec![0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11],
    };
    schema.validate().expect("built-in coco13 schema is valid");
    Arc::new(schema)
});

fn check_coords(coords: &Array2<f64>, dim: usize, schema: &SkeletonSchema) -> Result<(), GeometryError> {
    if coords.nrows() != schema.joint_count() || coords.ncols() != dim {
        return Err(GeometryError::SchemaMismatch(format!(
            "expected {}x{dim} coordinates for schema `{}`, got {}x{}",
            schema.joint_count(),
            schema.name,
            coords.nrows(),
            coords.ncols()
        )));
    }
    for (i, row) in coords.rows().into_iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteCoord(i));
        }
    }
    Ok(())
}

/// A 3D pose: `joint_count x 3` coordinates tied to a skeleton schema.
#[derive(Debug, Clone)]
pub struct Pose3D {
    coords: Array2<f64>,
    schema: Arc<SkeletonSchema>,
}

impl Pose3D {
    pub fn new(coords: Array2<f64>, schema: Arc<SkeletonSchema>) -> Result<Self, GeometryError> {
        check_coords(&coords, 3, &schema)?;
        Ok(Self { coords, schema })
    }

    pub fn coords(&self) -> &Array2<f64> {
        &self.coords
    }

    pub fn schema(&self) -> &Arc<SkeletonSchema> {
        &self.schema
    }
}

/// A 2D pose: `joint_count x 2` coordinates tied to a skeleton schema.
#[derive(Debug, Clone)]
pub struct Pose2D {
    coords: Array2<f64>,
    schema: Arc<SkeletonSchema>,
}

impl Pose2D {
    pub fn new(coords: Array2<f64>, schema: Arc<SkeletonSchema>) -> Result<Self, GeometryError> {
        check_coords(&coords, 2, &schema)?;
        Ok(Self { coords, schema })
    }

    pub fn coords(&self) -> &Array2<f64> {
        &self.coords
    }

    pub fn schema(&self) -> &Arc<SkeletonSchema> {
        &self.schema
    }

    /// Row-major flattening (x0, y0, x1, y1, ...) used as model input.
    pub fn flatten(&self) -> Vec<f64> {
        self.coords.iter().copied().collect()
    }
}

fn joint_distance(coords: &Array2<f64>, a: usize, b: usize) -> f64 {
    let mut d2 = 0.0;
    for c in 0..coords.ncols() {
        let diff = coords[[a, c]] - coords[[b, c]];
        d2 += diff * diff;
    }
    d2.sqrt()
}

/// Translate the hip to the origin and scale the hip-spine-thorax chain to
/// unit length.
pub fn normalize_pose_3d(pose: &Pose3D) -> Result<Pose3D, GeometryError> {
    let schema = pose.schema();
    let hip = schema.require(schema.named.hip, "hip")?;
    let spine = schema.require(schema.named.spine, "spine")?;
    let thorax = schema.require(schema.named.thorax, "thorax")?;

    let chain = joint_distance(&pose.coords, hip, spine) + joint_distance(&pose.coords, spine, thorax);
    if chain < DEGENERACY_TOL {
        return Err(GeometryError::DegeneratePose(
            "hip-spine-thorax chain collapses to a point".into(),
        ));
    }

    let mut coords = pose.coords.clone();
    let hip_pos = coords.row(hip).to_owned();
    for mut row in coords.rows_mut() {
        row -= &hip_pos;
    }
    coords /= chain;
    Ok(Pose3D {
        coords,
        schema: schema.clone(),
    })
}

/// Center the hips at the origin and scale so the maximum shoulder-hip
/// distance is 0.5.
pub fn normalize_pose_2d(pose: &Pose2D) -> Result<Pose2D, GeometryError> {
    let named = &pose.schema().named;
    let torso = [
        named.left_shoulder,
        named.right_shoulder,
        named.left_hip,
        named.right_hip,
    ];
    let mut max_dist = 0.0f64;
    for &s in &torso[..2] {
        for &h in &torso[2..] {
            max_dist = max_dist.max(joint_distance(&pose.coords, s, h));
        }
    }
    if max_dist < DEGENERACY_TOL {
        return Err(GeometryError::DegeneratePose(
            "shoulder-hip span collapses to a point".into(),
        ));
    }

    let mut coords = pose.coords.clone();
    let mut center = ndarray::Array1::zeros(2);
    for c in 0..2 {
        center[c] = 0.5 * (coords[[named.left_hip, c]] + coords[[named.right_hip, c]]);
    }
    for mut row in coords.rows_mut() {
        row -= &center;
    }
    coords *= 0.5 / max_dist;
    Ok(Pose2D {
        coords,
        schema: pose.schema().clone(),
    })
}

fn check_same_schema(a: &SkeletonSchema, b: &SkeletonSchema) -> Result<(), GeometryError> {
    if a.name != b.name || a.joint_names.len() != b.joint_names.len() {
        return Err(GeometryError::SchemaMismatch(format!(
            "cannot compare poses from schemas `{}` and `{}`",
            a.name, b.name
        )));
    }
    Ok(())
}

/// Similarity-Procrustes alignment of `source` onto `target`: the returned
/// pose is `scale * rotation * source + translation` minimizing the summed
/// squared joint distance to `target`.
pub fn procrustes_align(source: &Pose3D, target: &Pose3D) -> Result<Pose3D, GeometryError> {
    check_same_schema(source.schema(), target.schema())?;
    let sim = fit_similarity(&source.coords, &target.coords)?;
    Ok(Pose3D {
        coords: sim.apply(&source.coords),
        schema: source.schema.clone(),
    })
}

/// Normalized, Procrustes-aligned mean per-joint position error.
///
/// Both poses are normalized first (which fixes translation and scale), then
/// the second is rotationally aligned onto the first. Rotation-only
/// alignment keeps the result exactly symmetric in its arguments.
pub fn np_mpjpe(a: &Pose3D, b: &Pose3D) -> Result<f64, GeometryError> {
    check_same_schema(a.schema(), b.schema())?;
    let na = normalize_pose_3d(a)?;
    let nb = normalize_pose_3d(b)?;
    let aligned = align_rigid(&nb.coords, &na.coords)?;
    Ok(mean_point_distance(&na.coords, &aligned))
}

/// 2D analogue of [`np_mpjpe`]: 2D normalization plus planar rotation
/// alignment (reflections disallowed).
pub fn np_mpjpe_2d(a: &Pose2D, b: &Pose2D) -> Result<f64, GeometryError> {
    check_same_schema(a.schema(), b.schema())?;
    let na = normalize_pose_2d(a)?;
    let nb = normalize_pose_2d(b)?;
    let aligned = align_rigid(&nb.coords, &na.coords)?;
    Ok(mean_point_distance(&na.coords, &aligned))
}

/// Matching indicator: two 3D poses match when their NP-MPJPE is at most
/// `kappa` (inclusive).
pub fn matches(a: &Pose3D, b: &Pose3D, kappa: f64) -> Result<bool, GeometryError> {
    Ok(np_mpjpe(a, b)? <= kappa)
}

/// Left/right mirror of a 2D pose: x coordinates negated and joints permuted
/// by the schema's mirror map.
pub fn mirror_pose_2d(pose: &Pose2D) -> Pose2D {
    let n = pose.schema().joint_count();
    let mut coords = Array2::zeros((n, 2));
    for i in 0..n {
        let m = pose.schema().mirror_map[i];
        coords[[i, 0]] = -pose.coords[[m, 0]];
        coords[[i, 1]] = pose.coords[[m, 1]];
    }
    Pose2D {
        coords,
        schema: pose.schema.clone(),
    }
}
