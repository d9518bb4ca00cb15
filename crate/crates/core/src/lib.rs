//! View-invariant probabilistic pose embeddings.
//!
//! A library for embedding 2D pose keypoints into a compact space where
//! distances reflect 3D pose similarity regardless of camera view. Embeddings
//! are Gaussian distributions whose variance tracks the depth ambiguity of
//! the 2D input. The crate covers the full pipeline at desk scale:
//!
//! - pose normalization, Procrustes alignment, and NP-MPJPE matching
//!   ([`geometry`])
//! - random-view synthesis for camera augmentation ([`camera`])
//! - the embedding network with exact analytic gradients ([`model`])
//! - matching probabilities, triplet ratio / positive pairwise / Gaussian
//!   prior losses, and semi-hard negative mining ([`losses`])
//! - Adagrad training with EMA weights ([`train`])
//! - cross-view retrieval evaluation ([`retrieval`])
//! - sequence alignment, video distance, and action classification
//!   ([`sequences`])
//! - dataset formats and the synthetic multi-view generator ([`data`])

pub mod geometry;

pub use geometry::{
    matches, mirror_pose_2d, normalize_pose_2d, normalize_pose_3d, np_mpjpe, np_mpjpe_2d,
    procrustes_align, GeometryError, Pose2D, Pose3D, SkeletonSchema,
};
