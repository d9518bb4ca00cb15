//! Orthogonal Procrustes alignment for small point sets.
//!
//! Works on `J x d` coordinate matrices with d = 2 or 3. Rotations are
//! always proper (determinant +1); when the unconstrained optimum would be
//! a reflection, the sign of the weakest singular direction is flipped.

use ndarray::{Array1, Array2, Axis};

use super::jacobi::jacobi_svd;
use super::GeometryError;

/// Relative tolerance below which a cross-covariance is treated as rank
/// deficient and the alignment reported as non-unique.
const RANK_TOL: f64 = 1e-9;

/// A fitted similarity transform `x -> scale * rotation * x + translation`.
#[derive(Debug, Clone)]
pub struct Similarity {
    pub rotation: Array2<f64>,
    pub scale: f64,
    pub translation: Array1<f64>,
}

impl Similarity {
    pub fn apply(&self, points: &Array2<f64>) -> Array2<f64> {
        let mut out = points.dot(&self.rotation.t()) * self.scale;
        for mut row in out.rows_mut() {
            row += &self.translation;
        }
        out
    }
}

fn centroid(points: &Array2<f64>) -> Array1<f64> {
    points.mean_axis(Axis(0)).expect("non-empty point set")
}

fn centered(points: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
    let c = centroid(points);
    let mut out = points.clone();
    for mut row in out.rows_mut() {
        row -= &c;
    }
    (out, c)
}

fn det(m: &Array2<f64>) -> f64 {
    match m.nrows() {
        2 => m[[0, 0]] * m[[1, 1]] - m[[0, 1]] * m[[1, 0]],
        3 => {
            m[[0, 0]] * (m[[1, 1]] * m[[2, 2]] - m[[1, 2]] * m[[2, 1]])
                - m[[0, 1]] * (m[[1, 0]] * m[[2, 2]] - m[[1, 2]] * m[[2, 0]])
                + m[[0, 2]] * (m[[1, 0]] * m[[2, 1]] - m[[1, 1]] * m[[2, 0]])
        }
        n => panic!("determinant not implemented for {n}x{n}"),
    }
}

/// Proper rotation R minimizing `sum_i || target_i - R source_i ||^2` for
/// centered point sets, via SVD of the cross-covariance.
///
/// Also returns the trace term `sum_i sigma_i * d_i` needed for the optimal
/// scale in similarity fitting.
pub fn fit_rotation_centered(
    source_c: &Array2<f64>,
    target_c: &Array2<f64>,
) -> Result<(Array2<f64>, f64), GeometryError> {
    let dim = source_c.ncols();
    // cross-covariance M = sum_i target_i source_i^T
    let m = target_c.t().dot(source_c);
    let (u, s, vt) = jacobi_svd(&m);

    let scale = s[0];
    if scale <= 1e-300 {
        return Err(GeometryError::DegeneratePose(
            "zero cross-covariance in Procrustes alignment".into(),
        ));
    }
    // rank < dim-1 leaves a free rotation about the null space
    if s[dim - 2] <= RANK_TOL * scale {
        return Err(GeometryError::DegeneratePose(
            "rank-deficient cross-covariance; rotation is not unique".into(),
        ));
    }

    let flip = det(&u) * det(&vt) < 0.0;
    if flip && (s[dim - 2] - s[dim - 1]).abs() <= RANK_TOL * scale {
        return Err(GeometryError::DegeneratePose(
            "tied singular values under reflection constraint; rotation is not unique".into(),
        ));
    }

    let mut d = Array2::eye(dim);
    if flip {
        d[[dim - 1, dim - 1]] = -1.0;
    }
    let rotation = u.dot(&d).dot(&vt);
    let trace_term = (0..dim)
        .map(|i| s[i] * d[[i, i]])
        .sum::<f64>();
    Ok((rotation, trace_term))
}

/// Fit the similarity transform of `source` minimizing the summed squared
/// distance to `target` (rotation proper, scale positive).
pub fn fit_similarity(
    source: &Array2<f64>,
    target: &Array2<f64>,
) -> Result<Similarity, GeometryError> {
    let (source_c, source_mean) = centered(source);
    let (target_c, target_mean) = centered(target);
    let (rotation, trace_term) = fit_rotation_centered(&source_c, &target_c)?;
    let source_norm2: f64 = source_c.iter().map(|v| v * v).sum();
    if source_norm2 <= 1e-300 {
        return Err(GeometryError::DegeneratePose(
            "source collapses to a single point".into(),
        ));
    }
    let scale = trace_term / source_norm2;
    let translation = &target_mean - &(rotation.dot(&source_mean) * scale);
    Ok(Similarity {
        rotation,
        scale,
        translation,
    })
}

/// Align `source` onto `target` with rotation and translation only. Scale is
/// left untouched, which keeps the residual symmetric in its arguments.
pub fn align_rigid(
    source: &Array2<f64>,
    target: &Array2<f64>,
) -> Result<Array2<f64>, GeometryError> {
    let (source_c, _) = centered(source);
    let (target_c, target_mean) = centered(target);
    let (rotation, _) = fit_rotation_centered(&source_c, &target_c)?;
    let mut out = source_c.dot(&rotation.t());
    for mut row in out.rows_mut() {
        row += &target_mean;
    }
    Ok(out)
}

/// Mean per-point Euclidean distance between two equally shaped point sets.
pub fn mean_point_distance(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut total = 0.0;
    for i in 0..n {
        let mut d2 = 0.0;
        for j in 0..a.ncols() {
            let diff = a[[i, j]] - b[[i, j]];
            d2 += diff * diff;
        }
        total += d2.sqrt();
    }
    total / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn rotation_z(theta: f64) -> Array2<f64> {
        array![
            [theta.cos(), -theta.sin(), 0.0],
            [theta.sin(), theta.cos(), 0.0],
            [0.0, 0.0, 1.0]
        ]
    }

    #[test]
    fn similarity_recovers_transform() {
        let pts = array![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.3, 0.0],
            [0.2, 0.1, 0.9]
        ];
        let r = rotation_z(0.7);
        let mut target = pts.dot(&r.t()) * 2.5;
        for mut row in target.rows_mut() {
            row += &array![0.3, -1.0, 0.25];
        }
        let sim = fit_similarity(&pts, &target).unwrap();
        assert!((sim.scale - 2.5).abs() < 1e-10);
        let applied = sim.apply(&pts);
        for (a, b) in applied.iter().zip(target.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((det(&sim.rotation) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rotation_never_reflects() {
        // target is a mirrored copy; best proper rotation must still have det +1
        let pts = array![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.4, 0.4, 0.1]
        ];
        let mut mirrored = pts.clone();
        for i in 0..mirrored.nrows() {
            mirrored[[i, 0]] = -mirrored[[i, 0]];
        }
        let sim = fit_similarity(&pts, &mirrored).unwrap();
        assert!((det(&sim.rotation) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts = array![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        let target = array![[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 2.0, 0.0]];
        assert!(matches!(
            fit_similarity(&pts, &target),
            Err(GeometryError::DegeneratePose(_))
        ));
    }

    #[test]
    fn rigid_alignment_is_symmetric() {
        let a = array![
            [0.1, 0.4, -0.2],
            [0.9, -0.3, 0.5],
            [-0.6, 0.8, 0.3],
            [0.2, -0.7, -0.9]
        ];
        let b = array![
            [0.3, 0.1, 0.0],
            [-0.4, 0.6, 0.7],
            [0.8, -0.5, 0.2],
            [-0.1, 0.2, -0.6]
        ];
        let ab = mean_point_distance(&a, &align_rigid(&b, &a).unwrap());
        let ba = mean_point_distance(&b, &align_rigid(&a, &b).unwrap());
        assert!((ab - ba).abs() < 1e-12);
    }
}
