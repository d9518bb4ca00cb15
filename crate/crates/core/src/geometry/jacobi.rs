//! Small dense eigen/SVD routines via cyclic Jacobi rotations.
//!
//! Sized for the 2x2 and 3x3 problems that come up in planar and spatial
//! Procrustes alignment, plus the d x d covariance eigensolve used by PCA.

use ndarray::{Array1, Array2};

const MAX_SWEEPS: usize = 60;
const OFF_DIAG_TOL: f64 = 1e-15;

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues sorted in
/// descending order and eigenvectors as the corresponding columns.
pub fn symmetric_eigen(matrix: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "symmetric_eigen requires a square matrix");
    let mut a = matrix.clone();
    let mut v: Array2<f64> = Array2::eye(n);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[[p, q]].abs());
            }
        }
        let scale = (0..n).map(|i| a[[i, i]].abs()).fold(0.0f64, f64::max);
        if off <= OFF_DIAG_TOL * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= OFF_DIAG_TOL * scale.max(1e-300) {
                    continue;
                }
                let (c, s) = jacobi_rotation(a[[p, p]], a[[q, q]], apq);
                apply_two_sided_rotation(&mut a, p, q, c, s);
                apply_column_rotation(&mut v, p, q, c, s);
            }
        }
    }

    let mut eigenvalues = Array1::zeros(n);
    for i in 0..n {
        eigenvalues[i] = a[[i, i]];
    }
    sort_descending(&mut eigenvalues, &mut v);
    (eigenvalues, v)
}

/// Singular value decomposition of a small square matrix via one-sided
/// Jacobi: `matrix = u * diag(s) * v^T` with singular values descending.
///
/// Columns of `u` belonging to (numerically) zero singular values are
/// completed to an orthonormal basis so the factors are always full.
pub fn jacobi_svd(matrix: &Array2<f64>) -> (Array2<f64>, Array1<f64>, Array2<f64>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "jacobi_svd requires a square matrix");
    let mut w = matrix.clone();
    let mut v: Array2<f64> = Array2::eye(n);

    for _ in 0..MAX_SWEEPS {
        let mut max_rel = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let (app, aqq, apq) = column_gram(&w, p, q);
                let denom = (app * aqq).sqrt();
                if denom > 0.0 {
                    max_rel = max_rel.max(apq.abs() / denom);
                }
                if apq.abs() <= OFF_DIAG_TOL * denom.max(1e-300) {
                    continue;
                }
                let (c, s) = jacobi_rotation(app, aqq, apq);
                apply_column_rotation(&mut w, p, q, c, s);
                apply_column_rotation(&mut v, p, q, c, s);
            }
        }
        if max_rel <= OFF_DIAG_TOL {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| w.column(j).dot(&w.column(j)).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let mut singular = Array1::zeros(n);
    let mut u = Array2::zeros((n, n));
    let mut v_sorted = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        singular[dst] = norms[src];
        for i in 0..n {
            v_sorted[[i, dst]] = v[[i, src]];
            if norms[src] > 1e-300 {
                u[[i, dst]] = w[[i, src]] / norms[src];
            }
        }
    }
    complete_orthonormal(&mut u, &singular);
    (u, singular, v_sorted.t().to_owned())
}

/// Rotation (c, s) diagonalizing the symmetric 2x2 block [[app, apq], [apq, aqq]].
fn jacobi_rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let tau = (aqq - app) / (2.0 * apq);
    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, c * t)
}

fn column_gram(w: &Array2<f64>, p: usize, q: usize) -> (f64, f64, f64) {
    let cp = w.column(p);
    let cq = w.column(q);
    (cp.dot(&cp), cq.dot(&cq), cp.dot(&cq))
}

/// Right-multiplication by a Givens rotation acting on columns p and q.
fn apply_column_rotation(m: &mut Array2<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let mp = m[[i, p]];
        let mq = m[[i, q]];
        m[[i, p]] = c * mp - s * mq;
        m[[i, q]] = s * mp + c * mq;
    }
}

/// Similarity transform J^T A J for the symmetric eigen iteration.
fn apply_two_sided_rotation(a: &mut Array2<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for i in 0..n {
        let aip = a[[i, p]];
        let aiq = a[[i, q]];
        a[[i, p]] = c * aip - s * aiq;
        a[[i, q]] = s * aip + c * aiq;
    }
    for j in 0..n {
        let apj = a[[p, j]];
        let aqj = a[[q, j]];
        a[[p, j]] = c * apj - s * aqj;
        a[[q, j]] = s * apj + c * aqj;
    }
}

fn sort_descending(values: &mut Array1<f64>, vectors: &mut Array2<f64>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
    let old_vals = values.clone();
    let old_vecs = vectors.clone();
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = old_vals[src];
        for i in 0..n {
            vectors[[i, dst]] = old_vecs[[i, src]];
        }
    }
}

/// Replace zero columns of u with vectors orthonormal to the nonzero ones.
fn complete_orthonormal(u: &mut Array2<f64>, singular: &Array1<f64>) {
    let n = u.nrows();
    let scale = singular[0].max(1e-300);
    for j in 0..n {
        if singular[j] > 1e-14 * scale {
            continue;
        }
        // Gram-Schmidt a standard basis vector against existing columns.
        for basis in 0..n {
            let mut cand = Array1::zeros(n);
            cand[basis] = 1.0;
            for k in 0..n {
                if k == j {
                    continue;
                }
                let col = u.column(k).to_owned();
                let proj = cand.dot(&col);
                cand = cand - proj * &col;
            }
            let norm = cand.dot(&cand).sqrt();
            if norm > 1e-8 {
                for i in 0..n {
                    u[[i, j]] = cand[i] / norm;
                }
                break;
            }
        }
    }
}
