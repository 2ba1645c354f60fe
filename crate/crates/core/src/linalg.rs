//! Small dense helpers: mean-zero bases, restricted energies and generalized
//! symmetric eigenproblems.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (Cholesky failed)")]
    NotPositiveDefinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("need at least two points, got {0}")]
    TooSmall(usize),
}

/// Orthonormal basis of `{v in R^m : sum v = 0}` as the columns of an
/// `m x (m-1)` matrix (Helmert contrasts).
pub fn helmert(m: usize) -> Result<DMatrix<f64>, LinalgError> {
    if m < 2 {
        return Err(LinalgError::TooSmall(m));
    }
    let mut q = DMatrix::zeros(m, m - 1);
    for k in 1..m {
        // column k-1: (1, ..., 1, -k, 0, ...) / sqrt(k (k+1))
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            q[(i, k - 1)] = 1.0 / norm;
        }
        q[(k, k - 1)] = -(k as f64) / norm;
    }
    Ok(q)
}

/// `Q^T M Q`.
pub fn congruence(m: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    q.transpose() * m * q
}

/// Eigenvalues of `A x = lambda B x` in ascending order, for symmetric `A`
/// and symmetric positive definite `B`.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>, LinalgError> {
    Ok(generalized_eigen(a, b)?.0)
}

/// Eigenpairs of `A x = lambda B x`, ascending; eigenvectors are
/// `B`-orthonormal columns.
pub fn generalized_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), LinalgError> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(LinalgError::Dimension(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let chol = Cholesky::new(b.clone()).ok_or(LinalgError::NotPositiveDefinite)?;
    let l = chol.l();
    // C = L^{-1} A L^{-T}
    let linv_a = l.solve_lower_triangular(a).expect("L is invertible");
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .expect("L is invertible")
        .transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).expect("finite"));
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(a.nrows(), idx.len());
    let lt = l.transpose();
    for (k, &i) in idx.iter().enumerate() {
        let y = eig.eigenvectors.column(i).into_owned();
        let x = lt.solve_upper_triangular(&y).expect("L^T is invertible");
        vecs.set_column(k, &x);
    }
    Ok((vals, vecs))
}

/// Matrix of the restricted energy `sum_{i,j in B} (v_i - v_j)^2 W_ij`,
/// i.e. `2 (D - W)` with `D` the row sums of the symmetric weight matrix `W`.
pub fn energy_matrix(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut e = -2.0 * w.clone();
    for i in 0..n {
        e[(i, i)] = 0.0;
    }
    for i in 0..n {
        let mut rs = 0.0;
        for j in 0..n {
            if j != i {
                rs += w[(i, j)];
            }
        }
        e[(i, i)] = 2.0 * rs;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn helmert_is_orthonormal_and_mean_free() {
        let q = helmert(6).unwrap();
        let g = q.transpose() * &q;
        assert!((g - DMatrix::identity(5, 5)).amax() < 1e-14);
        for k in 0..5 {
            assert!(q.column(k).sum().abs() < 1e-14);
        }
    }

    #[test]
    fn generalized_problem_on_diagonal_pencil() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 12.0, 3.0]));
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 4.0, 1.0]));
        let (vals, vecs) = generalized_eigen(&a, &b).unwrap();
        assert_relative_eq!(vals[0], 2.0, max_relative = 1e-14);
        assert_relative_eq!(vals[1], 3.0, max_relative = 1e-14);
        assert_relative_eq!(vals[2], 3.0, max_relative = 1e-14);
        let btb = vecs.transpose() * &b * &vecs;
        assert!((btb - DMatrix::identity(3, 3)).amax() < 1e-13);
    }

    #[test]
    fn energy_matrix_kills_constants() {
        let w = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 / (1.0 + (i + j) as f64) });
        let e = energy_matrix(&w);
        let one = nalgebra::DVector::from_element(4, 1.0);
        assert!((e * one).amax() < 1e-15);
    }
}
