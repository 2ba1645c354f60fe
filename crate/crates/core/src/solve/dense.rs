use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::SolveError;

/// Relative residual targeted by iterative refinement.
pub const REFINE_TARGET: f64 = 1e-12;
/// Largest relative residual accepted from a solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Dense LU factorization with iterative refinement.
#[derive(Debug, Clone)]
pub struct DenseSolver {
    m: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

impl DenseSolver {
    pub fn new(m: DMatrix<f64>) -> Result<Self, SolveError> {
        if m.nrows() != m.ncols() {
            return Err(SolveError::Input(format!("matrix is {}x{}", m.nrows(), m.ncols())));
        }
        let lu = m.clone().lu();
        if !lu.is_invertible() {
            return Err(SolveError::Singular { sigma_min: smallest_singular_value(&m) });
        }
        Ok(Self { m, lu })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Solves `M x = b`; returns `x` and the relative residual `|b - M x| / |b|`.
    pub fn solve(&self, b: &DVector<f64>) -> Result<(DVector<f64>, f64), SolveError> {
        let bn = b.norm();
        if bn == 0.0 {
            return Ok((DVector::zeros(b.len()), 0.0));
        }
        let mut x = self.lu.solve(b).ok_or(SolveError::Singular { sigma_min: 0.0 })?;
        let mut rel = f64::INFINITY;
        for _ in 0..5 {
            let r = b - &self.m * &x;
            rel = r.norm() / bn;
            if rel <= REFINE_TARGET {
                break;
            }
            match self.lu.solve(&r) {
                Some(dx) => x += dx,
                None => break,
            }
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(SolveError::NonFinite { t: f64::NAN });
        }
        if rel > RESIDUAL_TOL {
            return Err(SolveError::Residual { residual: rel, sigma_min: smallest_singular_value(&self.m) });
        }
        Ok((x, rel))
    }
}

/// Smallest singular value, used in failure reports only.
pub fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
