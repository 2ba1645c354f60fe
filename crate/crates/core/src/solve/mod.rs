//! Time stepping for the primal, dual and extended dual equations, and the
//! resolvent.
//!
//! Unknowns live on the interior nodes. Collar nodes carry the prescribed
//! datum `g(t, x)` and beyond the box the datum is a constant, coupled
//! through the exterior weights of the form. With `M = h^d I` the scheme is
//!
//! `(M + theta dt A) u+ = (M - (1 - theta) dt A) u + dt M f + coupling`,
//!
//! and `M` cancels from every row.

mod dense;

use std::borrow::Cow;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

pub use dense::{smallest_singular_value, DenseSolver, REFINE_TARGET, RESIDUAL_TOL};

use crate::discretize::{DiscreteForm, Grid, TimeAssembler};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("linear system is singular (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },
    #[error("residual {residual:e} above tolerance after refinement (smallest singular value {sigma_min:e})")]
    Residual { residual: f64, sigma_min: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid problem: {0}")]
    Input(String),
}

/// Source of the operator at each time.
#[derive(Debug, Clone)]
pub enum Operator {
    Static(DiscreteForm),
    Time(TimeAssembler),
}

impl Operator {
    pub fn at(&self, t: f64) -> Cow<'_, DiscreteForm> {
        match self {
            Operator::Static(f) => Cow::Borrowed(f),
            Operator::Time(ta) => Cow::Owned(ta.at(t)),
        }
    }

    pub fn grid(&self) -> &Grid {
        match self {
            Operator::Static(f) => f.grid(),
            Operator::Time(ta) => ta.base().grid(),
        }
    }

    fn is_static(&self) -> bool {
        matches!(self, Operator::Static(_))
    }
}

/// Which equation is solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Variant {
    Primal,
    /// The dual operator `A^T`.
    Dual,
    /// The dual equation with the constant-field drift load of `d`.
    DualExt { d: f64 },
}

/// A grid function that may depend on time.
#[derive(Clone)]
pub enum Field {
    Zero,
    Constant(f64),
    Nodal(DVector<f64>),
    Dynamic(Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>),
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Zero => write!(f, "Zero"),
            Field::Constant(c) => write!(f, "Constant({c})"),
            Field::Nodal(v) => write!(f, "Nodal(len {})", v.len()),
            Field::Dynamic(_) => write!(f, "Dynamic"),
        }
    }
}

impl Field {
    pub fn at(&self, t: f64, n: usize) -> DVector<f64> {
        match self {
            Field::Zero => DVector::zeros(n),
            Field::Constant(c) => DVector::from_element(n, *c),
            Field::Nodal(v) => v.clone(),
            Field::Dynamic(f) => f(t),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Field::Zero) || matches!(self, Field::Constant(c) if *c == 0.0)
    }
}

/// A parabolic problem on a grid.
#[derive(Debug, Clone)]
pub struct Problem {
    pub operator: Operator,
    pub variant: Variant,
    /// Full-grid initial datum; collar entries are overwritten by `collar`.
    pub initial: DVector<f64>,
    /// Datum on the collar nodes (other entries ignored).
    pub collar: Field,
    /// Constant datum beyond the box.
    pub exterior: f64,
    pub source: Field,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub theta: f64,
}

impl Problem {
    /// Implicit Euler with `dt = h^alpha / 4` and zero data.
    pub fn new(operator: Operator, alpha: f64, t_end: f64) -> Self {
        let n = operator.grid().len();
        let dt = operator.grid().h().powf(alpha) / 4.0;
        Self {
            operator,
            variant: Variant::Primal,
            initial: DVector::zeros(n),
            collar: Field::Zero,
            exterior: 0.0,
            source: Field::Zero,
            t_start: 0.0,
            t_end,
            dt,
            theta: 1.0,
        }
    }

    fn validate(&self) -> Result<usize, SolveError> {
        let n = self.operator.grid().len();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SolveError::Input(format!("dt = {} must be positive", self.dt)));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(SolveError::Input(format!("theta = {} not in [1/2, 1]", self.theta)));
        }
        if self.t_end < self.t_start {
            return Err(SolveError::Input("t_end < t_start".into()));
        }
        if self.initial.len() != n {
            return Err(SolveError::Input(format!("initial datum has {} entries, grid has {n}", self.initial.len())));
        }
        if !self.initial.iter().all(|v| v.is_finite()) || !self.exterior.is_finite() {
            return Err(SolveError::Input("non-finite data".into()));
        }
        if let Variant::DualExt { d } = self.variant {
            if !d.is_finite() {
                return Err(SolveError::Input("d must be finite".into()));
            }
        }
        let span = self.t_end - self.t_start;
        Ok(((span / self.dt) - 1e-9).ceil().max(0.0) as usize)
    }
}

/// Scheme metadata carried by a [`Solution`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeMeta {
    pub variant: Variant,
    pub theta: f64,
    pub dt: f64,
    pub h: f64,
    pub steps: usize,
    pub kernel: String,
}

/// Snapshots at every step.
#[derive(Debug, Clone)]
pub struct Solution {
    pub times: Vec<f64>,
    pub snapshots: Vec<DVector<f64>>,
    pub meta: SchemeMeta,
    /// Relative residual of each linear solve.
    pub residuals: Vec<f64>,
    grid: Grid,
}

impl Solution {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// A space-time field sampled on `grid` at `times`, for audits of
    /// closed-form functions.
    pub fn sampled(grid: &Grid, times: &[f64], f: impl Fn(f64, &crate::geometry::Point) -> f64) -> Self {
        let snapshots = times.iter().map(|&t| DVector::from_vec(grid.sample(|x| f(t, x)))).collect();
        let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        let meta = SchemeMeta {
            variant: Variant::Primal,
            theta: 1.0,
            dt,
            h: grid.h(),
            steps: times.len().saturating_sub(1),
            kernel: "sampled".into(),
        };
        Self { times: times.to_vec(), snapshots, meta, residuals: Vec::new(), grid: grid.clone() }
    }

    pub fn last(&self) -> &DVector<f64> {
        self.snapshots.last().expect("at least the initial snapshot")
    }

    /// Rows `t,node,value`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,node,value")?;
        for (t, u) in self.times.iter().zip(&self.snapshots) {
            for (i, v) in u.iter().enumerate() {
                writeln!(w, "{t:e},{i},{v:e}")?;
            }
        }
        Ok(())
    }
}

/// Interior/collar bookkeeping and the effective operator of a variant.
struct Layout {
    interior: Vec<usize>,
    collar: Vec<usize>,
}

impl Layout {
    fn new(grid: &Grid) -> Self {
        Self { interior: grid.interior_indices(), collar: grid.collar_indices() }
    }

    fn block(&self, m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])])
    }

    fn gather(&self, v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
        DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
    }
}

fn effective<'a>(form: Cow<'a, DiscreteForm>, variant: Variant) -> Cow<'a, DiscreteForm> {
    match variant {
        Variant::Primal => form,
        Variant::Dual | Variant::DualExt { .. } => Cow::Owned(form.transpose_form()),
    }
}

/// Right-hand side per unit mass at time `t`: `f + T c_ext + load`.
fn forcing(problem: &Problem, form: &DiscreteForm, t: f64) -> DVector<f64> {
    let n = form.len();
    let mut r = problem.source.at(t, n);
    if problem.exterior != 0.0 {
        r += form.exterior_weights() * problem.exterior;
    }
    if let Variant::DualExt { d } = problem.variant {
        if d != 0.0 {
            // constant field in the antisymmetric dual pairing
            r += form.drift_diag() * (2.0 * d);
        }
    }
    r
}

/// Reusable stepper: caches the factorization for a static operator.
struct Stepper<'p> {
    problem: &'p Problem,
    layout: Layout,
    cached: Option<(f64, DenseSolver)>,
}

impl<'p> Stepper<'p> {
    fn new(problem: &'p Problem) -> Self {
        Self { problem, layout: Layout::new(problem.operator.grid()), cached: None }
    }

    fn step(&mut self, u: &DVector<f64>, t: f64, dt: f64) -> Result<(DVector<f64>, f64), SolveError> {
        let p = self.problem;
        let theta = p.theta;
        let n = u.len();
        let (ii, cc) = (&self.layout.interior, &self.layout.collar);
        let t1 = t + dt;

        let form1 = effective(p.operator.at(t1), p.variant);
        let a1 = form1.a();
        let g1 = p.collar.at(t1, n);
        let mut rhs = self.layout.gather(u, ii);

        // explicit part
        if theta < 1.0 {
            let form0 = effective(p.operator.at(t), p.variant);
            let mut u0 = u.clone();
            let g0 = p.collar.at(t, n);
            for &c in cc {
                u0[c] = g0[c];
            }
            let au = form0.apply(&u0);
            let f0 = forcing(p, &form0, t);
            for (k, &i) in ii.iter().enumerate() {
                rhs[k] += (1.0 - theta) * dt * (f0[i] - au[i]);
            }
        }
        // implicit part: forcing and collar coupling at t + dt
        let f1 = forcing(p, &form1, t1);
        for (k, &i) in ii.iter().enumerate() {
            rhs[k] += theta * dt * f1[i];
        }
        if !cc.is_empty() && !(p.collar.is_zero()) {
            let gc = self.layout.gather(&g1, cc);
            let aic = self.layout.block(&a1, ii, cc);
            rhs -= aic * gc * (theta * dt);
        }

        let reuse = p.operator.is_static() && self.cached.as_ref().is_some_and(|(k, _)| *k == dt);
        if !reuse {
            let mut m = self.layout.block(&a1, ii, ii) * (theta * dt);
            for k in 0..ii.len() {
                m[(k, k)] += 1.0;
            }
            self.cached = Some((dt, DenseSolver::new(m)?));
        }
        let solver = &self.cached.as_ref().expect("factorized").1;
        let (x, res) = solver.solve(&rhs)?;

        let mut next = g1;
        for (k, &i) in ii.iter().enumerate() {
            next[i] = x[k];
        }
        if !next.iter().all(|v| v.is_finite()) {
            return Err(SolveError::NonFinite { t: t1 });
        }
        Ok((next, res))
    }
}

/// One step from `u` at time `t`; collar entries of the result hold `g(t + dt)`.
pub fn theta_step(problem: &Problem, u: &DVector<f64>, t: f64) -> Result<DVector<f64>, SolveError> {
    problem.validate()?;
    Stepper::new(problem).step(u, t, problem.dt).map(|(x, _)| x)
}

/// Iterates [`theta_step`] over `[t_start, t_end]`. The step is shrunk to
/// divide the interval evenly.
pub fn solve_parabolic(problem: &Problem) -> Result<Solution, SolveError> {
    let steps = problem.validate()?;
    let grid = problem.operator.grid().clone();
    let n = grid.len();
    let dt = if steps == 0 { problem.dt } else { (problem.t_end - problem.t_start) / steps as f64 };
    let mut u = problem.initial.clone();
    let g0 = problem.collar.at(problem.t_start, n);
    for i in grid.collar_indices() {
        u[i] = g0[i];
    }
    let mut stepper = Stepper::new(problem);
    let mut times = vec![problem.t_start];
    let mut snapshots = vec![u.clone()];
    let mut residuals = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = problem.t_start + k as f64 * dt;
        let (next, res) = stepper.step(&u, t, dt)?;
        u = next;
        times.push(problem.t_start + (k + 1) as f64 * dt);
        snapshots.push(u.clone());
        residuals.push(res);
    }
    let meta = SchemeMeta {
        variant: problem.variant,
        theta: problem.theta,
        dt,
        h: grid.h(),
        steps,
        kernel: problem.operator.at(problem.t_start).meta().kernel.clone(),
    };
    Ok(Solution { times, snapshots, meta, residuals, grid })
}

/// The extended dual equation with the constant field `d`.
pub fn solve_dual_ext(problem: &Problem, d: f64) -> Result<Solution, SolveError> {
    let mut p = problem.clone();
    p.variant = Variant::DualExt { d };
    solve_parabolic(&p)
}

/// Solves `(lambda M + A) u = M f` on the interior with zero collar and
/// exterior data. Returns a full-grid vector.
pub fn resolvent_solve(form: &DiscreteForm, lambda: f64, f: &DVector<f64>) -> Result<DVector<f64>, SolveError> {
    if !(lambda > 0.0) {
        return Err(SolveError::Input(format!("lambda = {lambda} must be positive")));
    }
    resolvent_matrix_solve(&form.a(), form.grid(), lambda, f)
}

/// As [`resolvent_solve`] for an arbitrary full-grid operator matrix.
pub fn resolvent_matrix_solve(
    a: &DMatrix<f64>,
    grid: &Grid,
    lambda: f64,
    f: &DVector<f64>,
) -> Result<DVector<f64>, SolveError> {
    if f.len() != grid.len() || a.nrows() != grid.len() {
        return Err(SolveError::Input("size mismatch".into()));
    }
    let layout = Layout::new(grid);
    let ii = &layout.interior;
    let mut m = layout.block(a, ii, ii);
    for k in 0..ii.len() {
        m[(k, k)] += lambda;
    }
    let (x, _) = DenseSolver::new(m)?.solve(&layout.gather(f, ii))?;
    let mut u = DVector::zeros(grid.len());
    for (k, &i) in ii.iter().enumerate() {
        u[i] = x[k];
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble, AssemblyOptions, Domain};
    use crate::kernels::{Cone, DoubleCone, Kernel};
    use nalgebra::SymmetricEigen;

    fn grid() -> Grid {
        Grid::new(1, 2.0, 0.125, Domain::Box { center: [0.0, 0.0], half_width: 1.0 }).unwrap()
    }

    fn cone() -> DiscreteForm {
        let k = Kernel::cone(1, 1.5, 0.5, Cone { axis: [1.0, 0.0], half_angle: 0.5 }, DoubleCone::Full)
            .unwrap();
        assemble(&k, &grid(), &AssemblyOptions::default()).unwrap()
    }

    fn stable() -> DiscreteForm {
        assemble(&Kernel::stable(1, 1.0, true).unwrap(), &grid(), &AssemblyOptions::default()).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let p = Problem::new(Operator::Static(cone()), 1.5, 0.1);
        let s = solve_parabolic(&p).unwrap();
        assert_eq!(s.snapshots.len(), s.meta.steps + 1);
        assert!(s.snapshots.iter().all(|u| u.amax() == 0.0));
    }

    #[test]
    fn constants_are_steady_for_primal() {
        let mut p = Problem::new(Operator::Static(cone()), 1.5, 0.1);
        p.initial = DVector::from_element(p.initial.len(), 2.0);
        p.collar = Field::Constant(2.0);
        p.exterior = 2.0;
        let s = solve_parabolic(&p).unwrap();
        for u in &s.snapshots {
            assert!((u.add_scalar(-2.0)).amax() < 1e-6);
        }
    }

    #[test]
    fn eigenvector_decays_geometrically() {
        let form = stable();
        let g = form.grid().clone();
        let ii = g.interior_indices();
        let a = form.a();
        let aii = DMatrix::from_fn(ii.len(), ii.len(), |r, c| a[(ii[r], ii[c])]);
        let eig = SymmetricEigen::new(aii);
        let (mu, v) = (eig.eigenvalues[0], eig.eigenvectors.column(0).into_owned());
        let mut p = Problem::new(Operator::Static(form), 1.0, 0.0);
        p.t_end = 10.0 * p.dt;
        for (k, &i) in ii.iter().enumerate() {
            p.initial[i] = v[k];
        }
        let s = solve_parabolic(&p).unwrap();
        for (k, u) in s.snapshots.iter().enumerate() {
            let want = (1.0 + s.meta.dt * mu).powi(-(k as i32));
            let err = ii.iter().enumerate().map(|(r, &i)| (u[i] - want * v[r]).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "step {k}: {err}");
        }
    }

    #[test]
    fn dual_of_symmetric_kernel_matches_primal() {
        let mut p = Problem::new(Operator::Static(stable()), 1.0, 0.05);
        p.initial = DVector::from_fn(p.initial.len(), |i, _| 1.0 + (i as f64).sin());
        p.exterior = 0.5;
        let a = solve_parabolic(&p).unwrap();
        p.variant = Variant::Dual;
        let b = solve_parabolic(&p).unwrap();
        assert!((a.last() - b.last()).amax() < 1e-12);
    }

    #[test]
    fn dual_ext_with_zero_d_is_dual() {
        let mut p = Problem::new(Operator::Static(cone()), 1.5, 0.05);
        p.initial = DVector::from_fn(p.initial.len(), |i, _| 1.0 + (i as f64).cos());
        p.variant = Variant::Dual;
        let a = solve_parabolic(&p).unwrap();
        let b = solve_dual_ext(&p, 0.0).unwrap();
        assert_eq!((a.last() - b.last()).amax(), 0.0);
    }

    #[test]
    fn resolvent_of_zero_operator_scales() {
        let form = stable().modulated(0.0, 0.0);
        let f = DVector::from_fn(form.len(), |i, _| i as f64);
        let u = resolvent_solve(&form, 4.0, &f).unwrap();
        for i in form.grid().interior_indices() {
            assert!((u[i] - f[i] / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_theta() {
        let mut p = Problem::new(Operator::Static(stable()), 1.0, 0.05);
        p.theta = 0.3;
        assert!(matches!(solve_parabolic(&p), Err(SolveError::Input(_))));
    }
}
