//! Collocation assembly of the nonlocal operator on a [`Grid`].
//!
//! Storage keeps the pieces apart so that every derived object (transpose,
//! time slices, restricted forms, pointwise kernel values) is exact:
//!
//! * `S`: the `K_s` operator, `S_ij = -2 K_s(x_i, x_j) h^d` off the diagonal
//!   and `S_ii = 2 sum_j K_s(x_i, x_j) h^d + T^s_i`;
//! * `N`: the antisymmetric off-diagonal `N_ij = -2 K_a(x_i, x_j) h^d`;
//! * `q_i = 2 sum_j K_a(x_i, x_j) h^d + T^a_i`, the drift diagonal;
//! * optionally a symmetric nearest-neighbour stencil for the self cell.
//!
//! `A = S + N + diag(q)`, `A_s = S + diag(q)` and `A_a = N`. Since
//! `u^T N u = 0` the quadratic form of `A` is that of `A_s`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DiscretizeError, Grid};
use crate::geometry::{add, Point};
use crate::kernels::{Kernel, TimeKernel};
use crate::quadrature::{ray_exit_box, PolarRule};

/// What to do with the cell around the collocation node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelfCellTreatment {
    /// Drop it. The missing principal value is `O(h^{2-alpha})` for smooth `u`.
    #[default]
    Excluded,
    /// Add `-sum_k w_k d_kk u` with `w_k = int_cell h_k^2 K_s(x, x + h) dh`,
    /// discretized by the 3-point Laplacian.
    SecondMoment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    #[serde(default)]
    pub rule: PolarRule,
    #[serde(default)]
    pub self_cell: SelfCellTreatment,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { rule: PolarRule::default(), self_cell: SelfCellTreatment::Excluded }
    }
}

/// Self-cell correction: symmetric edges `(i, j, c)` contributing
/// `c (u_i - u_j)` to row `i` and `c (u_j - u_i)` to row `j`, and the
/// diagonal share `ghost_i` of edges that leave the box.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub edges: Vec<(usize, usize, f64)>,
    pub ghost: DVector<f64>,
}

impl Stencil {
    fn apply_into(&self, u: &DVector<f64>, out: &mut DVector<f64>) {
        for &(i, j, c) in &self.edges {
            let f = c * (u[i] - u[j]);
            out[i] += f;
            out[j] -= f;
        }
        for i in 0..u.len() {
            out[i] += self.ghost[i] * u[i];
        }
    }

    fn add_to(&self, m: &mut DMatrix<f64>, factor: f64) {
        for &(i, j, c) in &self.edges {
            m[(i, i)] += factor * c;
            m[(j, j)] += factor * c;
            m[(i, j)] -= factor * c;
            m[(j, i)] -= factor * c;
        }
        for i in 0..self.ghost.len() {
            m[(i, i)] += factor * self.ghost[i];
        }
    }

    fn scaled(&self, f: f64) -> Self {
        Self {
            edges: self.edges.iter().map(|&(i, j, c)| (i, j, f * c)).collect(),
            ghost: &self.ghost * f,
        }
    }
}

/// Provenance of an assembled form, written into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormMeta {
    pub kernel: String,
    pub h: f64,
    pub nodes: usize,
    pub rule: PolarRule,
    pub self_cell: SelfCellTreatment,
    /// Time-slice factors `(a, s)` when the form is a modulated slice.
    pub factors: (f64, f64),
}

/// Discrete operator and forms for one kernel on one grid.
#[derive(Debug, Clone)]
pub struct DiscreteForm {
    grid: Grid,
    s: DMatrix<f64>,
    n: DMatrix<f64>,
    q: DVector<f64>,
    tail_s: DVector<f64>,
    tail_a: DVector<f64>,
    stencil: Option<Stencil>,
    transposed: bool,
    meta: FormMeta,
}

/// `2 int_{R^d \ box} (K_s, K_a)(x, y) dy` at every node.
fn tails(kernel: &Kernel, grid: &Grid, rule: &PolarRule) -> Result<Vec<[f64; 2]>, DiscretizeError> {
    let d = grid.d();
    let x_half = grid.half_width();
    let breaks = kernel.breakpoints();
    grid.nodes()
        .par_iter()
        .map(|x| {
            rule.integrate_far(
                d,
                &breaks,
                |w| ray_exit_box(x, w, x_half, d),
                |h| {
                    let r = h[0].hypot(h[1]);
                    let (ks, ka) = kernel.split_at(x, &add(x, h), r);
                    [2.0 * ks, 2.0 * ka]
                },
            )
            .map_err(|e| DiscretizeError::Quadrature { node: *x, source: e })
        })
        .collect()
}

/// `(int_cell h_0^2 K_s, int_cell h_1^2 K_s)` over the cell centred at `x`.
fn cell_moments(kernel: &Kernel, x: &Point, h: f64, d: usize, rule: &PolarRule) -> Result<[f64; 2], DiscretizeError> {
    let breaks = kernel.breakpoints();
    rule.integrate_near(
        d,
        &breaks,
        |w| ray_exit_box(&[0.0, 0.0], w, 0.5 * h, d),
        |hv| {
            let r = hv[0].hypot(hv[1]);
            let (ks, _) = kernel.split_at(x, &add(x, hv), r);
            [hv[0] * hv[0] * ks, hv[1] * hv[1] * ks]
        },
    )
    .map_err(|e| DiscretizeError::Quadrature { node: *x, source: e })
}

fn second_moment_stencil(kernel: &Kernel, grid: &Grid, rule: &PolarRule) -> Result<Stencil, DiscretizeError> {
    let d = grid.d();
    let h = grid.h();
    let w: Vec<[f64; 2]> = if kernel.symmetric_part_is_translation_invariant() {
        let w0 = cell_moments(kernel, &[0.0, 0.0], h, d, rule)?;
        vec![w0; grid.len()]
    } else {
        grid.nodes()
            .par_iter()
            .map(|x| cell_moments(kernel, x, h, d, rule))
            .collect::<Result<_, _>>()?
    };
    let h2 = h * h;
    let mut edges = Vec::new();
    let mut ghost = DVector::zeros(grid.len());
    for i in 0..grid.len() {
        for axis in 0..d {
            match grid.neighbor(i, axis, 1) {
                Some(j) => edges.push((i, j, 0.5 * (w[i][axis] + w[j][axis]) / h2)),
                None => ghost[i] += w[i][axis] / h2,
            }
            if grid.neighbor(i, axis, -1).is_none() {
                ghost[i] += w[i][axis] / h2;
            }
        }
    }
    Ok(Stencil { edges, ghost })
}

/// Assembles the operator of `kernel` on `grid`.
pub fn assemble(kernel: &Kernel, grid: &Grid, opts: &AssemblyOptions) -> Result<DiscreteForm, DiscretizeError> {
    if kernel.d() != grid.d() {
        return Err(DiscretizeError::Mismatch(format!(
            "kernel dimension {} but grid dimension {}",
            kernel.d(),
            grid.d()
        )));
    }
    let n = grid.len();
    let hd = grid.cell_volume();
    let nodes = grid.nodes();
    let mut s = DMatrix::<f64>::zeros(n, n);
    let mut a = DMatrix::<f64>::zeros(n, n);
    // Column j holds the pairs (x_i, x_j); both orders are evaluated so that
    // the symmetric and antisymmetric parts come out exactly.
    s.as_mut_slice()
        .par_chunks_mut(n)
        .zip(a.as_mut_slice().par_chunks_mut(n))
        .enumerate()
        .try_for_each(|(j, (scol, acol))| -> Result<(), DiscretizeError> {
            let xj = &nodes[j];
            for i in 0..n {
                if i == j {
                    continue;
                }
                let xi = &nodes[i];
                let r = (xi[0] - xj[0]).hypot(xi[1] - xj[1]);
                let (ks, ka) = kernel.decompose_at(xi, xj, r);
                if !(ks.is_finite() && ka.is_finite()) {
                    return Err(DiscretizeError::Kernel { x: *xi, y: *xj });
                }
                scol[i] = -2.0 * ks * hd;
                acol[i] = -2.0 * ka * hd;
            }
            Ok(())
        })?;

    let t = tails(kernel, grid, &opts.rule)?;
    let tail_s = DVector::from_iterator(n, t.iter().map(|v| v[0]));
    let tail_a = DVector::from_iterator(n, t.iter().map(|v| v[1]));
    let mut q = DVector::zeros(n);
    for i in 0..n {
        let mut rs = 0.0;
        let mut ra = 0.0;
        for j in 0..n {
            rs -= s[(i, j)];
            ra -= a[(i, j)];
        }
        s[(i, i)] = rs + tail_s[i];
        q[i] = ra + tail_a[i];
    }
    let stencil = match opts.self_cell {
        SelfCellTreatment::Excluded => None,
        SelfCellTreatment::SecondMoment => Some(second_moment_stencil(kernel, grid, &opts.rule)?),
    };
    Ok(DiscreteForm {
        grid: grid.clone(),
        s,
        n: a,
        q,
        tail_s,
        tail_a,
        stencil,
        transposed: false,
        meta: FormMeta {
            kernel: kernel.describe(),
            h: grid.h(),
            nodes: n,
            rule: opts.rule.clone(),
            self_cell: opts.self_cell,
            factors: (1.0, 1.0),
        },
    })
}

/// Assembles the slice at time `t` by reassembling the frozen kernel.
pub fn assemble_time_full(
    tk: &TimeKernel,
    grid: &Grid,
    t: f64,
    opts: &AssemblyOptions,
) -> Result<DiscreteForm, DiscretizeError> {
    let mut f = assemble(&tk.slice(t), grid, opts)?;
    f.meta.factors = tk.factors(t);
    Ok(f)
}

/// Slices of a time kernel by rescaling one assembly of the base kernel.
#[derive(Debug, Clone)]
pub struct TimeAssembler {
    kernel: TimeKernel,
    base: DiscreteForm,
}

impl TimeAssembler {
    pub fn new(tk: &TimeKernel, grid: &Grid, opts: &AssemblyOptions) -> Result<Self, DiscretizeError> {
        Ok(Self { kernel: tk.clone(), base: assemble(tk.base(), grid, opts)? })
    }

    pub fn base(&self) -> &DiscreteForm {
        &self.base
    }

    /// `A(t) = a(t) A^{K_s} + s(t) A^{K_a}`.
    pub fn at(&self, t: f64) -> DiscreteForm {
        let (a, s) = self.kernel.factors(t);
        self.base.modulated(a, s)
    }
}

/// One-shot convenience: the slice at `t`.
pub fn assemble_time(
    tk: &TimeKernel,
    grid: &Grid,
    t: f64,
    opts: &AssemblyOptions,
) -> Result<DiscreteForm, DiscretizeError> {
    Ok(TimeAssembler::new(tk, grid, opts)?.at(t))
}

impl DiscreteForm {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn meta(&self) -> &FormMeta {
        &self.meta
    }
    pub fn is_transposed(&self) -> bool {
        self.transposed
    }
    pub fn len(&self) -> usize {
        self.grid.len()
    }
    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    fn n_sign(&self) -> f64 {
        if self.transposed {
            -1.0
        } else {
            1.0
        }
    }

    /// The `K_s` operator without the drift diagonal, self-cell stencil included.
    pub fn sym_operator(&self) -> DMatrix<f64> {
        let mut m = self.s.clone();
        if let Some(st) = &self.stencil {
            st.add_to(&mut m, 1.0);
        }
        m
    }

    /// `A_s = S + diag(q)`: symmetric, with the quadratic form of `A`.
    pub fn a_s(&self) -> DMatrix<f64> {
        let mut m = self.sym_operator();
        for i in 0..self.len() {
            m[(i, i)] += self.q[i];
        }
        m
    }

    /// `A_a`: antisymmetric off-diagonal part.
    pub fn a_a(&self) -> DMatrix<f64> {
        &self.n * self.n_sign()
    }

    /// `A = A_s + A_a`.
    pub fn a(&self) -> DMatrix<f64> {
        let mut m = self.a_s();
        m += &self.n * self.n_sign();
        m
    }

    /// `A u` without forming `A`.
    pub fn apply(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = &self.s * u;
        out.gemv(self.n_sign(), &self.n, u, 1.0);
        for i in 0..u.len() {
            out[i] += self.q[i] * u[i];
        }
        if let Some(st) = &self.stencil {
            st.apply_into(u, &mut out);
        }
        out
    }

    /// `A_s u`.
    pub fn apply_sym(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = &self.s * u;
        for i in 0..u.len() {
            out[i] += self.q[i] * u[i];
        }
        if let Some(st) = &self.stencil {
            st.apply_into(u, &mut out);
        }
        out
    }

    /// Weights `T` coupling node `i` to a constant exterior datum: the
    /// operator applied to the constant extension `c` is `A c 1 - T c`.
    pub fn exterior_weights(&self) -> DVector<f64> {
        let mut t = &self.tail_s + &self.tail_a * self.n_sign();
        if let Some(st) = &self.stencil {
            t += &st.ghost;
        }
        t
    }

    /// `2 int_{R^d \ box} K_s(x_i, y) dy`.
    pub fn tail_sym(&self) -> &DVector<f64> {
        &self.tail_s
    }

    /// `2 int_{R^d \ box} K_a(x_i, y) dy` of the kernel that generated the
    /// effective operator (negated for a transposed form).
    pub fn tail_anti(&self) -> DVector<f64> {
        &self.tail_a * self.n_sign()
    }

    /// `q_i = 2 int K_a(x_i, y) dy` (grid sum plus tail) of the primal kernel.
    pub fn drift_diag(&self) -> &DVector<f64> {
        &self.q
    }

    /// Self-cell stencil, when assembled with [`SelfCellTreatment::SecondMoment`].
    pub fn stencil(&self) -> Option<&Stencil> {
        self.stencil.as_ref()
    }

    /// `K_s(x_i, x_j)` for `i != j`, read back from the matrix.
    #[inline]
    pub fn k_sym(&self, i: usize, j: usize) -> f64 {
        -self.s[(i, j)] / (2.0 * self.grid.cell_volume())
    }

    /// `K_a(x_i, x_j)` of the effective kernel (`K(y, x)` after transposition).
    #[inline]
    pub fn k_anti(&self, i: usize, j: usize) -> f64 {
        -self.n_sign() * self.n[(i, j)] / (2.0 * self.grid.cell_volume())
    }

    /// `K(x_i, x_j) = K_s + K_a`.
    #[inline]
    pub fn k(&self, i: usize, j: usize) -> f64 {
        self.k_sym(i, j) + self.k_anti(i, j)
    }

    /// The dual form `E^(u, v) = E(v, u)`: `A^T`, with `A_s` kept, `A_a`
    /// negated, and exterior weights taken from `K(y, x)`.
    pub fn transpose_form(&self) -> Self {
        let mut f = self.clone();
        f.transposed = !f.transposed;
        f
    }

    /// `a A^{K_s} + s A^{K_a}`: the symmetric operator (with the self-cell
    /// stencil) scaled by `a`, the antisymmetric pieces by `s`.
    pub fn modulated(&self, a: f64, s: f64) -> Self {
        let mut f = self.clone();
        f.s *= a;
        f.tail_s *= a;
        f.stencil = self.stencil.as_ref().map(|st| st.scaled(a));
        f.n *= s;
        f.q *= s;
        f.tail_a *= s;
        f.meta.factors = (self.meta.factors.0 * a, self.meta.factors.1 * s);
        f
    }

    /// Dense dump of `A` as CSV rows.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let a = self.a();
        for i in 0..a.nrows() {
            let row: Vec<String> = (0..a.ncols()).map(|j| format!("{:e}", a[(i, j)])).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
