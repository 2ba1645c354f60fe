//! Lattice versions of the restricted forms.
//!
//! With `K_ij = K(x_i, x_j)` read back from an assembled form and `w = h^{2d}`:
//!
//! * `E^K_M(u, v) = sum_{(i,j) in M} (u_i - u_j) v_i K_ij w`
//! * `E^{K_s}_M(u, v) = sum_M (u_i - u_j)(v_i - v_j) K^s_ij w`
//! * `E^{K_a}_M(u, v) = sum_M (u_i - u_j)(v_i + v_j) K^a_ij w`
//!
//! so that `E = E^{K_s} + E^{K_a} = 2 E^K` over all pairs. Diagonal pairs
//! never contribute.

use super::{CutoffProfile, DiscreteForm, DiscretizeError};
use crate::geometry::dist;

/// A set of index pairs `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PairSet {
    All,
    /// `A x B` given by node masks.
    Product(Vec<bool>, Vec<bool>),
    /// `{(i, j) : f_j > f_i}`.
    Above(Vec<f64>),
    Intersect(Box<PairSet>, Box<PairSet>),
    Complement(Box<PairSet>),
}

impl PairSet {
    /// `B x B`.
    pub fn square(mask: Vec<bool>) -> Self {
        PairSet::Product(mask.clone(), mask)
    }

    pub fn and(self, other: PairSet) -> Self {
        PairSet::Intersect(Box::new(self), Box::new(other))
    }

    pub fn complement(self) -> Self {
        PairSet::Complement(Box::new(self))
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        match self {
            PairSet::All => true,
            PairSet::Product(a, b) => a[i] && b[j],
            PairSet::Above(f) => f[j] > f[i],
            PairSet::Intersect(a, b) => a.contains(i, j) && b.contains(i, j),
            PairSet::Complement(a) => !a.contains(i, j),
        }
    }
}

/// Which part of the kernel a form uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Full,
    Sym,
    Anti,
}

fn kval(form: &DiscreteForm, part: Part, i: usize, j: usize) -> f64 {
    match part {
        Part::Full => form.k(i, j),
        Part::Sym => form.k_sym(i, j),
        Part::Anti => form.k_anti(i, j),
    }
}

fn pair_sum(form: &DiscreteForm, m: &PairSet, mut term: impl FnMut(usize, usize) -> f64) -> f64 {
    let n = form.len();
    let w = form.grid().cell_volume().powi(2);
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && m.contains(i, j) {
                acc += term(i, j);
            }
        }
    }
    acc * w
}

/// `E^K_M(u, v) = sum_M (u_i - u_j) v_i K_ij h^{2d}` with `K` the chosen part.
pub fn form_value(form: &DiscreteForm, part: Part, m: &PairSet, u: &[f64], v: &[f64]) -> f64 {
    pair_sum(form, m, |i, j| (u[i] - u[j]) * v[i] * kval(form, part, i, j))
}

/// `E^{K_s}_M(u, v)`.
pub fn sym_energy(form: &DiscreteForm, m: &PairSet, u: &[f64], v: &[f64]) -> f64 {
    pair_sum(form, m, |i, j| (u[i] - u[j]) * (v[i] - v[j]) * form.k_sym(i, j))
}

/// `E^{K_a}_M(u, v)`.
pub fn anti_energy(form: &DiscreteForm, m: &PairSet, u: &[f64], v: &[f64]) -> f64 {
    pair_sum(form, m, |i, j| (u[i] - u[j]) * (v[i] + v[j]) * form.k_anti(i, j))
}

/// Both sides of the half-set identities on `B x B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSetIdentity {
    pub sym_full: f64,
    pub sym_half: f64,
    pub anti_full: f64,
    pub anti_half: f64,
}

impl HalfSetIdentity {
    /// Largest relative mismatch of the two identities.
    pub fn defect(&self) -> f64 {
        let rel = |a: f64, b: f64| {
            let s = a.abs().max(b.abs());
            if s == 0.0 {
                0.0
            } else {
                (a - b).abs() / s
            }
        };
        rel(self.sym_full, self.sym_half).max(rel(self.anti_full, self.anti_half))
    }
}

/// Energies over `B x B` computed directly and as twice the sum over the half
/// `{f_j > f_i}`. Needs `f` injective on `B`.
pub fn half_set_identity(
    form: &DiscreteForm,
    mask: &[bool],
    f: &[f64],
    u: &[f64],
    v: &[f64],
) -> Result<HalfSetIdentity, DiscretizeError> {
    let mut vals: Vec<f64> = (0..mask.len()).filter(|&i| mask[i]).map(|i| f[i]).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite f"));
    if vals.windows(2).any(|w| w[0] == w[1]) {
        return Err(DiscretizeError::Input("f must be injective on the set".into()));
    }
    let sq = PairSet::square(mask.to_vec());
    let half = sq.clone().and(PairSet::Above(f.to_vec()));
    Ok(HalfSetIdentity {
        sym_full: sym_energy(form, &sq, u, v),
        sym_half: 2.0 * sym_energy(form, &half, u, v),
        anti_full: anti_energy(form, &sq, u, v),
        anti_half: 2.0 * anti_energy(form, &half, u, v),
    })
}

/// `Gamma(tau, tau)_i = sum_j (tau_i - tau_j)^2 K^s_ij h^d + tau_i^2 int_{R^d \ box} K_s(x_i, y) dy`.
pub fn carre_du_champ(form: &DiscreteForm, tau: &[f64]) -> Vec<f64> {
    let n = form.len();
    let hd = form.grid().cell_volume();
    let tail = form.tail_sym();
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                if j != i {
                    acc += (tau[i] - tau[j]).powi(2) * form.k_sym(i, j);
                }
            }
            acc * hd + tau[i] * tau[i] * 0.5 * tail[i]
        })
        .collect()
}

/// `sum_{i,j in M} (u_i - u_j)^2 min(tau_i^2, tau_j^2) K^s_ij h^{2d}` directly and
/// through the layers `{tau^2 >= level}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerCake {
    pub direct: f64,
    pub layered: f64,
    pub levels: usize,
}

/// Weighted energy of a radially nonincreasing `tau` around `center`, over
/// pairs in `B x B` with `B = mask`.
pub fn layer_cake_weighted_form(
    form: &DiscreteForm,
    tau: &[f64],
    center: &crate::geometry::Point,
    mask: &[bool],
    u: &[f64],
) -> Result<LayerCake, DiscretizeError> {
    let grid = form.grid();
    let n = form.len();
    // Radial monotonicity on the lattice.
    let mut order: Vec<usize> = (0..n).collect();
    let r: Vec<f64> = grid.nodes().iter().map(|x| dist(x, center)).collect();
    order.sort_by(|&a, &b| r[a].partial_cmp(&r[b]).expect("finite"));
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        let same = (r[a] - r[b]).abs() <= 1e-12 * r[b].max(1.0);
        if (same && (tau[a] - tau[b]).abs() > 1e-15) || (!same && tau[b] > tau[a]) {
            return Err(DiscretizeError::Input("tau is not radially nonincreasing".into()));
        }
    }
    let sq = |i: usize| tau[i] * tau[i];
    let direct = pair_sum(form, &PairSet::square(mask.to_vec()), |i, j| {
        (u[i] - u[j]).powi(2) * sq(i).min(sq(j)) * form.k_sym(i, j)
    });
    let mut levels: Vec<f64> = (0..n).filter(|&i| mask[i]).map(sq).filter(|&v| v > 0.0).collect();
    levels.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    levels.dedup();
    let mut layered = 0.0;
    for (k, &lv) in levels.iter().enumerate() {
        let next = levels.get(k + 1).copied().unwrap_or(0.0);
        let sub: Vec<bool> = (0..n).map(|i| mask[i] && sq(i) >= lv).collect();
        let e = pair_sum(form, &PairSet::square(sub), |i, j| (u[i] - u[j]).powi(2) * form.k_sym(i, j));
        layered += (lv - next) * e;
    }
    Ok(LayerCake { direct, layered, levels: levels.len() })
}

/// Convenience wrapper sampling a [`CutoffProfile`] and restricting to its support ball.
pub fn layer_cake_cutoff(form: &DiscreteForm, tau: &CutoffProfile, u: &[f64]) -> Result<LayerCake, DiscretizeError> {
    let grid = form.grid();
    let t = tau.sample(grid);
    let mask = grid.ball_mask(&tau.center, tau.outer());
    layer_cake_weighted_form(form, &t, &tau.center, &mask, u)
}
