//! Declarative scenarios and the ensemble harnesses that run them.
//!
//! A [`Scenario`] is plain JSON. Every field is checked by
//! [`Scenario::validate`] before anything is computed; errors carry the
//! dotted path of the offending field. Ensemble members draw their data from
//! stream `member` of the seeded generator, so reruns are bit-identical
//! regardless of thread scheduling.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assumptions::{
    cp_check, cutoff_profile, good_set_fraction, k1_glob_profile, k1_profile, poincare_constant, sobolev_ratio,
    suff_k1_check, tail_profile, AssumptionError, BallSpec, Comparison, SuffK1Branch,
};
use crate::discretize::{assemble, AssemblyOptions, DiscreteForm, DiscretizeError, Domain, Grid, SelfCellTreatment};
use crate::estimates::{
    caccioppoli_audit, harnack_quotient, holder_fit, AuditVariant, CaccioppoliReport, Cylinder, EstimateError,
    HolderFit,
};
use crate::geometry::Point;
use crate::kernels::{Family, Kernel, KernelError, KernelSpec};
use crate::mosco::{
    default_probes, garding_sector_check, limit_field, local_coefficients, resolvent_convergence, AlphaFamily,
    GardingReport, LocalCoefficients, MoscoError, ResolventConvergence,
};
use crate::random::{member_field, FieldSpec};
use crate::solve::{solve_parabolic, Field, Operator, Problem, SolveError, Solution, Variant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("kernel: {0}")]
    Kernel(#[from] KernelError),
    #[error("assembly: {0}")]
    Discretize(#[from] DiscretizeError),
    #[error("solve: {0}")]
    Solve(#[from] SolveError),
    #[error("estimate: {0}")]
    Estimate(#[from] EstimateError),
    #[error("assumption: {0}")]
    Assumption(#[from] AssumptionError),
    #[error("mosco: {0}")]
    Mosco(#[from] MoscoError),
}

impl ScenarioError {
    fn config(path: &str, message: impl Into<String>) -> Self {
        ScenarioError::Config { path: path.to_string(), message: message.into() }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, ScenarioError::Config { .. })
    }

    /// Pipeline stage that failed.
    pub fn stage(&self) -> &'static str {
        match self {
            ScenarioError::Config { .. } => "config",
            ScenarioError::Kernel(_) => "kernel",
            ScenarioError::Discretize(_) => "assembly",
            ScenarioError::Solve(_) => "solve",
            ScenarioError::Estimate(_) => "estimate",
            ScenarioError::Assumption(_) => "assumption",
            ScenarioError::Mosco(_) => "mosco",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_domain")]
    pub domain: Domain,
}

fn default_half_width() -> f64 {
    1.25
}
fn default_h() -> f64 {
    1.0 / 64.0
}
fn default_domain() -> Domain {
    Domain::Box { center: [0.0, 0.0], half_width: 1.0 }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { half_width: default_half_width(), h: default_h(), domain: default_domain() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VariantSpec {
    #[default]
    Primal,
    Dual,
    DualExt { d: f64 },
}

impl From<VariantSpec> for Variant {
    fn from(v: VariantSpec) -> Self {
        match v {
            VariantSpec::Primal => Variant::Primal,
            VariantSpec::Dual => Variant::Dual,
            VariantSpec::DualExt { d } => Variant::DualExt { d },
        }
    }
}

/// Random strictly positive data `floor + exp(mean + sigma G)` on the initial
/// slice and the collar; a constant nonnegative `source` turns solutions into
/// supersolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default)]
    pub variant: VariantSpec,
    #[serde(default = "one")]
    pub theta: f64,
    /// Defaults to `h^alpha / 4`.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Defaults to what the harness needs (`2 R^alpha`).
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub exterior: f64,
    #[serde(default)]
    pub data: FieldSpec,
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default)]
    pub source: f64,
}

fn one() -> f64 {
    1.0
}
fn default_floor() -> f64 {
    0.1
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            variant: VariantSpec::Primal,
            theta: 1.0,
            dt: None,
            t_end: None,
            exterior: 0.0,
            data: FieldSpec::default(),
            floor: default_floor(),
            source: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSpec {
    #[serde(default = "half")]
    pub r: f64,
    #[serde(default)]
    pub center: Point,
}

fn half() -> f64 {
    0.5
}

impl Default for CylinderSpec {
    fn default() -> Self {
        Self { r: 0.5, center: [0.0, 0.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderSpec {
    #[serde(default = "two")]
    pub nu: f64,
    #[serde(default = "four")]
    pub scales: usize,
}

fn two() -> f64 {
    2.0
}
fn four() -> usize {
    4
}

impl Default for HolderSpec {
    fn default() -> Self {
        Self { nu: 2.0, scales: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AuditVariantSpec {
    #[default]
    Primal,
    Dual,
    DualExt { d: f64, theta: f64 },
}

impl From<AuditVariantSpec> for AuditVariant {
    fn from(v: AuditVariantSpec) -> Self {
        match v {
            AuditVariantSpec::Primal => AuditVariant::Primal,
            AuditVariantSpec::Dual => AuditVariant::Dual,
            AuditVariantSpec::DualExt { d, theta } => AuditVariant::DualExt { d, theta },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaccioppoliSpec {
    #[serde(default = "half")]
    pub r: f64,
    #[serde(default = "quarter")]
    pub rho: f64,
    #[serde(default = "default_ps")]
    pub p: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Exponent in the weight `1 v p^gamma` of the dual variants.
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub variant: AuditVariantSpec,
}

fn quarter() -> f64 {
    0.25
}
fn default_ps() -> Vec<f64> {
    vec![0.5, 2.0]
}
fn default_eps() -> f64 {
    0.1
}

impl Default for CaccioppoliSpec {
    fn default() -> Self {
        Self { r: 0.5, rho: 0.25, p: default_ps(), eps: default_eps(), gamma: 1.0, variant: AuditVariantSpec::Primal }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoscoSpec {
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "half")]
    pub delta: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    /// Gårding parameter for the margin report.
    #[serde(default = "one")]
    pub lambda_g: f64,
    #[serde(default)]
    pub center: Point,
    #[serde(default = "default_probe_count")]
    pub probes: usize,
}

fn default_alphas() -> Vec<f64> {
    vec![1.5, 1.8, 1.9, 1.95]
}
fn default_probe_count() -> usize {
    8
}

impl Default for MoscoSpec {
    fn default() -> Self {
        Self {
            alphas: default_alphas(),
            delta: 0.5,
            lambda: 1.0,
            lambda_g: 1.0,
            center: [0.0, 0.0],
            probes: default_probe_count(),
        }
    }
}

/// Parameters of the assumption checks. There are no built-in pass thresholds,
/// so `thresholds` holds user bounds per assumption name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionSpec {
    #[serde(default)]
    pub center: Point,
    #[serde(default = "half")]
    pub r: f64,
    #[serde(default = "quarter")]
    pub rho: f64,
    #[serde(default = "two")]
    pub theta: f64,
    #[serde(default = "two")]
    pub mu: f64,
    /// `D` of the good-set condition.
    #[serde(default = "half")]
    pub dd: f64,
    #[serde(default = "default_per_axis")]
    pub per_axis: usize,
    /// Tail scale factors `A`.
    #[serde(default = "default_tail_a")]
    pub tail_a: Vec<f64>,
    #[serde(default = "default_zetas")]
    pub zetas: Vec<f64>,
    /// Hölder exponent of `V` for the sufficient (K1) criterion; gradient branch when absent.
    #[serde(default)]
    pub holder_gamma: Option<f64>,
    #[serde(default)]
    pub thresholds: std::collections::BTreeMap<String, f64>,
}

fn default_per_axis() -> usize {
    32
}
fn default_tail_a() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0]
}
fn default_zetas() -> Vec<f64> {
    vec![0.03125, 0.0625, 0.125, 0.25]
}

impl Default for AssumptionSpec {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            r: 0.5,
            rho: 0.25,
            theta: 2.0,
            mu: 2.0,
            dd: 0.5,
            per_axis: default_per_axis(),
            tail_a: default_tail_a(),
            zetas: default_zetas(),
            holder_gamma: None,
            thresholds: Default::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessSpec {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    #[serde(default)]
    pub cylinder: CylinderSpec,
    #[serde(default)]
    pub holder: HolderSpec,
    #[serde(default)]
    pub caccioppoli: CaccioppoliSpec,
    #[serde(default)]
    pub mosco: MoscoSpec,
    #[serde(default)]
    pub assumption: AssumptionSpec,
}

fn default_seed() -> u64 {
    7
}
fn default_ensemble() -> usize {
    50
}

impl Default for HarnessSpec {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            ensemble: default_ensemble(),
            cylinder: CylinderSpec::default(),
            holder: HolderSpec::default(),
            caccioppoli: CaccioppoliSpec::default(),
            mosco: MoscoSpec::default(),
            assumption: AssumptionSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kernel: KernelSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub assembly: AssemblyOptions,
    #[serde(default)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub harness: HarnessSpec,
}

fn positive(path: &str, v: f64) -> Result<(), ScenarioError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::config(path, format!("must be positive and finite, got {v}")))
    }
}

impl Scenario {
    /// Defaults around a kernel preset.
    pub fn preset(name: &str, d: usize, alpha: f64) -> Option<Self> {
        let kernel = KernelSpec::preset(name, d, alpha)?;
        Some(Self {
            kernel,
            grid: GridSpec::default(),
            assembly: AssemblyOptions::default(),
            problem: ProblemSpec::default(),
            harness: HarnessSpec::default(),
        })
    }

    /// Checks every field, rebuilds the quadrature nodes and returns the
    /// kernel and grid.
    pub fn validate(&mut self) -> Result<(Kernel, Grid), ScenarioError> {
        let kernel = self.kernel.build().map_err(|e| ScenarioError::config("kernel", e.to_string()))?;
        self.kernel
            .build_time()
            .map_err(|e| ScenarioError::config("kernel.time", e.to_string()))?;
        positive("grid.h", self.grid.h)?;
        positive("grid.half_width", self.grid.half_width)?;
        let grid = Grid::new(kernel.d(), self.grid.half_width, self.grid.h, self.grid.domain)
            .map_err(|e| ScenarioError::config("grid", e.to_string()))?;
        self.assembly.rule =
            self.assembly.rule.rebuilt().map_err(|e| ScenarioError::config("assembly.rule", e.to_string()))?;

        let p = &self.problem;
        if !(0.5..=1.0).contains(&p.theta) {
            return Err(ScenarioError::config("problem.theta", format!("{} not in [1/2, 1]", p.theta)));
        }
        if let Some(dt) = p.dt {
            positive("problem.dt", dt)?;
        }
        if let Some(t) = p.t_end {
            positive("problem.t_end", t)?;
        }
        if !(p.floor > 0.0) {
            return Err(ScenarioError::config("problem.floor", "data must be strictly positive"));
        }
        if !(p.source >= 0.0) {
            return Err(ScenarioError::config("problem.source", "supersolution source must be nonnegative"));
        }
        if !p.exterior.is_finite() {
            return Err(ScenarioError::config("problem.exterior", "must be finite"));
        }
        positive("problem.data.length", p.data.length)?;
        if !(p.data.sigma >= 0.0) {
            return Err(ScenarioError::config("problem.data.sigma", "must be nonnegative"));
        }

        let h = &self.harness;
        if h.ensemble == 0 {
            return Err(ScenarioError::config("harness.ensemble", "must be at least 1"));
        }
        positive("harness.cylinder.r", h.cylinder.r)?;
        if !(h.holder.nu > 1.0) {
            return Err(ScenarioError::config("harness.holder.nu", "must exceed 1"));
        }
        if h.holder.scales < 4 {
            return Err(ScenarioError::config("harness.holder.scales", "need at least 4 scales"));
        }
        let c = &h.caccioppoli;
        BallSpec::new(self.harness.assumption.center, c.r, c.rho, self.grid.domain, kernel.d())
            .map_err(|e| ScenarioError::config("harness.caccioppoli", e.to_string()))?;
        positive("harness.caccioppoli.eps", c.eps)?;
        if let Some(bad) = c.p.iter().find(|p| **p == 1.0 || !(**p > 0.0)) {
            return Err(ScenarioError::config("harness.caccioppoli.p", format!("{bad} is not a valid exponent")));
        }
        if !(c.gamma >= 1.0) {
            return Err(ScenarioError::config("harness.caccioppoli.gamma", "must be at least 1"));
        }
        let m = &h.mosco;
        if m.alphas.len() < 2 || m.alphas.windows(2).any(|w| !(w[1] > w[0])) || m.alphas.iter().any(|a| !(*a > 0.0 && *a < 2.0)) {
            return Err(ScenarioError::config("harness.mosco.alphas", "need at least two increasing orders in (0, 2)"));
        }
        positive("harness.mosco.delta", m.delta)?;
        positive("harness.mosco.lambda", m.lambda)?;
        let a = &h.assumption;
        BallSpec::new(a.center, a.r, a.rho, self.grid.domain, kernel.d())
            .map_err(|e| ScenarioError::config("harness.assumption", e.to_string()))?;
        if !(a.theta >= 1.0) {
            return Err(ScenarioError::config("harness.assumption.theta", "must be at least 1"));
        }
        if !(a.mu >= 1.0) {
            return Err(ScenarioError::config("harness.assumption.mu", "must be at least 1"));
        }
        Ok((kernel, grid))
    }

    pub fn with_h(&self, h: f64) -> Self {
        let mut s = self.clone();
        s.grid.h = h;
        s
    }

    pub fn alpha(&self) -> f64 {
        self.kernel.alpha
    }

    /// Strictly positive data of ensemble member `member`.
    pub fn member_data(&self, grid: &Grid, member: u64) -> Vec<f64> {
        let f = member_field(self.problem.data, grid.d(), self.harness.seed, member);
        grid.sample(|x| self.problem.floor + f.value(x))
    }

    fn problem(&self, form: &DiscreteForm, member: u64, t_end: f64) -> Problem {
        let data = DVector::from_vec(self.member_data(form.grid(), member));
        let mut p = Problem::new(Operator::Static(form.clone()), self.alpha(), t_end);
        p.dt = self.time_step();
        p.variant = self.problem.variant.into();
        p.theta = self.problem.theta;
        p.initial = data.clone();
        p.collar = Field::Nodal(data);
        p.exterior = self.problem.exterior;
        p.source = if self.problem.source > 0.0 { Field::Constant(self.problem.source) } else { Field::Zero };
        p
    }

    /// `h^alpha / 4` unless configured.
    pub fn time_step(&self) -> f64 {
        self.problem.dt.unwrap_or(self.grid.h.powf(self.alpha()) / 4.0)
    }

    /// `2 R^alpha` unless configured.
    pub fn horizon(&self) -> f64 {
        self.problem.t_end.unwrap_or(2.0 * self.harness.cylinder.r.powf(self.alpha()))
    }

    pub fn solve_member(&self, form: &DiscreteForm, member: u64) -> Result<Solution, ScenarioError> {
        Ok(solve_parabolic(&self.problem(form, member, self.horizon()))?)
    }

    /// Cylinder of the weak Harnack audit: its early box starts at the
    /// horizon minus `2 R^alpha`.
    pub fn harnack_cylinder(&self) -> Cylinder {
        let c = &self.harness.cylinder;
        let ra = c.r.powf(self.alpha());
        Cylinder { t0: self.horizon() - ra, r: c.r, alpha: self.alpha(), center: c.center }
    }

    /// Cylinder of the Hölder fit, ending at the horizon.
    pub fn holder_cylinder(&self) -> Cylinder {
        let c = &self.harness.cylinder;
        Cylinder { t0: self.horizon(), r: c.r, alpha: self.alpha(), center: c.center }
    }

    pub fn assemble(&self) -> Result<(Kernel, DiscreteForm), ScenarioError> {
        let mut s = self.clone();
        let (k, g) = s.validate()?;
        let form = assemble(&k, &g, &s.assembly)?;
        Ok((k, form))
    }
}

/// Runs `f(member)` for every member concurrently, in member order.
pub fn run_ensemble<T: Send>(
    n: usize,
    f: impl Fn(u64) -> Result<T, ScenarioError> + Sync + Send,
) -> Result<Vec<T>, ScenarioError> {
    (0..n as u64).into_par_iter().map(f).collect()
}

/// Order statistics of an ensemble column; non-finite values are counted
/// separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub non_finite: usize,
    pub median: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        v.sort_by(f64::total_cmp);
        let median = match v.len() {
            0 => None,
            n if n % 2 == 1 => Some(v[n / 2]),
            n => Some(0.5 * (v[n / 2 - 1] + v[n / 2])),
        };
        Self {
            count: values.len(),
            non_finite: values.len() - v.len(),
            median,
            min: v.first().copied(),
            max: v.last().copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackRow {
    pub run: u64,
    pub c_emp: f64,
    pub min_value: f64,
}

/// Weak Harnack quotients over the ensemble.
pub fn harnack_ensemble(sc: &Scenario, form: &DiscreteForm) -> Result<Vec<HarnackRow>, ScenarioError> {
    let cyl = sc.harnack_cylinder();
    run_ensemble(sc.harness.ensemble, |m| {
        let sol = sc.solve_member(form, m)?;
        let c_emp = harnack_quotient(&sol, &cyl, sc.problem.source)?;
        let min_value = sol.snapshots.iter().flat_map(|u| u.iter().copied()).fold(f64::INFINITY, f64::min);
        Ok(HarnackRow { run: m, c_emp, min_value })
    })
}

/// Hölder fits over the ensemble.
pub fn holder_ensemble(sc: &Scenario, form: &DiscreteForm) -> Result<Vec<HolderFit>, ScenarioError> {
    let cyl = sc.holder_cylinder();
    let hs = &sc.harness.holder;
    run_ensemble(sc.harness.ensemble, |m| {
        let sol = sc.solve_member(form, m)?;
        Ok(holder_fit(&sol, &cyl, hs.nu, hs.scales)?)
    })
}

/// Caccioppoli audits of random positive fields: one row per member and
/// exponent.
pub fn caccioppoli_ensemble(
    sc: &Scenario,
    form: &DiscreteForm,
    n: usize,
) -> Result<Vec<(u64, CaccioppoliReport)>, ScenarioError> {
    let c = &sc.harness.caccioppoli;
    let ball = BallSpec::new(sc.harness.assumption.center, c.r, c.rho, sc.grid.domain, form.grid().d())?;
    let rows = run_ensemble(n, |m| {
        let u = sc.member_data(form.grid(), m);
        c.p.iter()
            .map(|&p| {
                caccioppoli_audit(&u, form, sc.alpha(), &ball, p, c.eps, c.variant.into(), c.gamma)
                    .map(|r| (m, r))
                    .map_err(ScenarioError::from)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoscoRun {
    pub coefficients: LocalCoefficients,
    pub resolvent: ResolventConvergence,
    pub garding: Vec<GardingReport>,
}

/// Moments, resolvent gaps and Gårding margins for the kernel family of the
/// scenario at the configured orders. The self cell carries its second
/// moment, which is the whole operator in the limit.
pub fn mosco_run(sc: &Scenario, grid: &Grid) -> Result<MoscoRun, ScenarioError> {
    let m = &sc.harness.mosco;
    let family = AlphaFamily::from_spec(&sc.kernel, &m.alphas)?;
    let opts = AssemblyOptions { self_cell: SelfCellTreatment::SecondMoment, ..sc.assembly.clone() };
    let coefficients = local_coefficients(&family, &m.center, m.delta, &opts.rule)?;
    let coeff = limit_field(&family, grid, m.delta, &opts.rule)?;
    let c = sc.harness.cylinder.center;
    let f = DVector::from_vec(grid.sample(|x| {
        let r2 = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / 0.25;
        if r2 < 1.0 {
            (1.0 - r2).powi(3)
        } else {
            0.0
        }
    }));
    let resolvent = resolvent_convergence(&family, grid, &coeff, &f, m.lambda, &opts)?;
    let probes = default_probes(grid, m.probes);
    let garding = family
        .kernels()
        .par_iter()
        .map(|k| Ok(garding_sector_check(&assemble(k, grid, &opts)?, m.lambda_g, &probes)))
        .collect::<Result<_, ScenarioError>>()?;
    Ok(MoscoRun { coefficients, resolvent, garding })
}

/// Names accepted by [`check_assumption`].
pub const ASSUMPTIONS: [&str; 9] = ["K1", "K1glob", "K2", "Cutoff", "Poinc", "Sob", "Tail", "CP", "suffK1"];

/// Probe vectors added to the Sobolev candidates.
const SOBOLEV_NOISE: usize = 16;

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn judged(value: serde_json::Value, worst: f64, threshold: Option<f64>) -> serde_json::Value {
    let verdict = match threshold {
        None if worst.is_finite() => "finite",
        None => "divergent",
        Some(t) if worst <= t => "pass",
        Some(_) => "fail",
    };
    serde_json::json!({ "profile": value, "threshold": threshold, "verdict": verdict })
}

/// Runs one named assumption check on the validated scenario and returns its
/// JSON report. Thresholds come from `harness.assumption.thresholds[name]`.
pub fn check_assumption(sc: &Scenario, name: &str) -> Result<serde_json::Value, ScenarioError> {
    let mut s = sc.clone();
    let (kernel, grid) = s.validate()?;
    let a = &s.harness.assumption;
    let threshold = a.thresholds.get(name).copied();
    let rule = &s.assembly.rule;
    let ball = || BallSpec::new(a.center, a.r, a.rho, s.grid.domain, kernel.d());
    let out = match name {
        "K1" => to_json(&k1_profile(&kernel, &Comparison::SymmetricPart, &ball()?, a.theta, &grid, rule)?.judge(threshold)),
        "K1glob" => {
            to_json(&k1_glob_profile(&kernel, &Comparison::SymmetricPart, &ball()?, a.theta, &grid, rule)?.judge(threshold))
        }
        "K2" => to_json(&good_set_fraction(&kernel, &ball()?, a.dd, &grid, a.per_axis)?.judge(threshold)),
        "Poinc" | "Sob" => {
            let form = assemble(&kernel, &grid, &s.assembly)?;
            if name == "Poinc" {
                to_json(&poincare_constant(&form, kernel.alpha(), &ball()?)?.judge(threshold))
            } else {
                let mut rep = sobolev_ratio(&form, kernel.alpha(), &ball()?, SOBOLEV_NOISE, s.harness.seed)?;
                rep.report = rep.report.judge(threshold);
                to_json(&rep)
            }
        }
        "Tail" => {
            if let Some(bad) = a.tail_a.iter().find(|x| !(**x > 1.0 && **x * a.r >= 1.0)) {
                return Err(ScenarioError::config(
                    "harness.assumption.tail_a",
                    format!("A = {bad} needs A > 1 and A r >= 1 with r = {}", a.r),
                ));
            }
            let b = ball()?;
            let primal = tail_profile(&kernel, &b, &a.tail_a, false, &grid, rule)?;
            let dual = tail_profile(&kernel, &b, &a.tail_a, true, &grid, rule)?;
            let worst = primal.values.iter().chain(&dual.values).fold(0.0f64, |m, v| m.max(*v));
            judged(serde_json::json!({ "primal": primal, "dual": dual }), worst, threshold)
        }
        "Cutoff" => {
            if let Some(bad) = a.zetas.iter().find(|z| !(**z > 0.0 && **z <= a.rho)) {
                return Err(ScenarioError::config(
                    "harness.assumption.zetas",
                    format!("zeta = {bad} needs 0 < zeta <= rho = {}", a.rho),
                ));
            }
            let fit = cutoff_profile(&kernel, &ball()?, &a.zetas, &grid, rule)?;
            let worst = fit.values.iter().fold(0.0f64, |m, v| m.max(*v));
            judged(to_json(&fit), worst, threshold)
        }
        "CP" => {
            let (cp, cp_hat) = cp_check(kernel.d(), kernel.alpha(), a.theta, a.mu)?;
            serde_json::json!({ "d": kernel.d(), "alpha": kernel.alpha(), "theta": a.theta, "mu": a.mu,
                                "cp": cp, "cp_hat": cp_hat })
        }
        "suffK1" => {
            let Family::Drift { v, .. } = kernel.family() else {
                return Err(ScenarioError::config("kernel.family", "suffK1 needs a drift kernel"));
            };
            let branch = match a.holder_gamma {
                Some(gamma) => SuffK1Branch::Holder { gamma },
                None => SuffK1Branch::Gradient,
            };
            to_json(&suff_k1_check(v, kernel.alpha(), &ball()?, a.theta, branch, &grid)?.judge(threshold))
        }
        other => {
            return Err(ScenarioError::config(
                "assumption",
                format!("unknown assumption {other:?}; expected one of {}", ASSUMPTIONS.join(", ")),
            ))
        }
    };
    Ok(out)
}
