use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DVector;
use nonsym_core::discretize::{assemble, SelfCellTreatment};
use nonsym_core::random::GENERATOR;
use nonsym_core::scenario::{
    caccioppoli_ensemble, check_assumption, harnack_ensemble, holder_ensemble, mosco_run, Summary,
};
use nonsym_core::{algebra, DiscreteForm, Grid, Kernel, Scenario, ScenarioError};
use serde::Serialize;
use serde_json::json;

use crate::artifacts::{csv_bytes, sha256, Artifacts};
use crate::{CliError, Command, Common};

struct Loaded {
    scenario: Scenario,
    kernel: Kernel,
    grid: Grid,
    raw_sha: String,
}

fn load(c: &Common) -> Result<Loaded, CliError> {
    let raw = fs::read(&c.config).map_err(|e| CliError::Config {
        path: "--config".into(),
        message: format!("{}: {e}", c.config.display()),
    })?;
    let mut de = serde_json::Deserializer::from_slice(&raw);
    let mut scenario: Scenario = serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    if let Some(seed) = c.seed {
        scenario.harness.seed = seed;
    }
    if let Some(n) = c.ensemble {
        scenario.harness.ensemble = n;
    }
    let (kernel, grid) = scenario.validate()?;
    Ok(Loaded { scenario, kernel, grid, raw_sha: sha256(&raw) })
}

/// `h`, time step and quadrature levels, attached to every report.
#[derive(Debug, Serialize)]
struct Resolution {
    h: f64,
    nodes: usize,
    interior: usize,
    dt: f64,
    t_end: f64,
    levels: usize,
    far_levels: usize,
    gauss_order: usize,
    n_theta: usize,
    self_cell: SelfCellTreatment,
}

fn resolution(l: &Loaded) -> Resolution {
    let s = &l.scenario;
    let rule = &s.assembly.rule;
    Resolution {
        h: l.grid.h(),
        nodes: l.grid.len(),
        interior: l.grid.interior_indices().len(),
        dt: s.time_step(),
        t_end: s.horizon(),
        levels: rule.levels,
        far_levels: rule.far_levels,
        gauss_order: rule.gauss_order,
        n_theta: rule.n_theta,
        self_cell: s.assembly.self_cell,
    }
}

fn manifest(command: &str, l: Option<&Loaded>, extra: serde_json::Value) -> serde_json::Value {
    let mut m = json!({
        "tool": "nonsym",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": nonsym_core::VERSION,
        "command": command,
        "generator": GENERATOR,
        "parameters": extra,
    });
    if let Some(l) = l {
        let resolved = serde_json::to_vec(&l.scenario).expect("scenario serializes");
        let kernel = serde_json::to_vec(&l.scenario.kernel).expect("kernel serializes");
        m["config"] = serde_json::to_value(&l.scenario).expect("scenario serializes");
        m["config_sha256"] = json!(l.raw_sha);
        m["resolved_sha256"] = json!(sha256(&resolved));
        m["kernel_sha256"] = json!(sha256(&kernel));
        m["kernel"] = json!(l.kernel.describe());
        m["grid"] = json!({
            "d": l.grid.d(),
            "h": l.grid.h(),
            "half_width": l.grid.half_width(),
            "per_axis": l.grid.per_axis(),
            "nodes": l.grid.len(),
            "interior": l.grid.interior_indices().len(),
            "domain": l.grid.domain(),
        });
        m["resolution"] = serde_json::to_value(resolution(l)).expect("resolution serializes");
    }
    m
}

fn form_of(l: &Loaded) -> Result<DiscreteForm, CliError> {
    Ok(assemble(&l.kernel, &l.grid, &l.scenario.assembly).map_err(ScenarioError::from)?)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".into())
}

fn summary_line(name: &str, s: &Summary) -> String {
    format!(
        "{name}: n = {}, non-finite = {}, median {}, min {}, max {}\n",
        s.count,
        s.non_finite,
        fmt_opt(s.median),
        fmt_opt(s.min),
        fmt_opt(s.max)
    )
}

pub fn run(cmd: Command) -> Result<String, CliError> {
    match cmd {
        Command::CheckKernel { common, assumption } => check_kernel(&common, &assumption),
        Command::Assemble { common, dump_form } => assemble_cmd(&common, dump_form.as_deref()),
        Command::Solve { common } => solve(&common),
        Command::Harnack { common } => harnack(&common),
        Command::Hoelder { common } => hoelder(&common),
        Command::Caccioppoli { common } => caccioppoli(&common),
        Command::AlgebraTests { out, seed, samples } => algebra_tests(&out, seed, samples),
        Command::Mosco { common, alphas } => mosco(&common, alphas),
    }
}

fn finish(out: &Path, mut art: Artifacts, summary: String, manifest: serde_json::Value) -> Result<String, CliError> {
    let summary = format!("{summary}artifacts: {}\n", out.display());
    art.text("summary.txt", &summary);
    art.finish(manifest)?;
    Ok(summary)
}

fn check_kernel(c: &Common, name: &str) -> Result<String, CliError> {
    let l = load(c)?;
    let report = check_assumption(&l.scenario, name)?;
    let mut art = Artifacts::new(&c.out);
    art.json(&format!("assumption-{name}.json"), &json!({ "report": report, "resolution": resolution(&l) }));
    let verdict = report
        .get("verdict")
        .and_then(|v| v.as_str())
        .map(str::to_string)
        .or_else(|| report.get("report").and_then(|r| r["verdict"].as_str()).map(str::to_string))
        .unwrap_or_else(|| format!("cp = {}, cp_hat = {}", report["cp"], report["cp_hat"]));
    let summary = format!("{name} on {}: {verdict}\n", l.kernel.describe());
    finish(&c.out, art, summary, manifest("check-kernel", Some(&l), json!({ "assumption": name })))
}

fn assemble_cmd(c: &Common, dump: Option<&Path>) -> Result<String, CliError> {
    let l = load(c)?;
    let form = form_of(&l)?;
    let n = form.len();
    let ones = DVector::from_element(n, 1.0);
    let const_defect = (form.apply(&ones) - form.exterior_weights()).amax();
    let a_s = form.a_s();
    let a_a = form.a_a();
    let sym = (&a_s - a_s.transpose()).amax();
    let anti = (&a_a + a_a.transpose()).amax();
    let mut art = Artifacts::new(&c.out);
    art.json(
        "form.json",
        &json!({
            "meta": form.meta(),
            "constants_null": const_defect,
            "symmetry_defect": sym,
            "antisymmetry_defect": anti,
            "resolution": resolution(&l),
        }),
    );
    if let Some(path) = dump {
        let mut bytes = Vec::new();
        form.write_csv(&mut bytes)?;
        art.external(path, bytes);
    }
    let summary = format!(
        "assembled {} on {n} nodes: constants-null {const_defect:.3e}, symmetry {sym:.3e}, antisymmetry {anti:.3e}\n",
        l.kernel.describe()
    );
    let extra = json!({ "dump_form": dump.map(|p| p.display().to_string()) });
    finish(&c.out, art, summary, manifest("assemble", Some(&l), extra))
}

#[derive(Serialize)]
struct SnapshotRow {
    t: f64,
    node: usize,
    value: f64,
}

fn solve(c: &Common) -> Result<String, CliError> {
    let l = load(c)?;
    let form = form_of(&l)?;
    let sol = l.scenario.solve_member(&form, 0)?;
    let rows = sol
        .times
        .iter()
        .zip(&sol.snapshots)
        .flat_map(|(t, u)| u.iter().enumerate().map(move |(node, v)| SnapshotRow { t: *t, node, value: *v }));
    let mut art = Artifacts::new(&c.out);
    art.raw("snapshots.csv", csv_bytes(rows)?);
    let max_res = sol.residuals.iter().fold(0.0f64, |m, r| m.max(*r));
    let min_val = sol.snapshots.iter().flat_map(|u| u.iter().copied()).fold(f64::INFINITY, f64::min);
    art.json(
        "solution.json",
        &json!({ "scheme": sol.meta, "max_residual": max_res, "min_value": min_val, "resolution": resolution(&l) }),
    );
    let summary = format!(
        "solved {} steps (dt {:.3e}, theta {}): min value {min_val:.6}, max residual {max_res:.2e}\n",
        sol.meta.steps, sol.meta.dt, sol.meta.theta
    );
    finish(&c.out, art, summary, manifest("solve", Some(&l), json!({ "member": 0 })))
}

fn harnack(c: &Common) -> Result<String, CliError> {
    let l = load(c)?;
    let form = form_of(&l)?;
    let rows = harnack_ensemble(&l.scenario, &form)?;
    let s = Summary::of(&rows.iter().map(|r| r.c_emp).collect::<Vec<_>>());
    let mut art = Artifacts::new(&c.out);
    art.csv("harnack.csv", &rows)?;
    art.json(
        "harnack.json",
        &json!({ "c_emp": s, "cylinder": l.scenario.harnack_cylinder(), "resolution": resolution(&l) }),
    );
    let summary = summary_line("weak Harnack c_emp", &s);
    finish(&c.out, art, summary, manifest("harnack", Some(&l), json!({})))
}

#[derive(Serialize)]
struct HolderRow {
    run: usize,
    gamma: Option<f64>,
    slope: Option<f64>,
    flat: bool,
}

fn hoelder(c: &Common) -> Result<String, CliError> {
    let l = load(c)?;
    let form = form_of(&l)?;
    let fits = holder_ensemble(&l.scenario, &form)?;
    let rows: Vec<HolderRow> = fits
        .iter()
        .enumerate()
        .map(|(run, f)| HolderRow { run, gamma: f.gamma, slope: f.slope, flat: f.flat })
        .collect();
    let gammas: Vec<f64> = fits.iter().map(|f| f.gamma.unwrap_or(f64::NAN)).collect();
    let s = Summary::of(&gammas);
    let in_range = gammas.iter().filter(|g| **g > 0.0 && **g <= 1.0).count();
    let mut art = Artifacts::new(&c.out);
    art.csv("hoelder.csv", &rows)?;
    art.json(
        "hoelder.json",
        &json!({ "gamma_fit": s, "in_unit_interval": in_range, "cylinder": l.scenario.holder_cylinder(),
                 "resolution": resolution(&l) }),
    );
    let mut summary = summary_line("Hoelder gamma_fit", &s);
    let _ = writeln!(summary, "fits in (0, 1]: {in_range}/{}", fits.len());
    finish(&c.out, art, summary, manifest("hoelder", Some(&l), json!({})))
}

#[derive(Serialize)]
struct CaccioppoliRow {
    run: u64,
    p: f64,
    variant: String,
    lhs: f64,
    t1: f64,
    t2: f64,
    weight: f64,
    c_hat: f64,
    delta_needed: Option<f64>,
}

fn caccioppoli(c: &Common) -> Result<String, CliError> {
    let l = load(c)?;
    let form = form_of(&l)?;
    let reports = caccioppoli_ensemble(&l.scenario, &form, l.scenario.harness.ensemble)?;
    let rows: Vec<CaccioppoliRow> = reports
        .iter()
        .map(|(run, r)| CaccioppoliRow {
            run: *run,
            p: r.p,
            variant: format!("{:?}", r.variant),
            lhs: r.lhs,
            t1: r.t1,
            t2: r.t2,
            weight: r.weight,
            c_hat: r.c_hat,
            delta_needed: r.delta_needed,
        })
        .collect();
    let mut per_p = Vec::new();
    let mut summary = String::new();
    for &p in &l.scenario.harness.caccioppoli.p {
        let v: Vec<f64> = rows.iter().filter(|r| r.p == p).map(|r| r.c_hat).collect();
        let s = Summary::of(&v);
        summary.push_str(&summary_line(&format!("Caccioppoli c_hat at p = {p}"), &s));
        per_p.push(json!({ "p": p, "c_hat": s }));
    }
    let mut art = Artifacts::new(&c.out);
    art.csv("caccioppoli.csv", &rows)?;
    art.json("caccioppoli.json", &json!({ "by_exponent": per_p, "resolution": resolution(&l) }));
    finish(&c.out, art, summary, manifest("caccioppoli", Some(&l), json!({})))
}

fn algebra_tests(out: &Path, seed: u64, samples: usize) -> Result<String, CliError> {
    let rows = algebra::sweep(samples, seed)
        .map_err(|e| CliError::Numerical { stage: "algebra", message: e.to_string() })?;
    let mut summary = String::new();
    for r in &rows {
        let _ = writeln!(summary, "{:<32} samples {:>6}  min margin {:+.3e}", r.lemma, r.samples, r.min_margin);
    }
    let mut art = Artifacts::new(out);
    art.json("algebra.json", &rows);
    art.csv("algebra.csv", &rows)?;
    let extra = json!({ "seed": seed, "samples": samples });
    finish(out, art, summary, manifest("algebra-tests", None, extra))
}

#[derive(Serialize)]
struct CoefficientRow {
    alpha: f64,
    a11: f64,
    a12: f64,
    a21: f64,
    a22: f64,
    b1: f64,
    b2: f64,
}

#[derive(Serialize)]
struct GapRow {
    alpha: f64,
    gap: f64,
}

fn mosco(c: &Common, alphas: Option<Vec<f64>>) -> Result<String, CliError> {
    let mut l = load(c)?;
    if let Some(a) = alphas {
        l.scenario.harness.mosco.alphas = a;
        let (kernel, grid) = l.scenario.validate()?;
        l.kernel = kernel;
        l.grid = grid;
    }
    let run = mosco_run(&l.scenario, &l.grid)?;
    let k = &run.coefficients;
    let coeff_rows = k.alphas.iter().zip(&k.a).zip(&k.b).map(|((alpha, a), b)| CoefficientRow {
        alpha: *alpha,
        a11: a[0][0],
        a12: a[0][1],
        a21: a[1][0],
        a22: a[1][1],
        b1: b[0],
        b2: b[1],
    });
    let gap_rows = run.resolvent.alphas.iter().zip(&run.resolvent.gaps).map(|(a, g)| GapRow { alpha: *a, gap: *g });
    let mut art = Artifacts::new(&c.out);
    art.csv("mosco_coefficients.csv", coeff_rows)?;
    art.csv("mosco_gaps.csv", gap_rows)?;
    art.json(
        "mosco.json",
        &json!({
            "x": k.x,
            "delta": k.delta,
            "a_limit": k.a_limit,
            "b_limit": k.b_limit,
            "extrapolation_spread": k.extrapolation_spread,
            "lambda": run.resolvent.lambda,
            "local_norm": run.resolvent.local_norm,
            "garding": run.garding,
            "resolution": resolution(&l),
        }),
    );
    let mut summary = format!(
        "local limit at {:?}: a = {:?}, b = {:?} (spread {:.2e})\n",
        k.x, k.a_limit, k.b_limit, k.extrapolation_spread
    );
    for (a, g) in run.resolvent.alphas.iter().zip(&run.resolvent.gaps) {
        let _ = writeln!(summary, "resolvent gap at alpha = {a}: {g:.4e}");
    }
    let extra = json!({ "alphas": l.scenario.harness.mosco.alphas });
    finish(&c.out, art, summary, manifest("mosco", Some(&l), extra))
}
