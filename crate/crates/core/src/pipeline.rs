//! End-to-end runs: analytic residuals, initial data, the ε-continuation and
//! the verification suite, with the artifacts written to disk.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{probe_lattice, summarize_residuals, ModelParams};
use crate::config::{Amplitude, CheckKind, RunConfig};
use crate::error::{Error, Result};
use crate::initdata::{build_initial_datum, validate_initial_datum, CutoffCubic, EpsilonProblem};
use crate::report::{Check, Status, VerificationReport};
use crate::solver::{
    continuation, solve_annulus, ContinuationOutput, GridPolicy, SchemeConfig, SpacetimeField, TimeStepper,
};
use crate::verify::{self, weak};

/// Last stage to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Analytic,
    Initdata,
    Continuation,
    Verify,
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Stage::Analytic),
            "initdata" => Ok(Stage::Initdata),
            "continuation" => Ok(Stage::Continuation),
            "verify" => Ok(Stage::Verify),
            other => Err(Error::config(
                "only",
                format!("unknown stage `{other}` (analytic, initdata, continuation, verify)"),
            )),
        }
    }
}

/// Radii per lattice used by the analytic stage.
const PROBE_RADII: usize = 64;

/// Residual checks on the closed forms for `params`.
pub fn analytic_checks(params: &ModelParams) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(format!("analytic n={} R={} lambda={}", params.n, params.radius, params.lambda));
    let lattice = probe_lattice(params, PROBE_RADII);
    let s = summarize_residuals(params, &lattice)?;
    report.push(
        Check::new("analytic.stationary", "u* = -alpha r^{1/3} solves the stationary equation")
            .tolerance(1e-12)
            .measure("relative_residual", s.stationary_relative)
            .passes(s.stationary_relative <= 1e-12),
    );
    report.push(
        Check::new("analytic.linearized", "v solves the linearization around u*")
            .tolerance(1e-8)
            .measure("scaled_residual", s.linearized_scaled)
            .passes(s.linearized_scaled <= 1e-8),
    );
    report.push(
        Check::new("analytic.subsolution", "u* - v is a subsolution on (0, R)")
            .tolerance(1e-8)
            .measure("max_defect", s.max_defect)
            .passes(s.max_defect <= 1e-8),
    );
    report.push(
        Check::new("analytic.zeros", "the first zero of J_nu' precedes that of J_nu")
            .measure("x0", params.x0)
            .measure("x1", params.x1)
            .passes(params.x1 < params.x0),
    );
    Ok(report)
}

/// Fields at a subset of stored times, as written to and read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    pub values: Array2<f64>,
    pub gradient: Array2<f64>,
}

impl FieldTable {
    /// Every `stride`-th stored time plus the last.
    pub fn from_field(field: &SpacetimeField, stride: usize) -> Self {
        let stride = stride.max(1);
        let last = field.times.len() - 1;
        let rows: Vec<usize> = (0..=last).filter(|k| k % stride == 0 || *k == last).collect();
        let g = field.gradient();
        let m = field.nodes().len();
        let mut values = Array2::zeros((rows.len(), m));
        let mut gradient = Array2::zeros((rows.len(), m));
        for (j, &k) in rows.iter().enumerate() {
            values.row_mut(j).assign(&field.values.row(k));
            gradient.row_mut(j).assign(&g.row(k));
        }
        Self {
            times: rows.iter().map(|&k| field.times[k]).collect(),
            radii: field.nodes().to_vec(),
            values,
            gradient,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,r,u,u_r\n");
        for (k, &t) in self.times.iter().enumerate() {
            for (i, &r) in self.radii.iter().enumerate() {
                let _ = writeln!(out, "{t},{r},{},{}", self.values[[k, i]], self.gradient[[k, i]]);
            }
        }
        out
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let bad = |line: usize, what: &str| Error::io(path, format!("line {line}: {what}"));
        let mut lines = src.lines().enumerate();
        match lines.next() {
            Some((_, "t,r,u,u_r")) => {}
            _ => return Err(bad(1, "expected header `t,r,u,u_r`")),
        }
        let mut rows: Vec<[f64; 4]> = Vec::new();
        for (i, line) in lines {
            let cols: Vec<f64> = line
                .split(',')
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(i + 1, "unparsable number"))?;
            let row: [f64; 4] = cols.try_into().map_err(|_| bad(i + 1, "expected 4 columns"))?;
            rows.push(row);
        }
        let first_t = rows.first().ok_or_else(|| bad(2, "no data"))?[0];
        let m = rows.iter().take_while(|row| row[0] == first_t).count();
        if !rows.len().is_multiple_of(m) {
            return Err(bad(rows.len() + 1, "ragged time blocks"));
        }
        let nt = rows.len() / m;
        let radii: Vec<f64> = rows[..m].iter().map(|row| row[1]).collect();
        let mut values = Array2::zeros((nt, m));
        let mut gradient = Array2::zeros((nt, m));
        let mut times = Vec::with_capacity(nt);
        for k in 0..nt {
            let block = &rows[k * m..(k + 1) * m];
            times.push(block[0][0]);
            for (i, row) in block.iter().enumerate() {
                if row[0] != block[0][0] || row[1] != radii[i] {
                    return Err(bad(k * m + i + 2, "time blocks do not share one grid"));
                }
                values[[k, i]] = row[2];
                gradient[[k, i]] = row[3];
            }
        }
        Ok(Self {
            times,
            radii,
            values,
            gradient,
        })
    }

    fn nearest_time(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, &s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }

    /// Linear interpolation in `r` on row `k`.
    fn at(&self, r: f64, k: usize) -> f64 {
        let x = &self.radii;
        let j = x.partition_point(|&s| s <= r).clamp(1, x.len() - 1);
        let w = (r - x[j - 1]) / (x[j] - x[j - 1]);
        (1.0 - w) * self.values[[k, j - 1]] + w * self.values[[k, j]]
    }
}

/// Profile overlays (`t, r, u, u_star, subsolution`) at the stored times
/// nearest `times` (times outside the table are dropped), and time series
/// (`r, t, u_minus_u_star, envelope`) at radii `fractions · R`.
pub fn plotdata(table: &FieldTable, params: &ModelParams, times: &[f64], fractions: &[f64]) -> Result<(String, String)> {
    let horizon = table.times.last().copied().unwrap_or(0.0);
    let mut profile = String::from("t,r,u,u_star,subsolution\n");
    for &t in times.iter().filter(|&&t| (0.0..=horizon).contains(&t)) {
        let k = table.nearest_time(t);
        let s = table.times[k];
        for (i, &r) in table.radii.iter().enumerate() {
            let _ = writeln!(
                profile,
                "{s},{r},{},{},{}",
                table.values[[k, i]],
                params.u_star(r)?,
                params.subsolution(r, s)?
            );
        }
    }
    let sup_v0 = params.v(params.radius, 0.0)?;
    let lam2 = params.lambda * params.lambda;
    let mut series = String::from("r,t,u_minus_u_star,envelope\n");
    let (lo, hi) = (table.radii[0], table.radii[table.radii.len() - 1]);
    for &f in fractions {
        let r = f * params.radius;
        if !(lo..=hi).contains(&r) {
            continue;
        }
        let us = params.u_star(r)?;
        for (k, &t) in table.times.iter().enumerate() {
            let _ = writeln!(series, "{r},{t},{},{}", table.at(r, k) - us, (-lam2 * t).exp() * sup_v0);
        }
    }
    Ok((profile, series))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub eps: f64,
    pub nodes: usize,
    pub c_star: f64,
    pub steps: usize,
    pub newton_iterations: usize,
    pub smallest_dt: f64,
    pub max_abs_gradient: f64,
    pub cutoff_active: bool,
    pub field_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub config_sha256: String,
    pub version: String,
    pub all_passed: bool,
    pub parameters: ModelParams,
    pub horizon: Option<f64>,
    pub eps: Vec<f64>,
    pub profile_times: Vec<f64>,
    pub series_radii: Vec<f64>,
    pub runs: Vec<RunEntry>,
    pub artifacts: Vec<ArtifactEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&src).map_err(|e| Error::io(path, e.message()))
    }
}

/// Writes files under one directory and records their checksums.
struct ArtifactWriter {
    root: PathBuf,
    entries: Vec<ArtifactEntry>,
}

impl ArtifactWriter {
    fn new(root: PathBuf) -> Result<Self> {
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Self {
            root,
            entries: Vec::new(),
        })
    }

    fn write(&mut self, relative: &str, contents: &str) -> Result<()> {
        let path = self.root.join(relative);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.entries.push(ArtifactEntry {
            path: relative.to_string(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
            bytes: contents.len(),
        });
        Ok(())
    }
}

pub fn field_file_name(eps: f64) -> String {
    format!("fields/field_eps{eps}.csv")
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub report: VerificationReport,
    pub manifest: Manifest,
    pub output_dir: PathBuf,
    pub continuation: Option<ContinuationOutput>,
}

impl PipelineOutcome {
    pub fn passed(&self) -> bool {
        self.report.all_passed()
    }
}

fn renamed(mut check: Check, suffix: impl std::fmt::Display) -> Check {
    check.name = format!("{}[{suffix}]", check.name);
    check
}

fn solve_variant(
    base: &EpsilonProblem,
    policy: GridPolicy,
    intervals: usize,
    scheme: SchemeConfig,
    horizon: f64,
    datum: &crate::initdata::InitialDatum,
) -> Result<SpacetimeField> {
    let grid = GridPolicy {
        intervals,
        eps_scaling: 0.0,
        ..policy
    }
    .grid(base.epsilon, base.epsilon, base.params.radius)?;
    let problem = Arc::new(EpsilonProblem::new(&base.params, datum, grid)?);
    solve_annulus(problem, horizon, &scheme)
}

/// Runs the stages up to `last` and writes the artifacts to
/// [`RunConfig::output_dir`].
pub fn run_pipeline(cfg: &RunConfig, last: Stage) -> Result<PipelineOutcome> {
    let fingerprint = cfg.fingerprint();
    let mut report = VerificationReport::new(format!("{} sha256:{fingerprint}", cfg.name));
    let vcfg = &cfg.verify;
    let base = cfg.base_params()?;

    if last == Stage::Analytic {
        let amplitude = match cfg.model.amplitude {
            Amplitude::Fixed(c) => c,
            Amplitude::Policy(_) => 1.0,
        };
        let params = base.with_amplitude(amplitude)?;
        report.extend(analytic_checks(&params)?);
        return finish(cfg, report, params, None, None, &fingerprint);
    }

    let unchecked = build_initial_datum(&base, cfg.initdata.clone())?;
    let datum_report = validate_initial_datum(&base, &unchecked);
    let resolved = cfg.resolve();
    let run = match resolved {
        Ok(run) => run,
        Err(e) => {
            // Keep the per-condition report when the datum is the problem.
            if vcfg.enabled(CheckKind::Initdata) && !datum_report.all_passed() {
                report.extend(datum_report);
                return finish(cfg, report, base, None, None, &fingerprint);
            }
            return Err(e);
        }
    };
    let params = run.params;
    if vcfg.enabled(CheckKind::Analytic) {
        report.extend(analytic_checks(&params)?);
    }
    if vcfg.enabled(CheckKind::Initdata) {
        report.extend(datum_report);
    }
    if last == Stage::Initdata {
        return finish(cfg, report, params, None, None, &fingerprint);
    }

    let cont = continuation(
        &params,
        &run.datum,
        &run.eps,
        &cfg.continuation.grid,
        run.horizon,
        &cfg.scheme,
        run.window,
    )?;
    for (eps, err) in &cont.failures {
        report.push(
            Check::new(format!("solve[eps={eps}]"), "the annulus problem is solved up to the horizon")
                .status(Status::Fail)
                .note(err.to_string()),
        );
    }
    if last == Stage::Verify && !cont.fields.is_empty() {
        verify_fields(cfg, &run, &cont, &mut report)?;
    }
    finish(cfg, report, params, Some(run.horizon), Some(cont), &fingerprint)
}

fn verify_fields(
    cfg: &RunConfig,
    run: &crate::config::ResolvedRun,
    cont: &ContinuationOutput,
    report: &mut VerificationReport,
) -> Result<()> {
    let vcfg = &cfg.verify;
    let tol = &vcfg.tolerances;
    let params = &run.params;
    let scheme = &cfg.scheme;
    let dt = scheme.dt_initial;
    let primary = &cont.fields[0];
    let finest = cont.fields.last().expect("at least one field");
    let policy = cfg.continuation.grid;
    let primary_intervals = primary.nodes().len() - 1;

    for f in &cont.fields {
        let h = f.grid().max_spacing();
        let tag = format!("eps={}", f.problem.epsilon);
        if vcfg.enabled(CheckKind::Sandwich) {
            report.push(renamed(verify::check_sandwich(f, tol.sandwich_for(h, dt))?, &tag));
        }
        if vcfg.enabled(CheckKind::Monotone) {
            report.push(renamed(verify::check_monotone(f, tol.gradient_sign_for(h)), &tag));
        }
    }

    if vcfg.enabled(CheckKind::Refinement) {
        let fine_scheme = SchemeConfig {
            dt_initial: 0.5 * dt,
            ..*scheme
        };
        let fine = solve_variant(&primary.problem, policy, 2 * primary_intervals, fine_scheme, run.horizon, &run.datum)?;
        let (cu, cl) = verify::sandwich_violations(primary)?;
        let (fu, fl) = verify::sandwich_violations(&fine)?;
        report.push(verify::check_refinement(
            "sandwich_refinement",
            cu.max(cl),
            fu.max(fl),
            vcfg.refinement_factor,
            vcfg.rounding_floor,
        ));
        report.push(verify::check_refinement(
            "monotone_refinement",
            verify::max_positive_gradient(primary),
            verify::max_positive_gradient(&fine),
            1.0,
            vcfg.rounding_floor,
        ));
    }

    if vcfg.enabled(CheckKind::GradientBox) {
        let wide = CutoffCubic::with_support(primary.problem.c_star, 2.0 * primary.problem.cutoff.support_radius)?;
        let problem = Arc::new(primary.problem.with_cutoff(wide));
        let rerun = solve_annulus(problem, run.horizon, scheme)?;
        report.push(renamed(
            verify::check_gradient_box(primary, Some(&rerun), tol.cutoff_rerun),
            format!("eps={}", primary.problem.epsilon),
        ));
        for f in &cont.fields[1..] {
            report.push(renamed(
                verify::check_gradient_box(f, None, tol.cutoff_rerun),
                format!("eps={}", f.problem.epsilon),
            ));
        }
    }

    if vcfg.enabled(CheckKind::Bernstein) {
        for &p in &vcfg.bernstein_p {
            report.push(verify::check_weighted_bernstein(
                primary,
                p,
                vcfg.bernstein_delta * params.radius,
                tol.bernstein_residual,
            )?);
        }
    }

    if vcfg.enabled(CheckKind::Pointwise) {
        report.push(verify::check_pointwise_gradient(primary, vcfg.pointwise_p));
        if let Some(halved) = cont.fields.get(1) {
            report.push(verify::check_pointwise_stability(
                primary,
                halved,
                vcfg.pointwise_p,
                tol.pointwise_stability,
            ));
        }
    }

    if vcfg.enabled(CheckKind::Singularity) {
        let lam2 = params.lambda * params.lambda;
        for &s in &vcfg.singularity_times {
            let (check, _) = verify::fit_singularity(finest, s / lam2, tol)?;
            report.push(check);
        }
    }

    if vcfg.enabled(CheckKind::Decay) {
        let h = primary.grid().max_spacing();
        let (check, _) = verify::fit_decay(primary, tol.sandwich_for(h, dt), tol)?;
        report.push(check);
    }

    if vcfg.enabled(CheckKind::WeakIdentity) {
        let family = weak::default_family(params.radius, run.horizon);
        let sequence: Vec<&SpacetimeField> = cont.fields.iter().collect();
        if params.weak_form_applies() && vcfg.weak_levels.is_empty() {
            report.push(
                Check::new("weak_identity", "the weak formulation holds across the origin")
                    .status(Status::Skipped)
                    .note("no refinement levels configured"),
            );
        } else {
            let levels: Vec<SpacetimeField> = if params.weak_form_applies() {
                use rayon::prelude::*;
                vcfg.weak_levels
                    .par_iter()
                    .map(|level| {
                        let grid = GridPolicy {
                            intervals: level.intervals,
                            eps_scaling: 0.0,
                            ..policy
                        }
                        .grid(level.eps, level.eps, params.radius)?;
                        let problem = Arc::new(EpsilonProblem::new(params, &run.datum, grid)?);
                        let level_scheme = SchemeConfig {
                            dt_initial: level.dt,
                            ..*scheme
                        };
                        solve_annulus(problem, run.horizon, &level_scheme)
                    })
                    .collect::<Result<_>>()?
            } else {
                Vec::new()
            };
            let level_refs: Vec<&SpacetimeField> = levels.iter().collect();
            let (check, _) = verify::check_weak_identity(&level_refs, &sequence, &family, &vcfg.flux_eps)?;
            report.push(check);
        }
    }

    if vcfg.enabled(CheckKind::Uniqueness) {
        let other = match scheme.time_stepper {
            TimeStepper::ImplicitEuler => TimeStepper::ImexCn,
            TimeStepper::ImexCn => TimeStepper::ImplicitEuler,
        };
        let alt = SchemeConfig {
            time_stepper: other,
            ..*scheme
        };
        let rerun = solve_annulus(finest.problem.clone(), run.horizon, &alt)?;
        report.push(renamed(
            verify::check_uniqueness_surrogate(finest, &rerun, &cont.window, tol.uniqueness),
            format!("eps={}", finest.problem.epsilon),
        ));
    }

    if vcfg.enabled(CheckKind::Cauchy) {
        let check = if cont.differences.len() >= 2 {
            verify::check_cauchy(&cont.differences)
        } else {
            Check::new("continuation_cauchy", "consecutive eps-fields approach each other")
                .status(Status::Skipped)
                .note("needs at least three successful eps-runs")
        };
        report.push(check);
    }
    Ok(())
}

fn finish(
    cfg: &RunConfig,
    report: VerificationReport,
    params: ModelParams,
    horizon: Option<f64>,
    cont: Option<ContinuationOutput>,
    fingerprint: &str,
) -> Result<PipelineOutcome> {
    let dir = cfg.output_dir();
    let mut out = ArtifactWriter::new(dir.clone())?;
    out.write("config.toml", &cfg.to_toml())?;
    let mut runs = Vec::new();
    if let Some(c) = &cont {
        for f in &c.fields {
            let eps = f.problem.epsilon;
            let file = if cfg.output.write_fields {
                let name = field_file_name(eps);
                out.write(&name, &FieldTable::from_field(f, cfg.output.field_time_stride).to_csv())?;
                Some(name)
            } else {
                None
            };
            runs.push(RunEntry {
                eps,
                nodes: f.nodes().len(),
                c_star: f.problem.c_star,
                steps: f.diagnostics.stats.steps,
                newton_iterations: f.diagnostics.stats.newton_iterations,
                smallest_dt: f.diagnostics.smallest_dt,
                max_abs_gradient: f.diagnostics.max_abs_gradient,
                cutoff_active: f.diagnostics.cutoff_active,
                field_file: file,
            });
        }
        if let Some(finest) = c.finest() {
            let table = FieldTable::from_field(finest, cfg.output.field_time_stride);
            let (profile, series) = plotdata(&table, &params, &cfg.output.profile_times, &cfg.output.series_radii)?;
            out.write("plotdata/profile.csv", &profile)?;
            out.write("plotdata/series.csv", &series)?;
        }
        let mut diffs = String::from("eps_coarse,eps_fine,sup_difference\n");
        for (j, d) in c.differences.iter().enumerate() {
            let _ = writeln!(diffs, "{},{},{d}", c.fields[j].problem.epsilon, c.fields[j + 1].problem.epsilon);
        }
        out.write("continuation.csv", &diffs)?;
    }
    out.write("report.json", &report.to_json())?;
    out.write("report.csv", &report.to_string())?;
    let manifest = Manifest {
        name: cfg.name.clone(),
        config_sha256: fingerprint.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        all_passed: report.all_passed(),
        parameters: params,
        horizon,
        eps: cont.as_ref().map(|c| c.eps.clone()).unwrap_or_default(),
        profile_times: cfg.output.profile_times.clone(),
        series_radii: cfg.output.series_radii.clone(),
        runs,
        artifacts: out.entries.clone(),
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::io(&dir.join("manifest.toml"), e))?;
    let path = dir.join("manifest.toml");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(PipelineOutcome {
        report,
        manifest,
        output_dir: dir,
        continuation: cont,
    })
}

/// Regenerates the plot data of a finished run from its field files.
pub fn emit_plotdata(dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let manifest = Manifest::load(&dir.join("manifest.toml"))?;
    let file = manifest
        .runs
        .iter()
        .rev()
        .find_map(|r| r.field_file.clone())
        .ok_or_else(|| Error::io(dir, "the manifest lists no field files"))?;
    let table = FieldTable::read_csv(&dir.join(file))?;
    let (profile, series) = plotdata(&table, &manifest.parameters, &manifest.profile_times, &manifest.series_radii)?;
    let (p, s) = (dir.join("plotdata/profile.csv"), dir.join("plotdata/series.csv"));
    let plot_dir = dir.join("plotdata");
    fs::create_dir_all(&plot_dir).map_err(|e| Error::io(&plot_dir, e))?;
    fs::write(&p, profile).map_err(|e| Error::io(&p, e))?;
    fs::write(&s, series).map_err(|e| Error::io(&s, e))?;
    Ok((p, s))
}

pub fn load_report(dir: &Path) -> Result<VerificationReport> {
    let path = dir.join("report.json");
    let src = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&src).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initdata::{make_initial_datum, Family};
    use crate::solver::RadialGrid;

    fn small_field() -> (ModelParams, SpacetimeField) {
        let p = ModelParams::with_default_lambda(2, 0.6, 0.0).unwrap();
        let d = make_initial_datum(&p, Family::PolynomialBlend { a: 0.0, k: 2.0 }).unwrap();
        let grid = RadialGrid::graded(0.05, 0.6, 40, 2.0).unwrap();
        let problem = Arc::new(EpsilonProblem::new(&p, &d, grid).unwrap());
        let scheme = SchemeConfig {
            dt_initial: 0.05,
            ..Default::default()
        };
        (p, solve_annulus(problem, 0.3, &scheme).unwrap())
    }

    #[test]
    fn field_table_roundtrips_through_csv() {
        let (_, field) = small_field();
        let table = FieldTable::from_field(&field, 2);
        assert_eq!(*table.times.last().unwrap(), field.horizon());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        fs::write(&path, table.to_csv()).unwrap();
        assert_eq!(FieldTable::read_csv(&path).unwrap(), table);
        fs::write(&path, "t,r,u\n").unwrap();
        assert!(FieldTable::read_csv(&path).is_err());
        assert!(FieldTable::read_csv(&dir.path().join("missing.csv")).is_err());
    }

    #[test]
    fn plotdata_columns_and_empty_selection() {
        let (p, field) = small_field();
        let table = FieldTable::from_field(&field, 1);
        let (profile, series) = plotdata(&table, &p, &[0.1], &[0.1]).unwrap();
        assert!(profile.starts_with("t,r,u,u_star,subsolution\n"));
        assert_eq!(profile.lines().count(), 1 + table.radii.len());
        assert!(series.starts_with("r,t,u_minus_u_star,envelope\n"));
        assert_eq!(series.lines().count(), 1 + table.times.len());
        // C = 0: u stays at u*, so the profile overlays coincide.
        for line in profile.lines().skip(1) {
            let c: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert!((c[2] - c[3]).abs() < 1e-3 && c[3] == c[4]);
        }
        let (profile, _) = plotdata(&table, &p, &[5.0], &[]).unwrap();
        assert_eq!(profile, "t,r,u,u_star,subsolution\n");
    }

    #[test]
    fn stage_names() {
        assert_eq!("analytic".parse::<Stage>().unwrap(), Stage::Analytic);
        assert!("bogus".parse::<Stage>().is_err());
    }
}
