//! The five subcommands. Each returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use besov_core::dyadic::{besov_report, holder_estimate, DyadicDecomposition, Sample, Trajectory};
use besov_core::exponent::{mqg_plan, plan};
use besov_core::snapshot::Snapshot;
use besov_core::solver::{conservation_report, Solver};
use serde_json::{json, Value};

use crate::audits::{self, FieldContext, ANCHOR_BONY, ANCHOR_CERTIFICATES};
use crate::config::{parse_rational, AuditKind, BesovSpec, CalculusSpec, LoadedConfig};
use crate::error::{config_err, exit, runtime_err, CliError, CliResult};
use crate::output::{OutputDir, Versions};
use crate::report::{AuditEntry, VerificationReport};

/// Output directory: `--out`, else the config's `output` (relative to the config file),
/// else `besov-lab-out` in the working directory.
pub fn resolve_out(cfg: Option<&LoadedConfig>, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.and_then(|c| c.config.output.as_ref().map(|o| c.base_dir.join(o))))
        .unwrap_or_else(|| PathBuf::from("besov-lab-out"))
}

fn manifest(command: &str, cfg: &LoadedConfig, seed: u64, body: Value, dir: &OutputDir) -> Value {
    let mut m = json!({
        "command": command,
        "config_sha256": cfg.sha256,
        "seed": seed,
        "versions": Versions::current(),
        "grid": cfg.config.grid,
    });
    if let (Value::Object(m), Value::Object(b)) = (&mut m, body) {
        m.extend(b);
    }
    m["artifacts"] = json!(dir.artifacts());
    m
}

/// Integrates the configured equation and writes the shell records, optional snapshots and
/// the manifest. A CFL abort keeps the partial outputs and exits with the runtime code.
pub fn simulate(cfg: &LoadedConfig, seed: u64, out: &Path) -> CliResult<u8> {
    let grid = cfg.grid()?;
    let law = cfg.law_spec()?;
    let solver_cfg = cfg.config.solver.solver_config(law.drift(grid.dim())?)?;
    let theta0 = cfg.initial_field(grid, seed)?;
    let solver = Solver::new(grid, solver_cfg).map_err(config_err)?;
    let dyadic = DyadicDecomposition::new(grid);
    let traj = solver.run(&dyadic, &theta0).map_err(runtime_err)?;

    let mut dir = OutputDir::create(out)?;
    dir.write("trajectory.csv", traj.to_csv().as_bytes())?;
    for s in traj.samples() {
        if let Some(f) = &s.snapshot {
            let bytes = Snapshot::Spectral(f.clone()).to_bytes();
            dir.write(&format!("snapshots/step_{:08}.bsvf", s.step), &bytes)?;
        }
    }
    let partial = !traj.is_complete();
    let body = json!({
        "law": law,
        "solver": cfg.config.solver,
        "status": traj.status,
        "partial": partial,
        "samples": traj.samples().len(),
        "final_time": traj.samples().last().map(|s| s.t),
        "removed_mean": traj.removed_mean,
        "conservation": conservation_report(&traj),
    });
    let m = manifest("simulate", cfg, seed, body, &dir);
    dir.write_json("manifest.json", &m)?;
    if partial {
        eprintln!("run stopped early: {}", serde_json::to_string(&traj.status).unwrap_or_default());
        return Ok(exit::RUNTIME);
    }
    println!(
        "simulated {} samples to t = {}; outputs in {}",
        traj.samples().len(),
        cfg.config.solver.t_end,
        out.display()
    );
    Ok(exit::PASS)
}

/// Shell norms, Besov norms and the Hölder fit of the initial datum.
pub fn decompose(cfg: &LoadedConfig, seed: u64, out: &Path) -> CliResult<u8> {
    let grid = cfg.grid()?;
    let raw = cfg.initial_field(grid, seed)?;
    let theta = raw.mean_free();
    let dyadic = DyadicDecomposition::new(grid);
    let solver = &cfg.config.solver;
    let mut traj = Trajectory::for_decomposition(&dyadic);
    let sample = Sample::measure(&dyadic, 0.0, 0, &theta, &solver.p_list, solver.oversample.max(1), false)
        .map_err(config_err)?;
    traj.push(sample).map_err(runtime_err)?;

    let specs = if cfg.config.besov.is_empty() {
        vec![BesovSpec { s: 0.0, p: 2.0, q: 2.0 }]
    } else {
        cfg.config.besov.clone()
    };
    let reports = specs
        .iter()
        .map(|s| besov_report(&dyadic, &theta, s.index()?, solver.oversample.max(1)).map_err(runtime_err))
        .collect::<CliResult<Vec<_>>>()?;
    let holder = match holder_estimate(&dyadic, &theta, None, solver.oversample.max(1)) {
        Ok(fit) => json!(fit),
        Err(e) => json!({"error": e.to_string()}),
    };

    let mut dir = OutputDir::create(out)?;
    dir.write("shells.csv", traj.to_csv().as_bytes())?;
    dir.write_json("besov.json", &reports)?;
    dir.write_json("holder.json", &holder)?;
    let body = json!({"removed_mean": raw.mean(), "shells": [dyadic.j_min(), dyadic.j_max()]});
    let m = manifest("decompose", cfg, seed, body, &dir);
    dir.write_json("manifest.json", &m)?;
    for r in &reports {
        println!(
            "‖θ‖ in B^{}_{{{},{}}} = {:.6e}",
            r.index.s,
            besov_core::serde_ext::format_exponent(r.index.p),
            besov_core::serde_ext::format_exponent(r.index.q),
            r.value
        );
    }
    Ok(exit::PASS)
}

fn finish_report(
    command: &str,
    cfg: &LoadedConfig,
    seed: u64,
    out: &Path,
    report: &VerificationReport,
    mut dir: OutputDir,
) -> CliResult<u8> {
    for a in &report.audits {
        println!("{}", a.summary_line());
    }
    dir.write_json("report.json", report)?;
    let body = json!({"pass": report.pass, "summary": report.summary});
    let m = manifest(command, cfg, seed, body, &dir);
    dir.write_json("manifest.json", &m)?;
    println!(
        "{}: {}/{} audits pass; report in {}",
        command,
        report.summary.passed,
        report.summary.total,
        out.join("report.json").display()
    );
    Ok(report.exit_code())
}

/// Bony reconstruction and the J-certificates on the initial datum.
pub fn paraproduct_audit(cfg: &LoadedConfig, seed: u64, out: &Path) -> CliResult<u8> {
    let ctx = FieldContext::new(cfg, seed)?;
    let law = cfg.constitutive_law(ctx.grid.dim())?;
    let exps = audits::certificate_index(cfg)?;
    let mut dir = OutputDir::create(out)?;
    let bony = AuditEntry::run(AuditKind::BonyReconstruction.name(), ANCHOR_BONY, || {
        audits::bony_reconstruction(&ctx, &law)
    });
    let mut suite = None;
    let certs = AuditEntry::run(AuditKind::JCertificates.name(), ANCHOR_CERTIFICATES, || {
        let (outcome, s) = audits::j_certificates(&ctx, &law, &exps, cfg.config.audit.spread_limit)?;
        suite = s;
        Ok(outcome)
    });
    if let Some(s) = &suite {
        dir.write_json("certificates.json", &s.certificates)?;
    }
    let report = VerificationReport::new("paraproduct-audit", Some(cfg.sha256.clone()), seed, vec![bony, certs]);
    finish_report("paraproduct-audit", cfg, seed, out, &report, dir)
}

/// The full audit suite (or the `audits` selection).
pub fn verify_all(cfg: &LoadedConfig, seed: u64, out: &Path) -> CliResult<u8> {
    let selected = cfg.audits();
    let entries = audits::run_suite(cfg, seed, &selected)?;
    let dir = OutputDir::create(out)?;
    let report = VerificationReport::new("verify-all", Some(cfg.sha256.clone()), seed, entries);
    finish_report("verify-all", cfg, seed, out, &report, dir)
}

/// The bootstrap plan for `(α, d)`, or the modified-SQG window when `β` is given.
pub fn calculus_plan(spec: &CalculusSpec) -> CliResult<Value> {
    let alpha = parse_rational("alpha", &spec.alpha)?;
    let input = json!({"alpha": spec.alpha, "d": spec.d, "beta": spec.beta, "p": spec.p});
    let plan = match &spec.beta {
        Some(beta) => {
            let beta = parse_rational("beta", beta)?;
            let p = spec
                .p
                .as_deref()
                .ok_or_else(|| CliError::Config("the modified-SQG plan needs p (--p)".into()))?;
            let p = parse_rational("p", p)?;
            json!(mqg_plan(&alpha, &beta, &p).map_err(config_err)?)
        }
        None => json!(plan(&alpha, spec.d).map_err(config_err)?),
    };
    Ok(json!({"input": input, "plan": plan}))
}

pub fn calculus(spec: &CalculusSpec, out: Option<&Path>) -> CliResult<u8> {
    let value = calculus_plan(spec)?;
    let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Runtime(e.to_string()))?;
    // A closed pipe downstream is not an error of the command.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    if let Some(out) = out {
        let mut dir = OutputDir::create(out)?;
        dir.write_json("plan.json", &value)?;
    }
    Ok(exit::PASS)
}
