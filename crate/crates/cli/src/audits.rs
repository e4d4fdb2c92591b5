//! The `verify-all` and `paraproduct-audit` suites.

use besov_core::drift::{
    check_divergence_free, drift_shell_bound_audit, velocity_from_theta, DriftLaw, VelocityOperator,
    STRICT_TOLERANCE,
};
use besov_core::dyadic::{bernstein_derivative_sides, DyadicDecomposition, RunStatus, Trajectory};
use besov_core::exponent::{effective_alpha, gain_factor, high_alpha_plan, plan, Branch, Rational};
use besov_core::paraproduct::{
    bony_split, certificate_suite, geometric_sum_check, transport_by_convolution, CertificateIndex,
    CertificateSuite,
};
use besov_core::solver::{
    dissipation_lower_bound_audit, gronwall_duhamel_audit, hm_energy_audit, DuhamelParams, Solver,
};
use besov_core::{synthetic, Grid, SpectralField};
use serde_json::json;

use crate::config::{parse_rational, AuditKind, LoadedConfig};
use crate::error::{CliError, CliResult};
use crate::report::{AuditEntry, AuditFailure, Outcome};

pub const ANCHOR_DYADIC: &str = "Σ_j Δ_j f = f; Δ_jΔ_k = 0 for |j−k| ≥ 2";
pub const ANCHOR_BERNSTEIN: &str = "‖∇Δ_j f‖_{L^p} ≤ 2^{j+1}‖Δ_j f‖_{L^p}";
pub const ANCHOR_DIVERGENCE: &str = "∇ · u = 0";
pub const ANCHOR_DRIFT: &str = "‖Δ_k u‖_{L^q} ≤ C 2^k ‖Δ_k θ‖_{L^q}";
pub const ANCHOR_DISSIPATION: &str = "∫|Δ_jθ|^{p−2}Δ_jθ (−Δ)Δ_jθ ≥ c 2^{2j}‖Δ_jθ‖_{L^p}^p";
pub const ANCHOR_BONY: &str = "Δ_j(u·∇θ) = T₁ + T₂ + T₃";
pub const ANCHOR_CERTIFICATES: &str = "J_i ≤ C ‖θ‖_{C^α}^{2−p/q} 2^{j a_i} Σ_k 2^{k e_i}(2^k‖Δ_kθ‖_{L^p})^{p/q}";
pub const ANCHOR_DUHAMEL: &str =
    "‖Δ_jθ(t)‖_{L^q} ≤ e^{−c2^{2j}(t−t₀)}‖Δ_jθ(t₀)‖_{L^q} + C K ∫_{t₀}^t e^{−c2^{2j}(t−s)} w_j(s) ds";
pub const ANCHOR_ENERGY: &str = "‖θ(t)‖²_{Ḣ^m} ≤ ‖θ(t₀)‖²_{Ḣ^m} exp(κ ∫_{t₀}^t ‖∇θ‖²_{L^∞})";
pub const ANCHOR_CALCULUS: &str = "q_k ∈ (p_k, m_α p_k); p* ≥ 4d; 2α − ε_p > 1";

/// Tolerances of the identity audits.
const IDENTITY_TOL: f64 = 1e-12;
const BONY_TOL: f64 = 1e-10;

type AuditResult = Result<Outcome, AuditFailure>;

/// Everything the field audits share: the grid, shells and the mean-free, dealiased datum.
pub struct FieldContext {
    pub grid: Grid,
    pub dyadic: DyadicDecomposition,
    pub theta: SpectralField,
    pub seed: u64,
    pub random_fields: u64,
}

impl FieldContext {
    pub fn new(cfg: &LoadedConfig, seed: u64) -> CliResult<Self> {
        let grid = cfg.grid()?;
        let theta = cfg.initial_field(grid, seed)?.dealiased().mean_free();
        Ok(Self {
            grid,
            dyadic: DyadicDecomposition::new(grid),
            theta,
            seed,
            random_fields: cfg.config.audit.random_fields,
        })
    }

    fn nonempty_shells(&self) -> Result<Vec<i32>, AuditFailure> {
        let mut out = Vec::new();
        for j in self.dyadic.shells() {
            if !self.dyadic.project_shell(&self.theta, j)?.is_zero() {
                out.push(j);
            }
        }
        Ok(out)
    }

    fn random_field(&self, i: u64) -> SpectralField {
        synthetic::random_band_limited(self.grid, self.dyadic.band_limit(), self.seed.wrapping_add(i))
    }
}

pub fn dyadic_identities(ctx: &FieldContext) -> AuditResult {
    let d = &ctx.dyadic;
    let partition = d.partition_residual();
    let band = ctx.theta.band_limited(d.band_limit());
    let fields: Vec<SpectralField> = std::iter::once(band)
        .chain((0..ctx.random_fields).map(|i| ctx.random_field(i)))
        .filter(|f| !f.is_zero())
        .collect();
    let mut orth = 0.0f64;
    let mut almost = 0.0f64;
    for f in &fields {
        orth = orth.max(d.orthogonality_defect(f));
        almost = almost.max(d.almost_orthogonality_constant(f));
    }
    Ok(
        Outcome::new(partition <= IDENTITY_TOL && orth <= IDENTITY_TOL && almost <= 2.0)
            .params(json!({"fields": fields.len(), "band_limit": d.band_limit(), "tolerance": IDENTITY_TOL}))
            .constant("almost_orthogonality", almost)
            .slack((2.0 - almost) / 2.0)
            .details(json!({"partition_residual": partition, "orthogonality_defect": orth})),
    )
}

pub fn bernstein(ctx: &FieldContext) -> AuditResult {
    let d = &ctx.dyadic;
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    let mut violations = 0usize;
    let mut measure = |f: &SpectralField, j: i32| -> Result<(), AuditFailure> {
        for p in [2.0, 4.0, f64::INFINITY] {
            let (lhs, rhs) = bernstein_derivative_sides(d, f, j, p, 2)?;
            if rhs > 0.0 {
                worst = worst.max(lhs / rhs);
                violations += usize::from(lhs > rhs);
                checks += 1;
            }
        }
        Ok(())
    };
    for j in ctx.nonempty_shells()? {
        measure(&ctx.theta, j)?;
    }
    for j in d.shells() {
        for i in 0..ctx.random_fields {
            let seed = ctx.seed.wrapping_add(i);
            measure(&synthetic::random_shell_field(d, j, seed, i % 2 == 0)?, j)?;
        }
    }
    Ok(Outcome::new(violations == 0)
        .params(json!({"p": ["2", "4", "inf"], "oversample": 2}))
        .constant("worst_ratio", worst)
        .slack(1.0 - worst)
        .details(json!({"checks": checks, "violations": violations})))
}

pub fn divergence_free(ctx: &FieldContext, law: &DriftLaw) -> AuditResult {
    let symbol = match law {
        DriftLaw::GeneralCz(m) => m.divergence_residual(ctx.grid),
        DriftLaw::Sqg | DriftLaw::ModifiedSqg { .. } => 0.0,
    };
    let u = VelocityOperator::new(ctx.grid, law, false)?.apply(&ctx.theta)?;
    let velocity = check_divergence_free(&u);
    let worst = symbol.max(velocity);
    Ok(Outcome::new(worst <= STRICT_TOLERANCE)
        .params(json!({"law": law.name(), "tolerance": STRICT_TOLERANCE}))
        .slack((STRICT_TOLERANCE - worst) / STRICT_TOLERANCE)
        .details(json!({"symbol_residual": symbol, "velocity_residual": velocity})))
}

/// Degree-0 matrix laws need a stable gain (spread ≤ 4); SQG-type laws a decreasing one.
pub fn drift_bounds(ctx: &FieldContext, law: &DriftLaw) -> AuditResult {
    let audit = drift_shell_bound_audit(&ctx.dyadic, &ctx.theta, law)?;
    let finite = audit.max_l2.is_finite() && audit.max_linf.is_finite();
    let (pass, slack) = match law {
        DriftLaw::GeneralCz(_) => (finite && audit.spread_l2 <= 4.0, Some((4.0 - audit.spread_l2) / 4.0)),
        DriftLaw::Sqg | DriftLaw::ModifiedSqg { .. } => (finite && audit.decreasing_l2, None),
    };
    let mut out = Outcome::new(pass)
        .params(json!({"law": law.name(), "spread_limit": 4.0}))
        .constant("max_ratio_l2", audit.max_l2)
        .constant("max_ratio_linf", audit.max_linf)
        .details(serde_json::to_value(&audit).unwrap_or_default());
    out.worst_slack = slack;
    Ok(out)
}

pub fn dissipation(ctx: &FieldContext) -> AuditResult {
    let (lo, hi) = (0.25, 4.0);
    let mut c_min = f64::INFINITY;
    let mut c_max = 0.0f64;
    let mut min_higher = f64::INFINITY;
    let mut rows = Vec::new();
    for j in ctx.nonempty_shells()? {
        let a = dissipation_lower_bound_audit(&ctx.dyadic, &ctx.theta, j, 2.0)?;
        c_min = c_min.min(a.constant);
        c_max = c_max.max(a.constant);
        for p in [4.0, 6.0] {
            let b = dissipation_lower_bound_audit(&ctx.dyadic, &ctx.theta, j, p)?;
            min_higher = min_higher.min(b.integral / b.norm_power);
        }
        rows.push(a);
    }
    let pass = rows.is_empty() || (c_min >= lo && c_max <= hi && min_higher > 0.0);
    let mut out = Outcome::new(pass)
        .params(json!({"p": [2, 4, 6], "constant_range": [lo, hi]}))
        .details(json!({"p2": rows, "min_normalised_integral_p4_p6": min_higher}));
    if !rows.is_empty() {
        out = out
            .constant("c_min", c_min)
            .constant("c_max", c_max)
            .slack(((c_min - lo) / lo).min((hi - c_max) / hi));
    }
    Ok(out)
}

pub fn bony_reconstruction(ctx: &FieldContext, law: &DriftLaw) -> AuditResult {
    let d = &ctx.dyadic;
    let drivers: Vec<SpectralField> = std::iter::once(ctx.theta.clone())
        .chain((0..ctx.random_fields).map(|i| ctx.random_field(1000 + i)))
        .collect();
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    for a in &drivers {
        let u = velocity_from_theta(a, law)?;
        for j in d.interior() {
            let split = bony_split(d, &u, &ctx.theta, j)?;
            let oracle = transport_by_convolution(d, &u, &ctx.theta, j)?;
            let diff = split.total().sub(&oracle)?.l2_norm();
            let scale = oracle.l2_norm();
            worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
            cases += 1;
        }
    }
    Ok(Outcome::new(worst <= BONY_TOL)
        .params(json!({"law": law.name(), "tolerance": BONY_TOL, "oracle": "direct Fourier convolution"}))
        .slack(1.0 - worst / BONY_TOL)
        .details(json!({"cases": cases, "worst_relative_error": worst})))
}

/// Certificate index from the `audit` section.
pub fn certificate_index(cfg: &LoadedConfig) -> CliResult<(Rational, Rational, Rational)> {
    let a = &cfg.config.audit;
    Ok((
        parse_rational("audit.alpha", &a.alpha)?,
        parse_rational("audit.p", &a.p)?,
        parse_rational("audit.q", &a.q)?,
    ))
}

pub fn j_certificates(
    ctx: &FieldContext,
    law: &DriftLaw,
    exps: &(Rational, Rational, Rational),
    spread_limit: f64,
) -> Result<(Outcome, Option<CertificateSuite>), AuditFailure> {
    let index = CertificateIndex::new(exps.0.clone(), exps.1.clone(), exps.2.clone())?;
    let suite = certificate_suite(&ctx.dyadic, &ctx.theta, law, &index, None, spread_limit)?;
    let interior = ctx.dyadic.interior();
    let geometric = geometric_sum_check(&index, 1.0, (*interior.start(), *interior.end())).ok();
    let pass = suite.pass && geometric.as_ref().is_none_or(|g| g.pass);
    let out = Outcome::new(pass)
        .params(json!({
            "law": law.name(),
            "alpha": exps.0.to_string(),
            "p": exps.1.to_string(),
            "q": exps.2.to_string(),
            "spread_limit": spread_limit,
        }))
        .constant("C1", suite.constants[0])
        .constant("C2", suite.constants[1])
        .constant("C3", suite.constants[2])
        .slack(1.0 - suite.worst_spread() / spread_limit)
        .details(json!({"spreads": suite.spreads, "geometric_sums": geometric}));
    Ok((out, Some(suite)))
}

/// Runs the configured solver once with snapshots and every exponent the audits read.
pub fn audit_trajectory(
    ctx: &FieldContext,
    cfg: &LoadedConfig,
    law: &DriftLaw,
    extra_p: &[f64],
) -> CliResult<Result<Trajectory, AuditFailure>> {
    let mut solver_cfg = cfg
        .config
        .solver
        .solver_config(besov_core::solver::Drift::Law(law.clone()))?;
    solver_cfg.keep_snapshots = true;
    for &p in extra_p.iter().chain(&[f64::INFINITY]) {
        if !solver_cfg.p_list.iter().any(|q| *q == p) {
            solver_cfg.p_list.push(p);
        }
    }
    let solver = match Solver::new(ctx.grid, solver_cfg) {
        Ok(s) => s,
        // A law rejected by strict mode fails the audits rather than the config.
        Err(e @ besov_core::Error::NotDivergenceFree { .. }) => return Ok(Err(AuditFailure::from(e))),
        Err(e) => return Err(CliError::Config(e.to_string())),
    };
    Ok(match solver.run(&ctx.dyadic, &ctx.theta) {
        Ok(traj) => match &traj.status {
            RunStatus::Completed => Ok(traj),
            RunStatus::CflAbort { t, dt, limit, suggested } => Err(AuditFailure::abort(format!(
                "CFL abort at t = {t}: dt = {dt:e} exceeds {limit:e}; suggested dt = {suggested:e}"
            ))),
        },
        Err(e) => Err(AuditFailure::new(e.to_string())),
    })
}

pub fn gronwall_duhamel(
    ctx: &FieldContext,
    cfg: &LoadedConfig,
    traj: &Trajectory,
    exps: &(Rational, Rational, Rational),
) -> AuditResult {
    let a = &cfg.config.audit;
    let t_end = cfg.config.solver.t_end;
    let [t0, t1] = a.window.unwrap_or([t_end / 6.0, t_end]);
    let interior = ctx.dyadic.interior();
    let params = DuhamelParams {
        tolerance: a.tolerance,
        max_constant: a.max_constant,
        ..DuhamelParams::new(
            (*interior.start(), *interior.end()),
            exps.2.to_f64(),
            exps.1.to_f64(),
            exps.0.to_f64(),
        )
    };
    let rep = gronwall_duhamel_audit(&traj.window(t0, t1), &params)?;
    Ok(Outcome::new(rep.pass)
        .params(json!({
            "window": [t0, t1],
            "shells": [params.shells.0, params.shells.1],
            "q": params.q,
            "p": params.p,
            "alpha": params.alpha,
            "tolerance": params.tolerance,
            "max_constant": params.max_constant,
        }))
        .constant("c", rep.c)
        .constant("K", rep.k_factor)
        .constant("C", rep.constant)
        .slack(rep.worst_slack)
        .details(json!({"shells": rep.shells, "samples": rep.samples})))
}

pub fn hm_energy(cfg: &LoadedConfig, traj: &Trajectory) -> AuditResult {
    let a = &cfg.config.audit;
    let rep = hm_energy_audit(traj, a.energy_order, a.tolerance)?;
    Ok(Outcome::new(rep.pass)
        .params(json!({"order": a.energy_order, "tolerance": a.tolerance}))
        .constant("kappa", rep.kappa)
        .slack(rep.worst_slack)
        .details(json!({"fitted": rep.fitted, "samples": rep.samples})))
}

/// Smallest numerator of the low-α sweep `k/64`; exact schedules below `α = 1/16` run to
/// hundreds of steps with kilobit numerators.
const LOW_SWEEP_START: i64 = 4;

/// Structural properties of the exponent calculus over rational sweeps; no floating point.
pub fn calculus_table() -> AuditResult {
    let mut failures: Vec<String> = Vec::new();
    let mut plans = 0usize;
    let mut min_ratio: Option<Rational> = None;
    let mut prev_m: Option<Rational> = None;
    for k in LOW_SWEEP_START..32 {
        let alpha = Rational::new(k, 64);
        let m = gain_factor(&alpha)?;
        if prev_m.as_ref().is_some_and(|p| m <= *p) {
            failures.push(format!("m_α not increasing at α = {alpha}"));
        }
        prev_m = Some(m);
        for d in [2u32, 3] {
            let pl = plan(&alpha, d)?;
            plans += 1;
            if !pl.is_sound() {
                failures.push(format!("schedule unsound at (α, d) = ({alpha}, {d})"));
            }
            if let Some(ps) = &pl.p_star {
                let ratio = ps / Rational::integer(4 * d as i64);
                if ratio < Rational::one() {
                    failures.push(format!("p* < 4d at (α, d) = ({alpha}, {d})"));
                }
                if min_ratio.as_ref().is_none_or(|r| ratio < *r) {
                    min_ratio = Some(ratio);
                }
            }
        }
    }
    for k in 33..64 {
        let alpha = Rational::new(k, 64);
        for d in [2u32, 3] {
            let h = high_alpha_plan(&alpha, d)?;
            plans += 1;
            if !(h.target > Rational::one() && h.alpha_plus_alpha_p > Rational::one() && h.p > h.threshold) {
                failures.push(format!("high-α plan fails at (α, d) = ({alpha}, {d})"));
            }
        }
    }
    let (eff, branch) = effective_alpha(&Rational::new(1, 2))?;
    if !(eff == Rational::new(31, 64) && branch == Branch::LowAlpha) {
        failures.push(format!("α = 1/2 reduces to {eff}"));
    }
    for alpha in [Rational::new(31, 64), Rational::new(33, 64)] {
        if plan(&alpha, 2)?.target_index <= Rational::one() {
            failures.push(format!("target index ≤ 1 at α = {alpha}"));
        }
    }
    let min_ratio = min_ratio.unwrap_or_else(Rational::one);
    Ok(Outcome::new(failures.is_empty())
        .params(json!({"low_alpha": format!("k/64, k = {LOW_SWEEP_START}..31"), "high_alpha": "k/64, k = 33..63", "d": [2, 3]}))
        .constant("min_p_star_over_4d", min_ratio.to_f64())
        .slack(min_ratio.to_f64() - 1.0)
        .details(json!({"plans": plans, "failures": failures, "min_p_star_over_4d": min_ratio})))
}

/// Runs the selected audits. Config problems abort before any audit runs.
pub fn run_suite(cfg: &LoadedConfig, seed: u64, selected: &[AuditKind]) -> CliResult<Vec<AuditEntry>> {
    let ctx = if selected.iter().any(|a| a.needs_fields()) {
        Some(FieldContext::new(cfg, seed)?)
    } else {
        None
    };
    let needs_law = |a: &AuditKind| {
        matches!(
            a,
            AuditKind::DivergenceFree
                | AuditKind::DriftBounds
                | AuditKind::BonyReconstruction
                | AuditKind::JCertificates
                | AuditKind::GronwallDuhamel
                | AuditKind::HmEnergy
        )
    };
    let law = match &ctx {
        Some(c) if selected.iter().any(needs_law) => Some(cfg.constitutive_law(c.grid.dim())?),
        _ => None,
    };
    let exps = certificate_index(cfg)?;
    let trajectory = match (&ctx, &law) {
        (Some(c), Some(l))
            if selected
                .iter()
                .any(|a| matches!(a, AuditKind::GronwallDuhamel | AuditKind::HmEnergy)) =>
        {
            Some(audit_trajectory(c, cfg, l, &[exps.1.to_f64(), exps.2.to_f64()])?)
        }
        _ => None,
    };

    let mut entries = Vec::new();
    for &kind in selected {
        let name = kind.name();
        let ctx = ctx.as_ref();
        let field = || ctx.ok_or_else(|| AuditFailure::new("no field context"));
        let law_ref = || law.as_ref().ok_or_else(|| AuditFailure::new("no constitutive law"));
        let traj = || match &trajectory {
            Some(Ok(t)) => Ok(t),
            Some(Err(f)) => Err(f.clone()),
            None => Err(AuditFailure::new("no trajectory")),
        };
        let entry = match kind {
            AuditKind::DyadicIdentities => AuditEntry::run(name, ANCHOR_DYADIC, || dyadic_identities(field()?)),
            AuditKind::Bernstein => AuditEntry::run(name, ANCHOR_BERNSTEIN, || bernstein(field()?)),
            AuditKind::DivergenceFree => {
                AuditEntry::run(name, ANCHOR_DIVERGENCE, || divergence_free(field()?, law_ref()?))
            }
            AuditKind::DriftBounds => AuditEntry::run(name, ANCHOR_DRIFT, || drift_bounds(field()?, law_ref()?)),
            AuditKind::DissipationLowerBound => AuditEntry::run(name, ANCHOR_DISSIPATION, || dissipation(field()?)),
            AuditKind::BonyReconstruction => {
                AuditEntry::run(name, ANCHOR_BONY, || bony_reconstruction(field()?, law_ref()?))
            }
            AuditKind::JCertificates => AuditEntry::run(name, ANCHOR_CERTIFICATES, || {
                j_certificates(field()?, law_ref()?, &exps, cfg.config.audit.spread_limit).map(|r| r.0)
            }),
            AuditKind::GronwallDuhamel => AuditEntry::run(name, ANCHOR_DUHAMEL, || {
                gronwall_duhamel(field()?, cfg, traj()?, &exps)
            }),
            AuditKind::HmEnergy => AuditEntry::run(name, ANCHOR_ENERGY, || hm_energy(cfg, traj()?)),
            AuditKind::CalculusTable => AuditEntry::run(name, ANCHOR_CALCULUS, calculus_table),
        };
        entries.push(entry);
    }
    Ok(entries)
}
