//! Integrating-factor RK2 for `∂_t θ + u·∇θ + Λ^β θ = 0` and the a-priori-estimate audits.
//!
//! With `E_h = exp(−|ξ|^β h)` and `N(θ) = −P(u·∇θ)` (`P` the 2/3 truncation), one step is
//!
//! ```text
//! k₁ = N(θ),  θ_mid = E_{h/2}(θ + h/2·k₁),  k₂ = N(θ_mid),  θ⁺ = E_h θ + h·E_{h/2} k₂.
//! ```
//!
//! The linear part is exact, the scheme is second order in `h`, and `N(θ)(0) = 0` keeps the
//! mean exactly. Products are formed on a `3N/2` padded grid.

use serde::Serialize;

use crate::drift::{vector_lp, DriftLaw, VelocityOperator};
use crate::dyadic::{holder_norm_from_shells, trapezoid, DyadicDecomposition, RunStatus, Sample, Trajectory};
use crate::error::{Error, Result};
use crate::field::{
    forward_transform, from_padded_samples, gradient, lp_of_samples, padded_samples, partial,
    validate_exponent, Grid, RealField, SpectralField,
};
use num_complex::Complex64;

/// Transport velocity used by the solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Drift {
    /// Pure fractional diffusion.
    Off,
    /// `u = T[θ]` for a constitutive law.
    Law(DriftLaw),
    /// Constant velocity; the exact solution is a translated heat flow.
    Uniform(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Dissipation order: `Λ^β = (−Δ)^{β/2}`.
    pub beta: f64,
    pub drift: Drift,
    /// Record every `cadence` steps (the first and last states are always recorded).
    pub cadence: usize,
    /// Exponents of the per-shell records.
    pub p_list: Vec<f64>,
    /// Refinement factor for `L^∞` records.
    pub oversample: usize,
    pub keep_snapshots: bool,
    /// Reject matrix laws that are not divergence free.
    pub strict: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 0.1,
            beta: 2.0,
            drift: Drift::Off,
            cadence: 1,
            p_list: vec![2.0, f64::INFINITY],
            oversample: 2,
            keep_snapshots: false,
            strict: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidInput(format!("final time {} must be nonnegative", self.t_end)));
        }
        if !(self.beta > 0.0 && self.beta <= 2.0) {
            return Err(Error::InvalidInput(format!("dissipation order {} not in (0, 2]", self.beta)));
        }
        if self.cadence == 0 {
            return Err(Error::InvalidInput("record cadence must be at least 1".into()));
        }
        self.p_list.iter().try_for_each(|&p| validate_exponent(p))
    }
}

/// CFL limit `0.5·dx / max|u|` (infinite for `u ≡ 0`).
pub fn cfl_limit(grid: Grid, max_speed: f64) -> f64 {
    if max_speed > 0.0 {
        0.5 * grid.spacing() / max_speed
    } else {
        f64::INFINITY
    }
}

enum Rhs {
    Off,
    Law(VelocityOperator),
    Uniform(Vec<f64>),
}

/// A configured time stepper on one grid.
pub struct Solver {
    grid: Grid,
    config: SolverConfig,
    rhs: Rhs,
    /// `|ξ|^β` per mode.
    rate: Vec<f64>,
}

impl Solver {
    pub fn new(grid: Grid, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let rhs = match &config.drift {
            Drift::Off => Rhs::Off,
            Drift::Law(law) => Rhs::Law(VelocityOperator::new(grid, law, config.strict)?),
            Drift::Uniform(v) => {
                if v.len() != grid.dim() || v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidInput(format!("uniform drift {v:?} on a {}-d grid", grid.dim())));
                }
                Rhs::Uniform(v.clone())
            }
        };
        let rate = (0..grid.len()).map(|i| grid.wavenumber(i).powf(config.beta)).collect();
        Ok(Self { grid, config, rhs, rate })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// `(N(θ), max|u|)`.
    fn nonlinear(&self, theta: &SpectralField) -> Result<(SpectralField, f64)> {
        let grid = self.grid;
        match &self.rhs {
            Rhs::Off => Ok((SpectralField::zeros(grid), 0.0)),
            Rhs::Uniform(v) => {
                let speed = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let coeffs = theta
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let k = grid.wavevector_f64(i);
                        let w: f64 = v.iter().zip(&k).map(|(a, b)| a * b).sum();
                        c * Complex64::new(0.0, -w)
                    })
                    .collect();
                let mut out = SpectralField::new(grid, coeffs)?.dealiased();
                out.coeffs_mut()[0] = Complex64::default();
                Ok((out, speed))
            }
            Rhs::Law(op) => {
                let u = op.apply(theta)?;
                let m = 3 * grid.n() / 2;
                let mut product = vec![0.0; m.pow(grid.dim() as u32)];
                let mut speed2 = vec![0.0; product.len()];
                for a in 0..grid.dim() {
                    let ua = padded_samples(u.component(a), m);
                    let da = padded_samples(&partial(theta, a), m);
                    for ((p, s), (x, y)) in product.iter_mut().zip(speed2.iter_mut()).zip(ua.iter().zip(&da)) {
                        *p += x * y;
                        *s += x * x;
                    }
                }
                let speed = speed2.iter().fold(0.0f64, |acc, v| acc.max(*v)).sqrt();
                let mut out = from_padded_samples(&product, m, grid).dealiased().scale(-1.0);
                out.coeffs_mut()[0] = Complex64::default();
                Ok((out, speed))
            }
        }
    }

    /// Largest stable step for the current state.
    pub fn cfl_limit(&self, theta: &SpectralField) -> Result<f64> {
        Ok(cfl_limit(self.grid, self.nonlinear(theta)?.1))
    }

    /// One step of size `h`; errors with [`Error::Cfl`] when `h` exceeds the CFL limit.
    pub fn step(&self, theta: &SpectralField, h: f64) -> Result<SpectralField> {
        self.grid.ensure_same(&theta.grid())?;
        let (k1, speed) = self.nonlinear(theta)?;
        let limit = cfl_limit(self.grid, speed);
        if h > limit {
            return Err(Error::Cfl {
                dt: h,
                limit,
                suggested: 0.9 * limit,
            });
        }
        let full: Vec<f64> = self.rate.iter().map(|r| (-r * h).exp()).collect();
        let half: Vec<f64> = self.rate.iter().map(|r| (-r * h / 2.0).exp()).collect();
        let mid = theta.combine(1.0, &k1, h / 2.0)?.weighted(&half);
        let (k2, _) = self.nonlinear(&mid)?;
        let mut next = theta.weighted(&full);
        next.add_assign(&k2.weighted(&half).scale(h));
        Ok(next)
    }

    /// Integrates from a real datum; the mean is removed and recorded first.
    pub fn run_real(&self, dyadic: &DyadicDecomposition, theta0: &RealField) -> Result<Trajectory> {
        self.run(dyadic, &forward_transform(theta0))
    }

    /// Integrates to `t_end`, recording per-shell norms. The datum is projected to mean zero
    /// and 2/3-truncated. A CFL violation ends the run early with a
    /// [`RunStatus::CflAbort`] trajectory holding everything recorded so far.
    pub fn run(&self, dyadic: &DyadicDecomposition, theta0: &SpectralField) -> Result<Trajectory> {
        self.grid.ensure_same(&dyadic.grid())?;
        self.grid.ensure_same(&theta0.grid())?;
        let cfg = &self.config;
        let mut traj = Trajectory::for_decomposition(dyadic);
        traj.removed_mean = theta0.mean();
        let mut theta = theta0.dealiased();
        theta.coeffs_mut()[0] = Complex64::default();

        let measure = |t: f64, step: usize, th: &SpectralField| {
            Sample::measure(dyadic, t, step, th, &cfg.p_list, cfg.oversample, cfg.keep_snapshots)
        };
        traj.push(measure(0.0, 0, &theta)?)?;
        let steps = step_count(cfg.t_end, cfg.dt);
        let mut t = 0.0;
        let mut last_recorded = 0;
        for k in 1..=steps {
            let h = if k == steps { cfg.t_end - (k - 1) as f64 * cfg.dt } else { cfg.dt };
            match self.step(&theta, h) {
                Ok(next) => theta = next,
                Err(Error::Cfl { dt, limit, suggested }) => {
                    if last_recorded != k - 1 {
                        traj.push(measure(t, k - 1, &theta)?)?;
                    }
                    traj.status = RunStatus::CflAbort { t, dt, limit, suggested };
                    return Ok(traj);
                }
                Err(e) => return Err(e),
            }
            t = if k == steps { cfg.t_end } else { k as f64 * cfg.dt };
            if k % cfg.cadence == 0 || k == steps {
                traj.push(measure(t, k, &theta)?)?;
                last_recorded = k;
            }
        }
        Ok(traj)
    }
}

/// `⌈t_end/dt⌉`, ignoring round-off overshoot.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    let ratio = t_end / dt;
    let n = ratio.round();
    if (ratio - n).abs() <= 1e-9 * n.max(1.0) {
        n as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Integrates `theta0` with `config` on the grid of `theta0`.
pub fn simulate(theta0: &SpectralField, config: &SolverConfig) -> Result<Trajectory> {
    let grid = theta0.grid();
    let dyadic = DyadicDecomposition::new(grid);
    Solver::new(grid, config.clone())?.run(&dyadic, theta0)
}

/// Dissipation ratio for one shell: `C_j = 2^{2j}‖g‖_p^p / ∫|g|^{p−2}g(−Δg)`, `g = Δ_jθ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipationAudit {
    pub j: i32,
    pub p: f64,
    /// `∫|g|^{p−2} g (−Δg)`.
    pub integral: f64,
    /// `‖g‖_p^p`.
    pub norm_power: f64,
    pub constant: f64,
    /// Quadrature grid size per axis.
    pub quadrature_n: usize,
}

/// Quadrature grid for `|g|^{p−2}g(−Δg)` with `g` in shell `j`: the next power of two above
/// `p·2^{j+1}`, at least `N` and at most `4N` (`d = 2`) or `2N` (`d = 3`).
pub fn dissipation_quadrature_size(grid: Grid, j: i32, p: f64) -> usize {
    let need = p * 2f64.powi(j + 1);
    let mut m = grid.n();
    while (m as f64) <= need {
        m *= 2;
    }
    let cap = if grid.dim() == 2 { 4 * grid.n() } else { 2 * grid.n() };
    m.min(cap)
}

/// `C_j` with `g = Δ_jθ`; the integral is positive for every nonzero `g` and `p ≥ 2`.
pub fn dissipation_lower_bound_audit(
    dyadic: &DyadicDecomposition,
    theta: &SpectralField,
    j: i32,
    p: f64,
) -> Result<DissipationAudit> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    let g = dyadic.project_shell(theta, j)?;
    if g.is_zero() {
        return Err(Error::EmptyShell(j));
    }
    let grid = g.grid();
    let lap_weights: Vec<f64> = (0..grid.len()).map(|i| grid.wavenumber(i).powi(2)).collect();
    let m = dissipation_quadrature_size(grid, j, p);
    let cell = (2.0 * std::f64::consts::PI / m as f64).powi(grid.dim() as i32);
    let gs = padded_samples(&g, m);
    let ls = padded_samples(&g.weighted(&lap_weights), m);
    let integral: f64 = gs
        .iter()
        .zip(&ls)
        .map(|(a, b)| a.abs().powf(p - 2.0) * a * b)
        .sum::<f64>()
        * cell;
    let norm_power = lp_of_samples(&gs, p, cell).powf(p);
    Ok(DissipationAudit {
        j,
        p,
        integral,
        norm_power,
        constant: 4f64.powi(j) * norm_power / integral,
        quadrature_n: m,
    })
}

/// How the Duhamel audit chooses the decay rate `c` in `e^{−c2^{2j}(t−s)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum DecayRate {
    Fixed(f64),
    /// `min 1/C_j` of the dissipation audit over snapshots and audited shells.
    Fitted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DuhamelParams {
    /// Audited shells `[j₀, j₁]`.
    pub shells: (i32, i32),
    pub q: f64,
    pub p: f64,
    pub alpha: f64,
    pub rate: DecayRate,
    /// Admissible negative slack relative to `max_t ‖Δ_jθ(t)‖_q`.
    pub tolerance: f64,
    /// Largest acceptable fitted constant.
    pub max_constant: f64,
}

impl DuhamelParams {
    pub fn new(shells: (i32, i32), q: f64, p: f64, alpha: f64) -> Self {
        Self {
            shells,
            q,
            p,
            alpha,
            rate: DecayRate::Fitted,
            tolerance: 1e-6,
            max_constant: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuhamelShell {
    pub j: i32,
    /// Smallest constant that makes this shell's inequality hold at every sample.
    pub required_constant: f64,
    /// `min_{t>t₀} (RHS − LHS) / max_t LHS` at the global fitted constant.
    pub worst_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuhamelReport {
    pub interval: (f64, f64),
    pub q: f64,
    pub p: f64,
    pub alpha: f64,
    pub c: f64,
    /// `K = ‖θ‖_{L^∞(I;C^α)}^{2−p/q}`.
    pub k_factor: f64,
    pub constant: f64,
    pub worst_slack: f64,
    pub shells: Vec<DuhamelShell>,
    pub samples: usize,
    pub pass: bool,
}

/// `(φ₁(x), ψ(x))` with `φ₁ = (1 − e^{−x})/x` and `ψ = (1 − e^{−x}(1 + x))/x²`.
fn exp_weights(x: f64) -> (f64, f64) {
    if x < 1e-3 {
        let psi = 0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0;
        let phi = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
        (phi, psi)
    } else {
        (-(-x).exp_m1() / x, (1.0 - (-x).exp() * (1.0 + x)) / (x * x))
    }
}

/// `I(t_i) = ∫_{t₀}^{t_i} e^{−λ(t_i−s)} g(s) ds` for piecewise-linear `g`, integrated exactly.
pub(crate) fn exponential_convolution(times: &[f64], g: &[f64], lambda: f64) -> Vec<f64> {
    let mut out = vec![0.0; times.len()];
    for i in 1..times.len() {
        let h = times[i] - times[i - 1];
        let x = lambda * h;
        let (phi, psi) = exp_weights(x);
        out[i] = (-x).exp() * out[i - 1] + h * (g[i - 1] * psi + g[i] * (phi - psi));
    }
    out
}

/// Fits the single constant `C` in the Duhamel form of the shell estimate
///
/// ```text
/// ‖Δ_jθ(t)‖_q ≤ e^{−c2^{2j}(t−t₀)}‖Δ_jθ(t₀)‖_q + C·K·∫_{t₀}^t e^{−c2^{2j}(t−s)} w_j(s) ds,
/// w_j = 2^{j(1−α)} Σ_{k≤j} 2^{k e₁} a_k + 2^{j(2−α−r−α(1−r))} Σ_{|k−j|≤2} a_k + 2^j Σ_{k≥j−1} 2^{k e₃} a_k,
/// ```
///
/// with `r = p/q`, `a_k = (2^k‖Δ_kθ‖_p)^r`, `e₁ = 1−r−α(1−r)`, `e₃ = 1−α−r−α(1−r)` and the
/// shell sums truncated to resolved shells. Needs `L^q`, `L^p` and `L^∞` records; a fitted
/// `c` also needs snapshots.
pub fn gronwall_duhamel_audit(traj: &Trajectory, params: &DuhamelParams) -> Result<DuhamelReport> {
    let samples = traj.samples();
    if samples.len() < 2 {
        return Err(Error::MissingRecords(format!(
            "the Duhamel audit needs at least two samples, got {}",
            samples.len()
        )));
    }
    let (j0, j1) = params.shells;
    if j0 > j1 || j0 < traj.j_min() || j1 > traj.j_max() {
        return Err(Error::ShellOutOfRange {
            j: if j0 < traj.j_min() { j0 } else { j1 },
            min: traj.j_min(),
            max: traj.j_max(),
        });
    }
    let (q, p, alpha) = (params.q, params.p, params.alpha);
    validate_exponent(p)?;
    validate_exponent(q)?;
    if !(q.is_finite() && p.is_finite() && q >= p) {
        return Err(Error::Precondition(format!("Duhamel audit needs finite 2 ≤ p ≤ q, got p={p}, q={q}")));
    }
    let r = p / q;
    let times = traj.times();
    let t0 = times[0];
    let c = match params.rate {
        DecayRate::Fixed(c) => c,
        DecayRate::Fitted => fitted_decay_rate(traj, params.shells, q)?,
    };
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::DegenerateFit { usable: 0 });
    }

    let mut holder = 0.0f64;
    for s in samples {
        let rec = s.record(f64::INFINITY).ok_or_else(|| {
            Error::MissingRecords(format!("no L^∞ shell record at t = {}", s.t))
        })?;
        holder = holder.max(holder_norm_from_shells(s.sup, &rec.norms, traj.j_min(), alpha));
    }
    let k_factor = holder.powf(2.0 - r);

    let forcing: Vec<Vec<f64>> = (traj.j_min()..=traj.j_max())
        .map(|k| {
            Ok(traj
                .shell_series(p, k)?
                .into_iter()
                .map(|n| (2f64.powi(k) * n).powf(r))
                .collect())
        })
        .collect::<Result<_>>()?;
    let e_low = 1.0 - r - alpha * (1.0 - r);
    let e_high = 1.0 - alpha - r - alpha * (1.0 - r);
    let e_mid = 2.0 - alpha - r - alpha * (1.0 - r);

    let mut constant = 0.0f64;
    let mut per_shell = Vec::new();
    struct Series {
        j: i32,
        lhs: Vec<f64>,
        first: Vec<f64>,
        g: Vec<f64>,
        scale: f64,
    }
    let mut series = Vec::new();
    for j in j0..=j1 {
        let lhs = traj.shell_series(q, j)?;
        let scale = lhs.iter().fold(0.0f64, |a, b| a.max(*b));
        if scale == 0.0 {
            continue;
        }
        let jf = j as f64;
        let lambda = c * 4f64.powi(j);
        let first: Vec<f64> = times.iter().map(|t| (-lambda * (t - t0)).exp() * lhs[0]).collect();
        let w: Vec<f64> = (0..times.len())
            .map(|i| {
                let mut acc = 0.0;
                for k in traj.j_min()..=traj.j_max() {
                    let a = forcing[(k - traj.j_min()) as usize][i];
                    let kf = k as f64;
                    if k <= j {
                        acc += 2f64.powf(jf * (1.0 - alpha) + kf * e_low) * a;
                    }
                    if (k - j).abs() <= 2 {
                        acc += 2f64.powf(jf * e_mid) * a;
                    }
                    if k >= j - 1 {
                        acc += 2f64.powf(jf + kf * e_high) * a;
                    }
                }
                acc
            })
            .collect();
        let g: Vec<f64> = exponential_convolution(&times, &w, lambda)
            .into_iter()
            .map(|v| k_factor * v)
            .collect();
        let mut required = 0.0f64;
        for i in 0..times.len() {
            let excess = lhs[i] - first[i];
            if excess > 1e-12 * scale {
                required = required.max(if g[i] > 0.0 { excess / g[i] } else { f64::INFINITY });
            }
        }
        constant = constant.max(required);
        series.push(Series { j, lhs, first, g, scale });
        per_shell.push(required);
    }

    let mut worst_slack = f64::INFINITY;
    let shells = series
        .iter()
        .zip(per_shell)
        .map(|(s, required)| {
            let slack = (1..times.len())
                .map(|i| {
                    let bound = if constant.is_finite() {
                        s.first[i] + constant * s.g[i]
                    } else {
                        f64::INFINITY
                    };
                    (bound - s.lhs[i]) / s.scale
                })
                .fold(f64::INFINITY, f64::min);
            worst_slack = worst_slack.min(slack);
            DuhamelShell {
                j: s.j,
                required_constant: required,
                worst_slack: slack,
            }
        })
        .collect();
    if worst_slack == f64::INFINITY {
        worst_slack = 0.0;
    }
    let pass = constant.is_finite() && constant <= params.max_constant && worst_slack >= -params.tolerance;
    Ok(DuhamelReport {
        interval: (t0, *times.last().unwrap()),
        q,
        p,
        alpha,
        c,
        k_factor,
        constant,
        worst_slack,
        shells,
        samples: times.len(),
        pass,
    })
}

/// `min 1/C_j` of [`dissipation_lower_bound_audit`] at exponent `q` over all snapshots and
/// the shells in `range` (empty shells are skipped).
pub fn fitted_decay_rate(traj: &Trajectory, range: (i32, i32), q: f64) -> Result<f64> {
    let snaps = traj.snapshots()?;
    let dyadic = DyadicDecomposition::new(traj.grid());
    let mut c = f64::INFINITY;
    let mut usable = 0;
    for (_, theta) in snaps {
        for j in range.0..=range.1 {
            match dissipation_lower_bound_audit(&dyadic, theta, j, q) {
                Ok(a) if a.constant.is_finite() && a.constant > 0.0 => {
                    c = c.min(1.0 / a.constant);
                    usable += 1;
                }
                Ok(_) | Err(Error::EmptyShell(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    if usable == 0 {
        return Err(Error::DegenerateFit { usable });
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub order: u32,
    /// Exponent rate `κ` in `‖θ(t)‖²_{Ḣ^m} ≤ ‖θ(t₀)‖²_{Ḣ^m} exp(κ∫‖∇θ‖²_∞)`.
    pub kappa: f64,
    pub fitted: bool,
    pub worst_slack: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Energy growth audit for `‖θ‖²_{Ḣ^m}` against `exp(κ∫_{t₀}^t ‖∇θ‖²_{L^∞})`.
///
/// For `m = 1` the rate is `κ = 1`; for larger `m` the smallest admissible `κ` is fitted and
/// the audit passes when it is finite. Slack is `min_{t>t₀}` relative to `‖θ(t₀)‖²_{Ḣ^m}`.
pub fn hm_energy_audit(traj: &Trajectory, order: u32, tolerance: f64) -> Result<EnergyReport> {
    if order == 0 {
        return Err(Error::InvalidInput("energy audit order must be at least 1".into()));
    }
    let snaps = traj.snapshots()?;
    if snaps.len() < 2 {
        return Err(Error::MissingRecords(format!(
            "the energy audit needs at least two snapshots, got {}",
            snaps.len()
        )));
    }
    let times: Vec<f64> = snaps.iter().map(|(t, _)| *t).collect();
    let energy: Vec<f64> = snaps.iter().map(|(_, f)| f.sobolev_norm(order as f64).powi(2)).collect();
    let grad2: Vec<f64> = snaps
        .iter()
        .map(|(_, f)| vector_lp(&gradient(f), f64::INFINITY, 2).powi(2))
        .collect();
    let integral: Vec<f64> = (0..times.len())
        .map(|i| trapezoid(&times[..=i], &grad2[..=i]))
        .collect();
    let e0 = energy[0];
    let fitted = order > 1;
    let kappa = if fitted {
        (1..times.len())
            .filter(|&i| energy[i] > e0 && integral[i] > 0.0)
            .map(|i| {
                if e0 > 0.0 {
                    (energy[i] / e0).ln() / integral[i]
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    } else {
        1.0
    };
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    let worst_slack = (1..times.len())
        .map(|i| (e0 * (kappa * integral[i]).exp() - energy[i]) / scale)
        .fold(f64::INFINITY, f64::min);
    Ok(EnergyReport {
        order,
        kappa,
        fitted,
        worst_slack,
        samples: times.len(),
        pass: kappa.is_finite() && worst_slack >= -tolerance,
    })
}

/// Mean drift and per-step `L²` growth along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub max_mean_drift: f64,
    /// Largest `(‖θ(t_{i+1})‖₂ − ‖θ(t_i)‖₂) / (‖θ(t₀)‖₂ · steps)` over consecutive samples.
    pub max_l2_growth: f64,
}

pub fn conservation_report(traj: &Trajectory) -> ConservationReport {
    let s = traj.samples();
    let m0 = s.first().map_or(0.0, |x| x.mean);
    let l0 = s.first().map_or(0.0, |x| x.l2).max(f64::MIN_POSITIVE);
    ConservationReport {
        max_mean_drift: s.iter().map(|x| (x.mean - m0).abs()).fold(0.0, f64::max),
        max_l2_growth: s
            .windows(2)
            .map(|w| (w[1].l2 - w[0].l2) / (l0 * (w[1].step - w[0].step).max(1) as f64))
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn heat_config(dt: f64, t_end: f64) -> SolverConfig {
        SolverConfig {
            dt,
            t_end,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn step_count_absorbs_roundoff() {
        assert_eq!(step_count(0.1, 1e-3), 100);
        assert_eq!(step_count(0.1, 0.03), 4);
        assert_eq!(step_count(0.0, 0.01), 0);
    }

    #[test]
    fn heat_single_mode_decays_exactly() {
        let grid = Grid::new(2, 32).unwrap();
        let theta = synthetic::single_mode(grid, &[4, 0], 1.0).unwrap();
        let traj = simulate(&theta, &heat_config(1e-3, 0.1)).unwrap();
        let last = traj.samples().last().unwrap();
        assert_eq!(last.t, 0.1);
        let expected = (-16.0f64 * 0.1).exp() * theta.l2_norm();
        assert!((last.l2 - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn uniform_drift_is_second_order() {
        let grid = Grid::new(2, 32).unwrap();
        let theta = synthetic::single_mode(grid, &[4, 0], 1.0).unwrap();
        let exact = |t: f64| {
            SpectralField::from_fn(grid, |k| {
                if k == [4, 0] || k == [-4, 0] {
                    let w = (k[0] as f64) * 1.0;
                    Complex64::from_polar(0.5 * (-16.0 * t).exp(), -w * t)
                } else {
                    Complex64::default()
                }
            })
        };
        let err = |dt: f64| {
            let solver = Solver::new(
                grid,
                SolverConfig {
                    drift: Drift::Uniform(vec![1.0, 0.0]),
                    ..heat_config(dt, 0.2)
                },
            )
            .unwrap();
            let mut th = theta.clone();
            for _ in 0..step_count(0.2, dt) {
                th = solver.step(&th, dt).unwrap();
            }
            th.sub(&exact(0.2)).unwrap().l2_norm()
        };
        let ratio = err(0.01) / err(0.005);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn sqg_conserves_mean_and_dissipates() {
        let grid = Grid::new(2, 32).unwrap();
        let theta = synthetic::random_band_limited(grid, 5.0, 7);
        let cfg = SolverConfig {
            drift: Drift::Law(DriftLaw::Sqg),
            ..heat_config(2e-3, 0.05)
        };
        let traj = simulate(&theta, &cfg).unwrap();
        assert!(traj.is_complete());
        let rep = conservation_report(&traj);
        assert!(rep.max_mean_drift <= 1e-13);
        assert!(rep.max_l2_growth <= 1e-8);
    }

    #[test]
    fn oversized_step_aborts_with_suggestion() {
        let grid = Grid::new(2, 32).unwrap();
        let theta = synthetic::single_mode(grid, &[1, 1], 50.0).unwrap();
        let cfg = SolverConfig {
            drift: Drift::Law(DriftLaw::Sqg),
            ..heat_config(0.05, 0.2)
        };
        let traj = simulate(&theta, &cfg).unwrap();
        match traj.status {
            RunStatus::CflAbort { dt, limit, suggested, .. } => {
                assert!(dt > limit);
                assert!((suggested - 0.9 * limit).abs() < 1e-15);
            }
            RunStatus::Completed => panic!("expected a CFL abort"),
        }
        assert!(!traj.samples().is_empty());
    }

    #[test]
    fn single_mode_dissipation_constant_is_one() {
        let grid = Grid::new(2, 32).unwrap();
        let d = DyadicDecomposition::new(grid);
        let theta = synthetic::single_mode(grid, &[4, 0], 1.0).unwrap();
        let a = dissipation_lower_bound_audit(&d, &theta, 2, 2.0).unwrap();
        assert!((a.constant - 1.0).abs() < 1e-12);
        assert!(dissipation_lower_bound_audit(&d, &theta, 0, 2.0).is_err());
        assert!(dissipation_lower_bound_audit(&d, &theta, 2, 1.5).is_err());
    }

    #[test]
    fn exponential_convolution_matches_closed_form() {
        // g(s) = s, λ = 3: ∫_0^t e^{−3(t−s)} s ds = t/3 − (1 − e^{−3t})/9.
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.025).collect();
        let out = exponential_convolution(&times, &times, 3.0);
        for (t, v) in times.iter().zip(&out) {
            let exact = t / 3.0 - (1.0 - (-3.0 * t).exp()) / 9.0;
            assert!((v - exact).abs() < 1e-14, "t={t}");
        }
        let (phi, psi) = exp_weights(1e-3);
        let (phi2, psi2) = exp_weights(1.0000001e-3);
        assert!((phi - phi2).abs() < 1e-9 && (psi - psi2).abs() < 1e-9);
    }

    #[test]
    fn pure_diffusion_needs_no_nonlinear_constant() {
        let grid = Grid::new(2, 32).unwrap();
        let theta = synthetic::random_band_limited(grid, 7.0, 2);
        let cfg = SolverConfig {
            p_list: vec![2.0, f64::INFINITY],
            ..heat_config(1e-3, 0.05)
        };
        let traj = simulate(&theta, &cfg).unwrap();
        let params = DuhamelParams {
            rate: DecayRate::Fixed(0.25),
            ..DuhamelParams::new((1, 3), 2.0, 2.0, 0.25)
        };
        let rep = gronwall_duhamel_audit(&traj, &params).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.constant, 0.0);
        assert!(rep.worst_slack >= 0.0);
    }

    #[test]
    fn audits_report_missing_records() {
        let grid = Grid::new(2, 16).unwrap();
        let theta = synthetic::random_band_limited(grid, 3.0, 2);
        let traj = simulate(&theta, &heat_config(1e-2, 0.02)).unwrap();
        let params = DuhamelParams::new((1, 2), 2.5, 2.0, 0.25);
        assert!(matches!(gronwall_duhamel_audit(&traj, &params), Err(Error::MissingRecords(_))));
        assert!(matches!(hm_energy_audit(&traj, 1, 1e-6), Err(Error::MissingRecords(_))));
    }
}
