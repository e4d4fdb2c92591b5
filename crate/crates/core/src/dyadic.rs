//! Littlewood-Paley blocks, homogeneous Besov and Chemin-Lerner norms, Hölder-exponent fits.
//!
//! The radial bump is `ψ(r) = χ(r) − χ(2r)`, where `χ` is a `C^∞` step equal to 1 on
//! `[0, 1]` and 0 on `[2, ∞)`. Hence `ψ` is supported in `[1/2, 2]`, `ψ(1) = 1`,
//! `ψ(1/2) = ψ(2) = 0`, and `Σ_{j∈ℤ} ψ(r/2^j) = 1` telescopes exactly for every `r > 0`.
//! Shells run over `j ∈ [0, log₂(N/2) − 1]`; on the grid the finite sum `Σ_j ψ(|ξ|/2^j)`
//! equals 1 for `1 ≤ |ξ| ≤ 2^{j_max} = N/4`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    inverse_transform, lp_norm_spectral, lp_of_samples, padded_samples, partial,
    validate_exponent, Grid, SpectralField,
};
use crate::serde_ext::{self, format_exponent};

/// `e^{−1/x}` for `x > 0`, else 0.
fn ramp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth monotone step: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = ramp(t);
        a / (a + ramp(1.0 - t))
    }
}

/// Radial Littlewood-Paley profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellProfile {
    /// Tolerance used by [`ShellProfile::partition_residual`] checks.
    pub tolerance: f64,
}

impl Default for ShellProfile {
    fn default() -> Self {
        Self { tolerance: 1e-12 }
    }
}

impl ShellProfile {
    /// Low-pass step `χ`: 1 on `[0, 1]`, 0 on `[2, ∞)`, nonincreasing.
    pub fn chi(&self, r: f64) -> f64 {
        1.0 - smooth_step(r - 1.0)
    }

    /// Bump `ψ(r) = χ(r) − χ(2r)`.
    pub fn psi(&self, r: f64) -> f64 {
        if r <= 0.5 || r >= 2.0 {
            0.0
        } else {
            self.chi(r) - self.chi(2.0 * r)
        }
    }

    /// `max |Σ_{j∈ℤ} ψ(r/2^j) − 1|` over the given radii.
    pub fn partition_residual(&self, radii: &[f64]) -> f64 {
        radii
            .iter()
            .map(|&r| {
                let centre = r.log2().round() as i32;
                let sum: f64 = (centre - 2..=centre + 2)
                    .map(|j| self.psi(r / 2f64.powi(j)))
                    .sum();
                (sum - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `ψ` value found outside `[1/2, 2]` on the given radii (zero when supported).
    pub fn support_leak(&self, radii: &[f64]) -> f64 {
        radii
            .iter()
            .filter(|&&r| !(0.5..=2.0).contains(&r))
            .map(|&r| self.psi(r).abs())
            .fold(0.0, f64::max)
    }
}

/// `count` log-spaced radii covering `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

/// The shells `Δ_j`, `j ∈ [j_min, j_max]`, tabulated on one grid.
#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    grid: Grid,
    profile: ShellProfile,
    j_min: i32,
    j_max: i32,
    weights: Vec<Vec<f64>>,
}

impl DyadicDecomposition {
    pub fn new(grid: Grid) -> Self {
        Self::with_profile(grid, ShellProfile::default())
    }

    pub fn with_profile(grid: Grid, profile: ShellProfile) -> Self {
        let j_min = 0;
        let j_max = (grid.n() / 2).trailing_zeros() as i32 - 1;
        let radii: Vec<f64> = (0..grid.len()).map(|i| grid.wavenumber(i)).collect();
        let weights = (j_min..=j_max)
            .map(|j| {
                let scale = 2f64.powi(j);
                radii.iter().map(|&r| profile.psi(r / scale)).collect()
            })
            .collect();
        Self {
            grid,
            profile,
            j_min,
            j_max,
            weights,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn profile(&self) -> &ShellProfile {
        &self.profile
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn shells(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn shell_count(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    /// Radius `2^{j_max}` below which the shells sum to one on the grid.
    pub fn band_limit(&self) -> f64 {
        2f64.powi(self.j_max)
    }

    /// Shells whose neighbours are truncated: `j = j_min` and `j = j_max`.
    pub fn is_edge(&self, j: i32) -> bool {
        j < self.j_min + 1 || j > self.j_max - 1
    }

    /// Interior shells `[j_min + 1, j_max − 1]`.
    pub fn interior(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min + 1..=self.j_max - 1
    }

    fn check_shell(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::ShellOutOfRange {
                j,
                min: self.j_min,
                max: self.j_max,
            });
        }
        Ok(())
    }

    /// Symbol table `ψ(|ξ|/2^j)`.
    pub fn weights(&self, j: i32) -> Result<&[f64]> {
        self.check_shell(j)?;
        Ok(&self.weights[(j - self.j_min) as usize])
    }

    /// `Δ_j f`.
    pub fn project_shell(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.grid.ensure_same(&f.grid())?;
        Ok(f.weighted(self.weights(j)?))
    }

    /// `Δ_j f` for any integer `j`; zero outside the resolved range.
    pub(crate) fn shell_or_zero(&self, f: &SpectralField, j: i32) -> SpectralField {
        if j < self.j_min || j > self.j_max {
            SpectralField::zeros(f.grid())
        } else {
            f.weighted(&self.weights[(j - self.j_min) as usize])
        }
    }

    /// `S_j f = Σ_{k<j} Δ_k f`.
    pub fn low_pass(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        if j < self.j_min || j > self.j_max + 1 {
            return Err(Error::ShellOutOfRange {
                j,
                min: self.j_min,
                max: self.j_max + 1,
            });
        }
        self.grid.ensure_same(&f.grid())?;
        Ok(self.low_pass_clamped(f, j))
    }

    /// `Σ_{k<j} Δ_k f` with the sum truncated to resolved shells.
    pub(crate) fn low_pass_clamped(&self, f: &SpectralField, j: i32) -> SpectralField {
        let top = j.min(self.j_max + 1);
        let mut w = vec![0.0; self.grid.len()];
        for k in self.j_min..top {
            for (a, b) in w.iter_mut().zip(&self.weights[(k - self.j_min) as usize]) {
                *a += b;
            }
        }
        f.weighted(&w)
    }

    /// `Σ_j Δ_j f` over the resolved shells.
    pub fn reconstruct(&self, f: &SpectralField) -> SpectralField {
        self.low_pass_clamped(f, self.j_max + 1)
    }

    /// `‖Δ_j f‖_{L^p}` for every shell; `p = ∞` uses an `oversample`-refined grid.
    pub fn shell_norms(&self, f: &SpectralField, p: f64, oversample: usize) -> Result<Vec<f64>> {
        validate_exponent(p)?;
        self.shells()
            .map(|j| lp_norm_spectral(&self.project_shell(f, j)?, p, oversample))
            .collect()
    }

    /// Grid-level partition residual `max |Σ_j ψ(|ξ|/2^j) − 1|` over `1 ≤ |ξ| ≤ 2^{j_max}`.
    pub fn partition_residual(&self) -> f64 {
        let limit = self.band_limit();
        (1..self.grid.len())
            .filter(|&i| self.grid.wavenumber(i) <= limit)
            .map(|i| {
                let s: f64 = self.weights.iter().map(|w| w[i]).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max_{|j−k|≥2} ‖Δ_jΔ_k f‖_{L²} / ‖f‖_{L²}`.
    pub fn orthogonality_defect(&self, f: &SpectralField) -> f64 {
        let norm = f.l2_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for j in self.shells() {
            let dj = self.shell_or_zero(f, j);
            for k in self.shells().filter(|k| (k - j).abs() >= 2) {
                worst = worst.max(self.shell_or_zero(&dj, k).l2_norm() / norm);
            }
        }
        worst
    }

    /// Smallest `C` with `C⁻¹‖f‖² ≤ Σ_j ‖Δ_j f‖² ≤ C‖f‖²` for this `f`; at most 2 when the
    /// spectrum of `f` lies in `1 ≤ |ξ| ≤ 2^{j_max}`, where `1/2 ≤ Σ_j ψ_j² ≤ 1`.
    pub fn almost_orthogonality_constant(&self, f: &SpectralField) -> f64 {
        let total = f.l2_norm().powi(2);
        if total == 0.0 {
            return 1.0;
        }
        let sum: f64 = self
            .shells()
            .map(|j| self.shell_or_zero(f, j).l2_norm().powi(2))
            .sum();
        (sum / total).max(total / sum)
    }
}

/// `(‖∇Δ_j f‖_{L^p}, 2^{j+1}‖Δ_j f‖_{L^p})` with `|∇g|` the pointwise Euclidean norm.
pub fn bernstein_derivative_sides(
    dyadic: &DyadicDecomposition,
    f: &SpectralField,
    j: i32,
    p: f64,
    oversample: usize,
) -> Result<(f64, f64)> {
    validate_exponent(p)?;
    let g = dyadic.project_shell(f, j)?;
    let grid = g.grid();
    let m = grid.n() * oversample.max(1);
    let cell = (2.0 * std::f64::consts::PI / m as f64).powi(grid.dim() as i32);
    let mut mag = vec![0.0; m.pow(grid.dim() as u32)];
    for a in 0..grid.dim() {
        let da = padded_samples(&partial(&g, a), m);
        for (acc, v) in mag.iter_mut().zip(&da) {
            *acc += v * v;
        }
    }
    mag.iter_mut().for_each(|v| *v = v.sqrt());
    let lhs = lp_of_samples(&mag, p, cell);
    let rhs = 2f64.powi(j + 1) * lp_of_samples(&padded_samples(&g, m), p, cell);
    Ok((lhs, rhs))
}

/// `‖Δ_j f‖_{L^q} / (2^{jd(1/p − 1/q)} ‖Δ_j f‖_{L^p})`, or `None` for an empty shell.
pub fn bernstein_embedding_ratio(
    dyadic: &DyadicDecomposition,
    f: &SpectralField,
    j: i32,
    p: f64,
    q: f64,
    oversample: usize,
) -> Result<Option<f64>> {
    let g = dyadic.project_shell(f, j)?;
    let np = lp_norm_spectral(&g, p, oversample)?;
    let nq = lp_norm_spectral(&g, q, oversample)?;
    if np == 0.0 {
        return Ok(None);
    }
    let d = dyadic.grid().dim() as f64;
    let gap = 1.0 / p - 1.0 / q;
    Ok(Some(nq / (2f64.powf(j as f64 * d * gap) * np)))
}

/// `(‖g‖_{L^q}, ‖g‖_{L^p}^{p/q}‖g‖_{L^∞}^{1−p/q})` for `q > p`, all on the native grid.
pub fn interpolation_sides(g: &SpectralField, p: f64, q: f64) -> Result<(f64, f64)> {
    validate_exponent(p)?;
    validate_exponent(q)?;
    if !(q > p) {
        return Err(Error::Precondition(format!("interpolation needs q > p, got p={p}, q={q}")));
    }
    let x = inverse_transform(g);
    let cell = g.grid().cell_volume();
    let lq = lp_of_samples(x.values(), q, cell);
    let lp = lp_of_samples(x.values(), p, cell);
    let li = lp_of_samples(x.values(), f64::INFINITY, cell);
    let theta = if q.is_infinite() { 0.0 } else { p / q };
    Ok((lq, lp.powf(theta) * li.powf(1.0 - theta)))
}

/// `‖f‖_{C^α} = max(‖f‖_{L^∞}, sup_j 2^{jα}‖Δ_j f‖_{L^∞})` over the resolved shells.
pub fn holder_norm(
    dyadic: &DyadicDecomposition,
    f: &SpectralField,
    alpha: f64,
    oversample: usize,
) -> Result<f64> {
    let sup = lp_norm_spectral(f, f64::INFINITY, oversample)?;
    let shells = dyadic.shell_norms(f, f64::INFINITY, oversample)?;
    Ok(holder_norm_from_shells(sup, &shells, dyadic.j_min(), alpha))
}

pub(crate) fn holder_norm_from_shells(sup: f64, shells: &[f64], j_min: i32, alpha: f64) -> f64 {
    shells
        .iter()
        .enumerate()
        .map(|(i, n)| 2f64.powf((j_min + i as i32) as f64 * alpha) * n)
        .fold(sup, f64::max)
}

/// Index `(s, p, q)` of the homogeneous Besov space `Ḃ^s_{p,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    pub s: f64,
    #[serde(with = "serde_ext::exponent")]
    pub p: f64,
    #[serde(with = "serde_ext::exponent")]
    pub q: f64,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidInput(format!("regularity {s} is not finite")));
        }
        validate_exponent(p)?;
        validate_exponent(q)?;
        Ok(Self { s, p, q })
    }
}

/// `ℓ^q` norm of a finite sequence (`q = ∞` is the maximum).
pub fn lq_sum(values: impl IntoIterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values
            .into_iter()
            .map(|v| v.abs().powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }
}

/// One shell's contribution to a Besov or Chemin-Lerner norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellContribution {
    pub j: i32,
    /// Unweighted shell quantity (`‖Δ_j f‖_{L^p}`, or its time `L^r` norm).
    pub norm: f64,
    /// `2^{js}·norm`.
    pub weighted: f64,
    pub edge: bool,
}

/// JSON-facing norm report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub index: ReportIndex,
    pub value: f64,
    pub shell_breakdown: Vec<ShellContribution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportIndex {
    pub s: f64,
    #[serde(with = "serde_ext::exponent")]
    pub p: f64,
    #[serde(with = "serde_ext::exponent")]
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<serde_ext::Exponent>,
}

fn aggregate(
    dyadic_min: i32,
    edge: impl Fn(i32) -> bool,
    norms: &[f64],
    s: f64,
    q: f64,
) -> (f64, Vec<ShellContribution>) {
    let breakdown: Vec<ShellContribution> = norms
        .iter()
        .enumerate()
        .map(|(i, &norm)| {
            let j = dyadic_min + i as i32;
            ShellContribution {
                j,
                norm,
                weighted: 2f64.powf(j as f64 * s) * norm,
                edge: edge(j),
            }
        })
        .collect();
    let value = lq_sum(breakdown.iter().map(|c| c.weighted), q);
    (value, breakdown)
}

/// `‖f‖_{Ḃ^s_{p,q}}` with the shell breakdown.
pub fn besov_report(
    dyadic: &DyadicDecomposition,
    f: &SpectralField,
    idx: BesovIndex,
    oversample: usize,
) -> Result<NormReport> {
    f.ensure_mean_zero()?;
    let norms = dyadic.shell_norms(f, idx.p, oversample)?;
    let (value, shell_breakdown) =
        aggregate(dyadic.j_min(), |j| dyadic.is_edge(j), &norms, idx.s, idx.q);
    Ok(NormReport {
        index: ReportIndex {
            s: idx.s,
            p: idx.p,
            q: idx.q,
            r: None,
        },
        value,
        shell_breakdown,
    })
}

/// `‖f‖_{Ḃ^s_{p,q}} = ‖2^{js}‖Δ_j f‖_{L^p}‖_{ℓ^q}` over the resolved shells.
pub fn besov_norm(dyadic: &DyadicDecomposition, f: &SpectralField, idx: BesovIndex) -> Result<f64> {
    Ok(besov_report(dyadic, f, idx, 1)?.value)
}

/// Per-shell `L^p` norms recorded for one exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellRecord {
    #[serde(with = "serde_ext::exponent")]
    pub p: f64,
    /// Indexed by `j − j_min`.
    pub norms: Vec<f64>,
}

/// One recorded time sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub step: usize,
    pub mean: f64,
    pub l2: f64,
    /// `‖θ‖_{L^∞}` (on the refined grid used for `L^∞` shell records).
    pub sup: f64,
    pub records: Vec<ShellRecord>,
    pub snapshot: Option<SpectralField>,
}

impl Sample {
    /// Measures `θ` on every shell for each exponent in `p_list`.
    pub fn measure(
        dyadic: &DyadicDecomposition,
        t: f64,
        step: usize,
        theta: &SpectralField,
        p_list: &[f64],
        oversample: usize,
        keep_snapshot: bool,
    ) -> Result<Self> {
        let records = p_list
            .iter()
            .map(|&p| {
                Ok(ShellRecord {
                    p,
                    norms: dyadic.shell_norms(theta, p, oversample)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t,
            step,
            mean: theta.mean(),
            l2: theta.l2_norm(),
            sup: lp_norm_spectral(theta, f64::INFINITY, oversample)?,
            records,
            snapshot: keep_snapshot.then(|| theta.clone()),
        })
    }

    pub fn record(&self, p: f64) -> Option<&ShellRecord> {
        self.records.iter().find(|r| same_exponent(r.p, p))
    }
}

fn same_exponent(a: f64, b: f64) -> bool {
    a == b || (a.is_infinite() && b.is_infinite())
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    CflAbort {
        t: f64,
        dt: f64,
        limit: f64,
        suggested: f64,
    },
}

/// Time-stamped shell records on `I = [t₀, t₁]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Grid,
    j_min: i32,
    j_max: i32,
    samples: Vec<Sample>,
    pub status: RunStatus,
    /// Mean subtracted from the initial datum.
    pub removed_mean: f64,
}

impl Trajectory {
    pub fn new(grid: Grid, j_min: i32, j_max: i32) -> Self {
        Self {
            grid,
            j_min,
            j_max,
            samples: Vec::new(),
            status: RunStatus::Completed,
            removed_mean: 0.0,
        }
    }

    pub fn for_decomposition(dyadic: &DyadicDecomposition) -> Self {
        Self::new(dyadic.grid(), dyadic.j_min(), dyadic.j_max())
    }

    /// Appends a sample; times must increase strictly and records must be finite.
    pub fn push(&mut self, sample: Sample) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(sample.t > last.t) {
                return Err(Error::InvalidInput(format!(
                    "sample time {} does not follow {}",
                    sample.t, last.t
                )));
            }
        }
        let width = (self.j_max - self.j_min + 1) as usize;
        for r in &sample.records {
            if r.norms.len() != width {
                return Err(Error::InvalidInput(format!(
                    "record has {} shells, trajectory has {width}",
                    r.norms.len()
                )));
            }
            if r.norms.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidInput("non-finite shell record".into()));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Completed
    }

    /// `(t₀, t₁)`; `None` without samples.
    pub fn interval(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.t, self.samples.last()?.t))
    }

    /// Samples with `t₀ − tol ≤ t ≤ t₁ + tol`.
    pub fn window(&self, t0: f64, t1: f64) -> Trajectory {
        let tol = 1e-9 * t1.abs().max(1.0);
        Trajectory {
            grid: self.grid,
            j_min: self.j_min,
            j_max: self.j_max,
            samples: self
                .samples
                .iter()
                .filter(|s| s.t >= t0 - tol && s.t <= t1 + tol)
                .cloned()
                .collect(),
            status: self.status.clone(),
            removed_mean: self.removed_mean,
        }
    }

    /// `‖Δ_j θ(t_i)‖_{L^p}` for every sample `i`, or an error if `p` was not recorded.
    pub fn shell_series(&self, p: f64, j: i32) -> Result<Vec<f64>> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::ShellOutOfRange {
                j,
                min: self.j_min,
                max: self.j_max,
            });
        }
        self.samples
            .iter()
            .map(|s| {
                s.record(p)
                    .map(|r| r.norms[(j - self.j_min) as usize])
                    .ok_or_else(|| {
                        Error::MissingRecords(format!(
                            "no L^{} shell record at t = {}",
                            format_exponent(p),
                            s.t
                        ))
                    })
            })
            .collect()
    }

    /// Snapshots in sample order; errors if any sample lacks one.
    pub fn snapshots(&self) -> Result<Vec<(f64, &SpectralField)>> {
        self.samples
            .iter()
            .map(|s| {
                s.snapshot
                    .as_ref()
                    .map(|f| (s.t, f))
                    .ok_or_else(|| Error::MissingRecords(format!("no snapshot at t = {}", s.t)))
            })
            .collect()
    }

    /// CSV with header `t,j,p,norm`, one row per (sample, exponent, shell).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,j,p,norm\n");
        for s in &self.samples {
            for r in &s.records {
                for (i, v) in r.norms.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        s.t,
                        self.j_min + i as i32,
                        format_exponent(r.p),
                        v
                    );
                }
            }
        }
        out
    }

    fn require_interval(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::Precondition(format!(
                "time integrals need at least 2 samples, trajectory has {}",
                self.samples.len()
            )));
        }
        Ok(())
    }
}

/// Trapezoidal `∫ v(t) dt` on the sample times.
pub(crate) fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// `(∫_I v^r dt)^{1/r}` by trapezoid, or `max v` for `r = ∞`.
pub(crate) fn time_lr(times: &[f64], values: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(r)).collect();
        trapezoid(times, &powered).max(0.0).powf(1.0 / r)
    }
}

/// Chemin-Lerner norm with breakdown:
/// `‖2^{js}(∫_I ‖Δ_j f‖^r_{L^p} dt)^{1/r}‖_{ℓ^q}`.
pub fn chemin_lerner_report(traj: &Trajectory, r: f64, idx: BesovIndex) -> Result<NormReport> {
    validate_exponent(r)?;
    traj.require_interval()?;
    let times = traj.times();
    let norms = (traj.j_min..=traj.j_max)
        .map(|j| Ok(time_lr(&times, &traj.shell_series(idx.p, j)?, r)))
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = (traj.j_min, traj.j_max);
    let (value, shell_breakdown) =
        aggregate(lo, |j| j < lo + 1 || j > hi - 1, &norms, idx.s, idx.q);
    Ok(NormReport {
        index: ReportIndex {
            s: idx.s,
            p: idx.p,
            q: idx.q,
            r: Some(serde_ext::Exponent(r)),
        },
        value,
        shell_breakdown,
    })
}

pub fn chemin_lerner_norm(traj: &Trajectory, r: f64, idx: BesovIndex) -> Result<f64> {
    Ok(chemin_lerner_report(traj, r, idx)?.value)
}

/// Classical `‖f‖_{L^r(I; Ḃ^s_{p,q})}`: Besov norm per sample first, then time `L^r`.
pub fn bochner_norm(traj: &Trajectory, r: f64, idx: BesovIndex) -> Result<f64> {
    validate_exponent(r)?;
    traj.require_interval()?;
    let times = traj.times();
    let series = (traj.j_min..=traj.j_max)
        .map(|j| traj.shell_series(idx.p, j))
        .collect::<Result<Vec<_>>>()?;
    let per_time: Vec<f64> = (0..times.len())
        .map(|i| {
            lq_sum(
                series
                    .iter()
                    .enumerate()
                    .map(|(k, s)| 2f64.powf((traj.j_min + k as i32) as f64 * idx.s) * s[i]),
                idx.q,
            )
        })
        .collect();
    Ok(time_lr(&times, &per_time, r))
}

/// Least-squares fit of `log₂‖Δ_j f‖_{L^∞}` against `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// `α̂ = −slope`.
    pub alpha: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in `log₂` units.
    pub residual: f64,
    pub shells: Vec<i32>,
}

/// Fits `α̂` from `(j, ‖Δ_j f‖_{L^∞})` pairs; shells below `1e−13·max` are unusable.
pub fn holder_fit_from_norms(pairs: &[(i32, f64)]) -> Result<HolderFit> {
    let max = pairs.iter().fold(0.0f64, |m, (_, v)| m.max(*v));
    let usable: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(_, v)| *v > 1e-13 * max && *v > 0.0)
        .map(|(j, v)| (*j as f64, v.log2()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::DegenerateFit {
            usable: usable.len(),
        });
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (usable
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(HolderFit {
        alpha: -slope,
        intercept,
        residual,
        shells: pairs
            .iter()
            .filter(|(_, v)| *v > 1e-13 * max && *v > 0.0)
            .map(|(j, _)| *j)
            .collect(),
    })
}

/// Hölder-exponent estimate from `L^∞` shell norms on `range` (default `[1, j_max − 1]`).
pub fn holder_estimate(
    dyadic: &DyadicDecomposition,
    f: &SpectralField,
    range: Option<(i32, i32)>,
    oversample: usize,
) -> Result<HolderFit> {
    let (lo, hi) = range.unwrap_or((dyadic.j_min() + 1, dyadic.j_max() - 1));
    let pairs = (lo..=hi)
        .map(|j| {
            let g = dyadic.project_shell(f, j)?;
            Ok((j, lp_norm_spectral(&g, f64::INFINITY, oversample)?))
        })
        .collect::<Result<Vec<_>>>()?;
    holder_fit_from_norms(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{forward_transform, RealField};
    use crate::synthetic;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn dyadic(n: usize) -> DyadicDecomposition {
        DyadicDecomposition::new(Grid::new(2, n).unwrap())
    }

    fn cos4(grid: Grid) -> SpectralField {
        forward_transform(&RealField::from_fn(grid, |x| (4.0 * x[0]).cos()).unwrap())
    }

    #[test]
    fn profile_is_a_partition_with_compact_support() {
        let p = ShellProfile::default();
        let radii = log_spaced(1e-3, 1e3, 4001);
        assert!(p.partition_residual(&radii) <= 1e-12);
        assert_eq!(p.support_leak(&radii), 0.0);
        assert_eq!(p.psi(1.0), 1.0);
        assert_eq!(p.psi(0.5), 0.0);
        assert_eq!(p.psi(2.0), 0.0);
    }

    #[test]
    fn shell_range_follows_grid() {
        assert_eq!(dyadic(64).j_max(), 4);
        assert_eq!(dyadic(128).j_max(), 5);
        assert_eq!(dyadic(16).j_max(), 2);
    }

    #[test]
    fn single_mode_lives_in_one_shell() {
        let d = dyadic(64);
        let f = cos4(d.grid());
        for j in d.shells() {
            let g = d.project_shell(&f, j).unwrap();
            let off = if j == 2 { g.sub(&f).unwrap() } else { g };
            assert!(off.coefficient_l2() < 1e-15, "shell {j}");
        }
        assert!(d.project_shell(&f, 7).is_err());
        assert!(d.project_shell(&SpectralField::zeros(d.grid()), 1).unwrap().is_zero());
    }

    #[test]
    fn low_pass_limits() {
        let d = dyadic(64);
        let f = cos4(d.grid());
        assert!(d.low_pass(&f, 0).unwrap().is_zero());
        assert!(d.low_pass(&f, 4).unwrap().sub(&f).unwrap().coefficient_l2() < 1e-15);
        assert!(d.low_pass(&f, 6).is_err());
        let g = synthetic::random_band_limited(d.grid(), d.band_limit(), 5);
        let full = d.low_pass(&g, d.j_max() + 1).unwrap();
        assert!(full.sub(&g).unwrap().coefficient_l2() <= 1e-12 * g.coefficient_l2());
    }

    #[test]
    fn grid_partition_and_orthogonality() {
        let d = dyadic(64);
        assert!(d.partition_residual() <= 1e-12);
        let g = synthetic::random_band_limited(d.grid(), d.band_limit(), 8);
        assert!(d.orthogonality_defect(&g) <= 1e-12);
        let c = d.almost_orthogonality_constant(&g);
        assert!((1.0..=2.0).contains(&c), "C = {c}");
    }

    #[test]
    fn besov_norm_of_single_mode() {
        let d = dyadic(64);
        let f = cos4(d.grid());
        let idx = BesovIndex::new(1.0, f64::INFINITY, f64::INFINITY).unwrap();
        assert_relative_eq!(besov_norm(&d, &f, idx).unwrap(), 4.0, epsilon = 1e-12);
        assert_eq!(besov_norm(&d, &SpectralField::zeros(d.grid()), idx).unwrap(), 0.0);
        let mut shifted = f.clone();
        shifted.coeffs_mut()[0] = Complex64::new(0.5, 0.0);
        assert!(matches!(besov_norm(&d, &shifted, idx), Err(Error::NotMeanZero(_))));
    }

    #[test]
    fn besov_norm_of_single_shell_field_is_close_to_shell_value() {
        let d = dyadic(64);
        let j0 = 3;
        let f = synthetic::random_shell_field(&d, j0, 3, false).unwrap();
        let idx = BesovIndex::new(0.5, 2.0, 2.0).unwrap();
        let a = crate::field::lp_norm_spectral(&d.project_shell(&f, j0).unwrap(), 2.0, 1).unwrap();
        let norm = besov_norm(&d, &f, idx).unwrap();
        let expected = 2f64.powf(j0 as f64 * 0.5) * a;
        assert!((norm - expected).abs() <= 0.2 * expected);
    }

    #[test]
    fn holder_fit_recovers_lacunary_exponent() {
        let d = dyadic(64);
        let f = synthetic::lacunary_profile(d.grid(), 1.0 / 3.0, None).unwrap();
        let fit = holder_estimate(&d, &f, Some((0, d.j_max())), 1).unwrap();
        assert!((fit.alpha - 1.0 / 3.0).abs() <= 1e-6, "α̂ = {}", fit.alpha);
        assert!(matches!(
            holder_estimate(&d, &cos4(d.grid()), None, 1),
            Err(Error::DegenerateFit { .. })
        ));
    }

    #[test]
    fn heat_smoothing_increases_fitted_exponent() {
        let d = dyadic(64);
        let f = synthetic::holder_profile(d.grid(), 0.25, 17).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for t in [0.0, 0.002, 0.005, 0.01] {
            let g = crate::field::apply_multiplier(&f, |k| {
                let r2: f64 = k.iter().map(|x| x * x).sum();
                Complex64::new((-t * r2).exp(), 0.0)
            })
            .unwrap();
            let a = holder_estimate(&d, &g, None, 2).unwrap().alpha;
            assert!(a > prev, "α̂({t}) = {a} not above {prev}");
            prev = a;
        }
    }

    fn constant_trajectory(a: f64, j0: i32, times: &[f64]) -> Trajectory {
        let grid = Grid::new(2, 32).unwrap();
        let mut traj = Trajectory::new(grid, 0, 3);
        for (i, &t) in times.iter().enumerate() {
            let mut norms = vec![0.0; 4];
            norms[j0 as usize] = a;
            traj.push(Sample {
                t,
                step: i,
                mean: 0.0,
                l2: a,
                sup: a,
                records: vec![ShellRecord { p: 2.0, norms }],
                snapshot: None,
            })
            .unwrap();
        }
        traj
    }

    #[test]
    fn chemin_lerner_constant_integrand() {
        let traj = constant_trajectory(3.0, 2, &[0.0, 0.1, 0.25, 0.5]);
        let idx = BesovIndex::new(1.5, 2.0, 3.0).unwrap();
        let v = chemin_lerner_norm(&traj, 2.0, idx).unwrap();
        assert_relative_eq!(v, 0.5f64.sqrt() * 2f64.powf(3.0) * 3.0, max_relative = 1e-14);
        let zero = constant_trajectory(0.0, 2, &[0.0, 1.0]);
        assert_eq!(chemin_lerner_norm(&zero, 2.0, idx).unwrap(), 0.0);
        let wrong_p = BesovIndex::new(1.0, 4.0, 2.0).unwrap();
        assert!(matches!(
            chemin_lerner_norm(&traj, 2.0, wrong_p),
            Err(Error::MissingRecords(_))
        ));
    }

    #[test]
    fn chemin_lerner_equals_bochner_when_q_equals_r() {
        let grid = Grid::new(2, 32).unwrap();
        let mut traj = Trajectory::new(grid, 0, 3);
        for i in 0..7 {
            let t = 0.03 * i as f64 + 0.01 * (i as f64).sqrt();
            let norms = (0..4).map(|j| ((i + 1) as f64 * 0.7 + j as f64).sin().abs()).collect();
            traj.push(Sample {
                t,
                step: i,
                mean: 0.0,
                l2: 1.0,
                sup: 1.0,
                records: vec![ShellRecord { p: 2.0, norms }],
                snapshot: None,
            })
            .unwrap();
        }
        let idx = BesovIndex::new(1.0, 2.0, 2.0).unwrap();
        let a = chemin_lerner_norm(&traj, 2.0, idx).unwrap();
        let b = bochner_norm(&traj, 2.0, idx).unwrap();
        assert!((a - b).abs() <= 1e-10 * b);
    }

    #[test]
    fn trajectory_rejects_non_increasing_times() {
        let mut traj = constant_trajectory(1.0, 1, &[0.0, 0.1]);
        let s = traj.samples()[0].clone();
        assert!(traj.push(s).is_err());
    }

    #[test]
    fn csv_has_one_row_per_record() {
        let traj = constant_trajectory(1.0, 1, &[0.0, 0.1]);
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,j,p,norm\n"));
        assert_eq!(csv.lines().count(), 1 + 2 * 4);
        assert!(csv.contains("0.1,1,2,1\n"));
    }

    #[test]
    fn interpolation_inequality_holds_on_grid() {
        let d = dyadic(32);
        let f = synthetic::random_band_limited(d.grid(), 8.0, 2);
        for (p, q) in [(2.0, 2.5), (2.0, 6.0), (4.0, 5.0)] {
            let (lhs, rhs) = interpolation_sides(&f, p, q).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn bernstein_derivative_single_mode_is_exact_ratio() {
        let d = dyadic(64);
        let f = cos4(d.grid());
        let (lhs, rhs) = bernstein_derivative_sides(&d, &f, 2, 2.0, 1).unwrap();
        // ‖∇cos 4x₁‖ = 4‖cos 4x₁‖ against 2³‖cos 4x₁‖
        assert_relative_eq!(lhs / rhs, 0.5, epsilon = 1e-12);
    }
}
