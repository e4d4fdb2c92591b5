//! Bony decomposition of `Δ_j(u·∇θ)`, the `J₁, J₂, J₃` measurements and their envelopes.
//!
//! With `S_m = Σ_{k<m} Δ_k` the split is
//!
//! ```text
//! T1 = Σ_{|j−k|≤2} Δ_j∇·(S_{k−2}u Δ_kθ)          low u, high θ
//! T2 = Σ_{|j−k|≤2} Δ_j(Δ_ku·∇S_{k−2}θ)            high u, low θ
//! T3 = Σ_{k≥j−4} Σ_{|k−l|≤2} Δ_j∇·(Δ_ku Δ_lθ)     comparable frequencies
//! ```
//!
//! Every pair of shells `(k, l)` of `(u, θ)` falls in exactly one term (`l ≥ k+3`, `k ≥ l+3`
//! or `|k−l| ≤ 2`), and the restrictions on `k` drop only summands whose spectrum misses
//! the annulus of `Δ_j`. For divergence-free `u` the three terms therefore sum to
//! `Δ_j(ũ·∇θ̃)`, where `ũ, θ̃` are the shell-resolved parts. Products of shell-supported
//! factors have `|ξ| < N`, so the `3N/2` padded grid returns them without aliasing.

use num_complex::Complex64;
use serde::Serialize;

use crate::drift::{DriftLaw, VelocityOperator};
use crate::dyadic::{holder_norm, DyadicDecomposition};
use crate::error::{Error, Result};
use crate::exponent::{q_range, sign_chain, tail_exponent, Rational};
use crate::field::{
    from_padded_samples, lp_norm_spectral, padded_samples, partial, validate_exponent, Grid,
    SpectralField, VectorField,
};

/// The three interaction terms at shell `j`, with the reference `Δ_j(ũ·∇θ̃)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BonySplit {
    pub j: i32,
    pub t1: SpectralField,
    pub t2: SpectralField,
    pub t3: SpectralField,
    pub reference: SpectralField,
    pub edge: bool,
}

impl BonySplit {
    pub fn total(&self) -> SpectralField {
        let mut s = self.t1.clone();
        s.add_assign(&self.t2);
        s.add_assign(&self.t3);
        s
    }

    /// `‖T1 + T2 + T3 − Δ_j(ũ·∇θ̃)‖_{L²} / ‖Δ_j(ũ·∇θ̃)‖_{L²}` (absolute when the reference vanishes).
    pub fn reconstruction_error(&self) -> f64 {
        let diff = self.total().sub(&self.reference).map_or(f64::INFINITY, |d| d.l2_norm());
        let scale = self.reference.l2_norm();
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }
}

/// Padded-grid samples of every shell of `u` and `θ`.
struct ShellSamples {
    grid: Grid,
    m: usize,
    j_min: i32,
    j_max: i32,
    /// `[k][a]`: `Δ_k u_a`.
    u: Vec<Vec<Vec<f64>>>,
    /// `[l]`: `Δ_l θ`.
    theta: Vec<Vec<f64>>,
    /// `[l][a]`: `∂_a Δ_l θ`.
    grad: Vec<Vec<Vec<f64>>>,
}

impl ShellSamples {
    fn new(dyadic: &DyadicDecomposition, u: &VectorField, theta: &SpectralField) -> Result<Self> {
        let grid = dyadic.grid();
        grid.ensure_same(&u.grid())?;
        grid.ensure_same(&theta.grid())?;
        if u.components().len() != grid.dim() {
            return Err(Error::InvalidInput("velocity has the wrong number of components".into()));
        }
        let m = 3 * grid.n() / 2;
        let mut us = Vec::new();
        let mut ts = Vec::new();
        let mut gs = Vec::new();
        for k in dyadic.shells() {
            us.push(
                u.components()
                    .iter()
                    .map(|c| padded_samples(&dyadic.shell_or_zero(c, k), m))
                    .collect(),
            );
            let shell = dyadic.shell_or_zero(theta, k);
            gs.push((0..grid.dim()).map(|a| padded_samples(&partial(&shell, a), m)).collect());
            ts.push(padded_samples(&shell, m));
        }
        Ok(Self {
            grid,
            m,
            j_min: dyadic.j_min(),
            j_max: dyadic.j_max(),
            u: us,
            theta: ts,
            grad: gs,
        })
    }

    fn len(&self) -> usize {
        self.m.pow(self.grid.dim() as u32)
    }

    fn resolved(&self, k: i32) -> bool {
        k >= self.j_min && k <= self.j_max
    }

    fn idx(&self, k: i32) -> usize {
        (k - self.j_min) as usize
    }

    /// `S_m u_a` samples.
    fn low_u(&self, top: i32, a: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for k in self.j_min..top.min(self.j_max + 1) {
            for (o, v) in out.iter_mut().zip(&self.u[self.idx(k)][a]) {
                *o += v;
            }
        }
        out
    }

    /// `∂_a S_m θ` samples.
    fn low_grad(&self, top: i32, a: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for l in self.j_min..top.min(self.j_max + 1) {
            for (o, v) in out.iter_mut().zip(&self.grad[self.idx(l)][a]) {
                *o += v;
            }
        }
        out
    }

    fn spectral(&self, values: &[f64]) -> SpectralField {
        from_padded_samples(values, self.m, self.grid)
    }

    /// `Σ_a ∂_a F_a` from samples of the flux `F`.
    fn divergence(&self, flux: &[Vec<f64>]) -> SpectralField {
        let mut out = SpectralField::zeros(self.grid);
        for (a, f) in flux.iter().enumerate() {
            out.add_assign(&partial(&self.spectral(f), a));
        }
        out
    }

    /// Flux samples `S_{k−lag}u Δ_kθ`.
    fn low_high_flux(&self, k: i32, lag: i32) -> Vec<Vec<f64>> {
        let th = &self.theta[self.idx(k)];
        (0..self.grid.dim())
            .map(|a| self.low_u(k - lag, a).iter().zip(th).map(|(x, y)| x * y).collect())
            .collect()
    }

    /// Samples of `Δ_ku·∇S_{k−lag}θ`.
    fn high_low_product(&self, k: i32, lag: i32) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for a in 0..self.grid.dim() {
            let g = self.low_grad(k - lag, a);
            for ((o, x), y) in out.iter_mut().zip(&self.u[self.idx(k)][a]).zip(&g) {
                *o += x * y;
            }
        }
        out
    }

    /// Flux samples `Δ_ku Δ_lθ`.
    fn high_high_flux(&self, k: i32, l: i32) -> Vec<Vec<f64>> {
        let th = &self.theta[self.idx(l)];
        (0..self.grid.dim())
            .map(|a| self.u[self.idx(k)][a].iter().zip(th).map(|(x, y)| x * y).collect())
            .collect()
    }

    fn t1_shells(&self, j: i32) -> Vec<i32> {
        (j - 2..=j + 2).filter(|&k| self.resolved(k)).collect()
    }

    /// Pairs `k ≥ from`, `|k − l| ≤ 2`, both resolved.
    fn t3_pairs(&self, from: i32) -> Vec<(i32, i32)> {
        let mut out = Vec::new();
        for k in from.max(self.j_min)..=self.j_max {
            for l in (k - 2).max(self.j_min)..=(k + 2).min(self.j_max) {
                out.push((k, l));
            }
        }
        out
    }
}

fn add_into(acc: &mut [Vec<f64>], flux: &[Vec<f64>]) {
    for (a, f) in acc.iter_mut().zip(flux) {
        for (x, y) in a.iter_mut().zip(f) {
            *x += y;
        }
    }
}

/// Splits `Δ_j(u·∇θ)` into its low-high, high-low and high-high parts.
pub fn bony_split(
    dyadic: &DyadicDecomposition,
    u: &VectorField,
    theta: &SpectralField,
    j: i32,
) -> Result<BonySplit> {
    dyadic.weights(j)?;
    let s = ShellSamples::new(dyadic, u, theta)?;
    let dim = s.grid.dim();
    let zero = || vec![vec![0.0; s.len()]; dim];

    let mut f1 = zero();
    let mut g2 = vec![0.0; s.len()];
    for k in s.t1_shells(j) {
        add_into(&mut f1, &s.low_high_flux(k, 2));
        for (x, y) in g2.iter_mut().zip(s.high_low_product(k, 2)) {
            *x += y;
        }
    }
    let mut f3 = zero();
    for (k, l) in s.t3_pairs(j - 4) {
        add_into(&mut f3, &s.high_high_flux(k, l));
    }
    let top = s.j_max + 1;
    let mut full = vec![0.0; s.len()];
    for a in 0..dim {
        let ua = s.low_u(top, a);
        for ((o, x), y) in full.iter_mut().zip(&ua).zip(s.low_grad(top, a)) {
            *o += x * y;
        }
    }
    let project = |f: SpectralField| dyadic.shell_or_zero(&f, j);
    Ok(BonySplit {
        j,
        t1: project(s.divergence(&f1)),
        t2: project(s.spectral(&g2)),
        t3: project(s.divergence(&f3)),
        reference: project(s.spectral(&full)),
        edge: dyadic.is_edge(j),
    })
}

/// `Δ_j(ũ·∇θ̃)` by direct summation over all pairs of Fourier modes, `ũ, θ̃` the
/// shell-resolved parts. Cost is quadratic in the number of modes.
pub fn transport_by_convolution(
    dyadic: &DyadicDecomposition,
    u: &VectorField,
    theta: &SpectralField,
    j: i32,
) -> Result<SpectralField> {
    let grid = dyadic.grid();
    grid.ensure_same(&u.grid())?;
    grid.ensure_same(&theta.grid())?;
    let w = dyadic.weights(j)?;
    let ut: Vec<SpectralField> = u.components().iter().map(|c| dyadic.reconstruct(c)).collect();
    let tt = dyadic.reconstruct(theta);
    let nonzero = |f: &SpectralField| -> Vec<usize> {
        f.coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, _)| i)
            .collect()
    };
    let t_modes = nonzero(&tt);
    let dim = grid.dim();
    let half = (grid.n() / 2) as i64;
    let mut out = vec![Complex64::default(); grid.len()];
    for (a, ua) in ut.iter().enumerate() {
        for ia in nonzero(ua) {
            let eta = grid.wavevector(ia);
            for &ib in &t_modes {
                let zeta = grid.wavevector(ib);
                let xi: Vec<i64> = (0..dim).map(|d| eta[d] + zeta[d]).collect();
                if xi.iter().any(|x| x.abs() >= half) {
                    continue;
                }
                let target = grid.index_of(&xi);
                if w[target] == 0.0 {
                    continue;
                }
                out[target] += ua.coeffs()[ia] * Complex64::new(0.0, zeta[a] as f64) * tt.coeffs()[ib];
            }
        }
    }
    for (o, wt) in out.iter_mut().zip(w) {
        *o *= *wt;
    }
    SpectralField::new(grid, out)
}

/// Largest `L²` norm of a summand that the index restrictions exclude (`|k−j| ≥ 3` in T1,
/// T2; `k < j−4` in T3), relative to `‖Δ_j(ũ·∇θ̃)‖_{L²}` when that is nonzero.
pub fn excluded_summand_mass(
    dyadic: &DyadicDecomposition,
    u: &VectorField,
    theta: &SpectralField,
    j: i32,
) -> Result<f64> {
    let split = bony_split(dyadic, u, theta, j)?;
    let s = ShellSamples::new(dyadic, u, theta)?;
    let mut worst = 0.0f64;
    for k in dyadic.shells() {
        if (k - j).abs() >= 3 {
            let t1 = dyadic.shell_or_zero(&s.divergence(&s.low_high_flux(k, 2)), j);
            let t2 = dyadic.shell_or_zero(&s.spectral(&s.high_low_product(k, 2)), j);
            worst = worst.max(t1.l2_norm()).max(t2.l2_norm());
        }
        if k < j - 4 {
            for l in (k - 2).max(s.j_min)..=(k + 2).min(s.j_max) {
                let t3 = dyadic.shell_or_zero(&s.divergence(&s.high_high_flux(k, l)), j);
                worst = worst.max(t3.l2_norm());
            }
        }
    }
    let scale = split.reference.l2_norm();
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Measured `(J₁, J₂, J₃)`: sums of `L^q` norms of the individual summands
///
/// ```text
/// J₁ = Σ_{|j−k|≤2} ‖Δ_j∇·(S_{k−1}u Δ_kθ)‖_q,   J₂ = Σ_{|j−k|≤2} ‖Δ_j(Δ_ku·∇S_{k−1}θ)‖_q,
/// J₃ = Σ_{k≥j−1} Σ_{|k−l|≤2} ‖Δ_j∇·(Δ_ku Δ_lθ)‖_q,
/// ```
///
/// over resolved shells. These ranges overlap and are not an exact split of `Δ_j(u·∇θ)`
/// (see [`bony_split`] for that). `L^∞` norms use a twice-refined grid.
pub fn j_terms(
    dyadic: &DyadicDecomposition,
    u: &VectorField,
    theta: &SpectralField,
    j: i32,
    q: f64,
) -> Result<[f64; 3]> {
    validate_exponent(q)?;
    dyadic.weights(j)?;
    let s = ShellSamples::new(dyadic, u, theta)?;
    let norm = |f: SpectralField| lp_norm_spectral(&dyadic.shell_or_zero(&f, j), q, 2);
    let mut out = [0.0; 3];
    for k in s.t1_shells(j) {
        out[0] += norm(s.divergence(&s.low_high_flux(k, 1)))?;
        out[1] += norm(s.spectral(&s.high_low_product(k, 1)))?;
    }
    for (k, l) in s.t3_pairs(j - 1) {
        out[2] += norm(s.divergence(&s.high_high_flux(k, l)))?;
    }
    Ok(out)
}

/// Measured `J_i`, the envelopes with unit constant, and their ratios at one shell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JCertificate {
    pub j: i32,
    pub q: Rational,
    pub p: Rational,
    pub alpha: Rational,
    #[serde(rename = "J")]
    pub measured: [f64; 3],
    #[serde(rename = "RHS")]
    pub rhs: [f64; 3],
    pub ratios: [f64; 3],
    /// `‖θ‖_{C^α}` used in the envelopes.
    pub holder: f64,
    #[serde(rename = "edge_flag")]
    pub edge: bool,
}

/// Exponents `(α, p, q)` of a certificate; `q ∈ (p, m_α p)` is enforced for `α < 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateIndex {
    pub alpha: Rational,
    pub p: Rational,
    pub q: Rational,
}

impl CertificateIndex {
    pub fn new(alpha: Rational, p: Rational, q: Rational) -> Result<Self> {
        let half = Rational::new(1, 2);
        if !(alpha.is_positive() && alpha < Rational::one()) {
            return Err(Error::Domain(format!("α = {alpha} is not in (0, 1)")));
        }
        if alpha < half {
            q_range(&alpha, &p)?.require(&q)?;
        } else if !(q > p) {
            return Err(Error::Precondition(format!("q = {q} must exceed p = {p}")));
        }
        Ok(Self { alpha, p, q })
    }
}

/// Envelopes with `C = 1`:
///
/// ```text
/// RHS₁ = H^{2−r} 2^{j(1−α)} Σ_{l≤j} 2^{l(1−r−α(1−r))} a_l
/// RHS₂ = H^{2−r} 2^{j(2−α−r−α(1−r))} Σ_{|j−k|≤2} a_k
/// RHS₃ = H^{2−r} 2^j Σ_{k≥j−1} 2^{k(1−α−r−α(1−r))} a_k
/// ```
///
/// with `r = p/q`, `H = ‖θ‖_{C^α}` and `a_k = (2^k‖Δ_kθ‖_p)^r`, sums over resolved shells.
pub fn j_envelopes(
    dyadic: &DyadicDecomposition,
    theta: &SpectralField,
    j: i32,
    index: &CertificateIndex,
    holder: f64,
) -> Result<[f64; 3]> {
    let chain = sign_chain(&index.alpha, &index.p, &index.q);
    let (alpha, p, r) = (
        index.alpha.to_f64(),
        index.p.to_f64(),
        (&index.p / &index.q).to_f64(),
    );
    let e_low = chain.low_sum.to_f64();
    let e_high = chain.high_sum.to_f64();
    let e_mid = chain.high_sum.to_f64() + 1.0;
    let norms = dyadic.shell_norms(theta, p, 2)?;
    let a = |k: i32| (2f64.powi(k) * norms[(k - dyadic.j_min()) as usize]).powf(r);
    let h = holder.powf(2.0 - r);
    let jf = j as f64;
    let mut out = [0.0; 3];
    for k in dyadic.shells() {
        let kf = k as f64;
        if k <= j {
            out[0] += 2f64.powf(kf * e_low) * a(k);
        }
        if (k - j).abs() <= 2 {
            out[1] += a(k);
        }
        if k >= j - 1 {
            out[2] += 2f64.powf(kf * e_high) * a(k);
        }
    }
    out[0] *= h * 2f64.powf(jf * (1.0 - alpha));
    out[1] *= h * 2f64.powf(jf * e_mid);
    out[2] *= h * 2f64.powf(jf);
    Ok(out)
}

/// Certificate for shell `j` with `u = law[θ]`. `holder` overrides the measured `‖θ‖_{C^α}`.
pub fn j_bound_certificate(
    dyadic: &DyadicDecomposition,
    theta: &SpectralField,
    law: &DriftLaw,
    j: i32,
    index: &CertificateIndex,
    holder: Option<f64>,
) -> Result<JCertificate> {
    let u = VelocityOperator::new(dyadic.grid(), law, true)?.apply(theta)?;
    let holder = match holder {
        Some(h) => h,
        None => holder_norm(dyadic, theta, index.alpha.to_f64(), 2)?,
    };
    let measured = j_terms(dyadic, &u, theta, j, index.q.to_f64())?;
    let rhs = j_envelopes(dyadic, theta, j, index, holder)?;
    let mut ratios = [0.0; 3];
    for i in 0..3 {
        ratios[i] = if measured[i] == 0.0 {
            0.0
        } else if rhs[i] > 0.0 {
            measured[i] / rhs[i]
        } else {
            f64::INFINITY
        };
    }
    Ok(JCertificate {
        j,
        q: index.q.clone(),
        p: index.p.clone(),
        alpha: index.alpha.clone(),
        measured,
        rhs,
        ratios,
        holder,
        edge: dyadic.is_edge(j),
    })
}

/// Certificates over the interior shells with the spread of each ratio family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateSuite {
    pub certificates: Vec<JCertificate>,
    /// Smallest constant bounding each family: `max_j ratio_i(j)`.
    pub constants: [f64; 3],
    /// `max/min` of the nonzero ratios of each family.
    pub spreads: [f64; 3],
    pub spread_limit: f64,
    pub pass: bool,
}

impl CertificateSuite {
    pub fn worst_spread(&self) -> f64 {
        self.spreads.iter().fold(0.0, |a, b| a.max(*b))
    }
}

pub fn certificate_suite(
    dyadic: &DyadicDecomposition,
    theta: &SpectralField,
    law: &DriftLaw,
    index: &CertificateIndex,
    holder: Option<f64>,
    spread_limit: f64,
) -> Result<CertificateSuite> {
    let certificates = dyadic
        .interior()
        .map(|j| j_bound_certificate(dyadic, theta, law, j, index, holder))
        .collect::<Result<Vec<_>>>()?;
    let mut constants = [0.0; 3];
    let mut spreads = [1.0; 3];
    let mut finite = true;
    for i in 0..3 {
        let vals: Vec<f64> = certificates.iter().map(|c| c.ratios[i]).collect();
        finite &= vals.iter().all(|v| v.is_finite());
        constants[i] = vals.iter().fold(0.0f64, |a, b| a.max(*b));
        let positive: Vec<f64> = vals.iter().copied().filter(|v| *v > 0.0).collect();
        if !positive.is_empty() {
            let lo = positive.iter().fold(f64::INFINITY, |a, b| a.min(*b));
            let hi = positive.iter().fold(0.0f64, |a, b| a.max(*b));
            spreads[i] = hi / lo;
        }
    }
    let pass = finite && spreads.iter().all(|s| *s <= spread_limit);
    Ok(CertificateSuite {
        certificates,
        constants,
        spreads,
        spread_limit,
        pass,
    })
}

/// Finite truncations of the two geometric sums behind the `J₁` and `J₃` envelopes,
/// `(Σ_{l=j₀}^{j} 2^{s l e₁})^{1/s}` and `(Σ_{k=j−1}^{j₁} 2^{s k e₃})^{1/s}`, compared with
/// `2^{j e}` times the explicit series constants `(1 − 2^{−s e₁})^{−1/s}` and
/// `2^{|e₃|}(1 − 2^{−s|e₃|})^{−1/s}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometricSumCheck {
    pub s: f64,
    pub low_exponent: f64,
    pub high_exponent: f64,
    pub low_constant: f64,
    pub high_constant: f64,
    /// `max_j` of truncated sum over `2^{j e}`.
    pub low_ratio: f64,
    pub high_ratio: f64,
    /// Whether both ratios stay below 8.
    pub within_eight: bool,
    pub pass: bool,
}

pub fn geometric_sum_check(index: &CertificateIndex, s: f64, shells: (i32, i32)) -> Result<GeometricSumCheck> {
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("summability index {s} must be in [1, ∞)")));
    }
    let chain = sign_chain(&index.alpha, &index.p, &index.q);
    let (e1, e3) = (chain.low_sum.to_f64(), chain.high_sum.to_f64());
    if !(e1 > 0.0 && e3 < 0.0) {
        return Err(Error::Precondition(format!(
            "sum exponents must satisfy e₁ > 0 > e₃, got e₁ = {e1}, e₃ = {e3}"
        )));
    }
    let (j0, j1) = shells;
    let mut low_ratio = 0.0f64;
    let mut high_ratio = 0.0f64;
    for j in j0..=j1 {
        let low: f64 = (j0..=j).map(|l| 2f64.powf(s * l as f64 * e1)).sum();
        low_ratio = low_ratio.max(low.powf(1.0 / s) / 2f64.powf(j as f64 * e1));
        let high: f64 = (j - 1..=j1).map(|k| 2f64.powf(s * k as f64 * e3)).sum();
        high_ratio = high_ratio.max(high.powf(1.0 / s) / 2f64.powf(j as f64 * e3));
    }
    let low_constant = (1.0 - 2f64.powf(-s * e1)).powf(-1.0 / s);
    let high_constant = 2f64.powf(-e3) * (1.0 - 2f64.powf(s * e3)).powf(-1.0 / s);
    Ok(GeometricSumCheck {
        s,
        low_exponent: e1,
        high_exponent: e3,
        low_constant,
        high_constant,
        low_ratio,
        high_ratio,
        within_eight: low_ratio <= 8.0 && high_ratio <= 8.0,
        pass: low_ratio <= low_constant * (1.0 + 1e-12) && high_ratio <= high_constant * (1.0 + 1e-12),
    })
}

/// Partial sums `Σ_{k=j−1}^{K} 2^{k(1−α−α_p)}`, `α_p = (1 − 2/p)α`, for growing `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub alpha: Rational,
    pub p: Rational,
    pub exponent: Rational,
    pub partial_sums: Vec<f64>,
    /// Increments never decrease, so the sums grow without bound.
    pub diverges: bool,
    /// Increments decay geometrically and the remaining tail is below `1e−6` of the sum.
    pub converges: bool,
}

pub fn obstruction_partial_sums(alpha: &Rational, p: &Rational, j: i32, terms: usize) -> Result<ObstructionReport> {
    if terms < 2 {
        return Err(Error::InvalidInput("need at least two partial sums".into()));
    }
    let exponent = tail_exponent(alpha, p);
    let e = exponent.to_f64();
    let increments: Vec<f64> = (0..terms).map(|i| 2f64.powf((j - 1 + i as i32) as f64 * e)).collect();
    let partial_sums: Vec<f64> = increments
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let diverges = increments.windows(2).all(|w| w[1] >= w[0]);
    let ratio = increments[1] / increments[0];
    let last = *increments.last().unwrap();
    let total = *partial_sums.last().unwrap();
    let converges = ratio < 1.0 && ratio * last / (1.0 - ratio) < 1e-6 * total;
    Ok(ObstructionReport {
        alpha: alpha.clone(),
        p: p.clone(),
        exponent,
        partial_sums,
        diverges,
        converges,
    })
}

/// Measured partial sums `Σ_{k=j−1}^{K} 2^{k(1−α)}‖Δ_kθ‖_{L^∞}`, `K` running over the
/// resolved shells. On a profile with `‖Δ_kθ‖_{L^∞} = 2^{−kα_p}` the terms are `2^{k(1−α−α_p)}`.
pub fn profile_tail_sums(
    dyadic: &DyadicDecomposition,
    theta: &SpectralField,
    alpha: f64,
    j: i32,
    oversample: usize,
) -> Result<Vec<f64>> {
    let norms = dyadic.shell_norms(theta, f64::INFINITY, oversample)?;
    let mut acc = 0.0;
    Ok(((j - 1).max(dyadic.j_min())..=dyadic.j_max())
        .map(|k| {
            acc += 2f64.powf(k as f64 * (1.0 - alpha)) * norms[(k - dyadic.j_min()) as usize];
            acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::velocity_from_theta;
    use crate::synthetic;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn setup(n: usize) -> (Grid, DyadicDecomposition) {
        let grid = Grid::new(2, n).unwrap();
        (grid, DyadicDecomposition::new(grid))
    }

    #[test]
    fn zero_theta_gives_zero_terms() {
        let (grid, d) = setup(16);
        let theta = SpectralField::zeros(grid);
        let u = velocity_from_theta(&theta, &DriftLaw::Sqg).unwrap();
        let s = bony_split(&d, &u, &theta, 1).unwrap();
        assert!(s.t1.is_zero() && s.t2.is_zero() && s.t3.is_zero());
        assert_eq!(j_terms(&d, &u, &theta, 1, 2.0).unwrap(), [0.0; 3]);
    }

    #[test]
    fn split_matches_direct_convolution() {
        let (grid, d) = setup(32);
        let theta = synthetic::random_band_limited(grid, 12.0, 4);
        let u = velocity_from_theta(&theta, &DriftLaw::Sqg).unwrap();
        for j in d.interior() {
            let s = bony_split(&d, &u, &theta, j).unwrap();
            let direct = transport_by_convolution(&d, &u, &theta, j).unwrap();
            let scale = direct.l2_norm();
            assert!(s.reference.sub(&direct).unwrap().l2_norm() <= 1e-12 * scale);
            assert!(s.reconstruction_error() <= 1e-12, "j={j}");
        }
    }

    #[test]
    fn same_high_shell_feeds_only_the_high_high_term() {
        let (_, d) = setup(64);
        let theta = synthetic::random_shell_field(&d, 4, 1, false).unwrap();
        let u = velocity_from_theta(&theta, &DriftLaw::Sqg).unwrap();
        let s = bony_split(&d, &u, &theta, 1).unwrap();
        assert!(s.t1.is_zero() && s.t2.is_zero());
        assert!(!s.t3.is_zero());
        let jt = j_terms(&d, &u, &theta, 1, 2.0).unwrap();
        assert_eq!(&jt[..2], &[0.0, 0.0]);
        assert!(jt[2] > 0.0);
    }

    #[test]
    fn j_sum_dominates_transport_norm() {
        let (grid, d) = setup(32);
        let theta = synthetic::random_band_limited(grid, 10.0, 9);
        let u = velocity_from_theta(&theta, &DriftLaw::Sqg).unwrap();
        for j in d.interior() {
            let jt = j_terms(&d, &u, &theta, j, 2.5).unwrap();
            let s = bony_split(&d, &u, &theta, j).unwrap();
            let lhs = lp_norm_spectral(&s.reference, 2.5, 1).unwrap();
            assert!(jt.iter().sum::<f64>() >= lhs * (1.0 - 1e-12));
        }
    }

    #[test]
    fn excluded_summands_vanish() {
        let (grid, d) = setup(64);
        let theta = synthetic::random_band_limited(grid, 20.0, 5);
        let u = velocity_from_theta(&theta, &DriftLaw::Sqg).unwrap();
        for j in d.shells() {
            assert!(excluded_summand_mass(&d, &u, &theta, j).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn certificate_rejects_q_outside_range() {
        let err = CertificateIndex::new(r("1/4"), r("2"), r("4")).unwrap_err();
        assert!(err.to_string().contains("−α < 1−α−p/q−α(1−p/q) < 0"));
        assert!(CertificateIndex::new(r("1/4"), r("2"), r("2")).is_err());
        assert!(CertificateIndex::new(r("1/4"), r("2"), r("5/2")).is_ok());
    }

    #[test]
    fn zero_theta_certificate_ratios_are_zero() {
        let (grid, d) = setup(16);
        let idx = CertificateIndex::new(r("1/4"), r("2"), r("5/2")).unwrap();
        let c = j_bound_certificate(&d, &SpectralField::zeros(grid), &DriftLaw::Sqg, 1, &idx, None).unwrap();
        assert_eq!(c.ratios, [0.0; 3]);
    }

    #[test]
    fn geometric_constants_bound_the_truncations() {
        let idx = CertificateIndex::new(r("1/4"), r("2"), r("5/2")).unwrap();
        for s in [1.0, 5.0 / 3.0] {
            let c = geometric_sum_check(&idx, s, (0, 30)).unwrap();
            assert!(c.pass);
        }
        let c = geometric_sum_check(&idx, 1.0, (0, 30)).unwrap();
        assert!(!c.within_eight);
    }

    #[test]
    fn obstruction_signs() {
        let low = obstruction_partial_sums(&r("1/4"), &r("64"), 1, 60).unwrap();
        assert_eq!(low.exponent, r("65/128"));
        assert!(low.diverges && !low.converges);
        let high = obstruction_partial_sums(&r("3/4"), &r("14"), 1, 80).unwrap();
        assert_eq!(high.exponent, r("-11/28"));
        assert!(high.converges && !high.diverges);
    }
}
