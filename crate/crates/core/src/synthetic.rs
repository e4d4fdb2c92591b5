//! Named, seeded initial data and test fields. All outputs are mean-zero and Hermitian.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::DyadicDecomposition;
use crate::error::{Error, Result};
use crate::field::{forward_transform, lp_norm_spectral, Grid, RealField, SpectralField};

/// Fills each Hermitian pair `(ξ, −ξ)` with `gen(ξ)` and its conjugate; `gen` is called once
/// per pair in increasing flat-index order and `None` leaves the pair at zero.
fn hermitian_fill(
    grid: Grid,
    mut gen: impl FnMut(&[i64]) -> Option<Complex64>,
) -> SpectralField {
    let mut out = SpectralField::zeros(grid);
    let coeffs = out.coeffs_mut();
    for i in 1..grid.len() {
        let p = grid.partner(i);
        if p < i || grid.on_nyquist_plane(i) {
            continue;
        }
        let k = grid.wavevector(i);
        if let Some(c) = gen(&k[..grid.dim()]) {
            if p == i {
                coeffs[i] = Complex64::new(c.re, 0.0);
            } else {
                coeffs[i] = c;
                coeffs[p] = c.conj();
            }
        }
    }
    out
}

fn radius(k: &[i64]) -> f64 {
    (k.iter().map(|x| x * x).sum::<i64>() as f64).sqrt()
}

/// `amplitude · cos(k·x)`.
pub fn single_mode(grid: Grid, k: &[i64], amplitude: f64) -> Result<SpectralField> {
    if k.len() != grid.dim() || k.iter().all(|&x| x == 0) {
        return Err(Error::InvalidInput(format!("bad single-mode wavevector {k:?}")));
    }
    let half = (grid.n() / 2) as i64;
    if k.iter().any(|x| x.abs() >= half) {
        return Err(Error::InvalidInput(format!("wavevector {k:?} is not resolved")));
    }
    let mut out = SpectralField::zeros(grid);
    let a = grid.index_of(k);
    let neg: Vec<i64> = k.iter().map(|x| -x).collect();
    let b = grid.index_of(&neg);
    out.coeffs_mut()[a] += Complex64::new(amplitude / 2.0, 0.0);
    out.coeffs_mut()[b] += Complex64::new(amplitude / 2.0, 0.0);
    Ok(out)
}

/// Periodised Gaussian `exp(−|x − π|²/(2w²))` with its mean removed.
pub fn gaussian_bump(grid: Grid, width: f64) -> Result<SpectralField> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidInput(format!("gaussian width {width} must be positive")));
    }
    let f = RealField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|c| (c - PI).powi(2)).sum();
        (-r2 / (2.0 * width * width)).exp()
    })?;
    let mut s = forward_transform(&f);
    s.coeffs_mut()[0] = Complex64::default();
    Ok(s)
}

/// Random coefficients (uniform real and imaginary parts in `[−1, 1]`) on `0 < |ξ| ≤ radius`.
pub fn random_band_limited(grid: Grid, radius_max: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    hermitian_fill(grid, |k| {
        let re = rng.random_range(-1.0..1.0);
        let im = rng.random_range(-1.0..1.0);
        (radius(k) <= radius_max).then(|| Complex64::new(re, im))
    })
}

/// Random field with spectrum in the annulus of shell `j`, shaped by `ψ(|ξ|/2^j)`.
///
/// `coherent` uses positive real amplitudes (all modes peak together at the origin), which
/// is the extremal case for `L^p → L^q` Bernstein ratios; otherwise phases are random.
pub fn random_shell_field(
    dyadic: &DyadicDecomposition,
    j: i32,
    seed: u64,
    coherent: bool,
) -> Result<SpectralField> {
    let grid = dyadic.grid();
    let w = dyadic.weights(j)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((j as u64) << 32));
    let out = hermitian_fill(grid, |k| {
        let amp = rng.random_range(0.5..1.0);
        let phase = rng.random_range(0.0..2.0 * PI);
        let weight = w[grid.index_of(k)];
        (weight > 0.0).then(|| {
            if coherent {
                Complex64::new(amp * weight, 0.0)
            } else {
                Complex64::from_polar(amp * weight, phase)
            }
        })
    });
    if out.is_zero() {
        return Err(Error::EmptyShell(j));
    }
    Ok(out)
}

/// Rough data with prescribed Hölder scaling: `‖Δ_j f‖_{L^∞} = 2^{−jα}` on every shell.
///
/// The field is `Σ_j a_j B_j`, where `B_j` has unit-modulus random phases on the band
/// `2^{j−1/2} ≤ |ξ| < 2^{j+1/2}` (2/3-truncated), and the weights `a_j` are rescaled by
/// fixed-point iteration until each shell sup, measured on a twice-refined grid, is on target
/// to `1e−12`.
pub fn holder_profile(grid: Grid, alpha: f64, seed: u64) -> Result<SpectralField> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidInput(format!("Hölder exponent {alpha} must be positive")));
    }
    let dyadic = DyadicDecomposition::new(grid);
    let cutoff = grid.dealias_cutoff();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bands: Vec<SpectralField> = dyadic
        .shells()
        .map(|j| {
            let (lo, hi) = (2f64.powf(j as f64 - 0.5), 2f64.powf(j as f64 + 0.5));
            hermitian_fill(grid, |k| {
                let phase = rng.random_range(0.0..2.0 * PI);
                let r = radius(k);
                (r >= lo && r < hi && k.iter().all(|x| x.abs() <= cutoff))
                    .then(|| Complex64::from_polar(1.0, phase))
            })
        })
        .collect();
    let target: Vec<f64> = dyadic.shells().map(|j| 2f64.powf(-(j as f64) * alpha)).collect();
    let mut weights: Vec<f64> = bands
        .iter()
        .zip(&target)
        .map(|(b, t)| {
            let sup = lp_norm_spectral(b, f64::INFINITY, 2)?;
            Ok(if sup > 0.0 { t / sup } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    let assemble = |w: &[f64]| {
        let mut total = SpectralField::zeros(grid);
        for (b, a) in bands.iter().zip(w) {
            total.add_assign(&b.scale(*a));
        }
        total
    };
    for _ in 0..500 {
        let norms = dyadic.shell_norms(&assemble(&weights), f64::INFINITY, 2)?;
        let mut worst = 0.0f64;
        for ((w, n), t) in weights.iter_mut().zip(&norms).zip(&target) {
            if *n > 0.0 && *w > 0.0 {
                worst = worst.max((n / t - 1.0).abs());
                *w *= t / n;
            }
        }
        if worst <= 1e-12 {
            break;
        }
    }
    Ok(assemble(&weights))
}

/// Lacunary series `Σ_j 2^{−jα} cos(2^j x₁ + φ_j)` over the resolved shells. Each term sits
/// exactly where `ψ(|ξ|/2^j) = 1`, so `‖Δ_j f‖_{L^∞} = 2^{−jα}` on grids that resolve the
/// extremum. Phases are zero unless a seed is given.
pub fn lacunary_profile(grid: Grid, alpha: f64, seed: Option<u64>) -> Result<SpectralField> {
    let j_max = (grid.n() / 2).trailing_zeros() as i32 - 1;
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut out = SpectralField::zeros(grid);
    for j in 0..=j_max {
        let mut k = vec![0i64; grid.dim()];
        k[0] = 1 << j;
        let phase = rng
            .as_mut()
            .map_or(0.0, |r| r.random_range(0.0..2.0 * PI));
        let c = Complex64::from_polar(2f64.powf(-(j as f64) * alpha) / 2.0, phase);
        let a = grid.index_of(&k);
        k[0] = -k[0];
        let b = grid.index_of(&k);
        out.coeffs_mut()[a] = c;
        out.coeffs_mut()[b] = c.conj();
    }
    Ok(out)
}
