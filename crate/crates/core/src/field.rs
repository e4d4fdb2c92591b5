//! Periodic fields on `[0, 2π)^d` and their Fourier representation.
//!
//! Spectral coefficients are normalised so that the coefficient at `ξ = 0` is the mean of
//! the field, i.e. `f(x) = Σ_ξ f̂(ξ) e^{iξ·x}`. Tables are row-major with axis 0 (`x₁`)
//! slowest; the table index `i` on each axis carries the signed wavenumber `i` for
//! `i < N/2` and `i − N` otherwise, so the Nyquist plane sits at `−N/2`.
//!
//! `L^p` norms use the unnormalised Lebesgue measure on the torus, so
//! `‖f‖_{L²} = (2π)^{d/2} (Σ_ξ |f̂(ξ)|²)^{1/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

/// Uniform periodic grid with `n` points per axis on `[0, 2π)^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    dim: usize,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Grid(format!("dimension {dim} not in {{2, 3}}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "points per axis {n} must be a power of two ≥ 16"
            )));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of samples, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> f64 {
        2.0 * PI
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Volume of one quadrature cell, `(2π/N)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Volume of the torus, `(2π)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Largest per-component wavenumber kept by the 2/3 dealiasing rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Per-axis table indices of a flat index.
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        multi_index(flat, self.n, self.dim)
    }

    /// Physical coordinates of sample `flat`.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h]
    }

    /// Signed wavevector of coefficient `flat`; unused trailing components are zero.
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let idx = self.multi_index(flat);
        let mut k = [0i64; 3];
        for a in 0..self.dim {
            k[a] = fft::signed_index(idx[a], self.n);
        }
        k
    }

    pub fn wavevector_f64(&self, flat: usize) -> [f64; 3] {
        let k = self.wavevector(flat);
        [k[0] as f64, k[1] as f64, k[2] as f64]
    }

    /// `|ξ|` of coefficient `flat`.
    pub fn wavenumber(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt()
    }

    /// Flat index of a signed wavevector (components taken modulo `N`).
    pub fn index_of(&self, k: &[i64]) -> usize {
        let mut flat = 0;
        for a in 0..self.dim {
            flat = flat * self.n + fft::wrap_index(k[a], self.n);
        }
        flat
    }

    /// Flat index of the Hermitian partner (the table entry of `−ξ`).
    pub fn partner(&self, flat: usize) -> usize {
        let idx = self.multi_index(flat);
        let mut out = 0;
        for a in 0..self.dim {
            out = out * self.n + (self.n - idx[a]) % self.n;
        }
        out
    }

    /// True when some component of the wavevector sits on the Nyquist plane.
    pub fn on_nyquist_plane(&self, flat: usize) -> bool {
        let idx = self.multi_index(flat);
        (0..self.dim).any(|a| idx[a] == self.n / 2)
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "(d={}, N={}) vs (d={}, N={})",
                self.dim, self.n, other.dim, other.n
            )));
        }
        Ok(())
    }
}

pub(crate) fn multi_index(flat: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut idx = [0usize; 3];
    let mut rest = flat;
    for a in (0..dim).rev() {
        idx[a] = rest % n;
        rest /= n;
    }
    idx
}

/// Physical-space samples of a real periodic scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    /// Wraps `values` (row-major, length `N^d`); rejects non-finite samples.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite sample {} at index {pos}",
                values[pos]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f` at every grid point (coordinates padded with zeros beyond `dim`).
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.point(i);
                f(&x[..grid.dim()])
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Same field with its mean subtracted; returns the removed mean as well.
    pub fn without_mean(&self) -> (Self, f64) {
        let mean = self.mean();
        let values = self.values.iter().map(|v| v - mean).collect();
        (
            Self {
                grid: self.grid,
                values,
            },
            mean,
        )
    }
}

/// Fourier coefficients of a real periodic scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    /// Builds a field from a coefficient function of the signed wavevector.
    pub fn from_fn(grid: Grid, f: impl Fn(&[i64]) -> Complex64) -> Self {
        let coeffs = (0..grid.len())
            .map(|i| {
                let k = grid.wavevector(i);
                f(&k[..grid.dim()])
            })
            .collect();
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at a signed wavevector.
    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    /// The field mean, `Re f̂(0)`.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// `|f̂(0)|`, compared against `tol · max(1, ℓ²)` by [`Self::is_mean_zero`].
    pub fn is_mean_zero(&self, tol: f64) -> bool {
        self.coeffs[0].norm() <= tol * self.coefficient_l2().max(1.0)
    }

    pub(crate) fn ensure_mean_zero(&self) -> Result<()> {
        if self.is_mean_zero(1e-12) {
            Ok(())
        } else {
            Err(Error::NotMeanZero(self.coeffs[0].norm()))
        }
    }

    /// `(Σ|f̂(ξ)|²)^{1/2}`.
    pub fn coefficient_l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖f‖_{L²}` through Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.grid.volume().sqrt() * self.coefficient_l2()
    }

    /// Homogeneous Sobolev norm `‖f‖_{Ḣ^s}` through Parseval.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| self.grid.wavenumber(i).powf(2.0 * s) * c.norm_sqr())
            .sum();
        (self.grid.volume() * sum).sqrt()
    }

    /// Largest `|f̂(ξ) − conj f̂(−ξ)|`; zero for real fields.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[i] - self.coeffs[self.grid.partner(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|f̂(ξ)|` over wavevectors with `|ξ| > radius`.
    pub fn max_coeff_beyond(&self, radius: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.wavenumber(*i) > radius)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SpectralField, b: f64) -> Result<SpectralField> {
        self.grid.ensure_same(&other.grid)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x * a + y * b)
            .collect();
        Ok(SpectralField {
            grid: self.grid,
            coeffs,
        })
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub(crate) fn add_assign(&mut self, other: &SpectralField) {
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y;
        }
    }

    /// Multiplies coefficient `i` by `weights[i]`.
    pub(crate) fn weighted(&self, weights: &[f64]) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(weights)
                .map(|(c, w)| c * *w)
                .collect(),
        }
    }

    /// Zeroes every coefficient with some `|ξ_i| > N/3`, and the Nyquist plane.
    pub fn dealiased(&self) -> SpectralField {
        let cutoff = self.grid.dealias_cutoff();
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.grid.wavevector(i);
            if k.iter().any(|x| x.abs() > cutoff) {
                *c = Complex64::default();
            }
        }
        out
    }

    pub fn is_dealiased(&self) -> bool {
        let cutoff = self.grid.dealias_cutoff();
        self.coeffs.iter().enumerate().all(|(i, c)| {
            let k = self.grid.wavevector(i);
            k.iter().all(|x| x.abs() <= cutoff) || (c.re == 0.0 && c.im == 0.0)
        })
    }

    /// The field with its mean coefficient set to zero.
    pub fn mean_free(&self) -> SpectralField {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::default();
        out
    }

    /// Zeroes all coefficients with `|ξ| > radius` (and the mean).
    pub fn band_limited(&self, radius: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::default();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if self.grid.wavenumber(i) > radius {
                *c = Complex64::default();
            }
        }
        out
    }
}

/// `d` spectral components of a vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidInput("vector field needs components".into()))?;
        let grid = first.grid();
        if components.len() != grid.dim() {
            return Err(Error::InvalidInput(format!(
                "{} components for dimension {}",
                components.len(),
                grid.dim()
            )));
        }
        for c in &components {
            grid.ensure_same(&c.grid())?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(SpectralField::is_zero)
    }

    /// Applies the same scalar map to each component.
    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> VectorField {
        VectorField {
            components: self.components.iter().map(f).collect(),
        }
    }

    /// Pointwise Euclidean magnitude `|u(x)|` on the grid.
    pub fn magnitude(&self) -> RealField {
        let grid = self.grid();
        let mut acc = vec![0.0; grid.len()];
        for c in &self.components {
            let v = inverse_transform(c);
            for (a, x) in acc.iter_mut().zip(v.values()) {
                *a += x * x;
            }
        }
        RealField {
            grid,
            values: acc.into_iter().map(f64::sqrt).collect(),
        }
    }

    /// Spectral divergence `Σ iξ_i û_i`.
    pub fn divergence(&self) -> SpectralField {
        let grid = self.grid();
        let mut out = SpectralField::zeros(grid);
        for i in 0..grid.len() {
            let k = grid.wavevector_f64(i);
            let mut acc = Complex64::default();
            for (a, comp) in self.components.iter().enumerate() {
                acc += Complex64::new(0.0, k[a]) * comp.coeffs[i];
            }
            out.coeffs[i] = acc;
        }
        symmetrize_nyquist(&mut out);
        out
    }
}

/// FFT of a real field, normalised so that `coeff(0)` is the mean.
pub fn forward_transform(f: &RealField) -> SpectralField {
    let grid = f.grid;
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut data, grid.n(), grid.dim());
    SpectralField {
        grid,
        coeffs: data,
    }
}

/// Synthesises grid samples; the imaginary part (zero for Hermitian input) is discarded.
pub fn inverse_transform(f: &SpectralField) -> RealField {
    let grid = f.grid;
    let mut data = f.coeffs.clone();
    fft::inverse(&mut data, grid.n(), grid.dim());
    RealField {
        grid,
        values: data.into_iter().map(|c| c.re).collect(),
    }
}

/// Diagonal Fourier operator: `coeff_out(ξ) = m(ξ)·coeff_in(ξ)`.
///
/// The symbol is evaluated at the signed wavevector (as `f64` components). At `ξ = 0` a
/// non-finite value is read as the homogeneous convention `m(0) = 0`. On the Nyquist planes,
/// where `ξ` and `−ξ` share a table entry, the symbol is averaged with its Hermitian partner
/// so real inputs stay real under real-valued operators.
pub fn apply_multiplier(
    f: &SpectralField,
    m: impl Fn(&[f64]) -> Complex64,
) -> Result<SpectralField> {
    let table = symbol_table(f.grid, m)?;
    Ok(apply_table(f, &table))
}

/// Tabulates a symbol on the grid with the conventions of [`apply_multiplier`].
pub(crate) fn symbol_table(grid: Grid, m: impl Fn(&[f64]) -> Complex64) -> Result<Vec<Complex64>> {
    let dim = grid.dim();
    let finite = |c: Complex64| c.re.is_finite() && c.im.is_finite();
    let mut table = vec![Complex64::default(); grid.len()];
    for (i, slot) in table.iter_mut().enumerate().skip(1) {
        let k = grid.wavevector_f64(i);
        let mut value = m(&k[..dim]);
        if !finite(value) {
            return Err(Error::Symbol(format!(
                "symbol is not finite at ξ = {:?}",
                &k[..dim]
            )));
        }
        if grid.on_nyquist_plane(i) {
            let p = grid.wavevector_f64(grid.partner(i));
            let partner = m(&p[..dim]);
            if finite(partner) {
                value = (value + partner.conj()) * 0.5;
            }
        }
        *slot = value;
    }
    let origin = m(&[0.0; 3][..dim]);
    if finite(origin) {
        table[0] = origin;
    }
    Ok(table)
}

pub(crate) fn apply_table(f: &SpectralField, table: &[Complex64]) -> SpectralField {
    SpectralField {
        grid: f.grid,
        coeffs: f.coeffs.iter().zip(table).map(|(c, m)| c * m).collect(),
    }
}

/// Enforces Hermitian symmetry on the Nyquist planes by averaging partners.
pub(crate) fn symmetrize_nyquist(f: &mut SpectralField) {
    let grid = f.grid;
    for i in 0..grid.len() {
        if grid.on_nyquist_plane(i) {
            let p = grid.partner(i);
            if p > i {
                let avg = (f.coeffs[i] + f.coeffs[p].conj()) * 0.5;
                f.coeffs[i] = avg;
                f.coeffs[p] = avg.conj();
            } else if p == i {
                f.coeffs[i] = Complex64::new(f.coeffs[i].re, 0.0);
            }
        }
    }
}

/// Spectral partial derivative `∂_axis f`.
pub fn partial(f: &SpectralField, axis: usize) -> SpectralField {
    let grid = f.grid;
    let mut out = SpectralField::zeros(grid);
    for i in 0..grid.len() {
        if grid.on_nyquist_plane(i) && grid.multi_index(i)[axis] == grid.n() / 2 {
            continue;
        }
        let k = grid.wavevector(i)[axis] as f64;
        out.coeffs[i] = Complex64::new(0.0, k) * f.coeffs[i];
    }
    out
}

pub fn gradient(f: &SpectralField) -> VectorField {
    VectorField {
        components: (0..f.grid.dim()).map(|a| partial(f, a)).collect(),
    }
}

/// `(−Δ)^{s/2} f` with the homogeneous convention at `ξ = 0`.
pub fn fractional_laplacian(f: &SpectralField, s: f64) -> SpectralField {
    let grid = f.grid;
    let mut out = SpectralField::zeros(grid);
    for i in 1..grid.len() {
        out.coeffs[i] = f.coeffs[i] * grid.wavenumber(i).powf(s);
    }
    out
}

pub(crate) fn validate_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::InvalidExponent(p))
    } else {
        Ok(())
    }
}

/// `(Σ |v|^p · cell)^{1/p}`, or `max |v|` for `p = ∞`; scaled to survive large `p`.
pub(crate) fn lp_of_samples(values: &[f64], p: f64, cell: f64) -> f64 {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
    max * (sum * cell).powf(1.0 / p)
}

/// Rectangle-rule `‖f‖_{L^p([0,2π)^d)}`; `p = ∞` is the grid maximum of `|f|`.
pub fn lp_norm(f: &RealField, p: f64) -> Result<f64> {
    validate_exponent(p)?;
    Ok(lp_of_samples(&f.values, p, f.grid.cell_volume()))
}

/// `L^p` norm of a spectral field; for `p = ∞` the maximum is taken on a grid refined by
/// `oversample` through zero padding (`oversample = 1` uses the native grid).
pub fn lp_norm_spectral(f: &SpectralField, p: f64, oversample: usize) -> Result<f64> {
    validate_exponent(p)?;
    if p.is_infinite() && oversample > 1 {
        let m = f.grid.n() * oversample;
        let samples = padded_samples(f, m);
        return Ok(lp_of_samples(&samples, p, 1.0));
    }
    lp_norm(&inverse_transform(f), p)
}

/// Samples of `f` on an `m^d` grid (`m ≥ N`) by zero padding; Nyquist-plane modes are
/// placed at their signed wavenumber `−N/2`.
pub(crate) fn padded_samples(f: &SpectralField, m: usize) -> Vec<f64> {
    let grid = f.grid;
    let dim = grid.dim();
    debug_assert!(m >= grid.n());
    let mut data = vec![Complex64::default(); m.pow(dim as u32)];
    for (i, c) in f.coeffs.iter().enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let k = grid.wavevector(i);
        let mut flat = 0;
        for a in 0..dim {
            flat = flat * m + fft::wrap_index(k[a], m);
        }
        data[flat] = *c;
    }
    fft::inverse(&mut data, m, dim);
    data.into_iter().map(|c| c.re).collect()
}

/// Fourier coefficients on `grid` of samples given on an `m^d` grid; modes with some
/// `|ξ_i| ≥ N/2` are dropped.
pub(crate) fn from_padded_samples(values: &[f64], m: usize, grid: Grid) -> SpectralField {
    let dim = grid.dim();
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut data, m, dim);
    let half = (grid.n() / 2) as i64;
    let mut out = SpectralField::zeros(grid);
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        if (0..dim).any(|a| k[a].abs() >= half) {
            continue;
        }
        let mut flat = 0;
        for a in 0..dim {
            flat = flat * m + fft::wrap_index(k[a], m);
        }
        out.coeffs[i] = data[flat];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid2(n: usize) -> Grid {
        Grid::new(2, n).unwrap()
    }

    fn random_real(grid: Grid, seed: u64) -> RealField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        RealField::new(grid, values).unwrap()
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(Grid::new(2, 12).is_err());
        assert!(Grid::new(2, 8).is_err());
        assert!(Grid::new(4, 16).is_err());
        assert!(Grid::new(1, 16).is_err());
        assert!(Grid::new(3, 32).is_ok());
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let grid = grid2(16);
        let mut values = vec![0.0; grid.len()];
        values[7] = f64::NAN;
        assert!(matches!(
            RealField::new(grid, values),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn constant_field_has_single_mean_coefficient() {
        let grid = grid2(32);
        let f = RealField::from_fn(grid, |_| 1.0).unwrap();
        let s = forward_transform(&f);
        assert_relative_eq!(s.coeffs()[0].re, 1.0, epsilon = 1e-15);
        assert!(s.coeffs().iter().skip(1).all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn cosine_mode_has_two_half_coefficients() {
        let grid = grid2(64);
        let f = RealField::from_fn(grid, |x| (4.0 * x[0]).cos()).unwrap();
        let s = forward_transform(&f);
        for (i, c) in s.coeffs().iter().enumerate() {
            let k = grid.wavevector(i);
            let expected = if (k[0] == 4 || k[0] == -4) && k[1] == 0 {
                0.5
            } else {
                0.0
            };
            assert!((c.re - expected).abs() < 1e-14 && c.im.abs() < 1e-14);
        }
    }

    #[test]
    fn round_trip_is_within_1e_12() {
        for (dim, n) in [(2, 64), (3, 16)] {
            let grid = Grid::new(dim, n).unwrap();
            let f = random_real(grid, 11);
            let back = inverse_transform(&forward_transform(&f));
            let err: f64 = f
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let norm: f64 = f.values().iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(err / norm <= 1e-12, "relative error {}", err / norm);
        }
    }

    #[test]
    fn parseval_matches_quadrature() {
        let grid = grid2(32);
        let f = random_real(grid, 3);
        let quad = lp_norm(&f, 2.0).unwrap();
        let spec = forward_transform(&f).l2_norm();
        assert_relative_eq!(quad, spec, max_relative = 1e-10);
    }

    #[test]
    fn identity_symbol_is_identity() {
        let grid = grid2(32);
        let f = forward_transform(&random_real(grid, 5));
        let g = apply_multiplier(&f, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let grid = grid2(32);
        let f = forward_transform(&RealField::from_fn(grid, |x| x[0].sin()).unwrap());
        let g = apply_multiplier(&f, |k| Complex64::new(0.0, k[0])).unwrap();
        let g = inverse_transform(&g);
        for (i, v) in g.values().iter().enumerate() {
            assert!((v - grid.point(i)[0].cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn fractional_symbol_scales_single_mode() {
        // |ξ|^{3/2} on cos(4x₁) gives 4^{3/2} = 8.
        let grid = grid2(64);
        let f = forward_transform(&RealField::from_fn(grid, |x| (4.0 * x[0]).cos()).unwrap());
        let g = apply_multiplier(&f, |k| {
            let r = k.iter().map(|x| x * x).sum::<f64>().sqrt();
            Complex64::new(r.powf(1.5), 0.0)
        })
        .unwrap();
        let g = inverse_transform(&g);
        for (i, v) in g.values().iter().enumerate() {
            assert!((v - 8.0 * (4.0 * grid.point(i)[0]).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_symbol_away_from_origin_is_an_error() {
        let grid = grid2(16);
        let f = SpectralField::zeros(grid);
        let err = apply_multiplier(&f, |k| Complex64::new(1.0 / (k[0] - 3.0), 0.0));
        assert!(matches!(err, Err(Error::Symbol(_))));
        // singular only at the origin: homogeneous convention applies
        assert!(apply_multiplier(&f, |k| {
            Complex64::new(1.0 / k.iter().map(|x| x * x).sum::<f64>(), 0.0)
        })
        .is_ok());
    }

    #[test]
    fn odd_symbols_keep_nyquist_hermitian() {
        let grid = grid2(16);
        let f = forward_transform(&random_real(grid, 9));
        let g = apply_multiplier(&f, |k| Complex64::new(0.0, k[0] + 2.0 * k[1])).unwrap();
        assert!(g.hermitian_defect() < 1e-14);
    }

    #[test]
    fn lp_norm_examples() {
        let grid = grid2(64);
        let s = RealField::from_fn(grid, |x| x[0].sin()).unwrap();
        assert_relative_eq!(lp_norm(&s, 2.0).unwrap(), PI * 2f64.sqrt(), epsilon = 1e-12);
        let z = RealField::zeros(grid);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm(&z, p).unwrap(), 0.0);
        }
        let c = RealField::from_fn(grid, |x| (4.0 * x[0]).cos()).unwrap();
        assert_relative_eq!(lp_norm(&c, f64::INFINITY).unwrap(), 1.0, epsilon = 1e-14);
        assert!(lp_norm(&c, 0.5).is_err());
        assert!(lp_norm(&c, f64::NAN).is_err());
    }

    #[test]
    fn oversampled_sup_norm_sees_off_grid_peaks() {
        // cos(x₁ + 0.5·2π/16) peaks between grid points at N = 16
        let grid = grid2(16);
        let shift = 0.5 * grid.spacing();
        let f = forward_transform(&RealField::from_fn(grid, |x| (x[0] + shift).cos()).unwrap());
        let coarse = lp_norm_spectral(&f, f64::INFINITY, 1).unwrap();
        let fine = lp_norm_spectral(&f, f64::INFINITY, 2).unwrap();
        assert!(coarse < 0.99);
        assert_relative_eq!(fine, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn padded_round_trip_preserves_band_limited_fields() {
        let grid = grid2(32);
        let f = forward_transform(&random_real(grid, 4)).band_limited(10.0);
        let samples = padded_samples(&f, 48);
        let g = from_padded_samples(&samples, 48, grid);
        assert!(f.sub(&g).unwrap().coefficient_l2() < 1e-14);
    }

    #[test]
    fn sobolev_norm_of_single_mode() {
        let grid = grid2(32);
        let f = forward_transform(&RealField::from_fn(grid, |x| (4.0 * x[0]).cos()).unwrap());
        // ‖cos 4x₁‖²_{L²} = 2π², so ‖·‖_{Ḣ¹} = 4·π√2
        assert_relative_eq!(f.sobolev_norm(1.0), 4.0 * PI * 2f64.sqrt(), epsilon = 1e-11);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn multiplier_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
                let grid = grid2(16);
                let f = forward_transform(&random_real(grid, seed));
                let g = forward_transform(&random_real(grid, seed ^ 0xdead));
                let m = |k: &[f64]| Complex64::new(k[0] * k[1], k[0] - 0.5 * k[1]);
                let lhs = apply_multiplier(&f.combine(a, &g, b).unwrap(), m).unwrap();
                let rhs = apply_multiplier(&f, m).unwrap()
                    .combine(a, &apply_multiplier(&g, m).unwrap(), b).unwrap();
                let scale = lhs.coefficient_l2().max(1.0);
                prop_assert!(lhs.sub(&rhs).unwrap().coefficient_l2() <= 1e-12 * scale);
            }

            #[test]
            fn forward_transform_of_real_data_is_hermitian(seed in any::<u64>()) {
                let grid = grid2(16);
                let f = forward_transform(&random_real(grid, seed));
                prop_assert!(f.hermitian_defect() < 1e-15);
            }
        }
    }
}
