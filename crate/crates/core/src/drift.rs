//! Constitutive velocity laws `θ ↦ u` and their audits.
//!
//! - General Calderón-Zygmund law: `û_j(ξ) = iξ_i m_ij(ξ) θ̂(ξ)` (sum over `i`).
//! - SQG: `û(ξ) = i(−ξ₂, ξ₁)|ξ|^{−1} θ̂(ξ)`.
//! - Modified SQG: `û(ξ) = i(−ξ₂, ξ₁)|ξ|^{β−2} θ̂(ξ)`, `β ∈ (1, 2)`.
//!
//! Every law has `û(0) = 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::dyadic::DyadicDecomposition;
use crate::error::{Error, Result};
use crate::field::{
    apply_table, lp_of_samples, padded_samples, symbol_table, Grid, SpectralField, VectorField,
};

/// Divergence residual above which strict mode rejects a matrix.
pub const STRICT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Real-valued symbol expression over `ξ₁..ξ_d`, `|ξ|` and constants.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolExpr {
    Num(f64),
    Xi(usize),
    AbsXi,
    Neg(Box<SymbolExpr>),
    Bin(BinaryOp, Box<SymbolExpr>, Box<SymbolExpr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Xi(usize),
    AbsXi,
    Bar,
    Op(char),
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let err = |msg: String| Error::InvalidInput(format!("symbol {src:?}: {msg}"));
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse()
                .map_err(|_| err(format!("bad number {text:?}")))?;
            out.push(Token::Num(v));
        } else if c.is_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "absxi" => Token::AbsXi,
                "xi" | "ξ" => Token::Xi(0),
                w => {
                    let index = w
                        .strip_prefix("xi")
                        .or_else(|| w.strip_prefix('ξ'))
                        .and_then(|d| d.parse::<usize>().ok())
                        .filter(|d| (1..=3).contains(d))
                        .ok_or_else(|| err(format!("unknown identifier {w:?}")))?;
                    Token::Xi(index)
                }
            };
            out.push(tok);
        } else {
            out.push(match c {
                '|' => Token::Bar,
                '(' => Token::Open,
                ')' => Token::Close,
                '+' | '-' | '*' | '/' | '^' => Token::Op(c),
                '−' => Token::Op('-'),
                '·' | '×' => Token::Op('*'),
                other => return Err(err(format!("unexpected character {other:?}"))),
            });
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::InvalidInput(format!("symbol {:?}: {msg} at token {}", self.src, self.pos))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<SymbolExpr> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = SymbolExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<SymbolExpr> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = SymbolExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<SymbolExpr> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(SymbolExpr::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<SymbolExpr> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(SymbolExpr::Bin(BinaryOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SymbolExpr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(SymbolExpr::Num(v)),
            Some(Token::Xi(0)) => Err(self.err("bare ξ needs a component index or |ξ|")),
            Some(Token::Xi(i)) => Ok(SymbolExpr::Xi(i)),
            Some(Token::AbsXi) => Ok(SymbolExpr::AbsXi),
            Some(Token::Bar) => match (self.next(), self.next()) {
                (Some(Token::Xi(0)), Some(Token::Bar)) => Ok(SymbolExpr::AbsXi),
                _ => Err(self.err("expected |ξ|")),
            },
            Some(Token::Open) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Token::Close) => Ok(e),
                    _ => Err(self.err("expected ')'")),
                }
            }
            _ => Err(self.err("expected a number, ξ component, |ξ| or '('")),
        }
    }
}

impl SymbolExpr {
    /// Parses `+ − * / ^`, parentheses, numbers, `xi1..xi3` (or `ξ1..ξ3`) and `|xi|`
    /// (or `|ξ|`, `absxi`). `^` binds tighter than unary minus and is right-associative.
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src)?;
        if tokens.is_empty() {
            return Err(Error::InvalidInput("empty symbol expression".into()));
        }
        let mut p = Parser {
            tokens: &tokens,
            pos: 0,
            src,
        };
        let e = p.expr()?;
        if p.pos != tokens.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    /// Largest component index used (1-based), 0 if none.
    pub fn max_component(&self) -> usize {
        match self {
            SymbolExpr::Xi(i) => *i,
            SymbolExpr::Neg(a) => a.max_component(),
            SymbolExpr::Bin(_, a, b) => a.max_component().max(b.max_component()),
            _ => 0,
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match self {
            SymbolExpr::Num(v) => *v,
            SymbolExpr::Xi(i) => xi.get(i - 1).copied().unwrap_or(0.0),
            SymbolExpr::AbsXi => xi.iter().map(|x| x * x).sum::<f64>().sqrt(),
            SymbolExpr::Neg(a) => -a.eval(xi),
            SymbolExpr::Bin(op, a, b) => {
                let (x, y) = (a.eval(xi), b.eval(xi));
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => x / y,
                    BinaryOp::Pow if y.fract() == 0.0 && y.abs() < 64.0 => x.powi(y as i32),
                    BinaryOp::Pow => x.powf(y),
                }
            }
        }
    }
}

/// The `d × d` symbol table `m_ij` of a Calderón-Zygmund law.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierMatrix {
    pub name: String,
    /// Declared homogeneity degree (0 for Calderón-Zygmund symbols).
    pub degree: f64,
    dim: usize,
    entries: Vec<Vec<SymbolExpr>>,
}

impl MultiplierMatrix {
    /// Builds a matrix from expression strings, row `i` holding `m_i1 .. m_id`.
    pub fn from_exprs(name: &str, rows: &[Vec<String>]) -> Result<Self> {
        let dim = rows.len();
        if !(2..=3).contains(&dim) || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput(format!(
                "multiplier matrix must be 2×2 or 3×3, got {} rows",
                dim
            )));
        }
        let entries = rows
            .iter()
            .map(|r| r.iter().map(|e| SymbolExpr::parse(e)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        if let Some(k) = entries.iter().flatten().map(SymbolExpr::max_component).max() {
            if k > dim {
                return Err(Error::InvalidInput(format!(
                    "symbol uses ξ{k} in dimension {dim}"
                )));
            }
        }
        Ok(Self {
            name: name.to_string(),
            degree: 0.0,
            dim,
            entries,
        })
    }

    fn embed(name: &str, dim: usize, m12: &str) -> Result<Self> {
        let mut rows = vec![vec!["0".to_string(); dim]; dim];
        rows[0][1] = m12.to_string();
        rows[1][0] = format!("-({m12})");
        Self::from_exprs(name, &rows)
    }

    /// `m₁₂ = 1`, `m₂₁ = −1`, all else 0. The drift is `∇⊥θ`, so `u·∇θ ≡ 0`.
    pub fn constant_antisymmetric(dim: usize) -> Result<Self> {
        Self::embed("constant_antisymmetric", dim, "1")
    }

    /// `m₁₂ = ξ₁ξ₂/|ξ|²`, `m₂₁ = −ξ₁ξ₂/|ξ|²`: a genuine degree-0 Riesz-type symbol.
    pub fn riesz_antisymmetric(dim: usize) -> Result<Self> {
        Self::embed("riesz_antisymmetric", dim, "xi1*xi2/|xi|^2")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize, xi: &[f64]) -> f64 {
        self.entries[i][j].eval(xi)
    }

    /// `max |ξ_iξ_j m_ij(ξ)| / |ξ|²` over resolved `ξ ≠ 0`.
    pub fn divergence_residual(&self, grid: Grid) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 1..grid.len() {
            let k = grid.wavevector_f64(idx);
            let xi = &k[..self.dim];
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            let mut acc = 0.0;
            for i in 0..self.dim {
                for j in 0..self.dim {
                    acc += xi[i] * xi[j] * self.entry(i, j, xi);
                }
            }
            worst = worst.max(if acc.is_finite() { acc.abs() / r2 } else { f64::INFINITY });
        }
        worst
    }

    /// `max |m_ij(2ξ) − m_ij(ξ)|` over `ξ ≠ 0` with `2ξ` resolved.
    pub fn homogeneity_defect(&self, grid: Grid) -> f64 {
        let half = (grid.n() / 4) as i64;
        let mut worst: f64 = 0.0;
        for idx in 1..grid.len() {
            let k = grid.wavevector(idx);
            if k.iter().any(|x| x.abs() >= half) {
                continue;
            }
            let a: Vec<f64> = k[..self.dim].iter().map(|&x| x as f64).collect();
            let b: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    worst = worst.max((self.entry(i, j, &b) - self.entry(i, j, &a)).abs());
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DriftLaw {
    GeneralCz(MultiplierMatrix),
    Sqg,
    ModifiedSqg { beta: f64 },
}

impl DriftLaw {
    pub fn modified_sqg(beta: f64) -> Result<Self> {
        if !(beta > 1.0 && beta < 2.0) {
            return Err(Error::InvalidInput(format!("modified SQG needs β ∈ (1, 2), got {beta}")));
        }
        Ok(DriftLaw::ModifiedSqg { beta })
    }

    pub fn name(&self) -> String {
        match self {
            DriftLaw::GeneralCz(m) => format!("general_cz:{}", m.name),
            DriftLaw::Sqg => "sqg".into(),
            DriftLaw::ModifiedSqg { beta } => format!("modified_sqg(β={beta})"),
        }
    }
}

/// A law tabulated on one grid: `û_j = s_j(ξ) θ̂`.
#[derive(Debug, Clone)]
pub struct VelocityOperator {
    grid: Grid,
    law: DriftLaw,
    tables: Vec<Vec<Complex64>>,
}

impl VelocityOperator {
    /// Tabulates `law`; in strict mode a matrix with divergence residual above
    /// [`STRICT_TOLERANCE`] is rejected.
    pub fn new(grid: Grid, law: &DriftLaw, strict: bool) -> Result<Self> {
        let dim = grid.dim();
        let tables = match law {
            DriftLaw::GeneralCz(m) => {
                if m.dim() != dim {
                    return Err(Error::InvalidInput(format!(
                        "{}×{} matrix on a {dim}-dimensional grid",
                        m.dim(),
                        m.dim()
                    )));
                }
                if strict {
                    let residual = m.divergence_residual(grid);
                    if !(residual <= STRICT_TOLERANCE) {
                        return Err(Error::NotDivergenceFree {
                            residual,
                            tolerance: STRICT_TOLERANCE,
                        });
                    }
                }
                (0..dim)
                    .map(|j| {
                        symbol_table(grid, |xi| {
                            if xi.iter().all(|x| *x == 0.0) {
                                return Complex64::default();
                            }
                            let s: f64 = (0..dim).map(|i| xi[i] * m.entry(i, j, xi)).sum();
                            Complex64::new(0.0, s)
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            DriftLaw::Sqg | DriftLaw::ModifiedSqg { .. } => {
                if dim != 2 {
                    return Err(Error::InvalidInput(format!(
                        "{} is defined for d = 2 only",
                        law.name()
                    )));
                }
                let power = match law {
                    DriftLaw::ModifiedSqg { beta } => beta - 2.0,
                    _ => -1.0,
                };
                let perp = |axis: usize, sign: f64| {
                    symbol_table(grid, move |xi| {
                        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                        if r == 0.0 {
                            return Complex64::default();
                        }
                        Complex64::new(0.0, sign * xi[axis] * r.powf(power))
                    })
                };
                vec![perp(1, -1.0)?, perp(0, 1.0)?]
            }
        };
        Ok(Self {
            grid,
            law: law.clone(),
            tables,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn law(&self) -> &DriftLaw {
        &self.law
    }

    pub fn apply(&self, theta: &SpectralField) -> Result<VectorField> {
        self.grid.ensure_same(&theta.grid())?;
        VectorField::new(self.tables.iter().map(|t| apply_table(theta, t)).collect())
    }

    /// Largest `|s_j(ξ)|/|ξ|`: the symbol gain of one derivative.
    pub fn symbol_gain(&self) -> f64 {
        (1..self.grid.len())
            .map(|i| {
                let s: f64 = self.tables.iter().map(|t| t[i].norm_sqr()).sum();
                s.sqrt() / self.grid.wavenumber(i)
            })
            .fold(0.0, f64::max)
    }
}

/// `u` from `θ` under `law` (strict divergence check on).
pub fn velocity_from_theta(theta: &SpectralField, law: &DriftLaw) -> Result<VectorField> {
    VelocityOperator::new(theta.grid(), law, true)?.apply(theta)
}

/// `max_ξ |ξ·û(ξ)| / max(1, ‖û‖_{ℓ²})`.
pub fn check_divergence_free(u: &VectorField) -> f64 {
    let grid = u.grid();
    let norm: f64 = u
        .components()
        .iter()
        .map(|c| c.coefficient_l2().powi(2))
        .sum::<f64>()
        .sqrt();
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        let k = grid.wavevector_f64(i);
        let mut acc = Complex64::default();
        for (a, c) in u.components().iter().enumerate() {
            acc += c.coeffs()[i] * k[a];
        }
        worst = worst.max(acc.norm());
    }
    worst / norm.max(1.0)
}

/// `‖|g|‖_{L^q}` of a vector field with the pointwise Euclidean magnitude.
pub(crate) fn vector_lp(u: &VectorField, q: f64, oversample: usize) -> f64 {
    let grid = u.grid();
    let m = grid.n() * oversample.max(1);
    let cell = (2.0 * std::f64::consts::PI / m as f64).powi(grid.dim() as i32);
    let mut mag = vec![0.0; m.pow(grid.dim() as u32)];
    for c in u.components() {
        for (acc, v) in mag.iter_mut().zip(padded_samples(c, m)) {
            *acc += v * v;
        }
    }
    mag.iter_mut().for_each(|v| *v = v.sqrt());
    lp_of_samples(&mag, q, cell)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellRatio {
    pub k: i32,
    /// `‖Δ_k u‖_{L²} / (2^k‖Δ_k θ‖_{L²})`; absent for empty shells.
    pub ratio_l2: Option<f64>,
    /// `‖Δ_k u‖_{L^∞} / (2^k‖Δ_k θ‖_{L^∞})`; absent for empty shells.
    pub ratio_linf: Option<f64>,
    pub edge: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftShellAudit {
    pub law: String,
    pub shells: Vec<ShellRatio>,
    pub max_l2: f64,
    pub max_linf: f64,
    /// `max/min` of the `L²` ratios over present shells.
    pub spread_l2: f64,
    /// `max/min` of the `L^∞` ratios over present shells.
    pub spread_linf: f64,
    /// `L²` ratios strictly decreasing in `k` over present shells.
    pub decreasing_l2: bool,
}

/// Per-shell gain of `θ ↦ u`, measured against one derivative.
pub fn drift_shell_bound_audit(
    dyadic: &DyadicDecomposition,
    theta: &SpectralField,
    law: &DriftLaw,
) -> Result<DriftShellAudit> {
    theta.ensure_mean_zero()?;
    let op = VelocityOperator::new(theta.grid(), law, true)?;
    let u = op.apply(theta)?;
    let scale = theta.coefficient_l2();
    let mut shells = Vec::new();
    for k in dyadic.shells() {
        let tk = dyadic.project_shell(theta, k)?;
        let present = tk.coefficient_l2() > 1e-14 * scale && scale > 0.0;
        let (ratio_l2, ratio_linf) = if present {
            let uk = u.map(|c| dyadic.shell_or_zero(c, k));
            let gain = 2f64.powi(k);
            let t2 = crate::field::lp_norm_spectral(&tk, 2.0, 1)?;
            let ti = crate::field::lp_norm_spectral(&tk, f64::INFINITY, 2)?;
            (
                Some(vector_lp(&uk, 2.0, 1) / (gain * t2)),
                Some(vector_lp(&uk, f64::INFINITY, 2) / (gain * ti)),
            )
        } else {
            (None, None)
        };
        shells.push(ShellRatio {
            k,
            ratio_l2,
            ratio_linf,
            edge: dyadic.is_edge(k),
        });
    }
    let stats = |f: fn(&ShellRatio) -> Option<f64>| {
        let v: Vec<f64> = shells.iter().filter_map(f).collect();
        let max = v.iter().copied().fold(0.0, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = if v.is_empty() { 1.0 } else { max / min };
        (max, spread, v)
    };
    let (max_l2, spread_l2, l2) = stats(|s| s.ratio_l2);
    let (max_linf, spread_linf, _) = stats(|s| s.ratio_linf);
    Ok(DriftShellAudit {
        law: law.name(),
        decreasing_l2: l2.windows(2).all(|w| w[1] < w[0]),
        shells,
        max_l2,
        max_linf,
        spread_l2,
        spread_linf,
    })
}
