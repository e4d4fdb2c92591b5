//! Run configuration. A config is one JSON object; every section is optional and each
//! command demands the sections it uses.
//!
//! ```json
//! {
//!   "grid": {"d": 2, "N": 64},
//!   "solver": {"dt": 0.001, "T_end": 0.3, "beta": 2, "cadence": 4, "p_list": [2, 2.5, "inf"],
//!              "oversample": 2, "snapshots": false, "strict": true},
//!   "law": {"law": "general_cz", "matrix": [["0", "xi1*xi2/|xi|^2"], ["-xi1*xi2/|xi|^2", "0"]]},
//!   "initial": {"synthetic": "holder_profile(1/4)", "amplitude": 1},
//!   "audits": ["dyadic_identities", "j_certificates"],
//!   "audit": {"alpha": "1/4", "p": "2", "q": "5/2", "window": [0.05, 0.3]},
//!   "besov": [{"s": 0.25, "p": "inf", "q": "inf"}],
//!   "calculus": {"alpha": "1/4", "d": 2},
//!   "output": "out",
//!   "seed": 7
//! }
//! ```
//!
//! Laws: `none`, `uniform` (with `velocity`), `sqg`, `modified_sqg` (with `beta`) and
//! `general_cz` (with `matrix`, either a preset name or rows of symbol expressions).
//! Rationals are strings `"a/b"`; exponents accept `"inf"`.

use std::path::{Path, PathBuf};

use besov_core::drift::{DriftLaw, MultiplierMatrix};
use besov_core::dyadic::BesovIndex;
use besov_core::exponent::Rational;
use besov_core::serde_ext;
use besov_core::solver::{Drift, SolverConfig};
use besov_core::{synthetic, Grid, SpectralField};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config_err, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub d: usize,
    #[serde(rename = "N", alias = "n")]
    pub n: usize,
}

impl GridSpec {
    pub fn grid(&self) -> CliResult<Grid> {
        Grid::new(self.d, self.n).map_err(config_err)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub dt: f64,
    #[serde(rename = "T_end", alias = "t_end")]
    pub t_end: f64,
    /// Dissipation order.
    pub beta: f64,
    pub cadence: usize,
    #[serde(with = "serde_ext::exponent_list")]
    pub p_list: Vec<f64>,
    pub oversample: usize,
    /// Write a snapshot file at every recorded sample.
    pub snapshots: bool,
    pub strict: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            dt: d.dt,
            t_end: d.t_end,
            beta: d.beta,
            cadence: d.cadence,
            p_list: d.p_list,
            oversample: d.oversample,
            snapshots: false,
            strict: d.strict,
        }
    }
}

impl SolverSpec {
    pub fn solver_config(&self, drift: Drift) -> CliResult<SolverConfig> {
        let cfg = SolverConfig {
            dt: self.dt,
            t_end: self.t_end,
            beta: self.beta,
            drift,
            cadence: self.cadence,
            p_list: self.p_list.clone(),
            oversample: self.oversample.max(1),
            keep_snapshots: self.snapshots,
            strict: self.strict,
        };
        cfg.validate().map_err(config_err)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    None,
    Uniform,
    Sqg,
    ModifiedSqg,
    GeneralCz,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Preset(String),
    Rows(Vec<Vec<String>>),
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    pub law: LawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
}

impl LawSpec {
    /// The constitutive law, or `None` for `none` and `uniform`.
    pub fn law(&self, dim: usize) -> CliResult<Option<DriftLaw>> {
        Ok(match self.law {
            LawKind::None | LawKind::Uniform => None,
            LawKind::Sqg => Some(DriftLaw::Sqg),
            LawKind::ModifiedSqg => {
                let beta = self
                    .beta
                    .ok_or_else(|| CliError::Config("law modified_sqg needs \"beta\"".into()))?;
                Some(DriftLaw::modified_sqg(beta).map_err(config_err)?)
            }
            LawKind::GeneralCz => {
                let matrix = match &self.matrix {
                    None => return Err(CliError::Config("law general_cz needs \"matrix\"".into())),
                    Some(MatrixSpec::Preset(p)) => match p.as_str() {
                        "constant_antisymmetric" => MultiplierMatrix::constant_antisymmetric(dim),
                        "riesz_antisymmetric" => MultiplierMatrix::riesz_antisymmetric(dim),
                        other => {
                            return Err(CliError::Config(format!(
                                "unknown matrix preset {other:?}; expected constant_antisymmetric or riesz_antisymmetric"
                            )))
                        }
                    },
                    Some(MatrixSpec::Rows(rows)) => {
                        MultiplierMatrix::from_exprs(self.name.as_deref().unwrap_or("custom"), rows)
                    }
                }
                .map_err(config_err)?;
                if matrix.dim() != dim {
                    return Err(CliError::Config(format!(
                        "{}×{} matrix on a {dim}-d grid",
                        matrix.dim(),
                        matrix.dim()
                    )));
                }
                Some(DriftLaw::GeneralCz(matrix))
            }
        })
    }

    pub fn drift(&self, dim: usize) -> CliResult<Drift> {
        if self.law == LawKind::Uniform {
            let v = self
                .velocity
                .clone()
                .ok_or_else(|| CliError::Config("law uniform needs \"velocity\"".into()))?;
            if v.len() != dim {
                return Err(CliError::Config(format!("uniform velocity {v:?} on a {dim}-d grid")));
            }
            return Ok(Drift::Uniform(v));
        }
        Ok(self.law(dim)?.map_or(Drift::Off, Drift::Law))
    }
}

/// A named synthetic initial condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Synthetic {
    Zero,
    /// `cos(k·x)`; a single integer `k` means `(k, 0, …)`.
    SingleMode(Vec<i64>),
    /// Random phases with `‖Δ_jθ‖_{L^∞} = 2^{−jα}`; without a seed the run seed is used.
    HolderProfile { alpha: f64, seed: Option<u64> },
    GaussianBump { width: f64 },
}

impl Synthetic {
    pub fn parse(src: &str) -> CliResult<Self> {
        let bad = |why: &str| CliError::Config(format!("initial condition {src:?}: {why}"));
        let src_t = src.trim();
        let (name, args) = match src_t.find('(') {
            Some(open) => {
                let inner = src_t[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| bad("missing closing parenthesis"))?;
                let args: Vec<&str> = inner.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
                (src_t[..open].trim(), args)
            }
            None => (src_t, Vec::new()),
        };
        let int = |a: &str| a.parse::<i64>().map_err(|_| bad(&format!("{a:?} is not an integer")));
        match (name, args.len()) {
            ("zero", 0) => Ok(Synthetic::Zero),
            ("single_mode", 1..=3) => Ok(Synthetic::SingleMode(
                args.iter().map(|a| int(a)).collect::<CliResult<_>>()?,
            )),
            ("holder_profile", 1 | 2) => {
                let seed = match args.get(1) {
                    Some(a) => Some(a.parse::<u64>().map_err(|_| bad(&format!("{a:?} is not a seed")))?),
                    None => None,
                };
                Ok(Synthetic::HolderProfile {
                    alpha: parse_number(args[0]).ok_or_else(|| bad("α must be a number or \"a/b\""))?,
                    seed,
                })
            }
            ("gaussian_bump", 1) => Ok(Synthetic::GaussianBump {
                width: parse_number(args[0]).ok_or_else(|| bad("width must be a number"))?,
            }),
            _ => Err(bad(
                "expected zero, single_mode(k), holder_profile(α[, seed]) or gaussian_bump(width)",
            )),
        }
    }

    pub fn build(&self, grid: Grid, run_seed: u64) -> CliResult<SpectralField> {
        match self {
            Synthetic::Zero => Ok(SpectralField::zeros(grid)),
            Synthetic::SingleMode(k) => {
                let mut k = k.clone();
                if k.len() == 1 {
                    k.resize(grid.dim(), 0);
                }
                synthetic::single_mode(grid, &k, 1.0).map_err(config_err)
            }
            Synthetic::HolderProfile { alpha, seed } => {
                synthetic::holder_profile(grid, *alpha, seed.unwrap_or(run_seed)).map_err(config_err)
            }
            Synthetic::GaussianBump { width } => synthetic::gaussian_bump(grid, *width).map_err(config_err),
        }
    }
}

/// `"a/b"`, an integer, or a decimal.
pub fn parse_number(s: &str) -> Option<f64> {
    s.parse::<Rational>()
        .map(|r| r.to_f64())
        .ok()
        .or_else(|| s.parse::<f64>().ok())
        .filter(|v| v.is_finite())
}

pub fn parse_rational(field: &str, s: &str) -> CliResult<Rational> {
    s.parse::<Rational>()
        .map_err(|e| CliError::Config(format!("{field}: {s:?} is not a rational \"a/b\" ({e})")))
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub synthetic: Option<String>,
    /// BSVF snapshot, relative to the config file.
    #[serde(default)]
    pub snapshot: Option<PathBuf>,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

/// Audits run by `verify-all`, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    DyadicIdentities,
    Bernstein,
    DivergenceFree,
    DriftBounds,
    DissipationLowerBound,
    BonyReconstruction,
    JCertificates,
    GronwallDuhamel,
    HmEnergy,
    CalculusTable,
}

impl AuditKind {
    pub const ALL: [AuditKind; 10] = [
        AuditKind::DyadicIdentities,
        AuditKind::Bernstein,
        AuditKind::DivergenceFree,
        AuditKind::DriftBounds,
        AuditKind::DissipationLowerBound,
        AuditKind::BonyReconstruction,
        AuditKind::JCertificates,
        AuditKind::GronwallDuhamel,
        AuditKind::HmEnergy,
        AuditKind::CalculusTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AuditKind::DyadicIdentities => "dyadic_identities",
            AuditKind::Bernstein => "bernstein",
            AuditKind::DivergenceFree => "divergence_free",
            AuditKind::DriftBounds => "drift_bounds",
            AuditKind::DissipationLowerBound => "dissipation_lower_bound",
            AuditKind::BonyReconstruction => "bony_reconstruction",
            AuditKind::JCertificates => "j_certificates",
            AuditKind::GronwallDuhamel => "gronwall_duhamel",
            AuditKind::HmEnergy => "hm_energy",
            AuditKind::CalculusTable => "calculus_table",
        }
    }

    /// Whether the audit touches fields (and so needs a grid).
    pub fn needs_fields(self) -> bool {
        self != AuditKind::CalculusTable
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditParams {
    /// Hölder index of the certificates and the Duhamel audit.
    pub alpha: String,
    pub p: String,
    pub q: String,
    /// Duhamel window `[t₀, t₁]`; defaults to `[T_end/6, T_end]`.
    pub window: Option<[f64; 2]>,
    pub energy_order: u32,
    pub tolerance: f64,
    pub spread_limit: f64,
    pub max_constant: f64,
    /// Random fields per identity audit, seeded from the run seed.
    pub random_fields: u64,
}

impl Default for AuditParams {
    fn default() -> Self {
        Self {
            alpha: "1/4".into(),
            p: "2".into(),
            q: "5/2".into(),
            window: None,
            energy_order: 1,
            tolerance: 1e-6,
            spread_limit: 1e2,
            max_constant: 1e3,
            random_fields: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BesovSpec {
    pub s: f64,
    #[serde(with = "serde_ext::exponent")]
    pub p: f64,
    #[serde(with = "serde_ext::exponent")]
    pub q: f64,
}

impl BesovSpec {
    pub fn index(&self) -> CliResult<BesovIndex> {
        BesovIndex::new(self.s, self.p, self.q).map_err(config_err)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CalculusSpec {
    pub alpha: String,
    #[serde(default = "two")]
    pub d: u32,
    #[serde(default)]
    pub beta: Option<String>,
    #[serde(default)]
    pub p: Option<String>,
}

fn two() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub law: Option<LawSpec>,
    #[serde(default)]
    pub initial: Option<InitialSpec>,
    #[serde(default)]
    pub audits: Option<Vec<AuditKind>>,
    #[serde(default)]
    pub audit: AuditParams,
    #[serde(default)]
    pub besov: Vec<BesovSpec>,
    #[serde(default)]
    pub calculus: Option<CalculusSpec>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

/// A parsed config with its origin and content hash.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    /// SHA-256 of the config bytes, hex encoded.
    pub sha256: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_bytes(&bytes, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_bytes(bytes: &[u8], base_dir: &Path) -> CliResult<Self> {
        let config: RunConfig =
            serde_json::from_slice(bytes).map_err(|e| CliError::Config(format!("schema: {e}")))?;
        Ok(Self {
            config,
            base_dir: base_dir.to_path_buf(),
            sha256: hex::encode(Sha256::digest(bytes)),
        })
    }

    pub fn grid(&self) -> CliResult<Grid> {
        self.config
            .grid
            .ok_or_else(|| CliError::Config("missing \"grid\" section".into()))?
            .grid()
    }

    pub fn law_spec(&self) -> CliResult<&LawSpec> {
        self.config
            .law
            .as_ref()
            .ok_or_else(|| CliError::Config("missing \"law\" section".into()))
    }

    /// The constitutive law; `none` and `uniform` are rejected.
    pub fn constitutive_law(&self, dim: usize) -> CliResult<DriftLaw> {
        self.law_spec()?.law(dim)?.ok_or_else(|| {
            CliError::Config("this command needs a constitutive law (sqg, modified_sqg or general_cz)".into())
        })
    }

    /// The initial datum on `grid`, scaled by `amplitude`.
    pub fn initial_field(&self, grid: Grid, seed: u64) -> CliResult<SpectralField> {
        let spec = self
            .config
            .initial
            .as_ref()
            .ok_or_else(|| CliError::Config("missing \"initial\" section".into()))?;
        let field = match (&spec.synthetic, &spec.snapshot) {
            (Some(s), None) => Synthetic::parse(s)?.build(grid, seed)?,
            (None, Some(path)) => {
                let path = self.base_dir.join(path);
                let file = std::fs::File::open(&path)
                    .map_err(|e| CliError::Config(format!("cannot open snapshot {}: {e}", path.display())))?;
                let snap = besov_core::snapshot::Snapshot::read_from(std::io::BufReader::new(file))
                    .map_err(config_err)?;
                if snap.grid() != grid {
                    return Err(CliError::Config(format!(
                        "snapshot grid {:?} differs from the config grid {:?}",
                        snap.grid(),
                        grid
                    )));
                }
                match snap {
                    besov_core::snapshot::Snapshot::Real(f) => besov_core::field::forward_transform(&f),
                    besov_core::snapshot::Snapshot::Spectral(f) => f,
                }
            }
            _ => {
                return Err(CliError::Config(
                    "\"initial\" needs exactly one of \"synthetic\" and \"snapshot\"".into(),
                ))
            }
        };
        if !spec.amplitude.is_finite() {
            return Err(CliError::Config(format!("amplitude {} is not finite", spec.amplitude)));
        }
        Ok(field.scale(spec.amplitude))
    }

    pub fn audits(&self) -> Vec<AuditKind> {
        let mut list = self.config.audits.clone().unwrap_or_else(|| AuditKind::ALL.to_vec());
        list.sort();
        list.dedup();
        list
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_names_parse() {
        assert_eq!(Synthetic::parse("zero").unwrap(), Synthetic::Zero);
        assert_eq!(Synthetic::parse("single_mode(4)").unwrap(), Synthetic::SingleMode(vec![4]));
        assert_eq!(Synthetic::parse(" single_mode(1, -2) ").unwrap(), Synthetic::SingleMode(vec![1, -2]));
        assert_eq!(
            Synthetic::parse("holder_profile(1/4)").unwrap(),
            Synthetic::HolderProfile { alpha: 0.25, seed: None }
        );
        assert_eq!(
            Synthetic::parse("holder_profile(0.6, 9)").unwrap(),
            Synthetic::HolderProfile { alpha: 0.6, seed: Some(9) }
        );
        assert_eq!(Synthetic::parse("gaussian_bump(0.4)").unwrap(), Synthetic::GaussianBump { width: 0.4 });
        for bad in ["spiral(1)", "single_mode(x)", "holder_profile(1/4", "gaussian_bump()", "holder_profile(a, 1)"] {
            assert!(matches!(Synthetic::parse(bad), Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn single_mode_pads_to_the_grid_dimension() {
        let grid = Grid::new(3, 16).unwrap();
        let f = Synthetic::SingleMode(vec![2]).build(grid, 0).unwrap();
        assert_eq!(f.coeff(&[2, 0, 0]).re, 0.5);
        assert_eq!(f.coeff(&[-2, 0, 0]).re, 0.5);
    }

    #[test]
    fn holder_profile_uses_the_run_seed_unless_given_one() {
        let grid = Grid::new(2, 32).unwrap();
        let implicit = Synthetic::HolderProfile { alpha: 0.25, seed: None };
        let explicit = Synthetic::HolderProfile { alpha: 0.25, seed: Some(3) };
        assert_eq!(implicit.build(grid, 3).unwrap(), explicit.build(grid, 99).unwrap());
        assert_ne!(implicit.build(grid, 3).unwrap(), implicit.build(grid, 4).unwrap());
    }

    #[test]
    fn defaults_and_exponents_deserialize() {
        let cfg = LoadedConfig::from_bytes(
            br#"{"grid": {"d": 2, "n": 32}, "solver": {"p_list": [2, "inf"], "T_end": 0.5}}"#,
            Path::new("."),
        )
        .unwrap();
        assert_eq!(cfg.grid().unwrap(), Grid::new(2, 32).unwrap());
        let s = &cfg.config.solver;
        assert_eq!(s.p_list, vec![2.0, f64::INFINITY]);
        assert_eq!((s.t_end, s.dt, s.cadence), (0.5, 1e-3, 1));
        assert_eq!(cfg.audits(), AuditKind::ALL.to_vec());
        assert_eq!(cfg.sha256.len(), 64);
    }

    #[test]
    fn law_specs_build_laws() {
        let parse = |s: &str| serde_json::from_str::<LawSpec>(s).unwrap();
        assert_eq!(parse(r#"{"law": "sqg"}"#).law(2).unwrap(), Some(DriftLaw::Sqg));
        assert_eq!(parse(r#"{"law": "none"}"#).drift(2).unwrap(), Drift::Off);
        assert_eq!(
            parse(r#"{"law": "uniform", "velocity": [1, 0]}"#).drift(2).unwrap(),
            Drift::Uniform(vec![1.0, 0.0])
        );
        assert!(parse(r#"{"law": "uniform", "velocity": [1]}"#).drift(2).is_err());
        assert!(parse(r#"{"law": "modified_sqg", "beta": 2.5}"#).law(2).is_err());
        let preset = parse(r#"{"law": "general_cz", "matrix": "riesz_antisymmetric"}"#).law(2).unwrap();
        let rows = parse(r#"{"law": "general_cz", "name": "riesz_antisymmetric",
                             "matrix": [["0", "xi1*xi2/|xi|^2"], ["-(xi1*xi2/|xi|^2)", "0"]]}"#)
        .law(2)
        .unwrap();
        assert_eq!(preset, rows);
        assert!(parse(r#"{"law": "general_cz", "matrix": "riesz_antisymmetric"}"#).law(3).is_ok());
        assert!(parse(r#"{"law": "general_cz", "matrix": [["0", "1"], ["-1", "0"]]}"#).law(3).is_err());
    }
}
