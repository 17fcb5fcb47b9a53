//! Experiment configuration: TOML on disk, validated into library objects.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use friedrichs::families::{self, DEFAULT_BUMP_SHARPNESS};
use friedrichs::grid::{make_grid, GridFunction, GridSpec};
use friedrichs::localization::{make_localization, LocalizationProfile, ProfileKind};
use friedrichs::resolvent::FiniteRankModel;

use crate::CliError;

/// Decay exponent below which the long-time estimates lose their footing.
pub const MU_FOR_TIME_DELAY: f64 = 5.0;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub model: ModelSection,
    #[serde(default)]
    pub localization: Option<LocalizationSection>,
    #[serde(default)]
    pub state: Option<StateSection>,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "M")]
    pub points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "N")]
    pub rank: usize,
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub vectors: Vec<VectorSpec>,
    /// Sobolev order the vectors are declared to have.
    #[serde(default = "default_mu")]
    pub mu: f64,
    /// Gram-Schmidt the vectors before use.
    #[serde(default)]
    pub orthonormalize: bool,
}

fn default_mu() -> f64 {
    10.0
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VectorSpec {
    Gaussian {
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        width: f64,
    },
    Hermite {
        n: usize,
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        width: f64,
    },
    /// `c (x − node) e^{−x²/2}`, normalized.
    Nodal { node: f64 },
    /// Samples from a CSV file with columns `x, re[, im]`.
    Tabulated { file: PathBuf },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LocalizationSection {
    Indicator {
        #[serde(default = "one")]
        half_width: f64,
    },
    SmoothBump { delta: f64, width: f64, rho: f64 },
    Trapezoid { delta: f64, width: f64 },
}

// `flatten` rules out `deny_unknown_fields` here
#[derive(Debug, Deserialize)]
pub struct StateSection {
    #[serde(flatten)]
    pub family: StateFamily,
    /// Interval outside which the state vanishes; defaults to the bump's
    /// own support.
    #[serde(default)]
    pub support: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum StateFamily {
    Bump {
        center: f64,
        half_width: f64,
        #[serde(default = "default_sharpness")]
        sharpness: f64,
    },
    Gaussian {
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        k0: f64,
    },
}

fn default_sharpness() -> f64 {
    DEFAULT_BUMP_SHARPNESS
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Must match the subcommand when given.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub energy_range: Option<[f64; 2]>,
    #[serde(default = "default_energy_points")]
    pub energy_points: usize,
    #[serde(default = "default_r_list")]
    pub r_list: Vec<f64>,
    /// Energies scanned for eigenvalues.
    #[serde(default = "default_scan")]
    pub scan_range: [f64; 2],
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
    #[serde(default)]
    pub wave_method: WaveMethodName,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sojourn: SojournSection,
}

/// Overrides for the time-domain sojourn quadrature.
#[derive(Debug, Default, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct SojournSection {
    pub margin: Option<f64>,
    pub extent_tol: Option<f64>,
    pub packet_tol: Option<f64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            name: None,
            energy_range: None,
            energy_points: default_energy_points(),
            r_list: default_r_list(),
            scan_range: default_scan(),
            scan_points: default_scan_points(),
            wave_method: WaveMethodName::default(),
            tolerances: Tolerances::default(),
            sojourn: SojournSection::default(),
        }
    }
}

fn default_energy_points() -> usize {
    1001
}
fn default_r_list() -> Vec<f64> {
    vec![4.0, 8.0, 16.0, 32.0, 64.0]
}
fn default_scan() -> [f64; 2] {
    [-4.0, 4.0]
}
fn default_scan_points() -> usize {
    401
}

#[derive(Debug, Default, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum WaveMethodName {
    #[default]
    Dressing,
    Cook,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub unitarity: f64,
    pub formula_agreement: f64,
    pub birman_krein: f64,
    pub rel_gap: f64,
    pub wave: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unitarity: 1e-8,
            formula_agreement: 1e-8,
            birman_krein: 1e-6,
            rel_gap: 0.02,
            wave: 1e-4,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_precision")]
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: None,
            precision: default_precision(),
        }
    }
}

fn default_precision() -> usize {
    12
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::validation(format!("{field}: {msg}"))
}

pub fn load(path: &Path) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: ExperimentConfig =
        toml::from_str(&text).map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

/// A state with its declared energy support, if it has one.
pub type StateWithSupport = (GridFunction, Option<(f64, f64)>);

/// Library objects assembled from a validated configuration.
pub struct Assembled {
    pub spec: GridSpec,
    pub model: FiniteRankModel,
    pub profile: Option<LocalizationProfile>,
    pub state: Option<StateWithSupport>,
    pub warnings: Vec<String>,
}

fn read_table(path: &Path) -> Result<Vec<(f64, Complex64)>, CliError> {
    let field = "model.vectors.file";
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| invalid(field, format!("{}: {e}", path.display())))?;
    let mut table = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| invalid(field, e))?;
        let num = |i: usize| -> Result<f64, CliError> {
            row.get(i)
                .unwrap_or("0")
                .parse::<f64>()
                .map_err(|e| invalid(field, format!("{} row {}: {e}", path.display(), line + 1)))
        };
        if row.len() < 2 {
            return Err(invalid(field, format!("{} row {} needs x and re columns", path.display(), line + 1)));
        }
        table.push((num(0)?, Complex64::new(num(1)?, num(2)?)));
    }
    Ok(table)
}

pub fn assemble(cfg: &ExperimentConfig, base: &Path) -> Result<Assembled, CliError> {
    let spec = make_grid(cfg.grid.half_width, cfg.grid.points).map_err(|e| invalid("grid", e))?;
    let mut warnings = Vec::new();

    let m = &cfg.model;
    if m.lambdas.len() != m.rank {
        return Err(invalid("model.lambdas", format!("has {} entries but N = {}", m.lambdas.len(), m.rank)));
    }
    if m.vectors.len() != m.rank {
        return Err(invalid("model.vectors", format!("has {} entries but N = {}", m.vectors.len(), m.rank)));
    }
    let l = spec.half_width();
    let mut vectors = Vec::with_capacity(m.rank);
    for (j, v) in m.vectors.iter().enumerate() {
        let g = match v {
            VectorSpec::Gaussian { center, width } => {
                check_inside(&format!("model.vectors[{j}].center"), *center, l)?;
                families::gaussian(spec, *center, *width)
            }
            VectorSpec::Hermite { n, center, width } => {
                check_inside(&format!("model.vectors[{j}].center"), *center, l)?;
                families::hermite(spec, *n, *center, *width)
            }
            VectorSpec::Nodal { node } => families::nodal_gaussian(spec, *node),
            VectorSpec::Tabulated { file } => {
                let path = if file.is_absolute() { file.clone() } else { base.join(file) };
                families::tabulated(spec, &read_table(&path)?).map_err(|e| invalid(&format!("model.vectors[{j}]"), e))?
            }
        };
        vectors.push(g);
    }
    if m.orthonormalize {
        vectors = families::orthonormalize(&vectors).map_err(|e| invalid("model.vectors", e))?;
    }
    let model = FiniteRankModel::new(spec, m.lambdas.clone(), vectors, m.mu).map_err(|e| invalid("model", e))?;
    if m.mu < MU_FOR_TIME_DELAY {
        warnings.push(format!(
            "model.mu = {} is below {MU_FOR_TIME_DELAY}; time-delay limits are not guaranteed",
            m.mu
        ));
    }
    if m.mu < 3.0 {
        warnings.push(format!("model.mu = {} is below 3; second-order boundary values assume mu >= 3", m.mu));
    }

    let profile = cfg
        .localization
        .as_ref()
        .map(|loc| {
            let kind = match *loc {
                LocalizationSection::Indicator { half_width } => ProfileKind::Indicator {
                    lo: -half_width,
                    hi: half_width,
                },
                LocalizationSection::SmoothBump { delta, width, rho } => ProfileKind::SmoothBump { delta, width, rho },
                LocalizationSection::Trapezoid { delta, width } => ProfileKind::Trapezoid { delta, width },
            };
            make_localization(kind).map_err(|e| invalid("localization", e))
        })
        .transpose()?;

    let state = cfg
        .state
        .as_ref()
        .map(|s| -> Result<_, CliError> {
            let (phi, natural) = match s.family {
                StateFamily::Bump {
                    center,
                    half_width,
                    sharpness,
                } => {
                    if !(half_width > 0.0) || !(sharpness > 0.0) {
                        return Err(invalid("state", "half_width and sharpness must be positive"));
                    }
                    (
                        families::bump(spec, center, half_width, sharpness),
                        Some((center - half_width, center + half_width)),
                    )
                }
                StateFamily::Gaussian { center, width, k0 } => {
                    if !(width > 0.0) {
                        return Err(invalid("state.width", "must be positive"));
                    }
                    (families::gaussian_packet(spec, center, width, k0), None)
                }
            };
            let support = s.support.map(|[a, b]| (a, b)).or(natural);
            let margin = 10.0 * spec.spacing();
            if let Some((a, b)) = support {
                if !(a < b) || a <= -l + margin || b >= l - margin {
                    return Err(invalid(
                        "state.support",
                        format!("[{a}, {b}] must be a nonempty interval inside the box with margin {margin}"),
                    ));
                }
            }
            Ok((phi, support))
        })
        .transpose()?;

    let e = &cfg.experiment;
    if let Some([a, b]) = e.energy_range {
        if !(a < b) || a <= -l || b >= l {
            return Err(invalid("experiment.energy_range", format!("[{a}, {b}] must lie inside (-{l}, {l})")));
        }
    }
    if e.energy_points < 2 {
        return Err(invalid("experiment.energy_points", "need at least 2"));
    }
    if e.r_list.is_empty() || e.r_list.iter().any(|r| !(*r > 0.0)) {
        return Err(invalid("experiment.r_list", "must be a nonempty list of positive scales"));
    }
    if cfg.output.precision == 0 || cfg.output.precision > 17 {
        return Err(invalid("output.precision", "must be between 1 and 17 significant digits"));
    }
    Ok(Assembled {
        spec,
        model,
        profile,
        state,
        warnings,
    })
}

fn check_inside(field: &str, x: f64, l: f64) -> Result<(), CliError> {
    if x.abs() < l {
        Ok(())
    } else {
        Err(invalid(field, format!("{x} lies outside (-{l}, {l})")))
    }
}

impl Assembled {
    pub fn require_profile(&self) -> Result<&LocalizationProfile, CliError> {
        self.profile.as_ref().ok_or_else(|| invalid("localization", "section is required for this experiment"))
    }

    pub fn require_state(&self) -> Result<&StateWithSupport, CliError> {
        self.state.as_ref().ok_or_else(|| invalid("state", "section is required for this experiment"))
    }
}
