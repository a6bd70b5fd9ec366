//! JSON analysis configs: schema, deserialization with JSON-pointer
//! error reporting, semantic validation, and conversion into the typed
//! analysis setup.
//!
//! Schema versioning is explicit: every document carries
//! `"schema": "htb-config/1"`. Seeds are mandatory — no wall-clock
//! seeding — so every report is reproducible from its config alone.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use htb_core::{
    DependenceKind, DiscreteSpectralMeasure, Matrix, RNorm, Scenario, SharingModel,
    SpectralAtom, TailModel, ZeroDegreePolicy,
};

use crate::error::{AppError, AppResult, ValidationIssue};

/// The schema identifier every config document must carry.
pub const SCHEMA: &str = "htb-config/1";

// ---------------------------------------------------------------------
// Wire format (DTOs)
// ---------------------------------------------------------------------

/// Top-level config document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDto {
    /// Must equal [`SCHEMA`].
    pub schema: String,
    /// Marginal tail behavior of the risk factors.
    pub tail: TailDto,
    /// Aggregation norm exponent for the market loss.
    pub r: f64,
    /// How risks are allocated to agents.
    pub sharing: SharingDto,
    /// Extremal dependence between the risk factors.
    pub dependence: DependenceDto,
    /// Tail probability levels, largest first.
    pub gammas: Vec<f64>,
    /// Monte Carlo controls. The seed is mandatory for auditability.
    pub mc: McDto,
    /// Optional output paths (command-line flags take precedence).
    #[serde(default)]
    pub outputs: OutputsDto,
}

/// Power-law margins: survival `P(V_j > t) ~ k_j t^(-alpha)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailDto {
    pub alpha: f64,
    pub k: Vec<f64>,
}

/// Monte Carlo controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McDto {
    /// Number of draws.
    pub n: u64,
    /// Master seed (mandatory; reports must be reproducible).
    pub seed: u64,
}

/// Where reports may be written when no `--out` flag is given.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsDto {
    /// Main report file.
    pub report: Option<PathBuf>,
    /// Raw simulation batches (binary column file), `simulate` only.
    pub batches: Option<PathBuf>,
}

/// Allocation-matrix law.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SharingDto {
    /// One fixed nonnegative matrix.
    Deterministic { matrix: Vec<Vec<f64>> },
    /// Finite mixture of matrices with probabilities summing to one.
    Scenarios { items: Vec<ScenarioDto> },
    /// Random bipartite sharing graph: risk `j` is split equally among
    /// the agents connected to it; edge `(i, j)` is present with
    /// probability `edge_probs[i][j]`.
    Bipartite {
        edge_probs: Vec<Vec<f64>>,
        zero_degree: ZeroDegreeDto,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDto {
    pub probability: f64,
    pub matrix: Vec<Vec<f64>>,
}

/// What to do with a draw in which some risk has no connected agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroDegreeDto {
    /// Keep the draw; the uncovered risk is simply not allocated.
    Drop,
    /// Redraw until every risk has at least one connected agent.
    Resample,
}

/// Extremal dependence between the risk factors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DependenceDto {
    /// Asymptotically independent factors (extremes one at a time).
    Independent,
    /// Comonotone factors (one shared driver).
    Comonotone,
    /// Explicit discrete spectral measure, inline or in a side file.
    Spectral {
        #[serde(default)]
        measure: Option<MeasureDto>,
        #[serde(default)]
        measure_path: Option<PathBuf>,
    },
}

/// Discrete spectral measure on the positive unit sphere.
///
/// `canonical: true` asserts the standardized form (index 1, unit
/// margins) and is taken as-is. Otherwise the measure is read at index
/// `alpha` (which must match the tail model's) and standardized on
/// load; directions not on the unit sphere are projected onto it with
/// the ray mass preserved.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDto {
    pub alpha: f64,
    /// Norm exponent the atom directions are normalized under.
    pub r: f64,
    #[serde(default)]
    pub canonical: bool,
    pub atoms: Vec<AtomDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDto {
    pub direction: Vec<f64>,
    pub mass: f64,
}

impl MeasureDto {
    /// Wire form of a core measure (used when reports embed measures).
    pub fn from_core(m: &DiscreteSpectralMeasure) -> Self {
        MeasureDto {
            alpha: m.alpha(),
            r: m.norm().r(),
            canonical: m.is_canonical(),
            atoms: m
                .atoms()
                .iter()
                .map(|a| AtomDto { direction: a.direction.clone(), mass: a.mass })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------
// Validated setup
// ---------------------------------------------------------------------

/// A fully validated analysis setup with core-typed components.
#[derive(Debug)]
pub struct AnalysisConfig {
    pub tail: TailModel,
    pub norm: RNorm,
    pub model: SharingModel,
    /// The configured dependence; a spectral kind carries the
    /// standardized measure.
    pub dependence: DependenceKind,
    pub gammas: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub outputs: OutputsDto,
}

impl AnalysisConfig {
    /// The standardized spectral measure the configured dependence
    /// corresponds to (reference measures for the two named kinds).
    pub fn canonical_measure(&self) -> AppResult<DiscreteSpectralMeasure> {
        let rho = match &self.dependence {
            DependenceKind::Independent => {
                DiscreteSpectralMeasure::independent(&self.tail, self.norm).canonicalize()?
            }
            DependenceKind::Comonotone => {
                DiscreteSpectralMeasure::dependent(&self.tail, self.norm).canonicalize()?
            }
            DependenceKind::Spectral(rho) => rho.clone(),
        };
        Ok(rho)
    }
}

// ---------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------

/// Read, parse, and validate a config file.
pub fn load_config(path: &Path) -> AppResult<AnalysisConfig> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let dto = parse_config(&text)?;
    build_config(dto, path.parent())
}

/// Parse a config document, reporting decode failures with a JSON
/// pointer to the offending field.
pub fn parse_config(text: &str) -> AppResult<ConfigDto> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        AppError::validation_one(pointer_of(e.path()), e.inner().to_string())
    })
}

/// RFC 6901 pointer for a deserialization error path.
fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => {
                out.push('/');
                out.push_str(&index.to_string());
            }
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { variant } => {
                out.push('/');
                out.push_str(variant);
            }
            Segment::Unknown => {}
        }
    }
    out
}

/// Collects pointer-addressed validation issues.
#[derive(Default)]
struct Issues(Vec<ValidationIssue>);

impl Issues {
    fn push(&mut self, pointer: impl Into<String>, message: impl Into<String>) {
        self.0.push(ValidationIssue::new(pointer, message));
    }

    fn into_result<T>(self, value: T) -> AppResult<T> {
        if self.0.is_empty() {
            Ok(value)
        } else {
            Err(AppError::Validation(self.0))
        }
    }
}

/// Semantic validation and conversion into core types. `base_dir`
/// resolves relative side-file paths (the config file's directory).
pub fn build_config(dto: ConfigDto, base_dir: Option<&Path>) -> AppResult<AnalysisConfig> {
    let mut issues = Issues::default();

    if dto.schema != SCHEMA {
        issues.push(
            "/schema",
            format!("unsupported schema {:?}; this build reads {SCHEMA:?}", dto.schema),
        );
    }

    // Margins.
    if !(dto.tail.alpha.is_finite() && dto.tail.alpha > 0.0) {
        issues.push("/tail/alpha", "tail index must be finite and > 0");
    }
    if dto.tail.k.is_empty() {
        issues.push("/tail/k", "at least one marginal scale is required");
    }
    for (j, &k) in dto.tail.k.iter().enumerate() {
        if !(k.is_finite() && k > 0.0) {
            issues.push(format!("/tail/k/{j}"), "marginal scale must be finite and > 0");
        }
    }

    // Aggregation norm.
    if !(dto.r.is_finite() && dto.r > 0.0) {
        issues.push("/r", "aggregation exponent must be finite and > 0");
    }

    // Tail levels.
    if dto.gammas.is_empty() {
        issues.push("/gammas", "at least one tail level is required");
    }
    for (i, &g) in dto.gammas.iter().enumerate() {
        if !(g.is_finite() && g > 0.0 && g < 1.0) {
            issues.push(format!("/gammas/{i}"), "tail level must lie strictly inside (0, 1)");
        }
    }

    // Monte Carlo controls.
    if dto.mc.n < 2 {
        issues.push("/mc/n", "at least 2 draws are required");
    }

    let model = build_sharing(&dto.sharing, &mut issues);
    if let Some(m) = &model {
        let (_, d) = m.shape();
        if d != dto.tail.k.len() && !dto.tail.k.is_empty() {
            issues.push(
                "/sharing",
                format!(
                    "allocation has {d} risk columns but /tail/k lists {} scales",
                    dto.tail.k.len()
                ),
            );
        }
    }

    // Tail model (after its fields were vetted above).
    let tail = TailModel::new(dto.tail.alpha, dto.tail.k.clone()).ok();
    let norm = RNorm::new(dto.r).ok();

    let dependence = match &tail {
        Some(tail) => build_dependence(&dto.dependence, tail, base_dir, &mut issues),
        None => None,
    };

    match (tail, norm, model, dependence) {
        (Some(tail), Some(norm), Some(model), Some(dependence)) => {
            let cfg = AnalysisConfig {
                tail,
                norm,
                model,
                dependence,
                gammas: dto.gammas.clone(),
                n: dto.mc.n as usize,
                seed: dto.mc.seed,
                outputs: dto.outputs.clone(),
            };
            issues.into_result(cfg)
        }
        _ => {
            debug_assert!(!issues.0.is_empty(), "missing component without an issue");
            issues.into_result(()).map(|()| unreachable!("validated empty config"))
        }
    }
}

fn build_matrix(rows: &[Vec<f64>], pointer: &str, issues: &mut Issues) -> Option<Matrix> {
    if rows.is_empty() {
        issues.push(pointer, "matrix needs at least one row");
        return None;
    }
    let cols = rows[0].len();
    if cols == 0 {
        issues.push(format!("{pointer}/0"), "matrix rows must be nonempty");
        return None;
    }
    let mut ok = true;
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            issues.push(
                format!("{pointer}/{i}"),
                format!("ragged matrix: row has {} entries, row 0 has {cols}", row.len()),
            );
            ok = false;
            continue;
        }
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                issues.push(
                    format!("{pointer}/{i}/{j}"),
                    "matrix entries must be finite and >= 0",
                );
                ok = false;
            }
        }
    }
    if !ok {
        return None;
    }
    let data: Vec<f64> = rows.iter().flatten().copied().collect();
    match Matrix::from_flat(rows.len(), cols, data) {
        Ok(m) => Some(m),
        Err(e) => {
            issues.push(pointer, e.to_string());
            None
        }
    }
}

fn build_sharing(dto: &SharingDto, issues: &mut Issues) -> Option<SharingModel> {
    match dto {
        SharingDto::Deterministic { matrix } => {
            let m = build_matrix(matrix, "/sharing/matrix", issues)?;
            match SharingModel::deterministic(m) {
                Ok(model) => Some(model),
                Err(e) => {
                    issues.push("/sharing/matrix", e.to_string());
                    None
                }
            }
        }
        SharingDto::Scenarios { items } => {
            if items.is_empty() {
                issues.push("/sharing/items", "at least one scenario is required");
                return None;
            }
            let mut scenarios = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                if !(item.probability.is_finite() && item.probability > 0.0) {
                    issues.push(
                        format!("/sharing/items/{i}/probability"),
                        "scenario probability must be finite and > 0",
                    );
                }
                if let Some(m) =
                    build_matrix(&item.matrix, &format!("/sharing/items/{i}/matrix"), issues)
                {
                    scenarios.push(Scenario { matrix: m, probability: item.probability });
                }
            }
            if scenarios.len() != items.len() {
                return None;
            }
            match SharingModel::scenarios(scenarios) {
                Ok(model) => Some(model),
                Err(e) => {
                    issues.push("/sharing/items", e.to_string());
                    None
                }
            }
        }
        SharingDto::Bipartite { edge_probs, zero_degree } => {
            let m = build_matrix(edge_probs, "/sharing/edge_probs", issues)?;
            for i in 0..m.rows() {
                for (j, &p) in m.row(i).iter().enumerate() {
                    if p > 1.0 {
                        issues.push(
                            format!("/sharing/edge_probs/{i}/{j}"),
                            "edge probabilities must lie in [0, 1]",
                        );
                        return None;
                    }
                }
            }
            let policy = match zero_degree {
                ZeroDegreeDto::Drop => ZeroDegreePolicy::Drop,
                ZeroDegreeDto::Resample => ZeroDegreePolicy::Resample,
            };
            match SharingModel::bipartite(m, policy) {
                Ok(model) => Some(model),
                Err(e) => {
                    issues.push("/sharing/edge_probs", e.to_string());
                    None
                }
            }
        }
    }
}

fn build_dependence(
    dto: &DependenceDto,
    tail: &TailModel,
    base_dir: Option<&Path>,
    issues: &mut Issues,
) -> Option<DependenceKind> {
    match dto {
        DependenceDto::Independent => Some(DependenceKind::Independent),
        DependenceDto::Comonotone => Some(DependenceKind::Comonotone),
        DependenceDto::Spectral { measure, measure_path } => {
            let dto = match (measure, measure_path) {
                (Some(m), None) => m.clone(),
                (None, Some(p)) => {
                    let resolved = match base_dir {
                        Some(dir) if p.is_relative() => dir.join(p),
                        _ => p.clone(),
                    };
                    let text = match fs::read_to_string(&resolved) {
                        Ok(t) => t,
                        Err(e) => {
                            issues.push(
                                "/dependence/measure_path",
                                format!("cannot read {}: {e}", resolved.display()),
                            );
                            return None;
                        }
                    };
                    let mut de = serde_json::Deserializer::from_str(&text);
                    match serde_path_to_error::deserialize::<_, MeasureDto>(&mut de) {
                        Ok(m) => m,
                        Err(e) => {
                            issues.push(
                                format!("/dependence/measure_path{}", pointer_of(e.path())),
                                format!("in {}: {}", resolved.display(), e.inner()),
                            );
                            return None;
                        }
                    }
                }
                (Some(_), Some(_)) => {
                    issues.push(
                        "/dependence",
                        "give either measure or measure_path, not both",
                    );
                    return None;
                }
                (None, None) => {
                    issues.push(
                        "/dependence",
                        "spectral dependence needs a measure or a measure_path",
                    );
                    return None;
                }
            };
            build_measure(&dto, tail, "/dependence/measure", issues)
                .map(DependenceKind::Spectral)
        }
    }
}

/// Convert a measure document into a standardized core measure.
fn build_measure(
    dto: &MeasureDto,
    tail: &TailModel,
    pointer: &str,
    issues: &mut Issues,
) -> Option<DiscreteSpectralMeasure> {
    if !(dto.r.is_finite() && dto.r > 0.0) {
        issues.push(format!("{pointer}/r"), "norm exponent must be finite and > 0");
        return None;
    }
    let norm = RNorm::new(dto.r).ok()?;
    if dto.canonical {
        if dto.alpha != 1.0 {
            issues.push(
                format!("{pointer}/alpha"),
                "a canonical (standardized) measure has index 1",
            );
            return None;
        }
    } else {
        let rel = (dto.alpha - tail.alpha()).abs() / tail.alpha().max(1.0);
        if rel > 1e-12 {
            issues.push(
                format!("{pointer}/alpha"),
                format!(
                    "raw measure index {} must match /tail/alpha = {}",
                    dto.alpha,
                    tail.alpha()
                ),
            );
            return None;
        }
    }
    if dto.atoms.is_empty() {
        issues.push(format!("{pointer}/atoms"), "at least one atom is required");
        return None;
    }
    let d = tail.dim();
    let mut atoms = Vec::with_capacity(dto.atoms.len());
    for (i, atom) in dto.atoms.iter().enumerate() {
        if atom.direction.len() != d {
            issues.push(
                format!("{pointer}/atoms/{i}/direction"),
                format!("direction has {} coordinates, /tail/k lists {d}", atom.direction.len()),
            );
            return None;
        }
        if atom.direction.iter().any(|&x| !x.is_finite() || x < 0.0)
            || atom.direction.iter().all(|&x| x == 0.0)
        {
            issues.push(
                format!("{pointer}/atoms/{i}/direction"),
                "direction coordinates must be finite, >= 0, and not all zero",
            );
            return None;
        }
        if !(atom.mass.is_finite() && atom.mass > 0.0) {
            issues.push(format!("{pointer}/atoms/{i}/mass"), "mass must be finite and > 0");
            return None;
        }
        let len = norm.eval(&atom.direction);
        if dto.canonical || (len - 1.0).abs() <= 1e-12 {
            atoms.push(SpectralAtom::new(atom.direction.clone(), atom.mass));
        } else {
            // Project onto the sphere, preserving the ray's tail mass.
            log::info!(
                "measure atom {i}: direction off the unit sphere (|.|_r = {len}); \
                 projecting and rescaling its mass"
            );
            let direction: Vec<f64> = atom.direction.iter().map(|&x| x / len).collect();
            atoms.push(SpectralAtom::new(direction, atom.mass * len.powf(dto.alpha)));
        }
    }
    let raw = match DiscreteSpectralMeasure::new(dto.alpha, norm, atoms, dto.canonical) {
        Ok(m) => m,
        Err(e) => {
            issues.push(pointer, e.to_string());
            return None;
        }
    };
    if dto.canonical {
        return Some(raw);
    }
    // Standardize. The input margins are then discarded in favor of
    // /tail/k (the sampler and the constants reinstate the scales), so
    // flag any disagreement loudly — it usually means the measure and
    // the tail model describe different vectors.
    let margins = raw.margins();
    for (j, (&m, &k)) in margins.iter().zip(tail.scales()).enumerate() {
        if (m - k).abs() > 1e-9 * k.max(1.0) {
            log::warn!(
                "measure margin {j} is {m} but /tail/k/{j} is {k}; \
                 standardization keeps the tail-model scales"
            );
        }
    }
    match raw.canonicalize() {
        Ok(c) => Some(c),
        Err(e) => {
            issues.push(pointer, e.to_string());
            None
        }
    }
}
