//! Monte Carlo sampling of losses with exact power tails, empirical tail
//! estimators, and convergence studies against the asymptotic constants.
//!
//! Every sampler here produces marginals satisfying
//! `P(V_j > t) = K_j t^(-alpha)` *exactly* for `t` above a finite
//! threshold (no asymptotic slack), so empirical tail ratios converge to
//! the predicted constants with plain binomial noise:
//!
//! * independent — `V_j = K_j^(1/alpha) R_j` with i.i.d. standard Pareto
//!   `R_j`;
//! * comonotone — the same with one shared `R`;
//! * spectral — a one-radius mixture over the atoms of a canonical
//!   measure: pick atom `k` with probability `M_k / sum(M)`, then
//!   `V = R * ray_k` where `ray_k` folds the total mass, the atom
//!   direction (raised coordinatewise to `1/alpha`), and an exact margin
//!   correction `(K_j / c_j)^(1/alpha)`.
//!
//! Generation is split into fixed-size chunks with per-chunk derived
//! seeds; merging chunks in index order reproduces the sequential output
//! bit for bit, so external drivers may compute chunks in parallel
//! without changing any result.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::bounds::{BoundCheck, Relation};
use crate::constants::{
    cote_asymptotic, dependent_constants, independent_constants, spectral_constants,
    var_asymptotic, RiskConstants,
};
use crate::error::{Error, Result};
use crate::fmath;
use crate::matrix::Matrix;
use crate::measure::DiscreteSpectralMeasure;
use crate::norm::RNorm;
use crate::rng::{derive_seed, rng_from, standard_pareto};
use crate::sharing::{EvalMethod, SharingModel};
use crate::tail::TailModel;

/// Draws per generation chunk. Chunk boundaries are part of the sampler
/// contract: each chunk owns a derived seed, so any scheduler that
/// assembles chunks in index order reproduces the sequential stream.
pub const CHUNK: usize = 1 << 16;

/// Bootstrap resamples used for standard errors.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

const SALT_V: u64 = 0x5349_4d5f_56; // "SIM_V"
const SALT_F: u64 = 0x5349_4d5f_46; // "SIM_F"
const SALT_CONSTANTS: u64 = 0xc0;
const SALT_BOOTSTRAP: u64 = 0x424f_4f54; // "BOOT"

/// Extremal or spectral dependence between the loss factors.
#[derive(Debug, Clone, PartialEq)]
pub enum DependenceKind {
    /// Asymptotically independent factors.
    Independent,
    /// Comonotone factors (one shared shock).
    Comonotone,
    /// Extremal dependence prescribed by a canonical spectral measure.
    Spectral(DiscreteSpectralMeasure),
}

impl DependenceKind {
    /// Short lowercase tag for labels and fingerprints.
    pub fn label(&self) -> &'static str {
        match self {
            DependenceKind::Independent => "independent",
            DependenceKind::Comonotone => "comonotone",
            DependenceKind::Spectral(_) => "spectral",
        }
    }
}

/// A complete description of the law of `V`: marginal tails plus
/// dependence.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceSpec {
    kind: DependenceKind,
    tail: TailModel,
}

impl DependenceSpec {
    /// Validate and pair a dependence kind with a marginal tail model.
    pub fn new(kind: DependenceKind, tail: TailModel) -> Result<Self> {
        if let DependenceKind::Spectral(rho) = &kind {
            if !rho.is_canonical() {
                return Err(Error::NotCanonical);
            }
            if rho.dim() != tail.dim() {
                return Err(Error::ShapeMismatch {
                    context: "spectral measure dimension vs. loss factors",
                    expected: tail.dim(),
                    found: rho.dim(),
                });
            }
        }
        Ok(DependenceSpec { kind, tail })
    }

    /// The dependence structure.
    pub fn kind(&self) -> &DependenceKind {
        &self.kind
    }

    /// The marginal tail model.
    pub fn tail(&self) -> &TailModel {
        &self.tail
    }

    /// Stable 64-bit digest of the dependence description (kind, tail
    /// index, scales, and any spectral atoms), used to tie sample
    /// batches back to what generated them.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325; // FNV-1a offset basis
        let mut eat = |bits: u64| {
            for byte in bits.to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x100_0000_01b3);
            }
        };
        eat(match self.kind {
            DependenceKind::Independent => 1,
            DependenceKind::Comonotone => 2,
            DependenceKind::Spectral(_) => 3,
        });
        eat(self.tail.alpha().to_bits());
        eat(self.tail.dim() as u64);
        for &k in self.tail.scales() {
            eat(k.to_bits());
        }
        if let DependenceKind::Spectral(rho) = &self.kind {
            eat(rho.norm().r().to_bits());
            for atom in rho.atoms() {
                eat(atom.mass.to_bits());
                for &c in &atom.direction {
                    eat(c.to_bits());
                }
            }
        }
        h
    }
}

/// Provenance attached to a sample batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchMeta {
    /// What the values are, e.g. `"agent 0"` or `"aggregate"`.
    pub label: String,
    /// Master seed the batch was generated from.
    pub seed: u64,
    /// [`DependenceSpec::fingerprint`] of the generating dependence.
    pub fingerprint: u64,
    /// Tail levels the batch is meant to be evaluated at (informational;
    /// filled by studies or by callers before persisting).
    pub gammas: Vec<f64>,
}

/// One scalar loss sample (a single agent's losses, or the aggregate).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    /// Sampled nonnegative losses, in generation order.
    pub values: Vec<f64>,
    /// Provenance.
    pub meta: BatchMeta,
}

impl SampleBatch {
    /// Number of draws.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Whether the batch holds no draws.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-agent batches plus the aggregate batch from one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimBatches {
    /// One batch per agent, in row order of the sharing model.
    pub agents: Vec<SampleBatch>,
    /// Batch of `||F||_r` values.
    pub aggregate: SampleBatch,
}

/// One contiguous slice of a chunked generation plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkSpec {
    /// Chunk number; also the per-chunk seed stream.
    pub index: u64,
    /// First draw this chunk produces.
    pub start: usize,
    /// Number of draws in this chunk.
    pub len: usize,
}

/// Split `n` draws into the fixed chunk grid.
pub fn chunk_layout(n: usize) -> Vec<ChunkSpec> {
    let mut chunks = Vec::with_capacity(n / CHUNK + 1);
    let mut start = 0;
    let mut index = 0;
    while start < n {
        let len = CHUNK.min(n - start);
        chunks.push(ChunkSpec { index, start, len });
        start += len;
        index += 1;
    }
    chunks
}

/// Precomputed per-draw sampler for `V`.
struct VSampler {
    inv_alpha: f64,
    mode: VMode,
}

enum VMode {
    Independent { roots: Vec<f64> },
    Comonotone { roots: Vec<f64> },
    /// `cum[k]` is the cumulative atom probability; `rays[k]` the scaled
    /// direction so that `V = R * rays[k]`.
    Spectral { cum: Vec<f64>, rays: Vec<Vec<f64>> },
}

impl VSampler {
    fn new(spec: &DependenceSpec) -> Self {
        let alpha = spec.tail.alpha();
        let inv_alpha = 1.0 / alpha;
        let roots = spec.tail.scale_roots();
        let mode = match &spec.kind {
            DependenceKind::Independent => VMode::Independent { roots },
            DependenceKind::Comonotone => VMode::Comonotone { roots },
            DependenceKind::Spectral(rho) => {
                let total = rho.total_mass();
                let margins = rho.margins();
                // Margin correction (K_j / c_j)^(1/alpha) folded together
                // with the total-mass radius scale; using the measure's
                // own margins makes P(V_j > t) = K_j t^(-alpha) exact
                // even under tiny numerical imbalance.
                let factor: Vec<f64> = spec
                    .tail
                    .scales()
                    .iter()
                    .zip(&margins)
                    .map(|(&k, &c)| fmath::powf(k * total / c, inv_alpha))
                    .collect();
                let mut cum = Vec::with_capacity(rho.atoms().len());
                let mut acc = 0.0;
                let mut rays = Vec::with_capacity(rho.atoms().len());
                for atom in rho.atoms() {
                    acc += atom.mass / total;
                    cum.push(acc);
                    rays.push(
                        atom.direction
                            .iter()
                            .zip(&factor)
                            .map(|(&v, &f)| {
                                if v == 0.0 { 0.0 } else { f * fmath::powf(v, inv_alpha) }
                            })
                            .collect(),
                    );
                }
                VMode::Spectral { cum, rays }
            }
        };
        VSampler { inv_alpha, mode }
    }

    fn draw(&self, rng: &mut ChaCha12Rng, out: &mut [f64]) {
        match &self.mode {
            VMode::Independent { roots } => {
                for (slot, &k) in out.iter_mut().zip(roots) {
                    *slot = k * standard_pareto(rng, self.inv_alpha);
                }
            }
            VMode::Comonotone { roots } => {
                let r = standard_pareto(rng, self.inv_alpha);
                for (slot, &k) in out.iter_mut().zip(roots) {
                    *slot = k * r;
                }
            }
            VMode::Spectral { cum, rays } => {
                let u: f64 = rng.gen();
                let mut k = cum.len() - 1;
                for (i, &c) in cum.iter().enumerate() {
                    if u < c {
                        k = i;
                        break;
                    }
                }
                let r = standard_pareto(rng, self.inv_alpha);
                for (slot, &ray) in out.iter_mut().zip(&rays[k]) {
                    *slot = r * ray;
                }
            }
        }
    }
}

/// Sample `n` draws of the factor vector `V` as an `n x d` matrix.
pub fn sample_v(spec: &DependenceSpec, n: usize, seed: u64) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::SampleTooSmall { needed: 1, found: 0 });
    }
    let d = spec.tail.dim();
    let sampler = VSampler::new(spec);
    let mut data = vec![0.0; n * d];
    for chunk in chunk_layout(n) {
        let mut rng = rng_from(derive_seed(derive_seed(seed, SALT_V), chunk.index));
        for row in 0..chunk.len {
            let offset = (chunk.start + row) * d;
            sampler.draw(&mut rng, &mut data[offset..offset + d]);
        }
    }
    Matrix::from_flat(n, d, data)
}

/// Sample one chunk of `F = A V` draws: returns `q + 1` columns of length
/// `chunk.len` (per-agent losses, then the aggregate `||F||_r`).
///
/// The chunk is self-contained — its RNG depends only on `(seed,
/// chunk.index)` — so chunks may be computed in any order or in parallel
/// and assembled by `chunk.start`; the result is identical to the
/// sequential [`sample_f`].
pub fn sample_f_chunk(
    spec: &DependenceSpec,
    model: &SharingModel,
    norm: RNorm,
    chunk: ChunkSpec,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let (q, d) = model.shape();
    if d != spec.tail.dim() {
        return Err(Error::ShapeMismatch {
            context: "allocation columns vs. loss factors",
            expected: spec.tail.dim(),
            found: d,
        });
    }
    let sampler = VSampler::new(spec);
    let fixed = match model {
        SharingModel::Deterministic(a) => Some(a),
        _ => None,
    };
    let mut rng = rng_from(derive_seed(derive_seed(seed, SALT_F), chunk.index));
    let mut columns = vec![Vec::with_capacity(chunk.len); q + 1];
    let mut v = vec![0.0; d];
    let mut f = vec![0.0; q];
    let mut drawn;
    for _ in 0..chunk.len {
        let a = match fixed {
            Some(a) => a,
            None => {
                drawn = model.sample_with(&mut rng)?;
                &drawn
            }
        };
        sampler.draw(&mut rng, &mut v);
        a.mul_vec_into(&v, &mut f);
        for (col, &x) in columns.iter_mut().zip(f.iter()) {
            col.push(x);
        }
        columns[q].push(norm.eval(&f));
    }
    Ok(columns)
}

/// Sample `n` draws of `F = A V`, returning one batch per agent plus the
/// aggregate batch. `A` and `V` are drawn independently of each other.
pub fn sample_f(
    spec: &DependenceSpec,
    model: &SharingModel,
    norm: RNorm,
    n: usize,
    seed: u64,
) -> Result<SimBatches> {
    if n == 0 {
        return Err(Error::SampleTooSmall { needed: 1, found: 0 });
    }
    let (q, _) = model.shape();
    let mut columns: Vec<Vec<f64>> =
        (0..=q).map(|_| Vec::with_capacity(n)).collect();
    for chunk in chunk_layout(n) {
        let part = sample_f_chunk(spec, model, norm, chunk, seed)?;
        for (col, extra) in columns.iter_mut().zip(part) {
            col.extend(extra);
        }
    }
    Ok(assemble_batches(columns, spec, seed))
}

/// Wrap raw columns (q agent columns, then the aggregate) into batches.
/// Columns must all have equal length, as produced by
/// [`sample_f_chunk`] assembled in chunk order.
pub fn assemble_batches(
    mut columns: Vec<Vec<f64>>,
    spec: &DependenceSpec,
    seed: u64,
) -> SimBatches {
    let fingerprint = spec.fingerprint();
    let aggregate_values = columns.pop().expect("columns include the aggregate");
    let meta = |label: String| BatchMeta {
        label,
        seed,
        fingerprint,
        gammas: Vec::new(),
    };
    let agents = columns
        .into_iter()
        .enumerate()
        .map(|(i, values)| SampleBatch { values, meta: meta(format!("agent {i}")) })
        .collect();
    SimBatches {
        agents,
        aggregate: SampleBatch {
            values: aggregate_values,
            meta: meta(String::from("aggregate")),
        },
    }
}

/// 1-indexed order-statistic position for the level-`gamma` upper
/// quantile of `n` sorted values: the smallest sample point whose
/// empirical exceedance probability is at most `gamma`.
fn quantile_index(n: usize, gamma: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) || !gamma.is_finite() {
        return Err(Error::InvalidGamma { gamma });
    }
    if n == 0 {
        return Err(Error::SampleTooSmall { needed: 1, found: 0 });
    }
    let nf = n as f64;
    if nf * gamma < 20.0 {
        log::warn!(
            "tail undersampled: n * gamma = {:.3} < 20; the level-{} estimate will be noisy",
            nf * gamma,
            gamma
        );
    }
    // floor(n * gamma) exceedances are allowed above the quantile; the
    // epsilon nudge keeps decimal gammas (e.g. 0.05 * 100) from landing
    // one ulp below their intended integer product.
    let m = (fmath::floor(nf * gamma + 1e-9) as usize).min(n - 1);
    Ok(n - m)
}

/// Empirical Value-at-Risk at confidence `1 - gamma`: the order statistic
/// `x_(ceil(n (1 - gamma)))` of the batch.
pub fn empirical_var(batch: &SampleBatch, gamma: f64) -> Result<f64> {
    let k = quantile_index(batch.values.len(), gamma)?;
    let mut copy = batch.values.clone();
    let (_, v, _) = copy.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*v)
}

/// Empirical conditional tail expectation at confidence `1 - gamma`: the
/// mean of the values strictly exceeding the empirical Value-at-Risk.
pub fn empirical_cote(batch: &SampleBatch, gamma: f64) -> Result<f64> {
    let threshold = empirical_var(batch, gamma)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for &x in &batch.values {
        if x > threshold {
            sum += x;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyTail);
    }
    Ok(sum / count as f64)
}

/// Which tail functional a row of a study refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMetric {
    /// Value-at-Risk.
    Var,
    /// Conditional tail expectation.
    Cote,
}

impl TailMetric {
    /// Lowercase tag used in reports.
    pub fn label(self) -> &'static str {
        match self {
            TailMetric::Var => "var",
            TailMetric::Cote => "cote",
        }
    }
}

/// Bootstrap summary of the two tail functionals at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBootstrap {
    /// Point estimate of the Value-at-Risk (from the original sample).
    pub var: f64,
    /// Bootstrap standard error of the Value-at-Risk.
    pub var_std_error: f64,
    /// Point estimate of the conditional tail expectation, when the
    /// exceedance set is nonempty.
    pub cote: Option<f64>,
    /// Bootstrap standard error of the conditional tail expectation.
    pub cote_std_error: Option<f64>,
    /// Resamples used.
    pub resamples: usize,
}

/// Reusable tail estimator over one sorted sample.
#[derive(Debug, Clone)]
pub struct TailEstimator {
    sorted: Vec<f64>,
}

impl TailEstimator {
    /// Sort and hold a sample. Rejects empty input and non-finite values.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::SampleTooSmall { needed: 1, found: 0 });
        }
        if let Some(&bad) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "values",
                value: bad,
                constraint: "sample values must be finite",
            });
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(TailEstimator { sorted: values })
    }

    /// Estimator over a batch's values.
    pub fn from_batch(batch: &SampleBatch) -> Result<Self> {
        TailEstimator::new(batch.values.clone())
    }

    /// Number of sample points.
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    /// Whether the sample is empty (never true for a constructed
    /// estimator).
    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Empirical Value-at-Risk at confidence `1 - gamma`.
    pub fn var(&self, gamma: f64) -> Result<f64> {
        let k = quantile_index(self.sorted.len(), gamma)?;
        Ok(self.sorted[k - 1])
    }

    /// Empirical conditional tail expectation at confidence `1 - gamma`.
    pub fn cote(&self, gamma: f64) -> Result<f64> {
        let k = quantile_index(self.sorted.len(), gamma)?;
        let threshold = self.sorted[k - 1];
        let first = self.sorted.partition_point(|&x| x <= threshold);
        if first == self.sorted.len() {
            return Err(Error::EmptyTail);
        }
        let tail = &self.sorted[first..];
        Ok(tail.iter().sum::<f64>() / tail.len() as f64)
    }

    /// Bootstrap both tail functionals at one level.
    ///
    /// Each resample's upper order statistics are generated directly as
    /// descending uniform order statistics mapped through the empirical
    /// quantile function, costing `O(n * gamma)` per resample instead of
    /// `O(n)` — exact, not an approximation.
    pub fn bootstrap(&self, gamma: f64, resamples: usize, seed: u64) -> Result<TailBootstrap> {
        if resamples < 2 {
            return Err(Error::SampleTooSmall { needed: 2, found: resamples });
        }
        let n = self.sorted.len();
        let k = quantile_index(n, gamma)?;
        let nf = n as f64;
        let point_var = self.sorted[k - 1];
        let point_cote = match self.cote(gamma) {
            Ok(c) => Some(c),
            Err(Error::EmptyTail) => None,
            Err(e) => return Err(e),
        };
        let mut rng = rng_from(derive_seed(seed, SALT_BOOTSTRAP));
        let mut var_reps = Vec::with_capacity(resamples);
        let mut cote_reps = Vec::with_capacity(resamples);
        let mut tail_buf: Vec<f64> = Vec::with_capacity(n - k + 1);
        for _ in 0..resamples {
            tail_buf.clear();
            let mut u = 1.0f64;
            let mut rep_var = 0.0;
            for j in (k..=n).rev() {
                let w: f64 = rng.sample(rand::distributions::OpenClosed01);
                u *= fmath::powf(w, 1.0 / j as f64);
                let pos = (fmath::ceil(nf * u) as usize).clamp(1, n);
                let y = self.sorted[pos - 1];
                if j == k {
                    rep_var = y;
                } else {
                    tail_buf.push(y);
                }
            }
            var_reps.push(rep_var);
            let mut sum = 0.0;
            let mut count = 0usize;
            for &y in &tail_buf {
                if y > rep_var {
                    sum += y;
                    count += 1;
                }
            }
            if count > 0 {
                cote_reps.push(sum / count as f64);
            }
        }
        let cote_std_error = if point_cote.is_some() && cote_reps.len() >= 2 {
            Some(std_dev(&cote_reps))
        } else {
            None
        };
        Ok(TailBootstrap {
            var: point_var,
            var_std_error: std_dev(&var_reps),
            cote: point_cote,
            cote_std_error,
            resamples,
        })
    }
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    fmath::sqrt(var)
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// Tail level.
    pub gamma: f64,
    /// Which batch, e.g. `"agent 0"` or `"aggregate"`.
    pub target: String,
    /// Which functional.
    pub metric: TailMetric,
    /// Empirical estimate.
    pub empirical: f64,
    /// Asymptotic prediction from the tail constant (`None` for the
    /// conditional tail expectation when `alpha <= 1`).
    pub asymptotic: Option<f64>,
    /// `empirical / asymptotic`.
    pub ratio: Option<f64>,
    /// Bootstrap standard error of the empirical estimate.
    pub std_error: Option<f64>,
}

/// Empirical-to-asymptotic comparison across a gamma grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    /// Tail index.
    pub alpha: f64,
    /// Aggregation norm exponent.
    pub r: f64,
    /// Draws per batch.
    pub n: usize,
    /// Master seed.
    pub seed: u64,
    /// Constants the asymptotic predictions come from (matching the
    /// spec's dependence kind).
    pub constants: RiskConstants,
    /// One row per (gamma, target, metric).
    pub rows: Vec<ConvergenceRow>,
}

/// Simulate `F = A V` and compare empirical tail functionals against
/// their asymptotic predictions over a strictly decreasing gamma grid.
///
/// Constants are computed exactly when the sharing model's support can
/// be enumerated, otherwise by Monte Carlo over matrix draws.
pub fn convergence_study(
    spec: &DependenceSpec,
    model: &SharingModel,
    norm: RNorm,
    gammas: &[f64],
    n: usize,
    seed: u64,
) -> Result<ConvergenceStudy> {
    validate_gamma_grid(gammas)?;
    let batches = sample_f(spec, model, norm, n, seed)?;
    convergence_study_on(&batches, spec, model, norm, gammas)
}

fn validate_gamma_grid(gammas: &[f64]) -> Result<()> {
    for &g in gammas {
        if !(g > 0.0 && g < 1.0) || !g.is_finite() {
            return Err(Error::InvalidGamma { gamma: g });
        }
    }
    if gammas.is_empty() {
        return Err(Error::UnorderedGammaGrid);
    }
    for pair in gammas.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::UnorderedGammaGrid);
        }
    }
    Ok(())
}

/// The analysis half of [`convergence_study`], applied to pre-sampled
/// batches — typically ones produced chunk-parallel and merged in chunk
/// order, which are bit-identical to a serial [`sample_f`] run. The
/// batches must have been generated from this same `(spec, model, norm)`
/// triple; the master seed is recovered from the batch metadata so
/// bootstrap draws match the single-call route exactly.
pub fn convergence_study_on(
    batches: &SimBatches,
    spec: &DependenceSpec,
    model: &SharingModel,
    norm: RNorm,
    gammas: &[f64],
) -> Result<ConvergenceStudy> {
    validate_gamma_grid(gammas)?;
    let (q, _) = model.shape();
    if batches.agents.len() != q {
        return Err(Error::ShapeMismatch {
            context: "batch count vs. sharing-model agents",
            expected: q,
            found: batches.agents.len(),
        });
    }
    let n = batches.aggregate.values.len();
    let seed = batches.aggregate.meta.seed;
    let alpha = spec.tail.alpha();
    let method = if model.supports_exact() {
        EvalMethod::Exact
    } else {
        EvalMethod::MonteCarlo { n: 100_000, seed: derive_seed(seed, SALT_CONSTANTS) }
    };
    let constants = match &spec.kind {
        DependenceKind::Independent => independent_constants(model, &spec.tail, norm, method)?,
        DependenceKind::Comonotone => dependent_constants(model, &spec.tail, norm, method)?,
        DependenceKind::Spectral(rho) => {
            spectral_constants(model, &spec.tail, rho, norm, method)?
        }
    };
    let mut rows = Vec::new();
    let mut targets: Vec<(&SampleBatch, f64)> = batches
        .agents
        .iter()
        .enumerate()
        .map(|(i, b)| (b, constants.per_agent[i].value))
        .collect();
    targets.push((&batches.aggregate, constants.market.value));
    for (t_idx, (batch, c)) in targets.iter().enumerate() {
        let estimator = TailEstimator::from_batch(batch)?;
        for (g_idx, &gamma) in gammas.iter().enumerate() {
            let boot_seed = derive_seed(
                seed,
                SALT_BOOTSTRAP ^ ((t_idx as u64) << 32 | (g_idx as u64)),
            );
            let boot = estimator.bootstrap(gamma, BOOTSTRAP_RESAMPLES, boot_seed)?;
            let var_asym = var_asymptotic(*c, alpha, gamma)?;
            rows.push(ConvergenceRow {
                gamma,
                target: batch.meta.label.clone(),
                metric: TailMetric::Var,
                empirical: boot.var,
                asymptotic: Some(var_asym),
                ratio: if var_asym > 0.0 { Some(boot.var / var_asym) } else { None },
                std_error: Some(boot.var_std_error),
            });
            let cote_emp = estimator.cote(gamma)?;
            let cote_asym = if alpha > 1.0 {
                Some(cote_asymptotic(*c, alpha, gamma)?)
            } else {
                None
            };
            rows.push(ConvergenceRow {
                gamma,
                target: batch.meta.label.clone(),
                metric: TailMetric::Cote,
                empirical: cote_emp,
                asymptotic: cote_asym,
                ratio: match cote_asym {
                    Some(a) if a > 0.0 => Some(cote_emp / a),
                    _ => None,
                },
                std_error: boot.cote_std_error,
            });
        }
    }
    Ok(ConvergenceStudy {
        alpha,
        r: norm.r(),
        n,
        seed,
        constants,
        rows,
    })
}

/// Informational side checks relating an empirical Value-at-Risk to two
/// crude dominators: the asymptotic comonotone conditional tail
/// expectation (when supplied) and the one-sided mean-variance bound
/// `mean + std * sqrt((1 - gamma) / gamma)`. Neither is tight; the rows
/// are never guaranteed and never fail.
pub fn comparison_report(
    batch: &SampleBatch,
    gamma: f64,
    dependent_cote: Option<f64>,
) -> Result<Vec<BoundCheck>> {
    let var = empirical_var(batch, gamma)?;
    let n = batch.values.len() as f64;
    let mean = batch.values.iter().sum::<f64>() / n;
    let sd = if batch.values.len() >= 2 { std_dev(&batch.values) } else { 0.0 };
    let mut rows = Vec::new();
    if let Some(cote) = dependent_cote {
        rows.push(BoundCheck {
            name: String::from("empirical VaR <= asymptotic comonotone CoTE"),
            relation: Relation::Info,
            lhs: var,
            rhs: cote,
            guaranteed: false,
            pass: true,
            slack: cote - var,
            std_error: 0.0,
        });
    }
    let mv = mean + sd * fmath::sqrt((1.0 - gamma) / gamma);
    rows.push(BoundCheck {
        name: String::from("empirical VaR <= mean-variance bound"),
        relation: Relation::Info,
        lhs: var,
        rhs: mv,
        guaranteed: false,
        pass: true,
        slack: mv - var,
        std_error: 0.0,
    });
    Ok(rows)
}
