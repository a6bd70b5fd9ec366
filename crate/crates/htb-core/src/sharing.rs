//! Allocation models: how losses reach agents.
//!
//! A sharing model produces nonnegative `q x d` allocation matrices `A`,
//! deterministically or at random. Supported families:
//!
//! * a fixed matrix;
//! * a finite scenario mixture (matrices with probabilities);
//! * a random bipartite sharing graph — agent `i` participates in risk `j`
//!   with probability `p_ij`, independently, and each risk is split
//!   equally among its participants (`A_ij = 1{i ~ j} / deg(j)`);
//! * an arbitrary black-box sampler.
//!
//! Expectations over the model are computed exactly (enumeration over a
//! fixed matrix, scenarios, or all realizations of a small bipartite
//! graph) or by seeded Monte Carlo. Exact results carry zero standard
//! error; Monte Carlo results carry the sample standard error.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::fmath;
use crate::matrix::Matrix;
use crate::norm::RNorm;
use crate::rng::{derive_seed, rng_from};

/// Largest number of random (non-degenerate) edges an exact bipartite
/// enumeration will walk: `2^20` graphs.
pub const MAX_RANDOM_EDGES: usize = 20;

/// How many whole-graph redraws the resample policy attempts before
/// giving up.
const RESAMPLE_ATTEMPTS: usize = 10_000;

/// What to do when a risk ends up with no participating agent in a
/// bipartite draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroDegreePolicy {
    /// Keep the draw; the uncovered risk's column is zero (the risk is
    /// simply not insured in that scenario).
    Drop,
    /// Redraw the whole graph until every risk has at least one
    /// participant (conditions the graph law on full coverage).
    Resample,
}

/// One branch of a scenario mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub matrix: Matrix,
    pub probability: f64,
}

/// Random bipartite sharing graph between `q` agents and `d` risks.
#[derive(Debug)]
pub struct BipartiteSharing {
    edge_probs: Matrix,
    policy: ZeroDegreePolicy,
}

/// Black-box allocation sampler. The closure must be a pure function of
/// its seed for reproducibility.
pub struct MatrixSampler {
    rows: usize,
    cols: usize,
    draw: Box<dyn Fn(u64) -> Matrix + Send + Sync>,
}

impl core::fmt::Debug for MatrixSampler {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "MatrixSampler({} x {})", self.rows, self.cols)
    }
}

/// A source of nonnegative allocation matrices.
#[derive(Debug)]
pub enum SharingModel {
    /// Always the same matrix.
    Deterministic(Matrix),
    /// A finite mixture of matrices.
    Scenarios(Vec<Scenario>),
    /// Random bipartite sharing graph with equal splits.
    Bipartite(BipartiteSharing),
    /// Black-box sampler.
    Sampler(MatrixSampler),
}

/// How to take an expectation over the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMethod {
    /// Exact enumeration of the model's support.
    Exact,
    /// Seeded Monte Carlo with `n` draws.
    MonteCarlo { n: usize, seed: u64 },
}

/// Which route produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodTag {
    ExactEnumeration,
    MonteCarlo { n: usize, seed: u64 },
}

/// An expectation and its uncertainty. `std_error` is zero exactly when
/// the value came from exact enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: MethodTag,
}

impl SharingModel {
    /// A model that always returns `a` (entries must be nonnegative).
    pub fn deterministic(a: Matrix) -> Result<Self> {
        a.require_nonnegative("allocation matrix")?;
        Ok(SharingModel::Deterministic(a))
    }

    /// A finite mixture. Matrices must share a shape and be nonnegative;
    /// probabilities must be positive and sum to 1 within `1e-12`.
    pub fn scenarios(items: Vec<Scenario>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidScenarioWeights { sum: 0.0 });
        }
        let (q, d) = (items[0].matrix.rows(), items[0].matrix.cols());
        let mut sum = 0.0;
        for s in &items {
            s.matrix.require_nonnegative("scenario matrix")?;
            if s.matrix.rows() != q || s.matrix.cols() != d {
                return Err(Error::ShapeMismatch {
                    context: "scenario matrices must share a shape",
                    expected: q * d,
                    found: s.matrix.rows() * s.matrix.cols(),
                });
            }
            if !s.probability.is_finite() || s.probability <= 0.0 {
                return Err(Error::InvalidScenarioWeights { sum: s.probability });
            }
            sum += s.probability;
        }
        if fmath::abs(sum - 1.0) > 1e-12 {
            return Err(Error::InvalidScenarioWeights { sum });
        }
        Ok(SharingModel::Scenarios(items))
    }

    /// A bipartite sharing graph: `edge_probs[i][j]` is the probability
    /// that agent `i` participates in risk `j` (entries in `[0, 1]`).
    ///
    /// Under [`ZeroDegreePolicy::Resample`] every risk must have at least
    /// one agent with positive participation probability, otherwise
    /// rejection could never terminate.
    pub fn bipartite(edge_probs: Matrix, policy: ZeroDegreePolicy) -> Result<Self> {
        for i in 0..edge_probs.rows() {
            for j in 0..edge_probs.cols() {
                let p = edge_probs.get(i, j);
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidMatrix {
                        reason: format!("edge probability ({i}, {j}) = {p} outside [0, 1]"),
                    });
                }
            }
        }
        if policy == ZeroDegreePolicy::Resample {
            for j in 0..edge_probs.cols() {
                if (0..edge_probs.rows()).all(|i| edge_probs.get(i, j) == 0.0) {
                    return Err(Error::InvalidMatrix {
                        reason: format!(
                            "risk {j} has zero participation probability everywhere; resampling cannot cover it"
                        ),
                    });
                }
            }
        }
        Ok(SharingModel::Bipartite(BipartiteSharing { edge_probs, policy }))
    }

    /// A black-box sampler producing `rows x cols` matrices. Every draw is
    /// validated for shape, finiteness, and nonnegativity.
    pub fn sampler(
        rows: usize,
        cols: usize,
        draw: impl Fn(u64) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        SharingModel::Sampler(MatrixSampler { rows, cols, draw: Box::new(draw) })
    }

    /// `(agents, risks)` shape of the matrices this model produces.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            SharingModel::Deterministic(a) => (a.rows(), a.cols()),
            SharingModel::Scenarios(items) => (items[0].matrix.rows(), items[0].matrix.cols()),
            SharingModel::Bipartite(b) => (b.edge_probs.rows(), b.edge_probs.cols()),
            SharingModel::Sampler(s) => (s.rows, s.cols),
        }
    }

    /// Whether [`EvalMethod::Exact`] is available: always for fixed
    /// matrices and scenario mixtures, for bipartite graphs with at most
    /// [`MAX_RANDOM_EDGES`] non-degenerate edges, never for samplers.
    pub fn supports_exact(&self) -> bool {
        match self {
            SharingModel::Deterministic(_) | SharingModel::Scenarios(_) => true,
            SharingModel::Bipartite(b) => b.random_edges().len() <= MAX_RANDOM_EDGES,
            SharingModel::Sampler(_) => false,
        }
    }

    /// One draw from the model, reproducible from the seed.
    pub fn sample(&self, seed: u64) -> Result<Matrix> {
        let mut rng = rng_from(seed);
        self.sample_with(&mut rng)
    }

    /// One draw consuming randomness from the given generator.
    pub(crate) fn sample_with(&self, rng: &mut ChaCha12Rng) -> Result<Matrix> {
        match self {
            SharingModel::Deterministic(a) => Ok(a.clone()),
            SharingModel::Scenarios(items) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for s in items {
                    acc += s.probability;
                    if u < acc {
                        return Ok(s.matrix.clone());
                    }
                }
                Ok(items[items.len() - 1].matrix.clone())
            }
            SharingModel::Bipartite(b) => b.sample_with(rng),
            SharingModel::Sampler(s) => {
                let a = (s.draw)(rng.gen::<u64>());
                if a.rows() != s.rows || a.cols() != s.cols {
                    return Err(Error::SamplerOutputInvalid {
                        reason: format!(
                            "expected {} x {}, got {} x {}",
                            s.rows,
                            s.cols,
                            a.rows(),
                            a.cols()
                        ),
                    });
                }
                if !a.is_nonnegative() {
                    return Err(Error::SamplerOutputInvalid {
                        reason: "matrix has negative entries".into(),
                    });
                }
                Ok(a)
            }
        }
    }

    /// The model's support as `(matrix, probability)` pairs, available for
    /// every model [`supports_exact`](Self::supports_exact) accepts.
    pub fn support(&self) -> Result<Vec<(Matrix, f64)>> {
        match self {
            SharingModel::Deterministic(a) => Ok(vec![(a.clone(), 1.0)]),
            SharingModel::Scenarios(items) => {
                Ok(items.iter().map(|s| (s.matrix.clone(), s.probability)).collect())
            }
            SharingModel::Bipartite(b) => b.support(),
            SharingModel::Sampler(_) => Err(Error::ExactUnsupported),
        }
    }

    /// `E[f(A)]` for a scalar functional.
    pub fn expect(
        &self,
        mut f: impl FnMut(&Matrix) -> f64,
        method: EvalMethod,
    ) -> Result<ExpectationEstimate> {
        let mut out = self.expect_many(1, |a, buf| buf[0] = f(a), method)?;
        Ok(out.remove(0))
    }

    /// `E[f(A)]` for a vector functional evaluated in one pass: `f` fills
    /// `len` slots per matrix. One enumeration (or one stream of draws)
    /// serves every coordinate, so estimates for different functionals of
    /// the same model are maximally comparable.
    pub fn expect_many(
        &self,
        len: usize,
        mut f: impl FnMut(&Matrix, &mut [f64]),
        method: EvalMethod,
    ) -> Result<Vec<ExpectationEstimate>> {
        match method {
            EvalMethod::Exact => {
                let support = self.support()?;
                let mut acc = vec![0.0; len];
                let mut buf = vec![0.0; len];
                for (a, p) in &support {
                    f(a, &mut buf);
                    for (slot, &v) in acc.iter_mut().zip(buf.iter()) {
                        *slot += p * v;
                    }
                }
                Ok(acc
                    .into_iter()
                    .map(|value| ExpectationEstimate {
                        value,
                        std_error: 0.0,
                        method: MethodTag::ExactEnumeration,
                    })
                    .collect())
            }
            EvalMethod::MonteCarlo { n, seed } => {
                if n < 2 {
                    return Err(Error::SampleTooSmall { needed: 2, found: n });
                }
                let mut rng = rng_from(derive_seed(seed, 0x4d41_5452_4958)); // "MATRIX"
                let mut sum = vec![0.0; len];
                let mut sumsq = vec![0.0; len];
                let mut buf = vec![0.0; len];
                for _ in 0..n {
                    let a = self.sample_with(&mut rng)?;
                    f(&a, &mut buf);
                    for ((s, sq), &v) in sum.iter_mut().zip(sumsq.iter_mut()).zip(buf.iter()) {
                        *s += v;
                        *sq += v * v;
                    }
                }
                let nf = n as f64;
                Ok(sum
                    .into_iter()
                    .zip(sumsq)
                    .map(|(s, sq)| {
                        let mean = s / nf;
                        let var = ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
                        ExpectationEstimate {
                            value: mean,
                            std_error: fmath::sqrt(var / nf),
                            method: MethodTag::MonteCarlo { n, seed },
                        }
                    })
                    .collect())
            }
        }
    }
}

impl BipartiteSharing {
    /// Participation probabilities (`q x d`).
    pub fn edge_probs(&self) -> &Matrix {
        &self.edge_probs
    }

    pub fn policy(&self) -> ZeroDegreePolicy {
        self.policy
    }

    /// Positions of edges with probability strictly inside `(0, 1)` — the
    /// only ones exact enumeration must branch on.
    fn random_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for i in 0..self.edge_probs.rows() {
            for j in 0..self.edge_probs.cols() {
                let p = self.edge_probs.get(i, j);
                if p > 0.0 && p < 1.0 {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    /// Allocation matrix for a fixed edge set: every present edge gets an
    /// equal share of its risk's column; uncovered risks get zero columns.
    fn allocation(present: &Matrix) -> Matrix {
        let (q, d) = (present.rows(), present.cols());
        let mut a = Matrix::zeros(q, d);
        for j in 0..d {
            let degree: f64 = (0..q).map(|i| present.get(i, j)).sum();
            if degree > 0.0 {
                for i in 0..q {
                    if present.get(i, j) > 0.0 {
                        a.set(i, j, 1.0 / degree);
                    }
                }
            }
        }
        a
    }

    fn sample_with(&self, rng: &mut ChaCha12Rng) -> Result<Matrix> {
        let (q, d) = (self.edge_probs.rows(), self.edge_probs.cols());
        let attempts = if self.policy == ZeroDegreePolicy::Resample { RESAMPLE_ATTEMPTS } else { 1 };
        for _ in 0..attempts {
            let mut present = Matrix::zeros(q, d);
            for i in 0..q {
                for j in 0..d {
                    let p = self.edge_probs.get(i, j);
                    let hit = p == 1.0 || (p > 0.0 && rng.gen::<f64>() < p);
                    present.set(i, j, if hit { 1.0 } else { 0.0 });
                }
            }
            let covered =
                (0..d).all(|j| (0..q).any(|i| present.get(i, j) > 0.0));
            if covered || self.policy == ZeroDegreePolicy::Drop {
                return Ok(Self::allocation(&present));
            }
        }
        Err(Error::ResampleExhausted { attempts: RESAMPLE_ATTEMPTS })
    }

    fn support(&self) -> Result<Vec<(Matrix, f64)>> {
        let random = self.random_edges();
        if random.len() > MAX_RANDOM_EDGES {
            return Err(Error::EnumerationTooLarge {
                random_edges: random.len(),
                max: MAX_RANDOM_EDGES,
            });
        }
        let (q, d) = (self.edge_probs.rows(), self.edge_probs.cols());
        let mut base = Matrix::zeros(q, d);
        for i in 0..q {
            for j in 0..d {
                if self.edge_probs.get(i, j) == 1.0 {
                    base.set(i, j, 1.0);
                }
            }
        }
        let mut out = Vec::with_capacity(1 << random.len());
        let mut kept_weight = 0.0;
        for mask in 0_u64..(1 << random.len()) {
            let mut present = base.clone();
            let mut weight = 1.0;
            for (bit, &(i, j)) in random.iter().enumerate() {
                let p = self.edge_probs.get(i, j);
                if mask >> bit & 1 == 1 {
                    present.set(i, j, 1.0);
                    weight *= p;
                } else {
                    weight *= 1.0 - p;
                }
            }
            let covered = (0..d).all(|j| (0..q).any(|i| present.get(i, j) > 0.0));
            if self.policy == ZeroDegreePolicy::Resample && !covered {
                continue;
            }
            kept_weight += weight;
            out.push((Self::allocation(&present), weight));
        }
        if out.is_empty() || kept_weight <= 0.0 {
            return Err(Error::ResampleExhausted { attempts: 0 });
        }
        if self.policy == ZeroDegreePolicy::Resample {
            // Rejection sampling conditions on coverage: renormalize.
            for (_, w) in &mut out {
                *w /= kept_weight;
            }
        }
        Ok(out)
    }
}

/// Operator norm `||A||_op = sup_{||x||_r = 1} ||A x||_r` over the
/// positive orthant.
///
/// `r = 1` uses the exact column-sum formula. For `r > 1` a monotone
/// power iteration (the natural gradient-ascent fixed point) is run from
/// the best coordinate direction plus seeded random restarts (64 total,
/// relative tolerance `1e-6`); for entrywise-nonnegative matrices this
/// finds the global optimum. For `0 < r < 1` the value is approximated by
/// a deterministic search over the `r`-sphere (simplex grid plus the same
/// restarts evaluated pointwise).
pub fn operator_norm(a: &Matrix, norm: RNorm) -> f64 {
    if a.max_abs() == 0.0 {
        return 0.0;
    }
    let r = norm.r();
    if r == 1.0 {
        return (0..a.cols())
            .map(|j| a.column(j).iter().map(|&x| fmath::abs(x)).sum::<f64>())
            .fold(0.0, f64::max);
    }
    let starts = search_directions(a, norm, 64);
    if r > 1.0 {
        starts
            .iter()
            .map(|x| power_iterate(a, norm, x))
            .fold(0.0, f64::max)
    } else {
        // Quasinorm range: no ascent guarantee, evaluate a dense simplex
        // grid plus the restart directions. Approximate by construction.
        let grid = simplex_grid(a.cols(), 24, r);
        grid.iter()
            .chain(starts.iter())
            .map(|x| norm.eval(&a.mul_vec(x)))
            .fold(0.0, f64::max)
    }
}

/// Best coordinate direction plus seeded random directions on the sphere.
fn search_directions(a: &Matrix, norm: RNorm, count: usize) -> Vec<Vec<f64>> {
    let d = a.cols();
    let mut out = Vec::with_capacity(count);
    let mut best = (0, 0.0);
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        let value = norm.eval(&a.mul_vec(&e));
        if value >= best.1 {
            best = (j, value);
        }
    }
    let mut e = vec![0.0; d];
    e[best.0] = 1.0;
    out.push(e);
    let mut rng = rng_from(0x4f50_4e4f_524d); // fixed: deterministic results
    while out.len() < count {
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() + 1e-12).collect();
        let len = norm.eval(&x);
        out.push(x.iter().map(|&v| v / len).collect());
    }
    out
}

/// Monotone fixed-point iteration for `r > 1`:
/// `x <- normalize((A^T (A x)^(r-1))^(1/(r-1)))`.
fn power_iterate(a: &Matrix, norm: RNorm, start: &[f64]) -> f64 {
    let r = norm.r();
    if r - 1.0 < 1e-9 {
        // Exponent 1/(r-1) blows up; the r = 1 column formula is exact
        // in the limit and `operator_norm` handles r == 1 directly.
        return norm.eval(&a.mul_vec(start));
    }
    let mut x: Vec<f64> = start.to_vec();
    let mut value = norm.eval(&a.mul_vec(&x));
    for _ in 0..500 {
        let y = a.mul_vec(&x);
        // z = A^T y^(r-1)
        let mut z = vec![0.0; a.cols()];
        for i in 0..a.rows() {
            let yi = if y[i] <= 0.0 { 0.0 } else { fmath::powf(y[i], r - 1.0) };
            if yi == 0.0 {
                continue;
            }
            for (j, slot) in z.iter_mut().enumerate() {
                *slot += a.get(i, j) * yi;
            }
        }
        let mut next: Vec<f64> = z
            .iter()
            .map(|&v| if v <= 0.0 { 0.0 } else { fmath::powf(v, 1.0 / (r - 1.0)) })
            .collect();
        let len = norm.eval(&next);
        if len == 0.0 {
            break;
        }
        for v in &mut next {
            *v /= len;
        }
        let next_value = norm.eval(&a.mul_vec(&next));
        let done = fmath::abs(next_value - value) <= 1e-6 * value.max(1e-300);
        x = next;
        value = next_value;
        if done {
            break;
        }
    }
    value
}

/// All points `x` with `x_j = u_j^(1/r)` for `u` on the resolution-`m`
/// grid of the probability simplex; these lie exactly on the `r`-sphere.
fn simplex_grid(d: usize, m: usize, r: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut counts = vec![0_usize; d];
    fn rec(j: usize, left: usize, counts: &mut [usize], m: usize, r: f64, out: &mut Vec<Vec<f64>>) {
        if j + 1 == counts.len() {
            counts[j] = left;
            out.push(
                counts
                    .iter()
                    .map(|&c| {
                        let u = c as f64 / m as f64;
                        if u == 0.0 {
                            0.0
                        } else {
                            fmath::powf(u, 1.0 / r)
                        }
                    })
                    .collect(),
            );
            return;
        }
        for c in 0..=left {
            counts[j] = c;
            rec(j + 1, left - c, counts, m, r, out);
        }
    }
    rec(0, m, &mut counts, m, r, &mut out);
    out
}

/// Integrability diagnostic and the estimate of
/// `E ||A||_op^(alpha + delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    /// The probed exponent `alpha + delta`.
    pub exponent: f64,
    /// Estimate of `E ||A||_op^(alpha + delta)`.
    pub estimate: ExpectationEstimate,
    /// A finite bound on `||A||_op` over the model's support, when one is
    /// available; its presence means the moment condition holds trivially.
    pub support_bound: Option<f64>,
    /// Monte Carlo divergence heuristic: set when the running mean keeps
    /// growing with the sample, the signature of an infinite moment.
    pub suspect: bool,
}

/// Checks the moment condition `E ||A||_op^(alpha + delta) < infinity`
/// backing the tail asymptotics.
///
/// Bounded-support models (fixed, scenarios, bipartite) get exact or
/// enumeration-based values and a finite support bound. Black-box
/// samplers are probed by Monte Carlo with a divergence heuristic.
pub fn moment_diagnostic(
    model: &SharingModel,
    norm: RNorm,
    alpha: f64,
    delta: f64,
    n: usize,
    seed: u64,
) -> Result<MomentReport> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            constraint: "must be finite and > 0",
        });
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            constraint: "must be finite and >= 0",
        });
    }
    let exponent = alpha + delta;
    if model.supports_exact() {
        let support = model.support()?;
        let mut value = 0.0;
        let mut bound: f64 = 0.0;
        for (a, p) in &support {
            let op = operator_norm(a, norm);
            value += p * fmath::powf(op, exponent);
            bound = bound.max(op);
        }
        return Ok(MomentReport {
            exponent,
            estimate: ExpectationEstimate {
                value,
                std_error: 0.0,
                method: MethodTag::ExactEnumeration,
            },
            support_bound: Some(bound),
            suspect: false,
        });
    }
    // Bipartite graphs too large to enumerate are still bounded: shares
    // lie in [0, 1] and columns sum to at most 1, giving the norm bound
    // d^(1 - 1/r) for r >= 1 and q^(1/r - 1) for r < 1.
    let support_bound = match model {
        SharingModel::Bipartite(_) => {
            let (q, d) = model.shape();
            let r = norm.r();
            Some(if r >= 1.0 {
                fmath::powf(d as f64, 1.0 - 1.0 / r)
            } else {
                fmath::powf(q as f64, 1.0 / r - 1.0)
            })
        }
        _ => None,
    };
    if n < 2 {
        return Err(Error::SampleTooSmall { needed: 2, found: n });
    }
    let mut rng = rng_from(derive_seed(seed, 0x4d4f_4d45_4e54)); // "MOMENT"
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let a = model.sample_with(&mut rng)?;
        values.push(fmath::powf(operator_norm(&a, norm), exponent));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    let half_mean = values[..n / 2].iter().sum::<f64>() / (n / 2) as f64;
    // A finite-moment running mean settles; a diverging one is dominated
    // by fresh records, so the full mean keeps pulling away from earlier
    // prefixes and single draws carry a macroscopic share of the total.
    let max_share = values.iter().fold(0.0_f64, |m, &v| m.max(v)) / (mean * nf);
    let suspect = support_bound.is_none() && (mean > 1.5 * half_mean || max_share > 0.2);
    Ok(MomentReport {
        exponent,
        estimate: ExpectationEstimate {
            value: mean,
            std_error: fmath::sqrt(var / nf),
            method: MethodTag::MonteCarlo { n, seed },
        },
        support_bound,
        suspect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1() -> RNorm {
        RNorm::new(1.0).unwrap()
    }

    #[test]
    fn deterministic_model_rejects_negative_entries() {
        let a = Matrix::from_rows(vec![vec![1.0, -0.1]]).unwrap();
        assert!(SharingModel::deterministic(a).is_err());
    }

    #[test]
    fn scenario_probabilities_must_be_positive_and_sum_to_one() {
        let a = Matrix::identity(2);
        let bad = SharingModel::scenarios(vec![
            Scenario { matrix: a.clone(), probability: 0.6 },
            Scenario { matrix: a.clone(), probability: 0.5 },
        ]);
        assert!(matches!(bad, Err(Error::InvalidScenarioWeights { .. })));
        let good = SharingModel::scenarios(vec![
            Scenario { matrix: a.clone(), probability: 0.6 },
            Scenario { matrix: a, probability: 0.4 },
        ]);
        assert!(good.is_ok());
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let probs = Matrix::from_rows(vec![vec![0.7, 0.4], vec![0.5, 0.9]]).unwrap();
        let model = SharingModel::bipartite(probs, ZeroDegreePolicy::Drop).unwrap();
        let a = model.sample(123).unwrap();
        let b = model.sample(123).unwrap();
        let c = model.sample(124).unwrap();
        assert_eq!(a, b);
        assert!(a != c || a.rows() == 0); // overwhelmingly different
    }

    #[test]
    fn full_bipartite_graph_splits_every_risk_equally() {
        let probs = Matrix::ones(2, 2);
        let model = SharingModel::bipartite(probs, ZeroDegreePolicy::Drop).unwrap();
        let a = model.sample(5).unwrap();
        let expected = Matrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(a, expected);
    }

    #[test]
    fn bipartite_columns_sum_to_one_or_zero() {
        let probs = Matrix::from_rows(vec![vec![0.5, 0.3], vec![0.5, 0.2], vec![0.1, 0.4]]).unwrap();
        let model = SharingModel::bipartite(probs, ZeroDegreePolicy::Drop).unwrap();
        for seed in 0..50 {
            let a = model.sample(seed).unwrap();
            for j in 0..a.cols() {
                let s: f64 = a.column(j).iter().sum();
                assert!(s == 0.0 || (s - 1.0).abs() < 1e-12, "column sum {s}");
            }
        }
    }

    #[test]
    fn resample_policy_always_covers_every_risk() {
        let probs = Matrix::from_rows(vec![vec![0.05, 0.05], vec![0.05, 0.05]]).unwrap();
        let model = SharingModel::bipartite(probs, ZeroDegreePolicy::Resample).unwrap();
        for seed in 0..30 {
            let a = model.sample(seed).unwrap();
            for j in 0..a.cols() {
                let s: f64 = a.column(j).iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn resample_policy_rejects_uncoverable_risks_up_front() {
        let probs = Matrix::from_rows(vec![vec![0.5, 0.0]]).unwrap();
        assert!(SharingModel::bipartite(probs, ZeroDegreePolicy::Resample).is_err());
    }

    #[test]
    fn exact_expectation_on_the_worked_two_agent_example() {
        // Two agents, one risk. Agent 1 always participates, agent 2 with
        // probability 1/2. f = sum_i A_i1^2: full graph (1/2, 1/2) gives
        // 1/2, lone agent gives 1 — expectation 3/4.
        let probs = Matrix::from_rows(vec![vec![1.0], vec![0.5]]).unwrap();
        let model = SharingModel::bipartite(probs, ZeroDegreePolicy::Drop).unwrap();
        let f = |a: &Matrix| (0..2).map(|i| a.get(i, 0) * a.get(i, 0)).sum::<f64>();
        let est = model.expect(f, EvalMethod::Exact).unwrap();
        assert_eq!(est.value, 0.75);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.method, MethodTag::ExactEnumeration);
    }

    #[test]
    fn monte_carlo_agrees_with_exact_within_three_standard_errors() {
        let probs = Matrix::from_rows(vec![vec![1.0], vec![0.5]]).unwrap();
        let model = SharingModel::bipartite(probs, ZeroDegreePolicy::Drop).unwrap();
        let f = |a: &Matrix| (0..2).map(|i| a.get(i, 0) * a.get(i, 0)).sum::<f64>();
        let mc = model.expect(f, EvalMethod::MonteCarlo { n: 100_000, seed: 7 }).unwrap();
        assert!(mc.std_error > 0.0);
        assert!(
            (mc.value - 0.75).abs() <= 3.0 * mc.std_error,
            "mc {} +- {}",
            mc.value,
            mc.std_error
        );
    }

    #[test]
    fn exact_expectation_respects_resample_conditioning() {
        // One agent, one risk, p = 0.3. Drop: E[A_11] = 0.3. Resample:
        // conditioned on coverage, E[A_11] = 1.
        let probs = Matrix::from_rows(vec![vec![0.3]]).unwrap();
        let drop = SharingModel::bipartite(probs.clone(), ZeroDegreePolicy::Drop).unwrap();
        let resample = SharingModel::bipartite(probs, ZeroDegreePolicy::Resample).unwrap();
        let f = |a: &Matrix| a.get(0, 0);
        assert!((drop.expect(f, EvalMethod::Exact).unwrap().value - 0.3).abs() < 1e-15);
        assert!((resample.expect(f, EvalMethod::Exact).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn enumeration_cap_counts_only_random_edges() {
        // 25 deterministic edges enumerate fine; 21 random ones do not.
        let model =
            SharingModel::bipartite(Matrix::ones(5, 5), ZeroDegreePolicy::Drop).unwrap();
        assert!(model.supports_exact());
        assert!(model.support().is_ok());

        let mut probs = Matrix::zeros(3, 7);
        for i in 0..3 {
            for j in 0..7 {
                probs.set(i, j, 0.5);
            }
        }
        let big = SharingModel::bipartite(probs, ZeroDegreePolicy::Drop).unwrap();
        assert!(!big.supports_exact());
        assert!(matches!(big.support(), Err(Error::EnumerationTooLarge { .. })));
    }

    #[test]
    fn sampler_hooks_are_validated_and_cannot_enumerate() {
        let model = SharingModel::sampler(1, 1, |_seed| Matrix::from_rows(vec![vec![1.0]]).unwrap());
        assert!(model.sample(3).is_ok());
        assert_eq!(model.support().unwrap_err(), Error::ExactUnsupported);
        let bad = SharingModel::sampler(2, 2, |_seed| Matrix::from_rows(vec![vec![1.0]]).unwrap());
        assert!(matches!(bad.sample(3), Err(Error::SamplerOutputInvalid { .. })));
    }

    #[test]
    fn operator_norm_closed_forms() {
        let l1 = l1();
        assert_eq!(operator_norm(&Matrix::identity(2), l1), 1.0);
        assert_eq!(operator_norm(&Matrix::ones(2, 2), l1), 2.0);
        assert_eq!(operator_norm(&Matrix::zeros(3, 2), l1), 0.0);
        // Column sums (1.5, 0.7): the exact l1 -> l1 norm is 1.5.
        let a = Matrix::from_rows(vec![vec![1.0, 0.5], vec![0.5, 0.2]]).unwrap();
        assert_eq!(operator_norm(&a, l1), 1.5);
    }

    #[test]
    fn operator_norm_matches_spectral_norm_for_r_two() {
        let l2 = RNorm::new(2.0).unwrap();
        // ||[[1,1],[0,1]]||_2 = golden ratio = sqrt((3 + sqrt 5) / 2).
        let a = Matrix::from_rows(vec![vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let expected = ((3.0 + 5.0_f64.sqrt()) / 2.0).sqrt();
        let got = operator_norm(&a, l2);
        assert!((got / expected - 1.0).abs() < 1e-6, "got {got}, expected {expected}");
        // Rank-one ones matrix: ||A||_2 = 2.
        assert!((operator_norm(&Matrix::ones(2, 2), l2) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn operator_norm_quasinorm_is_sane() {
        // For A = I the norm is 1 in every r (unit vectors map to unit
        // vectors, and the sphere is the constraint set).
        let half = RNorm::new(0.5).unwrap();
        let got = operator_norm(&Matrix::identity(2), half);
        assert!((got - 1.0).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn moment_diagnostic_exact_for_fixed_matrix() {
        let a = Matrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let model = SharingModel::deterministic(a).unwrap();
        let report = moment_diagnostic(&model, l1(), 1.5, 0.5, 10, 1).unwrap();
        // ||A||_op = 2 in l1, exponent 2.
        assert_eq!(report.estimate.value, 4.0);
        assert_eq!(report.support_bound, Some(2.0));
        assert!(!report.suspect);
    }

    #[test]
    fn moment_diagnostic_flags_heavy_tailed_sampler() {
        // ||A||_op = Pareto(0.8): E ||A||^1.2 = infinity.
        let model = SharingModel::sampler(1, 1, |seed| {
            let mut rng = crate::rng::rng_from(seed);
            let x = crate::rng::standard_pareto(&mut rng, 1.0 / 0.8);
            Matrix::from_rows(vec![vec![x]]).unwrap()
        });
        let report = moment_diagnostic(&model, l1(), 1.2, 0.0, 20_000, 11).unwrap();
        assert!(report.support_bound.is_none());
        assert!(report.suspect, "estimate {} should look divergent", report.estimate.value);
        // A light-tailed sampler must not be flagged.
        let light = SharingModel::sampler(1, 1, |seed| {
            let mut rng = crate::rng::rng_from(seed);
            let x: f64 = rng.gen::<f64>() + 0.5;
            Matrix::from_rows(vec![vec![x]]).unwrap()
        });
        let ok = moment_diagnostic(&light, l1(), 1.2, 0.0, 20_000, 11).unwrap();
        assert!(!ok.suspect);
    }

    #[test]
    fn bounded_bipartite_report_carries_a_finite_bound() {
        let probs = Matrix::from_rows(vec![vec![0.5; 2]; 2]).unwrap();
        let model = SharingModel::bipartite(probs, ZeroDegreePolicy::Drop).unwrap();
        let report = moment_diagnostic(&model, l1(), 1.5, 0.5, 10, 1).unwrap();
        assert!(report.support_bound.unwrap() <= 1.0 + 1e-12);
        assert!(!report.suspect);
    }
}
