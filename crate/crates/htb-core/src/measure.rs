//! Discrete spectral measures: the extremal-dependence layer.
//!
//! The joint tail of a heavy-tailed loss vector is described by a measure
//! on rays: an atom with direction `s` (a point on the unit `r`-sphere in
//! the positive orthant) and mass `m` contributes `m * tau^(-alpha)` to the
//! tail mass of the ray set `{t s : t > tau}`. Finitely many atoms are
//! enough to express independence (axis atoms), comonotonicity (one
//! diagonal atom), and everything a linear factor structure can produce
//! from those via [`DiscreteSpectralMeasure::pushforward`].
//!
//! Two measures that look different can induce the same tails. The
//! canonical form produced by [`DiscreteSpectralMeasure::canonicalize`]
//! removes that ambiguity: it standardizes to tail index 1 and unit
//! marginal tail weights, after which the *balance* identity
//! `sum_k M_k v_{k,j} = 1` holds in every coordinate. Canonical measures
//! are the required input format for the tail-constant functionals in
//! [`crate::constants`].
//!
//! Numerical conventions: directions are re-projected onto the unit sphere
//! after any arithmetic; atoms whose directions agree within `1e-12` are
//! merged; merged atoms with mass below `1e-15` are dropped (with a
//! `log::warn`); power sums switch to log-space accumulation when a term's
//! exponent magnitude passes `1e2`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath::{self, weighted_power_sum};
use crate::matrix::Matrix;
use crate::norm::RNorm;
use crate::tail::TailModel;

/// Coordinatewise distance below which two directions count as equal.
pub const DIRECTION_TOL: f64 = 1e-12;
/// Atoms below this mass after merging are dropped.
pub const MASS_FLOOR: f64 = 1e-15;
/// Allowed deviation from the balance identity for canonical measures.
pub const BALANCE_TOL: f64 = 1e-10;

/// One ray of tail mass: a direction on the unit `r`-sphere and a mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAtom {
    /// Point on the unit `r`-sphere, all coordinates `>= 0`.
    pub direction: Vec<f64>,
    /// Strictly positive tail mass carried by the ray.
    pub mass: f64,
}

impl SpectralAtom {
    pub fn new(direction: Vec<f64>, mass: f64) -> Self {
        SpectralAtom { direction, mass }
    }
}

/// A finite-atom spectral measure with tail index `alpha`, directions on
/// the unit `r`-sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectralMeasure {
    dim: usize,
    alpha: f64,
    norm: RNorm,
    atoms: Vec<SpectralAtom>,
    canonical: bool,
}

impl DiscreteSpectralMeasure {
    /// Validates and builds a measure.
    ///
    /// Requirements: at least one atom; all directions of equal nonzero
    /// length with finite, nonnegative coordinates and `r`-norm within
    /// [`DIRECTION_TOL`] of 1 (they are re-projected exactly onto the
    /// sphere afterwards); all masses finite and strictly positive. If
    /// `canonical` is set, `alpha` must be 1 and the balance identity must
    /// hold within [`BALANCE_TOL`].
    pub fn new(
        alpha: f64,
        norm: RNorm,
        atoms: Vec<SpectralAtom>,
        canonical: bool,
    ) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                constraint: "must be finite and > 0",
            });
        }
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure { reason: "measure needs at least one atom".into() });
        }
        let dim = atoms[0].direction.len();
        if dim == 0 {
            return Err(Error::InvalidMeasure { reason: "directions must be nonempty".into() });
        }
        let mut projected = Vec::with_capacity(atoms.len());
        for (k, atom) in atoms.into_iter().enumerate() {
            if atom.direction.len() != dim {
                return Err(Error::InvalidMeasure {
                    reason: format!("atom {k} has dimension {}, expected {dim}", atom.direction.len()),
                });
            }
            if !atom.mass.is_finite() || atom.mass <= 0.0 {
                return Err(Error::InvalidMeasure {
                    reason: format!("atom {k} has mass {}, expected finite > 0", atom.mass),
                });
            }
            for (j, &s) in atom.direction.iter().enumerate() {
                if !s.is_finite() || s < 0.0 {
                    return Err(Error::InvalidMeasure {
                        reason: format!(
                            "atom {k} coordinate {j} = {s}: directions live in the positive orthant"
                        ),
                    });
                }
            }
            let len = norm.eval(&atom.direction);
            if fmath::abs(len - 1.0) > DIRECTION_TOL {
                return Err(Error::InvalidMeasure {
                    reason: format!("atom {k} direction has r-norm {len}, expected 1 within {DIRECTION_TOL}"),
                });
            }
            projected.push(SpectralAtom {
                direction: reproject(atom.direction, len),
                mass: atom.mass,
            });
        }
        let measure = DiscreteSpectralMeasure { dim, alpha, norm, atoms: projected, canonical };
        if canonical {
            if alpha != 1.0 {
                return Err(Error::InvalidMeasure {
                    reason: format!("canonical measures have tail index 1, got alpha = {alpha}"),
                });
            }
            let defect = measure.balance_defect();
            if defect > BALANCE_TOL {
                return Err(Error::InvalidMeasure {
                    reason: format!("balance defect {defect} exceeds {BALANCE_TOL}"),
                });
            }
        }
        Ok(measure)
    }

    /// The measure of fully (asymptotically) independent factors: one atom
    /// of mass `K_j` on each coordinate axis.
    ///
    /// Its tail set function is `x -> sum_j K_j x_j^(-alpha)`.
    pub fn independent(tail: &TailModel, norm: RNorm) -> Self {
        let d = tail.dim();
        let atoms = (0..d)
            .map(|j| {
                let mut direction = alloc::vec![0.0; d];
                direction[j] = 1.0;
                SpectralAtom { direction, mass: tail.scales()[j] }
            })
            .collect();
        let canonical = tail.alpha() == 1.0 && tail.scales().iter().all(|&k| k == 1.0);
        DiscreteSpectralMeasure { dim: d, alpha: tail.alpha(), norm, atoms, canonical }
    }

    /// The measure of comonotone (fully dependent) factors: a single atom
    /// along `u = (K_1^(1/alpha), ..., K_d^(1/alpha))` with mass
    /// `||u||_r^alpha`.
    ///
    /// Its tail set function is `x -> max_j K_j x_j^(-alpha)`.
    pub fn dependent(tail: &TailModel, norm: RNorm) -> Self {
        let u = tail.scale_roots();
        let len = norm.eval(&u);
        let mass = fmath::powf(len, tail.alpha());
        let direction: Vec<f64> = u.iter().map(|&x| x / len).collect();
        let canonical = tail.alpha() == 1.0 && tail.scales().iter().all(|&k| k == 1.0);
        DiscreteSpectralMeasure {
            dim: tail.dim(),
            alpha: tail.alpha(),
            norm,
            atoms: alloc::vec![SpectralAtom { direction, mass }],
            canonical,
        }
    }

    /// Number of coordinates.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Tail index of the measure.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The sphere norm the directions live on.
    pub fn norm(&self) -> RNorm {
        self.norm
    }

    /// The atoms (directions re-projected onto the unit sphere).
    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    /// Whether the measure is in canonical (standardized) form.
    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Sum of atom masses.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Marginal tail weights: coordinate `j` carries
    /// `c_j = sum_k m_k s_{k,j}^alpha`, i.e. the tail mass of
    /// `{x : x_j > 1}`.
    pub fn margins(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|j| {
                let terms: Vec<(f64, f64)> =
                    self.atoms.iter().map(|a| (a.mass, a.direction[j])).collect();
                weighted_power_sum(&terms, self.alpha)
            })
            .collect()
    }

    /// Largest deviation of `sum_k m_k s_{k,j}` from 1 across coordinates:
    /// zero (up to float error) exactly for canonical measures.
    pub fn balance_defect(&self) -> f64 {
        (0..self.dim)
            .map(|j| {
                let s: f64 = self.atoms.iter().map(|a| a.mass * a.direction[j]).sum();
                fmath::abs(s - 1.0)
            })
            .fold(0.0, f64::max)
    }

    /// Image of the measure under a nonnegative linear map `B` (applied to
    /// the underlying loss vector, `V -> B V`).
    ///
    /// Each atom `(s, m)` maps to direction `B s / ||B s||` with mass
    /// `m ||B s||^alpha`; atoms with `B s = 0` are dropped, directions
    /// equal within [`DIRECTION_TOL`] are merged, and merged atoms below
    /// [`MASS_FLOOR`] are dropped with a warning. The result is never
    /// marked canonical — standardize explicitly if needed.
    pub fn pushforward(&self, b: &Matrix) -> Result<Self> {
        if b.cols() != self.dim {
            return Err(Error::ShapeMismatch {
                context: "pushforward matrix columns vs. measure dimension",
                expected: self.dim,
                found: b.cols(),
            });
        }
        b.require_nonnegative("pushforward matrix")?;
        let mut merged: Vec<SpectralAtom> = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            let image = b.mul_vec(&atom.direction);
            let len = self.norm.eval(&image);
            if len == 0.0 {
                continue;
            }
            let direction: Vec<f64> = image.iter().map(|&x| x / len).collect();
            let mass = atom.mass * fmath::powf(len, self.alpha);
            match merged.iter_mut().find(|a| directions_equal(&a.direction, &direction)) {
                Some(existing) => existing.mass += mass,
                None => merged.push(SpectralAtom { direction, mass }),
            }
        }
        let before = merged.len();
        merged.retain(|a| a.mass >= MASS_FLOOR);
        if merged.len() < before {
            log::warn!(
                "pushforward dropped {} atom(s) with mass below {MASS_FLOOR}",
                before - merged.len()
            );
        }
        if merged.is_empty() {
            return Err(Error::InvalidMeasure {
                reason: "pushforward annihilated every atom (image measure is zero)".into(),
            });
        }
        Ok(DiscreteSpectralMeasure {
            dim: b.rows(),
            alpha: self.alpha,
            norm: self.norm,
            atoms: merged,
            canonical: false,
        })
    }

    /// Standardizes to the canonical form: tail index 1, unit marginal
    /// tail weights, balance identity `sum_k M_k v_{k,j} = 1`.
    ///
    /// Atom `(s, m)` maps to direction `w / ||w||` with
    /// `w_j = s_j^alpha / c_j` and mass `m ||w||`, where `c` are the
    /// marginal tail weights. Fails with [`Error::DegenerateMargin`] if
    /// some coordinate carries no tail mass. Canonicalizing a canonical
    /// measure is the identity.
    pub fn canonicalize(&self) -> Result<Self> {
        let margins = self.margins();
        if let Some(j) = margins.iter().position(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::DegenerateMargin { coordinate: j });
        }
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            let w: Vec<f64> = atom
                .direction
                .iter()
                .zip(&margins)
                .map(|(&s, &c)| if s == 0.0 { 0.0 } else { fmath::powf(s, self.alpha) / c })
                .collect();
            let len = self.norm.eval(&w);
            if len == 0.0 {
                // Impossible for a validated atom (some coordinate is
                // positive and all margins are), but stay defensive.
                continue;
            }
            atoms.push(SpectralAtom {
                direction: w.iter().map(|&x| x / len).collect(),
                mass: atom.mass * len,
            });
        }
        let canonical = DiscreteSpectralMeasure {
            dim: self.dim,
            alpha: 1.0,
            norm: self.norm,
            atoms,
            canonical: true,
        };
        let defect = canonical.balance_defect();
        if defect > BALANCE_TOL {
            return Err(Error::InvalidMeasure {
                reason: format!("standardization left balance defect {defect} > {BALANCE_TOL}"),
            });
        }
        Ok(canonical)
    }

    /// The market tail functional: for a canonical measure `rho`, a
    /// nonnegative allocation `A`, and a target tail index `alpha`,
    ///
    /// `g(rho, A) = sum_k M_k || A v_k^(1/alpha) ||^alpha`
    ///
    /// (coordinatewise root), evaluated in the given aggregation norm.
    /// This is the tail constant of `||A V||` when `V` has canonical
    /// spectral measure `rho` transported to index `alpha`.
    pub fn g_functional(&self, a: &Matrix, alpha: f64, norm: RNorm) -> Result<f64> {
        self.check_functional_inputs(a, alpha)?;
        Ok(self.g_functional_raw(a, alpha, norm))
    }

    /// Per-agent tail functionals: coordinate `i` of
    /// `sum_k M_k (A v_k^(1/alpha))_i^alpha`, the tail constant of
    /// agent `i`'s loss `(A V)_i`.
    pub fn g_per_agent(&self, a: &Matrix, alpha: f64) -> Result<Vec<f64>> {
        self.check_functional_inputs(a, alpha)?;
        Ok(self.g_per_agent_raw(a, alpha))
    }

    fn check_functional_inputs(&self, a: &Matrix, alpha: f64) -> Result<()> {
        if !self.canonical {
            return Err(Error::NotCanonical);
        }
        if a.cols() != self.dim {
            return Err(Error::ShapeMismatch {
                context: "allocation columns vs. measure dimension",
                expected: self.dim,
                found: a.cols(),
            });
        }
        a.require_nonnegative("allocation matrix")?;
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                constraint: "must be finite and > 0",
            });
        }
        Ok(())
    }

    /// Root-transformed atom images `A v_k^(1/alpha)`, one per atom.
    fn atom_images(&self, a: &Matrix, alpha: f64) -> Vec<Vec<f64>> {
        let inv = 1.0 / alpha;
        self.atoms
            .iter()
            .map(|atom| {
                let root: Vec<f64> = atom
                    .direction
                    .iter()
                    .map(|&s| if s == 0.0 { 0.0 } else { fmath::powf(s, inv) })
                    .collect();
                a.mul_vec(&root)
            })
            .collect()
    }

    pub(crate) fn g_functional_raw(&self, a: &Matrix, alpha: f64, norm: RNorm) -> f64 {
        let terms: Vec<(f64, f64)> = self
            .atom_images(a, alpha)
            .into_iter()
            .zip(&self.atoms)
            .map(|(image, atom)| (atom.mass, norm.eval(&image)))
            .collect();
        weighted_power_sum(&terms, alpha)
    }

    pub(crate) fn g_per_agent_raw(&self, a: &Matrix, alpha: f64) -> Vec<f64> {
        let images = self.atom_images(a, alpha);
        (0..a.rows())
            .map(|i| {
                let terms: Vec<(f64, f64)> = images
                    .iter()
                    .zip(&self.atoms)
                    .map(|(image, atom)| (atom.mass, image[i]))
                    .collect();
                weighted_power_sum(&terms, alpha)
            })
            .collect()
    }
}

fn reproject(mut direction: Vec<f64>, len: f64) -> Vec<f64> {
    if len != 1.0 {
        for x in &mut direction {
            *x /= len;
        }
    }
    direction
}

fn directions_equal(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| fmath::abs(x - y) <= DIRECTION_TOL)
}
