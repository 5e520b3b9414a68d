//! Geometric success criteria on nuclear configurations and the basis
//! bipartition they induce.
//!
//! Pair indices count nuclei only, in register order: pair `(0, 1)` refers
//! to the first two nuclear registers whatever electrons precede them.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Basis, Configuration, GridSpec, ParticleSet};
use crate::symmetry::{Permutation, SymmetryDeclaration};
use crate::units::Length;
use crate::{Error, Result};

#[allow(unused_imports)]
use num_traits::Float;

/// Bases up to this size are validated exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 4096;
/// Sampled configurations above [`EXHAUSTIVE_LIMIT`].
pub const SAMPLE_DRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionMode {
    /// `| |R_j − R_k| − target | ≤ ε` for every pair.
    Equilibrium,
    /// `|R_j − R_k| ≤ Δ_jk` for every pair.
    Proximity,
}

/// One pair constraint; `distance` is the target (equilibrium) or the
/// threshold (proximity), in Bohr.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairConstraint {
    pub j: usize,
    pub k: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricCriterion {
    mode: CriterionMode,
    pairs: Vec<PairConstraint>,
    epsilon: f64,
    /// Nucleus relabelings; the criterion holds if it holds on any image.
    /// Empty means the identity only.
    images: Vec<Vec<usize>>,
}

impl GeometricCriterion {
    pub fn equilibrium(pairs: &[(usize, usize, Length)], epsilon: Length) -> Result<Self> {
        let eps = epsilon.in_bohr()?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidCriterion(format!("epsilon must be > 0, got {eps}")));
        }
        Self::build(CriterionMode::Equilibrium, pairs, eps)
    }

    pub fn proximity(pairs: &[(usize, usize, Length)]) -> Result<Self> {
        Self::build(CriterionMode::Proximity, pairs, 0.0)
    }

    fn build(mode: CriterionMode, pairs: &[(usize, usize, Length)], epsilon: f64) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidCriterion("no pairs".into()));
        }
        let pairs = pairs
            .iter()
            .map(|&(j, k, d)| {
                let distance = d.in_bohr()?;
                if j == k {
                    return Err(Error::InvalidCriterion(format!("pair ({j}, {k}) repeats a nucleus")));
                }
                if !(distance > 0.0 && distance.is_finite()) {
                    return Err(Error::InvalidCriterion(format!("distance for ({j}, {k}) must be > 0")));
                }
                Ok(PairConstraint { j, k, distance })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mode, pairs, epsilon, images: Vec::new() })
    }

    pub fn mode(&self) -> CriterionMode {
        self.mode
    }

    pub fn pairs(&self) -> &[PairConstraint] {
        &self.pairs
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn images(&self) -> &[Vec<usize>] {
        &self.images
    }

    fn check_indices(&self, n_nuc: usize) -> Result<()> {
        for p in &self.pairs {
            for index in [p.j, p.k] {
                if index >= n_nuc {
                    return Err(Error::PairIndexOutOfRange { index, n_nuc });
                }
            }
        }
        for img in &self.images {
            if img.len() != n_nuc {
                return Err(Error::InvalidCriterion("relabeling does not match the nuclei".into()));
            }
        }
        Ok(())
    }

    fn holds(&self, nuclei: &[[f64; 3]], relabel: Option<&[usize]>) -> bool {
        let at = |j: usize| nuclei[relabel.map_or(j, |r| r[j])];
        self.pairs.iter().all(|p| {
            let (a, b) = (at(p.j), at(p.k));
            let d = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            match self.mode {
                CriterionMode::Equilibrium => (d - p.distance).abs() <= self.epsilon,
                CriterionMode::Proximity => d <= p.distance,
            }
        })
    }

    fn eval_coords(&self, nuclei: &[[f64; 3]]) -> bool {
        if self.images.is_empty() {
            self.holds(nuclei, None)
        } else {
            self.images.iter().any(|r| self.holds(nuclei, Some(r)))
        }
    }

    /// Evaluate on one configuration.
    pub fn evaluate(&self, grid: &GridSpec, particles: &ParticleSet, config: &Configuration) -> Result<bool> {
        if config.sites.len() != particles.len() {
            return Err(Error::InvalidParticles(format!(
                "configuration has {} registers, expected {}",
                config.sites.len(),
                particles.len()
            )));
        }
        let nuc = particles.nucleus_registers();
        self.check_indices(nuc.len())?;
        let coords = nuc
            .iter()
            .map(|&r| grid.label_to_coord(config.sites[r]))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.eval_coords(&coords))
    }

    /// Evaluate on a basis index.
    pub fn evaluate_index(&self, basis: &Basis, index: usize) -> Result<bool> {
        let nuc = basis.particles().nucleus_registers();
        self.check_indices(nuc.len())?;
        Ok(self.eval_index_unchecked(basis, &nuc, index))
    }

    fn eval_index_unchecked(&self, basis: &Basis, nuc: &[usize], index: usize) -> bool {
        let coords: Vec<[f64; 3]> = nuc
            .iter()
            .map(|&r| basis.grid().coord_unchecked(basis.site_of(index, r)))
            .collect();
        self.eval_coords(&coords)
    }

    /// Replace the criterion by the disjunction of its images under every
    /// element of the declared permutation group.
    pub fn symmetrized(&self, decl: &SymmetryDeclaration, particles: &ParticleSet) -> Result<Self> {
        let nuc = particles.nucleus_registers();
        self.check_indices(nuc.len())?;
        let mut position = alloc::vec![usize::MAX; particles.len()];
        for (j, &r) in nuc.iter().enumerate() {
            position[r] = j;
        }
        let mut images: Vec<Vec<usize>> = Vec::new();
        for g in decl.group()? {
            let img: Vec<usize> = nuc.iter().map(|&r| position[g.map()[r]]).collect();
            if !images.contains(&img) {
                images.push(img);
            }
        }
        Ok(Self { images, ..self.clone() })
    }
}

/// Basis indices accepted (`A`) and rejected (`B`) by a criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    pub set_a: Vec<usize>,
    pub set_b: Vec<usize>,
    mask: Vec<bool>,
}

impl Bipartition {
    /// From a membership mask over the basis.
    pub fn from_mask(mask: Vec<bool>) -> Self {
        let set_a = (0..mask.len()).filter(|&i| mask[i]).collect();
        let set_b = (0..mask.len()).filter(|&i| !mask[i]).collect();
        Self { set_a, set_b, mask }
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn in_a(&self, index: usize) -> bool {
        self.mask[index]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

pub fn bipartition(c: &GeometricCriterion, basis: &Basis) -> Result<Bipartition> {
    let nuc = basis.particles().nucleus_registers();
    c.check_indices(nuc.len())?;
    Ok(Bipartition::from_mask((0..basis.size()).map(|i| c.eval_index_unchecked(basis, &nuc, i)).collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymmetryValidation {
    Symmetric { checked: usize, exhaustive: bool },
    /// `criterion(index) != criterion(U_σ index)`.
    Counterexample { permutation: Permutation, index: usize },
}

impl SymmetryValidation {
    pub fn is_symmetric(&self) -> bool {
        matches!(self, SymmetryValidation::Symmetric { .. })
    }
}

/// Check invariance of the criterion under the declaration's generators,
/// exhaustively up to [`EXHAUSTIVE_LIMIT`] configurations and on
/// [`SAMPLE_DRAWS`] seeded draws above.
pub fn validate_symmetric(
    c: &GeometricCriterion,
    decl: &SymmetryDeclaration,
    basis: &Basis,
    seed: u64,
) -> Result<SymmetryValidation> {
    let nuc = basis.particles().nucleus_registers();
    c.check_indices(nuc.len())?;
    if decl.n_registers() != basis.n_registers() {
        return Err(Error::DimensionMismatch { expected: basis.n_registers(), got: decl.n_registers() });
    }
    let gens = decl.generators();
    let exhaustive = basis.size() <= EXHAUSTIVE_LIMIT;
    let indices: Vec<usize> = if exhaustive {
        (0..basis.size()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..SAMPLE_DRAWS).map(|_| rng.random_range(0..basis.size())).collect()
    };
    for &i in &indices {
        let here = c.eval_index_unchecked(basis, &nuc, i);
        for g in &gens {
            if c.eval_index_unchecked(basis, &nuc, g.apply_index(basis, i)) != here {
                return Ok(SymmetryValidation::Counterexample { permutation: g.clone(), index: i });
            }
        }
    }
    Ok(SymmetryValidation::Symmetric { checked: indices.len(), exhaustive })
}
