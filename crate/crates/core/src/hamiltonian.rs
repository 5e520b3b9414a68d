//! Dense operator blocks on a configuration basis and the scheduled merging
//! Hamiltonian `H(s) = H_A + H_B + f(s)·H_AB + g(s)·V_trap`.
//!
//! Kinetic energy uses the 3-point finite-difference Laplacian with Dirichlet
//! edges. Coulomb terms are softened, `q_i q_j / sqrt(r² + a²)`. The trap is a
//! per-nucleus harmonic well acting on nuclear coordinates only.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Basis, ParticleKind, Site};
use crate::linalg::{from_real_diagonal, hermitian_deviation, max_abs};
use crate::schedule::Schedule;
use crate::{CMatrix, Error, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

/// Hermiticity tolerance for operator blocks, max-entry norm.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockTag {
    Kinetic,
    CoulombEe,
    CoulombNn,
    CoulombNe,
    Trap,
    External,
    /// Sum of blocks with different tags.
    Composite,
}

impl BlockTag {
    pub fn name(self) -> &'static str {
        match self {
            BlockTag::Kinetic => "kinetic",
            BlockTag::CoulombEe => "coulomb_ee",
            BlockTag::CoulombNn => "coulomb_nn",
            BlockTag::CoulombNe => "coulomb_ne",
            BlockTag::Trap => "trap",
            BlockTag::External => "external",
            BlockTag::Composite => "composite",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            BlockTag::Kinetic,
            BlockTag::CoulombEe,
            BlockTag::CoulombNn,
            BlockTag::CoulombNe,
            BlockTag::Trap,
            BlockTag::External,
            BlockTag::Composite,
        ]
        .into_iter()
        .find(|t| t.name() == name)
    }

    fn accepts_pair(self, a: ParticleKind, b: ParticleKind) -> bool {
        use ParticleKind::*;
        match self {
            BlockTag::CoulombEe => a == Electron && b == Electron,
            BlockTag::CoulombNn => a == Nucleus && b == Nucleus,
            BlockTag::CoulombNe => a != b,
            _ => false,
        }
    }
}

/// Hermitian matrix over an enumerated basis, tagged with its physical role.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBlock {
    matrix: CMatrix,
    tag: BlockTag,
}

impl OperatorBlock {
    pub fn new(matrix: CMatrix, tag: BlockTag) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        let dev = hermitian_deviation(&matrix);
        if !(dev <= HERMITIAN_TOL * max_abs(&matrix).max(1.0)) {
            return Err(Error::NonHermitian(dev));
        }
        Ok(Self { matrix, tag })
    }

    /// Inject a user-supplied Hermitian operator.
    pub fn external(matrix: CMatrix) -> Result<Self> {
        Self::new(matrix, BlockTag::External)
    }

    pub fn zeros(dim: usize, tag: BlockTag) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim), tag }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn tag(&self) -> BlockTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { matrix: &self.matrix * C64::new(factor, 0.0), tag: self.tag }
    }

    /// Sum of blocks; the tag is kept when all agree.
    pub fn sum(dim: usize, blocks: &[&OperatorBlock]) -> Result<Self> {
        let mut m = CMatrix::zeros(dim, dim);
        let mut tag = blocks.first().map(|b| b.tag).unwrap_or(BlockTag::Composite);
        for b in blocks {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: b.dim() });
            }
            if b.tag != tag {
                tag = BlockTag::Composite;
            }
            m += &b.matrix;
        }
        Ok(Self { matrix: m, tag })
    }
}

/// Kinetic energy `Σ_i p_i²/(2 m_i)` over all registers.
pub fn build_kinetic(basis: &Basis) -> OperatorBlock {
    let all: Vec<usize> = (0..basis.n_registers()).collect();
    build_kinetic_for(basis, &all)
}

/// Kinetic energy restricted to the listed registers.
pub fn build_kinetic_for(basis: &Basis, registers: &[usize]) -> OperatorBlock {
    let n = basis.size();
    let grid = basis.grid();
    let h2 = grid.spacing() * grid.spacing();
    let dims = grid.dims();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for &r in registers {
            let p = basis.particles().get(r);
            let sf = if p.spin { 2 } else { 1 };
            let hop = -1.0 / (2.0 * p.mass * h2);
            m[(i, i)] += C64::new(dims as f64 / (p.mass * h2), 0.0);
            let local = basis.local_index(i, r);
            let site = grid.site_at(local / sf);
            for w in 0..dims {
                for step in [-1i64, 1] {
                    let mut nb = site;
                    nb.0[w] += step;
                    if let Ok(si) = grid.site_index(nb) {
                        let j = basis.with_local(i, r, si * sf + local % sf);
                        m[(i, j)] += C64::new(hop, 0.0);
                    }
                }
            }
        }
    }
    OperatorBlock { matrix: m, tag: BlockTag::Kinetic }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    d.sqrt()
}

/// Softened Coulomb interaction for the pairs selected by `tag`
/// (`CoulombEe`, `CoulombNn` or `CoulombNe`).
pub fn build_coulomb(basis: &Basis, softening: f64, tag: BlockTag) -> Result<OperatorBlock> {
    build_coulomb_pairs(basis, softening, tag, |_, _| true)
}

/// As [`build_coulomb`], keeping only register pairs `(i, j)`, `i < j`, for
/// which `keep` holds.
pub fn build_coulomb_pairs(
    basis: &Basis,
    softening: f64,
    tag: BlockTag,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<OperatorBlock> {
    if !matches!(tag, BlockTag::CoulombEe | BlockTag::CoulombNn | BlockTag::CoulombNe) {
        return Err(Error::InvalidParameter(format!("{} is not a Coulomb tag", tag.name())));
    }
    if !(softening >= 0.0 && softening.is_finite()) {
        return Err(Error::InvalidParameter(format!("softening must be >= 0, got {softening}")));
    }
    let parts = basis.particles();
    let nreg = basis.n_registers();
    let mut pairs = Vec::new();
    for i in 0..nreg {
        for j in i + 1..nreg {
            if tag.accepts_pair(parts.get(i).kind, parts.get(j).kind) && keep(i, j) {
                pairs.push((i, j, parts.get(i).charge * parts.get(j).charge));
            }
        }
    }
    let a2 = softening * softening;
    let mut diag = vec![0.0; basis.size()];
    for (idx, d) in diag.iter_mut().enumerate() {
        let coords = basis.coords(idx);
        for &(i, j, qq) in &pairs {
            let r2 = distance(&coords[i], &coords[j]).powi(2) + a2;
            if r2 == 0.0 {
                return Err(Error::SingularCoulomb { i, j });
            }
            *d += qq / r2.sqrt();
        }
    }
    Ok(OperatorBlock { matrix: from_real_diagonal(&diag), tag })
}

/// Sum of all three Coulomb families over the selected pairs.
pub fn build_coulomb_all(
    basis: &Basis,
    softening: f64,
    keep: impl Fn(usize, usize) -> bool + Copy,
) -> Result<OperatorBlock> {
    let ee = build_coulomb_pairs(basis, softening, BlockTag::CoulombEe, keep)?;
    let nn = build_coulomb_pairs(basis, softening, BlockTag::CoulombNn, keep)?;
    let ne = build_coulomb_pairs(basis, softening, BlockTag::CoulombNe, keep)?;
    OperatorBlock::sum(basis.size(), &[&ee, &nn, &ne])
}

/// Harmonic confinement per nucleus with per-axis frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapSpec {
    /// Trap center of each nucleus, in Bohr.
    pub centers: Vec<[f64; 3]>,
    /// Angular frequency per nucleus and axis, in atomic units.
    pub frequencies: Vec<[f64; 3]>,
    pub isotropic: bool,
}

impl TrapSpec {
    pub fn isotropic(centers: Vec<[f64; 3]>, frequencies: &[f64]) -> Self {
        Self {
            centers,
            frequencies: frequencies.iter().map(|&w| [w; 3]).collect(),
            isotropic: true,
        }
    }

    pub fn anisotropic(centers: Vec<[f64; 3]>, frequencies: Vec<[f64; 3]>) -> Self {
        Self { centers, frequencies, isotropic: false }
    }

    /// Same centers, frequencies multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            centers: self.centers.clone(),
            frequencies: self.frequencies.iter().map(|w| w.map(|x| x * factor)).collect(),
            isotropic: self.isotropic,
        }
    }

    fn validate(&self, basis: &Basis) -> Result<()> {
        let n_nuc = basis.particles().n_nuc();
        if self.centers.len() != n_nuc || self.frequencies.len() != n_nuc {
            return Err(Error::InvalidTrap(format!(
                "need one center and frequency per nucleus ({n_nuc}), got {} and {}",
                self.centers.len(),
                self.frequencies.len()
            )));
        }
        let dims = basis.grid().dims();
        let half = basis.grid().box_length() / 2.0;
        for (j, (c, w)) in self.centers.iter().zip(&self.frequencies).enumerate() {
            if w[..dims].iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::InvalidTrap(format!("nucleus {j} has a nonpositive frequency")));
            }
            if self.isotropic && w[..dims].iter().any(|&x| x != w[0]) {
                return Err(Error::InvalidTrap(format!("nucleus {j} is not isotropic")));
            }
            let outside = c.iter().enumerate().any(|(a, &x)| {
                if a < dims {
                    !(x.abs() <= half)
                } else {
                    x != 0.0
                }
            });
            if outside {
                return Err(Error::CenterOutsideBox { nucleus: j });
            }
        }
        Ok(())
    }
}

/// `Σ_j (m_j/2) Σ_w ω_{j,w}² (R_{j,w} - R_{0,j,w})²` per configuration.
pub fn build_trap(basis: &Basis, trap: &TrapSpec) -> Result<OperatorBlock> {
    trap.validate(basis)?;
    let dims = basis.grid().dims();
    let nuclei = basis.particles().nucleus_registers();
    let diag: Vec<f64> = (0..basis.size())
        .map(|idx| {
            nuclei
                .iter()
                .enumerate()
                .map(|(j, &r)| {
                    let m = basis.particles().get(r).mass;
                    let x = basis.grid().coord_unchecked(basis.site_of(idx, r));
                    let quad: f64 = (0..dims)
                        .map(|w| trap.frequencies[j][w].powi(2) * (x[w] - trap.centers[j][w]).powi(2))
                        .sum();
                    0.5 * m * quad
                })
                .sum()
        })
        .collect();
    Ok(OperatorBlock { matrix: from_real_diagonal(&diag), tag: BlockTag::Trap })
}

/// `H(s) = H_A + H_B + f(s)·H_AB + g(s)·V_trap (+ external)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledHamiltonian {
    pub h_a: OperatorBlock,
    pub h_b: OperatorBlock,
    pub h_ab: OperatorBlock,
    pub v_trap: OperatorBlock,
    /// Unscheduled extra term, e.g. user-supplied fields.
    pub external: Option<OperatorBlock>,
    pub schedule: Schedule,
}

impl ScheduledHamiltonian {
    pub fn new(
        h_a: OperatorBlock,
        h_b: OperatorBlock,
        h_ab: OperatorBlock,
        v_trap: OperatorBlock,
        schedule: Schedule,
    ) -> Result<Self> {
        let dim = h_a.dim();
        for b in [&h_b, &h_ab, &v_trap] {
            if b.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: b.dim() });
            }
        }
        Ok(Self { h_a, h_b, h_ab, v_trap, external: None, schedule })
    }

    pub fn with_external(mut self, external: OperatorBlock) -> Result<Self> {
        if external.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: external.dim() });
        }
        self.external = Some(external);
        Ok(self)
    }

    /// Assemble the blocks from a two-fragment partition of the registers:
    /// intra-fragment kinetic and Coulomb terms go to `H_A`/`H_B`, Coulomb
    /// pairs across the fragments to `H_AB`.
    pub fn from_partition(
        basis: &Basis,
        fragment_a: &[usize],
        fragment_b: &[usize],
        softening: f64,
        trap: &TrapSpec,
        schedule: Schedule,
    ) -> Result<Self> {
        let n = basis.n_registers();
        let mut owner = vec![None; n];
        for (side, frag) in [(0u8, fragment_a), (1u8, fragment_b)] {
            for &r in frag {
                match owner.get_mut(r) {
                    Some(slot @ None) => *slot = Some(side),
                    Some(Some(_)) => {
                        return Err(Error::InvalidParameter(format!("register {r} in both fragments")))
                    }
                    None => return Err(Error::InvalidParameter(format!("register {r} out of range"))),
                }
            }
        }
        if owner.iter().any(Option::is_none) {
            return Err(Error::InvalidParameter("fragments must cover every register".into()));
        }
        let owner_ref = &owner;
        let same = |side: u8| move |i: usize, j: usize| owner_ref[i] == Some(side) && owner_ref[j] == Some(side);
        let across = move |i: usize, j: usize| owner_ref[i] != owner_ref[j];

        let t_a = build_kinetic_for(basis, fragment_a);
        let t_b = build_kinetic_for(basis, fragment_b);
        let v_a = build_coulomb_all(basis, softening, same(0))?;
        let v_b = build_coulomb_all(basis, softening, same(1))?;
        let dim = basis.size();
        let h_a = OperatorBlock::sum(dim, &[&t_a, &v_a])?;
        let h_b = OperatorBlock::sum(dim, &[&t_b, &v_b])?;
        let h_ab = build_coulomb_all(basis, softening, across)?;
        let v_trap = build_trap(basis, trap)?;
        Self::new(h_a, h_b, h_ab, v_trap, schedule)
    }

    pub fn dim(&self) -> usize {
        self.h_a.dim()
    }

    /// `H_A + H_B + f·H_AB + g·V_trap (+ external)` for explicit weights.
    pub fn combine(&self, f: f64, g: f64) -> CMatrix {
        let mut m = self.h_a.matrix() + self.h_b.matrix();
        if f != 0.0 {
            m += self.h_ab.matrix() * C64::new(f, 0.0);
        }
        if g != 0.0 {
            m += self.v_trap.matrix() * C64::new(g, 0.0);
        }
        if let Some(ext) = &self.external {
            m += ext.matrix();
        }
        m
    }

    pub fn evaluate(&self, s: f64) -> Result<OperatorBlock> {
        self.schedule.check(s)?;
        Ok(OperatorBlock {
            matrix: self.combine(self.schedule.f(s), self.schedule.g(s)),
            tag: BlockTag::Composite,
        })
    }

    /// Trap strengthened by a frequency factor (the block scales with ω²).
    pub fn with_trap_frequency_factor(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.v_trap = self.v_trap.scaled(factor * factor);
        out
    }

    /// Upper bound on `max |H(s)_ij|` over the schedule.
    pub fn max_entry_bound(&self) -> f64 {
        max_abs(&(self.h_a.matrix() + self.h_b.matrix()))
            + max_abs(self.h_ab.matrix())
            + max_abs(self.v_trap.matrix())
            + self.external.as_ref().map_or(0.0, |e| max_abs(e.matrix()))
    }
}

/// Site of a 1-D lattice label, for tests and examples.
pub fn site1(x: i64) -> Site {
    Site::new_1d(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, Particle, ParticleSet};
    use crate::linalg::HermitianEigen;
    use crate::schedule::Profile;
    use crate::Configuration;
    use proptest::prelude::*;

    fn grid(m: usize, l: f64) -> GridSpec {
        GridSpec::new(m, 1, l).unwrap()
    }

    #[test]
    fn kinetic_three_point_stencil() {
        let g = grid(3, 3.0); // h = 1
        let b = Basis::new(g, ParticleSet::molecular(1, false, &[]).unwrap()).unwrap();
        let t = build_kinetic(&b);
        let m = t.matrix();
        for i in 0..3 {
            assert!((m[(i, i)].re - 1.0).abs() < 1e-15);
        }
        assert!((m[(0, 1)].re + 0.5).abs() < 1e-15);
        assert!((m[(1, 2)].re + 0.5).abs() < 1e-15);
        assert_eq!(m[(0, 2)], C64::new(0.0, 0.0));
        assert_eq!(t.tag(), BlockTag::Kinetic);
    }

    #[test]
    fn kinetic_scales_with_inverse_mass() {
        let g = grid(5, 5.0);
        let e = build_kinetic(&Basis::new(g, ParticleSet::molecular(1, false, &[]).unwrap()).unwrap());
        let nuc = ParticleSet::new(vec![Particle::nucleus(1836.0, 1.0, false)]).unwrap();
        let n = build_kinetic(&Basis::new(g, nuc).unwrap());
        let diff = e.matrix() / C64::new(1836.0, 0.0) - n.matrix();
        assert!(max_abs(&diff) < 1e-16);
    }

    #[test]
    fn two_free_particles_have_minkowski_sum_spectrum() {
        let g = grid(3, 3.0);
        let one = build_kinetic(&Basis::new(g, ParticleSet::molecular(1, false, &[]).unwrap()).unwrap());
        let two = build_kinetic(&Basis::new(g, ParticleSet::molecular(2, false, &[]).unwrap()).unwrap());
        let e1 = HermitianEigen::new(one.matrix()).values;
        let e2 = HermitianEigen::new(two.matrix()).values;
        let mut sums: Vec<f64> = e1.iter().flat_map(|a| e1.iter().map(move |b| a + b)).collect();
        sums.sort_by(f64::total_cmp);
        for (a, b) in sums.iter().zip(e2.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn coulomb_examples() {
        // electron at +1, unit nucleus at -1: -1/2
        let g = grid(3, 3.0);
        let parts = ParticleSet::molecular(1, false, &[Particle::nucleus(1836.0, 1.0, false)]).unwrap();
        let b = Basis::new(g, parts).unwrap();
        let v = build_coulomb(&b, 0.0, BlockTag::CoulombNe);
        assert!(matches!(v, Err(Error::SingularCoulomb { i: 0, j: 1 })));
        let v = build_coulomb_pairs(&b, 0.0, BlockTag::CoulombNe, |_, _| true);
        assert!(v.is_err());
        let cfg = Configuration::spinless(vec![site1(1), site1(-1)]);
        let idx = b.index_of(&cfg).unwrap();
        let v = build_coulomb(&b, 1e-12, BlockTag::CoulombNe).unwrap();
        assert!((v.matrix()[(idx, idx)].re + 0.5).abs() < 1e-15);

        // two coincident electrons with softening 0.1: +10
        let b = Basis::new(g, ParticleSet::molecular(2, false, &[]).unwrap()).unwrap();
        let v = build_coulomb(&b, 0.1, BlockTag::CoulombEe).unwrap();
        assert!((v.matrix()[(4, 4)].re - 10.0).abs() < 1e-12);
    }

    #[test]
    fn coulomb_tag_must_be_coulomb() {
        let b = Basis::new(grid(3, 3.0), ParticleSet::molecular(2, false, &[]).unwrap()).unwrap();
        assert!(build_coulomb(&b, 0.1, BlockTag::Trap).is_err());
        assert!(build_coulomb(&b, -0.1, BlockTag::CoulombEe).is_err());
    }

    #[test]
    fn trap_examples() {
        let g = grid(5, 5.0); // h = 1
        let parts = ParticleSet::new(vec![Particle::nucleus(1836.0, 1.0, false)]).unwrap();
        let b = Basis::new(g, parts).unwrap();
        let trap = TrapSpec::isotropic(vec![[0.0; 3]], &[0.01]);
        let v = build_trap(&b, &trap).unwrap();
        // label 0 sits on the center
        assert_eq!(v.matrix()[(2, 2)].re, 0.0);
        // one Bohr away: 1836/2 * 1e-4 * 1
        assert!((v.matrix()[(3, 3)].re - 0.0918).abs() < 1e-12);
        let v2 = build_trap(&b, &trap.scaled(2.0)).unwrap();
        for i in 0..5 {
            assert!((v2.matrix()[(i, i)].re - 4.0 * v.matrix()[(i, i)].re).abs() < 1e-12);
        }
        let bad = TrapSpec::isotropic(vec![[3.0, 0.0, 0.0]], &[0.01]);
        assert!(matches!(build_trap(&b, &bad), Err(Error::CenterOutsideBox { nucleus: 0 })));
        let bad = TrapSpec::isotropic(vec![[0.0; 3]], &[0.0]);
        assert!(matches!(build_trap(&b, &bad), Err(Error::InvalidTrap(_))));
    }

    #[test]
    fn trap_ignores_electrons() {
        let g = grid(5, 5.0);
        let parts = ParticleSet::molecular(1, false, &[Particle::nucleus(2.0, 1.0, false)]).unwrap();
        let b = Basis::new(g, parts).unwrap();
        let v = build_trap(&b, &TrapSpec::isotropic(vec![[0.0; 3]], &[1.0])).unwrap();
        for i in 0..b.size() {
            let x = b.grid().coord_unchecked(b.site_of(i, 1))[0];
            assert!((v.matrix()[(i, i)].re - x * x).abs() < 1e-12);
        }
    }

    fn toy() -> (Basis, ScheduledHamiltonian) {
        let g = grid(5, 6.0);
        let parts = ParticleSet::molecular(
            1,
            false,
            &[Particle::nucleus(1836.0, 1.0, false), Particle::nucleus(1836.0, 1.0, false)],
        )
        .unwrap();
        let b = Basis::new(g, parts).unwrap();
        let trap = TrapSpec::isotropic(vec![[-1.2, 0.0, 0.0], [1.2, 0.0, 0.0]], &[0.05, 0.05]);
        let sch = Schedule::new(1.0, 2.0, Profile::Smoothstep, Profile::Linear).unwrap();
        let sh = ScheduledHamiltonian::from_partition(&b, &[0, 1], &[2], g.spacing(), &trap, sch).unwrap();
        (b, sh)
    }

    #[test]
    fn evaluate_at_schedule_landmarks() {
        let (_, sh) = toy();
        let base = sh.h_a.matrix() + sh.h_b.matrix();
        assert_eq!(sh.evaluate(0.0).unwrap().matrix(), &base);
        let full = &base + sh.h_ab.matrix() + sh.v_trap.matrix();
        assert!(max_abs(&(sh.evaluate(1.0).unwrap().into_matrix() - full)) < 1e-15);
        let released = &base + sh.h_ab.matrix();
        assert!(max_abs(&(sh.evaluate(2.0).unwrap().into_matrix() - released)) < 1e-15);
        assert!(matches!(sh.evaluate(2.5), Err(Error::ScheduleOutOfRange { .. })));
        assert!(matches!(sh.evaluate(-0.1), Err(Error::ScheduleOutOfRange { .. })));
    }

    #[test]
    fn partition_routes_cross_pairs_to_interaction() {
        let (b, sh) = toy();
        // H_AB holds only the (0,2) electron-nucleus and (1,2) nucleus-nucleus pairs
        let direct = build_coulomb_all(&b, b.grid().spacing(), |i, j| (i < 2) != (j < 2)).unwrap();
        assert_eq!(sh.h_ab.matrix(), direct.matrix());
        assert!(ScheduledHamiltonian::from_partition(
            &b,
            &[0],
            &[2],
            0.1,
            &TrapSpec::isotropic(vec![[0.0; 3]; 2], &[1.0, 1.0]),
            Schedule::linear(1.0, 2.0).unwrap()
        )
        .is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn evaluate_is_hermitian(s in 0.0f64..=2.0) {
            let (_, sh) = toy();
            let h = sh.evaluate(s).unwrap();
            prop_assert!(hermitian_deviation(h.matrix()) < 1e-12);
        }
    }

    #[test]
    fn coulomb_symmetric_under_identical_swap() {
        let (b, _) = toy();
        let v = build_coulomb_all(&b, 0.3, |_, _| true).unwrap();
        for i in 0..b.size() {
            let mut c = b.configuration_at(i);
            c.sites.swap(1, 2);
            let j = b.index_of(&c).unwrap();
            assert!((v.matrix()[(i, i)] - v.matrix()[(j, j)]).norm() < 1e-14);
        }
    }

    #[test]
    fn trap_commutes_with_nuclear_diagonal_operators() {
        let (b, sh) = toy();
        let diag: Vec<f64> = (0..b.size()).map(|i| b.site_of(i, 1).0[0] as f64 * 0.7 + b.site_of(i, 2).0[0] as f64).collect();
        let d = from_real_diagonal(&diag);
        let comm = sh.v_trap.matrix() * &d - &d * sh.v_trap.matrix();
        assert!(max_abs(&comm) < 1e-14);
    }

    #[test]
    fn external_block_must_be_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(OperatorBlock::external(m.clone()), Err(Error::NonHermitian(_))));
        m[(1, 0)] = C64::new(1.0, 0.0);
        assert!(OperatorBlock::external(m).is_ok());
    }
}
