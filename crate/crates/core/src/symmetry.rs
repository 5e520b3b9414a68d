//! Register permutations and exchange (anti)symmetrization.
//!
//! A permutation `σ` acts on basis states as
//! `U_σ |R_1 … R_n⟩ = |R_σ(1) … R_σ(n)⟩`: register `i` of the image holds
//! what register `σ(i)` held before. Each register carries its grid label
//! and, when enabled, its spin, and the two move together.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Basis, ParticleSet};
use crate::state::DensityMatrix;
use crate::{CMatrix, CVector, Error, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

/// Largest declared set; the symmetrizer sums `k!` terms explicitly.
pub const MAX_SET_SIZE: usize = 5;
/// Largest full group enumerated by [`SymmetryDeclaration::group`].
pub const MAX_GROUP_SIZE: usize = 100_000;

/// Register sets to be symmetrized (bosonic) or antisymmetrized (fermionic).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryDeclaration {
    bosonic: Vec<Vec<usize>>,
    fermionic: Vec<Vec<usize>>,
    n_registers: usize,
}

impl SymmetryDeclaration {
    pub fn new(bosonic: Vec<Vec<usize>>, fermionic: Vec<Vec<usize>>, particles: &ParticleSet) -> Result<Self> {
        let n = particles.len();
        let mut seen = vec![false; n];
        for set in bosonic.iter().chain(&fermionic) {
            if set.is_empty() || set.len() > MAX_SET_SIZE {
                return Err(Error::InvalidDeclaration(format!(
                    "set sizes must be 1..={MAX_SET_SIZE}, got {}",
                    set.len()
                )));
            }
            for &r in set {
                if r >= n {
                    return Err(Error::InvalidDeclaration(format!("register {r} out of range ({n})")));
                }
                if core::mem::replace(&mut seen[r], true) {
                    return Err(Error::InvalidDeclaration(format!("register {r} declared twice")));
                }
                if !particles.get(r).same_species(particles.get(set[0])) {
                    return Err(Error::InvalidDeclaration(format!(
                        "register {r} is not the same species as register {}",
                        set[0]
                    )));
                }
            }
        }
        Ok(Self { bosonic, fermionic, n_registers: n })
    }

    pub fn bosonic(&self) -> &[Vec<usize>] {
        &self.bosonic
    }

    pub fn fermionic(&self) -> &[Vec<usize>] {
        &self.fermionic
    }

    pub fn n_registers(&self) -> usize {
        self.n_registers
    }

    fn sets(&self) -> impl Iterator<Item = (&Vec<usize>, bool)> {
        self.bosonic.iter().map(|s| (s, false)).chain(self.fermionic.iter().map(|s| (s, true)))
    }

    /// Adjacent transpositions within each set, in declaration order.
    pub fn generators(&self) -> Vec<Permutation> {
        let mut out = Vec::new();
        for (set, _) in self.sets() {
            for w in set.windows(2) {
                out.push(self.transposition(w[0], w[1]).expect("declared registers"));
            }
        }
        out
    }

    pub fn transposition(&self, a: usize, b: usize) -> Result<Permutation> {
        let mut map: Vec<usize> = (0..self.n_registers).collect();
        if a >= map.len() || b >= map.len() {
            return Err(Error::InvalidPermutation(format!("({a} {b}) out of range")));
        }
        map.swap(a, b);
        Permutation::new(self, map)
    }

    /// Every element of the product of the declared symmetric groups.
    pub fn group(&self) -> Result<Vec<Permutation>> {
        let mut size = 1usize;
        for (set, _) in self.sets() {
            size = size.saturating_mul(factorial(set.len()));
        }
        if size > MAX_GROUP_SIZE {
            return Err(Error::InvalidDeclaration(format!("group of order {size} is too large")));
        }
        let mut maps: Vec<Vec<usize>> = vec![(0..self.n_registers).collect()];
        for (set, _) in self.sets() {
            let mut next = Vec::with_capacity(maps.len() * factorial(set.len()));
            for arrangement in arrangements(set.len()) {
                for m in &maps {
                    let mut m = m.clone();
                    for (slot, &src) in arrangement.iter().enumerate() {
                        m[set[slot]] = set[src];
                    }
                    next.push(m);
                }
            }
            maps = next;
        }
        maps.into_iter().map(|m| Permutation::new(self, m)).collect()
    }
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// All orderings of `0..k`, identity first.
fn arrangements(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Parity of a permutation given as a map on `0..n`: `+1` even, `-1` odd.
fn parity(map: &[usize]) -> i8 {
    let mut visited = vec![false; map.len()];
    let mut sign = 1i8;
    for start in 0..map.len() {
        let mut len = 0;
        let mut i = start;
        while !visited[i] {
            visited[i] = true;
            i = map[i];
            len += 1;
        }
        if len > 0 && len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// A register permutation compatible with a declaration, with its
/// fermionic sign.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
    sign: i8,
}

impl Permutation {
    /// `map[i]` is the register whose content moves into register `i`.
    /// Registers may only move within their declared set.
    pub fn new(decl: &SymmetryDeclaration, map: Vec<usize>) -> Result<Self> {
        let n = decl.n_registers;
        if map.len() != n {
            return Err(Error::InvalidPermutation(format!("length {} != {n} registers", map.len())));
        }
        let mut hit = vec![false; n];
        for &m in &map {
            if m >= n || core::mem::replace(&mut hit[m], true) {
                return Err(Error::InvalidPermutation("not a bijection".into()));
            }
        }
        let mut owner = vec![usize::MAX; n];
        for (k, (set, _)) in decl.sets().enumerate() {
            for &r in set {
                owner[r] = k;
            }
        }
        for (i, &m) in map.iter().enumerate() {
            if i != m && (owner[i] == usize::MAX || owner[i] != owner[m]) {
                return Err(Error::InvalidPermutation(format!("register {m} cannot move to {i}")));
            }
        }
        let mut sign = 1i8;
        for set in &decl.fermionic {
            let local: Vec<usize> = set
                .iter()
                .map(|&r| set.iter().position(|&x| x == map[r]).expect("closed set"))
                .collect();
            sign *= parity(&local);
        }
        Ok(Self { map, sign })
    }

    pub fn identity(n_registers: usize) -> Self {
        Self { map: (0..n_registers).collect(), sign: 1 }
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// The permutation whose operator is `U_self · U_other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            map: self.map.iter().map(|&i| other.map[i]).collect(),
            sign: self.sign * other.sign,
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &m) in self.map.iter().enumerate() {
            inv[m] = i;
        }
        Permutation { map: inv, sign: self.sign }
    }

    /// Basis index of `U_σ |index⟩`.
    pub fn apply_index(&self, basis: &Basis, index: usize) -> usize {
        self.map
            .iter()
            .enumerate()
            .map(|(i, &src)| basis.local_index(index, src) * basis.stride(i))
            .sum()
    }

    /// `π` with `U_σ |k⟩ = |π[k]⟩` for every basis index.
    pub fn index_map(&self, basis: &Basis) -> Result<Vec<usize>> {
        if self.map.len() != basis.n_registers() {
            return Err(Error::DimensionMismatch { expected: basis.n_registers(), got: self.map.len() });
        }
        Ok((0..basis.size()).map(|k| self.apply_index(basis, k)).collect())
    }
}

/// The 0/1 matrix `U_σ`. Returned as a plain matrix: permutation operators
/// are unitary but not Hermitian in general.
pub fn permutation_matrix(perm: &Permutation, basis: &Basis) -> Result<CMatrix> {
    let pi = perm.index_map(basis)?;
    let mut u = CMatrix::zeros(basis.size(), basis.size());
    for (k, &j) in pi.iter().enumerate() {
        u[(j, k)] = C64::new(1.0, 0.0);
    }
    Ok(u)
}

fn permute_vector(pi: &[usize], v: &CVector) -> CVector {
    let mut out = CVector::zeros(v.len());
    for (k, &j) in pi.iter().enumerate() {
        out[j] = v[k];
    }
    out
}

/// Index maps and signs for every element of one declared set's group.
fn set_group(decl: &SymmetryDeclaration, set: &[usize], basis: &Basis) -> Result<Vec<(Vec<usize>, f64)>> {
    arrangements(set.len())
        .into_iter()
        .map(|arr| {
            let mut map: Vec<usize> = (0..decl.n_registers).collect();
            for (slot, &src) in arr.iter().enumerate() {
                map[set[slot]] = set[src];
            }
            let p = Permutation::new(decl, map)?;
            Ok((p.index_map(basis)?, p.sign as f64))
        })
        .collect()
}

fn check_basis(decl: &SymmetryDeclaration, basis: &Basis) -> Result<()> {
    if decl.n_registers != basis.n_registers() {
        return Err(Error::DimensionMismatch { expected: basis.n_registers(), got: decl.n_registers });
    }
    Ok(())
}

const VANISHING: f64 = 1e-12;

/// Apply the (anti)symmetrizer of every declared set and renormalize.
pub fn antisymmetrize_vector(psi: &CVector, decl: &SymmetryDeclaration, basis: &Basis) -> Result<CVector> {
    check_basis(decl, basis)?;
    if psi.len() != basis.size() {
        return Err(Error::DimensionMismatch { expected: basis.size(), got: psi.len() });
    }
    let input_norm = psi.norm();
    let mut v = psi.clone();
    for (set, _) in decl.sets() {
        let mut acc = CVector::zeros(v.len());
        for (pi, sign) in set_group(decl, set, basis)? {
            acc += permute_vector(&pi, &v) * C64::new(sign, 0.0);
        }
        v = acc;
    }
    let n = v.norm();
    if !(n > VANISHING * input_norm.max(1.0)) {
        return Err(Error::VanishingNorm);
    }
    Ok(v / C64::new(n, 0.0))
}

/// `P ρ P / tr(P ρ P)` with `P` the product of the declared set projectors.
pub fn antisymmetrize_density(rho: &DensityMatrix, decl: &SymmetryDeclaration, basis: &Basis) -> Result<DensityMatrix> {
    check_basis(decl, basis)?;
    if rho.dim() != basis.size() {
        return Err(Error::DimensionMismatch { expected: basis.size(), got: rho.dim() });
    }
    let mut m = rho.matrix().clone();
    for (set, _) in decl.sets() {
        let group = set_group(decl, set, basis)?;
        let inv = C64::new(1.0 / group.len() as f64, 0.0);
        // P m, then (P (P m)†)† = P m P
        let left = apply_projector_rows(&group, &m) * inv;
        m = (apply_projector_rows(&group, &left.adjoint()) * inv).adjoint();
    }
    let tr: f64 = (0..m.nrows()).map(|i| m[(i, i)].re).sum();
    if !(tr > VANISHING) {
        return Err(Error::VanishingNorm);
    }
    Ok(DensityMatrix::new_unchecked(m / C64::new(tr, 0.0)))
}

/// `Σ_σ sgn(σ) U_σ m`, by permuting rows.
fn apply_projector_rows(group: &[(Vec<usize>, f64)], m: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for (pi, sign) in group {
        let s = C64::new(*sign, 0.0);
        for (k, &j) in pi.iter().enumerate() {
            let mut row = out.row_mut(j);
            row += m.row(k) * s;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    /// `max_σ ‖U_σ ρ U_σ† − ρ‖_max` over the generators.
    pub max_deviation: f64,
    /// `max_σ ‖U_σ ρ − sgn(σ) ρ‖_max`; also sees the fermionic sign.
    pub sign_deviation: f64,
}

pub fn symmetry_check(rho: &DensityMatrix, decl: &SymmetryDeclaration, basis: &Basis) -> Result<SymmetryReport> {
    symmetry_check_with(rho, &decl.generators(), basis)
}

/// As [`symmetry_check`], over an explicit list of permutations.
pub fn symmetry_check_with(rho: &DensityMatrix, perms: &[Permutation], basis: &Basis) -> Result<SymmetryReport> {
    let m = rho.matrix();
    let mut report = SymmetryReport { max_deviation: 0.0, sign_deviation: 0.0 };
    for p in perms {
        let pi = p.index_map(basis)?;
        let s = p.sign() as f64;
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                // (U ρ U†)[π r, π c] = ρ[r, c];  (U ρ)[π r, c] = ρ[r, c]
                let conj = (m[(pi[r], pi[c])] - m[(r, c)]).norm();
                let left = (m[(pi[r], c)] - m[(r, c)] * s).norm();
                report.max_deviation = report.max_deviation.max(conj);
                report.sign_deviation = report.sign_deviation.max(left);
            }
        }
    }
    Ok(report)
}

/// `max_σ ‖U_σ ψ − sgn(σ) ψ‖` over the generators.
pub fn symmetry_check_pure(psi: &CVector, decl: &SymmetryDeclaration, basis: &Basis) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in decl.generators() {
        let pi = p.index_map(basis)?;
        let moved = permute_vector(&pi, psi);
        worst = worst.max((moved - psi * C64::new(p.sign() as f64, 0.0)).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, Particle, Site};
    use crate::linalg::max_abs_diff;
    use crate::Configuration;
    use proptest::prelude::*;
    use rand::{seq::SliceRandom, Rng, SeedableRng};

    fn basis(m: usize, n: usize, spin: bool) -> Basis {
        Basis::new(GridSpec::new(m, 1, m as f64).unwrap(), ParticleSet::molecular(n, spin, &[]).unwrap()).unwrap()
    }

    fn ket(b: &Basis, labels: &[i64]) -> CVector {
        let cfg = Configuration::spinless(labels.iter().map(|&x| Site::new_1d(x)).collect());
        let mut v = CVector::zeros(b.size());
        v[b.index_of(&cfg).unwrap()] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn declaration_validation() {
        let p = ParticleSet::molecular(2, false, &[Particle::nucleus(10.0, 1.0, false)]).unwrap();
        assert!(SymmetryDeclaration::new(vec![], vec![vec![0, 1]], &p).is_ok());
        assert!(SymmetryDeclaration::new(vec![], vec![vec![0, 2]], &p).is_err());
        assert!(SymmetryDeclaration::new(vec![vec![0]], vec![vec![0, 1]], &p).is_err());
        assert!(SymmetryDeclaration::new(vec![], vec![vec![0, 3]], &p).is_err());
        let six = ParticleSet::molecular(6, false, &[]).unwrap();
        assert!(SymmetryDeclaration::new(vec![], vec![(0..6).collect()], &six).is_err());
    }

    #[test]
    fn identity_and_swap_matrices() {
        let b = basis(3, 2, false);
        let decl = SymmetryDeclaration::new(vec![], vec![vec![0, 1]], b.particles()).unwrap();
        let id = permutation_matrix(&Permutation::identity(2), &b).unwrap();
        assert_eq!(id, CMatrix::identity(9, 9));
        let swap = permutation_matrix(&decl.transposition(0, 1).unwrap(), &b).unwrap();
        for x in -1..=1 {
            for y in -1..=1 {
                assert_eq!(&swap * ket(&b, &[x, y]), ket(&b, &[y, x]));
            }
        }
    }

    #[test]
    fn random_permutations_are_unitary() {
        let b = basis(3, 4, false);
        let decl = SymmetryDeclaration::new(vec![vec![0, 1, 2, 3]], vec![], b.particles()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let mut map: Vec<usize> = (0..4).collect();
            map.shuffle(&mut rng);
            let u = permutation_matrix(&Permutation::new(&decl, map).unwrap(), &b).unwrap();
            assert!(max_abs_diff(&(&u * u.adjoint()), &CMatrix::identity(81, 81)) < 1e-15);
        }
    }

    #[test]
    fn pauli_exclusion() {
        let b = basis(3, 2, false);
        let decl = SymmetryDeclaration::new(vec![], vec![vec![0, 1]], b.particles()).unwrap();
        assert_eq!(antisymmetrize_vector(&ket(&b, &[1, 1]), &decl, &b), Err(Error::VanishingNorm));
        let rho = DensityMatrix::from_pure(&ket(&b, &[0, 0])).unwrap();
        assert_eq!(antisymmetrize_density(&rho, &decl, &b), Err(Error::VanishingNorm));
    }

    #[test]
    fn two_particle_combinations() {
        let b = basis(3, 2, false);
        let r = C64::new(0.5f64.sqrt(), 0.0);
        let f = SymmetryDeclaration::new(vec![], vec![vec![0, 1]], b.particles()).unwrap();
        let got = antisymmetrize_vector(&ket(&b, &[-1, 1]), &f, &b).unwrap();
        assert!((got - (ket(&b, &[-1, 1]) - ket(&b, &[1, -1])) * r).norm() < 1e-15);
        let bo = SymmetryDeclaration::new(vec![vec![0, 1]], vec![], b.particles()).unwrap();
        let got = antisymmetrize_vector(&ket(&b, &[-1, 1]), &bo, &b).unwrap();
        assert!((got - (ket(&b, &[-1, 1]) + ket(&b, &[1, -1])) * r).norm() < 1e-15);
    }

    #[test]
    fn spin_moves_with_label() {
        let b = basis(3, 2, true);
        let decl = SymmetryDeclaration::new(vec![], vec![vec![0, 1]], b.particles()).unwrap();
        let cfg = |s0, s1| Configuration {
            sites: vec![Site::new_1d(0), Site::new_1d(0)],
            spins: vec![Some(s0), Some(s1)],
        };
        use crate::Spin::*;
        let mut v = CVector::zeros(b.size());
        v[b.index_of(&cfg(Up, Down)).unwrap()] = C64::new(1.0, 0.0);
        // same site, opposite spins: allowed, gives the spin singlet
        let out = antisymmetrize_vector(&v, &decl, &b).unwrap();
        assert!((out[b.index_of(&cfg(Down, Up)).unwrap()].re + 0.5f64.sqrt()).abs() < 1e-15);
        let mut v = CVector::zeros(b.size());
        v[b.index_of(&cfg(Up, Up)).unwrap()] = C64::new(1.0, 0.0);
        assert_eq!(antisymmetrize_vector(&v, &decl, &b), Err(Error::VanishingNorm));
    }

    fn random_rho(n: usize, rng: &mut impl Rng) -> DensityMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        DensityMatrix::renormalized(&a * a.adjoint()).unwrap()
    }

    #[test]
    fn density_symmetrizer_matches_projector_and_is_idempotent() {
        let b = basis(3, 3, false);
        let decl = SymmetryDeclaration::new(vec![], vec![vec![0, 1, 2]], b.particles()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rho = random_rho(b.size(), &mut rng);
        // explicit projector from the full group
        let mut p = CMatrix::zeros(27, 27);
        for g in decl.group().unwrap() {
            p += permutation_matrix(&g, &b).unwrap() * C64::new(g.sign() as f64 / 6.0, 0.0);
        }
        let want = DensityMatrix::renormalized(&p * rho.matrix() * &p).unwrap();
        let once = antisymmetrize_density(&rho, &decl, &b).unwrap();
        assert!(max_abs_diff(once.matrix(), want.matrix()) < 1e-12);
        let twice = antisymmetrize_density(&once, &decl, &b).unwrap();
        assert!(max_abs_diff(once.matrix(), twice.matrix()) < 1e-12);
        let rep = symmetry_check(&once, &decl, &b).unwrap();
        assert!(rep.max_deviation < 1e-12 && rep.sign_deviation < 1e-12);
    }

    #[test]
    fn product_state_is_not_symmetric() {
        let b = basis(3, 2, false);
        let decl = SymmetryDeclaration::new(vec![], vec![vec![0, 1]], b.particles()).unwrap();
        let rho = DensityMatrix::from_pure(&ket(&b, &[-1, 1])).unwrap();
        assert!(symmetry_check(&rho, &decl, &b).unwrap().max_deviation > 0.5);
        assert!(symmetry_check_pure(&ket(&b, &[-1, 1]), &decl, &b).unwrap() > 0.5);
    }

    #[test]
    fn generators_imply_full_group_invariance() {
        let b = basis(3, 4, false);
        let decl = SymmetryDeclaration::new(vec![vec![2, 3]], vec![vec![0, 1]], b.particles()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let v = CVector::from_fn(b.size(), |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>()));
        let psi = antisymmetrize_vector(&v, &decl, &b).unwrap();
        assert!(symmetry_check_pure(&psi, &decl, &b).unwrap() < 1e-12);
        let group = decl.group().unwrap();
        for _ in 0..50 {
            let g = &group[rng.random_range(0..group.len())];
            let moved = permute_vector(&g.index_map(&b).unwrap(), &psi);
            assert!((moved - &psi * C64::new(g.sign() as f64, 0.0)).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn sign_is_multiplicative(a in 0usize..120, c in 0usize..120) {
            let p = ParticleSet::molecular(5, false, &[]).unwrap();
            let decl = SymmetryDeclaration::new(vec![], vec![(0..5).collect()], &p).unwrap();
            let group = decl.group().unwrap();
            let (x, y) = (&group[a], &group[c]);
            let xy = x.compose(y);
            let rebuilt = Permutation::new(&decl, xy.map().to_vec()).unwrap();
            prop_assert_eq!(rebuilt.sign(), x.sign() * y.sign());
        }
    }

    #[test]
    fn compose_matches_matrix_product() {
        let b = basis(3, 3, false);
        let decl = SymmetryDeclaration::new(vec![vec![0, 1, 2]], vec![], b.particles()).unwrap();
        let g = decl.group().unwrap();
        for x in &g {
            for y in &g {
                let lhs = permutation_matrix(x, &b).unwrap() * permutation_matrix(y, &b).unwrap();
                assert_eq!(lhs, permutation_matrix(&x.compose(y), &b).unwrap());
            }
        }
        assert!(g[0].is_identity());
        assert_eq!(g.len(), 6);
    }
}
