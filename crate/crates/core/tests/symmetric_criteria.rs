//! Symmetric criteria keep exchange symmetry through a measurement; a
//! criterion that singles out one labeling does not.

use mergo_core::criteria::{bipartition, validate_symmetric, Bipartition, GeometricCriterion};
use mergo_core::linalg::max_abs_diff;
use mergo_core::symmetry::{antisymmetrize_density, antisymmetrize_vector, permutation_matrix, symmetry_check, SymmetryDeclaration};
use mergo_core::units::Length;
use mergo_core::weakmeas::analyze;
use mergo_core::{Basis, CMatrix, CVector, Configuration, DensityMatrix, GridSpec, Particle, ParticleSet, Site, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const O_MASS: f64 = 29_156.9;
const H_MASS: f64 = 1_836.15;

/// Two O (bosonic) then two H (fermionic) on a 5-point line with 73.5 pm
/// spacing.
fn h2o2() -> (Basis, SymmetryDeclaration) {
    let parts = ParticleSet::new(vec![
        Particle::nucleus(O_MASS, 8.0, false),
        Particle::nucleus(O_MASS, 8.0, false),
        Particle::nucleus(H_MASS, 1.0, false),
        Particle::nucleus(H_MASS, 1.0, false),
    ])
    .unwrap();
    let h = Length::picometers(73.5).in_bohr().unwrap();
    let basis = Basis::new(GridSpec::new(5, 1, 5.0 * h).unwrap(), parts.clone()).unwrap();
    let decl = SymmetryDeclaration::new(vec![vec![0, 1]], vec![vec![2, 3]], &parts).unwrap();
    (basis, decl)
}

fn naive() -> GeometricCriterion {
    GeometricCriterion::equilibrium(
        &[(0, 2, Length::picometers(95.0)), (1, 3, Length::picometers(95.0)), (0, 1, Length::picometers(147.0))],
        Length::bohr(0.5),
    )
    .unwrap()
}

fn projector(bp: &Bipartition) -> CMatrix {
    CMatrix::from_fn(bp.dim(), bp.dim(), |i, j| C64::new((i == j && bp.in_a(i)) as u8 as f64, 0.0))
}

fn formed(basis: &Basis, decl: &SymmetryDeclaration) -> DensityMatrix {
    let cfg = Configuration::spinless([-1, 1, -2, 2].iter().map(|&x| Site::new_1d(x)).collect());
    let mut v = CVector::zeros(basis.size());
    v[basis.index_of(&cfg).unwrap()] = C64::new(1.0, 0.0);
    DensityMatrix::from_pure(&antisymmetrize_vector(&v, decl, basis).unwrap()).unwrap()
}

#[test]
fn naive_criterion_certifies_half() {
    let (basis, decl) = h2o2();
    let c = naive();
    assert!(!validate_symmetric(&c, &decl, &basis, 1).unwrap().is_symmetric());
    let rho = formed(&basis, &decl);
    let bp = bipartition(&c, &basis).unwrap();
    let a = analyze(&rho, &bp, std::f64::consts::FRAC_PI_2).unwrap();
    assert!((a.p_suc - 0.5).abs() < 1e-12);
    assert!(symmetry_check(a.rho1().unwrap(), &decl, &basis).unwrap().max_deviation > 0.1);
}

#[test]
fn symmetrized_criterion_certifies_all() {
    let (basis, decl) = h2o2();
    let c = naive().symmetrized(&decl, basis.particles()).unwrap();
    assert!(validate_symmetric(&c, &decl, &basis, 1).unwrap().is_symmetric());
    let rho = formed(&basis, &decl);
    let bp = bipartition(&c, &basis).unwrap();
    let a = analyze(&rho, &bp, 0.4).unwrap();
    assert!((a.p_suc - 1.0).abs() < 1e-12);
    assert!(symmetry_check(a.rho1().unwrap(), &decl, &basis).unwrap().max_deviation < 1e-10);
}

fn random_criterion(rng: &mut impl Rng) -> GeometricCriterion {
    let pairs: Vec<_> = (0..rng.random_range(1..=2))
        .map(|_| {
            let j = rng.random_range(0..3);
            let k = (j + rng.random_range(1..3)) % 3;
            (j, k, Length::bohr(rng.random_range(0.5..3.0)))
        })
        .collect();
    if rng.random::<bool>() {
        GeometricCriterion::proximity(&pairs).unwrap()
    } else {
        GeometricCriterion::equilibrium(&pairs, Length::bohr(0.6)).unwrap()
    }
}

#[test]
fn symmetric_criteria_commute_with_generators() {
    // three identical fermions on a 5-point line
    let parts = ParticleSet::new(vec![Particle::nucleus(H_MASS, 1.0, false); 3]).unwrap();
    let basis = Basis::new(GridSpec::new(5, 1, 5.0).unwrap(), parts.clone()).unwrap();
    let decl = SymmetryDeclaration::new(vec![], vec![vec![0, 1, 2]], &parts).unwrap();
    let gens: Vec<CMatrix> = decl.generators().iter().map(|g| permutation_matrix(g, &basis).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let mut seen = 0;
    for _ in 0..40 {
        let c = random_criterion(&mut rng).symmetrized(&decl, &parts).unwrap();
        assert!(validate_symmetric(&c, &decl, &basis, 2).unwrap().is_symmetric());
        let bp = bipartition(&c, &basis).unwrap();
        if bp.set_a.is_empty() || bp.set_b.is_empty() {
            continue;
        }
        seen += 1;
        let p = projector(&bp);
        for u in &gens {
            assert!(max_abs_diff(&(u * &p), &(&p * u)) < 1e-12);
        }
        let a = CMatrix::from_fn(basis.size(), basis.size(), |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let rho = DensityMatrix::renormalized(&a * a.adjoint()).unwrap();
        let rho = antisymmetrize_density(&rho, &decl, &basis).unwrap();
        let out = analyze(&rho, &bp, 0.7).unwrap();
        // a branch the antisymmetric state (almost) never reaches only
        // renormalizes rounding noise
        for (p, post) in [(out.p1, out.rho1()), (out.p0, out.rho0())] {
            if p > 1e-9 {
                assert!(symmetry_check(post.unwrap(), &decl, &basis).unwrap().max_deviation < 1e-10);
            }
        }
    }
    assert!(seen > 10);
}
