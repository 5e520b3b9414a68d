//! Propagation against the Landau-Zener formula, and autocorrelation
//! spectra against direct diagonalization.

use mergo_core::evolution::{autocorrelation, propagate};
use mergo_core::hamiltonian::{BlockTag, OperatorBlock};
use mergo_core::linalg::HermitianEigen;
use mergo_core::spectrum::{bin_width, peaks, spectrum, Window};
use mergo_core::{CMatrix, CVector, DensityMatrix, Schedule, ScheduledHamiltonian, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn real(m: [[f64; 2]; 2]) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| C64::new(m[i][j], 0.0))
}

/// Diabatic levels `∓c ± 2c·f(s)` with coupling `Δ`, swept linearly over
/// `[0, s0]`; returns the final excited-state population starting from the
/// ground state.
fn sweep(delta: f64, c: f64, gamma: f64, steps_per_unit: f64) -> (f64, f64) {
    let s0 = 4.0 * c * gamma / (delta * delta);
    let h_a = OperatorBlock::new(real([[-c, delta], [delta, c]]), BlockTag::External).unwrap();
    let h_ab = OperatorBlock::new(real([[2.0 * c, 0.0], [0.0, -2.0 * c]]), BlockTag::External).unwrap();
    let zero = |t| OperatorBlock::zeros(2, t);
    let sh = ScheduledHamiltonian::new(h_a, zero(BlockTag::External), h_ab, zero(BlockTag::Trap), Schedule::linear(s0, 2.0 * s0).unwrap()).unwrap();
    let start = HermitianEigen::new(&sh.combine(0.0, 0.0));
    let end = HermitianEigen::new(&sh.combine(1.0, 1.0));
    let ground = DensityMatrix::from_pure(&start.vectors.column(0).into_owned()).unwrap();
    let n = (s0 * steps_per_unit).ceil() as usize;
    let out = propagate(&ground, &sh, 0.0, s0, n).unwrap();
    let excited: CVector = end.vectors.column(1).into_owned();
    let p = (excited.adjoint() * out.final_state.matrix() * &excited)[(0, 0)].re;
    (p, out.norm_drift)
}

#[test]
fn avoided_crossing_follows_landau_zener() {
    for gamma in [0.1, 0.5, 1.0, 2.0] {
        let (p, drift) = sweep(1.0, 30.0, gamma, 100.0);
        let want = (-2.0 * std::f64::consts::PI * gamma).exp();
        assert!(((p - want) / want).abs() < 0.05, "Γ={gamma}: {p} vs {want}");
        assert!(drift < 1e-9);
    }
}

fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

fn random_unit(n: usize, rng: &mut impl Rng) -> CVector {
    let v = CVector::from_fn(n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

#[test]
fn spectrum_peaks_sit_on_eigenvalues() {
    let (n, dt) = (1024usize, 0.2);
    let bin = bin_width(n, dt);
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for inst in 0..50 {
        let h = random_hermitian(8, &mut rng);
        let psi = random_unit(8, &mut rng);
        let energies = HermitianEigen::new(&h).values;
        let c = autocorrelation(&psi, &h, dt * (n - 1) as f64, n).unwrap();
        let spec = spectrum(&c, Window::Hann).unwrap();
        let found = peaks(&spec, 0.1);
        assert!(!found.is_empty());
        let nearest = |w: f64| energies.iter().map(|e| (w - e).abs()).fold(f64::INFINITY, f64::min);
        for &(w, _) in &found {
            assert!(nearest(w) <= bin, "instance {inst}: peak {w} is {} bins away", nearest(w) / bin);
        }
        let matched = |w: f64| *energies.iter().min_by(|a, b| (w - *a).abs().total_cmp(&(w - *b).abs())).unwrap();
        for (i, &(wi, _)) in found.iter().enumerate() {
            for &(wj, _) in &found[i + 1..] {
                let gap = matched(wj) - matched(wi);
                assert!(((wj - wi) - gap).abs() <= bin, "instance {inst}");
            }
        }
    }
}
