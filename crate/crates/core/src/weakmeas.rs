//! Weak-measurement heralding of the criterion-accepted subspace.
//!
//! With projector `Π_A` onto the accepted configurations and rotation angle
//! `δ`, the flag reads 1 with probability `p_1 = sin²δ · p_suc`, leaving
//! `ρ_1 = Π_A ρ Π_A / p_suc`. Flag 0 leaves
//! `ρ_0 = (cos²δ·ρ_AA + ρ_BB + cosδ·(ρ_AB + ρ_BA)) / p_0`. The algebra is
//! applied to the system register directly; no ancilla is stored.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::{Rng, RngCore};

use crate::criteria::Bipartition;
use crate::state::DensityMatrix;
use crate::{CMatrix, Error, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

/// Trace tolerance for channel outputs.
pub const CHANNEL_TRACE_TOL: f64 = 1e-9;
const DEGENERATE: f64 = 1e-15;

pub fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidDelta(delta))
    }
}

fn check_dims(rho: &DensityMatrix, bp: &Bipartition) -> Result<()> {
    if rho.dim() != bp.dim() {
        return Err(Error::DimensionMismatch { expected: bp.dim(), got: rho.dim() });
    }
    Ok(())
}

/// `p_suc = Σ_{j∈A} ρ_jj`.
pub fn p_success_weight(rho: &DensityMatrix, bp: &Bipartition) -> f64 {
    bp.set_a.iter().map(|&j| rho.matrix()[(j, j)].re).sum::<f64>().clamp(0.0, 1.0)
}

/// Unnormalized blocks `(ρ_AA, ρ_BB, ρ_AB + ρ_BA)`, each embedded in the full
/// matrix.
pub fn blocks(rho: &DensityMatrix, bp: &Bipartition) -> (CMatrix, CMatrix, CMatrix) {
    let m = rho.matrix();
    let n = m.nrows();
    let (mut aa, mut bb, mut cross) = (CMatrix::zeros(n, n), CMatrix::zeros(n, n), CMatrix::zeros(n, n));
    for r in 0..n {
        for c in 0..n {
            let dst = match (bp.in_a(r), bp.in_a(c)) {
                (true, true) => &mut aa,
                (false, false) => &mut bb,
                _ => &mut cross,
            };
            dst[(r, c)] = m[(r, c)];
        }
    }
    (aa, bb, cross)
}

/// Closed-form outcome of a weak measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticOutcome {
    pub p_suc: f64,
    pub p1: f64,
    pub p0: f64,
    /// `None` when `p1 = 0`.
    pub rho1: Option<DensityMatrix>,
    /// `None` when `p0 = 0`.
    pub rho0: Option<DensityMatrix>,
}

impl AnalyticOutcome {
    pub fn rho1(&self) -> Result<&DensityMatrix> {
        self.rho1.as_ref().ok_or(Error::ZeroProbabilityBranch)
    }

    pub fn rho0(&self) -> Result<&DensityMatrix> {
        self.rho0.as_ref().ok_or(Error::ZeroProbabilityBranch)
    }
}

pub fn analyze(rho: &DensityMatrix, bp: &Bipartition, delta: f64) -> Result<AnalyticOutcome> {
    check_delta(delta)?;
    check_dims(rho, bp)?;
    let p_suc = p_success_weight(rho, bp);
    let (s, c) = (delta.sin(), delta.cos());
    let p1 = s * s * p_suc;
    let p0 = 1.0 - p1;
    let (aa, bb, cross) = blocks(rho, bp);
    let rho1 = (p1 > 0.0).then(|| DensityMatrix::new_unchecked(&aa / C64::new(p_suc, 0.0)));
    let rho0 = (p0 > 0.0).then(|| {
        let m = aa * C64::new(c * c, 0.0) + bb + cross * C64::new(c, 0.0);
        DensityMatrix::new_unchecked(m / C64::new(p0, 0.0))
    });
    Ok(AnalyticOutcome { p_suc, p1, p0, rho1, rho0 })
}

/// A sampled measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub flag: bool,
    /// Born probability of the realized flag.
    pub probability: f64,
    pub post_state: DensityMatrix,
    pub p_suc_before: f64,
    pub p1: f64,
}

/// Draw the flag from `rng` and return the matching post-measurement state.
pub fn weak_measure(rho: &DensityMatrix, bp: &Bipartition, delta: f64, rng: &mut impl RngCore) -> Result<MeasurementOutcome> {
    let a = analyze(rho, bp, delta)?;
    let flag = rng.random::<f64>() < a.p1;
    let (probability, post_state) = if flag {
        (a.p1, a.rho1()?.clone())
    } else {
        (a.p0, a.rho0()?.clone())
    };
    Ok(MeasurementOutcome { flag, probability, post_state, p_suc_before: a.p_suc, p1: a.p1 })
}

/// `(Λ_A, Λ_B, Λ_C)` such that
/// `ρ_0 = ρ − Λ_A ρ_A + Λ_B ρ_B − Λ_C (ρ_AB + ρ_BA)` with normalized blocks
/// `ρ_A = ρ_AA/p_suc`, `ρ_B = ρ_BB/(1 − p_suc)`.
pub fn lambda_coefficients(delta: f64, p_suc: f64) -> Result<(f64, f64, f64)> {
    check_delta(delta)?;
    if !(0.0..=1.0).contains(&p_suc) {
        return Err(Error::InvalidParameter(format!("p_suc must lie in [0, 1], got {p_suc}")));
    }
    let (s2, c) = (delta.sin().powi(2), delta.cos());
    let den_a = (1.0 - p_suc) + c * c * p_suc;
    let den_b = 1.0 - s2 * p_suc;
    if den_a <= DEGENERATE || den_b <= DEGENERATE {
        return Err(Error::Degenerate);
    }
    let num = s2 * (1.0 - p_suc) * p_suc;
    Ok((num / den_a, num / den_b, (1.0 - c - s2 * p_suc) / den_b))
}

/// `ρ_0` assembled from the Λ coefficients.
pub fn reconstruct_rho0(rho: &DensityMatrix, bp: &Bipartition, delta: f64) -> Result<CMatrix> {
    check_dims(rho, bp)?;
    let p = p_success_weight(rho, bp);
    let (la, lb, lc) = lambda_coefficients(delta, p)?;
    let (aa, bb, cross) = blocks(rho, bp);
    let mut out = rho.matrix().clone();
    if p > 0.0 {
        out -= aa * C64::new(la / p, 0.0);
    }
    if p < 1.0 {
        out += bb * C64::new(lb / (1.0 - p), 0.0);
    }
    out -= cross * C64::new(lc, 0.0);
    Ok(out)
}

/// Rotation angle per attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaSchedule {
    Constant(f64),
    /// `δ_k = min(π/2, δ_0 · r^k)`.
    Geometric { delta0: f64, ratio: f64 },
}

impl DeltaSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DeltaSchedule::Constant(d) => check_delta(d),
            DeltaSchedule::Geometric { delta0, ratio } => {
                check_delta(delta0)?;
                if !(ratio > 0.0 && ratio.is_finite()) {
                    return Err(Error::InvalidParameter(format!("ratio must be > 0, got {ratio}")));
                }
                Ok(())
            }
        }
    }

    pub fn delta(&self, iteration: usize) -> f64 {
        match *self {
            DeltaSchedule::Constant(d) => d,
            DeltaSchedule::Geometric { delta0, ratio } => (delta0 * ratio.powi(iteration as i32)).min(FRAC_PI_2),
        }
    }
}

/// One measurement of a repeat-until-success loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub iteration: usize,
    pub delta: f64,
    pub flag: bool,
    pub p1: f64,
    pub p_suc_before: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RusReport {
    /// `ρ_1` on success, the last state otherwise.
    pub state: DensityMatrix,
    pub iterations: usize,
    pub succeeded: bool,
    pub records: Vec<MeasurementRecord>,
}

/// Measure; on failure apply `channel(state, attempt)` and try again, up to
/// `max_iters` measurements. Never errors on exhaustion; see
/// [`repeat_until_success`].
pub fn run_until_success(
    rho: &DensityMatrix,
    bp: &Bipartition,
    deltas: &DeltaSchedule,
    channel: &mut dyn FnMut(&DensityMatrix, usize) -> Result<DensityMatrix>,
    max_iters: usize,
    rng: &mut impl RngCore,
) -> Result<RusReport> {
    deltas.validate()?;
    let mut state = rho.clone();
    let mut records = Vec::new();
    for k in 0..max_iters {
        let delta = deltas.delta(k);
        let out = weak_measure(&state, bp, delta, rng)?;
        records.push(MeasurementRecord {
            iteration: k + 1,
            delta,
            flag: out.flag,
            p1: out.p1,
            p_suc_before: out.p_suc_before,
        });
        if out.flag {
            return Ok(RusReport { state: out.post_state, iterations: k + 1, succeeded: true, records });
        }
        if k + 1 == max_iters {
            state = out.post_state;
            break;
        }
        let next = channel(&out.post_state, k)?;
        let tr = next.trace();
        if (tr - 1.0).abs() > CHANNEL_TRACE_TOL {
            return Err(Error::ChannelNotTracePreserving(tr));
        }
        state = next;
    }
    Ok(RusReport { state, iterations: max_iters, succeeded: false, records })
}

/// As [`run_until_success`], failing with `MaxItersExceeded` on exhaustion.
pub fn repeat_until_success(
    rho: &DensityMatrix,
    bp: &Bipartition,
    deltas: &DeltaSchedule,
    channel: &mut dyn FnMut(&DensityMatrix, usize) -> Result<DensityMatrix>,
    max_iters: usize,
    rng: &mut impl RngCore,
) -> Result<(DensityMatrix, usize)> {
    let report = run_until_success(rho, bp, deltas, channel, max_iters, rng)?;
    if report.succeeded {
        Ok((report.state, report.iterations))
    } else {
        Err(Error::MaxItersExceeded(max_iters))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, trace};
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rho(n: usize, rng: &mut impl Rng) -> DensityMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        DensityMatrix::renormalized(&a * a.adjoint()).unwrap()
    }

    fn random_bp(n: usize, rng: &mut impl Rng) -> Bipartition {
        Bipartition::from_mask((0..n).map(|_| rng.random::<bool>()).collect())
    }

    #[test]
    fn p_suc_matches_projector_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_rho(16, &mut rng);
        let mask: Vec<bool> = (0..16).map(|i| i % 16 < 7).collect();
        let bp = Bipartition::from_mask(mask);
        let mut proj = CMatrix::zeros(16, 16);
        for &j in &bp.set_a {
            proj[(j, j)] = C64::new(1.0, 0.0);
        }
        let want = trace(&(&proj * rho.matrix())).re;
        assert!((p_success_weight(&rho, &bp) - want).abs() < 1e-14);
        assert_eq!(p_success_weight(&DensityMatrix::basis_state(16, 0), &bp), 1.0);
        assert_eq!(p_success_weight(&DensityMatrix::basis_state(16, 9), &bp), 0.0);
    }

    #[test]
    fn no_rotation_no_disturbance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_rho(8, &mut rng);
        let bp = random_bp(8, &mut rng);
        let a = analyze(&rho, &bp, 0.0).unwrap();
        assert_eq!(a.p1, 0.0);
        assert!(a.rho1.is_none());
        assert!(max_abs_diff(a.rho0().unwrap().matrix(), rho.matrix()) < 1e-15);
        assert_eq!(lambda_coefficients(0.0, 0.4).unwrap(), (0.0, 0.0, 0.0));
    }

    #[test]
    fn full_strength_on_accepted_state() {
        let bp = Bipartition::from_mask(vec![true, true, false]);
        let mut m = CMatrix::zeros(3, 3);
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            m[(r, c)] = C64::new(0.5, 0.0);
        }
        let rho = DensityMatrix::new(m).unwrap();
        let a = analyze(&rho, &bp, FRAC_PI_2).unwrap();
        assert!((a.p1 - 1.0).abs() < 1e-15);
        assert!(max_abs_diff(a.rho1().unwrap().matrix(), rho.matrix()) < 1e-15);
        assert_eq!(a.rho0(), Err(Error::ZeroProbabilityBranch));
        assert_eq!(lambda_coefficients(FRAC_PI_2, 1.0), Err(Error::Degenerate));
    }

    #[test]
    fn zeno_guard() {
        let bp = Bipartition::from_mask(vec![true, false, false]);
        let mut m = CMatrix::zeros(3, 3);
        m[(1, 1)] = C64::new(0.3, 0.0);
        m[(2, 2)] = C64::new(0.7, 0.0);
        m[(1, 2)] = C64::new(0.1, 0.2);
        m[(2, 1)] = C64::new(0.1, -0.2);
        let rho = DensityMatrix::new(m).unwrap();
        let a = analyze(&rho, &bp, FRAC_PI_2).unwrap();
        assert_eq!(a.rho0().unwrap(), &rho);
    }

    #[test]
    fn invalid_delta() {
        let rho = DensityMatrix::basis_state(2, 0);
        let bp = Bipartition::from_mask(vec![true, false]);
        assert_eq!(analyze(&rho, &bp, -0.1), Err(Error::InvalidDelta(-0.1)));
        assert!(analyze(&rho, &bp, 1.6).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bookkeeping_and_reconstruction(seed in 0u64..10_000, delta in 0.0f64..1.5, n in 2usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_rho(n, &mut rng);
            let bp = random_bp(n, &mut rng);
            let a = analyze(&rho, &bp, delta).unwrap();
            prop_assert_eq!(a.p1 + a.p0, 1.0);
            prop_assert!((a.p1 - delta.sin().powi(2) * a.p_suc).abs() < 1e-15);
            let rebuilt = reconstruct_rho0(&rho, &bp, delta).unwrap();
            prop_assert!(max_abs_diff(&rebuilt, a.rho0().unwrap().matrix()) < 1e-12);
        }

        #[test]
        fn flag_ignores_coherences(seed in 0u64..10_000, delta in 0.0f64..1.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_rho(6, &mut rng);
            let bp = random_bp(6, &mut rng);
            let (aa, bb, cross) = blocks(&rho, &bp);
            let damped = DensityMatrix::new_unchecked(aa + bb + cross * C64::new(0.3, 0.0));
            let p = analyze(&rho, &bp, delta).unwrap().p1;
            let q = analyze(&damped, &bp, delta).unwrap().p1;
            prop_assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn small_delta_expansion() {
        let d = 1e-3;
        for p in [0.1, 0.37, 0.5, 0.9] {
            let (la, lb, _) = lambda_coefficients(d, p).unwrap();
            let approx = d * d * (1.0 - p) * p;
            assert!((la - approx).abs() / approx < 1e-6);
            assert!((lb - approx).abs() / approx < 1e-6);
        }
    }

    #[test]
    fn geometric_delta_ramp_saturates() {
        let s = DeltaSchedule::Geometric { delta0: 0.2, ratio: 2.0 };
        assert_eq!(s.delta(0), 0.2);
        assert_eq!(s.delta(2), 0.8);
        assert_eq!(s.delta(5), FRAC_PI_2);
    }

    #[test]
    fn rus_trivial_cases() {
        let bp = Bipartition::from_mask(vec![true, false]);
        let mut id = |r: &DensityMatrix, _k: usize| Ok(r.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let deltas = DeltaSchedule::Constant(FRAC_PI_2);
        let (_, n) = repeat_until_success(&DensityMatrix::basis_state(2, 0), &bp, &deltas, &mut id, 5, &mut rng).unwrap();
        assert_eq!(n, 1);
        let err = repeat_until_success(&DensityMatrix::basis_state(2, 1), &bp, &deltas, &mut id, 5, &mut rng);
        assert_eq!(err, Err(Error::MaxItersExceeded(5)));
        let mut leaky = |r: &DensityMatrix, _k: usize| Ok(DensityMatrix::new_unchecked(r.matrix() * C64::new(0.5, 0.0)));
        let err = repeat_until_success(&DensityMatrix::basis_state(2, 1), &bp, &deltas, &mut leaky, 5, &mut rng);
        assert!(matches!(err, Err(Error::ChannelNotTracePreserving(_))));
    }
}
