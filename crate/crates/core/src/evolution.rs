//! Closed-system propagation under the scheduled Hamiltonian, and
//! wave-packet autocorrelation.
//!
//! Each step applies the exact exponential of `H` sampled at the step
//! midpoint, `U = exp(-i·H(s_mid)·Δs)`, built from a dense eigendecomposition.
//! Propagators are cached by `(f(s_mid), g(s_mid), Δs)`, so plateaus of the
//! schedule and repeated channel applications cost one decomposition.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::hamiltonian::{ScheduledHamiltonian, HERMITIAN_TOL};
use crate::linalg::{conjugate, hermitian_deviation, max_abs, HermitianEigen};
use crate::state::DensityMatrix;
use crate::{CMatrix, CVector, Error, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationReport {
    pub final_state: DensityMatrix,
    /// Largest `|tr ρ - 1|` seen after any step.
    pub norm_drift: f64,
    pub steps: usize,
    /// Step boundaries, `steps + 1` values from `s_from` to `s_to`.
    pub s_grid: Vec<f64>,
}

/// Step propagators keyed by the bit patterns of `(f, g, Δs)`.
#[derive(Debug, Clone, Default)]
pub struct PropagatorCache {
    map: BTreeMap<(u64, u64, u64), CMatrix>,
    hits: usize,
}

impl PropagatorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    fn get(&mut self, sh: &ScheduledHamiltonian, f: f64, g: f64, ds: f64) -> Result<&CMatrix> {
        let key = (f.to_bits(), g.to_bits(), ds.to_bits());
        match self.map.entry(key) {
            Entry::Occupied(e) => {
                self.hits += 1;
                Ok(e.into_mut())
            }
            Entry::Vacant(e) => {
                let h = sh.combine(f, g);
                let dev = hermitian_deviation(&h);
                if dev > HERMITIAN_TOL * max_abs(&h).max(1.0) {
                    return Err(Error::NonHermitian(dev));
                }
                Ok(e.insert(HermitianEigen::new(&h).propagator(ds)))
            }
        }
    }
}

/// Step count from the `Δs ≤ 0.1/‖H‖_max` rule.
pub fn default_steps(sh: &ScheduledHamiltonian, s_from: f64, s_to: f64) -> usize {
    let bound = sh.max_entry_bound();
    let n = ((s_to - s_from).abs() * bound / 0.1).ceil();
    if n.is_finite() && n >= 1.0 {
        n as usize
    } else {
        1
    }
}

fn check_interval(sh: &ScheduledHamiltonian, s_from: f64, s_to: f64, n_steps: usize) -> Result<()> {
    sh.schedule.check(s_from)?;
    sh.schedule.check(s_to)?;
    if !(s_from < s_to) {
        return Err(Error::InvalidParameter(alloc::format!("need s_from < s_to, got {s_from} >= {s_to}")));
    }
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
    }
    if sh.dim() == 0 {
        return Err(Error::InvalidParameter("empty Hamiltonian".into()));
    }
    Ok(())
}

/// Propagate `ρ → U ρ U†` over `[s_from, s_to]` in `n_steps` midpoint steps.
pub fn propagate(
    state: &DensityMatrix,
    sh: &ScheduledHamiltonian,
    s_from: f64,
    s_to: f64,
    n_steps: usize,
) -> Result<PropagationReport> {
    propagate_cached(state, sh, s_from, s_to, n_steps, &mut PropagatorCache::new())
}

pub fn propagate_cached(
    state: &DensityMatrix,
    sh: &ScheduledHamiltonian,
    s_from: f64,
    s_to: f64,
    n_steps: usize,
    cache: &mut PropagatorCache,
) -> Result<PropagationReport> {
    check_interval(sh, s_from, s_to, n_steps)?;
    if state.dim() != sh.dim() {
        return Err(Error::DimensionMismatch { expected: sh.dim(), got: state.dim() });
    }
    let ds = (s_to - s_from) / n_steps as f64;
    let s_grid: Vec<f64> = (0..=n_steps).map(|k| s_from + ds * k as f64).collect();
    let mut rho = state.matrix().clone();
    let mut drift = (state.trace() - 1.0).abs();
    for k in 0..n_steps {
        let mid = s_from + ds * (k as f64 + 0.5);
        let u = cache.get(sh, sh.schedule.f(mid), sh.schedule.g(mid), ds)?;
        rho = conjugate(u, &rho);
        let tr: f64 = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
        drift = drift.max((tr - 1.0).abs());
    }
    Ok(PropagationReport {
        final_state: DensityMatrix::new_unchecked(rho),
        norm_drift: drift,
        steps: n_steps,
        s_grid,
    })
}

/// Pure-state version of [`propagate`]; returns the final vector.
pub fn propagate_pure(
    psi: &CVector,
    sh: &ScheduledHamiltonian,
    s_from: f64,
    s_to: f64,
    n_steps: usize,
    cache: &mut PropagatorCache,
) -> Result<CVector> {
    Ok(propagate_pure_tracked(psi, sh, s_from, s_to, n_steps, cache)?.0)
}

/// [`propagate_pure`] that also returns the largest `|‖ψ‖² − 1|` seen
/// after any step.
pub fn propagate_pure_tracked(
    psi: &CVector,
    sh: &ScheduledHamiltonian,
    s_from: f64,
    s_to: f64,
    n_steps: usize,
    cache: &mut PropagatorCache,
) -> Result<(CVector, f64)> {
    check_interval(sh, s_from, s_to, n_steps)?;
    if psi.len() != sh.dim() {
        return Err(Error::DimensionMismatch { expected: sh.dim(), got: psi.len() });
    }
    let ds = (s_to - s_from) / n_steps as f64;
    let mut v = psi.clone();
    let mut drift = (psi.norm_squared() - 1.0).abs();
    for k in 0..n_steps {
        let mid = s_from + ds * (k as f64 + 0.5);
        v = cache.get(sh, sh.schedule.f(mid), sh.schedule.g(mid), ds)? * v;
        drift = drift.max((v.norm_squared() - 1.0).abs());
    }
    Ok((v, drift))
}

fn check_normalized(psi: &CVector) -> Result<()> {
    let n = psi.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::UnnormalizedInput(n));
    }
    Ok(())
}

fn sample_times(t_max: f64, n_samples: usize) -> Result<Vec<f64>> {
    if n_samples < 2 || !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter("need t_max > 0 and at least 2 samples".into()));
    }
    let dt = t_max / (n_samples - 1) as f64;
    Ok((0..n_samples).map(|k| dt * k as f64).collect())
}

/// `C(t) = ⟨ψ0| exp(-iHt) |ψ0⟩` for a fixed Hamiltonian at `n_samples`
/// uniform times on `[0, t_max]`.
pub fn autocorrelation(psi0: &CVector, h: &CMatrix, t_max: f64, n_samples: usize) -> Result<Vec<(f64, C64)>> {
    check_normalized(psi0)?;
    if psi0.len() != h.nrows() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: psi0.len() });
    }
    let dev = hermitian_deviation(h);
    if dev > HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(Error::NonHermitian(dev));
    }
    let eig = HermitianEigen::new(h);
    // weights |⟨E_k|ψ0⟩|²
    let overlaps = eig.vectors.adjoint() * psi0;
    let weights: Vec<f64> = overlaps.iter().map(|c| c.norm_sqr()).collect();
    Ok(sample_times(t_max, n_samples)?
        .into_iter()
        .map(|t| {
            let c = weights
                .iter()
                .zip(eig.values.iter())
                .map(|(&w, &e)| C64::new(0.0, -e * t).exp() * w)
                .sum();
            (t, c)
        })
        .collect())
}

/// Autocorrelation along the schedule: `C(s) = ⟨ψ0|ψ(s)⟩` with `ψ` evolved
/// from `s = 0` by midpoint steps, `steps_per_sample` per sample interval.
pub fn autocorrelation_scheduled(
    psi0: &CVector,
    sh: &ScheduledHamiltonian,
    s_max: f64,
    n_samples: usize,
    steps_per_sample: usize,
) -> Result<Vec<(f64, C64)>> {
    check_normalized(psi0)?;
    let times = sample_times(s_max, n_samples)?;
    sh.schedule.check(s_max)?;
    let mut cache = PropagatorCache::new();
    let mut psi = psi0.clone();
    let mut out = Vec::with_capacity(n_samples);
    out.push((0.0, psi0.dotc(&psi)));
    for w in times.windows(2) {
        psi = propagate_pure(&psi, sh, w[0], w[1], steps_per_sample.max(1), &mut cache)?;
        out.push((w[1], psi0.dotc(&psi)));
    }
    Ok(out)
}
