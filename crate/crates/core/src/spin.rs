//! Projection onto total-spin sectors of a set of spin-1/2 registers.
//!
//! `S² = (3/4)·n + Σ_{i<j} (P_ij − 1/2)` with `P_ij` the swap of the spin
//! labels of registers `i` and `j` (positions stay put). The sector
//! projector is the Lagrange polynomial in `S²` that is one on `S(S+1)` and
//! zero on every other allowed eigenvalue, applied without forming `S²`
//! densely.

use alloc::format;
use alloc::vec::Vec;

use crate::grid::Basis;
use crate::state::DensityMatrix;
use crate::{CMatrix, Error, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

/// Sector weights below this are reported as empty.
pub const EMPTY_SECTOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinTarget {
    Singlet,
    Triplet,
    /// Total spin quantum number `S`.
    Total(f64),
}

impl SpinTarget {
    fn value(self) -> f64 {
        match self {
            SpinTarget::Singlet => 0.0,
            SpinTarget::Triplet => 1.0,
            SpinTarget::Total(s) => s,
        }
    }
}

/// Allowed `S` for `n` spin-1/2: `n/2, n/2 − 1, …` down to 0 or 1/2.
pub fn allowed_spins(n: usize) -> Vec<f64> {
    (0..=n / 2).map(|k| n as f64 / 2.0 - k as f64).collect()
}

/// Index maps for the spin swaps `P_ij` over all pairs of `registers`.
fn spin_swaps(basis: &Basis, registers: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for (a, &i) in registers.iter().enumerate() {
        for &j in &registers[a + 1..] {
            let map = (0..basis.size())
                .map(|k| {
                    let (li, lj) = (basis.local_index(k, i), basis.local_index(k, j));
                    let (si, sj) = (li % 2, lj % 2);
                    let k = basis.with_local(k, i, li - si + sj);
                    basis.with_local(k, j, lj - sj + si)
                })
                .collect();
            out.push(map);
        }
    }
    out
}

/// `S² m`, acting on rows.
fn apply_s2(swaps: &[Vec<usize>], n: usize, m: &CMatrix) -> CMatrix {
    let diag = 0.75 * n as f64 - 0.5 * swaps.len() as f64;
    let mut out = m * C64::new(diag, 0.0);
    for map in swaps {
        for (k, &j) in map.iter().enumerate() {
            let mut row = out.row_mut(j);
            row += m.row(k);
        }
    }
    out
}

fn apply_projector(swaps: &[Vec<usize>], n: usize, target: f64, m: &CMatrix) -> CMatrix {
    let eig = |s: f64| s * (s + 1.0);
    let mut out = m.clone();
    for s in allowed_spins(n) {
        if (s - target).abs() > 1e-9 {
            let shifted = apply_s2(swaps, n, &out) - &out * C64::new(eig(s), 0.0);
            out = shifted / C64::new(eig(target) - eig(s), 0.0);
        }
    }
    out
}

/// Born probability of the target sector and the renormalized projection.
pub fn spin_sector_project(
    rho: &DensityMatrix,
    basis: &Basis,
    spin_registers: &[usize],
    target: SpinTarget,
) -> Result<(f64, DensityMatrix)> {
    if rho.dim() != basis.size() {
        return Err(Error::DimensionMismatch { expected: basis.size(), got: rho.dim() });
    }
    for (k, &r) in spin_registers.iter().enumerate() {
        if r >= basis.n_registers() || !basis.particles().get(r).spin {
            return Err(Error::SpinNotEnabled(r));
        }
        if spin_registers[..k].contains(&r) {
            return Err(Error::InvalidSpinTarget(format!("register {r} listed twice")));
        }
    }
    let n = spin_registers.len();
    let s = target.value();
    if !allowed_spins(n).iter().any(|&a| (a - s).abs() < 1e-9) {
        return Err(Error::InvalidSpinTarget(format!("S = {s} is not reachable with {n} spins")));
    }
    let swaps = spin_swaps(basis, spin_registers);
    let left = apply_projector(&swaps, n, s, rho.matrix());
    let both = apply_projector(&swaps, n, s, &left.adjoint()).adjoint();
    let p: f64 = (0..both.nrows()).map(|i| both[(i, i)].re).sum();
    if !(p >= EMPTY_SECTOR) {
        return Err(Error::EmptySector(p));
    }
    Ok((p, DensityMatrix::new_unchecked(both / C64::new(p, 0.0))))
}
