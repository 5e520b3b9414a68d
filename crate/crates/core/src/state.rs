//! Density matrices, the state carrier for every module.

use alloc::format;

use crate::linalg::{hermitian_deviation, kron, trace, HermitianEigen};
use crate::{CMatrix, CVector, Error, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

/// Tolerance on Hermiticity, trace and positivity.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validate Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        let dev = hermitian_deviation(&matrix);
        if dev > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = trace(&matrix);
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {} != 1", tr.re)));
        }
        let lowest = HermitianEigen::new(&matrix).values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if lowest < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lowest:e}")));
        }
        Ok(Self { matrix })
    }

    /// Wrap without validation. For results of operations that preserve the
    /// invariants by construction (unitary conjugation, block projection).
    pub fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|`; the vector must be normalized.
    pub fn from_pure(psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > STATE_TOL {
            return Err(Error::UnnormalizedInput(n));
        }
        Ok(Self { matrix: psi * psi.adjoint() })
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = C64::new(1.0, 0.0);
        Self { matrix: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `tr(ρ H)`, real part.
    pub fn expectation(&self, h: &CMatrix) -> f64 {
        self.matrix.iter().zip(h.transpose().iter()).map(|(a, b)| (a * b).re).sum()
    }

    /// Diagonal populations.
    pub fn populations(&self) -> alloc::vec::Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `ρ ⊗ σ`, with `self` as the more significant factor.
    pub fn kron(&self, other: &DensityMatrix) -> Self {
        Self { matrix: kron(&self.matrix, &other.matrix) }
    }

    /// Divide by the trace. Fails on a vanishing trace.
    pub fn renormalized(matrix: CMatrix) -> Result<Self> {
        let tr = trace(&matrix).re;
        if !(tr > 0.0) {
            return Err(Error::ZeroProbabilityBranch);
        }
        Ok(Self { matrix: matrix / C64::new(tr, 0.0) })
    }
}
