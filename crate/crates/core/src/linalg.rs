//! Small dense linear-algebra helpers shared across modules.

use nalgebra::DVector;

use crate::{CMatrix, C64};

#[allow(unused_imports)]
use num_traits::Float;

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-entry distance between two matrices of equal shape.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |m_ij - conj(m_ji)|`; zero for an exactly Hermitian matrix.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product `a ⊗ b`; the index of `a` is the most significant.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Real diagonal matrix as complex.
pub fn from_real_diagonal(diag: &[f64]) -> CMatrix {
    let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
    CMatrix::from_diagonal(&d)
}

/// `u · m · u†`.
pub fn conjugate(u: &CMatrix, m: &CMatrix) -> CMatrix {
    u * m * u.adjoint()
}

/// Spectral decomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Self {
        // real symmetric input (no fields) takes the cheaper real solver
        let (raw_values, raw_vectors) = if m.iter().all(|z| z.im == 0.0) {
            let eig = m.map(|z| z.re).symmetric_eigen();
            (eig.eigenvalues, eig.eigenvectors.map(|x| C64::new(x, 0.0)))
        } else {
            let eig = m.clone().symmetric_eigen();
            (eig.eigenvalues, eig.eigenvectors)
        };
        let n = raw_values.len();
        let mut order: alloc::vec::Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
        let values = DVector::from_iterator(n, order.iter().map(|&k| raw_values[k]));
        let mut vectors = CMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &raw_vectors.column(src));
        }
        Self { values, vectors }
    }

    /// `exp(-i · H · dt)` assembled from the decomposition.
    pub fn propagator(&self, dt: f64) -> CMatrix {
        let phases = self.values.map(|e| C64::new(0.0, -e * dt).exp());
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        scaled * self.vectors.adjoint()
    }

    /// Reassemble `f(H) = V f(Λ) V†` for a real spectral function.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::new(f(self.values[j]), 0.0);
        }
        scaled * self.vectors.adjoint()
    }
}
