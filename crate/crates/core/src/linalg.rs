use nalgebra::{DVector, SymmetricEigen};

use crate::model::{CMatrix, C64};

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> DVector<C64> {
        self.vectors.column(k).into_owned()
    }
}

pub fn eigh(m: &CMatrix) -> HermitianEigen {
    let SymmetricEigen {
        eigenvalues,
        eigenvectors,
    } = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
    let n = m.nrows();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eigenvectors.column(src));
    }
    HermitianEigen {
        values: order.iter().map(|&k| eigenvalues[k]).collect(),
        vectors,
    }
}

pub fn inner(a: &DVector<C64>, b: &DVector<C64>) -> C64 {
    a.dotc(b)
}

pub fn outer(a: &DVector<C64>, b: &DVector<C64>) -> CMatrix {
    a * b.adjoint()
}

/// Trace distance ½‖a − b‖₁ between two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a - b;
    let herm = (&d + d.adjoint()) * C64::from(0.5);
    0.5 * eigh(&herm).values.iter().map(|v| v.abs()).sum::<f64>()
}
