// SPDX-License-Identifier: Apache-2.0

//! Small dense helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Inner product `<a|b>`, conjugate-linear in the first argument.
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

/// Smallest eigenvalue of a real symmetric matrix. Empty matrices report +inf.
pub fn min_eigenvalue(a: &RMatrix) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = symmetrize(a);
    SymmetricEigen::new(sym).eigenvalues.min()
}

pub fn symmetrize(a: &RMatrix) -> RMatrix {
    (a + a.transpose()) * 0.5
}

pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).map(|z| z * 0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted ascending.
pub fn hermitian_eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitize(a));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_min_eigenvalue(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(hermitize(a)).eigenvalues.min()
}

pub fn hermitian_max_eigenvalue(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    SymmetricEigen::new(hermitize(a)).eigenvalues.max()
}

/// Projection onto the PSD cone by clipping negative eigenvalues.
pub fn psd_projection(a: &RMatrix) -> RMatrix {
    let eig = SymmetricEigen::new(symmetrize(a));
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let q = &eig.eigenvectors;
    symmetrize(&(q * RMatrix::from_diagonal(&clipped) * q.transpose()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_real(a: &RMatrix, b: &RMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && max_abs_diff(a, &a.adjoint()) <= tol
}

/// `a * b` through four real products; nalgebra's real kernels are much
/// faster than its generic complex product for the sizes used here.
pub fn complex_matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// `v v^dagger`.
pub fn outer_gram(v: &CMatrix) -> CMatrix {
    complex_matmul(v, &v.adjoint())
}

/// Real matrix promoted to complex entries.
pub fn complexify(a: &RMatrix) -> CMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}
