//! Small dense helpers on complex matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{CMatrix, C64};

pub fn c(re: f64) -> C64 {
    Complex64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    DMatrix::identity(d, d)
}

/// `(m + m†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().sum()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// Column `i` of the returned matrix is the eigenvector for eigenvalue `i`.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (vals, vecs)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `V diag(f(λ)) V†` for a Hermitian input.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&x| c(f(x))));
    let scaled = DMatrix::from_fn(vecs.nrows(), vecs.ncols(), |r, k| vecs[(r, k)] * d[k]);
    scaled * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix; negative eigenvalues are
/// treated as zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_fn(m, |x| if x > 0.0 { x.sqrt() } else { 0.0 })
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().map(|x| x.abs()).sum()
}

/// Trace norm of an arbitrary square matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `|v⟩⟨v|`.
pub fn projector(v: &DVector<C64>) -> CMatrix {
    v * v.adjoint()
}

pub fn diag_real(d: &[f64]) -> CMatrix {
    let n = d.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { c(d[i]) } else { c(0.0) })
}

/// `|i⟩⟨j|` in dimension `d`.
pub fn unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = DMatrix::zeros(d, d);
    m[(i, j)] = c(1.0);
    m
}

/// Reshape in column-major order without copying.
pub(crate) fn reshape(m: CMatrix, rows: usize, cols: usize) -> CMatrix {
    debug_assert_eq!(m.len(), rows * cols);
    m.reshape_generic(nalgebra::Dyn(rows), nalgebra::Dyn(cols))
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    shannon(&[p, 1.0 - p])
}

/// Shannon entropy in bits of a probability list; entries below the
/// eigenvalue cutoff are ignored.
pub fn shannon(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x >= super::EIG_CUTOFF)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_reconstructs() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[c(2.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), c(2.0)],
        );
        let (vals, vecs) = eigh(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let back = &vecs * diag_real(&vals) * vecs.adjoint();
        assert!(max_abs(&(back - m)) < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = diag_real(&[0.25, 0.0, 0.75]);
        let s = psd_sqrt(&m);
        assert!(max_abs(&(&s * &s - m)) < 1e-12);
    }

    #[test]
    fn binary_entropy_value() {
        assert!((h2(0.9) - 0.468_995_593_589_281).abs() < 1e-12);
        assert_eq!(h2(1.0), 0.0);
    }
}
