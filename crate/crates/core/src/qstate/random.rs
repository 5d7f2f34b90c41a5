use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{CMatrix, C64};

use super::linalg::{c, hermitize, trace};
use super::{QState, SystemLayout};

/// Sampling ensemble for [`random_state`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    HaarPure,
    GinibreMixed,
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cnormal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries, filled row by row.
pub fn ginibre_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = cnormal(rng);
        }
    }
    m
}

/// Haar-random unit vector.
pub fn haar_ket<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(d, |_, _| cnormal(rng));
    let n = v.norm();
    v / c(n)
}

/// `rows × cols` matrix with orthonormal columns (`cols ≤ rows`), Haar
/// distributed.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let g = ginibre_matrix(rows, cols, rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // fix column phases so the distribution is Haar
    let mut q = q.columns(0, cols).into_owned();
    for k in 0..cols {
        let d = r[(k, k)];
        let ph = if d.norm() > 0.0 { d / c(d.norm()) } else { c(1.0) };
        for i in 0..rows {
            q[(i, k)] *= ph;
        }
    }
    q
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    random_isometry(d, d, rng)
}

/// Seeded draw from `ensemble` on `layout`. The Ginibre ensemble is full
/// rank.
pub fn random_state(layout: &SystemLayout, ensemble: Ensemble, seed: u64) -> QState {
    let mut rng = rng_from_seed(seed);
    match ensemble {
        Ensemble::HaarPure => {
            let v = haar_ket(layout.total_dim(), &mut rng);
            QState::from_ket(layout.clone(), &v).expect("unit vector")
        }
        Ensemble::GinibreMixed => ginibre_state(layout, layout.total_dim(), &mut rng),
    }
}

/// Seeded Ginibre draw of the given rank (clamped to `1..=total_dim`).
pub fn random_state_rank(layout: &SystemLayout, rank: usize, seed: u64) -> QState {
    let mut rng = rng_from_seed(seed);
    ginibre_state(layout, rank, &mut rng)
}

pub(crate) fn ginibre_state<R: Rng + ?Sized>(layout: &SystemLayout, rank: usize, rng: &mut R) -> QState {
    let d = layout.total_dim();
    let g = ginibre_matrix(d, rank.clamp(1, d), rng);
    let m = &g * g.adjoint();
    let t = trace(&m).re;
    QState::from_parts(layout.clone(), hermitize(&(m / c(t))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::max_abs;

    #[test]
    fn seeded_draws_are_reproducible() {
        let l = SystemLayout::two_qubits();
        let a = random_state(&l, Ensemble::GinibreMixed, 42);
        let b = random_state(&l, Ensemble::GinibreMixed, 42);
        assert_eq!(a.matrix(), b.matrix());
        let c = random_state(&l, Ensemble::GinibreMixed, 43);
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn haar_draw_is_pure() {
        let s = random_state(&SystemLayout::bipartite(2, 3).unwrap(), Ensemble::HaarPure, 7);
        assert!((s.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ginibre_draw_is_a_valid_state() {
        let s = random_state(&SystemLayout::bipartite(3, 3).unwrap(), Ensemble::GinibreMixed, 9);
        assert!(QState::new(s.layout().clone(), s.matrix().clone()).is_ok());
        assert!(s.eigenvalues().last().unwrap() > &-1e-12);
    }

    #[test]
    fn isometry_columns_are_orthonormal() {
        let mut rng = rng_from_seed(1);
        let v = random_isometry(5, 3, &mut rng);
        let g = v.adjoint() * &v;
        assert!(max_abs(&(g - DMatrix::identity(3, 3))) < 1e-12);
    }
}
