use nalgebra::DVector;

use crate::{Error, Result};

use super::linalg::{c, eigh, eigvalsh, psd_sqrt, shannon, trace_norm_hermitian};
use super::{Bipartition, Factor, Party, QState, SchmidtVector, SystemLayout, EIG_CUTOFF, PURE_TOL};

fn same_layout(a: &QState, b: &QState) -> Result<()> {
    if a.layout() != b.layout() {
        return Err(Error::LayoutMismatch(format!(
            "{} vs {}",
            a.layout(),
            b.layout()
        )));
    }
    Ok(())
}

/// `‖a − b‖₁`, in `[0, 2]`.
pub fn trace_norm_dist(a: &QState, b: &QState) -> Result<f64> {
    same_layout(a, b)?;
    Ok(trace_norm_hermitian(&(a.matrix() - b.matrix())).min(2.0))
}

/// Uhlmann fidelity `Tr √(√a b √a)` (root convention, in `[0, 1]`).
pub fn fidelity(a: &QState, b: &QState) -> Result<f64> {
    same_layout(a, b)?;
    // closed form when either side is pure
    let pure_side = |s: &QState| {
        let (vals, vecs) = eigh(s.matrix());
        let top = *vals.last().unwrap_or(&1.0);
        (top >= 1.0 - 1e-12).then(|| vecs.column(vals.len() - 1).into_owned())
    };
    if let Some(v) = pure_side(a) {
        return Ok(expectation(&v, b).max(0.0).sqrt().min(1.0));
    }
    if let Some(v) = pure_side(b) {
        return Ok(expectation(&v, a).max(0.0).sqrt().min(1.0));
    }
    let sa = psd_sqrt(a.matrix());
    let inner = &sa * b.matrix() * &sa;
    let f: f64 = eigvalsh(&inner)
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|x| x.sqrt())
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

fn expectation(v: &DVector<crate::C64>, s: &QState) -> f64 {
    (v.adjoint() * s.matrix() * v)[(0, 0)].re
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(s: &QState) -> f64 {
    shannon(&eigvalsh(s.matrix()))
}

/// Entropy of the A-side marginal of a pure state.
pub fn entanglement_entropy(pure: &QState, cut: &Bipartition) -> Result<f64> {
    Ok(schmidt_decompose(pure, cut)?.entropy())
}

/// Schmidt coefficients (squared) across `cut`, descending.
pub fn schmidt_decompose(pure: &QState, cut: &Bipartition) -> Result<SchmidtVector> {
    let top = pure.max_eigenvalue();
    if top < 1.0 - PURE_TOL {
        return Err(Error::NotPure(top));
    }
    let a = pure.partial_trace(cut.a_side())?;
    let mut probs: Vec<f64> = eigvalsh(a.matrix())
        .into_iter()
        .filter(|&x| x >= EIG_CUTOFF)
        .collect();
    probs.reverse();
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= s);
    SchmidtVector::new(probs)
}

/// Purification on `layout ⊗ R`, with `R` an environment factor of
/// dimension equal to the rank of `s`.
pub fn purify(s: &QState) -> QState {
    let (vals, vecs) = eigh(s.matrix());
    let kept: Vec<usize> = (0..vals.len()).rev().filter(|&i| vals[i] >= EIG_CUTOFF).collect();
    let r = kept.len().max(1);
    let d = s.dim();
    let mut ket = DVector::zeros(d * r);
    for (j, &i) in kept.iter().enumerate() {
        let w = c(vals[i].sqrt());
        for x in 0..d {
            ket[x * r + j] += vecs[(x, i)] * w;
        }
    }
    let mut factors = s.layout().factors().to_vec();
    factors.push(Factor::new(Party::ENV, r));
    let layout = SystemLayout::new(factors).expect("rank is at most the dimension");
    QState::from_ket(layout, &ket).expect("non-zero ket")
}
