//! Entanglement measures and the quantitative bounds built on them.

mod compose;
mod decoupling;
mod instances;
mod rate;
mod squashed;

use serde::Serialize;

use crate::qstate::{von_neumann_entropy, Bipartition, QState};
use crate::{Error, Result};

pub use compose::{compose_superadditive, SuperadditiveReport};
pub use decoupling::{decoupling_check, decoupling_rhs, fvdg_check, DecouplingCheck, FvdgCheck};
pub use instances::{
    over_budget_instance, random_decoupling_instance, superadditive_desk_instance, DeskInstance,
};
pub use rate::{rate_bound_report, ProxyKind, RateBoundReport};
pub use squashed::{squashed_upper, FlaggedDecomposition, SquashedBound, SquashedSearch};

/// Hashing sandwich `S(A) − S(AB) ≤ E_d ≤ S(A)`. The lower bound is not
/// clamped at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn hashing_bounds(rho: &QState, cut: &Bipartition) -> Result<EdBounds> {
    let b_side = cut.b_side(rho.layout());
    if cut.a_side().is_empty() || b_side.is_empty() {
        return Err(Error::LayoutMismatch(format!(
            "cut of {} leaves one side empty",
            rho.layout()
        )));
    }
    let s_a = von_neumann_entropy(&rho.partial_trace(cut.a_side())?);
    let s_ab = von_neumann_entropy(rho);
    Ok(EdBounds {
        lower: s_a - s_ab,
        upper: s_a,
    })
}

/// `I(A;B|E)` for the factor groups `a`, `b`, `e` of `rho` (factors in
/// none of them are traced out first).
pub fn cqmi_split(rho: &QState, a: &[usize], b: &[usize], e: &[usize]) -> Result<f64> {
    let mut all = a.to_vec();
    all.extend_from_slice(b);
    all.extend_from_slice(e);
    rho.layout().check_indices(&all)?;
    let s = |idx: Vec<usize>| -> Result<f64> {
        if idx.is_empty() {
            return Ok(0.0);
        }
        Ok(von_neumann_entropy(&rho.partial_trace(&idx)?))
    };
    let cat = |x: &[usize], y: &[usize]| {
        let mut v = x.to_vec();
        v.extend_from_slice(y);
        v
    };
    Ok(s(cat(a, e))? + s(cat(b, e))? - s(all.clone())? - s(e.to_vec())?)
}

/// `I(A;B|E) = S(AE) + S(BE) − S(ABE) − S(E)` on a three-party layout.
/// Parties are ordered by id: the lowest is A, the middle B, the highest E.
pub fn cqmi(rho_abe: &QState) -> Result<f64> {
    let l = rho_abe.layout();
    let parties = l.parties();
    if parties.len() != 3 {
        return Err(Error::LayoutMismatch(format!(
            "conditional mutual information needs three parties, {l} has {}",
            parties.len()
        )));
    }
    cqmi_split(
        rho_abe,
        &l.indices_of(parties[0]),
        &l.indices_of(parties[1]),
        &l.indices_of(parties[2]),
    )
}

/// `I(A;B) = S(A) + S(B) − S(AB)` across `cut`.
pub fn mutual_information(rho: &QState, cut: &Bipartition) -> Result<f64> {
    cqmi_split(rho, cut.a_side(), &cut.b_side(rho.layout()), &[])
}
