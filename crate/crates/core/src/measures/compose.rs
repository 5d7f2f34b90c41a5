//! Running two distillation-type protocols side by side on a correlated
//! state, with the error accounting that makes their rates add.

use serde::Serialize;

use crate::locc::LoccProtocol;
use crate::qstate::{trace_norm_dist, QState};
use crate::{Error, Result};

use super::decoupling::{decoupling_rhs, DECOUPLING_SLACK};

#[derive(Clone, Debug, Serialize)]
pub struct SuperadditiveReport {
    pub eps: f64,
    pub copies: usize,
    pub m1: usize,
    pub m2: usize,
    /// Per-protocol error budget `ε²/100`.
    pub budget: f64,
    /// `‖Λ_i((μ^{S_i})^{⊗n}) − φ^{⊗m_i}‖₁`.
    pub side_errors: [f64; 2],
    /// `‖(Λ₁ ⊗ id)(μ^{⊗n}) − φ^{⊗m₁} ⊗ (μ^{S₂})^{⊗n}‖₁`.
    pub intermediate: f64,
    /// Decoupling bound on `intermediate` from the first side error.
    pub intermediate_bound: f64,
    /// `‖(Λ₁ ⊗ Λ₂)(μ^{⊗n}) − φ^{⊗(m₁+m₂)}‖₁`.
    pub combined: f64,
    pub passed: bool,
}

fn copies_of(proto_side: &QState, in_len: usize, what: &str) -> Result<usize> {
    let k = proto_side.layout().len();
    if k == 0 || !in_len.is_multiple_of(k) {
        return Err(Error::LayoutMismatch(format!(
            "{what} does not act on whole copies of {}",
            proto_side.layout()
        )));
    }
    Ok(in_len / k)
}

/// Applies `Λ₁ ⊗ Λ₂` to `copies` copies of `mu12`, whose first `s1_len`
/// factors form `S₁` and the rest `S₂`.
///
/// Each `Λ_i` must take `(μ^{S_i})^{⊗n}` to within `ε²/100` of some power of
/// the pure state `phi`; this is measured and a violation is an
/// [`Error::Precondition`]. The report then records the intermediate
/// distance, which must stay below `ε/2`, and the combined error, which
/// must stay below `ε`.
pub fn compose_superadditive(
    lambda1: &LoccProtocol,
    lambda2: &LoccProtocol,
    mu12: &QState,
    s1_len: usize,
    phi: &QState,
    eps: f64,
) -> Result<SuperadditiveReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("ε must lie in (0, 1), got {eps}")));
    }
    if !phi.is_pure() {
        return Err(Error::NotPure(1.0 - phi.max_eigenvalue()));
    }
    let k = mu12.layout().len();
    if s1_len == 0 || s1_len >= k {
        return Err(Error::LayoutMismatch(format!(
            "split at {s1_len} leaves a side of {} empty",
            mu12.layout()
        )));
    }
    let mu1 = mu12.partial_trace(&(0..s1_len).collect::<Vec<_>>())?;
    let mu2 = mu12.partial_trace(&(s1_len..k).collect::<Vec<_>>())?;
    let n = copies_of(&mu1, lambda1.input().len(), "first protocol")?;
    let n2 = copies_of(&mu2, lambda2.input().len(), "second protocol")?;
    if n != n2 {
        return Err(Error::LayoutMismatch(format!(
            "protocols act on {n} and {n2} copies"
        )));
    }
    let m1 = copies_of(phi, lambda1.output().len(), "first protocol output")?;
    let m2 = copies_of(phi, lambda2.output().len(), "second protocol output")?;
    let phi1 = phi.power(m1)?;
    let phi2 = phi.power(m2)?;
    for (proto, want, name) in [(lambda1, &phi1, "first"), (lambda2, &phi2, "second")] {
        if !proto.output().same_profile(want.layout()) {
            return Err(Error::LayoutMismatch(format!(
                "{name} protocol outputs {}, not copies of {}",
                proto.output(),
                phi.layout()
            )));
        }
    }

    let budget = eps * eps / 100.0;
    let e1 = trace_norm_dist(&lambda1.run(&mu1.power(n)?)?, &phi1)?;
    let e2 = trace_norm_dist(&lambda2.run(&mu2.power(n)?)?, &phi2)?;
    if e1 >= budget || e2 >= budget {
        return Err(Error::Precondition(format!(
            "side errors {e1:e} and {e2:e} must both be below ε²/100 = {budget:e}"
        )));
    }

    // n copies of S1 S2, regrouped as S1^n S2^n
    let joint = mu12.power(n)?;
    let s2_len = k - s1_len;
    let perm: Vec<usize> = (0..n)
        .flat_map(|c| (0..s1_len).map(move |f| c * k + f))
        .chain((0..n).flat_map(|c| (0..s2_len).map(move |f| c * k + s1_len + f)))
        .collect();
    let joint = joint.permute(&perm)?;

    let first = LoccProtocol::identity(joint.layout().clone())
        .embed(&(0..n * s1_len).collect::<Vec<_>>(), lambda1.clone())?;
    let after1 = first.run(&joint)?;
    let intermediate = trace_norm_dist(&after1, &phi1.tensor(&mu2.power(n)?)?)?;

    let off = lambda1.output().len();
    let total = first.output().len();
    let both = first.embed(&(off..total).collect::<Vec<_>>(), lambda2.clone())?;
    let out = both.run(&joint)?;
    let combined = trace_norm_dist(&out, &phi.power(m1 + m2)?)?;

    let intermediate_bound = decoupling_rhs(e1);
    let passed = combined < eps && intermediate < eps / 2.0 && intermediate <= intermediate_bound + DECOUPLING_SLACK;
    Ok(SuperadditiveReport {
        eps,
        copies: n,
        m1,
        m2,
        budget,
        side_errors: [e1, e2],
        intermediate,
        intermediate_bound,
        combined,
        passed,
    })
}
