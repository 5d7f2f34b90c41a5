//! Decoupling of a catalyst from a nearly pure system, and the
//! fidelity/trace-distance inequalities it rests on.

use serde::Serialize;

use crate::qstate::{fidelity, trace_norm_dist, QState, PURE_TOL};
use crate::{Error, Result};

/// Slack on the decoupling comparison. At `μ = φ ⊗ τ` both sides vanish.
pub const DECOUPLING_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecouplingCheck {
    /// `‖μ^S − φ‖₁`.
    pub eps: f64,
    /// `‖μ^{SC} − φ ⊗ μ^C‖₁`.
    pub lhs: f64,
    /// `ε + 6√(ε/2)`.
    pub rhs: f64,
    pub pass: bool,
}

pub fn decoupling_rhs(eps: f64) -> f64 {
    eps + 6.0 * (eps / 2.0).sqrt()
}

/// Compares how far `mu_sc` is from `φ ⊗ μ^C` against the bound implied by
/// its `S` marginal being close to the pure state `phi`. `S` is the leading
/// `phi.layout().len()` factors of `mu_sc`, the rest is `C`.
pub fn decoupling_check(mu_sc: &QState, phi: &QState) -> Result<DecouplingCheck> {
    if !phi.is_pure() {
        return Err(Error::NotPure(1.0 - phi.max_eigenvalue()));
    }
    let k = phi.layout().len();
    let n = mu_sc.layout().len();
    if k > n {
        return Err(Error::LayoutMismatch(format!(
            "{} does not start with {}",
            mu_sc.layout(),
            phi.layout()
        )));
    }
    let s_idx: Vec<usize> = (0..k).collect();
    let mu_s = mu_sc.partial_trace(&s_idx)?;
    if !mu_s.layout().same_profile(phi.layout()) {
        return Err(Error::LayoutMismatch(format!(
            "system part {} differs from {}",
            mu_s.layout(),
            phi.layout()
        )));
    }
    let eps = trace_norm_dist(&mu_s, phi)?;
    let c_idx: Vec<usize> = (k..n).collect();
    let decoupled = if c_idx.is_empty() {
        phi.clone()
    } else {
        phi.tensor(&mu_sc.partial_trace(&c_idx)?)?
    };
    let lhs = trace_norm_dist(mu_sc, &decoupled)?;
    let rhs = decoupling_rhs(eps);
    Ok(DecouplingCheck {
        eps,
        lhs,
        rhs,
        pass: lhs <= rhs + DECOUPLING_SLACK,
    })
}

/// Fidelity against trace distance for one pair of states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FvdgCheck {
    pub fidelity: f64,
    /// `½‖a − b‖₁`.
    pub half_trace: f64,
    /// Whether either state is pure.
    pub one_pure: bool,
    /// `√(1 − ½‖a − b‖₁)`, a lower bound on the fidelity when one state is
    /// pure.
    pub sqrt_lower: f64,
    /// `1 − ½‖a − b‖₁`, a lower bound on the fidelity for any pair.
    pub linear_lower: f64,
    /// `√(1 − F²)`, an upper bound on `½‖a − b‖₁`.
    pub upper: f64,
}

impl FvdgCheck {
    /// Lower bound that applies to this pair: the square-root form when one
    /// state is pure, the linear form otherwise.
    pub fn lower_holds(&self, tol: f64) -> bool {
        let bound = if self.one_pure { self.sqrt_lower } else { self.linear_lower };
        self.fidelity >= bound - tol
    }

    pub fn sqrt_lower_holds(&self, tol: f64) -> bool {
        self.fidelity >= self.sqrt_lower - tol
    }

    pub fn upper_holds(&self, tol: f64) -> bool {
        self.half_trace <= self.upper + tol
    }
}

pub fn fvdg_check(a: &QState, b: &QState) -> Result<FvdgCheck> {
    let f = fidelity(a, b)?;
    let half = 0.5 * trace_norm_dist(a, b)?;
    let one_pure = a.max_eigenvalue() >= 1.0 - PURE_TOL || b.max_eigenvalue() >= 1.0 - PURE_TOL;
    Ok(FvdgCheck {
        fidelity: f,
        half_trace: half,
        one_pure,
        sqrt_lower: (1.0 - half).max(0.0).sqrt(),
        linear_lower: 1.0 - half,
        upper: (1.0 - f * f).max(0.0).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_state, Ensemble, Party, SystemLayout};

    #[test]
    fn product_with_target_passes_at_zero() {
        let phi = QState::singlet();
        let tau = random_state(&SystemLayout::single(Party::ALICE, 3).unwrap(), Ensemble::GinibreMixed, 1);
        let r = decoupling_check(&phi.tensor(&tau).unwrap(), &phi).unwrap();
        assert!(r.eps < 1e-12 && r.lhs < 1e-12 && r.pass);
    }

    #[test]
    fn noisy_random_joint_states_pass() {
        let phi = QState::singlet();
        let l = SystemLayout::two_qubits()
            .concat(&SystemLayout::single(Party::BOB, 2).unwrap())
            .unwrap();
        for seed in 0..5 {
            let noise = random_state(&l, Ensemble::GinibreMixed, seed);
            let tau = random_state(&SystemLayout::single(Party::BOB, 2).unwrap(), Ensemble::HaarPure, seed);
            let good = phi.tensor(&tau).unwrap();
            let mu = QState::mixture(&[(0.97, &good), (0.03, &noise)]).unwrap();
            let r = decoupling_check(&mu, &phi).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(r.eps > 0.0);
        }
    }

    #[test]
    fn mixed_target_is_rejected() {
        let m = QState::maximally_mixed(SystemLayout::two_qubits());
        assert!(matches!(decoupling_check(&m, &m), Err(Error::NotPure(_))));
    }

    #[test]
    fn sqrt_form_fails_for_two_mixed_states() {
        let l = SystemLayout::single(Party::ALICE, 3).unwrap();
        let a = QState::diagonal(l.clone(), &[0.5, 0.5, 0.0]).unwrap();
        let b = QState::diagonal(l, &[0.5, 0.0, 0.5]).unwrap();
        let r = fvdg_check(&a, &b).unwrap();
        assert!(!r.one_pure);
        assert!((r.fidelity - 0.5).abs() < 1e-12);
        assert!(!r.sqrt_lower_holds(1e-9));
        assert!(r.lower_holds(1e-12) && r.upper_holds(1e-12));
    }
}
