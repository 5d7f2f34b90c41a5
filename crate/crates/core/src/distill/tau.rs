use crate::locc::teleport_channel;
use crate::qstate::{trace_norm_dist, Party, QState};
use crate::{Error, Result};

/// Approximate catalyst: Alice prepares `tau` herself and teleports each of
/// Bob's factors to him through its own resource of fidelity `f_resource`.
/// Returns the delivered state and its distance `‖τ_ε − τ‖₁`.
pub fn synthesize_tau_eps(tau: &QState, f_resource: f64) -> Result<(QState, f64)> {
    if !(f_resource.is_finite() && f_resource > 0.25 && f_resource <= 1.0) {
        return Err(Error::OutOfRange(format!("resource fidelity {f_resource} not in (1/4, 1]")));
    }
    let mut out = tau.clone();
    for (i, f) in tau.layout().factors().iter().enumerate() {
        if f.party != Party::BOB {
            continue;
        }
        let ch = teleport_channel(f_resource, f.dim)?;
        let ch = ch.relabel(
            out.layout().select(&[i])?,
            out.layout().select(&[i])?,
        )?;
        out = ch.apply_to(&out, &[i])?;
    }
    let eps = trace_norm_dist(&out, tau)?;
    Ok((out, eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_resource_is_exact() {
        let (t, eps) = synthesize_tau_eps(&QState::singlet(), 1.0).unwrap();
        assert!(eps < 1e-12);
        assert!(trace_norm_dist(&t, &QState::singlet()).unwrap() < 1e-12);
    }

    #[test]
    fn singlet_through_noisy_channel() {
        // q = (4F − 1)/3 and ‖ψ⁻ − (qψ⁻ + (1−q)I/4)‖₁ = 3(1 − q)/2
        for f in [0.3, 0.6, 0.9, 0.99] {
            let (_, eps) = synthesize_tau_eps(&QState::singlet(), f).unwrap();
            let q = (4.0 * f - 1.0) / 3.0;
            assert!((eps - 1.5 * (1.0 - q)).abs() < 1e-12);
        }
        assert!(synthesize_tau_eps(&QState::singlet(), 0.25).is_err());
    }
}
