//! Channels, instruments and LOCC protocol trees.
//!
//! Locality is enforced when a protocol is built: a round may only touch
//! factors owned by the acting party, and classical communication is the
//! branching on its outcome. Anything that type-checks as a
//! [`LoccProtocol`] is therefore an LOCC operation.

mod channel;
mod instrument;
mod io;
mod ops;
mod protocol;
mod teleport;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::CMatrix;

pub use channel::Channel;
pub use instrument::Instrument;
pub use io::{protocol_from_json, protocol_to_json, PROTOCOL_FORMAT};
pub use ops::{controlled_on_register, permute_factors, swap_factors, RegisterBranch};
pub use protocol::{Branch, LoccProtocol, Round, Step};
pub use teleport::{bell_bras, teleport_channel, teleport_channel_on, teleportation_protocol};

/// Tolerance on `Σ K†K = I`.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Kraus operators with Frobenius norm below this are dropped.
pub const PRUNE_NORM: f64 = 1e-14;

/// Weyl operator `X^a Z^b` in dimension `d`.
pub fn weyl(d: usize, a: usize, b: usize) -> CMatrix {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        let phase = Complex64::from_polar(1.0, omega * ((b * j) % d) as f64);
        m[((j + a) % d, j)] = phase;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::{c, max_abs};
    use crate::qstate::{random_state, trace_norm_dist, Ensemble, Factor, Party, QState, SystemLayout};

    #[test]
    fn weyl_operators_are_unitary_and_orthogonal() {
        let d = 3;
        for a in 0..d {
            for b in 0..d {
                let w = weyl(d, a, b);
                assert!(max_abs(&(w.adjoint() * &w - DMatrix::identity(d, d))) < 1e-12);
                let t = (weyl(d, 0, 0).adjoint() * &w).trace();
                if (a, b) != (0, 0) {
                    assert!(t.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn empty_protocol_flattens_to_identity() {
        let l = SystemLayout::two_qubits();
        let ch = LoccProtocol::identity(l.clone()).flatten().unwrap();
        assert!(ch.distance(&Channel::identity(l)).unwrap() < 1e-15);
    }

    #[test]
    fn local_unitary_flattens_to_tensor_with_identity() {
        let l = SystemLayout::two_qubits();
        let mut rng = crate::qstate::rng_from_seed(3);
        let u = crate::qstate::random_unitary(2, &mut rng);
        let p = LoccProtocol::identity(l.clone()).local_unitary(Party::ALICE, &[0], u.clone()).unwrap();
        let want = u.kronecker(&DMatrix::<crate::C64>::identity(2, 2));
        let ch = p.flatten().unwrap();
        assert_eq!(ch.kraus().len(), 1);
        assert!(max_abs(&(&ch.kraus()[0] - want)) < 1e-12);
    }

    #[test]
    fn builder_rejects_nonlocal_rounds() {
        let l = SystemLayout::two_qubits();
        let cnot = {
            let mut m = DMatrix::zeros(4, 4);
            for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                m[(i, j)] = c(1.0);
            }
            m
        };
        let r = LoccProtocol::identity(l.clone()).local_unitary(Party::ALICE, &[0, 1], cnot);
        assert!(matches!(r, Err(crate::Error::Locality(_))));
        let r = LoccProtocol::identity(l).local_ops(Party::ALICE, &[0], vec![DMatrix::identity(2, 2)], &[2]);
        assert!(r.is_ok());
    }

    #[test]
    fn run_agrees_with_flatten() {
        let p = teleportation_protocol(&QState::singlet()).unwrap();
        let l = p.input().clone();
        let s = random_state(&l, Ensemble::GinibreMixed, 21);
        let a = p.run(&s).unwrap();
        let b = p.flatten().unwrap().apply(&s).unwrap();
        assert!(trace_norm_dist(&a, &b).unwrap() < 1e-12);
        let branches = p.branches(&s).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flatten_is_associative() {
        let l = SystemLayout::new(vec![Factor::new(Party::ALICE, 2), Factor::new(Party::BOB, 3)]).unwrap();
        let mut rng = crate::qstate::rng_from_seed(5);
        let ua = crate::qstate::random_unitary(2, &mut rng);
        let ub = crate::qstate::random_unitary(3, &mut rng);
        let p1 = LoccProtocol::identity(l.clone()).local_unitary(Party::ALICE, &[0], ua).unwrap();
        let p2 = LoccProtocol::identity(l.clone()).local_unitary(Party::BOB, &[1], ub).unwrap();
        let whole = p1.clone().then(p2.clone()).unwrap().flatten().unwrap();
        let parts = p1.flatten().unwrap().compose(&p2.flatten().unwrap()).unwrap();
        assert!(whole.distance(&parts).unwrap() < 1e-9);
    }

    #[test]
    fn with_output_keeps_listed_order() {
        let l = SystemLayout::new(vec![
            Factor::new(Party::ALICE, 2),
            Factor::new(Party::BOB, 3),
            Factor::new(Party::ALICE, 4),
        ])
        .unwrap();
        let p = LoccProtocol::identity(l.clone()).with_output(&[2, 0]).unwrap();
        assert_eq!(p.output().dims(), vec![4, 2]);
        let s = random_state(&l, Ensemble::GinibreMixed, 2);
        let out = p.run(&s).unwrap();
        let want = s.reduce_to(&[2, 0]).unwrap();
        assert!(trace_norm_dist(&out, &want).unwrap() < 1e-12);
    }

    #[test]
    fn recording_flatten_keeps_outcomes() {
        let p = teleportation_protocol(&QState::singlet()).unwrap();
        let (ch, labels) = p.flatten_recording(Party::BOB).unwrap();
        assert_eq!(labels.len(), 4);
        assert_eq!(ch.output().dims(), vec![2, 4]);
        assert!(ch.completeness_error() < 1e-12);
    }
}
