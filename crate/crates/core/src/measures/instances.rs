//! Seeded random instances for the decoupling and composition checks.

use nalgebra::DVector;
use rand::Rng;

use crate::locc::LoccProtocol;
use crate::qstate::linalg::c;
use crate::qstate::{ginibre_state, haar_ket, random_unitary, rng_from_seed, Party, QState, SystemLayout};
use crate::{Error, Result, C64};

fn orthogonal_ket<R: Rng>(to: &DVector<C64>, rng: &mut R) -> DVector<C64> {
    loop {
        let g = haar_ket(to.len(), rng);
        let v = &g - to * to.dotc(&g);
        let n = v.norm();
        if n > 1e-6 {
            return v / c(n);
        }
    }
}

/// A joint state `μ^{SC}` whose `S` part is close to a pure state `φ` on two
/// qubits, with `C` one qubit or qutrit. Three shapes are drawn: a noisy
/// product `(1−p) φ⊗τ + p G`, a pure state tilted away from `φ⊗c`, and a
/// mixture of several perturbed products.
pub fn random_decoupling_instance(seed: u64) -> (QState, QState) {
    let mut rng = rng_from_seed(seed);
    let s = SystemLayout::two_qubits();
    let phi_ket = haar_ket(4, &mut rng);
    let phi = QState::from_ket(s.clone(), &phi_ket).expect("unit ket");
    let dc = rng.random_range(2..=3usize);
    let cl = SystemLayout::single(Party::BOB, dc).expect("small");
    let joint = s.concat(&cl).expect("small");
    let mu = match rng.random_range(0..3u32) {
        0 => {
            let tau = ginibre_state(&cl, dc, &mut rng);
            let junk = ginibre_state(&joint, 4 * dc, &mut rng);
            let p: f64 = rng.random_range(0.0..0.3);
            let good = phi.tensor(&tau).expect("layouts compose");
            QState::mixture(&[(1.0 - p, &good), (p, &junk)]).expect("weights sum to one")
        }
        1 => {
            let cket = haar_ket(dc, &mut rng);
            let g = haar_ket(4 * dc, &mut rng);
            let p: f64 = rng.random_range(0.0..0.2);
            let v = phi_ket.kronecker(&cket) * c((1.0 - p).sqrt()) + g * c(p.sqrt());
            let v = &v / c(v.norm());
            QState::from_ket(joint, &v).expect("unit ket")
        }
        _ => {
            let k = rng.random_range(2..=4usize);
            let mut parts = Vec::with_capacity(k);
            for _ in 0..k {
                let t: f64 = rng.random_range(0.0..0.15);
                let side = orthogonal_ket(&phi_ket, &mut rng);
                let near = &phi_ket * c((1.0 - t).sqrt()) + side * c(t.sqrt());
                let a = QState::from_ket(s.clone(), &near).expect("unit ket");
                let tau = ginibre_state(&cl, dc, &mut rng);
                parts.push(a.tensor(&tau).expect("layouts compose"));
            }
            let w = 1.0 / k as f64;
            QState::mixture(&parts.iter().map(|p| (w, p)).collect::<Vec<_>>()).expect("weights sum to one")
        }
    };
    (mu, phi)
}

/// Inputs for the composition check: `μ^{S₁S₂}` is the pure state
/// `√(1−q)|φ⟩|φ⟩ + √q|χ⟩|χ'⟩` (with `χ, χ' ⊥ φ`) rotated by random local
/// unitaries, so `S₁` alone is mixed and correlated with `S₂`. Each `Λ_i`
/// undoes the rotation on its side. The side errors are `2q`, and `q` is
/// drawn below `0.9·ε²/200` so that both meet the `ε²/100` budget.
#[derive(Clone, Debug)]
pub struct DeskInstance {
    pub lambda1: LoccProtocol,
    pub lambda2: LoccProtocol,
    pub mu12: QState,
    pub s1_len: usize,
    pub phi: QState,
    pub q: f64,
}

pub fn superadditive_desk_instance(eps: f64, seed: u64) -> Result<DeskInstance> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("ε must lie in (0, 1), got {eps}")));
    }
    let mut rng = rng_from_seed(seed);
    let pair = SystemLayout::two_qubits();
    let phi = QState::singlet();
    let phi_ket = phi.dominant_ket();
    let chi1 = orthogonal_ket(&phi_ket, &mut rng);
    let chi2 = orthogonal_ket(&phi_ket, &mut rng);
    let q = rng.random_range(0.1..0.9) * eps * eps / 200.0;
    let v = phi_ket.kronecker(&phi_ket) * c((1.0 - q).sqrt()) + chi1.kronecker(&chi2) * c(q.sqrt());

    let us: Vec<_> = (0..4).map(|_| random_unitary(2, &mut rng)).collect();
    let rot = us[0].kronecker(&us[1]).kronecker(&us[2]).kronecker(&us[3]);
    let layout = pair.repeat(2)?;
    let mu12 = QState::from_ket(layout, &(rot * v))?;

    let undo = |a: usize, b: usize| -> Result<LoccProtocol> {
        LoccProtocol::identity(pair.clone())
            .local_unitary(Party::ALICE, &[0], us[a].adjoint())?
            .local_unitary(Party::BOB, &[1], us[b].adjoint())
    };
    Ok(DeskInstance {
        lambda1: undo(0, 1)?,
        lambda2: undo(2, 3)?,
        mu12,
        s1_len: 2,
        phi,
        q,
    })
}

/// [`superadditive_desk_instance`] with `q` chosen so that each side error
/// is `ε/2`, far over budget.
pub fn over_budget_instance(eps: f64, seed: u64) -> Result<DeskInstance> {
    let mut inst = superadditive_desk_instance(eps, seed)?;
    // rebuild with q = ε/4, i.e. side error 2q = ε/2
    let q = eps / 4.0;
    let mut rng = rng_from_seed(seed ^ 0x5eed);
    let phi_ket = inst.phi.dominant_ket();
    let chi1 = orthogonal_ket(&phi_ket, &mut rng);
    let chi2 = orthogonal_ket(&phi_ket, &mut rng);
    let v = phi_ket.kronecker(&phi_ket) * c((1.0 - q).sqrt()) + chi1.kronecker(&chi2) * c(q.sqrt());
    inst.mu12 = QState::from_ket(inst.mu12.layout().clone(), &v)?;
    inst.lambda1 = LoccProtocol::identity(SystemLayout::two_qubits());
    inst.lambda2 = inst.lambda1.clone();
    inst.q = q;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{compose_superadditive, decoupling_check};

    #[test]
    fn decoupling_instances_pass() {
        for seed in 0..200 {
            let (mu, phi) = random_decoupling_instance(seed);
            let r = decoupling_check(&mu, &phi).unwrap();
            assert!(r.pass, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn desk_instances_compose() {
        for seed in 0..5 {
            let d = superadditive_desk_instance(0.3, seed).unwrap();
            let r = compose_superadditive(&d.lambda1, &d.lambda2, &d.mu12, d.s1_len, &d.phi, 0.3).unwrap();
            assert!(r.passed, "{r:?}");
            assert!((r.side_errors[0] - 2.0 * d.q).abs() < 1e-9);
        }
        let bad = over_budget_instance(0.3, 1).unwrap();
        let r = compose_superadditive(&bad.lambda1, &bad.lambda2, &bad.mu12, bad.s1_len, &bad.phi, 0.3);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
