use nalgebra::DMatrix;

use crate::qstate::linalg::{c, max_abs};
use crate::qstate::{Factor, Party, QState, SystemLayout};
use crate::{CMatrix, Error, Result};

use super::{weyl, Channel, LoccProtocol};

/// Depolarizing channel on one `d`-level factor owned by Bob whose
/// entanglement fidelity equals `fidelity`.
///
/// This is the channel induced by teleporting through an isotropic
/// resource of singlet fraction `fidelity`.
pub fn teleport_channel(fidelity: f64, d: usize) -> Result<Channel> {
    teleport_channel_on(SystemLayout::single(Party::BOB, d)?, fidelity)
}

/// [`teleport_channel`] on an arbitrary layout, treated as one system of
/// its total dimension.
pub fn teleport_channel_on(layout: SystemLayout, fidelity: f64) -> Result<Channel> {
    let d = layout.total_dim() as f64;
    let lo = 1.0 / (d * d);
    if !(fidelity.is_finite() && (lo - 1e-15..=1.0 + 1e-15).contains(&fidelity)) {
        return Err(Error::OutOfRange(format!(
            "resource fidelity {fidelity} not in [{lo}, 1]"
        )));
    }
    let q = ((d * d * fidelity - 1.0) / (d * d - 1.0)).clamp(0.0, 1.0);
    Channel::depolarizing(layout, q)
}

/// Bell basis `|β_ab⟩ = (I ⊗ X^a Z^b)|Φ⟩` on two `d`-level systems, with
/// `|Φ⟩ = Σ_i |ii⟩/√d`. Returned as row vectors (bras).
pub fn bell_bras(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    let s = 1.0 / (d as f64).sqrt();
    for a in 0..d {
        for b in 0..d {
            let w = weyl(d, a, b);
            let mut bra = DMatrix::zeros(1, d * d);
            for i in 0..d {
                for j in 0..d {
                    // ⟨β| = Σ_i conj(W[j, i]) ⟨i j| / √d
                    bra[(0, i * d + j)] = w[(j, i)].conj() * c(s);
                }
            }
            out.push(bra);
        }
    }
    out
}

/// Standard teleportation of Alice's factor 0 to Bob's factor 2 using the
/// maximally entangled `resource` on factors (1, 2).
///
/// Input layout `[A d, A d, B d]`, output `[B d]`. Alice performs a Bell
/// measurement and Bob applies the correction for her outcome.
pub fn teleportation_protocol(resource: &QState) -> Result<LoccProtocol> {
    let rl = resource.layout();
    if rl.len() != 2 || rl.factors()[0].party != Party::ALICE || rl.factors()[1].party != Party::BOB {
        return Err(Error::LayoutMismatch("resource must be an Alice/Bob pair".into()));
    }
    let d = rl.factors()[0].dim;
    if rl.factors()[1].dim != d {
        return Err(Error::InvalidDimension("resource halves differ in dimension".into()));
    }
    let r = resource.ket()?;
    let layout = SystemLayout::new(vec![
        Factor::new(Party::ALICE, d),
        Factor::new(Party::ALICE, d),
        Factor::new(Party::BOB, d),
    ])?;
    let bob = SystemLayout::single(Party::BOB, d)?;
    let bras = bell_bras(d);
    let mut outcomes = Vec::with_capacity(d * d);
    let mut branches = Vec::with_capacity(d * d);
    for (k, bra) in bras.into_iter().enumerate() {
        // (⟨β_k| ⊗ I)(|ψ⟩ ⊗ |r⟩) = V_k |ψ⟩ / d
        let mut v = DMatrix::zeros(d, d);
        for i in 0..d {
            for b in 0..d {
                let mut acc = c(0.0);
                for a in 0..d {
                    acc += bra[(0, i * d + a)] * r[a * d + b];
                }
                v[(b, i)] = acc * c(d as f64);
            }
        }
        let u = v.adjoint();
        if max_abs(&(&u * &v - DMatrix::identity(d, d))) > 1e-9 {
            return Err(Error::InvalidState("resource is not maximally entangled".into()));
        }
        outcomes.push((k.to_string(), vec![bra]));
        branches.push(LoccProtocol::identity(bob.clone()).local_unitary(Party::BOB, &[0], u)?);
    }
    LoccProtocol::identity(layout).measure(Party::ALICE, &[0, 1], outcomes, &[], branches)
}
