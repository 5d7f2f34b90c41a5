//! Ready-made protocols: factor moves and register-controlled branching.

use crate::qstate::{tensor, SystemLayout};
use crate::{Error, Result};

use super::protocol::permutation_matrix;
use super::LoccProtocol;

/// Moves the content of factor `perm[p]` into factor `p`, for every `p`.
///
/// Each factor must have the same owner and dimension as the factor it
/// receives, so every party only permutes its own systems. Realized as one
/// local permutation unitary per party.
pub fn permute_factors(layout: &SystemLayout, perm: &[usize]) -> Result<LoccProtocol> {
    if perm.len() != layout.len() {
        return Err(Error::LayoutMismatch("permutation must list every factor".into()));
    }
    layout.check_indices(perm)?;
    for (p, &q) in perm.iter().enumerate() {
        if layout.factor(p)? != layout.factor(q)? {
            return Err(Error::InvalidDimension(format!(
                "factor {q} ({:?}) cannot move into factor {p} ({:?})",
                layout.factor(q)?,
                layout.factor(p)?
            )));
        }
    }
    let mut proto = LoccProtocol::identity(layout.clone());
    for party in layout.parties() {
        let own = layout.indices_of(party);
        let sigma: Vec<usize> = own
            .iter()
            .map(|&f| own.iter().position(|&g| g == perm[f]).expect("same owner"))
            .collect();
        if sigma.iter().enumerate().all(|(i, &s)| i == s) {
            continue;
        }
        let dims: Vec<usize> = own.iter().map(|&f| layout.dims()[f]).collect();
        let u = permutation_matrix(&tensor::index_map(&dims, &sigma));
        proto = proto.local_unitary(party, &own, u)?;
    }
    Ok(proto)
}

/// Exchanges the contents of factor blocks `a` and `b` (equal length,
/// matching owners and dimensions position by position).
pub fn swap_factors(layout: &SystemLayout, a: &[usize], b: &[usize]) -> Result<LoccProtocol> {
    if a.len() != b.len() {
        return Err(Error::InvalidDimension("swapped blocks differ in length".into()));
    }
    let mut all = a.to_vec();
    all.extend_from_slice(b);
    layout.check_indices(&all)?;
    let mut perm: Vec<usize> = (0..layout.len()).collect();
    for (&x, &y) in a.iter().zip(b) {
        perm[x] = y;
        perm[y] = x;
    }
    permute_factors(layout, &perm)
}

/// Branch of [`controlled_on_register`]: `protocol` runs on every factor
/// except the register, after which the register is set to `next`.
#[derive(Clone, Debug)]
pub struct RegisterBranch {
    pub protocol: LoccProtocol,
    pub next: usize,
}

/// Reads the classical register factor `reg` in its basis, broadcasts the
/// value `k`, runs branch `k` on the remaining factors and writes
/// `branches[k].next` into the register.
///
/// Off-diagonal register coherences are destroyed by the read-out.
pub fn controlled_on_register(
    layout: &SystemLayout,
    reg: usize,
    branches: Vec<RegisterBranch>,
) -> Result<LoccProtocol> {
    let rf = layout.factor(reg)?;
    if rf.dim != branches.len() {
        return Err(Error::LayoutMismatch(format!(
            "register of dimension {} with {} branches",
            rf.dim,
            branches.len()
        )));
    }
    let rest = layout.complement(&[reg]);
    let rest_layout = layout.select(&rest)?;
    let d = rf.dim;
    let mut outcomes = Vec::with_capacity(d);
    let mut embedded = Vec::with_capacity(d);
    for (k, br) in branches.into_iter().enumerate() {
        if br.next >= d {
            return Err(Error::IndexOutOfRange { index: br.next, len: d });
        }
        if !br.protocol.input().same_profile(&rest_layout) || !br.protocol.output().same_profile(&rest_layout) {
            return Err(Error::LayoutMismatch(format!(
                "branch {k} must act on {rest_layout} and preserve it"
            )));
        }
        outcomes.push((k.to_string(), vec![crate::qstate::linalg::unit(d, br.next, k)]));
        embedded.push(LoccProtocol::identity(layout.clone()).embed(&rest, br.protocol)?);
    }
    LoccProtocol::identity(layout.clone()).measure(rf.party, &[reg], outcomes, &[d], embedded)
}
