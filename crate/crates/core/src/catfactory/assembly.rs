//! Catalyst from an `n`-copy protocol.
//!
//! With `Γ = Λ(ρ^{⊗n})` and `Γ_i` its marginal on the first `i` copies, the
//! catalyst is
//!
//! ```text
//! τ = (1/n) Σ_{k=1}^{n} ρ^{⊗(k−1)} ⊗ Γ_{n−k} ⊗ |k⟩⟨k|
//! ```
//!
//! on `n − 1` system slots and an `n`-level register held by Alice. The
//! embedding reads the register. For `k < n` the incoming copy takes the
//! place of the last `ρ` slot, the last copy of `Γ_{n−k}` leaves as the
//! output and the register moves to `k + 1`. For `k = n` all slots hold `ρ`,
//! so `Λ` is applied to them together with the incoming copy, copy `n` of the
//! result leaves and the register returns to `1`. Block `k` is mapped onto
//! block `k + 1` (cyclically), which keeps the catalyst marginal exactly, and
//! the output is `(1/n) Σ_k Γ_k^{(k)}`.

use crate::locc::{controlled_on_register, permute_factors, LoccProtocol, RegisterBranch};
use crate::qstate::{Factor, Party, QState, SystemLayout, MAX_TOTAL_DIM};
use crate::{Error, Result};

use super::{copy_indices, expect_profile, verify::gamma_marginals};

#[derive(Clone, Debug)]
pub struct CatalystAssembly {
    pub n: usize,
    /// Catalyst on `n − 1` copies of the system followed by the register.
    pub tau: QState,
    /// Protocol on `S ⊗ C`.
    pub embedding: LoccProtocol,
    /// `Γ_k^{(k)}` for `k = 1..n`.
    pub gamma_marginals: Vec<QState>,
}

impl CatalystAssembly {
    /// `(1/n) Σ_k Γ_k^{(k)}`, what the embedding leaves on `S`.
    pub fn expected_output(&self) -> Result<QState> {
        let w = 1.0 / self.n as f64;
        let parts: Vec<(f64, &QState)> = self.gamma_marginals.iter().map(|g| (w, g)).collect();
        QState::mixture(&parts)
    }

    /// `ρ ⊗ τ` for the system state `rho`.
    pub fn input_state(&self, rho: &QState) -> Result<QState> {
        rho.tensor(&self.tau)
    }
}

/// Builds the catalyst and its embedding for `lambda_n`, a protocol taking
/// `n` copies of `rho`'s layout to `n` copies of the same layout.
pub fn build_catalyst(lambda_n: &LoccProtocol, rho: &QState, n: usize) -> Result<CatalystAssembly> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("the construction needs n ≥ 2 copies, got {n}")));
    }
    let sys = rho.layout();
    let per = sys.len();
    let copies = sys.repeat(n)?;
    expect_profile(lambda_n.input(), &copies, "protocol input")?;
    expect_profile(lambda_n.output(), &copies, "protocol output")?;
    let total = copies
        .total_dim()
        .checked_mul(n)
        .filter(|&d| d <= MAX_TOTAL_DIM)
        .ok_or(Error::DimensionCap { dim: usize::MAX, cap: MAX_TOTAL_DIM })?;
    log::debug!("catalyst assembly: n = {n}, dimension of S ⊗ C = {total}");

    let gamma = lambda_n.run(&rho.power(n)?)?;
    let register = SystemLayout::single(Party::ALICE, n)?;

    // τ, block by block
    let mut blocks = Vec::with_capacity(n);
    for k in 1..=n {
        let keep: Vec<usize> = (0..(n - k) * per).collect();
        let block = match (k - 1, n - k) {
            (0, _) => gamma.partial_trace(&keep)?,
            (r, 0) => rho.power(r)?,
            (r, _) => rho.power(r)?.tensor(&gamma.partial_trace(&keep)?)?,
        };
        let reg = QState::basis(register.clone(), k - 1)?;
        blocks.push(block.tensor(&reg)?);
    }
    let w = 1.0 / n as f64;
    let parts: Vec<(f64, &QState)> = blocks.iter().map(|b| (w, b)).collect();
    let tau = QState::mixture(&parts)?;

    // S followed by n − 1 slots; slot s (1-based) starts at factor s·per
    let data = sys.repeat(n)?;
    let slot = |s: usize| copy_indices(s, per);
    let mut branches = Vec::with_capacity(n);
    for k in 1..n {
        // new S ← slot n−1, slots 1..k−1 stay, new slot k ← S,
        // new slots k+1..n−1 ← slots k..n−2
        let mut perm = slot(n - 1);
        for s in 1..k {
            perm.extend(slot(s));
        }
        perm.extend(slot(0));
        for s in k..n - 1 {
            perm.extend(slot(s));
        }
        branches.push(RegisterBranch {
            protocol: permute_factors(&data, &perm)?,
            next: k,
        });
    }
    // k = n: order the copies as (slot 1, …, slot n−1, S), apply Λ, then
    // bring copy n to the front
    let to_lambda: Vec<usize> = (1..n).flat_map(slot).chain(slot(0)).collect();
    let from_lambda: Vec<usize> = slot(n - 1).into_iter().chain((0..n - 1).flat_map(slot)).collect();
    let last = permute_factors(&data, &to_lambda)?
        .then(lambda_n.clone())?
        .then(permute_factors(&data, &from_lambda)?)?;
    branches.push(RegisterBranch { protocol: last, next: 0 });

    let mut factors = data.factors().to_vec();
    factors.push(Factor::new(Party::ALICE, n));
    let full = SystemLayout::new(factors)?;
    let embedding = controlled_on_register(&full, full.len() - 1, branches)?;

    Ok(CatalystAssembly {
        n,
        tau,
        embedding,
        gamma_marginals: gamma_marginals(&gamma, per, n)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::purecat::synthesize_pure_protocol;
    use crate::qstate::{random_state, trace_norm_dist, Ensemble, SchmidtVector};

    fn check(asm: &CatalystAssembly, rho: &QState) {
        let out = asm.embedding.run(&asm.input_state(rho).unwrap()).unwrap();
        let per = rho.layout().len();
        let total = out.layout().len();
        let c_idx: Vec<usize> = (per..total).collect();
        let mu_c = out.partial_trace(&c_idx).unwrap();
        assert!(trace_norm_dist(&mu_c, &asm.tau).unwrap() < 1e-9);
        let mu_s = out.partial_trace(&(0..per).collect::<Vec<_>>()).unwrap();
        let want = asm.expected_output().unwrap();
        assert!(trace_norm_dist(&mu_s, &want).unwrap() < 1e-9);
    }

    #[test]
    fn identity_protocol_gives_rho_back() {
        let rho = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, 3);
        let id = LoccProtocol::identity(rho.layout().repeat(2).unwrap());
        let asm = build_catalyst(&id, &rho, 2).unwrap();
        check(&asm, &rho);
        let reg = SystemLayout::single(Party::ALICE, 2).unwrap();
        let want = rho.tensor(&QState::maximally_mixed(reg)).unwrap();
        assert!(trace_norm_dist(&asm.tau, &want).unwrap() < 1e-12);
    }

    #[test]
    fn nontrivial_protocols_keep_the_identities() {
        // a protocol on two copies that mixes them: swap plus a local unitary
        // on one copy, run on a random mixed state
        let rho = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, 5);
        let two = rho.layout().repeat(2).unwrap();
        let mut rng = crate::qstate::rng_from_seed(1);
        let u = crate::qstate::random_unitary(2, &mut rng);
        let p = permute_factors(&two, &[2, 3, 0, 1])
            .unwrap()
            .local_unitary(Party::ALICE, &[0], u)
            .unwrap();
        let asm = build_catalyst(&p, &rho, 2).unwrap();
        check(&asm, &rho);
        for n in [2, 3] {
            let rho = SchmidtVector::new(vec![0.5, 0.5]).unwrap().canonical_state().unwrap();
            let single = synthesize_pure_protocol(
                &SchmidtVector::new(vec![0.5, 0.5]).unwrap(),
                &SchmidtVector::new(vec![0.75, 0.25]).unwrap(),
            )
            .unwrap();
            let mut proto = LoccProtocol::identity(rho.layout().repeat(n).unwrap());
            for c in 0..n {
                proto = proto.embed(&[2 * c, 2 * c + 1], single.clone()).unwrap();
            }
            let asm = build_catalyst(&proto, &rho, n).unwrap();
            check(&asm, &rho);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let rho = QState::singlet();
        let id2 = LoccProtocol::identity(rho.layout().repeat(2).unwrap());
        assert!(build_catalyst(&id2, &rho, 1).is_err());
        assert!(build_catalyst(&id2, &rho, 3).is_err());
    }
}
