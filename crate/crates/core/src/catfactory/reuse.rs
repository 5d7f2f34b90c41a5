//! Marginal reduction by reusing one approximate catalyst for many copies.

use serde::Serialize;

use crate::locc::LoccProtocol;
use crate::qstate::{trace_norm_dist, QState};
use crate::{Error, Result};

use super::{expect_profile, ReductionCertificate};

/// Joint tracking is exponential in the number of copies; beyond this
/// only marginals are kept.
pub const MAX_JOINT_COPIES: usize = 3;

#[derive(Clone, Copy, Debug, Default)]
pub struct ReuseOptions {
    /// Keep the full state of all converted copies and the catalyst.
    pub track_joint: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReuseOutcome {
    /// `ν^{S_i}` for each converted copy.
    #[serde(skip)]
    pub marginals: Vec<QState>,
    /// State of all converted copies and the catalyst, when tracked.
    #[serde(skip)]
    pub joint: Option<QState>,
    /// Catalyst state after the last copy.
    #[serde(skip)]
    pub catalyst: QState,
    /// `‖τ_ε − τ‖₁`.
    pub initial_eps: f64,
    /// `‖μ_i^C − τ‖₁` after each copy.
    pub drifts: Vec<f64>,
    pub certificate: ReductionCertificate,
}

impl ReuseOutcome {
    pub fn max_drift(&self) -> f64 {
        self.drifts.iter().copied().fold(0.0, f64::max)
    }
}

/// Converts `copies` fresh copies of `rho` one after another with `lambda`,
/// each time using the catalyst left over by the previous step, starting
/// from `tau_eps`. Drifts are measured against the exact catalyst `tau`.
pub fn iterate_reuse(
    lambda: &LoccProtocol,
    tau_eps: &QState,
    tau: &QState,
    rho: &QState,
    sigma: &QState,
    copies: usize,
    opts: ReuseOptions,
) -> Result<ReuseOutcome> {
    if copies == 0 {
        return Err(Error::OutOfRange("need at least one copy".into()));
    }
    if opts.track_joint && copies > MAX_JOINT_COPIES {
        return Err(Error::OutOfRange(format!(
            "joint tracking is limited to {MAX_JOINT_COPIES} copies, asked for {copies}"
        )));
    }
    expect_profile(tau_eps.layout(), tau.layout(), "approximate catalyst")?;
    expect_profile(lambda.input(), &rho.layout().concat(tau.layout())?, "protocol input")?;
    expect_profile(lambda.output(), &sigma.layout().concat(tau.layout())?, "protocol output")?;

    let ks = sigma.layout().len();
    let kc = tau.layout().len();
    let initial_eps = trace_norm_dist(tau_eps, tau)?;
    let mut catalyst = tau_eps.clone();
    let mut joint = opts.track_joint.then(|| tau_eps.clone());
    let mut marginals = Vec::with_capacity(copies);
    let mut drifts = Vec::with_capacity(copies);

    for i in 0..copies {
        let mu = lambda.run(&rho.tensor(&catalyst)?)?;
        let total = mu.layout().len();
        marginals.push(mu.partial_trace(&(0..ks).collect::<Vec<_>>())?);
        catalyst = mu.partial_trace(&(ks..total).collect::<Vec<_>>())?;
        drifts.push(trace_norm_dist(&catalyst, tau)?);
        log::debug!("copy {}: catalyst drift {:.3e}", i + 1, drifts[i]);

        if let Some(j) = joint.take() {
            // [S'_1..S'_i, C] ⊗ ρ → [S'_1..S'_i, ρ, C] → Λ on the tail
            let done = i * ks;
            let with = j.tensor(rho)?;
            let kr = rho.layout().len();
            let perm: Vec<usize> = (0..done)
                .chain(done + kc..done + kc + kr)
                .chain(done..done + kc)
                .collect();
            let with = with.permute(&perm)?;
            let n_all = with.layout().len();
            let step = LoccProtocol::identity(with.layout().clone())
                .embed(&(done..n_all).collect::<Vec<_>>(), lambda.clone())?;
            joint = Some(step.run(&with)?);
        }
    }

    let per_marginal_errors = marginals
        .iter()
        .map(|m| trace_norm_dist(m, sigma))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReuseOutcome {
        marginals,
        joint,
        catalyst,
        initial_eps,
        drifts,
        certificate: ReductionCertificate {
            n: copies,
            m: copies,
            per_marginal_errors,
            rate_slack: 1.0,
        },
    })
}

/// Full reduction of `n` copies: the last `k` copies are turned into an
/// approximate catalyst by `prepare` (which takes `k` copies of `rho` to the
/// catalyst's layout), and the remaining `n − k` are converted with
/// [`iterate_reuse`]. The certificate has `m = n − k`.
pub fn reduction_pipeline(
    lambda: &LoccProtocol,
    prepare: &LoccProtocol,
    tau: &QState,
    rho: &QState,
    sigma: &QState,
    n: usize,
) -> Result<ReuseOutcome> {
    let per = rho.layout().len();
    if !prepare.input().len().is_multiple_of(per) {
        return Err(Error::LayoutMismatch(format!(
            "catalyst preparation input {} is not whole copies of {}",
            prepare.input(),
            rho.layout()
        )));
    }
    let k = prepare.input().len() / per;
    expect_profile(prepare.input(), &rho.layout().repeat(k)?, "preparation input")?;
    expect_profile(prepare.output(), tau.layout(), "preparation output")?;
    if n <= k {
        return Err(Error::OutOfRange(format!(
            "n = {n} leaves no copies after spending {k} on the catalyst"
        )));
    }
    let tau_eps = prepare.run(&rho.power(k)?)?;
    let mut out = iterate_reuse(lambda, &tau_eps, tau, rho, sigma, n - k, ReuseOptions::default())?;
    out.certificate.n = n;
    out.certificate.rate_slack = (n - k) as f64 / n as f64;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catfactory::build_catalyst;
    use crate::locc::{permute_factors, Channel};
    use crate::qstate::{random_state, Ensemble, Party, SystemLayout};

    fn swap_assembly(seed: u64) -> (QState, crate::catfactory::CatalystAssembly) {
        let rho = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, seed);
        let two = rho.layout().repeat(2).unwrap();
        let mut rng = crate::qstate::rng_from_seed(seed);
        let u = crate::qstate::random_unitary(2, &mut rng);
        let p = permute_factors(&two, &[2, 3, 0, 1])
            .unwrap()
            .local_unitary(Party::BOB, &[1], u)
            .unwrap();
        let asm = build_catalyst(&p, &rho, 2).unwrap();
        (rho, asm)
    }

    #[test]
    fn exact_catalyst_has_no_drift() {
        let (rho, asm) = swap_assembly(3);
        let sigma = asm.expected_output().unwrap();
        let out = iterate_reuse(&asm.embedding, &asm.tau, &asm.tau, &rho, &sigma, 4, ReuseOptions::default()).unwrap();
        assert!(out.max_drift() < 1e-9);
        assert!(out.certificate.max_error() < 1e-9);
    }

    #[test]
    fn joint_tracking_agrees_with_marginals() {
        let (rho, asm) = swap_assembly(7);
        let sigma = asm.expected_output().unwrap();
        let c = asm.tau.layout().clone();
        let tau_eps = Channel::depolarizing(c, 0.02).unwrap().apply(&asm.tau).unwrap();
        let out = iterate_reuse(
            &asm.embedding,
            &tau_eps,
            &asm.tau,
            &rho,
            &sigma,
            3,
            ReuseOptions { track_joint: true },
        )
        .unwrap();
        let joint = out.joint.as_ref().unwrap();
        for (i, m) in out.marginals.iter().enumerate() {
            let from_joint = joint.partial_trace(&[2 * i, 2 * i + 1]).unwrap();
            assert!(trace_norm_dist(&from_joint, m).unwrap() < 1e-9);
        }
        let total = joint.layout().len();
        let cat = joint.partial_trace(&(6..total).collect::<Vec<_>>()).unwrap();
        assert!(trace_norm_dist(&cat, &out.catalyst).unwrap() < 1e-9);
        for d in &out.drifts {
            assert!(*d <= out.initial_eps + 1e-12);
        }
        assert!(iterate_reuse(&asm.embedding, &tau_eps, &asm.tau, &rho, &sigma, 4, ReuseOptions { track_joint: true }).is_err());
    }
}
