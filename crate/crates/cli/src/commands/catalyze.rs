//! Builds the catalyst and embedding for an `n`-copy protocol and checks
//! both marginals of the embedding's output against a brute-force
//! evaluation of the protocol.

use serde::{Deserialize, Serialize};

use entcat_core::catfactory::{build_catalyst, gamma_marginals, verify_catalysis, CatalysisCertificate};
use entcat_core::qstate::trace_norm_dist;
use entcat_core::QState;

use super::max_of;
use crate::error::{CliError, Result};
use crate::families::{Draw, ProtocolSpec, StateSpec};
use crate::report::{Check, Outcome};
use crate::scenario::Scenario;

fn two() -> usize {
    2
}
fn one() -> usize {
    1
}
fn tol() -> f64 {
    1e-9
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    state: StateSpec,
    protocol: ProtocolSpec,
    #[serde(default = "two")]
    n: usize,
    /// Target for the certificate; the average of the output marginals when
    /// absent.
    target: Option<StateSpec>,
    #[serde(default = "one")]
    instances: usize,
    #[serde(default = "tol")]
    tolerance: f64,
}

#[derive(Serialize)]
struct Row {
    state: String,
    seed: u64,
    catalyst_dim: usize,
    /// `‖μ^S − (1/n)Σ_k Γ_k^(k)‖₁`.
    output_identity: f64,
    /// `‖μ^C − τ‖₁`.
    catalyst_identity: f64,
    certificate: CatalysisCertificate,
}

pub(super) fn run(scn: &Scenario) -> Result<Outcome> {
    let p: Params = scn.params()?;
    if p.instances == 0 {
        return Err(CliError::Scenario("instances must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(p.instances);
    for i in 0..p.instances {
        let draw = Draw::instance(scn.seed, i);
        let rho = p.state.resolve(draw, &scn.base_dir)?;
        let lambda = p.protocol.build(&rho.state, p.n, draw, &scn.base_dir)?;
        let asm = build_catalyst(&lambda, &rho.state, p.n)?;

        // Γ through the flattened channel, independent of the assembly
        let gamma = lambda.flatten()?.apply(&rho.state.power(p.n)?)?;
        let marginals = gamma_marginals(&gamma, lambda.output().len() / p.n, p.n)?;
        let w = 1.0 / p.n as f64;
        let want = QState::mixture(&marginals.iter().map(|g| (w, g)).collect::<Vec<_>>())?;

        let out = asm.embedding.run(&rho.state.tensor(&asm.tau)?)?;
        let ks = want.layout().len();
        let total = out.layout().len();
        let mu_s = out.partial_trace(&(0..ks).collect::<Vec<_>>())?;
        let mu_c = out.partial_trace(&(ks..total).collect::<Vec<_>>())?;
        let sigma = match &p.target {
            Some(t) => t.resolve(draw, &scn.base_dir)?.state,
            None => want.clone(),
        };
        rows.push(Row {
            state: rho.label,
            seed: draw.seed,
            catalyst_dim: asm.tau.dim(),
            output_identity: trace_norm_dist(&mu_s, &want)?,
            catalyst_identity: trace_norm_dist(&mu_c, &asm.tau)?,
            certificate: verify_catalysis(&asm.embedding, &asm.tau, &rho.state, &sigma)?,
        });
    }

    let mut o = Outcome::default();
    o.check(Check::below(
        "output marginal equals averaged protocol marginals",
        max_of(rows.iter().map(|r| r.output_identity)),
        p.tolerance,
    ));
    o.check(Check::below(
        "catalyst returned unchanged",
        max_of(rows.iter().map(|r| r.catalyst_identity)),
        p.tolerance,
    ));
    o.check(Check::below(
        "certificate drift",
        max_of(rows.iter().map(|r| r.certificate.catalyst_drift)),
        p.tolerance,
    ));
    o.result("n", p.n);
    o.result("instances", &rows);
    Ok(o)
}
