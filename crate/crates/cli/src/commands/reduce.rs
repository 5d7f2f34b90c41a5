//! Measures the marginal errors `ε` and rate slack `δ` of a protocol on `n`
//! copies, builds the catalyst from it, and checks that the catalytic
//! output error stays within `ε + 2δ`.

use serde::{Deserialize, Serialize};

use entcat_core::catfactory::{build_catalyst, verify_catalysis, verify_marginal_reduction, ReductionCertificate};

use crate::error::{CliError, Result};
use crate::families::{Draw, ProtocolSpec, StateSpec};
use crate::report::{Check, Outcome};
use crate::scenario::Scenario;

/// Float noise allowed on top of `ε + 2δ`. The premise is a strict bound
/// `‖·‖₁ < ε` for every `ε` above the measured maximum, so the measured
/// values give a closed inequality.
const SLACK: f64 = 1e-12;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    state: StateSpec,
    target: StateSpec,
    protocol: ProtocolSpec,
    n: usize,
    /// Only this `m`; every `m ≤ n` when absent.
    m: Option<usize>,
}

#[derive(Serialize)]
struct Row {
    m: usize,
    eps: f64,
    delta: f64,
    epsilon_achieved: f64,
    bound: f64,
    refined_bound: f64,
    reduction: ReductionCertificate,
}

pub(super) fn run(scn: &Scenario) -> Result<Outcome> {
    let p: Params = scn.params()?;
    let draw = Draw::instance(scn.seed, 0);
    let rho = p.state.resolve(draw, &scn.base_dir)?.state;
    let sigma = p.target.resolve(draw, &scn.base_dir)?.state;
    let lambda = p.protocol.build(&rho, p.n, draw, &scn.base_dir)?;
    if !lambda.output().same_profile(&sigma.layout().repeat(p.n)?) {
        return Err(CliError::Scenario(format!(
            "protocol output {} is not {} copies of the target layout {}",
            lambda.output(),
            p.n,
            sigma.layout()
        )));
    }
    let asm = build_catalyst(&lambda, &rho, p.n)?;
    let cert = verify_catalysis(&asm.embedding, &asm.tau, &rho, &sigma)?;

    let per = sigma.layout().len();
    let ms: Vec<usize> = match p.m {
        Some(m) => vec![m],
        None => (1..=p.n).collect(),
    };
    let mut o = Outcome::default();
    let mut rows = Vec::new();
    for m in ms {
        let first_m = lambda.clone().with_output(&(0..m * per).collect::<Vec<_>>())?;
        let red = verify_marginal_reduction(&first_m, &rho, &sigma, p.n, m)?;
        let (eps, delta) = (red.max_error(), red.delta());
        let bound = eps + 2.0 * delta;
        o.check(Check::at_most(format!("m={m}: catalytic error within eps + 2 delta"), cert.epsilon_achieved, bound + SLACK));
        rows.push(Row {
            m,
            eps,
            delta,
            epsilon_achieved: cert.epsilon_achieved,
            bound,
            refined_bound: red.catalysis_bound(),
            reduction: red,
        });
    }
    o.check(Check::below("catalyst drift", cert.catalyst_drift, 1e-9));
    o.result("n", p.n);
    o.result("certificate", cert);
    o.result("reductions", &rows);
    Ok(o)
}
