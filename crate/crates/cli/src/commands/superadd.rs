//! Composition of two near-exact protocols on a correlated joint state,
//! with an over-budget negative control.

use serde::{Deserialize, Serialize};

use entcat_core::measures::{compose_superadditive, over_budget_instance, superadditive_desk_instance, SuperadditiveReport};
use entcat_core::Error;

use crate::error::{CliError, Result};
use crate::families::Draw;
use crate::report::{Check, Outcome};
use crate::scenario::Scenario;

fn default_eps() -> Vec<f64> {
    vec![0.1, 0.3, 0.5, 0.9]
}
fn five() -> usize {
    5
}
fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    #[serde(default = "default_eps")]
    eps: Vec<f64>,
    /// Instances per value of `eps`.
    #[serde(default = "five")]
    instances: usize,
    #[serde(default = "yes")]
    negative_control: bool,
}

#[derive(Serialize)]
struct Row {
    seed: u64,
    q: f64,
    report: SuperadditiveReport,
}

pub(super) fn run(scn: &Scenario) -> Result<Outcome> {
    let p: Params = scn.params()?;
    if p.eps.is_empty() || p.instances == 0 {
        return Err(CliError::Scenario("need at least one eps and one instance".into()));
    }
    let mut o = Outcome::default();
    let mut rows = Vec::new();
    let mut k = 0usize;
    for &eps in &p.eps {
        for _ in 0..p.instances {
            let draw = Draw::instance(scn.seed, k);
            k += 1;
            let d = superadditive_desk_instance(eps, draw.seed)?;
            let r = compose_superadditive(&d.lambda1, &d.lambda2, &d.mu12, d.s1_len, &d.phi, eps)?;
            let budget = eps * eps / 100.0;
            o.check(Check::below(
                format!("eps={eps} seed={}: side errors within budget", draw.seed),
                r.side_errors[0].max(r.side_errors[1]),
                budget,
            ));
            o.check(Check::below(format!("eps={eps} seed={}: combined error", draw.seed), r.combined, eps));
            o.check(Check::holds(format!("eps={eps} seed={}: composition chain", draw.seed), r.passed));
            rows.push(Row {
                seed: draw.seed,
                q: d.q,
                report: r,
            });
        }
    }
    o.result("instances", &rows);

    if p.negative_control {
        let eps = p.eps[0];
        let bad = over_budget_instance(eps, scn.seed)?;
        let r = compose_superadditive(&bad.lambda1, &bad.lambda2, &bad.mu12, bad.s1_len, &bad.phi, eps);
        let rejected = matches!(r, Err(Error::Precondition(_)));
        o.check(Check::holds("over-budget instance is rejected", rejected));
        o.result("negative_control_rejected", rejected);
    }
    Ok(o)
}
