//! Approximate catalysts delivered over noisy teleportation, and repeated
//! use of one approximate catalyst.

use serde::{Deserialize, Serialize};

use entcat_core::catfactory::{build_catalyst, iterate_reuse, verify_catalysis, ReuseOptions};
use entcat_core::distill::synthesize_tau_eps;
use entcat_core::QState;

use super::max_of;
use crate::error::{CliError, Result};
use crate::families::{Draw, ProtocolSpec, StateSpec};
use crate::report::{Check, Outcome, Series};
use crate::scenario::Scenario;

/// Float noise on the reuse bounds.
const REUSE_SLACK: f64 = 1e-9;
const BISECT_STEPS: usize = 60;

fn two() -> usize {
    2
}
fn five() -> usize {
    5
}
fn default_grid() -> Vec<f64> {
    (0..=14).map(|i| 0.3 + 0.05 * i as f64).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    /// Catalyst given directly; excludes `state` and `protocol`.
    tau: Option<StateSpec>,
    /// Source state and `n`-copy protocol the catalyst is built from.
    state: Option<StateSpec>,
    protocol: Option<ProtocolSpec>,
    #[serde(default = "two")]
    n: usize,
    #[serde(default = "default_grid")]
    fidelities: Vec<f64>,
    /// Catalyst errors to reach by tuning the resource fidelity, each then
    /// reused over `copies` conversions.
    #[serde(default)]
    eps_targets: Vec<f64>,
    #[serde(default = "five")]
    copies: usize,
}

#[derive(Serialize)]
struct GridPoint {
    fidelity: f64,
    eps: f64,
}

#[derive(Serialize)]
struct ReuseRow {
    eps_target: f64,
    resource_fidelity: f64,
    eps: f64,
    delta: f64,
    drifts: Vec<f64>,
    marginal_errors: Vec<f64>,
}

/// Smallest-error-below-`target` catalyst by bisection on the resource
/// fidelity; the error is non-increasing in the fidelity.
fn tune(tau: &QState, target: f64) -> Result<(f64, QState, f64)> {
    let (mut lo, mut hi) = (0.25f64, 1.0f64);
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if synthesize_tau_eps(tau, mid)?.1 > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (t, e) = synthesize_tau_eps(tau, hi)?;
    Ok((hi, t, e))
}

pub(super) fn run(scn: &Scenario) -> Result<Outcome> {
    let p: Params = scn.params()?;
    let draw = Draw::instance(scn.seed, 0);
    let built = match (&p.tau, &p.state, &p.protocol) {
        (Some(t), None, None) => {
            if !p.eps_targets.is_empty() {
                return Err(CliError::Scenario("eps_targets needs a catalyst built from state and protocol".into()));
            }
            (t.resolve(draw, &scn.base_dir)?.state, None)
        }
        (None, Some(s), Some(proto)) => {
            let rho = s.resolve(draw, &scn.base_dir)?.state;
            let lambda = proto.build(&rho, p.n, draw, &scn.base_dir)?;
            let asm = build_catalyst(&lambda, &rho, p.n)?;
            (asm.tau.clone(), Some((rho, asm)))
        }
        _ => return Err(CliError::Scenario("give either `tau`, or both `state` and `protocol`".into())),
    };
    let (tau, assembly) = built;
    if p.fidelities.iter().any(|f| !(*f > 0.25 && *f <= 1.0)) {
        return Err(CliError::Scenario("fidelities must lie in (1/4, 1]".into()));
    }

    let mut o = Outcome::default();
    let mut grid = Vec::new();
    let mut sorted = p.fidelities.clone();
    sorted.sort_by(f64::total_cmp);
    for &f in &sorted {
        grid.push(GridPoint {
            fidelity: f,
            eps: synthesize_tau_eps(&tau, f)?.1,
        });
    }
    let monotone = grid.windows(2).all(|w| w[1].eps <= w[0].eps + 1e-12);
    o.check(Check::holds("catalyst error non-increasing in resource fidelity", monotone));
    if let Some(g) = grid.iter().find(|g| g.fidelity == 1.0) {
        o.check(Check::at_most("perfect resource gives the exact catalyst", g.eps, 1e-12));
    }
    o.result("catalyst_dim", tau.dim());
    o.result("grid", &grid);

    if let Some((rho, asm)) = assembly {
        let sigma = asm.expected_output()?;
        let delta = verify_catalysis(&asm.embedding, &asm.tau, &rho, &sigma)?.epsilon_achieved;
        let mut series = Series::new(&["eps_target", "step", "drift", "marginal_error"]);
        let mut rows = Vec::new();
        for &target in &p.eps_targets {
            if !(target > 0.0 && target < 2.0) {
                return Err(CliError::Scenario(format!("eps target {target} outside (0, 2)")));
            }
            let (f, tau_eps, _) = tune(&asm.tau, target)?;
            let out = iterate_reuse(&asm.embedding, &tau_eps, &asm.tau, &rho, &sigma, p.copies, ReuseOptions::default())?;
            let eps = out.initial_eps;
            let errs = out.certificate.per_marginal_errors.clone();
            o.check(Check::below(format!("eps={target}: drift after every step"), out.max_drift(), eps + REUSE_SLACK));
            o.check(Check::below(
                format!("eps={target}: every output marginal"),
                max_of(errs.iter().copied()),
                eps + delta + REUSE_SLACK,
            ));
            for (i, (d, e)) in out.drifts.iter().zip(&errs).enumerate() {
                series.push(vec![target, (i + 1) as f64, *d, *e]);
            }
            rows.push(ReuseRow {
                eps_target: target,
                resource_fidelity: f,
                eps,
                delta,
                drifts: out.drifts,
                marginal_errors: errs,
            });
        }
        if !rows.is_empty() {
            o.result("reuse", &rows);
            o.series.insert("reuse_drift".into(), series);
        }
    }
    Ok(o)
}
