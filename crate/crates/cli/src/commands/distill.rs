//! Recurrence distillation: closed form against the simulated two-copy
//! protocol on a grid, plus an optional target run.

use serde::{Deserialize, Serialize};

use entcat_core::distill::{
    distill_to, monte_carlo_copies, recurrence_step, recurrence_step_simulated, DistillRun, WernerState,
};

use super::max_of;
use crate::error::{CliError, Result};
use crate::report::{Check, Outcome, Series};
use crate::scenario::Scenario;

const ORACLE_TOL: f64 = 1e-10;

fn fifty() -> usize {
    50
}
fn f_min() -> f64 {
    0.25
}
fn f_max() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    #[serde(default = "fifty")]
    grid_points: usize,
    #[serde(default = "f_min")]
    f_min: f64,
    #[serde(default = "f_max")]
    f_max: f64,
    /// Extra fidelities evaluated by simulation and reported individually.
    #[serde(default)]
    probes: Vec<f64>,
    f_initial: Option<f64>,
    f_target: Option<f64>,
    /// Monte Carlo trials for the copy count of the target run.
    trials: Option<usize>,
}

#[derive(Serialize)]
struct Probe {
    f_in: f64,
    f_out_closed_form: f64,
    f_out_simulated: f64,
    p_closed_form: f64,
    p_simulated: f64,
}

fn probe(f: f64) -> Result<Probe> {
    let (state, p_sim) = recurrence_step_simulated(f)?;
    let (f_out, p) = recurrence_step(f)?;
    Ok(Probe {
        f_in: f,
        f_out_closed_form: f_out,
        f_out_simulated: WernerState::singlet_fidelity(&state)?,
        p_closed_form: p,
        p_simulated: p_sim,
    })
}

pub(super) fn run(scn: &Scenario) -> Result<Outcome> {
    let p: Params = scn.params()?;
    if p.grid_points < 2 || !(0.25..=1.0).contains(&p.f_min) || !(p.f_min..=1.0).contains(&p.f_max) {
        return Err(CliError::Scenario(format!(
            "need grid_points >= 2 and 1/4 <= f_min <= f_max <= 1, got {} points on [{}, {}]",
            p.grid_points, p.f_min, p.f_max
        )));
    }
    let mut o = Outcome::default();
    let mut sweep = Series::new(&["f_in", "f_out", "p", "expected_copies"]);
    let mut oracle = Series::new(&["f_in", "f_out_closed_form", "f_out_simulated", "p_closed_form", "p_simulated"]);
    let mut worst_f = 0.0f64;
    let mut worst_p = 0.0f64;
    let mut improves = true;
    for i in 0..p.grid_points {
        let f = p.f_min + (p.f_max - p.f_min) * i as f64 / (p.grid_points - 1) as f64;
        let r = probe(f)?;
        worst_f = worst_f.max((r.f_out_closed_form - r.f_out_simulated).abs());
        worst_p = worst_p.max((r.p_closed_form - r.p_simulated).abs());
        if f > 0.5 && f < 1.0 && r.f_out_closed_form <= f {
            improves = false;
        }
        sweep.push(vec![f, r.f_out_closed_form, r.p_closed_form, 2.0 / r.p_closed_form]);
        oracle.push(vec![f, r.f_out_closed_form, r.f_out_simulated, r.p_closed_form, r.p_simulated]);
    }
    o.check(Check::at_most("closed-form fidelity matches simulation", worst_f, ORACLE_TOL));
    o.check(Check::at_most("closed-form success probability matches simulation", worst_p, ORACLE_TOL));
    o.check(Check::holds("rounds improve fidelity above 1/2", improves));
    o.series.insert("distill_sweep".into(), sweep);
    o.series.insert("recurrence_oracle".into(), oracle);

    let probes = p.probes.iter().map(|&f| probe(f)).collect::<Result<Vec<_>>>()?;
    if !probes.is_empty() {
        let worst = max_of(probes.iter().map(|r| (r.f_out_closed_form - r.f_out_simulated).abs()));
        o.check(Check::at_most("probe fidelities match simulation", worst, ORACLE_TOL));
        o.result("probes", &probes);
    }

    match (p.f_initial, p.f_target) {
        (Some(a), Some(b)) => {
            let run: DistillRun = distill_to(b, a)?;
            o.check(Check::at_most("target reached", b, run.final_fidelity));
            o.check(Check::holds(
                "every round improves",
                run.rounds.iter().all(|r| r.fidelity_after > r.fidelity_before),
            ));
            if let Some(t) = p.trials {
                let mc = monte_carlo_copies(&run, t, scn.seed)?;
                o.result("monte_carlo_copies", mc);
            }
            o.result("run", run);
        }
        (None, None) => {}
        _ => return Err(CliError::Scenario("f_initial and f_target go together".into())),
    }
    Ok(o)
}
