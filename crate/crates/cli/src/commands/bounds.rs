//! Hashing bounds on distillable entanglement and a searched upper bound on
//! squashed entanglement, with the consistency relations between them.

use serde::{Deserialize, Serialize};

use entcat_core::measures::{hashing_bounds, mutual_information, squashed_upper, EdBounds, SquashedSearch};
use entcat_core::qstate::entanglement_entropy;
use entcat_core::Bipartition;

use crate::error::{CliError, Result};
use crate::families::{Draw, StateSpec};
use crate::report::{Check, Outcome};
use crate::scenario::Scenario;

/// Agreement required between the searched bound and `S(A)` on pure states.
const PURE_TOL: f64 = 1e-6;
/// Largest value accepted for a separable state with a known decomposition.
const SEPARABLE_TOL: f64 = 1e-6;
/// Slack on `E_sq ≤ ½ I(A;B)` and on the hashing order.
const ORDER_SLACK: f64 = 1e-12;

fn budget() -> usize {
    SquashedSearch::default().budget
}
fn ext_dim() -> usize {
    SquashedSearch::default().max_ext_dim
}
fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    states: Vec<StateSpec>,
    /// Draws per random family entry.
    #[serde(default = "one")]
    instances: usize,
    #[serde(default = "budget")]
    budget: usize,
    #[serde(default = "ext_dim")]
    max_ext_dim: usize,
}

#[derive(Serialize)]
struct Row {
    state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    pure: bool,
    hashing: EdBounds,
    squashed_upper: f64,
    squashed_trivial: f64,
    half_mutual_information: f64,
    evaluations: usize,
    extension_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    entanglement_entropy: Option<f64>,
}

pub(super) fn run(scn: &Scenario) -> Result<Outcome> {
    let p: Params = scn.params()?;
    if p.states.is_empty() || p.instances == 0 {
        return Err(CliError::Scenario("need at least one state and one instance".into()));
    }
    let mut o = Outcome::default();
    let mut rows = Vec::new();
    let mut k = 0usize;
    for spec in &p.states {
        let reps = if spec.is_random() { p.instances } else { 1 };
        for _ in 0..reps {
            let draw = Draw::instance(scn.seed, k);
            k += 1;
            let r = spec.resolve(draw, &scn.base_dir)?;
            let s = &r.state;
            let cut = Bipartition::alice(s.layout());
            let hashing = hashing_bounds(s, &cut)?;
            let search = SquashedSearch {
                max_ext_dim: p.max_ext_dim,
                budget: p.budget,
                seed: draw.salted(3),
                hints: r.decomposition.iter().cloned().collect(),
            };
            let sq = squashed_upper(s, &search)?;
            let half_mi = 0.5 * mutual_information(s, &cut)?;
            let pure = s.is_pure();
            let ent = if pure { Some(entanglement_entropy(s, &cut)?) } else { None };

            o.check(Check::at_most(format!("{}: hashing lower <= upper", r.label), hashing.lower, hashing.upper + ORDER_SLACK));
            o.check(Check::at_most(format!("{}: squashed <= I(A;B)/2", r.label), sq.value, half_mi + ORDER_SLACK));
            if let Some(e) = ent {
                o.check(Check::at_most(format!("{}: squashed equals S(A)", r.label), (sq.value - e).abs(), PURE_TOL));
            }
            if r.decomposition.is_some() {
                o.check(Check::at_most(format!("{}: separable squashed vanishes", r.label), sq.value, SEPARABLE_TOL));
            }
            rows.push(Row {
                state: r.label,
                seed: r.seed,
                pure,
                hashing,
                squashed_upper: sq.value,
                squashed_trivial: sq.trivial_value,
                half_mutual_information: half_mi,
                evaluations: sq.evaluations,
                extension_dim: sq.extension_dim,
                entanglement_entropy: ent,
            });
        }
    }
    o.result("states", &rows);
    Ok(o)
}
