//! Pure-state conversions: majorization with and without a catalyst, the
//! explicit protocols when they exist, and the asymptotic rate.

use serde::{Deserialize, Serialize};

use entcat_core::measures::{rate_bound_report, RateBoundReport, SquashedSearch};
use entcat_core::purecat::{catalytic_convertible, majorizes, pure_target_rate, synthesize_pure_protocol, MajorizationReport, RateInterval};
use entcat_core::qstate::fidelity;
use entcat_core::{QState, SchmidtVector};

use crate::error::{CliError, Result};
use crate::families::{schmidt_of, Draw, StateSpec};
use crate::report::{Check, Outcome};
use crate::scenario::Scenario;

const RATE_TOL: f64 = 1e-6;
const PROTOCOL_TOL: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    source: StateSpec,
    target: StateSpec,
    catalyst: Option<StateSpec>,
    /// Expected answer without a catalyst, when asserted.
    expect_convertible: Option<bool>,
    /// Expected answer with the catalyst, when asserted.
    expect_catalytic: Option<bool>,
}

#[derive(Serialize)]
struct Conversion {
    majorization: MajorizationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    protocol_fidelity: Option<f64>,
}

/// Majorization test, and when it passes the synthesized protocol's output
/// fidelity with the target.
fn convert(src: &SchmidtVector, tgt: &SchmidtVector) -> Result<Conversion> {
    let majorization = majorizes(tgt, src);
    let protocol_fidelity = if majorization.convertible {
        let d = src.len().max(tgt.len());
        let proto = synthesize_pure_protocol(src, tgt)?;
        let out = proto.run(&src.canonical_state_dim(d)?)?;
        Some(fidelity(&out, &tgt.canonical_state_dim(d)?)?)
    } else {
        None
    };
    Ok(Conversion {
        majorization,
        protocol_fidelity,
    })
}

fn pure_schmidt(s: &QState, role: &str) -> Result<SchmidtVector> {
    if !s.is_pure() {
        return Err(CliError::Scenario(format!("{role} must be a pure state")));
    }
    schmidt_of(s)
}

pub(super) fn run(scn: &Scenario) -> Result<Outcome> {
    let p: Params = scn.params()?;
    let draw = Draw::instance(scn.seed, 0);
    let rho = p.source.resolve(draw, &scn.base_dir)?.state;
    let sigma = p.target.resolve(Draw::instance(scn.seed, 1), &scn.base_dir)?.state;
    let src = pure_schmidt(&rho, "source")?;
    let tgt = pure_schmidt(&sigma, "target")?;

    let mut o = Outcome::default();
    let plain = convert(&src, &tgt)?;
    if let Some(want) = p.expect_convertible {
        o.check(Check::holds(
            format!("convertible without catalyst is {want}"),
            plain.majorization.convertible == want,
        ));
    }
    if let Some(f) = plain.protocol_fidelity {
        o.check(Check::at_most("protocol reaches the target", 1.0 - f, PROTOCOL_TOL));
    }

    if let Some(c) = &p.catalyst {
        let cat = pure_schmidt(&c.resolve(Draw::instance(scn.seed, 2), &scn.base_dir)?.state, "catalyst")?;
        let rep = catalytic_convertible(&src, &tgt, &cat);
        if let Some(want) = p.expect_catalytic {
            o.check(Check::holds(format!("convertible with catalyst is {want}"), rep.convertible == want));
        }
        let with = convert(&src.tensor(&cat), &tgt.tensor(&cat))?;
        if let Some(f) = with.protocol_fidelity {
            o.check(Check::at_most("catalytic protocol reaches target and returns catalyst", 1.0 - f, PROTOCOL_TOL));
        }
        o.result("catalytic", with);
    } else if p.expect_catalytic.is_some() {
        return Err(CliError::Scenario("expect_catalytic needs a catalyst".into()));
    }
    o.result("plain", plain);

    let (e_rho, e_sigma) = (src.entropy(), tgt.entropy());
    o.result("entropy_source", e_rho);
    o.result("entropy_target", e_sigma);
    if e_sigma > 1e-12 {
        let interval: RateInterval = pure_target_rate(&rho, &tgt)?;
        let report: RateBoundReport = rate_bound_report(&rho, &sigma, &SquashedSearch { seed: draw.seed, ..Default::default() })?;
        let exact = e_rho / e_sigma;
        o.check(Check::at_most("rate ratio equals entropy ratio", (report.ratio_upper - exact).abs(), RATE_TOL));
        o.check(Check::at_most("asymptotic rate is exact", (interval.upper - interval.lower).abs(), RATE_TOL));
        o.check(Check::at_most("asymptotic rate equals entropy ratio", (interval.lower - exact).abs(), RATE_TOL));
        o.result("rate", interval);
        o.result("rate_report", report);
    }
    Ok(o)
}
