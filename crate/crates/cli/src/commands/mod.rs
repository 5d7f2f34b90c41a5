//! One module per scenario command. Each turns a [`Scenario`] into an
//! [`Outcome`]; [`execute`] wraps it into a [`Report`].

mod bounds;
mod catalyze;
mod distill;
mod lemma1;
mod pure_rate;
mod reduce;
mod superadd;
mod synth;

use crate::error::Result;
use crate::report::{Outcome, Report};
use crate::scenario::{Command, Scenario};

pub fn execute(scn: &Scenario) -> Result<Report> {
    log::info!("running {} (seed {})", scn.command, scn.seed);
    let outcome: Outcome = match scn.command {
        Command::Catalyze => catalyze::run(scn)?,
        Command::Reduce => reduce::run(scn)?,
        Command::VerifyLemma1 => lemma1::run(scn)?,
        Command::Bounds => bounds::run(scn)?,
        Command::Superadd => superadd::run(scn)?,
        Command::Distill => distill::run(scn)?,
        Command::SynthCatalyst => synth::run(scn)?,
        Command::PureRate => pure_rate::run(scn)?,
    };
    Ok(Report::new(scn.command.name(), scn.seed, scn.echo(), outcome))
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}
