use crate::qstate::SystemLayout;
use crate::{CMatrix, Error, Result};

use super::{Channel, COMPLETENESS_TOL};

/// Labelled trace-non-increasing maps whose sum is trace preserving.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    input: SystemLayout,
    output: SystemLayout,
    outcomes: Vec<(String, Channel)>,
}

impl Instrument {
    pub fn new(outcomes: Vec<(String, Channel)>) -> Result<Self> {
        let (_, first) = outcomes
            .first()
            .ok_or_else(|| Error::InvalidChannel("instrument without outcomes".into()))?;
        let input = first.input().clone();
        let output = first.output().clone();
        for (label, ch) in &outcomes {
            if !ch.input().same_profile(&input) || !ch.output().same_profile(&output) {
                return Err(Error::LayoutMismatch(format!(
                    "outcome `{label}` acts on different layouts"
                )));
            }
        }
        let parts: Vec<Channel> = outcomes.iter().map(|(_, c)| c.clone()).collect();
        let err = Channel::sum(&parts)?.completeness_error();
        if err > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "instrument is not trace preserving (deviation {err:e})"
            )));
        }
        Ok(Instrument {
            input,
            output,
            outcomes,
        })
    }

    /// Builds each outcome from raw Kraus operators.
    pub fn from_kraus(
        input: SystemLayout,
        output: SystemLayout,
        outcomes: Vec<(String, Vec<CMatrix>)>,
    ) -> Result<Self> {
        let outs = outcomes
            .into_iter()
            .map(|(l, ks)| Ok((l, Channel::partial(input.clone(), output.clone(), ks)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(outs)
    }

    /// Single-outcome instrument.
    pub fn deterministic(ch: Channel) -> Result<Self> {
        Self::new(vec![(String::new(), ch)])
    }

    pub fn input(&self) -> &SystemLayout {
        &self.input
    }

    pub fn output(&self) -> &SystemLayout {
        &self.output
    }

    pub fn outcomes(&self) -> &[(String, Channel)] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Channel obtained by forgetting the outcome.
    pub fn total(&self) -> Channel {
        let kraus = self
            .outcomes
            .iter()
            .flat_map(|(_, c)| c.kraus().iter().cloned())
            .collect();
        Channel::from_parts_unchecked(self.input.clone(), self.output.clone(), kraus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::unit;
    use crate::qstate::Party;

    #[test]
    fn computational_measurement() {
        let l = SystemLayout::single(Party::ALICE, 2).unwrap();
        let inst = Instrument::from_kraus(
            l.clone(),
            l.clone(),
            vec![("0".into(), vec![unit(2, 0, 0)]), ("1".into(), vec![unit(2, 1, 1)])],
        )
        .unwrap();
        assert_eq!(inst.len(), 2);
        assert!(inst.total().completeness_error() < 1e-15);
        let incomplete = Instrument::from_kraus(l.clone(), l, vec![("0".into(), vec![unit(2, 0, 0)])]);
        assert!(incomplete.is_err());
    }
}
