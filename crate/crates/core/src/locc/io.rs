//! JSON form of a protocol tree.
//!
//! ```json
//! { "format": "entcat-protocol v1",
//!   "protocol": { "input": [{"party": 0, "dim": 2}, ...],
//!                 "steps": [ {"kind": "round", "party": 0, "targets": [0],
//!                             "output_dims": [2],
//!                             "outcomes": [{"label": "0", "kraus": [
//!                                 {"rows": 2, "cols": 2, "entries": "<re> <im>\n..."}]}],
//!                             "branches": [ <protocol>, ... ]},
//!                            {"kind": "embedded", "targets": [...], "protocol": <protocol>},
//!                            {"kind": "discard", "factors": [...]},
//!                            {"kind": "reorder", "perm": [...]} ] } }
//! ```
//!
//! Matrix entries use the row-major text body of the state file format.
//! Loading rebuilds the tree through the checked builder, so a document
//! describing a non-local round is rejected.

use serde::{Deserialize, Serialize};

use crate::qstate::{matrix_from_text, matrix_to_text, Factor, Party, SystemLayout};
use crate::{CMatrix, Error, Result};

use super::{LoccProtocol, Step};

pub const PROTOCOL_FORMAT: &str = "entcat-protocol v1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    protocol: ProtocolDto,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtocolDto {
    input: Vec<Factor>,
    steps: Vec<StepDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum StepDto {
    Round {
        party: u8,
        targets: Vec<usize>,
        output_dims: Vec<usize>,
        outcomes: Vec<OutcomeDto>,
        #[serde(default)]
        branches: Vec<ProtocolDto>,
    },
    Embedded {
        targets: Vec<usize>,
        protocol: Box<ProtocolDto>,
    },
    Discard {
        factors: Vec<usize>,
    },
    Reorder {
        perm: Vec<usize>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeDto {
    label: String,
    kraus: Vec<MatrixDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDto {
    rows: usize,
    cols: usize,
    entries: String,
}

impl From<&CMatrix> for MatrixDto {
    fn from(m: &CMatrix) -> Self {
        MatrixDto {
            rows: m.nrows(),
            cols: m.ncols(),
            entries: matrix_to_text(m),
        }
    }
}

fn to_dto(p: &LoccProtocol) -> ProtocolDto {
    let steps = p
        .steps()
        .iter()
        .map(|s| match s {
            Step::Round(r) => StepDto::Round {
                party: r.party().0,
                targets: r.targets().to_vec(),
                output_dims: r.instrument().output().dims(),
                outcomes: r
                    .instrument()
                    .outcomes()
                    .iter()
                    .map(|(label, ch)| OutcomeDto {
                        label: label.clone(),
                        kraus: ch.kraus().iter().map(MatrixDto::from).collect(),
                    })
                    .collect(),
                branches: r.branches().iter().map(to_dto).collect(),
            },
            Step::Embedded { targets, protocol } => StepDto::Embedded {
                targets: targets.clone(),
                protocol: Box::new(to_dto(protocol)),
            },
            Step::Discard(f) => StepDto::Discard { factors: f.clone() },
            Step::Reorder(p) => StepDto::Reorder { perm: p.clone() },
        })
        .collect();
    ProtocolDto {
        input: p.input().factors().to_vec(),
        steps,
    }
}

fn from_dto(d: ProtocolDto) -> Result<LoccProtocol> {
    let mut p = LoccProtocol::identity(SystemLayout::new(d.input)?);
    for s in d.steps {
        p = match s {
            StepDto::Round {
                party,
                targets,
                output_dims,
                outcomes,
                branches,
            } => {
                let outs = outcomes
                    .into_iter()
                    .map(|o| {
                        let ks = o
                            .kraus
                            .into_iter()
                            .map(|m| matrix_from_text(m.rows, m.cols, &m.entries))
                            .collect::<Result<Vec<_>>>()?;
                        Ok((o.label, ks))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let branches = branches.into_iter().map(from_dto).collect::<Result<Vec<_>>>()?;
                p.measure(Party(party), &targets, outs, &output_dims, branches)?
            }
            StepDto::Embedded { targets, protocol } => p.embed(&targets, from_dto(*protocol)?)?,
            StepDto::Discard { factors } => p.discard(&factors)?,
            StepDto::Reorder { perm } => p.reorder(&perm)?,
        };
    }
    Ok(p)
}

pub fn protocol_to_json(p: &LoccProtocol) -> String {
    let doc = Document {
        format: PROTOCOL_FORMAT.to_string(),
        protocol: to_dto(p),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn protocol_from_json(s: &str) -> Result<LoccProtocol> {
    let doc: Document = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.format != PROTOCOL_FORMAT {
        return Err(Error::Parse(format!("unknown protocol format `{}`", doc.format)));
    }
    from_dto(doc.protocol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locc::teleportation_protocol;
    use crate::qstate::QState;

    #[test]
    fn json_round_trip() {
        let p = teleportation_protocol(&QState::singlet()).unwrap();
        let back = protocol_from_json(&protocol_to_json(&p)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn nonlocal_document_is_rejected() {
        let p = teleportation_protocol(&QState::singlet()).unwrap();
        // Alice's Bell measurement relabelled as acting on Bob's factor
        let json = protocol_to_json(&p).replacen("\"targets\": [\n          0,\n          1\n        ]", "\"targets\": [\n          0,\n          2\n        ]", 1);
        assert_ne!(json, protocol_to_json(&p));
        assert!(protocol_from_json(&json).is_err());
    }
}
