//! Named state families and protocol recipes usable from scenario files.

use std::path::PathBuf;

use nalgebra::DMatrix;
use serde::Deserialize;

use entcat_core::distill::WernerState;
use entcat_core::locc::{permute_factors, protocol_from_json, weyl};
use entcat_core::measures::FlaggedDecomposition;
use entcat_core::purecat::synthesize_pure_protocol;
use entcat_core::qstate::{
    haar_ket, random_state, random_unitary, read_state, rng_from_seed, schmidt_decompose, trace_norm_dist,
    Ensemble,
};
use entcat_core::{Bipartition, LoccProtocol, Party, QState, SchmidtVector, SystemLayout, C64};

use crate::error::{CliError, Result};

/// Random draws for the `i`-th instance of a scenario.
#[derive(Clone, Copy, Debug)]
pub struct Draw {
    pub seed: u64,
}

impl Draw {
    pub fn instance(base: u64, i: usize) -> Self {
        Draw { seed: base.wrapping_add(i as u64) }
    }

    /// Independent stream for a second random object of the same instance.
    pub fn salted(self, salt: u64) -> u64 {
        self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15)
    }
}

fn default_dims() -> [usize; 2] {
    [2, 2]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JpPart {
    #[default]
    Source,
    Target,
    Catalyst,
}

/// `(0.4, 0.4, 0.1, 0.1) → (0.5, 0.25, 0.25)` with catalyst `(0.6, 0.4)`.
pub fn jp_vector(part: JpPart) -> SchmidtVector {
    let p = match part {
        JpPart::Source => vec![0.4, 0.4, 0.1, 0.1],
        JpPart::Target => vec![0.5, 0.25, 0.25],
        JpPart::Catalyst => vec![0.6, 0.4],
    };
    SchmidtVector::new(p).expect("normalized")
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Werner {
        fidelity: f64,
    },
    Singlet,
    /// Haar-random pure state.
    Haar {
        #[serde(default = "default_dims")]
        dims: [usize; 2],
        seed: Option<u64>,
    },
    /// Full-rank Ginibre mixed state.
    Ginibre {
        #[serde(default = "default_dims")]
        dims: [usize; 2],
        seed: Option<u64>,
    },
    /// Canonical pure state `Σ √p_i |ii⟩`.
    Schmidt {
        coefficients: Vec<f64>,
    },
    JpExample {
        #[serde(default)]
        part: JpPart,
    },
    /// Mixture of random product pure states; the decomposition is known.
    Separable {
        terms: usize,
        #[serde(default = "default_dims")]
        dims: [usize; 2],
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Clone, Debug)]
pub struct Resolved {
    pub state: QState,
    pub label: String,
    /// Seed actually used, for random families.
    pub seed: Option<u64>,
    /// A flagged product decomposition, for separable states.
    pub decomposition: Option<FlaggedDecomposition>,
}

impl StateSpec {
    pub fn is_random(&self) -> bool {
        matches!(
            self,
            StateSpec::Haar { seed: None, .. } | StateSpec::Ginibre { seed: None, .. } | StateSpec::Separable { seed: None, .. }
        )
    }

    pub fn resolve(&self, draw: Draw, base_dir: &std::path::Path) -> Result<Resolved> {
        let plain = |state: QState, label: String| Resolved {
            state,
            label,
            seed: None,
            decomposition: None,
        };
        Ok(match self {
            StateSpec::Werner { fidelity } => {
                plain(WernerState::new(*fidelity)?.state(), format!("werner F={fidelity}"))
            }
            StateSpec::Singlet => plain(QState::singlet(), "singlet".into()),
            StateSpec::Haar { dims, seed } | StateSpec::Ginibre { dims, seed } => {
                let s = seed.unwrap_or(draw.seed);
                let layout = SystemLayout::bipartite(dims[0], dims[1])?;
                let (ens, name) = match self {
                    StateSpec::Haar { .. } => (Ensemble::HaarPure, "haar"),
                    _ => (Ensemble::GinibreMixed, "ginibre"),
                };
                Resolved {
                    state: random_state(&layout, ens, s),
                    label: format!("{name} {}x{} seed={s}", dims[0], dims[1]),
                    seed: Some(s),
                    decomposition: None,
                }
            }
            StateSpec::Schmidt { coefficients } => {
                let sv = SchmidtVector::normalized(coefficients.clone())?;
                plain(sv.canonical_state()?, format!("schmidt {:?}", sv.probs()))
            }
            StateSpec::JpExample { part } => {
                plain(jp_vector(*part).canonical_state()?, format!("jp-example {part:?}").to_lowercase())
            }
            StateSpec::Separable { terms, dims, seed } => {
                if *terms == 0 {
                    return Err(CliError::Scenario("separable family needs at least one term".into()));
                }
                let s = seed.unwrap_or(draw.seed);
                let mut rng = rng_from_seed(s);
                let layout = SystemLayout::bipartite(dims[0], dims[1])?;
                let kets: Vec<_> = (0..*terms)
                    .map(|_| (haar_ket(dims[0], &mut rng), haar_ket(dims[1], &mut rng)))
                    .collect();
                let raw: Vec<f64> = (0..*terms).map(|i| 1.0 + (i % 3) as f64).collect();
                let total: f64 = raw.iter().sum();
                let weights = raw.iter().map(|w| w / total).collect();
                let dec = FlaggedDecomposition::product_kets(&layout, weights, &kets)?;
                Resolved {
                    state: dec.mixture()?,
                    label: format!("separable {terms} terms seed={s}"),
                    seed: Some(s),
                    decomposition: Some(dec),
                }
            }
            StateSpec::File { path } => {
                let p = base_dir.join(path);
                let state = read_state(&p)?;
                plain(state, format!("file {}", path.display()))
            }
        })
    }
}

/// Schmidt coefficients of a pure bipartite state, cut between Alice and Bob.
pub fn schmidt_of(s: &QState) -> Result<SchmidtVector> {
    Ok(schmidt_decompose(s, &Bipartition::alice(s.layout()))?)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProtocolSpec {
    /// Leaves all `n` copies alone.
    Identity,
    /// Moves copy `k` to position `k + 1`, cyclically.
    Shift,
    /// [`ProtocolSpec::Shift`] followed by a random joint unitary on Alice's
    /// part of the first two copies and a random unitary on Bob's part of
    /// the first copy, so the output copies are correlated.
    Scramble { seed: Option<u64> },
    /// Per-copy pure-state conversion to `target`, followed by a weak
    /// Weyl-shift error on Bob's side with probability `noise`.
    Convert {
        target: Vec<f64>,
        #[serde(default)]
        noise: f64,
    },
    /// A protocol saved as JSON.
    File { path: PathBuf },
}

impl ProtocolSpec {
    /// The protocol acting on `n` copies of `rho`.
    pub fn build(&self, rho: &QState, n: usize, draw: Draw, base_dir: &std::path::Path) -> Result<LoccProtocol> {
        let per = rho.layout().len();
        let layout = rho.layout().repeat(n)?;
        let shift = || -> Result<LoccProtocol> {
            let perm: Vec<usize> = (0..n)
                .flat_map(|c| {
                    let src = (c + n - 1) % n;
                    (0..per).map(move |f| src * per + f)
                })
                .collect();
            Ok(permute_factors(&layout, &perm)?)
        };
        match self {
            ProtocolSpec::Identity => Ok(LoccProtocol::identity(layout)),
            ProtocolSpec::Shift => shift(),
            ProtocolSpec::Scramble { seed } => {
                let mut rng = rng_from_seed(seed.unwrap_or(draw.salted(1)));
                let mut p = shift()?;
                let span = n.min(2) * per;
                for party in [Party::ALICE, Party::BOB] {
                    let idx: Vec<usize> = layout
                        .indices_of(party)
                        .into_iter()
                        .filter(|&i| i < if party == Party::ALICE { span } else { per })
                        .collect();
                    if idx.is_empty() {
                        continue;
                    }
                    let d: usize = idx.iter().map(|&i| layout.factors()[i].dim).product();
                    p = p.local_unitary(party, &idx, random_unitary(d, &mut rng))?;
                }
                Ok(p)
            }
            ProtocolSpec::Convert { target, noise } => {
                if !(0.0..=1.0).contains(noise) {
                    return Err(CliError::Scenario(format!("noise must lie in [0, 1], got {noise}")));
                }
                let single = convert_protocol(rho, target, *noise)?;
                let mut p = LoccProtocol::identity(layout);
                for c in 0..n {
                    p = p.embed(&(c * per..(c + 1) * per).collect::<Vec<_>>(), single.clone())?;
                }
                Ok(p)
            }
            ProtocolSpec::File { path } => {
                let p = base_dir.join(path);
                let text = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
                let proto = protocol_from_json(&text)?;
                if !proto.input().same_profile(&layout) {
                    return Err(CliError::Scenario(format!(
                        "protocol {} acts on {}, expected {n} copies of {}",
                        path.display(),
                        proto.input(),
                        rho.layout()
                    )));
                }
                Ok(proto)
            }
        }
    }
}

/// Conversion of the canonical pure state `rho` into the canonical state of
/// `target` on the same `[A d, B d]` layout, with Bob-side noise.
fn convert_protocol(rho: &QState, target: &[f64], noise: f64) -> Result<LoccProtocol> {
    let dims = rho.layout().dims();
    let d = dims[0];
    if dims.len() != 2 || dims[1] != d || rho.layout().factors()[0].party != Party::ALICE {
        return Err(CliError::Scenario(format!(
            "`convert` needs a canonical [A d, B d] pure state, got layout {}",
            rho.layout()
        )));
    }
    let src = schmidt_of(rho)?;
    let tgt = SchmidtVector::normalized(target.to_vec())?;
    if tgt.len() > d || src.len() > d {
        return Err(CliError::Scenario(format!("target has more than {d} coefficients")));
    }
    let canonical = src.canonical_state_dim(d)?;
    if trace_norm_dist(&canonical, rho)? > 1e-9 {
        return Err(CliError::Scenario(
            "`convert` needs the state in canonical Schmidt form (use the schmidt or jp-example family)".into(),
        ));
    }
    let exact = synthesize_pure_protocol(&SchmidtVector::new(src.padded(d))?, &SchmidtVector::new(tgt.padded(d))?)?;
    if noise == 0.0 {
        return Ok(exact);
    }
    let kraus = vec![
        DMatrix::identity(d, d) * C64::new((1.0 - noise).sqrt(), 0.0),
        weyl(d, 1, 0) * C64::new(noise.sqrt(), 0.0),
    ];
    Ok(exact.local_ops(Party::BOB, &[1], kraus, &[d])?)
}

/// The canonical state of `target` on `rho`'s `[A d, B d]` layout.
pub fn canonical_target(rho: &QState, target: &[f64]) -> Result<QState> {
    let d = rho.layout().dims()[0];
    let tgt = SchmidtVector::normalized(target.to_vec())?;
    Ok(SchmidtVector::new(tgt.padded(d))?.canonical_state_dim(d)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn spec(text: &str) -> StateSpec {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn families_parse_and_resolve() {
        let d = Draw::instance(3, 0);
        let w = spec("family = \"werner\"\nfidelity = 0.8\n").resolve(d, Path::new(".")).unwrap();
        assert!((WernerState::singlet_fidelity(&w.state).unwrap() - 0.8).abs() < 1e-12);
        let h = spec("family = \"haar\"\n").resolve(d, Path::new(".")).unwrap();
        assert!(h.state.is_pure() && h.seed == Some(3));
        let s = spec("family = \"separable\"\nterms = 3\n").resolve(d, Path::new(".")).unwrap();
        assert_eq!(s.decomposition.unwrap().weights.len(), 3);
        let jp = spec("family = \"jp-example\"\npart = \"catalyst\"\n").resolve(d, Path::new(".")).unwrap();
        let sv = schmidt_of(&jp.state).unwrap();
        assert!((sv.probs()[0] - 0.6).abs() < 1e-12 && (sv.probs()[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn unknown_family_keys_are_rejected() {
        assert!(toml::from_str::<StateSpec>("family = \"werner\"\nfidelity = 0.8\nfoo = 1\n").is_err());
        assert!(toml::from_str::<StateSpec>("family = \"nope\"\n").is_err());
    }

    #[test]
    fn shift_moves_copies_cyclically() {
        let rho = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, 1);
        let other = random_state(&SystemLayout::two_qubits(), Ensemble::GinibreMixed, 2);
        let p = ProtocolSpec::Shift.build(&rho, 2, Draw::instance(0, 0), Path::new(".")).unwrap();
        let out = p.run(&rho.tensor(&other).unwrap()).unwrap();
        assert!(trace_norm_dist(&out, &other.tensor(&rho).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn convert_reaches_target_without_noise() {
        let rho = SchmidtVector::new(vec![0.6, 0.4]).unwrap().canonical_state().unwrap();
        let spec = ProtocolSpec::Convert { target: vec![0.8, 0.2], noise: 0.0 };
        let p = spec.build(&rho, 1, Draw::instance(0, 0), Path::new(".")).unwrap();
        let want = canonical_target(&rho, &[0.8, 0.2]).unwrap();
        assert!(trace_norm_dist(&p.run(&rho).unwrap(), &want).unwrap() < 1e-9);
    }
}
