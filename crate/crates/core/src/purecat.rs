//! Pure-state conversions: Nielsen majorization, catalytic majorization and
//! explicit LOCC protocols for convertible pairs.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::locc::LoccProtocol;
use crate::measures::hashing_bounds;
use crate::qstate::linalg::c;
use crate::qstate::{Bipartition, Party, QState, SchmidtVector, SystemLayout};
use crate::{CMatrix, Error, Result};

/// Slack on partial-sum comparisons.
pub const MAJORIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorizationReport {
    pub convertible: bool,
    /// First `k` (1-based) with `Σ_{i≤k} target_i < Σ_{i≤k} source_i`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violated_index: Option<usize>,
    pub target_partial_sums: Vec<f64>,
    pub source_partial_sums: Vec<f64>,
}

fn partial_sums(p: &[f64]) -> Vec<f64> {
    p.iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Whether `source → target` is possible by LOCC, i.e. `target` majorizes
/// `source` after zero padding.
pub fn majorizes(target: &SchmidtVector, source: &SchmidtVector) -> MajorizationReport {
    let d = target.len().max(source.len());
    let ts = partial_sums(&target.padded(d));
    let ss = partial_sums(&source.padded(d));
    let violated_index = ts
        .iter()
        .zip(&ss)
        .position(|(t, s)| *t < *s - MAJORIZATION_TOL)
        .map(|k| k + 1);
    MajorizationReport {
        convertible: violated_index.is_none(),
        violated_index,
        target_partial_sums: ts,
        source_partial_sums: ss,
    }
}

/// Majorization test for `source ⊗ catalyst → target ⊗ catalyst`.
pub fn catalytic_convertible(
    source: &SchmidtVector,
    target: &SchmidtVector,
    catalyst: &SchmidtVector,
) -> MajorizationReport {
    majorizes(&target.tensor(catalyst), &source.tensor(catalyst))
}

/// Chain `a = c_0, c_1, …, c_m = b` where each `c_{i-1}` is the mixture
/// `t c_i + (1-t) Q c_i` for a transposition `Q = (j k)`.
/// Entries are `(c_{i-1}, c_i, t, j, k)`.
#[allow(clippy::type_complexity)]
fn t_chain(a: &[f64], b: &[f64]) -> Vec<(Vec<f64>, Vec<f64>, f64, usize, usize)> {
    let d = a.len();
    let mut cur = b.to_vec();
    let mut steps = Vec::new();
    for _ in 0..(2 * d + 2) {
        let Some(j) = (0..d).rev().find(|&i| cur[i] > a[i] + MAJORIZATION_TOL) else {
            break;
        };
        let Some(k) = (j + 1..d).find(|&i| cur[i] < a[i] - MAJORIZATION_TOL) else {
            break;
        };
        let up = cur[j] - a[j];
        let down = a[k] - cur[k];
        let delta = up.min(down);
        let t = 1.0 - delta / (cur[j] - cur[k]);
        let mut prev = cur.clone();
        prev[j] = cur[j] - delta;
        prev[k] = cur[k] + delta;
        if up <= down {
            prev[j] = a[j];
        }
        if down <= up {
            prev[k] = a[k];
        }
        steps.push((prev.clone(), cur, t, j, k));
        cur = prev;
    }
    steps.reverse();
    steps
}

fn transposition(d: usize, j: usize, k: usize) -> CMatrix {
    let mut q = DMatrix::identity(d, d);
    q[(j, j)] = c(0.0);
    q[(k, k)] = c(0.0);
    q[(j, k)] = c(1.0);
    q[(k, j)] = c(1.0);
    q
}

/// LOCC protocol on `[A d, B d]` (`d` the longer vector length) taking
/// `Σ √source_i |ii⟩` to `Σ √target_i |ii⟩`.
///
/// Built from two-outcome measurements by Alice: each one realizes a single
/// T-transform, and on the "swapped" outcome both parties permute their
/// basis back.
pub fn synthesize_pure_protocol(source: &SchmidtVector, target: &SchmidtVector) -> Result<LoccProtocol> {
    let rep = majorizes(target, source);
    if let Some(k) = rep.violated_index {
        return Err(Error::NotConvertible {
            index: k,
            target_sum: rep.target_partial_sums[k - 1],
            source_sum: rep.source_partial_sums[k - 1],
        });
    }
    let d = target.len().max(source.len());
    let layout = SystemLayout::bipartite(d, d)?;
    let a = source.padded(d);
    let b = target.padded(d);
    let mut proto = LoccProtocol::identity(layout.clone());
    for (prev, next, t, j, k) in t_chain(&a, &b) {
        if t >= 1.0 - 1e-15 {
            continue;
        }
        let q = transposition(d, j, k);
        let qnext: Vec<f64> = (0..d)
            .map(|i| if i == j { next[k] } else if i == k { next[j] } else { next[i] })
            .collect();
        let mut m0 = DMatrix::zeros(d, d);
        let mut m1 = DMatrix::zeros(d, d);
        for i in 0..d {
            if prev[i] > 0.0 {
                m0[(i, i)] = c((t * next[i] / prev[i]).sqrt());
                m1[(i, i)] = c(((1.0 - t) * qnext[i] / prev[i]).sqrt());
            } else {
                m0[(i, i)] = c(1.0);
            }
        }
        let fix = LoccProtocol::identity(layout.clone())
            .local_unitary(Party::ALICE, &[0], q.clone())?
            .local_unitary(Party::BOB, &[1], q)?;
        proto = proto.measure(
            Party::ALICE,
            &[0],
            vec![("keep".into(), vec![m0]), ("swap".into(), vec![m1])],
            &[d],
            vec![LoccProtocol::identity(layout.clone()), fix],
        )?;
    }
    Ok(proto)
}

/// Canonical pure state of `s` on `[A d, B d]`.
pub fn canonical_state(s: &SchmidtVector, d: usize) -> Result<QState> {
    s.canonical_state_dim(d)
}

/// Bounds on `E_d(ρ) / S(φ^A)` from the hashing sandwich.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateInterval {
    pub lower: f64,
    pub upper: f64,
    /// Lower and upper coincide because `ρ` is pure.
    pub exact: bool,
}

/// Asymptotic rate interval for `ρ → φ` with pure target `φ`. A target
/// with no entanglement makes the rate infinite, reported as
/// [`Error::Divergent`].
pub fn pure_target_rate(rho: &QState, phi: &SchmidtVector) -> Result<RateInterval> {
    let s_phi = phi.entropy();
    if s_phi <= 1e-12 {
        return Err(Error::Divergent("target has no entanglement; the rate is unbounded".into()));
    }
    let cut = Bipartition::alice(rho.layout());
    let exact = rho.is_pure();
    let (lower, upper) = if exact {
        let e = crate::qstate::entanglement_entropy(rho, &cut)?;
        (e, e)
    } else {
        let b = hashing_bounds(rho, &cut)?;
        (b.lower, b.upper)
    };
    Ok(RateInterval {
        lower: lower / s_phi,
        upper: upper / s_phi,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::fidelity;

    fn sv(p: &[f64]) -> SchmidtVector {
        SchmidtVector::new(p.to_vec()).unwrap()
    }

    #[test]
    fn product_majorizes_everything() {
        assert!(majorizes(&sv(&[1.0]), &sv(&[0.5, 0.5])).convertible);
        assert!(!majorizes(&sv(&[0.5, 0.5]), &sv(&[1.0])).convertible);
    }

    #[test]
    fn jonathan_plenio_pair_needs_a_catalyst() {
        let src = sv(&[0.4, 0.4, 0.1, 0.1]);
        let tgt = sv(&[0.5, 0.25, 0.25]);
        let r = majorizes(&tgt, &src);
        assert!(!r.convertible);
        assert_eq!(r.violated_index, Some(2));
        assert!((r.target_partial_sums[1] - 0.75).abs() < 1e-15);
        assert!((r.source_partial_sums[1] - 0.8).abs() < 1e-15);
        assert!(catalytic_convertible(&src, &tgt, &sv(&[0.6, 0.4])).convertible);
        let trivial = catalytic_convertible(&src, &tgt, &sv(&[1.0]));
        assert_eq!(trivial.convertible, r.convertible);
    }

    #[test]
    fn non_convertible_synthesis_fails() {
        let e = synthesize_pure_protocol(&sv(&[0.8, 0.2]), &sv(&[0.7, 0.3]));
        assert!(matches!(e, Err(Error::NotConvertible { index: 1, .. })));
    }

    fn check_protocol(src: &[f64], tgt: &[f64]) {
        let (s, t) = (sv(src), sv(tgt));
        let p = synthesize_pure_protocol(&s, &t).unwrap();
        let d = src.len().max(tgt.len());
        let out = p.run(&s.canonical_state_dim(d).unwrap()).unwrap();
        let want = t.canonical_state_dim(d).unwrap();
        let f = fidelity(&out, &want).unwrap();
        assert!(f >= 1.0 - 1e-8, "fidelity {f} for {src:?} -> {tgt:?}");
        assert!(p.flatten().unwrap().completeness_error() < 1e-9);
    }

    #[test]
    fn synthesized_protocols_reach_their_targets() {
        check_protocol(&[0.5, 0.5], &[1.0]);
        check_protocol(&[0.5, 0.5], &[0.75, 0.25]);
        check_protocol(&[0.4, 0.3, 0.2, 0.1], &[0.7, 0.2, 0.1]);
        check_protocol(&[0.25; 4], &[0.4, 0.4, 0.1, 0.1]);
        check_protocol(&[0.6, 0.4], &[0.6, 0.4]);
    }

    #[test]
    fn catalysed_jonathan_plenio_protocol() {
        let cat = sv(&[0.6, 0.4]);
        let src = sv(&[0.4, 0.4, 0.1, 0.1]).tensor(&cat);
        let tgt = sv(&[0.5, 0.25, 0.25]).tensor(&cat);
        check_protocol(src.probs(), tgt.probs());
    }

    #[test]
    fn pure_rates() {
        let r = pure_target_rate(&QState::singlet(), &sv(&[0.5, 0.5])).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-12 && (r.upper - 1.0).abs() < 1e-12 && r.exact);
        let two = QState::singlet().tensor(&QState::singlet()).unwrap();
        let two = two.permute(&[0, 2, 1, 3]).unwrap();
        let merged = two.relabel(SystemLayout::new(vec![
            crate::Factor::new(Party::ALICE, 2),
            crate::Factor::new(Party::ALICE, 2),
            crate::Factor::new(Party::BOB, 2),
            crate::Factor::new(Party::BOB, 2),
        ]).unwrap()).unwrap();
        let r = pure_target_rate(&merged, &sv(&[0.5, 0.5])).unwrap();
        assert!((r.lower - 2.0).abs() < 1e-10 && (r.upper - 2.0).abs() < 1e-10);
        assert!(matches!(pure_target_rate(&QState::singlet(), &sv(&[1.0])), Err(Error::Divergent(_))));
    }
}
