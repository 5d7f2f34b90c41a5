//! Recurrence distillation: two Werner pairs in, one better pair out on
//! success.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::locc::{Channel, LoccProtocol};
use crate::qstate::linalg::c;
use crate::qstate::{rng_from_seed, Party, QState, SystemLayout};
use crate::{CMatrix, Error, Result, C64};

use super::WernerState;

/// Safety stop for [`distill_to`]; the map converges slowly just above 1/2.
pub const MAX_ROUNDS: usize = 10_000;

/// Closed-form output fidelity and success probability of one round.
pub fn recurrence_step(f: f64) -> Result<(f64, f64)> {
    if !(f.is_finite() && (0.25..=1.0).contains(&f)) {
        return Err(Error::OutOfRange(format!("fidelity {f} not in [1/4, 1]")));
    }
    let q = (1.0 - f) / 3.0;
    let p = f * f + 2.0 * f * q + 5.0 * q * q;
    Ok(((f * f + q * q) / p, p))
}

fn pauli(i: usize) -> CMatrix {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let im = C64::new(0.0, 1.0);
    match i {
        0 => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => DMatrix::from_row_slice(2, 2, &[z, -im, im, z]),
        _ => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

fn cnot() -> CMatrix {
    let mut m = DMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(i, j)] = c(1.0);
    }
    m
}

/// The twelve unitaries `σ_i C^j`, where `C = (I − i(X + Y + Z))/2` cycles
/// the Pauli axes. Applied as `U ⊗ U` they map any two-qubit state to a
/// Werner state with the same singlet fidelity.
fn twirl_unitaries() -> Vec<CMatrix> {
    let half = c(0.5);
    let i = C64::new(0.0, 1.0);
    let cyc = (pauli(0) - (pauli(1) + pauli(2) + pauli(3)) * i) * half;
    let mut out = Vec::with_capacity(12);
    for j in 0..3 {
        let mut cj = pauli(0);
        for _ in 0..j {
            cj = &cyc * cj;
        }
        for k in 0..4 {
            out.push(pauli(k) * &cj);
        }
    }
    out
}

/// Alice draws one of twelve unitaries at random, applies it and tells Bob,
/// who applies the same one.
pub fn twirl_protocol() -> Result<LoccProtocol> {
    let l = SystemLayout::two_qubits();
    let us = twirl_unitaries();
    let w = c((1.0 / us.len() as f64).sqrt());
    let outcomes = us.iter().enumerate().map(|(k, u)| (format!("t{k}"), vec![u * w])).collect();
    let branches = us
        .iter()
        .map(|u| LoccProtocol::identity(l.clone()).local_unitary(Party::BOB, &[1], u.clone()))
        .collect::<Result<Vec<_>>>()?;
    LoccProtocol::identity(l).measure(Party::ALICE, &[0], outcomes, &[2], branches)
}

/// Two-copy part of a round on `[A₁ B₁ A₂ B₂]`: Alice's `σ_y` on both her
/// qubits, bilateral CNOT from pair 1 onto pair 2, and both parties
/// measuring their pair-2 qubit (labels `a0`/`a1` and `b0`/`b1`).
pub fn recurrence_protocol() -> Result<LoccProtocol> {
    let l = SystemLayout::two_qubits().repeat(2)?;
    let proj = |b: usize| {
        let mut m = DMatrix::zeros(2, 2);
        m[(b, b)] = c(1.0);
        m
    };
    LoccProtocol::identity(l)
        .local_unitary(Party::ALICE, &[0], pauli(2))?
        .local_unitary(Party::ALICE, &[2], pauli(2))?
        .local_unitary(Party::ALICE, &[0, 2], cnot())?
        .local_unitary(Party::BOB, &[1, 3], cnot())?
        .measure(
            Party::ALICE,
            &[2],
            vec![("a0".into(), vec![proj(0)]), ("a1".into(), vec![proj(1)])],
            &[2],
            vec![],
        )?
        .measure(
            Party::BOB,
            &[3],
            vec![("b0".into(), vec![proj(0)]), ("b1".into(), vec![proj(1)])],
            &[2],
            vec![],
        )
}

/// One round simulated on the full two-copy state: the protocol above,
/// post-selection on equal outcomes, Alice's `σ_y` undone, and the twirl.
/// Returns the output state and the success probability.
pub fn recurrence_step_simulated(f: f64) -> Result<(QState, f64)> {
    let w = WernerState::new(f)?.state();
    let branches = recurrence_protocol()?.branches(&w.power(2)?)?;
    let kept: Vec<_> = branches
        .iter()
        .filter(|b| {
            let n = b.labels.len();
            n >= 2 && b.labels[n - 2][1..] == b.labels[n - 1][1..]
        })
        .collect();
    let p: f64 = kept.iter().map(|b| b.probability).sum();
    if p <= 0.0 {
        return Err(Error::Precondition("post-selection never succeeds".into()));
    }
    let parts: Vec<(f64, &QState)> = kept.iter().map(|b| (b.probability / p, &b.state)).collect();
    let pair = QState::mixture(&parts)?.partial_trace(&[0, 1])?;
    let l = SystemLayout::two_qubits();
    let undo = pauli(2).kronecker(&pauli(0));
    let pair = Channel::unitary(l, undo)?.apply(&pair)?;
    Ok((twirl_protocol()?.run(&pair)?, p))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistillRound {
    pub fidelity_before: f64,
    pub fidelity_after: f64,
    pub success_probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistillRun {
    pub rounds: Vec<DistillRound>,
    /// Expected raw pairs per output pair, `Π 2/p`.
    pub copies_consumed: f64,
    pub final_fidelity: f64,
}

/// Iterates the recurrence from `f_initial` until the fidelity reaches
/// `f_target`.
pub fn distill_to(f_target: f64, f_initial: f64) -> Result<DistillRun> {
    if f_initial.is_nan() || f_initial <= 0.5 {
        return Err(Error::NotDistillable(format!(
            "recurrence distillation needs Werner fidelity above 1/2, got {f_initial}"
        )));
    }
    if !(f_target > f_initial && f_target < 1.0) {
        return Err(Error::OutOfRange(format!(
            "target fidelity {f_target} must lie in ({f_initial}, 1)"
        )));
    }
    let mut f = f_initial;
    let mut rounds = Vec::new();
    let mut copies = 1.0;
    while f < f_target {
        if rounds.len() >= MAX_ROUNDS {
            return Err(Error::Precondition(format!(
                "no convergence to {f_target} within {MAX_ROUNDS} rounds"
            )));
        }
        let (next, p) = recurrence_step(f)?;
        rounds.push(DistillRound {
            fidelity_before: f,
            fidelity_after: next,
            success_probability: p,
        });
        copies *= 2.0 / p;
        f = next;
    }
    Ok(DistillRun {
        rounds,
        copies_consumed: copies,
        final_fidelity: f,
    })
}

/// Sampled raw pairs per output pair, averaged over `trials`. Each round
/// retries with fresh pairs from the previous round until it succeeds.
pub fn monte_carlo_copies(run: &DistillRun, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::OutOfRange("need at least one trial".into()));
    }
    let mut rng = rng_from_seed(seed);
    fn cost<R: Rng>(level: usize, ps: &[f64], rng: &mut R) -> f64 {
        if level == 0 {
            return 1.0;
        }
        let mut total = 0.0;
        loop {
            total += cost(level - 1, ps, rng) + cost(level - 1, ps, rng);
            if rng.random::<f64>() < ps[level - 1] {
                return total;
            }
        }
    }
    let ps: Vec<f64> = run.rounds.iter().map(|r| r.success_probability).collect();
    let sum: f64 = (0..trials).map(|_| cost(ps.len(), &ps, &mut rng)).sum();
    Ok(sum / trials as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub f_in: f64,
    pub f_out: f64,
    pub p: f64,
    /// `2/p`, raw pairs per output pair for one round.
    pub expected_copies: f64,
}

pub fn sweep(grid: &[f64]) -> Result<Vec<SweepRow>> {
    grid.iter()
        .map(|&f| {
            let (f_out, p) = recurrence_step(f)?;
            Ok(SweepRow { f_in: f, f_out, p, expected_copies: 2.0 / p })
        })
        .collect()
}
