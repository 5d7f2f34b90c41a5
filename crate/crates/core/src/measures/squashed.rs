//! Upper bounds on squashed entanglement by searching over extensions.
//!
//! Every extension `ρ^{ABE}` of `ρ^{AB}` is obtained by applying some
//! channel `R → E` to a purification `|ψ⟩^{ABR}`. Candidates are channels
//! given by isometries `R → E ⊗ F` with `F` discarded, so each one is a
//! genuine extension and its `½ I(A;B|E)` is a valid upper bound.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::qstate::linalg::{c, eigh, max_abs};
use crate::qstate::{
    ginibre_matrix, rng_from_seed, Factor, Party, QState, SystemLayout, MAX_TOTAL_DIM,
};
use crate::{CMatrix, Error, Result, C64};

use super::cqmi_split;

/// Convex decomposition `ρ = Σ p_i ρ_i` used as a classical flag
/// extension `Σ p_i ρ_i ⊗ |i⟩⟨i|`.
#[derive(Clone, Debug)]
pub struct FlaggedDecomposition {
    pub weights: Vec<f64>,
    pub states: Vec<QState>,
}

#[derive(Clone, Debug)]
pub struct SquashedSearch {
    /// Largest extension dimension tried by the random search.
    pub max_ext_dim: usize,
    /// Number of candidate evaluations.
    pub budget: usize,
    pub seed: u64,
    /// Extra flagged decompositions evaluated right after the built-in
    /// candidates.
    pub hints: Vec<FlaggedDecomposition>,
}

impl Default for SquashedSearch {
    fn default() -> Self {
        SquashedSearch {
            max_ext_dim: 4,
            budget: 200,
            seed: 0,
            hints: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SquashedBound {
    /// `½ I(A;B|E)` of the best extension found.
    pub value: f64,
    pub extension_dim: usize,
    /// Best extension, with `E` as a trailing environment factor.
    pub extension_state: QState,
    /// `½ I(A;B)`, the value of the trivial extension.
    pub trivial_value: f64,
    pub evaluations: usize,
}

struct Problem {
    layout: SystemLayout,
    a: Vec<usize>,
    b: Vec<usize>,
    /// Purification amplitudes, `psi[(x, j)]` with `x` the AB index and `j`
    /// the purifying index.
    psi: CMatrix,
}

impl Problem {
    /// Extension obtained by applying `v` to the purifying system and
    /// keeping the leading `e`-dimensional part. With `flagged` the result is
    /// dephased on `E`, i.e. a convex decomposition with `E` recording `i`.
    fn extension(&self, v: &CMatrix, e: usize, flagged: bool) -> QState {
        // rows of v index (e, f) with e most significant
        let ef = v.nrows();
        let f = ef / e;
        let dab = self.psi.nrows();
        let out = &self.psi * v.transpose();
        let mut m = DMatrix::zeros(dab * e, f);
        for x in 0..dab {
            for ei in 0..e {
                for fi in 0..f {
                    m[(x * e + ei, fi)] = out[(x, ei * f + fi)];
                }
            }
        }
        let mut rho = &m * m.adjoint();
        if flagged {
            for i in 0..dab * e {
                for j in 0..dab * e {
                    if i % e != j % e {
                        rho[(i, j)] = c(0.0);
                    }
                }
            }
        }
        let mut factors = self.layout.factors().to_vec();
        factors.push(Factor::new(Party::ENV, e));
        let layout = SystemLayout::new(factors).expect("checked against the cap");
        QState::from_parts(layout, crate::qstate::linalg::hermitize(&rho))
    }

    fn half_cmi(&self, ext: &QState) -> f64 {
        let e = vec![self.layout.len()];
        0.5 * cqmi_split(ext, &self.a, &self.b, &e).expect("indices valid")
    }
}

fn orthonormalize(g: &CMatrix) -> CMatrix {
    let cols = g.ncols();
    let qr = g.clone().qr();
    let q = qr.q();
    q.columns(0, cols).into_owned()
}

/// Best `½ I(A;B|E)` over the searched extensions of a bipartite state.
///
/// The evaluation order is fixed by the seed and does not depend on the
/// budget, so a larger budget never gives a larger value.
pub fn squashed_upper(rho: &QState, search: &SquashedSearch) -> Result<SquashedBound> {
    let layout = rho.layout().clone();
    let a = layout.indices_of(Party::ALICE);
    let b = layout.indices_of(Party::BOB);
    if a.is_empty() || b.is_empty() || a.len() + b.len() != layout.len() {
        return Err(Error::LayoutMismatch(format!(
            "squashed entanglement needs an Alice/Bob layout, got {layout}"
        )));
    }
    if search.max_ext_dim == 0 {
        return Err(Error::InvalidDimension("extension dimension must be positive".into()));
    }
    if search.budget == 0 {
        return Err(Error::OutOfRange("search budget must be positive".into()));
    }
    let dab = layout.total_dim();
    let max_e = search.max_ext_dim.min(MAX_TOTAL_DIM / dab).max(1);

    // purification amplitudes from the spectral decomposition
    let (vals, vecs) = eigh(rho.matrix());
    let kept: Vec<usize> = (0..vals.len()).rev().filter(|&i| vals[i] > 1e-14).collect();
    let r = kept.len().max(1);
    let mut psi = DMatrix::zeros(dab, r);
    for (j, &i) in kept.iter().enumerate() {
        let w = c(vals[i].sqrt());
        for x in 0..dab {
            psi[(x, j)] = vecs[(x, i)] * w;
        }
    }
    let prob = Problem { layout: layout.clone(), a, b, psi };

    let mut evals = 0usize;
    let trivial_v = DMatrix::from_fn(r, r, |i, j| if i == j { c(1.0) } else { c(0.0) });
    let trivial = prob.extension(&trivial_v, 1, false);
    let trivial_value = prob.half_cmi(&trivial);
    evals += 1;
    let mut best = (trivial_value, 1usize, trivial);

    let consider = |value: f64, e: usize, st: QState, best: &mut (f64, usize, QState)| {
        if value < best.0 {
            *best = (value, e, st);
        }
    };

    // spectral flags: E records the eigenvector index
    if evals < search.budget && r <= max_e && r > 1 {
        let v = DMatrix::from_fn(r, r, |i, j| if i == j { c(1.0) } else { c(0.0) });
        let ext = prob.extension(&v, r, true);
        consider(prob.half_cmi(&ext), r, ext, &mut best);
        evals += 1;
    }

    for hint in &search.hints {
        if evals >= search.budget {
            break;
        }
        let ext = flagged_extension(rho, hint)?;
        let e = hint.states.len();
        let val = prob.half_cmi(&ext);
        consider(val, e, ext, &mut best);
        evals += 1;
    }

    // Restarts alternate between rank-one measurements of the purifying
    // system with up to rank² flagged outcomes and coherent isometries
    // R → E ⊗ F; each restart is followed by local refinement.
    let mut rng: ChaCha8Rng = rng_from_seed(search.seed);
    const REFINE: usize = 24;
    let max_flag = (r * r).min(max_e);
    let mut restart = 0usize;
    'outer: while evals < search.budget {
        let flagged = restart.is_multiple_of(2) && max_flag >= 2;
        let (e, f) = if flagged {
            (2 + (restart / 2) % (max_flag - 1), 1)
        } else {
            let e = 1 + (restart / 2) % max_e;
            (e, r.div_ceil(e).max(1))
        };
        restart += 1;
        // a flagged measurement needs at least r outcomes to be an isometry
        let rows = if flagged { e.max(r) } else { e * f };
        let e = if flagged { rows } else { e };
        if flagged && rows > max_e {
            continue;
        }
        let mut g = ginibre_matrix(rows, r, &mut rng);
        let mut cur = {
            let ext = prob.extension(&orthonormalize(&g), e, flagged);
            let v = prob.half_cmi(&ext);
            consider(v, e, ext, &mut best);
            evals += 1;
            v
        };
        let mut step = 0.5;
        for _ in 0..REFINE {
            if evals >= search.budget {
                break 'outer;
            }
            let (i, j) = (rng.random_range(0..rows), rng.random_range(0..r));
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            let mut trial = g.clone();
            trial[(i, j)] += C64::new(re, im) * c(step);
            let ext = prob.extension(&orthonormalize(&trial), e, flagged);
            let v = prob.half_cmi(&ext);
            evals += 1;
            if v < cur {
                cur = v;
                g = trial;
                consider(v, e, ext, &mut best);
            } else {
                step *= 0.8;
            }
        }
    }

    let (value, extension_dim, extension_state) = best;
    Ok(SquashedBound {
        value: value.max(0.0),
        extension_dim,
        extension_state,
        trivial_value,
        evaluations: evals,
    })
}

/// `Σ p_i ρ_i ⊗ |i⟩⟨i|`, after checking that the decomposition reproduces
/// `rho` within 1e-8.
fn flagged_extension(rho: &QState, d: &FlaggedDecomposition) -> Result<QState> {
    if d.weights.len() != d.states.len() || d.states.is_empty() {
        return Err(Error::InvalidState("decomposition weights and states differ in number".into()));
    }
    let k = d.states.len();
    let dab = rho.dim();
    let mut sum = DMatrix::zeros(dab, dab);
    let mut ext = DMatrix::zeros(dab * k, dab * k);
    for (i, (w, s)) in d.weights.iter().zip(&d.states).enumerate() {
        if !s.layout().same_profile(rho.layout()) || *w < 0.0 {
            return Err(Error::InvalidState(format!("decomposition term {i} is invalid")));
        }
        sum += s.matrix() * c(*w);
        for x in 0..dab {
            for y in 0..dab {
                ext[(x * k + i, y * k + i)] = s.matrix()[(x, y)] * c(*w);
            }
        }
    }
    let err = max_abs(&(sum - rho.matrix()));
    if err > 1e-8 {
        return Err(Error::InvalidState(format!(
            "decomposition misses the state by {err:e}"
        )));
    }
    let mut factors = rho.layout().factors().to_vec();
    factors.push(Factor::new(Party::ENV, k));
    QState::new(SystemLayout::new(factors)?, ext)
}

impl FlaggedDecomposition {
    /// Decomposition into product pure states `|a_i⟩⊗|b_i⟩`.
    pub fn product_kets(
        layout: &SystemLayout,
        weights: Vec<f64>,
        kets: &[(DVector<C64>, DVector<C64>)],
    ) -> Result<Self> {
        let states = kets
            .iter()
            .map(|(a, b)| QState::from_ket(layout.clone(), &a.kronecker(b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FlaggedDecomposition { weights, states })
    }

    /// `Σ p_i ρ_i`.
    pub fn mixture(&self) -> Result<QState> {
        let parts: Vec<(f64, &QState)> = self.weights.iter().copied().zip(self.states.iter()).collect();
        QState::mixture(&parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::mutual_information;
    use crate::qstate::{entanglement_entropy, haar_ket, random_state, Bipartition, Ensemble};

    #[test]
    fn pure_states_give_entanglement_entropy() {
        let l = SystemLayout::bipartite(2, 3).unwrap();
        let s = random_state(&l, Ensemble::HaarPure, 4);
        let b = squashed_upper(&s, &SquashedSearch { budget: 20, ..Default::default() }).unwrap();
        let e = entanglement_entropy(&s, &Bipartition::alice(&l)).unwrap();
        assert!((b.value - e).abs() < 1e-6);
    }

    #[test]
    fn separable_flagged_state_reaches_zero() {
        let l = SystemLayout::two_qubits();
        let mut rng = rng_from_seed(2);
        let kets: Vec<_> = (0..3).map(|_| (haar_ket(2, &mut rng), haar_ket(2, &mut rng))).collect();
        let d = FlaggedDecomposition::product_kets(&l, vec![0.5, 0.3, 0.2], &kets).unwrap();
        let rho = d.mixture().unwrap();
        let search = SquashedSearch { budget: 10, hints: vec![d], ..Default::default() };
        let b = squashed_upper(&rho, &search).unwrap();
        assert!(b.value <= 1e-6);
        let mi = mutual_information(&rho, &Bipartition::alice(&l)).unwrap();
        assert!(b.value <= 0.5 * mi + 1e-12);
    }

    #[test]
    fn value_never_grows_with_budget() {
        let l = SystemLayout::two_qubits();
        let rho = random_state(&l, Ensemble::GinibreMixed, 8);
        let mut last = f64::INFINITY;
        for budget in [1, 5, 20, 60] {
            let b = squashed_upper(&rho, &SquashedSearch { budget, seed: 3, ..Default::default() }).unwrap();
            assert!(b.value <= last + 1e-15);
            assert!(b.value <= b.trivial_value + 1e-15);
            last = b.value;
        }
    }

    #[test]
    fn extension_marginal_matches_input() {
        let l = SystemLayout::two_qubits();
        let rho = random_state(&l, Ensemble::GinibreMixed, 9);
        let b = squashed_upper(&rho, &SquashedSearch { budget: 40, ..Default::default() }).unwrap();
        let back = b.extension_state.partial_trace(&[0, 1]).unwrap();
        assert!(max_abs(&(back.matrix() - rho.matrix())) < 1e-8);
    }

    #[test]
    fn rejects_bad_inputs() {
        let rho = QState::singlet();
        assert!(squashed_upper(&rho, &SquashedSearch { budget: 0, ..Default::default() }).is_err());
        assert!(squashed_upper(&rho, &SquashedSearch { max_ext_dim: 0, ..Default::default() }).is_err());
        let single = QState::maximally_mixed(SystemLayout::single(Party::ALICE, 2).unwrap());
        assert!(squashed_upper(&single, &SquashedSearch::default()).is_err());
    }
}
