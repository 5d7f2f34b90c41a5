use nalgebra::{DMatrix, DVector};

use crate::{CMatrix, Error, Result, C64};

use super::linalg::{c, eigh, eigvalsh, hermitize, kron, max_abs, trace};
use super::tensor;
use super::{Factor, Party, SystemLayout, HERMITIAN_TOL, PSD_CLIP, PSD_TOL, PURE_TOL, TRACE_TOL};

/// Density matrix bound to a [`SystemLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    layout: SystemLayout,
    matrix: CMatrix,
}

impl QState {
    /// Validates Hermiticity, unit trace and positivity. Eigenvalues slightly
    /// below zero (down to `-PSD_CLIP`) are clipped and the state is
    /// renormalized, with a warning.
    pub fn new(layout: SystemLayout, matrix: CMatrix) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::LayoutMismatch(format!(
                "matrix is {}x{}, layout {} needs {d}x{d}",
                matrix.nrows(),
                matrix.ncols(),
                layout
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm_err = max_abs(&(&matrix - matrix.adjoint()));
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm_err:e})")));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = eigvalsh(&matrix).first().copied().unwrap_or(1.0);
        if min_eig >= -PSD_TOL {
            return Ok(QState { layout, matrix });
        }
        if min_eig >= -PSD_CLIP {
            log::warn!("clipping negative eigenvalue {min_eig:e}");
            let (vals, vecs) = eigh(&matrix);
            let clipped: Vec<f64> = vals.iter().map(|&x| x.max(0.0)).collect();
            let s: f64 = clipped.iter().sum();
            let dm = DMatrix::from_fn(d, d, |r, k| vecs[(r, k)] * c(clipped[k] / s));
            let m = hermitize(&(dm * vecs.adjoint()));
            return Ok(QState { layout, matrix: m });
        }
        Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")))
    }

    /// Skips validation. For results of operations that preserve the
    /// invariants up to rounding.
    pub(crate) fn from_parts(layout: SystemLayout, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.total_dim());
        QState { layout, matrix }
    }

    /// `|ψ⟩⟨ψ|` after normalizing `ket`.
    pub fn from_ket(layout: SystemLayout, ket: &DVector<C64>) -> Result<Self> {
        if ket.len() != layout.total_dim() {
            return Err(Error::LayoutMismatch(format!(
                "ket of length {} on layout {layout}",
                ket.len()
            )));
        }
        let norm = ket.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("zero or non-finite ket".into()));
        }
        let v = ket / c(norm);
        Ok(QState::from_parts(layout, &v * v.adjoint()))
    }

    /// Computational basis state `|index⟩⟨index|`.
    pub fn basis(layout: SystemLayout, index: usize) -> Result<Self> {
        let d = layout.total_dim();
        if index >= d {
            return Err(Error::IndexOutOfRange { index, len: d });
        }
        let mut m = DMatrix::zeros(d, d);
        m[(index, index)] = c(1.0);
        Ok(QState::from_parts(layout, m))
    }

    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        QState::from_parts(layout, DMatrix::identity(d, d) * c(1.0 / d as f64))
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(layout: SystemLayout, probs: &[f64]) -> Result<Self> {
        if probs.len() != layout.total_dim() {
            return Err(Error::LayoutMismatch(format!(
                "{} probabilities on layout {layout}",
                probs.len()
            )));
        }
        let d = probs.len();
        QState::new(
            layout,
            DMatrix::from_fn(d, d, |i, j| if i == j { c(probs[i]) } else { c(0.0) }),
        )
    }

    /// Singlet `(|01⟩ - |10⟩)/√2` shared by Alice and Bob.
    pub fn singlet() -> Self {
        let mut v = DVector::zeros(4);
        v[1] = c(std::f64::consts::FRAC_1_SQRT_2);
        v[2] = c(-std::f64::consts::FRAC_1_SQRT_2);
        QState::from_parts(SystemLayout::two_qubits(), &v * v.adjoint())
    }

    /// `Σ_i |ii⟩ / √d` shared by Alice and Bob.
    pub fn max_entangled(d: usize) -> Result<Self> {
        let layout = SystemLayout::bipartite(d, d)?;
        let mut v = DVector::zeros(d * d);
        for i in 0..d {
            v[i * d + i] = c(1.0 / (d as f64).sqrt());
        }
        Ok(QState::from_parts(layout, &v * v.adjoint()))
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tensor(&self, other: &QState) -> Result<QState> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(QState::from_parts(layout, kron(&self.matrix, &other.matrix)))
    }

    /// `self^{⊗n}`; `n = 0` gives the trivial state.
    pub fn power(&self, n: usize) -> Result<QState> {
        let mut acc = QState::from_parts(SystemLayout::trivial(), DMatrix::identity(1, 1));
        for _ in 0..n {
            acc = acc.tensor(self)?;
        }
        Ok(acc)
    }

    /// Marginal on `keep`, which is sorted so kept factors stay in their
    /// original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<QState> {
        self.layout.check_indices(keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        Ok(self.marginal_unsorted(&keep))
    }

    /// Marginal on `keep` with factors in the listed order.
    pub fn reduce_to(&self, keep: &[usize]) -> Result<QState> {
        self.layout.check_indices(keep)?;
        Ok(self.marginal_unsorted(keep))
    }

    fn marginal_unsorted(&self, keep: &[usize]) -> QState {
        let layout = self.layout.select(keep).expect("indices checked");
        let m = tensor::partial_trace(&self.matrix, &self.layout.dims(), keep);
        QState::from_parts(layout, hermitize(&m))
    }

    /// Traces out the listed factors.
    pub fn trace_out(&self, drop: &[usize]) -> Result<QState> {
        self.layout.check_indices(drop)?;
        let keep = self.layout.complement(drop);
        Ok(self.marginal_unsorted(&keep))
    }

    /// Reorders factors: new factor `p` is old factor `perm[p]`.
    pub fn permute(&self, perm: &[usize]) -> Result<QState> {
        if perm.len() != self.layout.len() {
            return Err(Error::LayoutMismatch("permutation must list every factor".into()));
        }
        self.layout.check_indices(perm)?;
        let layout = self.layout.select(perm)?;
        Ok(QState::from_parts(
            layout,
            tensor::permute(&self.matrix, &self.layout.dims(), perm),
        ))
    }

    /// Same matrix with new factor ownership. Dimensions must agree.
    pub fn relabel(&self, layout: SystemLayout) -> Result<QState> {
        if !self.layout.same_dims(&layout) {
            return Err(Error::LayoutMismatch(format!(
                "cannot relabel {} as {layout}",
                self.layout
            )));
        }
        Ok(QState::from_parts(layout, self.matrix.clone()))
    }

    /// Assigns every factor to `party`.
    pub fn owned_by(&self, party: Party) -> QState {
        let layout = SystemLayout::new(
            self.layout.factors().iter().map(|f| Factor::new(party, f.dim)).collect(),
        )
        .expect("same dims");
        QState::from_parts(layout, self.matrix.clone())
    }

    /// Applies Kraus operators on `targets`; the targets become factors
    /// described by `out` (see [`tensor::replaced_dims`] for placement).
    pub(crate) fn apply_kraus(&self, targets: &[usize], kraus: &[CMatrix], out: &[Factor]) -> Result<QState> {
        self.layout.check_indices(targets)?;
        let dims = self.layout.dims();
        let out_dims: Vec<usize> = out.iter().map(|f| f.dim).collect();
        let m = tensor::apply_kraus(&self.matrix, &dims, targets, kraus, &out_dims);
        let layout = replaced_layout(&self.layout, targets, out)?;
        Ok(QState::from_parts(layout, m))
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v = eigvalsh(&self.matrix);
        v.reverse();
        v
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(1.0)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_pure(&self) -> bool {
        self.max_eigenvalue() >= 1.0 - PURE_TOL
    }

    /// Dominant eigenvector, phase fixed so its largest entry is real
    /// positive.
    pub fn dominant_ket(&self) -> DVector<C64> {
        let (_, vecs) = eigh(&self.matrix);
        let mut v = vecs.column(vecs.ncols() - 1).into_owned();
        let (imax, _) = v
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 + 1e-12 { (i, z.norm()) } else { acc });
        let ph = v[imax] / c(v[imax].norm());
        v /= ph;
        v
    }

    /// Ket of a pure state.
    pub fn ket(&self) -> Result<DVector<C64>> {
        let top = self.max_eigenvalue();
        if top < 1.0 - PURE_TOL {
            return Err(Error::NotPure(top));
        }
        Ok(self.dominant_ket())
    }

    /// Convex combination `Σ w_i ρ_i`; weights must be non-negative and sum
    /// to one.
    pub fn mixture(parts: &[(f64, &QState)]) -> Result<QState> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let mut m = DMatrix::zeros(first.dim(), first.dim());
        let mut total = 0.0;
        for (w, s) in parts {
            if !s.layout.same_profile(&first.layout) {
                return Err(Error::LayoutMismatch("mixture of different layouts".into()));
            }
            if *w < 0.0 {
                return Err(Error::InvalidState(format!("negative weight {w}")));
            }
            m += s.matrix() * c(*w);
            total += w;
        }
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("weights sum to {total}")));
        }
        QState::new(first.layout.clone(), m)
    }

    /// Re-runs validation, clipping tiny negative eigenvalues.
    pub fn sanitized(self) -> Result<QState> {
        let QState { layout, matrix } = self;
        let tr = trace(&matrix).re;
        QState::new(layout, hermitize(&matrix) / c(tr))
    }
}

pub(crate) fn replaced_layout(layout: &SystemLayout, targets: &[usize], out: &[Factor]) -> Result<SystemLayout> {
    let factors = layout.factors();
    if targets.len() == out.len() {
        let mut f = factors.to_vec();
        for (&t, &o) in targets.iter().zip(out) {
            f[t] = o;
        }
        return SystemLayout::new(f);
    }
    let first = targets.iter().copied().min().unwrap_or(factors.len());
    let mut f = Vec::new();
    for (i, &x) in factors.iter().enumerate() {
        if i == first {
            f.extend_from_slice(out);
        }
        if !targets.contains(&i) {
            f.push(x);
        }
    }
    if first == factors.len() {
        f.extend_from_slice(out);
    }
    SystemLayout::new(f)
}
