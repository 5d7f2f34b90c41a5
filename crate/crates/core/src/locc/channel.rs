use nalgebra::DMatrix;

use crate::qstate::linalg::{c, eigvalsh, hermitize, identity, max_abs};
use crate::qstate::{random_isometry, rng_from_seed, tensor, QState, SystemLayout};
use crate::{CMatrix, Error, Result};

use super::{weyl, COMPLETENESS_TOL, PRUNE_NORM};

/// Completely positive map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    input: SystemLayout,
    output: SystemLayout,
    kraus: Vec<CMatrix>,
    trace_preserving: bool,
}

impl Channel {
    /// Trace-preserving channel; `Σ K†K = I` within 1e-9.
    pub fn new(input: SystemLayout, output: SystemLayout, kraus: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::build(input, output, kraus, true)?;
        let err = ch.completeness_error();
        if err > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not complete (deviation {err:e})"
            )));
        }
        Ok(ch)
    }

    /// Trace-non-increasing map; `Σ K†K ≤ I` within 1e-9.
    pub fn partial(input: SystemLayout, output: SystemLayout, kraus: Vec<CMatrix>) -> Result<Self> {
        let mut ch = Self::build(input, output, kraus, false)?;
        let top = eigvalsh(&ch.gram()).last().copied().unwrap_or(0.0);
        if top > 1.0 + COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators increase trace (largest eigenvalue {top})"
            )));
        }
        ch.trace_preserving = ch.completeness_error() <= COMPLETENESS_TOL;
        Ok(ch)
    }

    fn build(input: SystemLayout, output: SystemLayout, kraus: Vec<CMatrix>, tp: bool) -> Result<Self> {
        let (din, dout) = (input.total_dim(), output.total_dim());
        for (i, k) in kraus.iter().enumerate() {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator {i} is {}x{}, expected {dout}x{din}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let kraus = kraus.into_iter().filter(|k| k.norm() >= PRUNE_NORM).collect();
        Ok(Channel {
            input,
            output,
            kraus,
            trace_preserving: tp,
        })
    }

    pub(crate) fn from_parts_unchecked(input: SystemLayout, output: SystemLayout, kraus: Vec<CMatrix>) -> Self {
        Channel {
            input,
            output,
            kraus,
            trace_preserving: true,
        }
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        Channel::from_parts_unchecked(layout.clone(), layout, vec![identity(d)])
    }

    pub fn unitary(layout: SystemLayout, u: CMatrix) -> Result<Self> {
        Channel::new(layout.clone(), layout, vec![u])
    }

    /// `ρ ↦ Tr(ρ) I/d`, realized by the `d²` Weyl operators.
    pub fn fully_depolarizing(layout: SystemLayout) -> Self {
        Self::depolarizing(layout, 0.0).expect("q = 0 is in range")
    }

    /// `ρ ↦ q ρ + (1 − q) Tr(ρ) I/d` for `q ∈ [0, 1]`.
    pub fn depolarizing(layout: SystemLayout, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::OutOfRange(format!("depolarizing weight {q} not in [0, 1]")));
        }
        let d = layout.total_dim();
        let d2 = (d * d) as f64;
        let mut kraus = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let w = if a == 0 && b == 0 {
                    q + (1.0 - q) / d2
                } else {
                    (1.0 - q) / d2
                };
                if w > 0.0 {
                    kraus.push(weyl(d, a, b) * c(w.sqrt()));
                }
            }
        }
        Channel::new(layout.clone(), layout, kraus)
    }

    /// Random trace-preserving channel with `n_kraus` operators, from a
    /// Haar isometry `input → output ⊗ environment`.
    pub fn random(input: SystemLayout, output: SystemLayout, n_kraus: usize, seed: u64) -> Result<Self> {
        let (din, dout) = (input.total_dim(), output.total_dim());
        let n = n_kraus.max(1);
        if dout * n < din {
            return Err(Error::InvalidDimension(format!(
                "{n} Kraus operators cannot form a channel from dim {din} to {dout}"
            )));
        }
        let mut rng = rng_from_seed(seed);
        let v = random_isometry(dout * n, din, &mut rng);
        let kraus = (0..n).map(|k| v.rows(k * dout, dout).into_owned()).collect();
        Channel::new(input, output, kraus)
    }

    /// Traces out the listed factors.
    pub fn discard(layout: SystemLayout, drop: &[usize]) -> Result<Self> {
        layout.check_indices(drop)?;
        let keep = layout.complement(drop);
        let output = layout.select(&keep)?;
        let dims = layout.dims();
        let dd: usize = drop.iter().map(|&f| dims[f]).product();
        let kraus = (0..dd)
            .map(|i| {
                let mut bra = DMatrix::zeros(1, dd);
                bra[(0, i)] = c(1.0);
                tensor::embed_rect(&bra, &dims, drop, &[])
            })
            .collect();
        Channel::new(layout, output, kraus)
    }

    pub fn input(&self) -> &SystemLayout {
        &self.input
    }

    pub fn output(&self) -> &SystemLayout {
        &self.output
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `Σ K†K`.
    pub fn gram(&self) -> CMatrix {
        let d = self.input.total_dim();
        let mut g = DMatrix::zeros(d, d);
        for k in &self.kraus {
            g += k.adjoint() * k;
        }
        hermitize(&g)
    }

    /// Max-abs deviation of `Σ K†K` from the identity.
    pub fn completeness_error(&self) -> f64 {
        max_abs(&(self.gram() - identity(self.input.total_dim())))
    }

    /// Applies the channel to a whole state. The state's layout must match
    /// the channel input.
    pub fn apply(&self, s: &QState) -> Result<QState> {
        if !s.layout().same_profile(&self.input) {
            return Err(Error::LayoutMismatch(format!(
                "state on {} fed to channel on {}",
                s.layout(),
                self.input
            )));
        }
        let m = self.apply_matrix(s.matrix());
        Ok(QState::from_parts(self.output.clone(), m))
    }

    /// Applies the channel to the `targets` factors of `s`.
    pub fn apply_to(&self, s: &QState, targets: &[usize]) -> Result<QState> {
        let sub = s.layout().select(targets)?;
        if !sub.same_profile(&self.input) {
            return Err(Error::LayoutMismatch(format!(
                "factors {targets:?} are {sub}, channel input is {}",
                self.input
            )));
        }
        s.apply_kraus(targets, &self.kraus, self.output.factors())
    }

    /// `Σ K m K†` on a raw matrix of the input dimension.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let d = self.output.total_dim();
        let mut out = DMatrix::zeros(d, d);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        hermitize(&out)
    }

    /// `next ∘ self`.
    pub fn compose(&self, next: &Channel) -> Result<Channel> {
        if !self.output.same_profile(&next.input) {
            return Err(Error::LayoutMismatch(format!(
                "cannot feed {} into {}",
                self.output, next.input
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for b in &next.kraus {
            for a in &self.kraus {
                let k = b * a;
                if k.norm() >= PRUNE_NORM {
                    kraus.push(k);
                }
            }
        }
        Ok(Channel {
            input: self.input.clone(),
            output: next.output.clone(),
            kraus,
            trace_preserving: self.trace_preserving && next.trace_preserving,
        })
    }

    pub fn tensor(&self, other: &Channel) -> Result<Channel> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kronecker(b));
            }
        }
        Ok(Channel {
            input: self.input.concat(&other.input)?,
            output: self.output.concat(&other.output)?,
            kraus,
            trace_preserving: self.trace_preserving && other.trace_preserving,
        })
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`, input index most significant.
    pub fn choi(&self) -> CMatrix {
        let (din, dout) = (self.input.total_dim(), self.output.total_dim());
        let mut j = DMatrix::zeros(din * dout, din * dout);
        for k in &self.kraus {
            // vec(K) with input index outermost: v[i*dout + o] = K[o, i]
            let v = nalgebra::DVector::from_fn(din * dout, |r, _| k[(r % dout, r / dout)]);
            j += &v * v.adjoint();
        }
        j
    }

    /// Largest entrywise difference between Choi matrices.
    pub fn distance(&self, other: &Channel) -> Result<f64> {
        if !self.input.same_dims(&other.input) || !self.output.same_dims(&other.output) {
            return Err(Error::LayoutMismatch("channels on different spaces".into()));
        }
        Ok(max_abs(&(self.choi() - other.choi())))
    }

    /// Concatenates Kraus lists of maps on the same spaces.
    pub fn sum(parts: &[Channel]) -> Result<Channel> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty sum".into()))?;
        let mut kraus = Vec::new();
        for p in parts {
            if !p.input.same_profile(&first.input) || !p.output.same_profile(&first.output) {
                return Err(Error::LayoutMismatch("summed maps act on different layouts".into()));
            }
            kraus.extend(p.kraus.iter().cloned());
        }
        Channel::partial(first.input.clone(), first.output.clone(), kraus)
    }

    /// Same operators on relabelled layouts of equal dimensions.
    pub fn relabel(&self, input: SystemLayout, output: SystemLayout) -> Result<Channel> {
        if !input.same_dims(&self.input) || !output.same_dims(&self.output) {
            return Err(Error::LayoutMismatch("relabel must keep dimensions".into()));
        }
        Ok(Channel {
            input,
            output,
            kraus: self.kraus.clone(),
            trace_preserving: self.trace_preserving,
        })
    }
}
