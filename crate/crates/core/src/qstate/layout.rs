use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::MAX_TOTAL_DIM;

/// Owner of a subsystem factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Party(pub u8);

impl Party {
    pub const ALICE: Party = Party(0);
    pub const BOB: Party = Party(1);
    /// Purifying / extension systems. Sorts after every laboratory party.
    pub const ENV: Party = Party(255);
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Party::ALICE => write!(f, "A"),
            Party::BOB => write!(f, "B"),
            Party::ENV => write!(f, "E"),
            Party(p) => write!(f, "P{p}"),
        }
    }
}

/// One tensor factor of a [`SystemLayout`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub party: Party,
    pub dim: usize,
}

impl Factor {
    pub const fn new(party: Party, dim: usize) -> Self {
        Factor { party, dim }
    }
}

/// Ordered list of tensor factors. Factor 0 is the most significant digit
/// of the computational-basis index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SystemLayout {
    factors: Vec<Factor>,
}

impl SystemLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let mut total = 1usize;
        for f in &factors {
            if f.dim == 0 {
                return Err(Error::InvalidDimension("factor of dimension 0".into()));
            }
            total = total.checked_mul(f.dim).ok_or(Error::DimensionCap {
                dim: usize::MAX,
                cap: MAX_TOTAL_DIM,
            })?;
            if total > MAX_TOTAL_DIM {
                return Err(Error::DimensionCap {
                    dim: total,
                    cap: MAX_TOTAL_DIM,
                });
            }
        }
        Ok(SystemLayout { factors })
    }

    /// Layout with no factors (total dimension 1).
    pub fn trivial() -> Self {
        SystemLayout { factors: Vec::new() }
    }

    /// Alice holds a `da`-level system, Bob a `db`-level system.
    pub fn bipartite(da: usize, db: usize) -> Result<Self> {
        Self::new(vec![Factor::new(Party::ALICE, da), Factor::new(Party::BOB, db)])
    }

    pub fn two_qubits() -> Self {
        Self::bipartite(2, 2).expect("4 is below the cap")
    }

    pub fn single(party: Party, dim: usize) -> Result<Self> {
        Self::new(vec![Factor::new(party, dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, index: usize) -> Result<Factor> {
        self.factors.get(index).copied().ok_or(Error::IndexOutOfRange {
            index,
            len: self.factors.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    /// Distinct parties, ascending.
    pub fn parties(&self) -> Vec<Party> {
        let mut p: Vec<Party> = self.factors.iter().map(|f| f.party).collect();
        p.sort();
        p.dedup();
        p
    }

    pub fn indices_of(&self, party: Party) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, f)| f.party == party)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn concat(&self, other: &SystemLayout) -> Result<Self> {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self::new(factors)
    }

    /// `n` consecutive copies of this layout.
    pub fn repeat(&self, n: usize) -> Result<Self> {
        let mut factors = Vec::with_capacity(self.factors.len() * n);
        for _ in 0..n {
            factors.extend_from_slice(&self.factors);
        }
        Self::new(factors)
    }

    /// Sub-layout made of the listed factors, in the listed order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        self.check_indices(indices)?;
        Ok(SystemLayout {
            factors: indices.iter().map(|&i| self.factors[i]).collect(),
        })
    }

    /// Rejects out-of-range and repeated indices.
    pub fn check_indices(&self, indices: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.factors.len()];
        for &i in indices {
            if i >= self.factors.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.factors.len(),
                });
            }
            if seen[i] {
                return Err(Error::LayoutMismatch(format!("factor {i} listed twice")));
            }
            seen[i] = true;
        }
        Ok(())
    }

    /// Indices not in `indices`, ascending.
    pub fn complement(&self, indices: &[usize]) -> Vec<usize> {
        (0..self.factors.len()).filter(|i| !indices.contains(i)).collect()
    }

    /// Same parties and dimensions, factor by factor.
    pub fn same_profile(&self, other: &SystemLayout) -> bool {
        self.factors == other.factors
    }

    /// Dimensions agree factor by factor, ignoring ownership.
    pub fn same_dims(&self, other: &SystemLayout) -> bool {
        self.dims() == other.dims()
    }
}

impl fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, fac) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}:{}", fac.party, fac.dim)?;
        }
        write!(f, "]")
    }
}

/// Split of a layout's factors into an A side and its complement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    a_side: Vec<usize>,
}

impl Bipartition {
    /// A side is the given factor indices (sorted on construction).
    pub fn new(layout: &SystemLayout, a_side: &[usize]) -> Result<Self> {
        layout.check_indices(a_side)?;
        let mut a_side = a_side.to_vec();
        a_side.sort_unstable();
        Ok(Bipartition { a_side })
    }

    /// A side is every factor owned by `party`.
    pub fn by_party(layout: &SystemLayout, party: Party) -> Self {
        Bipartition {
            a_side: layout.indices_of(party),
        }
    }

    /// Alice against everyone else.
    pub fn alice(layout: &SystemLayout) -> Self {
        Self::by_party(layout, Party::ALICE)
    }

    pub fn a_side(&self) -> &[usize] {
        &self.a_side
    }

    pub fn b_side(&self, layout: &SystemLayout) -> Vec<usize> {
        layout.complement(&self.a_side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_dim_is_product() {
        let l = SystemLayout::new(vec![
            Factor::new(Party::ALICE, 2),
            Factor::new(Party::BOB, 3),
            Factor::new(Party::ALICE, 4),
        ])
        .unwrap();
        assert_eq!(l.total_dim(), 24);
        assert_eq!(l.indices_of(Party::ALICE), vec![0, 2]);
        assert_eq!(l.parties(), vec![Party::ALICE, Party::BOB]);
    }

    #[test]
    fn rejects_zero_dim_and_cap() {
        assert!(SystemLayout::single(Party::ALICE, 0).is_err());
        let big = SystemLayout::bipartite(64, 65);
        assert!(matches!(big, Err(Error::DimensionCap { .. })));
        assert!(SystemLayout::bipartite(64, 64).is_ok());
    }

    #[test]
    fn select_preserves_given_order() {
        let l = SystemLayout::two_qubits().concat(&SystemLayout::single(Party::ENV, 3).unwrap()).unwrap();
        let s = l.select(&[2, 0]).unwrap();
        assert_eq!(s.dims(), vec![3, 2]);
        assert!(l.select(&[0, 0]).is_err());
        assert!(l.select(&[5]).is_err());
    }
}
