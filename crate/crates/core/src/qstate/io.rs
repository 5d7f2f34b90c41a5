//! Plain-text state format.
//!
//! ```text
//! # entcat-state v1
//! layout 0:2 1:2
//! <re> <im>      one line per entry, row-major
//! ```
//!
//! Floats are written in shortest round-trip form, so reading back gives a
//! bit-identical matrix.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{CMatrix, Error, Result};

use super::{Factor, Party, QState, SystemLayout};

pub const STATE_HEADER: &str = "# entcat-state v1";

/// Row-major `re im` lines.
pub fn matrix_to_text(m: &CMatrix) -> String {
    let mut s = String::with_capacity(m.len() * 48);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            let _ = writeln!(s, "{:e} {:e}", z.re, z.im);
        }
    }
    s
}

pub fn matrix_from_text(rows: usize, cols: usize, text: &str) -> Result<CMatrix> {
    let mut entries = Vec::with_capacity(rows * cols);
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        entries.push(parse_entry(line).map_err(|e| Error::Parse(format!("entry {}: {e}", n + 1)))?);
    }
    if entries.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries, found {}",
            rows * cols,
            entries.len()
        )));
    }
    Ok(DMatrix::from_row_iterator(rows, cols, entries))
}

fn parse_entry(line: &str) -> std::result::Result<Complex64, String> {
    let mut it = line.split_whitespace();
    let re = it.next().ok_or("missing real part")?;
    let im = it.next().ok_or("missing imaginary part")?;
    if it.next().is_some() {
        return Err("trailing data".into());
    }
    let re: f64 = re.parse().map_err(|e| format!("{e}"))?;
    let im: f64 = im.parse().map_err(|e| format!("{e}"))?;
    Ok(Complex64::new(re, im))
}

impl QState {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(STATE_HEADER);
        s.push('\n');
        s.push_str("layout");
        for f in self.layout().factors() {
            let _ = write!(s, " {}:{}", f.party.0, f.dim);
        }
        s.push('\n');
        s.push_str(&matrix_to_text(self.matrix()));
        s
    }

    pub fn from_text(text: &str) -> Result<QState> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(STATE_HEADER) {
            return Err(Error::Parse("missing state header".into()));
        }
        let layout_line = lines.next().ok_or_else(|| Error::Parse("missing layout line".into()))?;
        let mut words = layout_line.split_whitespace();
        if words.next() != Some("layout") {
            return Err(Error::Parse("expected `layout`".into()));
        }
        let mut factors = Vec::new();
        for w in words {
            let (p, d) = w
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad factor `{w}`")))?;
            let party: u8 = p.parse().map_err(|_| Error::Parse(format!("bad party `{p}`")))?;
            let dim: usize = d.parse().map_err(|_| Error::Parse(format!("bad dimension `{d}`")))?;
            factors.push(Factor::new(Party(party), dim));
        }
        let layout = SystemLayout::new(factors)?;
        let d = layout.total_dim();
        let body: Vec<&str> = lines.collect();
        let m = matrix_from_text(d, d, &body.join("\n"))?;
        QState::new(layout, m)
    }
}

pub fn write_state(path: impl AsRef<Path>, s: &QState) -> Result<()> {
    std::fs::write(path, s.to_text())?;
    Ok(())
}

pub fn read_state(path: impl AsRef<Path>) -> Result<QState> {
    QState::from_text(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_state, Ensemble};

    #[test]
    fn text_round_trip_is_bit_exact() {
        let l = SystemLayout::bipartite(2, 3).unwrap();
        let s = random_state(&l, Ensemble::GinibreMixed, 5);
        let back = QState::from_text(&s.to_text()).unwrap();
        assert_eq!(back.layout(), s.layout());
        for (a, b) in back.matrix().iter().zip(s.matrix().iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(QState::from_text("layout 0:2\n1 0\n").is_err());
        let short = format!("{STATE_HEADER}\nlayout 0:2\n1e0 0e0\n");
        assert!(matches!(QState::from_text(&short), Err(Error::Parse(_))));
    }
}
