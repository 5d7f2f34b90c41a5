//! The report every command produces, and CSV extraction of its series.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

pub const REPORT_SCHEMA: &str = "entcat-report v1";

/// One asserted invariant. When `value` and `bound` are present the check
/// reads `value <relation> bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub relation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<f64>,
}

impl Check {
    fn compare(name: impl Into<String>, value: f64, rel: &str, bound: f64, pass: bool) -> Self {
        Check {
            name: name.into(),
            pass,
            value: Some(value),
            relation: Some(rel.into()),
            bound: Some(bound),
        }
    }

    /// `value < bound`.
    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check::compare(name, value, "<", bound, value < bound)
    }

    /// `value ≤ bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check::compare(name, value, "<=", bound, value <= bound)
    }

    pub fn holds(name: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            pass,
            value: None,
            relation: None,
            bound: None,
        }
    }
}

/// A numeric table, emitted by `plot` as CSV.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Series {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// What a command computes, before it is wrapped into a [`Report`].
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: BTreeMap<String, Value>,
    pub series: BTreeMap<String, Series>,
}

impl Outcome {
    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn result(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).expect("results serialize");
        self.results.insert(key.into(), v);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub scenario: Value,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub results: BTreeMap<String, Value>,
    pub series: BTreeMap<String, Series>,
}

impl Report {
    pub fn new(command: &str, seed: u64, scenario: Value, outcome: Outcome) -> Self {
        let pass = !outcome.checks.is_empty() && outcome.checks.iter().all(|c| c.pass);
        Report {
            schema: REPORT_SCHEMA.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            scenario,
            pass,
            checks: outcome.checks,
            results: outcome.results,
            series: outcome.series,
        }
    }

    /// Every number in the report must be finite. Non-finite values turn
    /// into `null` on serialization, and no field is ever legitimately null.
    pub fn validate(&self) -> Result<()> {
        for c in &self.checks {
            for x in [c.value, c.bound].into_iter().flatten() {
                if !x.is_finite() {
                    return Err(CliError::Report(format!("check `{}` has a non-finite number", c.name)));
                }
            }
        }
        for (name, s) in &self.series {
            if s.rows.iter().flatten().any(|x| !x.is_finite()) {
                return Err(CliError::Report(format!("series `{name}` has a non-finite entry")));
            }
        }
        for (k, v) in &self.results {
            if let Some(path) = find_null(v, k) {
                return Err(CliError::Report(format!("non-finite or missing value at `{path}`")));
            }
        }
        Ok(())
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Report(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Report(format!("not an entcat report: {e}")))
    }
}

fn find_null(v: &Value, path: &str) -> Option<String> {
    match v {
        Value::Null => Some(path.to_string()),
        Value::Array(a) => a.iter().enumerate().find_map(|(i, x)| find_null(x, &format!("{path}[{i}]"))),
        Value::Object(m) => m.iter().find_map(|(k, x)| find_null(x, &format!("{path}.{k}"))),
        _ => None,
    }
}

/// The named series of `report` as CSV with a header row. `kind` may use
/// dashes or underscores.
pub fn emit_plotdata(report: &Report, kind: &str) -> Result<String> {
    let key = kind.replace('-', "_");
    if report.series.is_empty() {
        return Err(CliError::Report("report has no plottable series".into()));
    }
    let s = report.series.get(&key).ok_or_else(|| {
        let have: Vec<&str> = report.series.keys().map(String::as_str).collect();
        CliError::Report(format!("no series `{key}` in report (available: {})", have.join(", ")))
    })?;
    if s.rows.is_empty() {
        return Err(CliError::Report(format!("series `{key}` is empty")));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Report(e.to_string());
    w.write_record(&s.columns).map_err(csv_err)?;
    for r in &s.rows {
        w.write_record(r.iter().map(|x| x.to_string())).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Report(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of numbers is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report_with(series: Option<Series>) -> Report {
        let mut o = Outcome::default();
        o.check(Check::below("x", 0.1, 1.0));
        if let Some(s) = series {
            o.series.insert("decoupling_scatter".into(), s);
        }
        Report::new("verify-lemma1", 1, Value::Null, o)
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut s = Series::new(&["eps", "lhs", "rhs"]);
        s.push(vec![0.1, 0.2, 1.5]);
        let csv = emit_plotdata(&report_with(Some(s)), "decoupling-scatter").unwrap();
        assert_eq!(csv, "eps,lhs,rhs\n0.1,0.2,1.5\n");
    }

    #[test]
    fn missing_or_empty_series_is_an_error() {
        assert!(emit_plotdata(&report_with(None), "decoupling-scatter").is_err());
        let empty = Series::new(&["eps"]);
        assert!(emit_plotdata(&report_with(Some(empty)), "decoupling-scatter").is_err());
        assert!(emit_plotdata(&report_with(Some(Series::new(&["a"]))), "distill-sweep").is_err());
    }

    #[test]
    fn non_finite_numbers_are_rejected() {
        let mut o = Outcome::default();
        o.check(Check::below("x", f64::NAN, 1.0));
        assert!(!Report::new("c", 0, Value::Null, o).validate().is_ok());
        let mut o = Outcome::default();
        o.check(Check::holds("ok", true));
        o.result("r", vec![1.0, f64::INFINITY]);
        assert!(Report::new("c", 0, Value::Null, o).to_json().is_err());
    }

    #[test]
    fn a_report_without_checks_does_not_pass() {
        assert!(!Report::new("c", 0, Value::Null, Outcome::default()).pass);
    }

    #[test]
    fn json_round_trips() {
        let r = report_with(None);
        assert_eq!(Report::from_json(&r.to_json().unwrap()).unwrap(), r);
    }
}
