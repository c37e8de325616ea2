//! Literature values of the ion pairing coefficient in Ho-doped fibers.

use std::fmt;

/// Tab-separated source, rows kept exactly as published.
pub const REFERENCE_TSV: &str = include_str!("../../../fixtures/ion_pairing_reference.tsv");

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    pub fiber_id: String,
    pub reference: String,
    /// Coefficient as printed, e.g. `15 ± 1%`.
    pub verbatim: String,
    /// Fraction, e.g. 0.15.
    pub coefficient: f64,
    /// Fraction, when the source states one.
    pub uncertainty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub rows: Vec<ReferenceRow>,
}

fn percent(text: &str) -> Option<f64> {
    text.trim()
        .trim_end_matches('%')
        .trim()
        .parse::<f64>()
        .ok()
        .map(|v| v / 100.0)
}

impl ReferenceTable {
    pub fn parse(source: &str) -> Result<Self, String> {
        let mut rows = Vec::new();
        for (idx, line) in source.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [fiber_id, reference, verbatim] = fields[..] else {
                return Err(format!("line {}: expected 3 tab-separated fields", idx + 1));
            };
            let (value, uncertainty) = match verbatim.split_once('±') {
                Some((v, u)) => (percent(v), percent(u)),
                None => (percent(verbatim), None),
            };
            let coefficient =
                value.ok_or_else(|| format!("line {}: bad coefficient `{verbatim}`", idx + 1))?;
            rows.push(ReferenceRow {
                fiber_id: fiber_id.to_string(),
                reference: reference.to_string(),
                verbatim: verbatim.to_string(),
                coefficient,
                uncertainty,
            });
        }
        Ok(ReferenceTable { rows })
    }

    /// The shipped table.
    pub fn builtin() -> Self {
        Self::parse(REFERENCE_TSV).expect("shipped reference table parses")
    }
}

impl fmt::Display for ReferenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w0 = self
            .rows
            .iter()
            .map(|r| r.fiber_id.chars().count())
            .max()
            .unwrap_or(0)
            .max(8);
        let w1 = self
            .rows
            .iter()
            .map(|r| r.reference.chars().count())
            .max()
            .unwrap_or(0)
            .max(9);
        writeln!(f, "{:<w0$}  {:<w1$}  ion pairing", "fiber id", "reference")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<w0$}  {:<w1$}  {}",
                r.fiber_id, r.reference, r.verbatim
            )?;
        }
        Ok(())
    }
}
