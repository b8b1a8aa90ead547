use std::collections::BTreeMap;
use std::io;

use serde::Serialize;

use super::{BoundResult, TheoremId};
use crate::json::format_f64;

/// How far a violated check misses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    /// Beyond the mathematical margin: the inequality itself fails.
    Mathematical,
    /// Between `tol_verify` and the mathematical margin: likely rounding.
    NumericalSuspect,
}

/// A (theorem, subject, draw) combination excluded because a premise fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skip {
    pub theorem: TheoremId,
    pub instance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draw: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TheoremSummary {
    pub checked: usize,
    pub held: usize,
    pub violated: usize,
    pub skipped: usize,
    pub suspect: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub checked: usize,
    pub held: usize,
    pub violated: usize,
    /// Violations among the suspect corollaries; these never fail a run.
    pub suspect_violations: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub tol_verify: f64,
    pub results: Vec<BoundResult>,
    pub skipped: Vec<Skip>,
    pub summary: BTreeMap<TheoremId, TheoremSummary>,
    pub totals: Totals,
    pub violations: Vec<BoundResult>,
}

impl VerificationReport {
    /// Builds counts and the violation list from sorted results.
    pub fn assemble(seed: u64, tol_verify: f64, results: Vec<BoundResult>, skipped: Vec<Skip>) -> Self {
        let mut summary: BTreeMap<TheoremId, TheoremSummary> = BTreeMap::new();
        let mut totals = Totals::default();
        for r in &results {
            let s = summary.entry(r.theorem).or_default();
            s.suspect = r.suspect;
            s.checked += 1;
            totals.checked += 1;
            if r.holds {
                s.held += 1;
                totals.held += 1;
            } else {
                s.violated += 1;
                if r.suspect {
                    totals.suspect_violations += 1;
                } else {
                    totals.violated += 1;
                }
            }
        }
        for k in &skipped {
            let s = summary.entry(k.theorem).or_default();
            s.suspect = k.theorem.is_suspect();
            s.skipped += 1;
            totals.skipped += 1;
        }
        let violations = results.iter().filter(|r| !r.holds).cloned().collect();
        VerificationReport { seed, tol_verify, results, skipped, summary, totals, violations }
    }

    /// Violations that count against the run (suspect corollaries excluded).
    pub fn failing(&self) -> impl Iterator<Item = &BoundResult> {
        self.violations.iter().filter(|r| !r.suspect)
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string_pretty(self).expect("report serializes")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

/// Writes one CSV row per result with the same fields as the JSON report.
pub fn write_csv<W: io::Write>(report: &VerificationReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "theorem", "instance", "draw", "a", "b", "x", "M", "c", "p", "q", "lhs", "rhs", "margin", "holds", "suspect",
        "severity",
    ])?;
    for r in &report.results {
        let p = &r.params;
        let severity = match r.severity {
            None => "",
            Some(Severity::Mathematical) => "mathematical",
            Some(Severity::NumericalSuspect) => "numerical-suspect",
        };
        w.write_record([
            r.theorem.name().to_string(),
            r.instance.clone(),
            r.draw.to_string(),
            format_f64(p.a),
            format_f64(p.b),
            opt(p.x),
            opt(p.m),
            opt(p.c),
            opt(p.p),
            opt(p.q),
            format_f64(r.lhs),
            format_f64(r.rhs),
            format_f64(r.margin),
            r.holds.to_string(),
            r.suspect.to_string(),
            severity.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
