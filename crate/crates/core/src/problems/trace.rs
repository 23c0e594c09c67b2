use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mm::{IterateRecord, SolveReport};

/// One line of a JSONL trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub x: Vec<usize>,
    pub v: f64,
    pub f: f64,
    pub g: f64,
    pub surrogate: Option<f64>,
    pub accepted: bool,
    pub calls_f: u64,
    pub calls_g: u64,
    pub wall_secs: f64,
    pub note: String,
}

impl From<&IterateRecord> for TraceRecord {
    fn from(r: &IterateRecord) -> Self {
        Self {
            t: r.t,
            x: r.x.0.clone(),
            v: r.v,
            f: r.f,
            g: r.g,
            surrogate: r.surrogate,
            accepted: r.accepted,
            calls_f: r.calls_f,
            calls_g: r.calls_g,
            wall_secs: r.wall_secs,
            note: r.note.clone(),
        }
    }
}

pub fn write_trace<W: Write>(report: &SolveReport, mut out: W) -> Result<()> {
    for r in &report.iterates {
        let line = serde_json::to_string(&TraceRecord::from(r)).expect("trace records always serialise");
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// One row of the CSV summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub algorithm: String,
    pub status: String,
    pub value: f64,
    /// Coordinates joined by spaces.
    pub minimizer: String,
    pub iterations: usize,
    pub accepted_steps: usize,
    pub calls_f: u64,
    pub calls_g: u64,
    pub wall_secs: f64,
    pub lambda: Option<f64>,
    pub predicted_bound: Option<f64>,
    pub bruteforce_min: Option<f64>,
    pub gap: Option<f64>,
}

impl RunSummary {
    pub fn new(problem: impl Into<String>, report: &SolveReport) -> Self {
        let last = report.iterates.last().expect("reports hold the start point");
        let status = serde_json::to_value(report.status).expect("status serialises");
        Self {
            problem: problem.into(),
            algorithm: report.algorithm.to_string(),
            status: status.as_str().unwrap_or_default().to_string(),
            value: report.value,
            minimizer: report.minimizer.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
            iterations: last.t,
            accepted_steps: report.accepted_steps,
            calls_f: last.calls_f,
            calls_g: last.calls_g,
            wall_secs: last.wall_secs,
            lambda: report.lambda,
            predicted_bound: report.predicted_bound.map(|b| b.bound),
            bruteforce_min: None,
            gap: None,
        }
    }

    pub fn with_bruteforce(mut self, min: f64) -> Self {
        self.bruteforce_min = Some(min);
        self.gap = Some(self.value - min);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompositions::DsProblem;
    use crate::lattice::LatticeDomain;
    use crate::mm::{solve, SolveOptions};
    use crate::oracle::Oracle;

    #[test]
    fn trace_lines_round_trip() {
        let d = LatticeDomain::uniform(2, 3).unwrap();
        let p = DsProblem::new(
            Oracle::from_fn(d.clone(), |x| ((x[0] + x[1]) as f64).sqrt()),
            Oracle::from_fn(d, |x| (x[0] + x[1]) as f64),
        )
        .unwrap();
        let report = solve(&p, &SolveOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_trace(&report, &mut buf).unwrap();
        let lines: Vec<TraceRecord> =
            String::from_utf8(buf).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), report.iterates.len());
        let accepted: Vec<&TraceRecord> = lines.iter().filter(|r| r.accepted).collect();
        assert!(accepted.windows(2).all(|w| w[1].v <= w[0].v + 1e-12));
        assert_eq!(accepted.last().unwrap().x, report.minimizer.0);
        assert_eq!(lines.last().unwrap().x, report.minimizer.0);

        let s = RunSummary::new("toy", &report).with_bruteforce(-2.0);
        assert_eq!(s.status, "certified_local_min");
        assert_eq!(s.minimizer, "2 2");
        assert_eq!(s.gap, Some(0.0));
    }
}
