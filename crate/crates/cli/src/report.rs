//! Human-readable reports, plot-data CSV files and JSON summaries.

use std::fmt::Write as _;

use pipeloc_core::eval::{ErrorSeries, RunTable, Stats, ZipperingReport};
use serde::Serialize;

pub const INCHES_PER_FOOT: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatsJson {
    pub max_in: f64,
    pub mean_in: f64,
    pub var_in2: f64,
    pub std_in: f64,
}

impl From<Stats> for StatsJson {
    fn from(s: Stats) -> Self {
        Self { max_in: s.max, mean_in: s.mean, var_in2: s.var, std_in: s.std }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReportJson {
    pub samples: usize,
    pub e1: StatsJson,
    pub blocks: usize,
    pub e2: Option<StatsJson>,
}

#[derive(Debug, Serialize)]
pub struct TableJson {
    pub runs: Vec<StatsJson>,
    pub max: StatsJson,
    pub ave: StatsJson,
}

impl From<&RunTable> for TableJson {
    fn from(t: &RunTable) -> Self {
        Self { runs: t.rows.iter().map(|&s| s.into()).collect(), max: t.max.into(), ave: t.ave.into() }
    }
}

#[derive(Debug, Serialize)]
pub struct BatchJson {
    pub first_seed: u64,
    pub seeds: Vec<u64>,
    pub e1: TableJson,
    pub e2: TableJson,
}

fn stats_block(out: &mut String, name: &str, s: &Stats) {
    let f = INCHES_PER_FOOT;
    let _ = writeln!(out, "{:<12}{:>14}{:>14}", "", "inch", "foot");
    let _ = writeln!(out, "{:<12}{:>14.4}{:>14.4}", format!("Max({name})"), s.max, s.max / f);
    let _ = writeln!(out, "{:<12}{:>14.4}{:>14.4}", format!("Mean({name})"), s.mean, s.mean / f);
    let _ = writeln!(out, "{:<12}{:>14.6}{:>14.6}", format!("Var({name})"), s.var, s.var / (f * f));
    let _ = writeln!(out, "{:<12}{:>14.4}{:>14.4}", format!("Std({name})"), s.std, s.std / f);
}

pub fn render_run_report(e1: &ErrorSeries, e2: Option<&ZipperingReport>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Ground-truth error E1 over {} samples", e1.values.len());
    stats_block(&mut out, "E1", &e1.stats);
    if let Some(z) = e2 {
        let _ = writeln!(out);
        let _ = writeln!(out, "Zippering error |E2| over {} blocks", z.rows.len());
        stats_block(&mut out, "E2", &z.stats);
    }
    out
}

/// Per-run table with `Max.` and `Ave.` rows, values in inches.
pub fn render_table(title: &str, name: &str, table: &RunTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{title} (inch)");
    let _ = writeln!(
        out,
        "{:<10}{:>12}{:>12}{:>12}{:>12}",
        "Test Run",
        format!("Max({name})"),
        format!("Mean({name})"),
        format!("Var({name})"),
        format!("Std({name})")
    );
    let mut row = |label: String, s: &Stats| {
        let _ = writeln!(out, "{label:<10}{:>12.4}{:>12.4}{:>12.4}{:>12.4}", s.max, s.mean, s.var, s.std);
    };
    for (i, s) in table.rows.iter().enumerate() {
        row((i + 1).to_string(), s);
    }
    row("Max.".into(), &table.max);
    row("Ave.".into(), &table.ave);
    out
}

pub fn render_e1_csv(times: &[f64], e1: &ErrorSeries) -> String {
    let mut out = String::from("t_s,e1_in\n");
    for (t, e) in times.iter().zip(&e1.values) {
        let _ = writeln!(out, "{t:.6},{e:.6}");
    }
    out
}

pub fn render_e2_csv(report: &ZipperingReport) -> String {
    let mut out = String::from("block_id,forward_loc_in,backward_loc_in,e2_in\n");
    for r in &report.rows {
        let _ = writeln!(out, "{},{:.6},{:.6},{:.6}", r.block_id, r.forward_loc, r.backward_loc, r.e2);
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use pipeloc_core::eval::summarize_runs;

    #[test]
    fn table_has_summary_rows() {
        let runs = [
            Stats { max: 1.0, mean: 0.1, var: 0.01, std: 0.1 },
            Stats { max: 2.0, mean: 0.3, var: 0.03, std: 0.2 },
        ];
        let text = render_table("Ground-truth error", "E1", &summarize_runs(&runs).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[4].starts_with("Max.") && lines[4].contains("2.0000"));
        assert!(lines[5].starts_with("Ave.") && lines[5].contains("1.5000") && lines[5].contains("0.2000"));
    }

    #[test]
    fn report_shows_feet() {
        let e1 = ErrorSeries::new(vec![12.0, 24.0]);
        let text = render_run_report(&e1, None);
        assert!(text.contains("24.0000") && text.contains("2.0000"), "{text}");
    }
}
