//! Experiment orchestration: configuration, task scheduling with resume,
//! result persistence and box-plot rendering.

pub mod config;
pub mod experiments;
pub mod records;
pub mod reference;
pub mod svg;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentKind, MSpec, OutputFormat};
pub use experiments::{
    run_concentration, run_density_sweep, run_gapscan, run_solve, run_table1, run_table2, ConcentrationReport,
    DensityReport, GapScanReport, SolveReport, Table1Report, Table2Report,
};
pub use records::{read_csv, write_csv, ResultRecord};
pub use svg::{BoxGroup, BoxPanel, FiveNumber};

use crate::error::{Error, Result};

/// Metric recorded for a task whose generation or simulation failed.
pub const FAILED_METRIC: &str = "failed";

/// The metric a box plot of `kind` shows.
pub fn plot_metric(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Table1 | ExperimentKind::Table2 => "prob",
        ExperimentKind::FigQsDensity | ExperimentKind::FigAqsDensity => "success",
        ExperimentKind::Concentration => "coverage_c1",
        ExperimentKind::Gapscan => "gap",
        ExperimentKind::Solve => "steps_used",
    }
}

fn group_label(kind: ExperimentKind, n: usize, m: usize) -> String {
    match kind {
        ExperimentKind::FigAqsDensity => format!("c={}", m as f64 / n as f64),
        ExperimentKind::FigQsDensity => format!("m={}n²", m as f64 / (n * n) as f64),
        _ => format!("m={m}"),
    }
}

/// Box-plot panels of `metric`: one per n, one box per clause count.
pub fn panels_from_records(records: &[ResultRecord], metric: &str) -> Vec<BoxPanel> {
    let mut cells: BTreeMap<usize, BTreeMap<usize, (ExperimentKind, Vec<f64>)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.metric == metric) {
        cells.entry(r.n).or_default().entry(r.m).or_insert_with(|| (r.experiment, Vec::new())).1.push(r.value);
    }
    cells
        .into_iter()
        .map(|(n, by_m)| BoxPanel {
            title: format!("n = {n}"),
            groups: by_m
                .into_iter()
                .filter_map(|(m, (kind, values))| {
                    FiveNumber::from_values(&values).map(|summary| BoxGroup { label: group_label(kind, n, m), summary })
                })
                .collect(),
        })
        .collect()
}

/// Writes `records` to `<out_dir>/<stem>.<ext>` for every format and returns
/// the paths. Nothing is written when the record set (or, for SVG, the plotted
/// metric) is empty.
pub fn emit_outputs(
    records: &[ResultRecord],
    formats: &[OutputFormat],
    out_dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to write".into()));
    }
    let csv_text = records::records_to_csv(records)?;
    let svg_text = if formats.contains(&OutputFormat::Svg) {
        let kind = records[0].experiment;
        let metric = plot_metric(kind);
        let panels = panels_from_records(records, metric);
        if panels.is_empty() {
            return Err(Error::InvalidParameter(format!("no {metric:?} records to plot")));
        }
        let (lo, hi) = records
            .iter()
            .filter(|r| r.metric == metric)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.value), b.max(r.value)));
        let range = if lo >= 0.0 && hi <= 1.0 {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        };
        Some(svg::render_box_plot(&format!("{kind}: {metric}"), metric, &panels, range)?)
    } else {
        None
    };
    std::fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    for &f in formats {
        let path = out_dir.join(format!("{stem}.{}", f.extension()));
        match f {
            OutputFormat::Csv => std::fs::write(&path, &csv_text)?,
            OutputFormat::Json => records::write_json(records, &path)?,
            OutputFormat::Svg => std::fs::write(&path, svg_text.as_deref().expect("rendered above"))?,
        }
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: usize, m: usize, i: usize, v: f64) -> ResultRecord {
        ResultRecord {
            experiment: ExperimentKind::FigAqsDensity,
            n,
            k: 3,
            m,
            seed: i as u64,
            instance: i,
            metric: "success".into(),
            value: v,
            wall_time_s: None,
        }
    }

    #[test]
    fn empty_record_set_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let all = [OutputFormat::Csv, OutputFormat::Json, OutputFormat::Svg];
        assert!(emit_outputs(&[], &all, dir.path(), "x").is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn all_formats_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let recs: Vec<ResultRecord> =
            (0..6).map(|i| rec(16 + 2 * (i % 2), 64 + 16 * (i / 3), i, i as f64 / 10.0)).collect();
        let all = [OutputFormat::Csv, OutputFormat::Json, OutputFormat::Svg];
        let paths = emit_outputs(&recs, &all, dir.path(), "sweep").unwrap();
        assert_eq!(paths.len(), 3);
        assert_eq!(read_csv(&paths[0]).unwrap(), recs);
        assert_eq!(records::read_json(&paths[1]).unwrap(), recs);
        let svg = std::fs::read_to_string(&paths[2]).unwrap();
        assert!(svg.contains("viewBox") && svg.contains("c=4") && svg.contains("n = 18"));
    }

    #[test]
    fn panels_group_by_n_then_m() {
        let recs = vec![rec(12, 144, 0, 0.2), rec(12, 144, 1, 0.4), rec(12, 288, 0, 0.9), rec(14, 196, 0, 0.5)];
        let panels = panels_from_records(&recs, "success");
        assert_eq!(panels.len(), 2);
        assert_eq!(panels[0].groups.len(), 2);
        assert!((panels[0].groups[0].summary.median - 0.3).abs() < 1e-15);
    }
}
