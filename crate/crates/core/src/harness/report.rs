use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::harness::eval::{se_count, EvalResult};
use crate::harness::method::MethodSpec;
use crate::mlr::{FeatureScope, WeightMatrix};

/// Version of the machine report layout.
pub const REPORT_VERSION: u32 = 1;

pub const TOOL_VERSION: &str = concat!("stackgen ", env!("CARGO_PKG_VERSION"));

const NOTES: [&str; 2] = [
    "se is the sample standard deviation of the per-fold or per-trial error rates divided by the square root of their count",
    "vote breaks ties by the larger summed class probability, then by the lower class index",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub name: String,
    pub instances: usize,
    /// Size of the separate test set, for synthetic trials.
    pub test_instances: Option<usize>,
    pub attributes: usize,
    pub classes: usize,
}

impl DatasetDescriptor {
    pub fn of(name: impl Into<String>, dataset: &Dataset) -> Self {
        DatasetDescriptor {
            name: name.into(),
            instances: dataset.len(),
            test_instances: None,
            attributes: dataset.schema().num_attributes(),
            classes: dataset.num_classes(),
        }
    }
}

/// MLR coefficients of one stacked method, with column names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightDump {
    pub method: String,
    pub models: Vec<String>,
    pub class_values: Vec<String>,
    pub weights: WeightMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub tool: String,
    pub dataset: DatasetDescriptor,
    pub results: Vec<EvalResult>,
    pub weights: Vec<WeightDump>,
    /// Standard errors between BestCV and the worst level-0 learner.
    pub se_count: Option<f64>,
    /// Every setting the run depended on.
    pub config: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(dataset: DatasetDescriptor, config: BTreeMap<String, String>) -> Self {
        Report {
            version: REPORT_VERSION,
            tool: TOOL_VERSION.into(),
            dataset,
            results: Vec::new(),
            weights: Vec::new(),
            se_count: None,
            config,
            notes: NOTES.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Fills in `se_count` when the results include BestCV (with a nonzero SE)
    /// and at least one level-0 learner.
    pub fn compute_se_count(&mut self) {
        let best = self.results.iter().find(|r| r.method == "bestcv");
        let worst = self
            .results
            .iter()
            .filter(|r| matches!(r.method.parse(), Ok(MethodSpec::Level0(_))))
            .map(|r| r.mean)
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));
        self.se_count = match (best, worst) {
            (Some(b), Some(w)) => se_count(b.mean, w, b.se).ok(),
            _ => None,
        };
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    /// Aligned text, lowest error starred.
    Table,
    /// Versioned JSON.
    Machine,
}

fn row(out: &mut String, cells: &[String], widths: &[usize]) {
    let line: Vec<String> = cells
        .iter()
        .zip(widths)
        .enumerate()
        .map(|(i, (c, &w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
        .collect();
    out.push_str(line.join("  ").trim_end());
    out.push('\n');
}

fn table(out: &mut String, rows: &[Vec<String>]) {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    for r in rows {
        row(out, r, &widths);
    }
}

fn weight_columns(dump: &WeightDump) -> Vec<String> {
    let w = &dump.weights;
    let mut cols = Vec::new();
    if w.intercepts.is_some() {
        cols.push("a0".to_string());
    }
    match w.config.scope {
        FeatureScope::PerClass => cols.extend(dump.models.iter().cloned()),
        FeatureScope::Full => {
            for m in &dump.models {
                cols.extend(dump.class_values.iter().map(|c| format!("{m}[{c}]")));
            }
        }
    }
    cols
}

fn render_table(report: &Report) -> String {
    let mut out = String::new();
    let d = &report.dataset;
    let _ = write!(out, "{}: {} instances", d.name, d.instances);
    if let Some(t) = d.test_instances {
        let _ = write!(out, " (test {t})");
    }
    let _ = writeln!(out, ", {} attributes, {} classes", d.attributes, d.classes);
    if let Some(r) = report.results.first() {
        let _ = writeln!(out, "protocol {} with {} runs, seed {}", r.protocol, r.runs, r.seed);
    }
    out.push('\n');

    let min = report.results.iter().map(|r| r.mean).fold(f64::INFINITY, f64::min);
    let mut header = vec!["".to_string()];
    let mut errors = vec!["error %".to_string()];
    let mut ses = vec!["se".to_string()];
    for r in &report.results {
        header.push(r.method.clone());
        let star = if r.mean == min { "*" } else { " " };
        errors.push(format!("{:.1}{star}", r.mean));
        ses.push(format!("{:.1} ", r.se));
    }
    table(&mut out, &[header, errors, ses]);
    if let Some(n) = report.se_count {
        let _ = writeln!(out, "\n#SE {n:.1}");
    }

    for dump in &report.weights {
        let _ = writeln!(out, "\nweights of {}", dump.method);
        let mut rows = vec![std::iter::once("class".to_string()).chain(weight_columns(dump)).collect::<Vec<_>>()];
        for (l, class) in dump.class_values.iter().enumerate() {
            let mut r = vec![class.clone()];
            if let Some(b) = &dump.weights.intercepts {
                r.push(format!("{:.3}", b[l]));
            }
            r.extend(dump.weights.weights[l].iter().map(|w| format!("{w:.3}")));
            rows.push(r);
        }
        table(&mut out, &rows);
    }

    if !report.config.is_empty() {
        out.push_str("\nconfig\n");
        for (k, v) in &report.config {
            let _ = writeln!(out, "  {k} = {v}");
        }
    }
    out.push('\n');
    for note in &report.notes {
        let _ = writeln!(out, "note: {note}");
    }
    let _ = writeln!(out, "{} report version {}", report.tool, report.version);
    out
}

pub fn emit_report(report: &Report, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Table => Ok(render_table(report)),
        ReportFormat::Machine => serde_json::to_string_pretty(report)
            .map(|s| s + "\n")
            .map_err(|e| Error::Serde(e.to_string())),
    }
}

pub fn write_report(path: impl AsRef<Path>, report: &Report, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, emit_report(report, format)?).map_err(|e| Error::io(path, e))
}

/// Reads a machine report, rejecting unknown versions.
pub fn parse_report(text: &str) -> Result<Report> {
    let report: Report = serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
    if report.version != REPORT_VERSION {
        return Err(Error::Serde(format!("unsupported report version {}", report.version)));
    }
    Ok(report)
}
