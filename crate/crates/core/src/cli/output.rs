//! Summary, CDF, record, and manifest files.
//!
//! Numbers are decimal seconds with six fractional digits. Column order is
//! fixed; JSON files hold one object per line with the same keys in the
//! same order as the CSV header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ConfigPatch;
use super::sweep::{reduction_of_means, rendered, Calibration, SweepResult};
use crate::engine::{RequestRecord, SimConfig};
use crate::error::ConfigError;
use crate::metrics::REPORTED;

pub const SUMMARY_HEADER: &str =
    "scenario,sweep_param,sweep_value,pool_size,percentile,mean_s,std_s,reduction_vs_nopool";
pub const RECORDS_HEADER: &str = "trial,service_id,req_index,arrival_s,response_s,start_kind";
pub const CDF_HEADER: &str = "condition,value_s,fraction";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

/// One output cell.
enum Cell {
    Text(String),
    Int(u64),
    /// Already rendered with six fractional digits.
    Fixed(String),
    Null,
}

fn fixed(x: f64) -> Cell {
    Cell::Fixed(format!("{:.6}", rendered(x)))
}

/// Collects rows and renders them as CSV or JSON.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: &'static str) -> Self {
        Table {
            columns: header.split(',').collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|c| match c {
                            Cell::Text(s) | Cell::Fixed(s) => s.clone(),
                            Cell::Int(v) => v.to_string(),
                            Cell::Null => String::new(),
                        })
                        .collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            Format::Json => {
                out.push_str("[\n");
                for (i, row) in self.rows.iter().enumerate() {
                    out.push('{');
                    for (j, (col, cell)) in self.columns.iter().zip(row).enumerate() {
                        if j > 0 {
                            out.push(',');
                        }
                        let value = match cell {
                            Cell::Text(s) => Value::String(s.clone()).to_string(),
                            Cell::Int(v) => v.to_string(),
                            Cell::Fixed(s) => s.clone(),
                            Cell::Null => "null".to_string(),
                        };
                        let _ = write!(out, "{}:{}", Value::String((*col).to_string()), value);
                    }
                    out.push('}');
                    if i + 1 < self.rows.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str("]\n");
            }
        }
        out
    }
}

fn summary_table(result: &SweepResult) -> Table {
    let mut table = Table::new(SUMMARY_HEADER);
    let plan = &result.plan;
    for c in &result.conditions {
        let baseline = result.baseline_for(c);
        for (p, label) in REPORTED {
            let agg = c.report.aggregate.get(p);
            let r = reduction_of_means(baseline.report.aggregate.get(p).mean, agg.mean);
            table.push(vec![
                Cell::Text(plan.scenario.to_string()),
                Cell::Text(plan.axis.as_str().to_string()),
                Cell::Int(c.sweep_value as u64),
                Cell::Int(c.pool_size as u64),
                Cell::Text(label.to_string()),
                fixed(agg.mean),
                fixed(agg.std),
                r.map_or(Cell::Null, fixed),
            ]);
        }
    }
    table
}

fn cdf_table(result: &SweepResult) -> Table {
    let mut table = Table::new(CDF_HEADER);
    for c in &result.conditions {
        let label = c.label();
        for &(value, fraction) in &c.sample_cdf.points {
            table.push(vec![
                Cell::Text(label.clone()),
                fixed(value),
                fixed(fraction),
            ]);
        }
    }
    table
}

fn records_table(trials: &[Vec<RequestRecord>]) -> Table {
    let mut table = Table::new(RECORDS_HEADER);
    for (trial, records) in trials.iter().enumerate() {
        for r in records {
            table.push(vec![
                Cell::Int(trial as u64),
                Cell::Int(r.service_id as u64),
                Cell::Int(r.req_index as u64),
                Cell::Fixed(r.arrival.to_string()),
                Cell::Fixed(r.response.to_string()),
                Cell::Text(r.start_kind.as_str().to_string()),
            ]);
        }
    }
    table
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub scenario: String,
    pub base_seed: u64,
    pub format: Format,
    pub dump_records: bool,
    /// Flat configuration document that reproduces this run.
    pub config: Value,
    /// Resolved configuration of every simulated condition.
    pub conditions: Vec<SimConfig>,
    /// Output files, relative to the manifest's directory.
    pub outputs: Vec<String>,
    pub calibration: Vec<Calibration>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn config_patch(&self) -> Result<ConfigPatch, ConfigError> {
        match &self.config {
            Value::Object(map) => ConfigPatch::from_map(map),
            _ => Err(ConfigError::Parse(
                "manifest `config` must be an object".into(),
            )),
        }
    }
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, OutputError> {
    fs::write(&path, contents).map_err(|source| OutputError {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes summary, CDF, optional records, and the manifest into `dir`.
/// Returns the paths written, manifest last.
pub fn emit_outputs(
    result: &SweepResult,
    format: Format,
    dir: &Path,
) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError {
        path: dir.to_path_buf(),
        source,
    })?;
    let ext = format.extension();
    let mut names = vec![format!("summary.{ext}"), format!("cdf.{ext}")];
    let mut written = vec![
        write(dir.join(&names[0]), &summary_table(result).render(format))?,
        write(dir.join(&names[1]), &cdf_table(result).render(format))?,
    ];
    let dump_records = result.conditions.iter().any(|c| c.records.is_some());
    for c in &result.conditions {
        if let Some(records) = &c.records {
            let name = format!("records-{}.{ext}", c.label());
            written.push(write(
                dir.join(&name),
                &records_table(records).render(format),
            )?);
            names.push(name);
        }
    }

    let plan = &result.plan;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: plan.scenario.to_string(),
        base_seed: plan.base.base_seed,
        format,
        dump_records,
        config: plan.resolved.to_json(),
        conditions: result.conditions.iter().map(|c| c.config.clone()).collect(),
        outputs: names,
        calibration: result.calibration(),
        notes: vec![format!(
            "Pareto scale {} s is a free parameter; absolute percentiles and the calibration \
             reductions depend on it.",
            plan.base.arrival.scale
        )],
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    written.push(write(dir.join(MANIFEST_FILE), &json)?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::ConfigPatch;
    use crate::cli::preset::{RunPlan, Scenario};
    use crate::cli::sweep::run_sweep;

    fn result(dump: bool) -> SweepResult {
        let plan = RunPlan::resolve(
            None,
            &ConfigPatch {
                scenario: Some(Scenario::Short),
                trials: Some(2),
                requests_per_service: Some(50),
                ..Default::default()
            },
        )
        .unwrap();
        run_sweep(&plan, dump, Some(1)).unwrap()
    }

    #[test]
    fn csv_headers_are_fixed() {
        let dir = tempfile::tempdir().unwrap();
        emit_outputs(&result(true), Format::Csv, dir.path()).unwrap();
        let first = |name: &str| {
            fs::read_to_string(dir.path().join(name))
                .unwrap()
                .lines()
                .next()
                .unwrap()
                .to_string()
        };
        assert_eq!(first("summary.csv"), SUMMARY_HEADER);
        assert_eq!(first("cdf.csv"), CDF_HEADER);
        assert_eq!(first("records-svc5-pool1.csv"), RECORDS_HEADER);
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(summary.ends_with('\n'));
        assert_eq!(summary.lines().count(), 1 + 2 * 4);
    }

    #[test]
    fn json_rows_parse_and_keep_column_order() {
        let dir = tempfile::tempdir().unwrap();
        emit_outputs(&result(false), Format::Json, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("summary.json")).unwrap();
        let rows: Vec<Value> = serde_json::from_str(&text).unwrap();
        assert_eq!(rows.len(), 8);
        let first_line = text.lines().nth(1).unwrap();
        let keys: Vec<&str> = SUMMARY_HEADER.split(',').collect();
        let mut at = 0;
        for k in keys {
            let pos = first_line[at..].find(&format!("\"{k}\"")).unwrap();
            at += pos;
        }
        assert!(first_line.contains("\"mean_s\":"));
        assert!(!dir.path().join("records-svc5-pool0.json").exists());
    }

    #[test]
    fn manifest_round_trips_to_the_same_plan() {
        let dir = tempfile::tempdir().unwrap();
        let res = result(false);
        emit_outputs(&res, Format::Csv, dir.path()).unwrap();
        let manifest = RunManifest::load(&dir.path().join(MANIFEST_FILE)).unwrap();
        let plan = RunPlan::from_resolved(manifest.config_patch().unwrap()).unwrap();
        assert_eq!(plan, res.plan);
        assert_eq!(manifest.outputs, vec!["summary.csv", "cdf.csv"]);
        assert_eq!(manifest.conditions.len(), 2);
    }

    #[test]
    fn unwritable_directory_reports_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_outputs(&result(false), Format::Csv, &blocker.join("out")).unwrap_err();
        assert!(err.to_string().contains("file"));
    }
}
