//! On-disk formats: JSON schemas for point clouds, scenario certificates,
//! search results, and transition reports, plus the CSV tables. Writers and
//! readers are paired here so everything the tool emits can be re-read by
//! the tool itself (and by the test suite).

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use multikrum_core::adversarial::{Scenario, SearchResult};
use multikrum_core::aggregators::AggregationParams;
use multikrum_core::bounds::TransitionReport;
use multikrum_core::cloud::{IndexSubset, PointCloud};

use crate::{io_error, CliError};

/// Column order for the per-m bound table. The first ten columns are the
/// fixed analytic curves; `config_oracle` appends the numerically evaluated
/// three-cluster configuration lower curve (empty outside n > 3f, f ≥ 1).
pub const BOUNDS_CSV_HEADER: &str =
    "m,upper_thm1,kappa_const,kappa_dec,kappa_a,kappa_b,universal_lower,krum_lower,nf_lower,appendix_R,config_oracle";

/// Column order for the transition sweep over (ratio, n) pairs.
pub const TRANSITION_CSV_HEADER: &str =
    "ratio,n,f,m_dagger_real,m_dagger_int,m_over_n,bracket_low_over_n,bracket_high_over_n,reference";

/// Shortest decimal string that parses back to exactly `v`.
pub fn format_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes `bytes` to `path` atomically: temp file in the same directory,
/// then rename. Readers never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

/// Serializes as pretty JSON with a trailing newline (stable key order:
/// struct declaration order).
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// JSON schemas
// ---------------------------------------------------------------------------

/// Input format for `aggregate`: `{"points": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloudFile {
    pub points: Vec<Vec<f64>>,
}

pub fn load_point_cloud(path: &Path) -> Result<PointCloud, CliError> {
    let text = read_to_string(path)?;
    let file: PointCloudFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    PointCloud::from_rows(&file.points)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Scenario certificate: a point cloud with its honest set and the
/// aggregation parameters it was evaluated under. `honest` and `points`
/// are 0-based and row-major respectively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    pub epsilon: f64,
    pub n: usize,
    pub f: usize,
    pub m: usize,
    pub honest: Vec<usize>,
    pub points: Vec<Vec<f64>>,
}

impl ScenarioFile {
    pub fn from_scenario(s: &Scenario) -> Self {
        ScenarioFile {
            name: s.name.clone(),
            epsilon: s.epsilon,
            n: s.params.n,
            f: s.params.f,
            m: s.params.m,
            honest: s.honest.as_slice().to_vec(),
            points: s.cloud.rows().map(<[f64]>::to_vec).collect(),
        }
    }

    /// Revalidates everything through the library constructors, so a
    /// hand-edited file gets the same diagnostics as API misuse.
    pub fn into_scenario(self) -> Result<Scenario, CliError> {
        let params = AggregationParams::new(self.n, self.f, self.m)?;
        let cloud = PointCloud::from_rows(&self.points)?;
        let honest = IndexSubset::new(self.honest)?;
        Scenario::new(self.name, self.epsilon, params, honest, cloud).map_err(Into::into)
    }
}

/// Search outcome: the scalars of record plus the replayable certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResultFile {
    pub seed: u64,
    pub best_ratio: f64,
    pub upper_bound: f64,
    pub restart_of_best: usize,
    pub evaluations: u64,
    pub scenario: ScenarioFile,
}

impl SearchResultFile {
    pub fn from_result(r: &SearchResult) -> Self {
        SearchResultFile {
            seed: r.seed,
            best_ratio: r.best.ratio,
            upper_bound: r.upper_bound,
            restart_of_best: r.restart_of_best,
            evaluations: r.evaluations,
            scenario: ScenarioFile::from_scenario(&r.best_scenario),
        }
    }
}

pub fn load_search_result(path: &Path) -> Result<SearchResultFile, CliError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Single-pair transition report; `m_dagger_int` is null when no integer
/// m ≤ n−f crosses below the constant-regime level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub n: usize,
    pub f: usize,
    pub m_dagger_real: f64,
    pub m_dagger_int: Option<usize>,
    pub bracket_low: f64,
    pub bracket_high: f64,
}

impl TransitionJson {
    pub fn from_report(r: &TransitionReport) -> Self {
        TransitionJson {
            n: r.n,
            f: r.f,
            m_dagger_real: r.m_dagger_real,
            m_dagger_int: r.m_dagger_int,
            bracket_low: r.bracket_low,
            bracket_high: r.bracket_high,
        }
    }
}

/// Output of `aggregate`, written to standard output. `selected` lists the
/// 0-based chosen indices for selection rules and is empty for rules that
/// average or interpolate (`m` is 0 there as well).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateOutput {
    pub rule: String,
    pub f: usize,
    pub m: usize,
    pub selected: Vec<usize>,
    pub aggregate: Vec<f64>,
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// A parsed CSV table; fields are kept as raw strings so absent values
/// (empty fields) stay distinguishable from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn column_index(&self, name: &str) -> Result<usize, CliError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::usage(format!("column {name:?} not found in CSV header")))
    }

    /// Column by header name, parsing each field as f64; empty fields
    /// become None.
    pub fn column_f64(&self, name: &str) -> Result<Vec<Option<f64>>, CliError> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(row, fields)| {
                let field = &fields[idx];
                if field.is_empty() {
                    Ok(None)
                } else {
                    field.parse::<f64>().map(Some).map_err(|e| {
                        CliError::usage(format!(
                            "row {}, column {name:?}: cannot parse {field:?} as a number: {e}",
                            row + 1
                        ))
                    })
                }
            })
            .collect()
    }
}

/// Renders a CSV with Unix line endings and a trailing newline. Fields are
/// plain (no quoting); every value this tool writes is a number, an
/// integer, or empty.
pub fn render_csv(header: &str, rows: &[Vec<String>]) -> String {
    let width = header.split(',').count();
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), width, "CSV row width must match the header");
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses a CSV produced by `render_csv`: first line is the header, fields
/// split on commas, rows must match the header width.
pub fn parse_csv(text: &str) -> Result<Csv, CliError> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::usage("empty CSV: missing header line".to_string()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        if fields.len() != header.len() {
            return Err(CliError::usage(format!(
                "CSV line {}: {} fields, header has {}",
                lineno + 2,
                fields.len(),
                header.len()
            )));
        }
        rows.push(fields);
    }
    Ok(Csv { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use multikrum_core::adversarial::scenario_three_cluster;

    #[test]
    fn float_formatting_round_trips() {
        for &v in &[98.0 / 82.0, 0.1, 6.75, 1e-12, -3.5, 0.0, 2.617442275510091] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s} should round-trip");
        }
    }

    #[test]
    fn csv_round_trips_and_reads_by_name() {
        let rows = vec![
            vec!["1".to_string(), "0.5".to_string(), String::new()],
            vec!["2".to_string(), "0.25".to_string(), "7".to_string()],
        ];
        let text = render_csv("m,value,extra", &rows);
        let csv = parse_csv(&text).unwrap();
        assert_eq!(csv.header, vec!["m", "value", "extra"]);
        assert_eq!(csv.rows, rows);
        assert_eq!(csv.column_f64("value").unwrap(), vec![Some(0.5), Some(0.25)]);
        assert_eq!(csv.column_f64("extra").unwrap(), vec![None, Some(7.0)]);
        assert!(csv.column_f64("missing").is_err());
    }

    #[test]
    fn csv_rejects_ragged_rows_and_bad_numbers() {
        let err = parse_csv("a,b\n1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let csv = parse_csv("a,b\n1,x\n").unwrap();
        let err = csv.column_f64("b").unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn scenario_file_round_trips_through_the_library() {
        let scenario = scenario_three_cluster(7, 2, 1e-6).unwrap();
        let file = ScenarioFile::from_scenario(&scenario);
        assert_eq!(file.n, 7);
        assert_eq!(file.f, 2);
        assert_eq!(file.m, 5);
        assert_eq!(file.honest.len(), 5);
        let text = to_json_pretty(&file);
        let parsed: ScenarioFile = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, file);
        let back = parsed.into_scenario().unwrap();
        assert_eq!(back, scenario);
    }

    #[test]
    fn scenario_file_revalidates_fields() {
        let scenario = scenario_three_cluster(7, 2, 1e-6).unwrap();
        let mut file = ScenarioFile::from_scenario(&scenario);
        file.honest.pop();
        let err = file.into_scenario().unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("honest"), "{err}");
    }

    #[test]
    fn atomic_write_creates_and_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        atomic_write(&path, b"first\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "first\n");
        atomic_write(&path, b"second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        // No stray temp files left behind.
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn point_cloud_loader_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("points.json");
        std::fs::write(&path, "{\"points\": [[0.0], [\"x\"]]}").unwrap();
        let err = load_point_cloud(&path).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        std::fs::write(&path, "{\"points\": [[0.0], [1.0, 2.0]]}").unwrap();
        let err = load_point_cloud(&path).unwrap_err();
        assert!(err.to_string().contains('1'), "diagnostic names the row: {err}");
    }
}
