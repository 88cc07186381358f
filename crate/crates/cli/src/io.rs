//! Instance file schemas and solution reports.
//!
//! Instances arrive as JSON objects or, for supersets alone, as CSV. All
//! reports are JSON with solutions sorted canonically so identical inputs
//! produce identical bytes.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use subsetsum::model::{MineStatus, Solution};

/// Subset-sum instance: 1-D is the d=1 degenerate case.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetSumFile {
    pub superset: Vec<Vec<f64>>,
    #[serde(default)]
    pub len: Option<usize>,
    pub target: Vec<f64>,
    pub me: Vec<f64>,
}

/// Joint instance over several supersets with per-superset subset sizes.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultisetFile {
    pub supersets: Vec<Vec<f64>>,
    pub lens: Vec<usize>,
    pub target: Vec<f64>,
    pub me: Vec<f64>,
}

/// 0-1 knapsack instance; `len` restricts the item count when present.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnapsackFile {
    pub costs: Vec<Vec<f64>>,
    pub profits: Vec<f64>,
    pub budgets: Vec<f64>,
    #[serde(default)]
    pub len: Option<usize>,
}

/// Assignment instance: task-major cost and profit matrices.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapFile {
    pub cost: Vec<Vec<f64>>,
    pub profit: Vec<Vec<f64>>,
    pub budgets: Vec<f64>,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Parses a JSON instance file, pointing at the offending line and column
/// when the content is malformed.
pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| {
        anyhow::anyhow!(
            "{}:{}:{}: {}",
            path.display(),
            e.line(),
            e.column(),
            e
        )
    })
}

/// Parses a CSV superset: one row per element, one column per dimension,
/// no header. Errors name the line and field of the first bad cell.
pub fn load_csv_superset(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (field, cell) in line.split(',').enumerate() {
            let v: f64 = cell.trim().parse().with_context(|| {
                format!(
                    "{}:{}: field {}: not a number: {:?}",
                    path.display(),
                    lineno + 1,
                    field + 1,
                    cell.trim()
                )
            })?;
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                bail!(
                    "{}:{}: expected {} fields, found {}",
                    path.display(),
                    lineno + 1,
                    first.len(),
                    row.len()
                );
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{}: no rows", path.display());
    }
    Ok(rows)
}

/// Loads a superset from JSON (object with a `superset` field) or CSV,
/// keyed on the file extension.
pub fn load_superset_auto(path: &Path) -> Result<(Vec<Vec<f64>>, Option<SubsetSumFile>)> {
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        Ok((load_csv_superset(path)?, None))
    } else {
        let f: SubsetSumFile = load_json(path)?;
        Ok((f.superset.clone(), Some(f)))
    }
}

pub fn status_name(s: MineStatus) -> &'static str {
    match s {
        MineStatus::Exhausted => "exhausted",
        MineStatus::Quota => "quota",
        MineStatus::Timeout => "timeout",
    }
}

#[derive(Debug, Serialize)]
pub struct SolutionOut {
    pub indexes: Vec<u32>,
    pub sums: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub status: &'static str,
    pub count: usize,
    pub solutions: Vec<SolutionOut>,
}

/// Canonical subset-sum report: solutions sorted by index vector.
pub fn solve_report(status: MineStatus, solutions: &[Solution]) -> SolveReport {
    let mut out: Vec<SolutionOut> = solutions
        .iter()
        .map(|s| SolutionOut {
            indexes: s.indexes.clone(),
            sums: s.achieved_sum.clone(),
        })
        .collect();
    out.sort_by(|a, b| a.indexes.cmp(&b.indexes));
    SolveReport {
        status: status_name(status),
        count: out.len(),
        solutions: out,
    }
}

/// Subset-sum report for the integerized path; `approximate` is set when
/// rounding to the integer grid lost information, in which case solutions
/// are exact for the integerized instance, not necessarily the original.
#[derive(Debug, Serialize)]
pub struct IntSolveReport {
    pub status: &'static str,
    pub approximate: bool,
    pub count: usize,
    pub solutions: Vec<SolutionOut>,
}

#[derive(Debug, Serialize)]
pub struct MultiSolutionOut {
    pub picks: Vec<Vec<u32>>,
    pub sum: f64,
}

#[derive(Debug, Serialize)]
pub struct MultiReport {
    pub status: &'static str,
    pub count: usize,
    pub solutions: Vec<MultiSolutionOut>,
}

#[derive(Debug, Serialize)]
pub struct KnapsackBestOut {
    pub items: Vec<u32>,
    pub profit: f64,
    pub costs: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct KnapsackReport {
    pub status: &'static str,
    pub proven: bool,
    pub best: Option<KnapsackBestOut>,
}

#[derive(Debug, Serialize)]
pub struct GapBestOut {
    pub assignment: Vec<u32>,
    pub profit: f64,
    pub agent_loads: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct GapReport {
    pub status: &'static str,
    pub proven: bool,
    pub best: Option<GapBestOut>,
}

/// Serializes a report and writes it to `out` or stdout. Always a trailing
/// newline so files are clean to diff.
pub fn emit<T: Serialize>(report: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
