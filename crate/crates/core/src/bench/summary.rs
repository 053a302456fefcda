//! The per-instance summary table and the comparison of two tables.
//!
//! One row per instance with a length and an error column per method, then
//! `Average` and `Median` rows per (topology, size) group. Lengths of runs
//! that failed are written as `NA`; runs that ended above the tolerance are
//! listed in the `flags` column.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Outcome of one (instance, method) run as the table sees it.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Done { length: usize, error: f64, reached: bool },
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub topology: String,
    pub n: usize,
    pub index: usize,
    /// Aligned with the table's method labels.
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryTable {
    pub methods: Vec<String>,
    pub rows: Vec<SummaryRow>,
}

/// Mean and median of a nonempty list.
pub fn mean_median(values: &[usize]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let mean = v.iter().sum::<usize>() as f64 / v.len() as f64;
    let mid = v.len() / 2;
    let median = if v.len() % 2 == 1 {
        v[mid] as f64
    } else {
        (v[mid - 1] + v[mid]) as f64 / 2.0
    };
    Some((mean, median))
}

impl SummaryTable {
    fn header(&self) -> Vec<String> {
        let mut h = vec!["topology".to_string(), "n".into(), "id".into()];
        h.extend(self.methods.iter().map(|m| format!("length_{m}")));
        h.extend(self.methods.iter().map(|m| format!("error_{m}")));
        h.push("flags".into());
        h
    }

    /// Lengths of completed runs of method `j` in one group.
    pub fn group_lengths(&self, topology: &str, n: usize, j: usize) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.topology == topology && r.n == n)
            .filter_map(|r| match r.cells[j] {
                Cell::Done { length, .. } => Some(length),
                Cell::Failed => None,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# summary schema_version={SUMMARY_SCHEMA_VERSION}");
        let _ = writeln!(out, "{}", self.header().join(","));
        for (i, row) in self.rows.iter().enumerate() {
            let mut fields = vec![row.topology.clone(), row.n.to_string(), row.index.to_string()];
            let mut flags = Vec::new();
            for (cell, m) in row.cells.iter().zip(&self.methods) {
                fields.push(match cell {
                    Cell::Done { length, .. } => length.to_string(),
                    Cell::Failed => "NA".into(),
                });
                match cell {
                    Cell::Done { reached: false, .. } => flags.push(format!("{m}:above-tolerance")),
                    Cell::Failed => flags.push(format!("{m}:failed")),
                    _ => {}
                }
            }
            for cell in &row.cells {
                fields.push(match cell {
                    Cell::Done { error, .. } => format!("{error:e}"),
                    Cell::Failed => "NA".into(),
                });
            }
            fields.push(flags.join(";"));
            let _ = writeln!(out, "{}", fields.join(","));

            let last_of_group = self
                .rows
                .get(i + 1)
                .is_none_or(|next| next.topology != row.topology || next.n != row.n);
            if last_of_group {
                for (label, pick) in [("Average", 0usize), ("Median", 1)] {
                    let mut fields = vec![row.topology.clone(), row.n.to_string(), label.to_string()];
                    for j in 0..self.methods.len() {
                        fields.push(match mean_median(&self.group_lengths(&row.topology, row.n, j)) {
                            Some(mm) => format!("{}", if pick == 0 { mm.0 } else { mm.1 }),
                            None => "NA".into(),
                        });
                    }
                    fields.extend(std::iter::repeat_n(String::new(), self.methods.len()));
                    fields.push(String::new());
                    let _ = writeln!(out, "{}", fields.join(","));
                }
            }
        }
        out
    }

    /// Parses a table written by [`SummaryTable::to_csv`]. Aggregate rows
    /// are skipped.
    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let parse = |message: String| Error::Parse {
            path: origin.to_string(),
            message,
        };
        let first = text.lines().next().unwrap_or_default();
        let version = first
            .strip_prefix("# summary schema_version=")
            .ok_or_else(|| parse("line 1: missing `# summary schema_version=` marker".into()))?;
        if version.trim() != SUMMARY_SCHEMA_VERSION.to_string() {
            return Err(Error::Schema {
                path: origin.to_string(),
                found: version.trim().to_string(),
                supported: SUMMARY_SCHEMA_VERSION,
            });
        }
        let body = &text[first.len()..];
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(body.trim_start_matches(['\r', '\n']).as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| parse(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let methods: Vec<String> = header
            .iter()
            .filter_map(|h| h.strip_prefix("length_").map(str::to_string))
            .collect();
        let k = methods.len();
        let expected = SummaryTable {
            methods: methods.clone(),
            rows: Vec::new(),
        }
        .header();
        if header != expected {
            return Err(parse(format!("line 2: unexpected header {:?}", header.join(","))));
        }
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| parse(e.to_string()))?;
            let at = |what: &str| parse(format!("line {}: bad {what}", line + 3));
            let Ok(index) = record[2].parse::<usize>() else {
                continue;
            };
            let n: usize = record[1].parse().map_err(|_| at("n"))?;
            let flags = &record[3 + 2 * k];
            let mut cells = Vec::with_capacity(k);
            for (j, m) in methods.iter().enumerate() {
                let l = &record[3 + j];
                let e = &record[3 + k + j];
                cells.push(if l == "NA" {
                    Cell::Failed
                } else {
                    Cell::Done {
                        length: l.parse().map_err(|_| at(&format!("length_{m}")))?,
                        error: e.parse().map_err(|_| at(&format!("error_{m}")))?,
                        reached: !flags.split(';').any(|f| f == format!("{m}:above-tolerance")),
                    }
                });
            }
            rows.push(SummaryRow {
                topology: record[0].to_string(),
                n,
                index,
                cells,
            });
        }
        Ok(SummaryTable { methods, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, &path.display().to_string())
    }
}

/// What counts as a regression when comparing tables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareTolerance {
    /// Allowed increase in decomposition length.
    pub length: usize,
    /// Relative slack on errors when a run stays above the tolerance.
    pub error_rel: f64,
}

impl Default for CompareTolerance {
    fn default() -> Self {
        CompareTolerance {
            length: 0,
            error_rel: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiffStatus {
    Improved,
    Changed,
    Regressed,
    NotComparable,
}

impl DiffStatus {
    pub fn name(self) -> &'static str {
        match self {
            DiffStatus::Improved => "improved",
            DiffStatus::Changed => "changed",
            DiffStatus::Regressed => "regressed",
            DiffStatus::NotComparable => "not comparable",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffRow {
    pub topology: String,
    pub n: usize,
    pub index: usize,
    pub method: String,
    pub before: Option<Cell>,
    pub after: Option<Cell>,
    pub status: DiffStatus,
}

fn cell_text(c: &Option<Cell>) -> (String, String) {
    match c {
        Some(Cell::Done { length, error, .. }) => (length.to_string(), format!("{error:e}")),
        Some(Cell::Failed) => ("NA".into(), "NA".into()),
        None => ("-".into(), "-".into()),
    }
}

/// Aligns two tables by (topology, size, index, method) and lists every
/// entry that differs.
pub fn compare(before: &SummaryTable, after: &SummaryTable, tol: &CompareTolerance) -> Vec<DiffRow> {
    type Key = (String, usize, usize);
    let index = |t: &SummaryTable| -> BTreeMap<Key, Vec<Cell>> {
        t.rows
            .iter()
            .map(|r| ((r.topology.clone(), r.n, r.index), r.cells.clone()))
            .collect()
    };
    let (a, b) = (index(before), index(after));
    let mut methods: Vec<String> = before.methods.clone();
    for m in &after.methods {
        if !methods.contains(m) {
            methods.push(m.clone());
        }
    }
    let keys: std::collections::BTreeSet<&Key> = a.keys().chain(b.keys()).collect();
    let mut out = Vec::new();
    for key in keys {
        for m in &methods {
            let get = |t: &SummaryTable, map: &BTreeMap<Key, Vec<Cell>>| {
                let j = t.methods.iter().position(|x| x == m)?;
                map.get(key).map(|cells| cells[j].clone())
            };
            let (x, y) = (get(before, &a), get(after, &b));
            let status = match (&x, &y) {
                (None, _) | (_, None) => Some(DiffStatus::NotComparable),
                (Some(p), Some(q)) if p == q => None,
                (Some(Cell::Done { .. }), Some(Cell::Failed)) => Some(DiffStatus::Regressed),
                (Some(Cell::Failed), Some(Cell::Done { .. })) => Some(DiffStatus::Improved),
                (
                    Some(Cell::Done { length: l0, error: e0, reached: r0 }),
                    Some(Cell::Done { length: l1, error: e1, reached: r1 }),
                ) => {
                    if *l1 > l0 + tol.length || (*r0 && !*r1) {
                        Some(DiffStatus::Regressed)
                    } else if l1 < l0 || (!*r0 && *r1) {
                        Some(DiffStatus::Improved)
                    } else if *r0 && *r1 {
                        None
                    } else if *e1 > e0 * (1.0 + tol.error_rel) {
                        Some(DiffStatus::Regressed)
                    } else if *e1 < e0 * (1.0 - tol.error_rel) {
                        Some(DiffStatus::Improved)
                    } else {
                        None
                    }
                }
                _ => Some(DiffStatus::Changed),
            };
            if let Some(status) = status {
                out.push(DiffRow {
                    topology: key.0.clone(),
                    n: key.1,
                    index: key.2,
                    method: m.clone(),
                    before: x,
                    after: y,
                    status,
                });
            }
        }
    }
    out
}

pub fn diff_to_csv(rows: &[DiffRow]) -> String {
    let mut out = String::from("topology,n,id,method,length_before,length_after,error_before,error_after,status\n");
    for r in rows {
        let (l0, e0) = cell_text(&r.before);
        let (l1, e1) = cell_text(&r.after);
        let _ = writeln!(
            out,
            "{},{},{},{},{l0},{l1},{e0},{e1},{}",
            r.topology,
            r.n,
            r.index,
            r.method,
            r.status.name()
        );
    }
    out
}

/// Whether a comparison should fail.
pub fn has_regression(rows: &[DiffRow]) -> bool {
    rows.iter()
        .any(|r| matches!(r.status, DiffStatus::Regressed | DiffStatus::NotComparable))
}
