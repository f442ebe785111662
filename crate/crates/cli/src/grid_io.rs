//! Grid CSV: `# key: value` preamble lines, a header row naming the
//! columns, then one row per grid point (time-major).

use std::collections::BTreeMap;

use hdw_forge_core::solver::{GridSpec, SectionGrid};

use crate::error::CliError;

/// A grid as plain columns, either freshly solved or read back from CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct GridTable {
    pub preamble: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Flatten a solved grid. Base columns are `t` (and `x` for 1+1 runs),
/// followed by every stored field in coordinate order.
pub fn grid_table(grid: &SectionGrid, preamble: Vec<(String, String)>) -> GridTable {
    let mut header = vec!["t".to_string()];
    let span = grid.spec.time();
    let mut rows = Vec::with_capacity(grid.spec.len());
    match grid.spec {
        GridSpec::Line(_) => {
            header.extend(grid.fields.keys().map(|c| c.name()));
            for k in 0..=span.steps {
                let mut row = vec![span.time(k)];
                row.extend(grid.fields.values().map(|v| v[k]));
                rows.push(row);
            }
        }
        GridSpec::Plane(_, axis) => {
            header.push("x".into());
            header.extend(grid.fields.keys().map(|c| c.name()));
            for k in 0..=span.steps {
                for i in 0..axis.points {
                    let mut row = vec![span.time(k), axis.x(i)];
                    row.extend(grid.fields.values().map(|v| v[k * axis.points + i]));
                    rows.push(row);
                }
            }
        }
    }
    GridTable { preamble, header, rows }
}

impl GridTable {
    /// Render as CSV. Floats use the shortest representation that reads
    /// back to the same value, so output is deterministic and lossless.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.preamble {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:?}")))
                .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory write")).expect("ascii"));
        out
    }

    pub fn parse(name: &str, text: &str) -> Result<Self, CliError> {
        let bad = |line: usize, msg: String| CliError::Input(format!("{name}:{line}: {msg}"));
        let mut preamble = Vec::new();
        let mut body_start = 0;
        let mut lines_seen = 0;
        for raw in text.split_inclusive('\n') {
            let Some(rest) = raw.trim_end_matches(['\r', '\n']).strip_prefix('#') else {
                break;
            };
            lines_seen += 1;
            body_start += raw.len();
            let rest = rest.trim();
            if let Some((k, v)) = rest.split_once(':') {
                preamble.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        let body = &text[body_start..];
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(|e| bad(lines_seen + 1, format!("unreadable header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.is_empty() || header[0] != "t" {
            return Err(bad(lines_seen + 1, "header must start with `t`".into()));
        }
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = lines_seen + 2 + i;
            let rec = rec.map_err(|e| bad(line, e.to_string()))?;
            if rec.len() != header.len() {
                return Err(bad(
                    line,
                    format!("expected {} columns, found {}", header.len(), rec.len()),
                ));
            }
            let row = rec
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(line, format!("`{f}` is not a number")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(GridTable { preamble, header, rows })
    }

    pub fn preamble_map(&self) -> BTreeMap<&str, &str> {
        self.preamble.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect()
    }

    /// Largest absolute difference over columns both tables share, after
    /// checking the two tables describe the same discretization.
    pub fn max_difference(&self, other: &GridTable) -> Result<f64, String> {
        if self.rows.len() != other.rows.len() {
            return Err(format!(
                "row counts differ: {} vs {}",
                self.rows.len(),
                other.rows.len()
            ));
        }
        let shared: Vec<(usize, usize)> = self
            .header
            .iter()
            .enumerate()
            .filter_map(|(i, h)| other.header.iter().position(|o| o == h).map(|j| (i, j)))
            .collect();
        let base = if self.header.get(1).map(String::as_str) == Some("x") {
            2
        } else {
            1
        };
        if shared.len() <= base {
            return Err(format!(
                "no field columns in common ({} vs {})",
                self.header.join(","),
                other.header.join(",")
            ));
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.rows.iter().zip(&other.rows) {
            for &(i, j) in &shared {
                let d = (a[i] - b[j]).abs();
                worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
            }
        }
        Ok(worst)
    }
}
