//! Plain-text output: comma-separated tables with 17 significant digits and
//! a `key = value` run summary. A [`Bundle`] is assembled in memory and then
//! written to a directory, so identical runs give identical bytes.

use std::collections::BTreeMap;
use std::fmt::{Display, Write as _};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::network::{Snapshot, TimeSeries};

pub const TIMESERIES_HEADER: &str = "t,N_E,N_I,R_E,R_I,mass_E,mass_I,entropy";
pub const SNAPSHOT_HEADER: &str = "v,rho_E,rho_I";
pub const BIFURCATION_HEADER: &str = "sweep_value,root_index,N_E,N_I";
pub const CURVE_HEADER: &str = "sweep_value,N_E,F";

/// Renders `x` with 17 significant digits (negative zero prints as zero).
pub fn num(x: f64) -> String {
    let x = x + 0.0;
    format!("{x:.16e}")
}

fn row(out: &mut String, values: &[f64]) {
    let cells: Vec<String> = values.iter().map(|&x| num(x)).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub fn timeseries_csv(series: &TimeSeries) -> String {
    let mut out = format!("{TIMESERIES_HEADER}\n");
    for r in &series.records {
        row(
            &mut out,
            &[r.t, r.n[0], r.n[1], r.r[0], r.r[1], r.mass[0], r.mass[1], r.entropy.unwrap_or(f64::NAN)],
        );
    }
    out
}

/// Densities on the mesh nodes; the `rho_I` column is NaN for one population.
pub fn density_csv(grid: &Grid, densities: &[&[f64]]) -> String {
    let mut out = format!("{SNAPSHOT_HEADER}\n");
    for (j, v) in grid.nodes().enumerate() {
        let e = densities.first().map_or(f64::NAN, |d| d[j]);
        let i = densities.get(1).map_or(f64::NAN, |d| d[j]);
        row(&mut out, &[v, e, i]);
    }
    out
}

pub fn snapshot_csv(grid: &Grid, snap: &Snapshot) -> String {
    let d: Vec<&[f64]> = snap.densities.iter().map(|d| d.as_slice()).collect();
    density_csv(grid, &d)
}

pub fn snapshot_file_name(t: f64) -> String {
    format!("snapshot_t{t:.6}.csv")
}

/// One line per root: `(sweep value, root index, N_E, N_I)`.
pub fn bifurcation_csv(rows: &[(f64, usize, f64, f64)]) -> String {
    let mut out = format!("{BIFURCATION_HEADER}\n");
    for &(s, k, ne, ni) in rows {
        let _ = writeln!(out, "{},{k},{},{}", num(s), num(ne), num(ni));
    }
    out
}

pub fn curve_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for &(s, n, f) in rows {
        row(&mut out, &[s, n, f]);
    }
    out
}

/// Header and numeric rows of a table written by this module.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Io("empty table".into()))?
        .split(',')
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let vals = line
            .split(',')
            .map(|c| c.parse::<f64>().map_err(|e| Error::Io(format!("row {}: `{c}`: {e}", i + 2))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != header.len() {
            return Err(Error::Io(format!("row {} has {} fields, header has {}", i + 2, vals.len(), header.len())));
        }
        rows.push(vals);
    }
    Ok((header, rows))
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    lines: Vec<String>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push(format!("{key} = {value}"));
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.text(key, num(value))
    }

    pub fn opt(&mut self, key: &str, value: Option<f64>) -> &mut Self {
        match value {
            Some(v) => self.num(key, v),
            None => self.text(key, "none"),
        }
    }

    pub fn nums(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let v: Vec<String> = values.iter().map(|&x| num(x)).collect();
        self.text(key, format!("[{}]", v.join(", ")))
    }

    pub fn blank(&mut self) -> &mut Self {
        self.lines.push(String::new());
        self
    }

    pub fn extend(&mut self, other: &Summary) -> &mut Self {
        self.lines.extend(other.lines.iter().cloned());
        self
    }

    /// Value of the first line with `key`, if any.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out
    }
}

/// Files of one run, keyed by path relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bundle {
    files: BTreeMap<PathBuf, String>,
}

impl Bundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, content: String) {
        self.files.insert(path.into(), content);
    }

    /// Moves every file of `other` under `prefix`.
    pub fn nest(&mut self, prefix: &str, other: Bundle) {
        for (p, c) in other.files {
            self.files.insert(Path::new(prefix).join(p), c);
        }
    }

    pub fn get(&self, path: impl AsRef<Path>) -> Option<&str> {
        self.files.get(path.as_ref()).map(String::as_str)
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.keys().map(PathBuf::as_path)
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        for (rel, content) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(&path, content).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// Time series and snapshot files of one simulation.
pub fn series_bundle(series: &TimeSeries) -> Bundle {
    let mut b = Bundle::new();
    b.add("timeseries.csv", timeseries_csv(series));
    for s in &series.snapshots {
        b.add(snapshot_file_name(s.t), snapshot_csv(&series.grid, s));
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Record;

    fn grid() -> Grid {
        Grid::new(6.0, 2.0, 1.0, 100).unwrap()
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 1e308] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn empty_series_is_header_only() {
        let s = TimeSeries { populations: 1, grid: grid(), records: vec![], snapshots: vec![] };
        assert_eq!(timeseries_csv(&s), format!("{TIMESERIES_HEADER}\n"));
    }

    #[test]
    fn tables_parse_back_losslessly() {
        let rec = Record { t: 0.1, n: [1.0 / 3.0, f64::NAN], r: [0.2, f64::NAN], mass: [0.8, f64::NAN], entropy: Some(1e-9) };
        let s = TimeSeries { populations: 1, grid: grid(), records: vec![rec], snapshots: vec![] };
        let (h, rows) = parse_csv(&timeseries_csv(&s)).unwrap();
        assert_eq!(h.join(","), TIMESERIES_HEADER);
        assert_eq!(rows[0][1], 1.0 / 3.0);
        assert!(rows[0][2].is_nan());
        assert_eq!(rows[0][7], 1e-9);
        let (h, rows) = parse_csv(&bifurcation_csv(&[(3.0, 1, 0.25, 0.5)])).unwrap();
        assert_eq!(h.join(","), BIFURCATION_HEADER);
        assert_eq!(rows[0], vec![3.0, 1.0, 0.25, 0.5]);
    }

    #[test]
    fn density_table_has_one_line_per_node() {
        let g = grid();
        let rho = vec![1.0; g.len()];
        let (_, rows) = parse_csv(&density_csv(&g, &[&rho])).unwrap();
        assert_eq!(rows.len(), g.len());
        assert_eq!(rows.last().unwrap()[0], 2.0);
        assert!(rows[0][2].is_nan());
    }

    #[test]
    fn summary_lookup() {
        let mut s = Summary::new();
        s.text("classification", "BLOWUP").num("x", 0.5);
        assert_eq!(s.get("classification"), Some("BLOWUP"));
        assert_eq!(s.render(), "classification = BLOWUP\nx = 5.0000000000000000e-1\n");
    }

    #[test]
    fn bundle_writes_nested_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut inner = Bundle::new();
        inner.add("a.csv", "x\n".into());
        let mut b = Bundle::new();
        b.nest("sub", inner);
        b.write(dir.path()).unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("sub/a.csv")).unwrap(), "x\n");
    }
}
