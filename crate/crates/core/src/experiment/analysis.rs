use std::path::{Path, PathBuf};

use super::run::BLOWUP_LABEL;
use crate::error::{Error, Result};

/// A parsed series CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    /// Step size parsed from the file name, if present.
    pub dt: Option<f64>,
    /// Column names after `t`.
    pub columns: Vec<String>,
    pub t: Vec<f64>,
    /// `values[row][column]`.
    pub values: Vec<Vec<f64>>,
    pub blowup: Option<f64>,
}

impl Series {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parse(format!("no column '{name}'")))
    }

    /// Deviation columns (`dev_*`).
    pub fn deviation_columns(&self) -> Vec<usize> {
        (0..self.columns.len()).filter(|&i| self.columns[i].starts_with("dev_")).collect()
    }

    fn probe_row(&self, t_probe: f64) -> Result<usize> {
        let tol = 1e-9 * t_probe.abs().max(1.0);
        self.t
            .iter()
            .position(|t| (t - t_probe).abs() <= tol)
            .ok_or(Error::MissingProbe(t_probe))
    }
}

/// Step size encoded as `_dt<value>.csv` in a series file name.
pub fn dt_from_file_name(path: &Path) -> Option<f64> {
    let stem = path.file_stem()?.to_str()?;
    let idx = stem.rfind("_dt")?;
    stem[idx + 3..].parse().ok()
}

pub fn read_series(path: &Path) -> Result<Series> {
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if header.get(0) != Some("t") {
        return Err(Error::Parse(format!("{}: first column must be 't'", path.display())));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut series = Series {
        dt: dt_from_file_name(path),
        columns,
        t: Vec::new(),
        values: Vec::new(),
        blowup: None,
    };
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{s}'")))
        };
        if rec.get(0) == Some(BLOWUP_LABEL) {
            series.blowup = Some(parse(rec.get(1).unwrap_or(""))?);
            continue;
        }
        if rec.len() != series.columns.len() + 1 {
            return Err(Error::Parse(format!("row has {} fields, expected {}", rec.len(), series.columns.len() + 1)));
        }
        series.t.push(parse(&rec[0])?);
        series.values.push(rec.iter().skip(1).map(parse).collect::<Result<_>>()?);
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderRow {
    pub dt: f64,
    pub deviations: Vec<f64>,
    /// `log2(dev(2 dt) / dev(dt))` per column; `None` for the coarsest step.
    pub orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderTable {
    pub columns: Vec<String>,
    pub rows: Vec<OrderRow>,
}

/// Empirical orders from deviations at `t_probe` across runs whose step sizes
/// form a ladder with ratio 2.
pub fn order_table_from_series(series: &[Series], t_probe: f64) -> Result<OrderTable> {
    if series.len() < 3 {
        return Err(Error::BadParams(format!("need at least 3 step sizes, got {}", series.len())));
    }
    let cols = series[0].deviation_columns();
    let columns: Vec<String> = cols.iter().map(|&i| series[0].columns[i].clone()).collect();
    let mut rows: Vec<OrderRow> = Vec::new();
    for s in series {
        let dt = s.dt.ok_or_else(|| Error::Parse("series has no step size in its file name".into()))?;
        if s.columns != series[0].columns {
            return Err(Error::Parse("series have different columns".into()));
        }
        let row = s.probe_row(t_probe)?;
        rows.push(OrderRow {
            dt,
            deviations: cols.iter().map(|&c| s.values[row][c]).collect(),
            orders: vec![None; cols.len()],
        });
    }
    rows.sort_by(|a, b| b.dt.total_cmp(&a.dt));
    for i in 1..rows.len() {
        let ratio = rows[i - 1].dt / rows[i].dt;
        if (ratio - 2.0).abs() > 1e-9 {
            return Err(Error::BadParams(format!("step sizes must halve, got ratio {ratio}")));
        }
        let orders = (0..cols.len())
            .map(|c| Some((rows[i - 1].deviations[c] / rows[i].deviations[c]).log2()))
            .collect();
        rows[i].orders = orders;
    }
    Ok(OrderTable { columns, rows })
}

pub fn order_table(paths: &[PathBuf], t_probe: f64) -> Result<OrderTable> {
    let series = paths.iter().map(|p| read_series(p)).collect::<Result<Vec<_>>>()?;
    order_table_from_series(&series, t_probe)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::DegenerateWindow(format!("{} usable points", points.len())));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateWindow("all points at one time".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Slope of `log(deviation)` against `log t` over `[t_a, t_b]`. Rows with a
/// zero deviation (exact conservation at that record) are skipped.
pub fn growth_fit_series(series: &Series, column: &str, t_a: f64, t_b: f64) -> Result<f64> {
    if !(t_a > 0.0 && t_b > t_a) {
        return Err(Error::DegenerateWindow(format!("[{t_a}, {t_b}]")));
    }
    let last = series.t.last().copied().unwrap_or(0.0);
    if t_b > last * (1.0 + 1e-12) {
        return Err(Error::DegenerateWindow(format!("window ends at {t_b} after the last record {last}")));
    }
    let c = series.column(column)?;
    let pts: Vec<(f64, f64)> = series
        .t
        .iter()
        .zip(&series.values)
        .filter(|(t, v)| **t >= t_a && **t <= t_b && v[c] > 0.0)
        .map(|(t, v)| (*t, v[c]))
        .collect();
    loglog_slope(&pts)
}

/// [`growth_fit_series`] on a CSV file; `column` defaults to the last
/// deviation column.
pub fn growth_fit(path: &Path, t_a: f64, t_b: f64, column: Option<&str>) -> Result<f64> {
    let s = read_series(path)?;
    let name = match column {
        Some(c) => c.to_string(),
        None => {
            let i = *s.deviation_columns().last().ok_or_else(|| Error::Parse("no deviation columns".into()))?;
            s.columns[i].clone()
        }
    };
    growth_fit_series(&s, &name, t_a, t_b)
}
