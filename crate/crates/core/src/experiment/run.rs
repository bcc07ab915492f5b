use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, ModelKind};
use crate::error::{Error, Result};
use crate::integrator::{integrate, RunOutput};
use crate::system::State;

/// Label of the truncation marker row written after a blow-up.
pub const BLOWUP_LABEL: &str = "blowup";

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub method: String,
    pub dt: f64,
    pub path: PathBuf,
    /// Time at which the run was truncated.
    pub blowup: Option<f64>,
}

pub fn series_file_name(method: &str, dt: f64) -> String {
    format!("{method}_dt{dt:e}.csv")
}

pub fn profile_file_name(method: &str, dt: f64, t: f64) -> String {
    format!("{method}_dt{dt:e}_profile_t{t}.csv")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the invariant series of one run: header `t, dev_<name>..., sol_err_max`,
/// one row per record, then a `blowup,<t>` row if the run was truncated.
pub fn write_series(path: &Path, out: &RunOutput) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["t".to_string()];
    header.extend(out.names.iter().map(|n| format!("dev_{n}")));
    header.push("sol_err_max".into());
    w.write_record(&header).map_err(csv_err)?;
    for r in &out.records {
        let mut row = vec![fmt(r.t)];
        row.extend(r.deviations.iter().map(|&v| fmt(v)));
        row.push(r.sol_err.map_or_else(|| "nan".to_string(), fmt));
        w.write_record(&row).map_err(csv_err)?;
    }
    if let Some(b) = out.blowup {
        let mut row = vec![BLOWUP_LABEL.to_string(), fmt(b.t)];
        row.resize(header.len(), String::new());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a nodal profile with columns `x` and the two partitions.
pub fn write_profile(path: &Path, nodes: &[f64], state: &State, names: [&str; 2]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["x", names[0], names[1]]).map_err(csv_err)?;
    for ((x, p), q) in nodes.iter().zip(&state.p).zip(&state.q) {
        w.write_record([fmt(*x), fmt(*p), fmt(*q)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Executes every `(method, dt)` run of `config` in parallel and writes one
/// series CSV per run plus the requested profile snapshots.
pub fn run(config: &ExperimentConfig) -> Result<Vec<RunSummary>> {
    config.validate()?;
    let dir = config.output_dir();
    fs::create_dir_all(&dir)?;
    let methods = config.methods()?;
    let jobs: Vec<_> = methods
        .iter()
        .flat_map(|m| config.dts().into_iter().map(move |dt| (m, dt)))
        .collect();
    let nodes = crate::spectral::make_grid(config.l_i, config.l_s, config.n)?.nodes().to_vec();
    let names = match config.model {
        ModelKind::Nls => ["p", "q"],
        ModelKind::Boussinesq => ["eta", "w"],
    };

    jobs.par_iter()
        .map(|&(method, dt)| {
            let system = config.build_system()?;
            let out = integrate(method, config.starting_procedure(method), system.as_ref(), &config.run_spec(dt))?;
            let path = dir.join(series_file_name(&method.name, dt));
            write_series(&path, &out)?;
            for s in &out.snapshots {
                let t = (s.t * 1e9).round() / 1e9;
                write_profile(&dir.join(profile_file_name(&method.name, dt, t)), &nodes, s, names)?;
            }
            Ok(RunSummary {
                method: method.name.clone(),
                dt,
                path,
                blowup: out.blowup.map(|b| b.t),
            })
        })
        .collect()
}
