use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use plmm::experiment::{self, analysis, ExperimentConfig};
use plmm::lmm::method_by_name;
use plmm::stability;
use plmm::Error;

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_BLOWUP: u8 = 3;

#[derive(Parser)]
#[command(name = "plmm", version, about = "Partitioned multistep experiments on Hamiltonian PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (method, dt) pair of a TOML config and write CSV series.
    Run { config: PathBuf },
    /// Print `z,max_modulus` over the imaginary-axis scan of a catalog method.
    Stability {
        method: String,
        #[arg(long, default_value_t = 1.0)]
        zmax: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Number of scan points.
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Empirical orders of the deviations at time `t` across a dt ladder.
    Order {
        #[arg(required = true, num_args = 3..)]
        csv: Vec<PathBuf>,
        #[arg(long)]
        t: f64,
    },
    /// Log-log slope of one deviation column over a time window.
    Growth {
        csv: PathBuf,
        #[arg(long, num_args = 2, value_names = ["T_A", "T_B"])]
        window: Vec<f64>,
        /// Column name such as `dev_energy`; defaults to the last deviation column.
        #[arg(long)]
        invariant: Option<String>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Parse(_) => EXIT_IO,
        Error::BlowUp { .. } => EXIT_BLOWUP,
        _ => EXIT_INVALID,
    }
}

fn execute(cmd: Command) -> Result<u8, Error> {
    let mut out = std::io::stdout().lock();
    match cmd {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summaries = experiment::run(&cfg)?;
            let mut code = 0;
            for s in &summaries {
                match s.blowup {
                    Some(t) => {
                        writeln!(out, "{} dt={:e} blow-up at t={t} -> {}", s.method, s.dt, s.path.display())?;
                        code = EXIT_BLOWUP;
                    }
                    None => writeln!(out, "{} dt={:e} -> {}", s.method, s.dt, s.path.display())?,
                }
            }
            Ok(code)
        }
        Command::Stability { method, zmax, tol, points } => {
            if !(zmax > 0.0 && tol > 0.0 && points > 0) {
                return Err(Error::BadParams("zmax, tol and points must be positive".into()));
            }
            let m = method_by_name(&method)?;
            let s = stability::scan(&m, zmax, points);
            writeln!(out, "z,max_modulus")?;
            for (z, r) in s.z_values.iter().zip(&s.max_moduli) {
                writeln!(out, "{z:.16e},{r:.16e}")?;
            }
            let z_star = stability::imaginary_axis_interval(&m, tol, zmax);
            eprintln!("{} stable on the imaginary axis up to z = {z_star} (tol {tol:e})", m.name);
            Ok(0)
        }
        Command::Order { csv, t } => {
            let table = analysis::order_table(&csv, t)?;
            let mut header = vec!["dt".to_string()];
            for c in &table.columns {
                header.push(c.clone());
                header.push(format!("order_{}", c.trim_start_matches("dev_")));
            }
            writeln!(out, "{}", header.join(","))?;
            for row in &table.rows {
                let mut fields = vec![format!("{:e}", row.dt)];
                for (d, o) in row.deviations.iter().zip(&row.orders) {
                    fields.push(format!("{d:.16e}"));
                    fields.push(o.map_or_else(String::new, |v| format!("{v:.4}")));
                }
                writeln!(out, "{}", fields.join(","))?;
            }
            Ok(0)
        }
        Command::Growth { csv, window, invariant } => {
            let slope = analysis::growth_fit(&csv, window[0], window[1], invariant.as_deref())?;
            writeln!(out, "{slope:.6}")?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
