use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rbfluid::coupling::run_with;
use rbfluid::diagnostics::compatibility_residual;
use rbfluid::experiments::{refine, sweep_eps};
use rbfluid::io::{write_snapshot, SeriesWriter};
use rbfluid::scenario::parse_scenario;
use rbfluid::{Error, Resolution, Scenario};

#[derive(Parser, Debug)]
#[command(name = "rbfluid", version, about = "Rigid body moving in a compressible inviscid fluid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; overrides `run.out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Override `fluid.eps`.
    #[arg(long)]
    eps: Option<f64>,
    /// Override the mesh, `N_rxN_theta` or `N_rxN_thetaxN_phi`.
    #[arg(long, value_parser = parse_resolution)]
    resolution: Option<Resolution>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the scenario, writing the time series and snapshots.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Run the scenario for several ε and tabulate the results.
    SweepEps {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ε values.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05, 0.025, 0.0125, 0.0])]
        values: Vec<f64>,
    },
    /// Run on successively refined meshes and tabulate errors against the finest.
    Refine {
        #[command(flatten)]
        common: Common,
        /// Number of meshes, each refined by 2.
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Report compatibility residuals of the initial data.
    CheckCompat {
        #[command(flatten)]
        common: Common,
        /// Highest order checked (default: `fluid.compat_order`).
        #[arg(long)]
        order: Option<usize>,
        /// Largest accepted residual.
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
    },
}

fn parse_resolution(text: &str) -> Result<Resolution, String> {
    let parts: Vec<usize> = text
        .split('x')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [n_r, n_theta] => Ok(Resolution::planar(n_r, n_theta)),
        [n_r, n_theta, n_phi] => Ok(Resolution::spatial(n_r, n_theta, n_phi)),
        _ => Err(format!("expected N_rxN_theta or N_rxN_thetaxN_phi, got {text:?}")),
    }
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::Parse { .. } => 2,
            Error::Validation(_) | Error::InvalidParameter(_) | Error::Construction(_) | Error::UnsupportedOrder(_) => 3,
            _ => 4,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn load(common: &Common) -> Result<Scenario, Failure> {
    let mut sc = parse_scenario(&common.scenario).map_err(|e| match e {
        Error::Io(message) => Failure { code: 2, message },
        e => e.into(),
    })?;
    if let Some(eps) = common.eps {
        sc.fluid.eps = eps;
    }
    if let Some(res) = common.resolution {
        if (res.n_phi > 1) != (sc.geometry.dim == 3) {
            return Err(Error::Validation(format!(
                "--resolution must have {} components for dim = {}",
                sc.geometry.dim, sc.geometry.dim
            ))
            .into());
        }
        sc.set_resolution(res);
    }
    if let Some(out) = &common.out {
        sc.run.out_dir = out.display().to_string();
    }
    sc.validate()?;
    Ok(sc)
}

fn out_dir(sc: &Scenario) -> Result<PathBuf, Error> {
    let dir = PathBuf::from(&sc.run.out_dir);
    fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn cmd_run(common: &Common) -> Result<(), Failure> {
    let sc = load(common)?;
    let dir = out_dir(&sc)?;
    let mesh = sc.build()?.model.mesh;
    let dim = sc.geometry.dim;
    let mut series = SeriesWriter::create(dir.join("timeseries.csv"), dim)?;
    let every = sc.run.snapshot_every;
    let mut next_snapshot = 0.0;
    let mut snapshots = 0usize;
    let traj = run_with(&sc, |state, row| {
        series.push(row)?;
        if let Some(every) = every {
            if state.t >= next_snapshot - 1e-12 {
                write_snapshot(&dir, &format!("snap_{snapshots:04}"), state, &mesh)?;
                snapshots += 1;
                while next_snapshot <= state.t + 1e-12 {
                    next_snapshot += every;
                }
            }
        }
        Ok(())
    })?;
    series.finish()?;
    let mut compat = String::from("order,residual\n");
    for (k, r) in traj.compat.iter().enumerate() {
        compat.push_str(&format!("{k},{r:.6e}\n"));
    }
    write_text(&dir.join("compat.csv"), &compat)?;
    let last = traj.rows.last().expect("initial row");
    println!(
        "t = {:.6}  steps = {}  E0 = {:.6e}  bc_mismatch = {:.3e}  |theta| = {:.3e}  snapshots = {snapshots}",
        traj.final_state.t,
        traj.steps,
        last.record.e0,
        last.record.bc_mismatch,
        traj.final_state.theta.max_abs()
    );
    println!("wrote {}", dir.join("timeseries.csv").display());
    Ok(())
}

fn cmd_sweep(common: &Common, values: &[f64]) -> Result<(), Failure> {
    let sc = load(common)?;
    let dir = out_dir(&sc)?;
    let sweep = sweep_eps(&sc, values)?;
    let mut table = String::from("eps,final_E0,bc_mismatch,distance,steps\n");
    println!("dt = {:.4e}, distances against eps = {}", sweep.dt, sweep.reference_eps);
    println!("{:>10} {:>14} {:>12} {:>12} {:>7}", "eps", "final E0", "bc_mismatch", "distance", "steps");
    for r in &sweep.rows {
        table.push_str(&format!(
            "{},{:.10e},{:.6e},{:.6e},{}\n",
            r.eps, r.final_e0, r.bc_mismatch, r.distance, r.steps
        ));
        println!(
            "{:>10} {:>14.6e} {:>12.3e} {:>12.3e} {:>7}",
            r.eps, r.final_e0, r.bc_mismatch, r.distance, r.steps
        );
    }
    Ok(write_text(&dir.join("sweep_eps.csv"), &table)?)
}

fn cmd_refine(common: &Common, levels: usize) -> Result<(), Failure> {
    let sc = load(common)?;
    let dir = out_dir(&sc)?;
    let rows = refine(&sc, levels)?;
    let mut table = String::from("N_r,N_theta,N_phi,error,order\n");
    println!("{:>6} {:>8} {:>6} {:>12} {:>7}", "N_r", "N_theta", "N_phi", "error", "order");
    for r in &rows {
        let order = r.order.map_or(String::new(), |o| format!("{o:.3}"));
        let res = r.resolution;
        table.push_str(&format!("{},{},{},{:.6e},{order}\n", res.n_r, res.n_theta, res.n_phi, r.error));
        println!("{:>6} {:>8} {:>6} {:>12.4e} {order:>7}", res.n_r, res.n_theta, res.n_phi, r.error);
    }
    Ok(write_text(&dir.join("refine.csv"), &table)?)
}

fn cmd_check(common: &Common, order: Option<usize>, threshold: f64) -> Result<bool, Failure> {
    let sc = load(common)?;
    let setup = sc.build()?;
    let m = &setup.model;
    let order = order.unwrap_or(sc.fluid.compat_order);
    let res = compatibility_residual(&setup.u0, &setup.theta0, &m.mesh, &m.params, &m.props, order)?;
    let mut ok = true;
    for (k, r) in res.iter().enumerate() {
        let pass = *r <= threshold;
        ok &= pass;
        println!("order {k}: {r:.6e} {}", if pass { "ok" } else { "exceeds threshold" });
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Run { common }
        | Command::SweepEps { common, .. }
        | Command::Refine { common, .. }
        | Command::CheckCompat { common, .. } => common,
    };
    let threads = common
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(4);
    }
    let result = match &cli.command {
        Command::Run { common } => cmd_run(common).map(|_| true),
        Command::SweepEps { common, values } => cmd_sweep(common, values).map(|_| true),
        Command::Refine { common, levels } => cmd_refine(common, *levels).map(|_| true),
        Command::CheckCompat {
            common,
            order,
            threshold,
        } => cmd_check(common, *order, *threshold),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
