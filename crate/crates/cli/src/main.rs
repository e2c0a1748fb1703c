use clap::{Args, Parser, Subcommand};
use owwe_cli::config::*;
use owwe_cli::experiments::{run, Outcome};
use owwe_cli::{CliError, ExperimentConfig, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "owwe",
    version,
    about = "Laguerre-transform one-way wave equation experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config document; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Von Neumann |G(θ)| curves and stability classes of the 1D schemes.
    Stability {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        betas: Option<Vec<f64>>,
        #[arg(long)]
        samples: Option<usize>,
        /// Skip the comparison with the bundled expectations.
        #[arg(long)]
        no_check: bool,
    },
    /// 1D error table and convergence orders against the exact solution.
    Table1 {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        meshes: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<String>>,
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long)]
        t_eval: Option<f64>,
    },
    /// 2D homogeneous impulse response.
    Impulse2d {
        #[command(flatten)]
        common: Common,
        /// `pc` or `am`.
        #[arg(long)]
        method: Option<String>,
        /// h_z / h_x.
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long)]
        depth: Option<f64>,
        #[arg(long)]
        width: Option<f64>,
        /// Lateral source taper in cells; 0 is a point source.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        amplitude: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
    },
    /// Post-stack depth migration of a zero-offset section.
    Migrate {
        #[command(flatten)]
        common: Common,
        /// Zero-offset section (raw f32 grid with a .hdr sidecar).
        #[arg(long)]
        section: Option<PathBuf>,
        /// True-velocity model grid.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        passes: Option<usize>,
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long)]
        method: Option<String>,
    },
    /// Smallest expansion parameter that represents a late arrival.
    EtaSelect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn base<T>(
    common: &Common,
    pick: impl Fn(ExperimentConfig) -> Option<T>,
    kind: &str,
) -> Result<Option<T>> {
    let Some(path) = &common.config else {
        return Ok(None);
    };
    let cfg = ExperimentConfig::load(path)?;
    let found = cfg.kind();
    pick(cfg)
        .map(Some)
        .ok_or_else(|| CliError::Usage(format!("config is for {found}, not {kind}")))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn resolve(cmd: Command) -> Result<(ExperimentConfig, PathBuf)> {
    Ok(match cmd {
        Command::Stability {
            common,
            schemes,
            betas,
            samples,
            no_check,
        } => {
            let pick = |c| match c {
                ExperimentConfig::Stability(c) => Some(c),
                _ => None,
            };
            let mut c = base(&common, pick, "stability")?.unwrap_or_default();
            set(&mut c.schemes, schemes);
            set(&mut c.betas, betas);
            set(&mut c.n_samples, samples);
            c.check_expectations &= !no_check;
            (ExperimentConfig::Stability(c), common.out)
        }
        Command::Table1 {
            common,
            meshes,
            schemes,
            terms,
            t_eval,
        } => {
            let pick = |c| match c {
                ExperimentConfig::Table1(c) => Some(c),
                _ => None,
            };
            let mut c = base(&common, pick, "table1")?.unwrap_or_default();
            set(&mut c.meshes, meshes);
            set(&mut c.schemes, schemes);
            set(&mut c.n_terms, terms);
            set(&mut c.t_eval, t_eval);
            (ExperimentConfig::Table1(c), common.out)
        }
        Command::Impulse2d {
            common,
            method,
            ratio,
            terms,
            depth,
            width,
            sigma,
            amplitude,
            times,
        } => {
            let pick = |c| match c {
                ExperimentConfig::Impulse2d(c) => Some(c),
                _ => None,
            };
            let mut c = base(&common, pick, "impulse2d")?.unwrap_or_default();
            set(&mut c.solver.method, method);
            set(&mut c.ratio, ratio);
            set(&mut c.n_terms, terms);
            set(&mut c.depth, depth);
            set(&mut c.width, width);
            set(&mut c.source_sigma, sigma);
            set(&mut c.amplitude, amplitude);
            set(&mut c.snapshot_times, times);
            (ExperimentConfig::Impulse2d(c), common.out)
        }
        Command::Migrate {
            common,
            section,
            model,
            passes,
            terms,
            method,
        } => {
            let pick = |c| match c {
                ExperimentConfig::Migrate(c) => Some(c),
                _ => None,
            };
            let mut c = base(&common, pick, "migrate")?.unwrap_or_default();
            set(
                &mut c.section,
                section.map(|path| SectionSpec::File { path }),
            );
            set(&mut c.model, model.map(|path| ModelSpec::File { path }));
            set(&mut c.smoothing_passes, passes);
            set(&mut c.n_terms, terms);
            set(&mut c.solver.method, method);
            (ExperimentConfig::Migrate(c), common.out)
        }
        Command::EtaSelect {
            common,
            t_max,
            terms,
            tol,
        } => {
            let pick = |c| match c {
                ExperimentConfig::EtaSelect(c) => Some(c),
                _ => None,
            };
            let mut c = base(&common, pick, "eta-select")?.unwrap_or_default();
            set(&mut c.t_max, t_max);
            set(&mut c.n_terms, terms);
            set(&mut c.tol, tol);
            (ExperimentConfig::EtaSelect(c), common.out)
        }
    })
}

fn report(outcome: &Outcome) {
    match outcome {
        Outcome::Stability(rows) => {
            for r in rows {
                println!(
                    "{:<8} beta {:<6} max|G| {:.6} {}",
                    r.scheme,
                    r.beta,
                    r.max_abs_g,
                    r.class.as_str()
                );
            }
        }
        Outcome::Table1(t) => {
            print!("{:>6}", "N_x");
            for s in &t.schemes {
                print!(" {s:>11}");
            }
            println!();
            for (nx, row) in t.meshes.iter().zip(&t.errors) {
                print!("{nx:>6}");
                for e in row {
                    match e {
                        Some(e) => print!(" {e:>11.3e}"),
                        None => print!(" {:>11}", "alarm"),
                    }
                }
                println!();
            }
        }
        Outcome::Impulse2d(run) => {
            println!("{} terms, peak |u| {:.4e}", run.terms, run.max_abs);
        }
        Outcome::Migrate(img) => {
            let (mid, half) = (img.nx / 2, (img.nx / 8).max(1));
            println!(
                "image {} x {}, central energy centroid at {:.1} m",
                img.nx,
                img.nz,
                img.centroid_depth(mid.saturating_sub(half)..(mid + half).min(img.nx))
            );
        }
        Outcome::EtaSelect { eta, sweep } => {
            println!("eta = {eta:.6} after {} candidates", sweep.len());
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = resolve(cli.cmd).and_then(|(cfg, out)| {
        let outcome = run(&cfg, &out)?;
        report(&outcome);
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("owwe: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
