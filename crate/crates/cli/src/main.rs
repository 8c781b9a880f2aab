use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ksddg::config::ConfigFile;
use ksddg::ddg::{check_admissible, FluxParams};
use ksddg::experiment::{run_convergence, run_experiment, ExperimentConfig, ExperimentKind};
use ksddg::Error;

/// Keller–Segel DDG experiment runner.
#[derive(Parser, Debug)]
#[command(name = "ksddg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// `section.key=value`, applied after the file; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Convergence table for the manufactured solution.
    Table {
        #[arg(long, value_parser = ["conv1d", "conv2d"])]
        experiment: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        degrees: Vec<usize>,
        /// Replaces the preset element counts.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long)]
        t_final: Option<f64>,
    },
    /// Γ(β₁) and the admissibility margin of a flux pair.
    Info {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        beta0: f64,
        #[arg(long)]
        beta1: f64,
        #[arg(long, default_value_t = 1.0)]
        phi0: f64,
        #[arg(long, default_value_t = 1.0)]
        phi1: f64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        _ => 3,
    }
}

fn run(config: PathBuf, set: Vec<String>) -> Result<(), Error> {
    let mut file = ConfigFile::load(&config).map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
    for s in &set {
        file.set(s)?;
    }
    let cfg = file.to_experiment()?;
    let summary = run_experiment(&cfg)?;
    print!("{}", summary.render());
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn table(experiment: &str, degrees: &[usize], n: Option<Vec<usize>>, t_final: Option<f64>) -> Result<(), Error> {
    let kind = ExperimentKind::parse(experiment)?;
    for &k in degrees {
        let mut cfg = ExperimentConfig::convergence(kind, k)?;
        if let Some(n) = &n {
            cfg.n = n.clone();
        }
        if let Some(t) = t_final {
            cfg.t_final = t;
        }
        cfg.validate()?;
        let flux = cfg.flux()?;
        println!(
            "{} k={k} flux=({}, {}) T={}",
            kind.name(),
            flux.beta0,
            flux.beta1,
            cfg.t_final
        );
        print!("{}", run_convergence(&cfg)?.render());
    }
    Ok(())
}

fn info(k: usize, beta0: f64, beta1: f64, phi0: f64, phi1: f64) -> Result<(), Error> {
    let flux = FluxParams::new(beta0, beta1)?;
    let a = check_admissible(flux, phi0, phi1, k)?;
    println!("k = {k}");
    println!("beta0 = {beta0}, beta1 = {beta1}");
    println!("gamma = {}", a.gamma);
    println!("margin = {} (phi0 = {phi0}, phi1 = {phi1})", a.margin);
    println!("admissible = {}", a.admissible);
    let d = FluxParams::for_degree(k)?;
    println!("default flux for k = {k}: ({}, {})", d.beta0, d.beta1);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, set } => run(config, set),
        Command::Table {
            experiment,
            degrees,
            n,
            t_final,
        } => table(&experiment, &degrees, n, t_final),
        Command::Info {
            k,
            beta0,
            beta1,
            phi0,
            phi1,
        } => info(k, beta0, beta1, phi0, phi1),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
