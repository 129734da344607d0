//! `oscatter`: two-scale expansions and ε-sweeps from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oscatter::expansion::{amplitude_series, expand_plane_wave, expand_source};
use oscatter::harness::emit::format_value;
use oscatter::harness::{
    emit, field_csv_string, read_json, run_amplitude_table, run_sweep, save_expansion, write_svg, ExperimentConfig,
    FitStatus, SweepResult,
};
use oscatter::potential::average_potential;
use oscatter::reference::{fine_grid, DirectProblem};
use oscatter::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "oscatter",
    version,
    about = "Two-scale asymptotics for 1D scattering by oscillating potentials"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Print samples of the cell-averaged potential.
    Avg(Common),
    /// Build expansions and store them as JSON.
    Expand(Common),
    /// Run one direct solve at the first eps.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Incident direction (+1 or -1) for a plane-wave solve instead of the source problem.
        #[arg(long, allow_hyphen_values = true)]
        incident: Option<f64>,
    },
    /// Field errors of the source problem over the eps list.
    Sweep(Common),
    /// Scattering-amplitude errors over the eps list.
    Amplitude(Common),
    /// Render the SVG plot of a stored result.
    Plot {
        /// Result JSON written by `sweep` or `amplitude`.
        #[arg(long)]
        result: PathBuf,
        /// Output SVG path (defaults to the result path with an .svg extension).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment configuration (JSON); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the eps list (comma separated, strictly decreasing).
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Expansion order p.
    #[arg(long)]
    order: Option<usize>,
    /// Energy E > 0.
    #[arg(long)]
    energy: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "OSCATTER_JOBS")]
    jobs: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(eps) = &self.eps {
            cfg.eps = eps.clone();
        }
        if let Some(order) = self.order {
            cfg.order = order;
        }
        if let Some(energy) = self.energy {
            cfg.energy = energy;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if self.jobs.is_some() {
            cfg.jobs = self.jobs;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_fits(result: &SweepResult) {
    if result.exact_case {
        println!("exact case: q does not depend on y, no rates fitted");
    }
    for fit in &result.fits {
        match &fit.status {
            FitStatus::Fitted(f) => println!(
                "{:<20} slope {:>7.3}  r2 {:.4}  ({} samples)",
                fit.column, f.slope, f.r2, f.samples
            ),
            FitStatus::ExactCase => {}
            FitStatus::Insufficient { samples } => {
                println!("{:<20} below floor ({samples} samples above it)", fit.column)
            }
        }
    }
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        eprintln!("wrote {}", f.display());
    }
}

fn avg(cfg: &ExperimentConfig) -> Result<()> {
    let q = cfg.build_potential()?;
    println!("x,q_hat");
    for (x, v) in q.grid().nodes().zip(average_potential(&q).values()) {
        println!("{},{}", format_value(x), format_value(v.re));
    }
    Ok(())
}

fn expand(cfg: &ExperimentConfig) -> Result<()> {
    let q = cfg.build_potential()?;
    let dir = &cfg.output.dir;
    let source = expand_source(&q, &cfg.build_source()?, cfg.energy, cfg.order)?;
    report_files(&[save_expansion(&source, dir, &cfg.output.stem)?]);
    for &d in &cfg.directions {
        let pw = expand_plane_wave(&q, d, cfg.energy, cfg.order)?;
        report_files(&[save_expansion(&pw, dir, &cfg.output.stem)?]);
        for (n, a) in amplitude_series(&pw)?.iter().enumerate() {
            for (out, v) in a.directions.iter().zip(&a.values) {
                println!(
                    "F_{n}(out {out:+}, in {d:+}) = ({}, {})",
                    format_value(v.re),
                    format_value(v.im)
                );
            }
        }
    }
    Ok(())
}

fn solve(cfg: &ExperimentConfig, incident: Option<f64>) -> Result<()> {
    let eps = cfg.eps[0];
    let q = cfg.build_potential()?;
    let fine = fine_grid(
        cfg.grid.half_width,
        eps,
        q.cell(),
        cfg.energy,
        cfg.grid.points_per_period,
    )?;
    let direct = DirectProblem::new(&q, eps, cfg.energy, &fine, cfg.grid.max_unknowns)?;
    let (field, amp) = match incident {
        Some(d) if d == 1.0 || d == -1.0 => direct.solve_plane_wave(d)?,
        Some(d) => {
            return Err(Error::InvalidArgument(format!(
                "incident direction {d} is not +1 or -1"
            )))
        }
        None => direct.solve_source(&cfg.build_source()?)?,
    };
    for (out, v) in amp.directions.iter().zip(&amp.values) {
        println!(
            "far field (out {out:+}) = ({}, {})",
            format_value(v.re),
            format_value(v.im)
        );
    }
    if let Some(defect) = amp.flux_defect() {
        println!("flux defect = {defect:e}");
    }
    std::fs::create_dir_all(&cfg.output.dir)?;
    let path = cfg.output.dir.join(format!("{}-solve.csv", cfg.output.stem));
    std::fs::write(&path, field_csv_string(&field)?)?;
    report_files(&[path]);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.verb {
        Verb::Avg(c) => avg(&c.load()?),
        Verb::Expand(c) => expand(&c.load()?),
        Verb::Solve { common, incident } => solve(&common.load()?, incident),
        Verb::Sweep(c) => {
            let cfg = c.load()?;
            let result = run_sweep(&cfg)?;
            print_fits(&result);
            report_files(&emit(&result, &cfg.output.dir, &cfg.output.stem, cfg.output.svg)?);
            Ok(())
        }
        Verb::Amplitude(c) => {
            let cfg = c.load()?;
            let result = run_amplitude_table(&cfg)?;
            print_fits(&result);
            let stem = format!("{}-amplitude", cfg.output.stem);
            report_files(&emit(&result, &cfg.output.dir, &stem, cfg.output.svg)?);
            Ok(())
        }
        Verb::Plot { result, out } => {
            let loaded = read_json(&result)?;
            let path = out.unwrap_or_else(|| result.with_extension("svg"));
            write_svg(&loaded, &path)?;
            report_files(&[path]);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ConfigInvalid(_) | Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
