//! `emom-md <subcommand> --config <file> --out <dir> [--threads N] [--reproducible]`

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use emom_md::bench::{self, io, CompareSettings, ExperimentConfig, Manifest};
use emom_md::model::{build_quadrature, Problem, TimeGrid};
use emom_md::reconstruction::{moments, radial_composition, Reconstruction};
use emom_md::solver::{solve, EmomSolution};
use emom_md::Error;

#[derive(Parser, Debug)]
#[command(
    name = "emom-md",
    version,
    about = "Exact method of moments for size x composition population balances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; overrides `run.threads`.
    #[arg(long)]
    threads: Option<usize>,
    /// Fixed reduction order (results independent of the thread count).
    #[arg(long)]
    reproducible: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Concentration path of one eMoM run: concentrations.csv.
    Solve(Common),
    /// Solve and reconstruct the PSD at `grids.snapshot_indices`: psd_t<k>.csv.
    Reconstruct(Common),
    /// Solve and trace radial composition profiles: radial_profile.csv.
    Radial(Common),
    /// eMoM versus finite-volume error ladders: errors.csv, slopes.csv.
    Compare(Common),
    /// Temporal refinement study: errors.csv, slopes.csv.
    Convergence(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Solve(c) => ("solve", c),
            Command::Reconstruct(c) => ("reconstruct", c),
            Command::Radial(c) => ("radial", c),
            Command::Compare(c) => ("compare", c),
            Command::Convergence(c) => ("convergence", c),
        }
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 1;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (name, common) = cli.command.parts();
    match run(name, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("emom-md {name}: {e}");
            ExitCode::from(match e {
                Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_IO,
                e if e.is_config() => EXIT_CONFIG,
                _ => EXIT_NUMERICAL,
            })
        }
    }
}

fn run(name: &str, common: &Common) -> emom_md::Result<()> {
    let mut config = ExperimentConfig::from_file(&common.config)?;
    if let Some(threads) = common.threads {
        config.run.threads = threads;
    }
    if common.reproducible {
        config.run.reproducible = true;
    }
    config.validate()?;
    std::fs::create_dir_all(&common.out)?;
    let problem = config.problem()?;
    let mut manifest = Manifest::new(name, &config);
    match name {
        "solve" => {
            emom(&config, &problem, &common.out, &mut manifest)?;
        }
        "reconstruct" => reconstruct(&config, &problem, &common.out, &mut manifest)?,
        "radial" => radial(&config, &problem, &common.out, &mut manifest)?,
        "compare" => compare(&config, &problem, &common.out, &mut manifest)?,
        "convergence" => convergence(&config, &problem, &common.out, &mut manifest)?,
        _ => unreachable!("clap restricts the subcommands"),
    }
    manifest.outputs.push("manifest.json".into());
    manifest.write(&common.out.join("manifest.json"))
}

fn emom(
    config: &ExperimentConfig,
    problem: &Problem,
    out: &Path,
    manifest: &mut Manifest,
) -> emom_md::Result<EmomSolution> {
    let quadrature = build_quadrature(&problem.initial, config.grids.quadrature, config.rule())?;
    let grid = TimeGrid::uniform(problem.process.horizon, config.grids.time_points)?;
    let start = Instant::now();
    let solution = solve(problem, &quadrature, &grid, config.solver_options())?;
    manifest
        .timings
        .push(("emom_solve".into(), start.elapsed().as_secs_f64()));
    if let Some(r) = solution.max_balance_residual {
        manifest
            .notes
            .push(format!("max relative mass-balance residual {r:e}"));
    }
    if let Some(k) = solution.first_negative_step {
        manifest.notes.push(format!(
            "negative concentration clamped in {} steps, first at step {k}",
            solution.negative_steps
        ));
    }
    io::write_concentrations(&out.join("concentrations.csv"), &solution.path)?;
    manifest.outputs.push("concentrations.csv".into());
    Ok(solution)
}

fn reconstruct(
    config: &ExperimentConfig,
    problem: &Problem,
    out: &Path,
    manifest: &mut Manifest,
) -> emom_md::Result<()> {
    let solution = emom(config, problem, out, manifest)?;
    let last = solution.path.len() - 1;
    let indices = if config.grids.snapshot_indices.is_empty() {
        vec![0, last]
    } else {
        config.grids.snapshot_indices.clone()
    };
    let rec = Reconstruction::new(
        &solution.path,
        &problem.law,
        &problem.initial,
        problem.process.x_min,
    );
    let quadrature = build_quadrature(&problem.initial, config.grids.quadrature, config.rule())?;
    for k in indices {
        if k > last {
            return Err(Error::Config {
                path: "grids.snapshot_indices".into(),
                message: format!("time index {k} exceeds the last index {last}"),
            });
        }
        let snapshot = if problem.initial.is_dirac() {
            rec.forward_snapshot(k, &quadrature)?
        } else {
            rec.backward_snapshot(k, rec.forward_window(k)?, config.grids.snapshot_resolution)?
        };
        let m = moments(&snapshot)?;
        manifest.notes.push(format!(
            "t_{k} = {:e}: number {:e}, mean radius {:e}, mean composition {:e}",
            snapshot.time, m.number, m.mean_radius, m.mean_composition
        ));
        let file = format!("psd_t{k}.csv");
        io::write_snapshot(&out.join(&file), &snapshot)?;
        manifest.outputs.push(file);
    }
    Ok(())
}

fn radial(
    config: &ExperimentConfig,
    problem: &Problem,
    out: &Path,
    manifest: &mut Manifest,
) -> emom_md::Result<()> {
    let solution = emom(config, problem, out, manifest)?;
    let profiles = config
        .radial_seeds()
        .into_iter()
        .map(|seed| radial_composition(seed, &solution.path, &problem.law))
        .collect::<emom_md::Result<Vec<_>>>()?;
    for p in profiles.iter().filter(|p| p.undefined > 0) {
        manifest.notes.push(format!(
            "seed ({}, {}): {} time points without growth omitted",
            p.seed.radius, p.seed.composition, p.undefined
        ));
    }
    io::write_radial_profiles(&out.join("radial_profile.csv"), &profiles)?;
    manifest.outputs.push("radial_profile.csv".into());
    Ok(())
}

fn compare(
    config: &ExperimentConfig,
    problem: &Problem,
    out: &Path,
    manifest: &mut Manifest,
) -> emom_md::Result<()> {
    let g = &config.grids;
    let settings = CompareSettings {
        emom_ladder: g.emom_ladder.clone(),
        fvm_ladder: g.fvm_ladder.clone(),
        reference_resolution: g.reference_quadrature,
        reference_time_points: g.reference_time_points,
        extrapolate: config.run.extrapolate_reference,
        rule: config.rule(),
        solver: config.solver_options(),
        fvm: config.fvm_options(),
        repetitions: config.run.timing_repetitions,
    };
    let report = bench::compare_study(problem, &settings)?;
    write_report(&report, out, manifest)?;
    for (dof, e, f) in &report.matched {
        manifest
            .notes
            .push(format!("matched DoF {dof:e}: emom {e:e}, fvm {f:e}"));
    }
    Ok(())
}

fn convergence(
    config: &ExperimentConfig,
    problem: &Problem,
    out: &Path,
    manifest: &mut Manifest,
) -> emom_md::Result<()> {
    let g = &config.grids;
    let report = bench::convergence_study(
        problem,
        g.quadrature,
        config.rule(),
        &g.time_ladder,
        g.reference_time_points,
        config.run.extrapolate_reference,
        &config.solver_options(),
        config.run.timing_repetitions,
    )?;
    write_report(&report, out, manifest)
}

fn write_report(
    report: &bench::StudyReport,
    out: &Path,
    manifest: &mut Manifest,
) -> emom_md::Result<()> {
    manifest
        .timings
        .push(("reference".into(), report.reference_seconds));
    if let Some(r) = report.max_balance_residual {
        manifest
            .notes
            .push(format!("max relative mass-balance residual {r:e}"));
    }
    for row in &report.rows {
        manifest
            .timings
            .push((format!("{}_{}", row.method, row.level), row.seconds));
    }
    io::write_errors(&out.join("errors.csv"), &report.rows)?;
    io::write_slopes(&out.join("slopes.csv"), &report.slopes)?;
    manifest.outputs.push("errors.csv".into());
    manifest.outputs.push("slopes.csv".into());
    for s in &report.slopes {
        log::info!(
            "{}: slope {:.3} (target {:.3} +- {})",
            s.quantity,
            s.fit.slope,
            s.target,
            s.tolerance
        );
    }
    Ok(())
}
