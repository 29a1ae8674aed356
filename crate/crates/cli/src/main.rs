//! Batch front end for the helmstab workbench.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use helmstab::borninv::{fourier_samples_csv, recover_fourier_band, stability_record, BandSpec, StabilityRecord};
use helmstab::csv::{num, CsvTable};
use helmstab::forward::far_field;
use helmstab::nearboundary::{disk_record_row, laplace_bound_check, records_csv, theorem_disk_record};
use helmstab::nearfield::{default_n_max, near_field_diag, probe_fourier_nearfield, ProbeSettings};
use helmstab::numerics::{radial_fourier, AngularGrid, CartesianGrid, GridPotential, Potential, RadialProfile};
use helmstab::verify;

use config::ExperimentConfig;

/// Environment variable consulted when `--threads` is not given.
const THREADS_ENV: &str = "HELMSTAB_THREADS";

#[derive(Parser)]
#[command(name = "helmstab", version, about = "Fixed-frequency inverse scattering experiments")]
struct Cli {
    /// Worker threads (0 = one per core); falls back to HELMSTAB_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering amplitudes of the first potential.
    Forward(RunArgs),
    /// Near-field diagonal of the first potential.
    Nearfield(RunArgs),
    /// Band reconstruction from far-field data and stability records.
    InvertBorn(RunArgs),
    /// Plane-wave probing of the pair from near-field data.
    NearfieldProbe(RunArgs),
    /// Laplace-transform and disk stability records for a shell pair.
    Nearboundary(RunArgs),
    /// Run a verification suite and print one line per criterion.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Directory for the suite's CSV tables.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse().with_context(|| format!("{THREADS_ENV} = `{v}` is not a thread count"))?,
            Err(_) => 0,
        },
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn prepare(args: &RunArgs) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::load(&args.config)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let meta = serde_json::to_string_pretty(&cfg)? + "\n";
    std::fs::write(args.out.join("config.json"), meta).context("writing run metadata")?;
    Ok(cfg)
}

fn write(table: &CsvTable, dir: &Path, name: &str) -> Result<()> {
    table.write(&dir.join(name)).with_context(|| format!("writing {name}"))
}

fn build(spec: &helmstab::numerics::PotentialSpec, lambda: f64) -> Result<RadialProfile> {
    spec.build(lambda).with_context(|| format!("building potential at lambda = {lambda}"))
}

fn grid_of(profile: &RadialProfile, lambda: f64, ppw: f64, radius: f64) -> Result<GridPotential> {
    let grid = CartesianGrid::resolving(lambda, ppw, radius)?;
    Ok(GridPotential::from_profile(profile, grid)?)
}

fn common_radius(a: &RadialProfile, b: &RadialProfile) -> f64 {
    let r = |p: &RadialProfile| if p.is_zero() { 0.0 } else { p.support().1 };
    let m = r(a).max(r(b));
    if m > 0.0 {
        m
    } else {
        0.5
    }
}

fn run_forward(args: &RunArgs) -> Result<()> {
    let cfg = prepare(args)?;
    let dirs = AngularGrid::new(cfg.angular.n_dir)?;
    let mut out: Option<CsvTable> = None;
    for &lambda in &cfg.lambdas {
        let q = build(&cfg.potential, lambda)?;
        let gp = grid_of(&q, lambda, cfg.grid.points_per_wavelength, common_radius(&q, &q))?;
        let ff = far_field(&gp, lambda, &dirs, &dirs).with_context(|| format!("forward solve at lambda = {lambda}"))?;
        match out.as_mut() {
            Some(t) => t.append(ff.to_csv()),
            None => out = Some(ff.to_csv()),
        }
    }
    write(&out.expect("at least one frequency"), &args.out, "far_field.csv")
}

fn run_nearfield(args: &RunArgs) -> Result<()> {
    let cfg = prepare(args)?;
    let mut out: Option<CsvTable> = None;
    for &lambda in &cfg.lambdas {
        let q = build(&cfg.potential, lambda)?;
        let n_max = cfg.n_max.unwrap_or_else(|| default_n_max(lambda));
        let d = near_field_diag(&q, lambda, n_max).with_context(|| format!("near-field diagonal at lambda = {lambda}"))?;
        match out.as_mut() {
            Some(t) => t.append(d.to_csv()),
            None => out = Some(d.to_csv()),
        }
    }
    write(&out.expect("at least one frequency"), &args.out, "near_field.csv")
}

fn run_invert_born(args: &RunArgs) -> Result<()> {
    let cfg = prepare(args)?;
    let dirs = AngularGrid::new(cfg.angular.n_dir)?;
    let mut records = StabilityRecord::csv_header();
    for &lambda in &cfg.lambdas {
        let q1 = build(&cfg.potential, lambda)?;
        let q2 = build(&cfg.reference(), lambda)?;
        let radius = common_radius(&q1, &q2);
        let g1 = grid_of(&q1, lambda, cfg.grid.points_per_wavelength, radius)?;
        let g2 = grid_of(&q2, lambda, cfg.grid.points_per_wavelength, radius)?;
        let ff1 = far_field(&g1, lambda, &dirs, &dirs).with_context(|| format!("forward solve at lambda = {lambda}"))?;
        let ff2 = far_field(&g2, lambda, &dirs, &dirs).with_context(|| format!("forward solve at lambda = {lambda}"))?;
        let band = BandSpec::polar(lambda, &cfg.band)?;
        let samples = recover_fourier_band(&ff1, &band)?;
        write(&fourier_samples_csv(&samples), &args.out, &format!("band_samples_lambda_{lambda}.csv"))?;
        let diff = ff1.difference(&ff2)?;
        let rec = stability_record(&Potential::Grid(g1), &Potential::Grid(g2), lambda, &band, diff.l2_norm_sq())?;
        rec.push_to(&mut records);
    }
    write(&records, &args.out, "stability.csv")
}

fn run_probe(args: &RunArgs) -> Result<()> {
    let cfg = prepare(args)?;
    let settings = ProbeSettings { points_per_wavelength: cfg.grid.points_per_wavelength };
    let mut t = CsvTable::new(&["lambda", "xi_x", "xi_y", "re_estimate", "im_estimate", "re_oracle", "im_oracle", "error"]);
    for &lambda in &cfg.lambdas {
        let q1 = build(&cfg.potential, lambda)?;
        let q2 = build(&cfg.reference(), lambda)?;
        let diff = q1.difference(&q2);
        for xi in &cfg.xis {
            let est = probe_fourier_nearfield(&q1, &q2, lambda, *xi, &settings)
                .with_context(|| format!("probe at lambda = {lambda}, xi = {xi:?}"))?;
            let o = radial_fourier(&diff, xi[0].hypot(xi[1]));
            t.push(vec![num(lambda), num(xi[0]), num(xi[1]), num(est.re), num(est.im), num(o.re), num(o.im), num((est - o).norm())]);
        }
    }
    write(&t, &args.out, "probe.csv")
}

fn run_nearboundary(args: &RunArgs) -> Result<()> {
    let cfg = prepare(args)?;
    let nb = cfg.near_boundary;
    let mut laplace = Vec::new();
    let mut disk = Vec::new();
    for &lambda in &cfg.lambdas {
        let q1 = build(&cfg.potential, lambda)?;
        let q2 = build(&cfg.reference(), lambda)?;
        let n_max = cfg.n_max.unwrap_or_else(|| default_n_max(lambda));
        let d1 = near_field_diag(&q1, lambda, n_max)?;
        let d2 = near_field_diag(&q2, lambda, n_max)?;
        laplace.push(laplace_bound_check(&d1, &d2, &q1, &q2, &nb, lambda, 2.0 * nb.big_k * lambda)?);
        let k = 2.0 * lambda;
        disk.push(disk_record_row(&theorem_disk_record(&q1, &q2, &nb, lambda, k)?, k));
    }
    write(&records_csv(&laplace), &args.out, "laplace.csv")?;
    write(&records_csv(&disk), &args.out, "disk.csv")
}

fn run_verify(suite: &str, out: Option<&Path>) -> Result<bool> {
    let reports = verify::run_suite(suite)?;
    let mut ok = true;
    for r in &reports {
        println!("{}", r.line());
        ok &= r.pass;
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for r in &reports {
            r.write_tables(dir)?;
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(cli.threads).and_then(|_| match &cli.command {
        Command::Forward(a) => run_forward(a).map(|_| true),
        Command::Nearfield(a) => run_nearfield(a).map(|_| true),
        Command::InvertBorn(a) => run_invert_born(a).map(|_| true),
        Command::NearfieldProbe(a) => run_probe(a).map(|_| true),
        Command::Nearboundary(a) => run_nearboundary(a).map(|_| true),
        Command::Verify { suite, out } => run_verify(suite, out.as_deref()),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
