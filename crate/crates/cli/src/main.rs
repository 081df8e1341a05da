//! `ymconc`: sampling campaigns, moment checks, pairing counts, free-energy
//! sweeps, and the acceptance suite for the lattice action pushforward.

mod config;
mod output;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use ymconc::concentration::{
    empirical_moments, gaussian_limit_density, ks_statistic, moment_passes, sample_t, Histogram,
    KS_MIN_SAMPLES,
};
use ymconc::exec::configure_workers;
use ymconc::pairings::{count_pairings_bruteforce, count_pairings_closed};
use ymconc::thermo::free_energy_sweep;
use ymconc::verify::{run_check, CHECKS};
use ymconc::{GaugeConfig, RngStream};

use crate::config::{Overrides, RunConfig};
use crate::output::{emit, Cell, Table};

#[derive(Parser, Debug)]
#[command(name = "ymconc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Overrides,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Histogram of N·t against its Gaussian limit, with the KS distance.
    Histogram,
    /// Empirical moments of N·t for l = 1..lmax against m_l.
    Moments,
    /// Closed-form and brute-force pairing counts for l = 1..lmax.
    Pairings,
    /// Gaussian, weak-coupling, Monte Carlo and reference free energies over a λ grid.
    FreeEnergy,
    /// Runs the acceptance checks; exits nonzero if any fails.
    Verify {
        /// Run only these check ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// Dumps one Haar-random gauge configuration as JSON.
    SampleConfig,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Histogram => "histogram",
            Command::Moments => "moments",
            Command::Pairings => "pairings",
            Command::FreeEnergy => "free-energy",
            Command::Verify { .. } => "verify",
            Command::SampleConfig => "sample-config",
        }
    }
}

/// Status lines go to stdout when the table goes to a file.
fn status(config: &RunConfig, line: &str) {
    if config.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn histogram(config: &RunConfig) -> Result<Table> {
    let shape = config.shape()?;
    let batch = sample_t(&shape, config.matrix_size, config.samples, config.seed)?;
    let hist = Histogram::of_batch(&batch)?;
    let mut table = Table::new(&["bin_lo", "bin_hi", "count", "density", "gaussian_density"]);
    for (bin, density) in hist.densities().into_iter().enumerate() {
        let (lo, hi) = hist.edges(bin);
        let g = gaussian_limit_density((lo + hi) / 2.0, shape.sites(), shape.dim());
        table.push(vec![
            lo.into(),
            hi.into(),
            hist.counts[bin].into(),
            density.into(),
            g.into(),
        ]);
    }
    let ks = (batch.len() >= KS_MIN_SAMPLES)
        .then(|| ks_statistic(&batch))
        .transpose()?;
    table.note("ks", ks);
    table.note("outside", hist.outside);
    if let Some(ks) = ks {
        status(config, &format!("ks={ks}"));
    }
    Ok(table)
}

fn moments(config: &RunConfig) -> Result<Table> {
    let shape = config.shape()?;
    let batch = sample_t(&shape, config.matrix_size, config.samples, config.seed)?;
    let mut table = Table::new(&[
        "l",
        "empirical",
        "stderr",
        "target_m_l",
        "N",
        "D",
        "L",
        "K",
        "seed",
        "pass",
    ]);
    for r in empirical_moments(&batch, config.lmax)? {
        table.push(vec![
            r.l.into(),
            r.value.into(),
            r.error.into(),
            r.target.into(),
            r.matrix_dim.into(),
            r.dim.into(),
            r.extent.into(),
            r.sites.into(),
            config.seed.into(),
            moment_passes(&r).into(),
        ]);
    }
    Ok(table)
}

fn pairings(config: &RunConfig) -> Result<Table> {
    let shape = config.shape()?;
    let mut table = Table::new(&["l", "D", "L", "K", "closed", "brute", "match"]);
    for l in 1..=config.lmax {
        let closed = count_pairings_closed(l, shape.sites(), shape.dim());
        let brute = count_pairings_bruteforce(l, &shape).ok();
        let matches = brute.map(|b| closed == Some(b));
        table.push(vec![
            l.into(),
            shape.dim().into(),
            shape.extent().into(),
            shape.sites().into(),
            closed.into(),
            brute.into(),
            matches.into(),
        ]);
        let show = |v: Option<u128>| v.map_or("-".to_owned(), |x| x.to_string());
        let m = matches.map_or("-".to_owned(), |x| x.to_string());
        status(
            config,
            &format!(
                "l={l} closed={} brute={} match={m}",
                show(closed),
                show(brute)
            ),
        );
    }
    Ok(table)
}

fn free_energy(config: &RunConfig) -> Result<Table> {
    let shape = config.shape()?;
    let reports = free_energy_sweep(
        &shape,
        config.matrix_size,
        &config.lambdas(),
        config.samples,
        config.seed,
    )?;
    let mut table = Table::new(&[
        "lambda",
        "D",
        "L",
        "K",
        "N",
        "f_gaussian",
        "f_weak",
        "f_mc",
        "f_mc_stderr",
        "f_reference",
        "reference_branch",
        "disagrees",
        "warnings",
    ]);
    for r in reports {
        table.push(vec![
            r.lambda.into(),
            r.dim.into(),
            r.extent.into(),
            r.sites.into(),
            r.matrix_dim.into(),
            r.f_gaussian.into(),
            r.f_weak.into(),
            r.f_mc.into(),
            r.f_mc_stderr.into(),
            r.f_reference.into(),
            r.reference_branch.map(|b| b.label().to_owned()).into(),
            r.disagrees.into(),
            Cell::Text(r.warnings.join("; ")),
        ]);
    }
    Ok(table)
}

fn verify(config: &RunConfig, only: &[u8]) -> Result<bool> {
    if let Some(bad) = only.iter().find(|id| !CHECKS.iter().any(|c| c.0 == **id)) {
        anyhow::bail!("unknown check id {bad}");
    }
    let mut failed = Vec::new();
    for &(id, _, _) in CHECKS
        .iter()
        .filter(|c| only.is_empty() || only.contains(&c.0))
    {
        let outcome = run_check(id, config.seed).expect("known id");
        println!("{outcome}");
        if !outcome.passed {
            failed.push(format!("{} ({})", outcome.id, outcome.name));
        }
    }
    if failed.is_empty() {
        println!("verify: all checks pass");
    } else {
        println!("verify: failed {}", failed.join(", "));
    }
    Ok(failed.is_empty())
}

fn sample_config(config: &RunConfig) -> Result<Vec<u8>> {
    let mut rng = RngStream::new(config.seed, 0);
    let gauge = GaugeConfig::random(config.shape()?, config.matrix_size, &mut rng)?;
    let mut text = gauge.to_dump(Some(config.seed)).to_json();
    text.push('\n');
    Ok(text.into_bytes())
}

fn run(cli: Cli) -> Result<bool> {
    let config = RunConfig::resolve(cli.command.name(), &cli.flags)?;
    if let Some(n) = config.workers {
        configure_workers(n);
    }
    let table = match &cli.command {
        Command::Verify { only } => return verify(&config, only),
        Command::SampleConfig => {
            emit(&sample_config(&config)?, &config)?;
            return Ok(true);
        }
        Command::Histogram => histogram(&config)?,
        Command::Moments => moments(&config)?,
        Command::Pairings => pairings(&config)?,
        Command::FreeEnergy => free_energy(&config)?,
    };
    emit(&table.render(&config)?, &config)
        .with_context(|| format!("writing {} output", config.command))?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
