use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rwde_core::experiments::{run_config, write_output, ExperimentConfig, Status};
use rwde_core::stable::suites::{run_suite, SuiteConfig, Verdict};

#[derive(Parser)]
#[command(name = "rwde", version, about = "Random walks in Dirichlet environments: experiments and inequality suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments selected in a TOML config.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Master seed (overrides `seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run an inequality suite: a suite id, `moments` or `all`.
    Verify {
        suite: String,
        /// TOML file with suite grids and sample sizes.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn set_threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the worker pool")?;
    }
    Ok(())
}

fn run(config: PathBuf, out: Option<PathBuf>, threads: Option<usize>, seed: Option<u64>) -> Result<bool> {
    set_threads(threads)?;
    let mut cfg = ExperimentConfig::from_file(&config).with_context(|| format!("reading {}", config.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if out.is_some() {
        cfg.output_dir = out;
    }
    let start = Instant::now();
    let outputs = run_config(&cfg)?;
    let mut all_pass = true;
    let mut timing = String::from("experiment,seconds\n");
    let mut last = start.elapsed();
    for o in &outputs {
        let r = &o.report;
        let now = start.elapsed();
        timing.push_str(&format!("{},{:.3}\n", r.experiment, (now - last).as_secs_f64()));
        last = now;
        all_pass &= r.passed();
        println!("{}: {}", r.experiment, if r.passed() { "PASS" } else { "FAIL" });
        for c in &r.checks {
            let tag = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Flagged => "flag",
            };
            println!("  [{tag}] {} = {:.4} ({})", c.name, c.value, c.rule);
        }
        for n in &r.notes {
            println!("  note: {n}");
        }
        if let Some(dir) = &cfg.output_dir {
            write_output(o, dir)?;
        }
    }
    if let Some(dir) = &cfg.output_dir {
        fs::write(dir.join("timing.csv"), timing)?;
        println!("outputs written to {}", dir.display());
    }
    Ok(all_pass)
}

fn verify(suite: String, config: Option<PathBuf>, seed: Option<u64>, out: Option<PathBuf>, threads: Option<usize>) -> Result<bool> {
    set_threads(threads)?;
    let mut cfg = match &config {
        Some(p) => SuiteConfig::from_toml_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = run_suite(&suite, &cfg)?;
    match out {
        Some(p) => fs::write(&p, report.to_json()).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{}", report.to_json()),
    }
    let count = |v: Verdict| report.cells.iter().filter(|c| c.verdict == v).count();
    eprintln!(
        "{suite}: {} cells, {} pass, {} inconclusive, {} fail",
        report.cells.len(),
        count(Verdict::Pass),
        count(Verdict::Inconclusive),
        count(Verdict::Fail)
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out, threads, seed } => run(config, out, threads, seed),
        Command::Verify { suite, config, seed, out, threads } => verify(suite, config, seed, out, threads),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
