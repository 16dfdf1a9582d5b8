use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use pssm::data::{synth_mixture, write_points_csv, Point};
use pssm::experiment::{emit_csv, run_experiment, ExperimentConfig};
use pssm::objectives::{coverage_oracle, KMedians};
use pssm::streaming::GuessLadder;
use pssm::submodular::{check_submodular_monotone, sensitivity_probe};

#[derive(Parser)]
#[command(name = "pssm", version, about = "Private streaming submodular maximization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a k-medians sweep and write one CSV per epsilon.
    Run {
        /// Flat key = value config file. Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a config key, e.g. `--set k_values=5,10`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory; overrides `out_dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write a synthetic Gaussian-mixture point set as `x,y` CSV.
    GenSynth {
        #[arg(long, default_value_t = 10)]
        components: usize,
        #[arg(long, default_value_t = 500)]
        points_per_component: usize,
        #[arg(long, default_value_t = 20.0)]
        box_side: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the randomized property checks on the bundled objectives.
    Check {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run { config, overrides, out_dir } => run(config, overrides, out_dir),
        Command::GenSynth { components, points_per_component, box_side, seed, out } => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let written = synth_mixture(components, points_per_component, box_side, &mut rng)
                .and_then(|cloud| write_points_csv(&out, cloud.points()));
            match written {
                Ok(()) => {
                    println!("wrote {} points to {}", components * points_per_component, out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e.to_string()),
            }
        }
        Command::Check { trials, seed } => check(trials, seed),
    }
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::FAILURE
}

fn run(config: Option<PathBuf>, overrides: Vec<String>, out_dir: Option<PathBuf>) -> ExitCode {
    let mut cfg = match &config {
        Some(path) => match ExperimentConfig::from_file(path) {
            Ok(c) => c,
            Err(e) => return fail(&e.to_string()),
        },
        None => ExperimentConfig::default(),
    };
    for item in &overrides {
        let Some((key, value)) = item.split_once('=') else {
            return fail(&format!("--set expects KEY=VALUE, got {item:?}"));
        };
        if let Err(e) = cfg.set(key.trim(), value.trim()) {
            return fail(&e.to_string());
        }
    }
    if let Some(dir) = out_dir {
        cfg.out_dir = dir;
    }
    if let Err(e) = cfg.validate() {
        return fail(&e.to_string());
    }

    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e.to_string()),
    };
    println!("clients={} candidates={} delta={:e}", report.num_clients, report.num_candidates, report.delta);
    println!("{:<11} {:>4} {:>8} {:>14} {:>12} {:>10} {:>12}", "method", "k", "eps", "mean_cost", "std", "retained", "calls");
    for c in &report.cells {
        println!(
            "{:<11} {:>4} {:>8} {:>14.3} {:>12.3} {:>10.1} {:>12.0}",
            c.method.to_string(),
            c.k,
            c.epsilon,
            c.mean_cost,
            c.std_cost,
            c.mean_retained,
            c.mean_oracle_calls
        );
    }
    if !report.cells.is_empty() {
        match emit_csv(&report, &cfg.out_dir) {
            Ok(files) => files.iter().for_each(|p| println!("wrote {}", p.display())),
            Err(e) => return fail(&e.to_string()),
        }
    }
    if report.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} cell(s) failed:", report.failures.len());
        for f in &report.failures {
            eprintln!("  {} k={} eps={}: {}", f.method, f.k, f.epsilon, f.reason);
        }
        ExitCode::FAILURE
    }
}

fn check(trials: usize, seed: u64) -> ExitCode {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut ok = true;
    let mut line = |name: &str, passed: bool, detail: String| {
        println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        ok &= passed;
    };

    let clients: Vec<Point> = (0..50).map(|_| Point::new(rng.random::<f64>() * 20.0, rng.random::<f64>() * 20.0)).collect();
    let candidates: Vec<Point> = (0..16).map(|i| Point::new((i % 4) as f64 * 6.0, (i / 4) as f64 * 6.0)).collect();
    let g = pssm::objectives::default_normalizer(&clients, &candidates).expect("points");
    let kmed = KMedians::new(clients.clone(), candidates.clone(), g).expect("valid normalizer");
    let ground: Vec<usize> = (0..candidates.len()).collect();
    let report = check_submodular_monotone(&kmed, &ground, trials, &mut rng);
    line("k-medians submodular/monotone", report.passed(), format!("{} violations in {trials} trials", report.violations.len()));
    let sens = sensitivity_probe(|ps: &[Point]| KMedians::new(ps.to_vec(), candidates.clone(), g).expect("valid"), &clients, trials / 10, &mut rng);
    line("k-medians sensitivity", sens <= 1.0 + 1e-9, format!("max |f_A - f_B| = {sens:.6}"));

    let records: Vec<usize> = (0..60).map(|_| rng.random_range(0..20)).collect();
    let cov = coverage_oracle(&records, 20).expect("records in universe");
    let ground: Vec<usize> = (0..20).collect();
    let report = check_submodular_monotone(&cov, &ground, trials, &mut rng);
    line("coverage submodular/monotone", report.passed(), format!("{} violations in {trials} trials", report.violations.len()));
    let sens = sensitivity_probe(|d: &[usize]| coverage_oracle(d, 20).expect("valid"), &records, trials / 10, &mut rng);
    line("coverage sensitivity", sens <= 1.0 + 1e-9, format!("max |f_A - f_B| = {sens:.6}"));

    let ladder = GuessLadder::build(3.7, 5000.0, 0.2).expect("valid ladder");
    let covered = (0..trials).all(|_| {
        let x = rng.random_range(3.7..=5000.0);
        ladder.covering(x).is_some_and(|o| o <= 1.2 * x * (1.0 + 1e-12))
    });
    line("guess ladder coverage", covered, format!("T = {}", ladder.len()));

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
