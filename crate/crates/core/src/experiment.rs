//! k-medians sweeps over `(method, k, epsilon)` with repeated seeds, and the
//! per-epsilon CSV files that summarise them.
//!
//! Config files are flat `key = value` lines; `#` starts a comment. Lists are
//! comma separated. Recognised keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `dataset` | `synthetic` or `csv` | `synthetic` |
//! | `components`, `points_per_component`, `box_side` | synthetic mixture | 10, 500, 20 |
//! | `csv_path`, `x_column`, `y_column`, `max_rows` | point file | |
//! | `grid_side` | candidates per grid side | 30 |
//! | `k_values` | cardinality sweep | 5,10,20 |
//! | `epsilon_values` | privacy sweep | 0.1,1 |
//! | `theta` | ladder ratio minus one | 0.2 |
//! | `delta` | `inverse_n_1p5` or a number | `inverse_n_1p5` |
//! | `repetitions` | seeds per cell | 20 |
//! | `composition` | `basic` or `advanced` | `basic` |
//! | `master_seed` | | 0 |
//! | `methods` | subset of `laplace,gumbel,nonprivate,random` | all |
//! | `shuffle` | reshuffle the grid stream for each repetition | false |
//! | `out_dir` | where `run` writes CSVs | `results` |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::accounting::{CompositionMode, PrivacyParams};
use crate::data::{load_points_csv, make_grid, stream_order, synth_mixture, PointCloud};
use crate::error::{Error, Result};
use crate::noise::derive_seed;
use crate::objectives::KMedians;
use crate::streaming::{ladder_lower_bound, pssm, GuessLadder, NoiseMode, PssmConfig};
use crate::submodular::{Element, Oracle};

pub const CSV_HEADER: [&str; 9] =
    ["Params", "Laplace", "LaplaceEB", "Ours", "OursEB", "Non-private", "Non-privateEB", "Random", "RandomEB"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Laplace,
    Gumbel,
    NonPrivate,
    Random,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Laplace, Method::Gumbel, Method::NonPrivate, Method::Random];

    fn code(self) -> u64 {
        self as u64
    }

    /// Column name in the emitted CSV.
    pub fn column(self) -> &'static str {
        match self {
            Method::Laplace => "Laplace",
            Method::Gumbel => "Ours",
            Method::NonPrivate => "Non-private",
            Method::Random => "Random",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Laplace => "laplace",
            Method::Gumbel => "gumbel",
            Method::NonPrivate => "nonprivate",
            Method::Random => "random",
        };
        f.write_str(s)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "laplace" => Ok(Method::Laplace),
            "gumbel" | "ours" => Ok(Method::Gumbel),
            "nonprivate" => Ok(Method::NonPrivate),
            "random" => Ok(Method::Random),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Synthetic { components: usize, points_per_component: usize, box_side: f64 },
    Csv { path: PathBuf, x_column: String, y_column: String, max_rows: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaRule {
    /// `delta = 1 / |P|^1.5`.
    InverseN1p5,
    Explicit(f64),
}

impl DeltaRule {
    pub fn delta(self, clients: usize) -> f64 {
        match self {
            DeltaRule::InverseN1p5 => (clients as f64).powf(-1.5),
            DeltaRule::Explicit(d) => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub grid_side: usize,
    pub k_values: Vec<usize>,
    pub epsilon_values: Vec<f64>,
    pub theta: f64,
    pub delta_rule: DeltaRule,
    pub repetitions: usize,
    pub composition: CompositionMode,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    pub shuffle: bool,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::Synthetic { components: 10, points_per_component: 500, box_side: 20.0 },
            grid_side: 30,
            k_values: vec![5, 10, 20],
            epsilon_values: vec![0.1, 1.0],
            theta: 0.2,
            delta_rule: DeltaRule::InverseN1p5,
            repetitions: 20,
            composition: CompositionMode::Basic,
            master_seed: 0,
            methods: Method::ALL.to_vec(),
            shuffle: false,
            out_dir: PathBuf::from("results"),
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse {s:?}"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies a single `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dataset" => {
                self.dataset = match value.to_ascii_lowercase().as_str() {
                    "synthetic" => match self.dataset {
                        DatasetSource::Synthetic { .. } => self.dataset.clone(),
                        _ => ExperimentConfig::default().dataset,
                    },
                    "csv" => match &self.dataset {
                        DatasetSource::Csv { .. } => self.dataset.clone(),
                        _ => DatasetSource::Csv {
                            path: PathBuf::new(),
                            x_column: "x".into(),
                            y_column: "y".into(),
                            max_rows: None,
                        },
                    },
                    other => return Err(Error::Config(format!("dataset: unknown kind {other:?}"))),
                }
            }
            "components" | "points_per_component" | "box_side" => {
                let DatasetSource::Synthetic { components, points_per_component, box_side } = &mut self.dataset else {
                    return Err(Error::Config(format!("{key} only applies to dataset = synthetic")));
                };
                match key {
                    "components" => *components = parse_one(key, value)?,
                    "points_per_component" => *points_per_component = parse_one(key, value)?,
                    _ => *box_side = parse_one(key, value)?,
                }
            }
            "csv_path" | "x_column" | "y_column" | "max_rows" => {
                let DatasetSource::Csv { path, x_column, y_column, max_rows } = &mut self.dataset else {
                    return Err(Error::Config(format!("{key} only applies to dataset = csv")));
                };
                match key {
                    "csv_path" => *path = PathBuf::from(value),
                    "x_column" => *x_column = value.to_string(),
                    "y_column" => *y_column = value.to_string(),
                    _ => *max_rows = if value.is_empty() { None } else { Some(parse_one(key, value)?) },
                }
            }
            "grid_side" => self.grid_side = parse_one(key, value)?,
            "k_values" => self.k_values = parse_list(key, value)?,
            "epsilon_values" => self.epsilon_values = parse_list(key, value)?,
            "theta" => self.theta = parse_one(key, value)?,
            "delta" => {
                self.delta_rule = if value.eq_ignore_ascii_case("inverse_n_1p5") {
                    DeltaRule::InverseN1p5
                } else {
                    DeltaRule::Explicit(parse_one(key, value)?)
                }
            }
            "repetitions" => self.repetitions = parse_one(key, value)?,
            "composition" => self.composition = value.parse()?,
            "master_seed" => self.master_seed = parse_one(key, value)?,
            "methods" => self.methods = parse_list(key, value)?,
            "shuffle" => self.shuffle = parse_bool(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        if self.grid_side < 2 {
            return bad("grid_side must be at least 2".into());
        }
        if self.k_values.is_empty() || self.epsilon_values.is_empty() || self.methods.is_empty() {
            return bad("k_values, epsilon_values and methods must be non-empty".into());
        }
        if let Some(eps) = self.epsilon_values.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return bad(format!("epsilon values must be positive, got {eps}"));
        }
        if let DeltaRule::Explicit(d) = self.delta_rule {
            if !(d > 0.0 && d < 1.0) {
                return bad(format!("delta must lie in (0, 1), got {d}"));
            }
        }
        if let DatasetSource::Csv { path, .. } = &self.dataset {
            if path.as_os_str().is_empty() {
                return bad("dataset = csv needs csv_path".into());
            }
        }
        Ok(())
    }
}

/// Clients and the candidate grid spanning their bounding box.
#[derive(Debug, Clone)]
pub struct Instance {
    pub clients: PointCloud,
    pub candidates: PointCloud,
    pub skipped_rows: usize,
}

pub fn build_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    let (clients, skipped_rows) = match &cfg.dataset {
        DatasetSource::Synthetic { components, points_per_component, box_side } => {
            let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.master_seed, u64::MAX));
            (synth_mixture(*components, *points_per_component, *box_side, &mut rng)?, 0)
        }
        DatasetSource::Csv { path, x_column, y_column, max_rows } => {
            let loaded = load_points_csv(path, x_column, y_column, *max_rows)?;
            (loaded.cloud, loaded.skipped_rows)
        }
    };
    let candidates = make_grid(&clients.bounding_box(), cfg.grid_side)?;
    Ok(Instance { clients, candidates, skipped_rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: Method,
    pub k: usize,
    pub epsilon: f64,
    pub repetition: usize,
    pub selected: Vec<Element>,
    pub cost: f64,
    pub value: f64,
    /// Peak number of elements held across all guesses.
    pub max_retained: usize,
    pub num_guesses: usize,
    pub oracle_calls: u64,
    pub passes: usize,
    pub elements_seen: usize,
}

impl RunRecord {
    /// Retained elements stayed within `k` per guess.
    pub fn within_space_bound(&self) -> bool {
        self.max_retained <= self.k * self.num_guesses.max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub method: Method,
    pub k: usize,
    pub epsilon: f64,
    pub runs: usize,
    pub mean_cost: f64,
    /// Sample standard deviation (0 for a single run).
    pub std_cost: f64,
    pub mean_retained: f64,
    pub mean_oracle_calls: f64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub method: Method,
    pub k: usize,
    pub epsilon: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub num_clients: usize,
    pub num_candidates: usize,
    pub delta: f64,
    pub cells: Vec<CellSummary>,
    pub records: Vec<RunRecord>,
    pub failures: Vec<CellFailure>,
}

impl RunReport {
    pub fn cell(&self, method: Method, k: usize, epsilon: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.method == method && c.k == k && c.epsilon == epsilon)
    }
}

struct Outcome {
    selected: Vec<Element>,
    max_retained: usize,
    num_guesses: usize,
    oracle_calls: u64,
    elements_seen: usize,
    passes: usize,
}

/// Non-private ladder baseline. The ladder runs from
/// `min{max_e f(e), k ln n / epsilon, |P| / 2}` to `|P|`; each guess
/// thresholds at `O / (2k)` and takes the stream tail once fewer than
/// `k - |S|` elements remain. All guesses advance together in one pass and
/// the best final set wins.
pub fn run_nonprivate<O: Oracle>(
    f: &O,
    stream: &[Element],
    k: usize,
    epsilon: f64,
    theta: f64,
    m: f64,
) -> Result<(Vec<Element>, usize, u64)> {
    let (selected, out) = nonprivate_outcome(f, stream, k, epsilon, theta, m)?;
    Ok((selected, out.num_guesses, out.oracle_calls))
}

fn nonprivate_outcome<O: Oracle>(
    f: &O,
    stream: &[Element],
    k: usize,
    epsilon: f64,
    theta: f64,
    m: f64,
) -> Result<(Vec<Element>, Outcome)> {
    let empty = f.empty_state();
    let best_single = stream.iter().map(|&e| f.state_gain(&empty, e)).fold(0.0, f64::max);
    let lower = ladder_lower_bound(k, stream.len(), epsilon, m).min(best_single);
    let ladder = if lower > 0.0 { GuessLadder::build(lower, m, theta)? } else { GuessLadder::build(m, m, theta)? };
    let kk = k.max(1) as f64;
    let mut instances: Vec<(f64, Vec<Element>, O::State)> =
        ladder.guesses().iter().map(|&g| (g / (2.0 * kk), Vec::with_capacity(k), f.empty_state())).collect();
    let mut calls = stream.len() as u64;
    let mut max_retained = 0usize;
    for (i, &e) in stream.iter().enumerate() {
        let remaining = stream.len() - i;
        for (threshold, set, state) in instances.iter_mut() {
            if set.len() >= k {
                continue;
            }
            let take = if remaining <= k - set.len() {
                true
            } else {
                calls += 1;
                f.state_gain(state, e) >= *threshold
            };
            if take {
                f.state_insert(state, e);
                set.push(e);
            }
        }
        max_retained = max_retained.max(instances.iter().map(|i| i.1.len()).sum());
    }
    let mut best = 0usize;
    let mut best_value = f64::NEG_INFINITY;
    for (i, (_, _, state)) in instances.iter().enumerate() {
        let v = f.state_value(state);
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    let selected = std::mem::take(&mut instances[best].1);
    let out = Outcome {
        selected: Vec::new(),
        max_retained,
        num_guesses: ladder.len(),
        oracle_calls: calls,
        elements_seen: stream.len(),
        passes: 1,
    };
    Ok((selected, out))
}

/// Uniform `k`-subset of the stream by reservoir sampling; the whole stream
/// when it has at most `k` elements.
pub fn reservoir_sample<R: Rng + ?Sized>(stream: &[Element], k: usize, rng: &mut R) -> Vec<Element> {
    let mut reservoir = Vec::with_capacity(k);
    for (i, &e) in stream.iter().enumerate() {
        if i < k {
            reservoir.push(e);
        } else {
            let j = rng.random_range(0..=i);
            if j < k {
                reservoir[j] = e;
            }
        }
    }
    reservoir
}

struct Job {
    method: Method,
    k: usize,
    eps_index: usize,
    repetition: usize,
}

fn run_job(
    f: &KMedians,
    cfg: &ExperimentConfig,
    delta: f64,
    job: &Job,
    stream: &[Element],
) -> Result<(Outcome, Duration)> {
    let epsilon = cfg.epsilon_values[job.eps_index];
    let seed = [job.method.code(), job.k as u64, job.eps_index as u64, job.repetition as u64]
        .iter()
        .fold(cfg.master_seed, |s, &x| derive_seed(s, x));
    let m = f.clients().len() as f64;
    let start = Instant::now();
    let outcome = match job.method {
        Method::Laplace | Method::Gumbel => {
            let noise = if job.method == Method::Laplace { NoiseMode::Laplace } else { NoiseMode::Gumbel };
            let privacy = PrivacyParams::new(epsilon, delta, cfg.composition)?;
            let mut pc = PssmConfig::new(job.k, cfg.theta, privacy, noise, stream.len(), seed);
            pc.m_bound = Some(m);
            let (selected, d) = pssm(f, stream.iter().copied(), &pc)?;
            Outcome {
                selected,
                max_retained: d.max_retained,
                num_guesses: d.num_guesses(),
                oracle_calls: d.oracle_calls,
                elements_seen: d.elements_seen,
                passes: d.passes,
            }
        }
        Method::NonPrivate => {
            let (selected, mut out) = nonprivate_outcome(f, stream, job.k, epsilon, cfg.theta, m)?;
            out.selected = selected;
            out
        }
        Method::Random => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let selected = reservoir_sample(stream, job.k, &mut rng);
            Outcome {
                max_retained: selected.len(),
                selected,
                num_guesses: 1,
                oracle_calls: 0,
                elements_seen: stream.len(),
                passes: 1,
            }
        }
    };
    Ok((outcome, start.elapsed()))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every `(method, k, epsilon, repetition)` job. Jobs run in parallel;
/// results are merged in config order, so the report does not depend on
/// scheduling. A failing job marks its cell as failed and the sweep goes on.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let instance = build_instance(cfg)?;
    run_on_instance(cfg, instance)
}

pub fn run_on_instance(cfg: &ExperimentConfig, instance: Instance) -> Result<RunReport> {
    cfg.validate()?;
    let num_clients = instance.clients.len();
    let num_candidates = instance.candidates.len();
    let delta = cfg.delta_rule.delta(num_clients);
    let f = KMedians::with_default_normalizer(instance.clients.into_points(), instance.candidates.into_points())?;

    let streams: Vec<Vec<Element>> = (0..cfg.repetitions)
        .map(|r| {
            if cfg.shuffle {
                let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(derive_seed(cfg.master_seed, u64::MAX - 1), r as u64));
                stream_order(num_candidates, Some(&mut rng))
            } else {
                stream_order::<ChaCha12Rng>(num_candidates, None)
            }
        })
        .collect();

    let mut jobs = Vec::new();
    for eps_index in 0..cfg.epsilon_values.len() {
        for &k in &cfg.k_values {
            for &method in &cfg.methods {
                for repetition in 0..cfg.repetitions {
                    jobs.push(Job { method, k, eps_index, repetition });
                }
            }
        }
    }
    let results: Vec<Result<(Outcome, Duration)>> =
        jobs.par_iter().map(|job| run_job(&f, cfg, delta, job, &streams[job.repetition])).collect();

    let mut records = Vec::with_capacity(jobs.len());
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for (chunk_jobs, chunk_results) in jobs.chunks(cfg.repetitions).zip(results.chunks(cfg.repetitions)) {
        let head = &chunk_jobs[0];
        let epsilon = cfg.epsilon_values[head.eps_index];
        if let Some(err) = chunk_results.iter().find_map(|r| r.as_ref().err()) {
            log::warn!("cell {} k={} eps={}: {err}", head.method, head.k, epsilon);
            failures.push(CellFailure { method: head.method, k: head.k, epsilon, reason: err.to_string() });
            continue;
        }
        let mut costs = Vec::with_capacity(cfg.repetitions);
        let mut retained = 0.0;
        let mut calls = 0.0;
        let mut wall = Duration::ZERO;
        for (job, result) in chunk_jobs.iter().zip(chunk_results) {
            let (out, elapsed) = result.as_ref().expect("checked above");
            let cost = f.cost(&out.selected);
            costs.push(cost);
            retained += out.max_retained as f64;
            calls += out.oracle_calls as f64;
            wall += *elapsed;
            records.push(RunRecord {
                method: job.method,
                k: job.k,
                epsilon,
                repetition: job.repetition,
                value: f.evaluate(&out.selected),
                selected: out.selected.clone(),
                cost,
                max_retained: out.max_retained,
                num_guesses: out.num_guesses,
                oracle_calls: out.oracle_calls,
                passes: out.passes,
                elements_seen: out.elements_seen,
            });
        }
        let (mean_cost, std_cost) = mean_std(&costs);
        let n = cfg.repetitions as f64;
        cells.push(CellSummary {
            method: head.method,
            k: head.k,
            epsilon,
            runs: cfg.repetitions,
            mean_cost,
            std_cost,
            mean_retained: retained / n,
            mean_oracle_calls: calls / n,
            wall_time: wall,
        });
    }
    Ok(RunReport { num_clients, num_candidates, delta, cells, records, failures })
}

/// File name used for one epsilon, e.g. `eps_1E-1.csv`.
pub fn csv_file_name(epsilon: f64) -> String {
    format!("eps_{epsilon:E}.csv")
}

/// Writes one CSV per epsilon into `dir` (created if missing). Rows follow
/// the order in which `k` first appears in the report. Methods without a
/// summary for a row get empty columns.
pub fn emit_csv(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    if report.cells.is_empty() {
        return Err(Error::Parameter("report has no completed cells".into()));
    }
    std::fs::create_dir_all(dir)?;
    let mut epsilons: Vec<f64> = Vec::new();
    let mut ks: Vec<usize> = Vec::new();
    for c in &report.cells {
        if !epsilons.contains(&c.epsilon) {
            epsilons.push(c.epsilon);
        }
        if !ks.contains(&c.k) {
            ks.push(c.k);
        }
    }
    for fail in &report.failures {
        if !ks.contains(&fail.k) {
            ks.push(fail.k);
        }
    }
    let mut written = Vec::new();
    for eps in epsilons {
        let path = dir.join(csv_file_name(eps));
        let mut writer = csv::Writer::from_path(&path)?;
        writer.write_record(CSV_HEADER)?;
        for &k in &ks {
            let mut row = vec![k.to_string()];
            for method in Method::ALL {
                match report.cell(method, k, eps) {
                    Some(c) => {
                        row.push(c.mean_cost.to_string());
                        row.push(c.std_cost.to_string());
                    }
                    None => row.extend([String::new(), String::new()]),
                }
            }
            writer.write_record(&row)?;
        }
        writer.flush()?;
        written.push(path);
    }
    Ok(written)
}

/// One parsed CSV row: `k` and `(mean, std)` per method in [`Method::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub k: usize,
    pub values: [Option<(f64, f64)>; 4],
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let data_err = |reason: String| Error::Data { path: path.to_path_buf(), reason };
    let mut reader = csv::Reader::from_path(path)?;
    if reader.headers()?.iter().ne(CSV_HEADER) {
        return Err(data_err("unexpected header".into()));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| data_err(format!("bad number {s:?}")));
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let k = record[0].parse::<usize>().map_err(|_| data_err(format!("bad k {:?}", &record[0])))?;
        let mut values = [None; 4];
        for (i, slot) in values.iter_mut().enumerate() {
            let (mean, std) = (&record[1 + 2 * i], &record[2 + 2 * i]);
            if !mean.is_empty() {
                *slot = Some((num(mean)?, num(std)?));
            }
        }
        rows.push(CsvRow { k, values });
    }
    Ok(rows)
}
