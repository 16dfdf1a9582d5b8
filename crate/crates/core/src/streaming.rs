//! Single-pass threshold streaming, the sparse-vector instance, and the
//! private guess-ladder maximizer built from them.
//!
//! The private maximizer runs one sparse-vector instance per guess `O` of the
//! optimum, each comparing noisy marginal gains against the noisy threshold
//! `O / (2k)`. After the pass, one of the `T` candidate sets is released
//! through the exponential mechanism (as Gumbel-argmax) with budget
//! `epsilon / 2`.

use rayon::prelude::*;

use crate::accounting::{budget_split, BudgetSplit, NoiseFamily, PrivacyParams};
use crate::error::{ensure_open_unit, ensure_positive, Error, Result};
use crate::noise::{derive_seed, private_argmax, NoiseSource, ScoredCandidate};
use crate::submodular::{brute_force_opt, Element, Oracle};

/// Geometric grid of guesses for the optimum value:
/// `{E, (1+θ)E, ..., (1+θ)^⌊log_{1+θ}(m/E)⌋ E} ∪ {m}`.
///
/// The builder accepts `theta` in `(0, 1]`; the maximizer itself requires `theta < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessLadder {
    lower: f64,
    upper: f64,
    theta: f64,
    guesses: Vec<f64>,
}

impl GuessLadder {
    pub fn build(lower: f64, upper: f64, theta: f64) -> Result<Self> {
        ensure_positive("E", lower)?;
        ensure_positive("m", upper)?;
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::Parameter(format!("theta must lie in (0, 1], got {theta}")));
        }
        if lower >= upper {
            return Ok(Self { lower, upper, theta, guesses: vec![upper] });
        }
        let ratio = 1.0 + theta;
        // Guard the floor against ratios that are exact powers up to rounding.
        let top = ((upper / lower).ln() / ratio.ln() + 1e-9).floor() as i32;
        let mut guesses: Vec<f64> = (0..=top).map(|i| lower * ratio.powi(i)).filter(|&g| g < upper).collect();
        if guesses.last().is_some_and(|&g| (upper - g) <= 1e-9 * upper) {
            guesses.pop();
        }
        guesses.push(upper);
        Ok(Self { lower, upper, theta, guesses })
    }

    pub fn guesses(&self) -> &[f64] {
        &self.guesses
    }

    /// Number of guesses `T`.
    pub fn len(&self) -> usize {
        self.guesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.guesses.is_empty()
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Smallest guess `O` with `x <= O`, if any.
    pub fn covering(&self, x: f64) -> Option<f64> {
        self.guesses.iter().copied().find(|&g| g >= x)
    }
}

/// Non-private single-pass thresholding: keep `e` while `|S| < k` and
/// `f(e | S) >= guess / (2k)`.
pub fn threshold_stream<O, I>(f: &O, stream: I, k: usize, guess: f64) -> Vec<Element>
where
    O: Oracle,
    I: IntoIterator<Item = Element>,
{
    let threshold = guess / (2.0 * k.max(1) as f64);
    let mut state = f.empty_state();
    let mut selected = Vec::with_capacity(k);
    for e in stream {
        if selected.len() >= k {
            break;
        }
        if f.state_gain(&state, e) >= threshold {
            f.state_insert(&mut state, e);
            selected.push(e);
        }
    }
    selected
}

/// [`threshold_stream`] over a stream of known length that also takes every
/// remaining element once fewer than `k - |S|` are left.
pub fn threshold_stream_backfill<O: Oracle>(f: &O, stream: &[Element], k: usize, guess: f64) -> Vec<Element> {
    let threshold = guess / (2.0 * k.max(1) as f64);
    let mut state = f.empty_state();
    let mut selected = Vec::with_capacity(k);
    for (i, &e) in stream.iter().enumerate() {
        if selected.len() >= k {
            break;
        }
        let remaining = stream.len() - i;
        if remaining <= k - selected.len() || f.state_gain(&state, e) >= threshold {
            f.state_insert(&mut state, e);
            selected.push(e);
        }
    }
    selected
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Top,
    Bottom,
}

/// Above-threshold answering with a cutoff.
///
/// Threshold noise is redrawn after every `Top`, so each count index uses a
/// fresh `alpha`; score noise is drawn per query. Once `cutoff` queries have
/// been answered `Top` the instance halts and answers `Bottom` forever.
#[derive(Debug, Clone)]
pub struct SparseVector {
    threshold: f64,
    cutoff: usize,
    count: usize,
    alpha: f64,
    threshold_noise: NoiseSource,
    score_noise: NoiseSource,
}

impl SparseVector {
    pub fn new(threshold: f64, cutoff: usize, mut threshold_noise: NoiseSource, score_noise: NoiseSource) -> Self {
        let alpha = if cutoff > 0 { threshold_noise.sample() } else { 0.0 };
        Self { threshold, cutoff, count: 0, alpha, threshold_noise, score_noise }
    }

    pub fn is_halted(&self) -> bool {
        self.count >= self.cutoff
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Threshold plus the current threshold noise.
    pub fn noisy_threshold(&self) -> f64 {
        self.threshold + self.alpha
    }

    pub fn step(&mut self, query_value: f64) -> Answer {
        if self.is_halted() {
            return Answer::Bottom;
        }
        let beta = self.score_noise.sample();
        if query_value + beta >= self.threshold + self.alpha {
            self.count += 1;
            if !self.is_halted() {
                self.alpha = self.threshold_noise.sample();
            }
            Answer::Top
        } else {
            Answer::Bottom
        }
    }
}

pub fn sparse_step(instance: &mut SparseVector, query_value: f64) -> Answer {
    instance.step(query_value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    Laplace,
    Gumbel,
    /// No noise anywhere and exact final argmax. Carries no privacy guarantee.
    ZeroForTest,
}

impl std::str::FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "laplace" => Ok(Self::Laplace),
            "gumbel" => Ok(Self::Gumbel),
            "zero" | "zerofortest" => Ok(Self::ZeroForTest),
            other => Err(Error::Config(format!("unknown noise mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PssmConfig {
    pub k: usize,
    pub theta: f64,
    pub privacy: PrivacyParams,
    pub noise: NoiseMode,
    /// Public upper bound on the optimum; defaults to the number of agents.
    pub m_bound: Option<f64>,
    /// Public upper bound on the stream length.
    pub n_bound: usize,
    /// Failure probability used only for the reported error bound.
    pub eta: f64,
    pub master_seed: u64,
    /// Advance the instances of each element in parallel. Output is identical either way.
    pub parallel: bool,
}

impl PssmConfig {
    pub fn new(k: usize, theta: f64, privacy: PrivacyParams, noise: NoiseMode, n_bound: usize, master_seed: u64) -> Self {
        Self { k, theta, privacy, noise, m_bound: None, n_bound, eta: 0.1, master_seed, parallel: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunDiagnostics {
    pub lower_guess: f64,
    pub upper_guess: f64,
    pub ladder: Vec<f64>,
    pub split: Option<BudgetSplit>,
    pub per_guess_sizes: Vec<usize>,
    pub per_guess_values: Vec<f64>,
    /// Objective value of each guess's set after every accepted element.
    pub per_guess_value_trace: Vec<Vec<f64>>,
    pub chosen_guess: Option<usize>,
    pub oracle_calls: u64,
    pub elements_seen: usize,
    /// Number of passes over the input; always 1.
    pub passes: usize,
    /// Peak number of elements retained across all instances.
    pub max_retained: usize,
    /// High-probability additive loss (at failure probability `eta`) against
    /// `(1 - theta) / 2 * OPT`; `None` without noise.
    pub additive_error_bound: Option<f64>,
}

impl RunDiagnostics {
    pub fn num_guesses(&self) -> usize {
        self.ladder.len()
    }

    pub fn retained_capacity(&self, k: usize) -> usize {
        k * self.ladder.len()
    }
}

struct GuessInstance<S> {
    sparse: SparseVector,
    selected: Vec<Element>,
    state: S,
    trace: Vec<f64>,
}

impl<S> GuessInstance<S> {
    fn offer<O: Oracle<State = S>>(&mut self, f: &O, e: Element) -> u64 {
        if self.sparse.is_halted() {
            return 0;
        }
        let gain = f.state_gain(&self.state, e);
        if self.sparse.step(gain) == Answer::Top {
            f.state_insert(&mut self.state, e);
            self.selected.push(e);
            self.trace.push(f.state_value(&self.state));
        }
        1
    }
}

/// Lower end of the ladder: `min{k ln n / epsilon, m / 2}` (with `n >= 2`).
pub fn ladder_lower_bound(k: usize, n_bound: usize, epsilon: f64, m: f64) -> f64 {
    let n = n_bound.max(2) as f64;
    (k.max(1) as f64 * n.ln() / epsilon).min(m / 2.0)
}

fn additive_error(split: &BudgetSplit, k: usize, n: usize, eta: f64, sensitivity: f64) -> f64 {
    let (k_f, n_f, t) = (k as f64, n.max(1) as f64, split.num_guesses as f64);
    let hit_threshold = (2.0 * k_f.max(1.0) * t / eta).ln();
    let hit_score = (2.0 * n_f * t / eta).ln();
    let streaming = match (split.laplace_sigma, split.gumbel_gamma) {
        (Some(sigma), _) => k_f * (2.0 * sigma * hit_score + sigma * hit_threshold),
        (None, Some(gamma)) => k_f * gamma * (hit_score + hit_threshold.ln().max(0.0)),
        (None, None) => 0.0,
    };
    streaming + 2.0 * sensitivity / split.selection_epsilon * (2.0 * t / eta).ln()
}

/// Private streaming submodular maximization over a single pass of `stream`.
pub fn pssm<O, I>(f: &O, stream: I, cfg: &PssmConfig) -> Result<(Vec<Element>, RunDiagnostics)>
where
    O: Oracle,
    I: IntoIterator<Item = Element>,
{
    if cfg.k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    ensure_open_unit("theta", cfg.theta)?;
    ensure_open_unit("eta", cfg.eta)?;
    if cfg.noise == NoiseMode::Gumbel && !f.is_decomposable() {
        return Err(Error::Config("Gumbel noise requires a decomposable objective".into()));
    }
    if cfg.noise != NoiseMode::ZeroForTest && f.sensitivity() > 1.0 + 1e-12 {
        return Err(Error::Config(format!("objective sensitivity {} exceeds 1; rescale it first", f.sensitivity())));
    }
    let m = match (cfg.m_bound, f.num_agents()) {
        (Some(m), _) => m,
        (None, Some(agents)) => agents as f64,
        (None, None) => return Err(Error::Config("m_bound is required for non-decomposable objectives".into())),
    };
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Config(format!("upper bound m must be positive, got {m}")));
    }
    let k = cfg.k;
    let lower = ladder_lower_bound(k, cfg.n_bound, cfg.privacy.epsilon, m);
    let ladder = GuessLadder::build(lower, m, cfg.theta)?;
    let t = ladder.len();

    let split = match cfg.noise {
        NoiseMode::Laplace => Some(budget_split(&cfg.privacy, k, t, NoiseFamily::Laplace)?),
        NoiseMode::Gumbel => Some(budget_split(&cfg.privacy, k, t, NoiseFamily::Gumbel)?),
        NoiseMode::ZeroForTest => None,
    };

    let mut instances: Vec<GuessInstance<O::State>> = ladder
        .guesses()
        .iter()
        .enumerate()
        .map(|(i, &guess)| {
            let seed = derive_seed(cfg.master_seed, i as u64);
            let (alpha, beta) = noise_pair(cfg.noise, split.as_ref(), seed)?;
            Ok(GuessInstance {
                sparse: SparseVector::new(guess / (2.0 * k.max(1) as f64), k, alpha, beta),
                selected: Vec::with_capacity(k),
                state: f.empty_state(),
                trace: Vec::new(),
            })
        })
        .collect::<Result<_>>()?;

    let mut oracle_calls = 0u64;
    let mut elements_seen = 0usize;
    let mut retained = 0usize;
    let mut max_retained = 0usize;
    for e in stream {
        elements_seen += 1;
        if elements_seen > cfg.n_bound {
            return Err(Error::Config(format!("stream is longer than n_bound = {}", cfg.n_bound)));
        }
        if e >= f.ground_size() {
            return Err(Error::Parameter(format!("stream element {e} outside ground set of size {}", f.ground_size())));
        }
        oracle_calls += if cfg.parallel {
            instances.par_iter_mut().map(|inst| inst.offer(f, e)).sum::<u64>()
        } else {
            instances.iter_mut().map(|inst| inst.offer(f, e)).sum::<u64>()
        };
        retained = instances.iter().map(|i| i.selected.len()).sum::<usize>().max(retained);
        max_retained = max_retained.max(retained);
    }

    let values: Vec<f64> = instances.iter().map(|i| f.state_value(&i.state)).collect();
    let candidates: Vec<ScoredCandidate> =
        values.iter().enumerate().map(|(index, &score)| ScoredCandidate { index, score }).collect();
    let mut selector = match cfg.noise {
        NoiseMode::ZeroForTest => NoiseSource::zero(),
        _ => NoiseSource::gumbel(0.0, 1.0, derive_seed(cfg.master_seed, u64::MAX))?,
    };
    let selection_epsilon = split.map_or(cfg.privacy.epsilon / 2.0, |s| s.selection_epsilon);
    let chosen = private_argmax(&candidates, selection_epsilon, f.sensitivity().max(f64::MIN_POSITIVE), &mut selector)?;

    let diagnostics = RunDiagnostics {
        lower_guess: ladder.lower(),
        upper_guess: ladder.upper(),
        ladder: ladder.guesses().to_vec(),
        split,
        per_guess_sizes: instances.iter().map(|i| i.selected.len()).collect(),
        per_guess_values: values,
        per_guess_value_trace: instances.iter().map(|i| i.trace.clone()).collect(),
        chosen_guess: Some(chosen),
        oracle_calls,
        elements_seen,
        passes: 1,
        max_retained,
        additive_error_bound: split.map(|s| additive_error(&s, k, cfg.n_bound, cfg.eta, f.sensitivity())),
    };
    let output = std::mem::take(&mut instances[chosen].selected);
    Ok((output, diagnostics))
}

fn noise_pair(mode: NoiseMode, split: Option<&BudgetSplit>, seed: u64) -> Result<(NoiseSource, NoiseSource)> {
    let (alpha_seed, beta_seed) = (derive_seed(seed, 0), derive_seed(seed, 1));
    match (mode, split) {
        (NoiseMode::Laplace, Some(s)) => {
            let sigma = s.laplace_sigma.expect("laplace split");
            Ok((NoiseSource::laplace(sigma, alpha_seed)?, NoiseSource::laplace(2.0 * sigma, beta_seed)?))
        }
        (NoiseMode::Gumbel, Some(s)) => {
            let gamma = s.gumbel_gamma.expect("gumbel split");
            Ok((NoiseSource::gumbel(0.0, gamma, alpha_seed)?, NoiseSource::gumbel(0.0, gamma, beta_seed)?))
        }
        _ => Ok((NoiseSource::zero(), NoiseSource::zero())),
    }
}

/// Bounds on injected threshold noise (`alpha`) and score noise (`beta`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBounds {
    pub threshold_low: f64,
    pub threshold_high: f64,
    pub score_low: f64,
    pub score_high: f64,
}

impl NoiseBounds {
    pub fn symmetric(threshold: f64, score: f64) -> Self {
        Self { threshold_low: -threshold, threshold_high: threshold, score_low: -score, score_high: score }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityCheck {
    pub selected: Vec<Element>,
    pub value: f64,
    pub optimum: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Runs one sparse-vector instance at threshold `guess / (2k)` with uniform
/// noise inside `bounds` and checks
/// `f(S) >= min{O/2 - k(b_u - a_l), f(OPT) - O/2 - k(a_u - b_l)}`
/// against the exhaustive optimum. With symmetric bounds both corrections
/// equal `k b_u - k a_l`.
pub fn bounded_noise_utility_check<O: Oracle>(
    f: &O,
    stream: &[Element],
    k: usize,
    guess: f64,
    bounds: NoiseBounds,
    seed: u64,
) -> Result<UtilityCheck> {
    ensure_positive("guess", guess)?;
    let alpha = NoiseSource::uniform(bounds.threshold_low, bounds.threshold_high, derive_seed(seed, 0))?;
    let beta = NoiseSource::uniform(bounds.score_low, bounds.score_high, derive_seed(seed, 1))?;
    let mut instance = GuessInstance {
        sparse: SparseVector::new(guess / (2.0 * k.max(1) as f64), k, alpha, beta),
        selected: Vec::new(),
        state: f.empty_state(),
        trace: Vec::new(),
    };
    for &e in stream {
        instance.offer(f, e);
    }
    let mut ground = stream.to_vec();
    ground.sort_unstable();
    ground.dedup();
    let (_, optimum) = brute_force_opt(f, &ground, k)?;
    let value = f.state_value(&instance.state);
    let kf = k as f64;
    let full = guess / 2.0 - kf * (bounds.score_high - bounds.threshold_low);
    let short = optimum - guess / 2.0 - kf * (bounds.threshold_high - bounds.score_low);
    let bound = full.min(short);
    let passed = value >= bound - 1e-9 * optimum.abs().max(1.0);
    Ok(UtilityCheck { selected: instance.selected, value, optimum, bound, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accounting::CompositionMode;
    use crate::objectives::coverage_oracle;
    use crate::submodular::Modular;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ladder_powers_of_two() {
        let l = GuessLadder::build(1.0, 8.0, 1.0).unwrap();
        assert_eq!(l.guesses(), &[1.0, 2.0, 4.0, 8.0]);
        let l = GuessLadder::build(1.0, 10.0, 1.0).unwrap();
        assert_eq!(l.len(), 5);
        assert_eq!(l.guesses().last(), Some(&10.0));
    }

    #[test]
    fn ladder_degenerate_and_invalid() {
        assert_eq!(GuessLadder::build(5.0, 3.0, 0.2).unwrap().guesses(), &[3.0]);
        assert_eq!(GuessLadder::build(3.0, 3.0, 0.2).unwrap().guesses(), &[3.0]);
        assert!(GuessLadder::build(0.0, 3.0, 0.2).is_err());
        assert!(GuessLadder::build(1.0, 3.0, 1.5).is_err());
        assert!(GuessLadder::build(1.0, 3.0, 0.0).is_err());
    }

    #[test]
    fn ladder_length_matches_closed_form() {
        for &(e, m, theta) in &[(1.0, 10.0, 0.5), (3.7, 5000.0, 0.2), (340.0, 5000.0, 0.2), (1.5, 3.0, 0.2)] {
            let l = GuessLadder::build(e, m, theta).unwrap();
            let closed = ((m / e).ln() / (1.0f64 + theta).ln()).ceil() as usize + 1;
            assert_eq!(l.len(), closed, "E={e} m={m}");
        }
    }

    #[test]
    fn ladder_covers_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let e = rng.random_range(0.1..10.0);
            let m = e * rng.random_range(1.5..500.0);
            let theta = rng.random_range(0.05..0.95);
            let l = GuessLadder::build(e, m, theta).unwrap();
            assert!(l.guesses().windows(2).all(|w| w[0] < w[1]));
            for _ in 0..500 {
                let x = rng.random_range(e..=m);
                let o = l.covering(x).unwrap();
                assert!(x <= o && o <= (1.0 + theta) * x * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn threshold_stream_modular_trace() {
        let f = Modular::new(vec![3.0, 2.0, 1.0]).unwrap();
        assert_eq!(threshold_stream(&f, [0, 1, 2], 2, 6.0), vec![0, 1]);
        assert!(threshold_stream(&f, std::iter::empty(), 2, 6.0).is_empty());
        assert!(threshold_stream(&f, [0, 1, 2], 2, 12.1).is_empty());
    }

    #[test]
    fn backfill_takes_tail() {
        let f = Modular::new(vec![3.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(threshold_stream_backfill(&f, &[0, 1, 2, 3], 3, 6.0), vec![0, 2, 3]);
        assert_eq!(threshold_stream(&f, [0, 1, 2, 3], 3, 6.0), vec![0]);
    }

    #[test]
    fn sparse_zero_noise() {
        let mut sv = SparseVector::new(1.5, 2, NoiseSource::zero(), NoiseSource::zero());
        let answers: Vec<Answer> = [2.0, 1.0, 3.0].iter().map(|&q| sparse_step(&mut sv, q)).collect();
        assert_eq!(answers, vec![Answer::Top, Answer::Bottom, Answer::Top]);
        assert!(sv.is_halted());
        assert_eq!(sv.step(100.0), Answer::Bottom);
        assert_eq!(sv.count(), 2);
    }

    #[test]
    fn sparse_zero_cutoff_is_halted() {
        let mut sv = SparseVector::new(0.0, 0, NoiseSource::zero(), NoiseSource::zero());
        assert!(sv.is_halted());
        assert!((0..5).all(|_| sv.step(1e9) == Answer::Bottom));
    }

    #[test]
    fn sparse_boundary_query_is_fair_coin() {
        let sigma = 3.0;
        let trials = 100_000;
        let mut tops = 0;
        for i in 0..trials {
            let mut sv = SparseVector::new(
                5.0,
                1,
                NoiseSource::laplace(sigma, derive_seed(7, 2 * i)).unwrap(),
                NoiseSource::laplace(2.0 * sigma, derive_seed(7, 2 * i + 1)).unwrap(),
            );
            if sv.step(5.0) == Answer::Top {
                tops += 1;
            }
        }
        let freq = tops as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }

    fn coverage_instance(rng: &mut ChaCha8Rng, universe: usize, records: usize) -> crate::objectives::Coverage {
        let data: Vec<usize> = (0..records).map(|_| rng.random_range(0..universe)).collect();
        coverage_oracle(&data, universe).unwrap()
    }

    fn params(eps: f64) -> PrivacyParams {
        PrivacyParams::new(eps, 1e-3, CompositionMode::Basic).unwrap()
    }

    #[test]
    fn pssm_zero_noise_matches_best_threshold_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = coverage_instance(&mut rng, 12, 40);
            let stream: Vec<usize> = (0..12).collect();
            let cfg = PssmConfig::new(3, 0.2, params(0.5), NoiseMode::ZeroForTest, 12, 1);
            let (set, diag) = pssm(&f, stream.iter().copied(), &cfg).unwrap();
            let best = diag
                .ladder
                .iter()
                .map(|&o| f.evaluate(&threshold_stream(&f, stream.iter().copied(), 3, o)))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(f.evaluate(&set), best);
        }
    }

    #[test]
    fn pssm_empty_stream() {
        let f = coverage_oracle(&[0, 1, 1], 3).unwrap();
        for noise in [NoiseMode::Laplace, NoiseMode::Gumbel, NoiseMode::ZeroForTest] {
            let cfg = PssmConfig::new(2, 0.2, params(0.5), noise, 3, 9);
            let (set, diag) = pssm(&f, std::iter::empty(), &cfg).unwrap();
            assert!(set.is_empty());
            assert_eq!(diag.elements_seen, 0);
        }
    }

    #[test]
    fn pssm_config_errors() {
        let modular = Modular::new(vec![1.0, 1.0]).unwrap();
        let mut cfg = PssmConfig::new(1, 0.2, params(0.5), NoiseMode::Gumbel, 2, 0);
        cfg.m_bound = Some(2.0);
        assert!(matches!(pssm(&modular, [0, 1], &cfg), Err(Error::Config(_))));
        cfg.noise = NoiseMode::Laplace;
        assert!(pssm(&modular, [0, 1], &cfg).is_ok());
        cfg.m_bound = None;
        assert!(matches!(pssm(&modular, [0, 1], &cfg), Err(Error::Config(_))));

        let f = coverage_oracle(&[0, 1, 1], 3).unwrap();
        let cfg = PssmConfig::new(1, 0.2, params(0.5), NoiseMode::Laplace, 2, 0);
        assert!(matches!(pssm(&f, [0, 1, 2], &cfg), Err(Error::Config(_))));
        let heavy = Modular::new(vec![2.0, 1.0]).unwrap();
        let mut cfg = PssmConfig::new(1, 0.2, params(0.5), NoiseMode::Laplace, 2, 0);
        cfg.m_bound = Some(3.0);
        assert!(matches!(pssm(&heavy, [0, 1], &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn pssm_is_deterministic_and_schedule_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = coverage_instance(&mut rng, 30, 200);
        let stream: Vec<usize> = (0..30).collect();
        for noise in [NoiseMode::Laplace, NoiseMode::Gumbel] {
            let mut cfg = PssmConfig::new(4, 0.2, params(1.0), noise, 30, 77);
            let a = pssm(&f, stream.iter().copied(), &cfg).unwrap();
            let b = pssm(&f, stream.iter().copied(), &cfg).unwrap();
            cfg.parallel = true;
            let c = pssm(&f, stream.iter().copied(), &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(a, c);
        }
    }

    #[test]
    fn pssm_resource_counters() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = coverage_instance(&mut rng, 40, 300);
        let stream: Vec<usize> = (0..40).collect();
        for noise in [NoiseMode::Laplace, NoiseMode::Gumbel, NoiseMode::ZeroForTest] {
            let cfg = PssmConfig::new(3, 0.2, params(1.0), noise, 40, 5);
            let (set, d) = pssm(&f, stream.iter().copied(), &cfg).unwrap();
            assert!(set.len() <= 3);
            assert!(set.iter().all(|e| stream.contains(e)));
            assert_eq!(d.elements_seen, 40);
            assert_eq!(d.passes, 1);
            assert!(d.max_retained <= d.retained_capacity(3));
            assert!(d.oracle_calls <= (40 * d.num_guesses()) as u64);
            for trace in &d.per_guess_value_trace {
                assert!(trace.windows(2).all(|w| w[0] <= w[1]));
            }
            assert_eq!(d.additive_error_bound.is_some(), noise != NoiseMode::ZeroForTest);
        }
    }

    #[test]
    fn oracle_calls_equal_live_instances_per_element() {
        // Zero noise with k larger than the stream: nobody halts.
        let f = coverage_oracle(&[0, 1, 2, 3], 4).unwrap();
        let cfg = PssmConfig::new(10, 0.2, params(0.5), NoiseMode::ZeroForTest, 4, 0);
        let (_, d) = pssm(&f, [0, 1, 2, 3], &cfg).unwrap();
        assert_eq!(d.oracle_calls, (4 * d.num_guesses()) as u64);
    }

    #[test]
    fn bounded_noise_check_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = coverage_instance(&mut rng, 10, 30);
        let stream: Vec<usize> = (0..10).collect();
        let zero = bounded_noise_utility_check(&f, &stream, 3, 8.0, NoiseBounds::symmetric(0.0, 0.0), 1).unwrap();
        assert!(zero.passed);
        assert_eq!(zero.bound, (8.0f64 / 2.0).min(zero.optimum - 4.0));
        let vacuous = bounded_noise_utility_check(&f, &stream, 3, 8.0, NoiseBounds::symmetric(0.0, 1e6), 2).unwrap();
        assert!(vacuous.bound < 0.0 && vacuous.passed);
    }
}
