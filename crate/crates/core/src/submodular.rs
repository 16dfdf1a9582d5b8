//! Set-function oracles and the exhaustive checks used to validate them.
//!
//! Elements are indices into a public ground set. An [`Oracle`] exposes an
//! incremental *state* summarising a selected set, so streaming instances can
//! ask for marginal gains without re-evaluating the whole set. Every oracle is
//! normalised so that the empty set has value 0.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::{Error, Result};

pub type Element = usize;

pub trait Oracle: Sync {
    /// Summary of a selected set, cheap to clone.
    type State: Clone + Send + Sync;

    /// Number of elements in the ground set; elements are `0..ground_size()`.
    fn ground_size(&self) -> usize;

    /// Largest change in any `f(S)` when one data record is added or removed.
    fn sensitivity(&self) -> f64 {
        1.0
    }

    /// `Some(m)` when the objective is a sum of `m` per-agent functions with
    /// range `[0, 1]`.
    fn num_agents(&self) -> Option<usize> {
        None
    }

    fn empty_state(&self) -> Self::State;

    fn state_value(&self, state: &Self::State) -> f64;

    /// `f(S + e) - f(S)` for the set summarised by `state`; 0 if `e` is already in it.
    fn state_gain(&self, state: &Self::State, e: Element) -> f64;

    fn state_insert(&self, state: &mut Self::State, e: Element);

    fn state_of(&self, set: &[Element]) -> Self::State {
        let mut state = self.empty_state();
        for &e in set {
            self.state_insert(&mut state, e);
        }
        state
    }

    fn evaluate(&self, set: &[Element]) -> f64 {
        self.state_value(&self.state_of(set))
    }

    fn is_decomposable(&self) -> bool {
        self.num_agents().is_some()
    }
}

impl<O: Oracle + ?Sized> Oracle for &O {
    type State = O::State;

    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn sensitivity(&self) -> f64 {
        (**self).sensitivity()
    }
    fn num_agents(&self) -> Option<usize> {
        (**self).num_agents()
    }
    fn empty_state(&self) -> Self::State {
        (**self).empty_state()
    }
    fn state_value(&self, state: &Self::State) -> f64 {
        (**self).state_value(state)
    }
    fn state_gain(&self, state: &Self::State, e: Element) -> f64 {
        (**self).state_gain(state, e)
    }
    fn state_insert(&self, state: &mut Self::State, e: Element) {
        (**self).state_insert(state, e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginal {
    pub gain: f64,
    /// Set when the queried element was already in the set; `gain` is then 0.
    pub already_present: bool,
}

/// `f(e | S)` through the oracle's incremental path.
pub fn marginal_gain<O: Oracle>(f: &O, e: Element, set: &[Element]) -> Marginal {
    if set.contains(&e) {
        return Marginal { gain: 0.0, already_present: true };
    }
    Marginal { gain: f.state_gain(&f.state_of(set), e), already_present: false }
}

/// An oracle backed by a plain set function, shifted so `f(∅) = 0`.
///
/// The state is the selected set itself and every gain costs two full
/// evaluations, so this is meant for small instances and tests.
pub struct FnOracle<F> {
    func: F,
    ground: usize,
    baseline: f64,
    sensitivity: f64,
    agents: Option<usize>,
}

impl<F: Fn(&[Element]) -> f64 + Sync> FnOracle<F> {
    pub fn new(ground: usize, func: F) -> Self {
        let baseline = func(&[]);
        Self { func, ground, baseline, sensitivity: 1.0, agents: None }
    }

    pub fn with_sensitivity(mut self, sensitivity: f64) -> Self {
        self.sensitivity = sensitivity;
        self
    }

    pub fn with_agents(mut self, agents: usize) -> Self {
        self.agents = Some(agents);
        self
    }
}

impl<F: Fn(&[Element]) -> f64 + Sync> Oracle for FnOracle<F> {
    type State = Vec<Element>;

    fn ground_size(&self) -> usize {
        self.ground
    }
    fn sensitivity(&self) -> f64 {
        self.sensitivity
    }
    fn num_agents(&self) -> Option<usize> {
        self.agents
    }
    fn empty_state(&self) -> Self::State {
        Vec::new()
    }
    fn state_value(&self, state: &Self::State) -> f64 {
        (self.func)(state) - self.baseline
    }
    fn state_gain(&self, state: &Self::State, e: Element) -> f64 {
        if state.contains(&e) {
            return 0.0;
        }
        let mut bigger = state.clone();
        bigger.push(e);
        (self.func)(&bigger) - (self.func)(state)
    }
    fn state_insert(&self, state: &mut Self::State, e: Element) {
        if !state.contains(&e) {
            state.push(e);
        }
    }
}

/// Non-negative additive set function.
#[derive(Debug, Clone)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Parameter("modular weights must be finite and non-negative".into()));
        }
        Ok(Self { weights })
    }
}

impl Oracle for Modular {
    type State = (Vec<bool>, f64);

    fn ground_size(&self) -> usize {
        self.weights.len()
    }
    fn sensitivity(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }
    fn empty_state(&self) -> Self::State {
        (vec![false; self.weights.len()], 0.0)
    }
    fn state_value(&self, state: &Self::State) -> f64 {
        state.1
    }
    fn state_gain(&self, state: &Self::State, e: Element) -> f64 {
        if state.0[e] {
            0.0
        } else {
            self.weights[e]
        }
    }
    fn state_insert(&self, state: &mut Self::State, e: Element) {
        if !state.0[e] {
            state.0[e] = true;
            state.1 += self.weights[e];
        }
    }
}

/// Sum of per-agent oracles, each with range `[0, 1]`, evaluated in agent order.
pub struct Decomposable<A> {
    agents: Vec<A>,
    ground: usize,
}

impl<A: Oracle> Decomposable<A> {
    pub fn new(agents: Vec<A>) -> Result<Self> {
        let ground = agents.first().map_or(0, |a| a.ground_size());
        if agents.iter().any(|a| a.ground_size() != ground) {
            return Err(Error::Parameter("all agents must share one ground set".into()));
        }
        Ok(Self { agents, ground })
    }

    pub fn agents(&self) -> &[A] {
        &self.agents
    }
}

impl<A: Oracle> Oracle for Decomposable<A> {
    type State = Vec<A::State>;

    fn ground_size(&self) -> usize {
        self.ground
    }
    fn num_agents(&self) -> Option<usize> {
        Some(self.agents.len())
    }
    fn empty_state(&self) -> Self::State {
        self.agents.iter().map(|a| a.empty_state()).collect()
    }
    fn state_value(&self, state: &Self::State) -> f64 {
        self.agents.iter().zip(state).map(|(a, s)| a.state_value(s)).sum()
    }
    fn state_gain(&self, state: &Self::State, e: Element) -> f64 {
        self.agents.iter().zip(state).map(|(a, s)| a.state_gain(s, e)).sum()
    }
    fn state_insert(&self, state: &mut Self::State, e: Element) {
        for (a, s) in self.agents.iter().zip(state.iter_mut()) {
            a.state_insert(s, e);
        }
    }
}

/// `f / lambda`, for objectives whose summands lie in `[0, lambda]`.
pub struct Scaled<O> {
    inner: O,
    lambda: f64,
}

impl<O: Oracle> Scaled<O> {
    pub fn new(inner: O, lambda: f64) -> Result<Self> {
        crate::error::ensure_positive("lambda", lambda)?;
        Ok(Self { inner, lambda })
    }
}

impl<O: Oracle> Oracle for Scaled<O> {
    type State = O::State;

    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }
    fn sensitivity(&self) -> f64 {
        self.inner.sensitivity() / self.lambda
    }
    fn num_agents(&self) -> Option<usize> {
        self.inner.num_agents()
    }
    fn empty_state(&self) -> Self::State {
        self.inner.empty_state()
    }
    fn state_value(&self, state: &Self::State) -> f64 {
        self.inner.state_value(state) / self.lambda
    }
    fn state_gain(&self, state: &Self::State, e: Element) -> f64 {
        self.inner.state_gain(state, e) / self.lambda
    }
    fn state_insert(&self, state: &mut Self::State, e: Element) {
        self.inner.state_insert(state, e)
    }
}

pub const ENUMERATION_LIMIT: u128 = 10_000_000;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exhaustive maximiser over all subsets of `ground` with at most `k` elements.
///
/// Refuses when `C(|ground|, k)` exceeds [`ENUMERATION_LIMIT`]. Among
/// maximisers the lexicographically smallest (in `ground` order) wins.
pub fn brute_force_opt<O: Oracle>(f: &O, ground: &[Element], k: usize) -> Result<(Vec<Element>, f64)> {
    let k = k.min(ground.len());
    let count = binomial(ground.len(), k);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard { count, limit: ENUMERATION_LIMIT });
    }
    let mut best = (Vec::new(), f.state_value(&f.empty_state()));
    let mut current = Vec::with_capacity(k);
    search(f, ground, k, 0, &mut current, &f.empty_state(), &mut best);
    let set = best.0.iter().map(|&i| ground[i]).collect();
    Ok((set, best.1))
}

// Depth-first over positions in lexicographic order; a set is only replaced by
// a strictly better one, so the first maximiser visited is kept.
fn search<O: Oracle>(
    f: &O,
    ground: &[Element],
    k: usize,
    start: usize,
    current: &mut Vec<usize>,
    state: &O::State,
    best: &mut (Vec<usize>, f64),
) {
    if current.len() == k {
        return;
    }
    for i in start..ground.len() {
        let mut next = state.clone();
        f.state_insert(&mut next, ground[i]);
        current.push(i);
        let value = f.state_value(&next);
        if value > best.1 || (value == best.1 && lex_less(current, &best.0)) {
            *best = (current.clone(), value);
        }
        search(f, ground, k, i + 1, current, &next, best);
        current.pop();
    }
}

fn lex_less(a: &[usize], b: &[usize]) -> bool {
    a < b
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Monotonicity { element: Element, set: Vec<Element>, gain: f64 },
    DiminishingReturns { element: Element, small: Vec<Element>, large: Vec<Element>, small_gain: f64, large_gain: f64 },
    Normalization { value: f64 },
}

#[derive(Debug, Clone, Default)]
pub struct PropertyReport {
    pub trials: usize,
    pub violations: Vec<Violation>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const PROPERTY_TOL: f64 = 1e-9;

fn tolerance(scale: f64) -> f64 {
    PROPERTY_TOL * scale.abs().max(1.0)
}

/// Random-chain check of normalisation, monotonicity and diminishing returns.
///
/// Each trial draws `T ⊆ ground`, `S ⊆ T` and `e ∉ T`, then checks
/// `f(e|S) >= 0`, `f(e|T) >= 0` and `f(e|T) <= f(e|S)` within `1e-9`
/// relative tolerance. The report keeps at most 32 violations.
pub fn check_submodular_monotone<O: Oracle, R: Rng + ?Sized>(
    f: &O,
    ground: &[Element],
    trials: usize,
    rng: &mut R,
) -> PropertyReport {
    let mut report = PropertyReport { trials, violations: Vec::new() };
    let empty = f.state_value(&f.empty_state());
    if empty.abs() > PROPERTY_TOL {
        report.violations.push(Violation::Normalization { value: empty });
    }
    if ground.is_empty() {
        return report;
    }
    for _ in 0..trials {
        let e = *ground.choose(rng).expect("non-empty ground");
        let density = rng.random::<f64>();
        let large: Vec<Element> = ground.iter().copied().filter(|&x| x != e && rng.random::<f64>() < density).collect();
        let keep = rng.random::<f64>();
        let small: Vec<Element> = large.iter().copied().filter(|_| rng.random::<f64>() < keep).collect();
        let small_state = f.state_of(&small);
        let large_state = f.state_of(&large);
        let small_gain = f.state_gain(&small_state, e);
        let large_gain = f.state_gain(&large_state, e);
        let scale = f.state_value(&large_state).abs().max(small_gain.abs());
        if report.violations.len() >= 32 {
            break;
        }
        if small_gain < -tolerance(scale) {
            report.violations.push(Violation::Monotonicity { element: e, set: small.clone(), gain: small_gain });
        }
        if large_gain < -tolerance(scale) {
            report.violations.push(Violation::Monotonicity { element: e, set: large.clone(), gain: large_gain });
        }
        if large_gain > small_gain + tolerance(scale) {
            report.violations.push(Violation::DiminishingReturns { element: e, small, large, small_gain, large_gain });
        }
    }
    report
}

/// Largest observed `|f_A(S) - f_B(S)|` over random neighbours `B` of `A`
/// and random sets `S`.
///
/// A neighbour drops one random record of `A` or duplicates one (a stand-in
/// for adding a record drawn from the same population). `builder` must fix
/// every public parameter itself so that only the data differs.
pub fn sensitivity_probe<T, O, B, R>(builder: B, data: &[T], trials: usize, rng: &mut R) -> f64
where
    T: Clone,
    O: Oracle,
    B: Fn(&[T]) -> O,
    R: Rng + ?Sized,
{
    if data.is_empty() {
        return 0.0;
    }
    let base = builder(data);
    let ground: Vec<Element> = (0..base.ground_size()).collect();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let idx = rng.random_range(0..data.len());
        let mut neighbour = data.to_vec();
        if rng.random_bool(0.5) {
            neighbour.remove(idx);
        } else {
            neighbour.push(data[idx].clone());
        }
        let other = builder(&neighbour);
        let p = rng.random::<f64>();
        let set: Vec<Element> = ground.iter().copied().filter(|_| rng.random::<f64>() < p).collect();
        worst = worst.max((base.evaluate(&set) - other.evaluate(&set)).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn modular_marginals() {
        let f = Modular::new(vec![3.0, 2.0]).unwrap();
        assert_eq!(marginal_gain(&f, 0, &[]), Marginal { gain: 3.0, already_present: false });
        assert_eq!(marginal_gain(&f, 0, &[0]), Marginal { gain: 0.0, already_present: true });
        assert!(Modular::new(vec![-1.0]).is_err());
    }

    #[test]
    fn fn_oracle_is_normalised() {
        let f = FnOracle::new(3, |s: &[usize]| 10.0 + s.len() as f64);
        assert_eq!(f.evaluate(&[]), 0.0);
        assert_eq!(f.evaluate(&[0, 2]), 2.0);
        assert_eq!(f.state_gain(&vec![1], 1), 0.0);
    }

    #[test]
    fn brute_force_small_cases() {
        let f = Modular::new(vec![3.0, 2.0, 1.0]).unwrap();
        let (set, value) = brute_force_opt(&f, &[0, 1, 2], 2).unwrap();
        assert_eq!((set, value), (vec![0, 1], 5.0));
        let (set, value) = brute_force_opt(&f, &[0, 1, 2], 7).unwrap();
        assert_eq!((set, value), (vec![0, 1, 2], 6.0));
        let (set, value) = brute_force_opt(&f, &[], 3).unwrap();
        assert_eq!((set, value), (vec![], 0.0));
    }

    #[test]
    fn brute_force_tie_break_is_lexicographic() {
        let f = Modular::new(vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let (set, _) = brute_force_opt(&f, &[3, 1, 0, 2], 2).unwrap();
        assert_eq!(set, vec![3, 1]);
    }

    #[test]
    fn brute_force_guard() {
        let f = Modular::new(vec![1.0; 80]).unwrap();
        let ground: Vec<usize> = (0..80).collect();
        assert!(matches!(brute_force_opt(&f, &ground, 10), Err(Error::EnumerationGuard { .. })));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(64, 4), 635_376);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(10, 0), 1);
    }

    #[test]
    fn property_checker_accepts_modular() {
        let f = Modular::new(vec![0.5, 2.0, 0.0, 1.5, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let report = check_submodular_monotone(&f, &[0, 1, 2, 3, 4], 2000, &mut rng);
        assert!(report.passed(), "{:?}", report.violations);
    }

    #[test]
    fn property_checker_flags_supermodular() {
        let f = FnOracle::new(6, |s: &[usize]| (s.len() * s.len()) as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let report = check_submodular_monotone(&f, &[0, 1, 2, 3, 4, 5], 500, &mut rng);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::DiminishingReturns { .. })));
    }

    #[test]
    fn property_checker_flags_non_monotone() {
        let f = FnOracle::new(4, |s: &[usize]| if s.contains(&0) { -1.0 } else { s.len() as f64 * 0.1 });
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let report = check_submodular_monotone(&f, &[0, 1, 2, 3], 500, &mut rng);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Monotonicity { .. })));
    }

    #[test]
    fn decomposable_sums_agents() {
        let a = Modular::new(vec![0.2, 0.3, 0.5]).unwrap();
        let b = Modular::new(vec![1.0, 0.0, 0.0]).unwrap();
        let f = Decomposable::new(vec![a, b]).unwrap();
        assert_eq!(f.num_agents(), Some(2));
        assert!((f.evaluate(&[0, 2]) - 1.7).abs() < 1e-15);
        assert!((marginal_gain(&f, 0, &[2]).gain - 1.2).abs() < 1e-15);
        let c = Modular::new(vec![1.0]).unwrap();
        assert!(Decomposable::new(vec![Modular::new(vec![0.0, 0.0]).unwrap(), c]).is_err());
    }

    #[test]
    fn sensitivity_probe_bounds() {
        // Each record is an agent covering one element: range [0, 1].
        let builder = |records: &[usize]| {
            let mut weights = vec![0.0; 5];
            for &r in records {
                weights[r] += 1.0;
            }
            Modular::new(weights).unwrap()
        };
        let data = vec![0, 1, 1, 3, 4, 4, 4];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let probe = sensitivity_probe(builder, &data, 500, &mut rng);
        assert!(probe <= 1.0 + 1e-9 && probe > 0.0);

        let scaled = |records: &[usize]| Scaled::new(builder(records), 0.25).unwrap();
        let probe = sensitivity_probe(scaled, &data, 500, &mut rng);
        assert!(probe <= 4.0 + 1e-9);
        assert!(sensitivity_probe(builder, &[] as &[usize], 10, &mut rng) == 0.0);
    }
}
