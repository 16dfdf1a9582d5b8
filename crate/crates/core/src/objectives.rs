//! Concrete objectives: k-medians as facility-location coverage, and
//! max-coverage over singleton sets with its lower-bound instance generator.

use rand::seq::index::sample;
use rand::Rng;

use crate::data::{BoundingBox, Point};
use crate::error::{ensure_positive, Error, Result};
use crate::submodular::{Element, Oracle};

/// Manhattan distance.
pub fn manhattan(a: Point, b: Point) -> f64 {
    (a.x - b.x).abs() + (a.y - b.y).abs()
}

/// k-medians recast as maximisation: `f(S) = sum_p 1 - d(p, S) / G`.
///
/// Each client is one agent with value in `[0, 1]`; `d(p, ∅) = G`, so the
/// empty set scores 0. `cost(S) = sum_p d(p, S) = G * (|P| - f(S))`.
#[derive(Debug, Clone)]
pub struct KMedians {
    clients: Vec<Point>,
    candidates: Vec<Point>,
    normalizer: f64,
}

/// Per-client distance to the nearest selected candidate.
#[derive(Debug, Clone)]
pub struct NearestDistances {
    nearest: Vec<f64>,
    size: usize,
}

impl NearestDistances {
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }
}

/// Largest Manhattan distance between any client and any candidate.
fn max_cross_distance(clients: &[Point], candidates: &[Point]) -> f64 {
    // |dx| + |dy| = max over sign pairs of s1*dx + s2*dy.
    let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    signs
        .iter()
        .map(|&(sx, sy)| {
            let hi = clients.iter().map(|p| sx * p.x + sy * p.y).fold(f64::NEG_INFINITY, f64::max);
            let lo = candidates.iter().map(|v| sx * v.x + sy * v.y).fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// Default normaliser: Manhattan diameter of the bounding box of clients and
/// candidates together (1 if every point coincides).
pub fn default_normalizer(clients: &[Point], candidates: &[Point]) -> Result<f64> {
    let bbox = BoundingBox::of(clients.iter().chain(candidates))
        .ok_or_else(|| Error::Parameter("need at least one point".into()))?;
    let d = bbox.l1_diameter();
    Ok(if d > 0.0 { d } else { 1.0 })
}

impl KMedians {
    /// Fails if `normalizer` is smaller than some client-candidate distance.
    pub fn new(clients: Vec<Point>, candidates: Vec<Point>, normalizer: f64) -> Result<Self> {
        ensure_positive("normalizer G", normalizer)?;
        if candidates.is_empty() {
            return Err(Error::Parameter("k-medians needs at least one candidate".into()));
        }
        if !clients.is_empty() {
            let needed = max_cross_distance(&clients, &candidates);
            if needed > normalizer * (1.0 + 1e-12) {
                return Err(Error::Parameter(format!(
                    "normalizer G = {normalizer} is below the largest client-candidate distance {needed}"
                )));
            }
        }
        Ok(Self { clients, candidates, normalizer })
    }

    pub fn with_default_normalizer(clients: Vec<Point>, candidates: Vec<Point>) -> Result<Self> {
        let g = default_normalizer(&clients, &candidates)?;
        Self::new(clients, candidates, g)
    }

    pub fn clients(&self) -> &[Point] {
        &self.clients
    }

    pub fn candidates(&self) -> &[Point] {
        &self.candidates
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// `sum_p d(p, S)`, with `d(p, ∅) = G`.
    pub fn cost(&self, set: &[Element]) -> f64 {
        self.clients
            .iter()
            .map(|&p| set.iter().map(|&e| manhattan(p, self.candidates[e])).fold(self.normalizer, f64::min))
            .sum()
    }

    /// Clustering cost recovered from an objective value.
    pub fn cost_from_value(&self, value: f64) -> f64 {
        self.normalizer * (self.clients.len() as f64 - value)
    }

    /// Direct per-client evaluation with no cache, for cross-checking.
    pub fn evaluate_naive(&self, set: &[Element]) -> f64 {
        self.clients
            .iter()
            .map(|&p| {
                let d = set.iter().map(|&e| manhattan(p, self.candidates[e])).fold(self.normalizer, f64::min);
                1.0 - d / self.normalizer
            })
            .sum()
    }
}

impl Oracle for KMedians {
    type State = NearestDistances;

    fn ground_size(&self) -> usize {
        self.candidates.len()
    }

    fn num_agents(&self) -> Option<usize> {
        Some(self.clients.len())
    }

    fn empty_state(&self) -> Self::State {
        NearestDistances { nearest: vec![self.normalizer; self.clients.len()], size: 0 }
    }

    fn state_value(&self, state: &Self::State) -> f64 {
        state.nearest.iter().map(|d| 1.0 - d / self.normalizer).sum()
    }

    fn state_gain(&self, state: &Self::State, e: Element) -> f64 {
        let v = self.candidates[e];
        let saved: f64 = self
            .clients
            .iter()
            .zip(&state.nearest)
            .map(|(&p, &cur)| (cur - manhattan(p, v)).max(0.0))
            .sum();
        saved / self.normalizer
    }

    fn state_insert(&self, state: &mut Self::State, e: Element) {
        let v = self.candidates[e];
        for (&p, cur) in self.clients.iter().zip(state.nearest.iter_mut()) {
            *cur = cur.min(manhattan(p, v));
        }
        state.size += 1;
    }
}

/// Max-coverage with singleton sets: each record of the multiset `D` is an
/// agent worth 1 once its element is chosen.
#[derive(Debug, Clone)]
pub struct Coverage {
    counts: Vec<f64>,
    records: usize,
}

impl Coverage {
    pub fn new(dataset: &[Element], universe_size: usize) -> Result<Self> {
        let mut counts = vec![0.0; universe_size];
        for &e in dataset {
            *counts
                .get_mut(e)
                .ok_or_else(|| Error::Parameter(format!("record {e} outside universe of size {universe_size}")))? += 1.0;
        }
        Ok(Self { counts, records: dataset.len() })
    }

    pub fn records(&self) -> usize {
        self.records
    }
}

impl Oracle for Coverage {
    type State = (Vec<bool>, f64);

    fn ground_size(&self) -> usize {
        self.counts.len()
    }
    fn num_agents(&self) -> Option<usize> {
        Some(self.records)
    }
    fn empty_state(&self) -> Self::State {
        (vec![false; self.counts.len()], 0.0)
    }
    fn state_value(&self, state: &Self::State) -> f64 {
        state.1
    }
    fn state_gain(&self, state: &Self::State, e: Element) -> f64 {
        if state.0[e] {
            0.0
        } else {
            self.counts[e]
        }
    }
    fn state_insert(&self, state: &mut Self::State, e: Element) {
        if !state.0[e] {
            state.0[e] = true;
            state.1 += self.counts[e];
        }
    }
}

/// Coverage oracle over `0..universe_size` for a multiset of records.
pub fn coverage_oracle(dataset: &[Element], universe_size: usize) -> Result<Coverage> {
    Coverage::new(dataset, universe_size)
}

/// Lower-bound instance: a hidden `k`-subset `A` of the universe, each member
/// repeated `L` times.
#[derive(Debug, Clone)]
pub struct HardCoverageInstance {
    pub universe: Vec<Element>,
    pub target: Vec<Element>,
    pub multiplicity: usize,
    pub dataset: Vec<Element>,
    pub optimum: f64,
    pub warnings: Vec<String>,
}

impl HardCoverageInstance {
    pub fn oracle(&self) -> Coverage {
        Coverage::new(&self.dataset, self.universe.len()).expect("dataset drawn from the universe")
    }
}

/// Multiplicity `L = ceil(ln(c (e^eps - 1) / delta) / (2 eps))`, at least 1.
pub fn hard_instance_multiplicity(epsilon: f64, delta: f64, c: f64) -> Result<usize> {
    ensure_positive("epsilon", epsilon)?;
    ensure_positive("delta", delta)?;
    ensure_positive("c", c)?;
    let raw = (c * epsilon.exp_m1() / delta).ln() / (2.0 * epsilon);
    Ok(raw.ceil().max(1.0) as usize)
}

/// Samples the target uniformly and builds `D_A = A x [L]`.
///
/// The regime checks follow the chained-neighbour argument, which moves
/// through `2 eps` per step: it wants `n >= k (e^{2 eps} - 1) / (2 delta)` and
/// `c >= 8 delta / (e^{2 eps} - 1)`. Violations are reported as warnings only.
pub fn generate_hard_instance<R: Rng + ?Sized>(
    universe_size: usize,
    k: usize,
    epsilon: f64,
    delta: f64,
    c: f64,
    rng: &mut R,
) -> Result<HardCoverageInstance> {
    if k == 0 || universe_size < k {
        return Err(Error::Parameter(format!("need 1 <= k <= universe size, got k = {k}, |U| = {universe_size}")));
    }
    let multiplicity = hard_instance_multiplicity(epsilon, delta, c)?;
    let mut target: Vec<Element> = sample(rng, universe_size, k).into_vec();
    target.sort_unstable();
    let dataset: Vec<Element> = target.iter().flat_map(|&a| std::iter::repeat_n(a, multiplicity)).collect();

    let mut warnings = Vec::new();
    let growth = (2.0 * epsilon).exp_m1();
    let n = dataset.len() as f64;
    let n_needed = k as f64 * growth / (2.0 * delta);
    if n < n_needed {
        warnings.push(format!("dataset size {n} is below k (e^(2 eps) - 1) / (2 delta) = {n_needed:.3}"));
    }
    let c_needed = 8.0 * delta / growth;
    if c < c_needed {
        warnings.push(format!("approximation factor c = {c} is below 8 delta / (e^(2 eps) - 1) = {c_needed:.3e}"));
    }
    for w in &warnings {
        log::warn!("hard instance outside lower-bound regime: {w}");
    }
    Ok(HardCoverageInstance {
        universe: (0..universe_size).collect(),
        target,
        multiplicity,
        optimum: (k * multiplicity) as f64,
        dataset,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submodular::{brute_force_opt, check_submodular_monotone, marginal_gain, sensitivity_probe};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
        (0..n).map(|_| Point::new(rng.random::<f64>() * 20.0, rng.random::<f64>() * 10.0)).collect()
    }

    #[test]
    fn manhattan_basics() {
        assert_eq!(manhattan(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 7.0);
        let p = Point::new(-1.5, 2.25);
        assert_eq!(manhattan(p, p), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let a = Point::new(rng.random::<f64>() * 100.0 - 50.0, rng.random::<f64>() * 7.0);
            let b = Point::new(rng.random::<f64>() * 3.0, rng.random::<f64>() * 100.0 - 50.0);
            assert_eq!(manhattan(a, b), manhattan(b, a));
        }
    }

    #[test]
    fn kmedians_hand_value() {
        let f = KMedians::new(vec![Point::new(0.0, 0.0)], vec![Point::new(3.0, 4.0)], 10.0).unwrap();
        assert!((f.evaluate(&[0]) - 0.3).abs() < 1e-15);
        assert_eq!(f.evaluate(&[]), 0.0);
        assert_eq!(f.cost(&[]), 10.0);
        assert_eq!(f.cost(&[0]), 7.0);
    }

    #[test]
    fn kmedians_rejects_small_normalizer() {
        let r = KMedians::new(vec![Point::new(0.0, 0.0)], vec![Point::new(3.0, 4.0)], 6.9);
        assert!(matches!(r, Err(Error::Parameter(_))));
        assert!(KMedians::new(vec![Point::new(0.0, 0.0)], vec![], 1.0).is_err());
    }

    #[test]
    fn kmedians_cost_identity_and_cache() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = KMedians::with_default_normalizer(random_points(60, &mut rng), random_points(25, &mut rng)).unwrap();
        for _ in 0..100 {
            let set: Vec<usize> = (0..25).filter(|_| rng.random_bool(0.2)).collect();
            let value = f.evaluate(&set);
            let expected_cost = f.normalizer() * 60.0 - f.normalizer() * value;
            assert!((f.cost(&set) - expected_cost).abs() <= 1e-9 * expected_cost.max(1.0));
            assert!((value - f.evaluate_naive(&set)).abs() <= 1e-9 * value.max(1.0));
        }
        for _ in 0..1000 {
            let set: Vec<usize> = (0..25).filter(|_| rng.random_bool(0.3)).collect();
            let e = rng.random_range(0..25);
            if set.contains(&e) {
                continue;
            }
            let mut bigger = set.clone();
            bigger.push(e);
            let diff = f.evaluate_naive(&bigger) - f.evaluate_naive(&set);
            let gain = marginal_gain(&f, e, &set).gain;
            assert!((gain - diff).abs() <= 1e-9 * diff.abs().max(1.0), "{gain} vs {diff}");
        }
    }

    #[test]
    fn kmedians_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let clients = random_points(50, &mut rng);
        let candidates = random_points(20, &mut rng);
        let g = default_normalizer(&clients, &candidates).unwrap();
        let f = KMedians::new(clients.clone(), candidates.clone(), g).unwrap();
        let ground: Vec<usize> = (0..20).collect();
        let report = check_submodular_monotone(&f, &ground, 10_000, &mut rng);
        assert!(report.passed(), "{:?}", &report.violations[..report.violations.len().min(3)]);
        let builder = |ps: &[Point]| KMedians::new(ps.to_vec(), candidates.clone(), g).unwrap();
        assert!(sensitivity_probe(builder, &clients, 500, &mut rng) <= 1.0 + 1e-9);
    }

    #[test]
    fn coverage_counts() {
        let f = coverage_oracle(&[0, 0, 1], 3).unwrap();
        assert_eq!(f.evaluate(&[0]), 2.0);
        assert_eq!(f.evaluate(&[]), 0.0);
        assert_eq!(f.evaluate(&[0, 1, 2]), 3.0);
        assert_eq!(f.num_agents(), Some(3));
        assert!(coverage_oracle(&[5], 3).is_err());
    }

    #[test]
    fn multiplicity_rounding() {
        assert_eq!(hard_instance_multiplicity(1.0, 0.01, 1.0).unwrap(), 3);
        assert!(hard_instance_multiplicity(0.0, 0.01, 1.0).is_err());
    }

    #[test]
    fn hard_instance_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inst = generate_hard_instance(20, 3, 1.0, 0.01, 1.0, &mut rng).unwrap();
        assert_eq!(inst.dataset.len(), 3 * inst.multiplicity);
        assert_eq!(inst.target.len(), 3);
        assert_eq!(inst.optimum, 9.0);
        let f = inst.oracle();
        assert_eq!(f.evaluate(&inst.target), inst.optimum);
        let (_, best) = brute_force_opt(&f, &inst.universe, 3).unwrap();
        assert_eq!(best, inst.optimum);
        assert!(!inst.warnings.is_empty());
        assert!(generate_hard_instance(2, 3, 1.0, 0.01, 1.0, &mut rng).is_err());
    }
}
