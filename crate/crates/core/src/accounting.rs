//! Privacy budgets and noise calibration for the guess-ladder maximizer.
//!
//! The total budget `(epsilon, delta)` is split in half: `epsilon / 2` pays
//! for the `T` sparse-vector instances (composed under the chosen mode) and
//! `epsilon / 2` pays for the final private selection among their outputs.
//! Logarithms are natural throughout.

use std::f64::consts::LN_2;

use crate::error::{ensure_open_unit, ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionMode {
    Advanced,
    Basic,
}

impl std::str::FromStr for CompositionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "advanced" => Ok(Self::Advanced),
            "basic" => Ok(Self::Basic),
            other => Err(Error::Config(format!("unknown composition mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
    pub mode: CompositionMode,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64, mode: CompositionMode) -> Result<Self> {
        ensure_positive("epsilon", epsilon)?;
        ensure_open_unit("delta", delta)?;
        if epsilon >= 1.0 {
            static LARGE_EPSILON: std::sync::Once = std::sync::Once::new();
            LARGE_EPSILON.call_once(|| {
                log::warn!("epsilon = {epsilon} >= 1: noise formulas remain defined but the analysis assumes epsilon < 1")
            });
        }
        Ok(Self { epsilon, delta, mode })
    }
}

/// Which noise family the sparse-vector instances use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFamily {
    Laplace,
    Gumbel,
}

/// Per-instance budgets and noise scales derived from a [`PrivacyParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetSplit {
    pub per_guess_epsilon: f64,
    pub per_guess_delta: f64,
    pub selection_epsilon: f64,
    /// Laplace threshold scale; score noise uses twice this.
    pub laplace_sigma: Option<f64>,
    /// Gumbel scale shared by threshold and score noise.
    pub gumbel_gamma: Option<f64>,
    pub num_guesses: usize,
}

/// Coordinate-wise sum of `(epsilon_i, delta_i)` pairs.
pub fn basic_compose(budgets: &[(f64, f64)]) -> (f64, f64) {
    budgets.iter().fold((0.0, 0.0), |(e, d), &(ei, di)| (e + ei, d + di))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composed {
    pub epsilon: f64,
    pub delta: f64,
}

/// `k`-fold adaptive composition of `(epsilon, delta)` mechanisms:
/// `sqrt(2k ln(1/delta')) * epsilon + k * epsilon * (e^epsilon - 1)`, with
/// total failure probability `k * delta + delta'`.
pub fn advanced_compose(epsilon: f64, delta: f64, k: usize, delta_prime: f64) -> Result<Composed> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("epsilon must be non-negative, got {epsilon}")));
    }
    ensure_open_unit("delta'", delta_prime)?;
    let k = k as f64;
    let eps = (2.0 * k * (1.0 / delta_prime).ln()).sqrt() * epsilon + k * epsilon * epsilon.exp_m1();
    Ok(Composed { epsilon: eps, delta: k * delta + delta_prime })
}

/// Per-instance epsilon under advanced composition across `t` instances:
/// `epsilon / (4 sqrt(2 t ln((t + 1) / delta)))`.
pub fn advanced_per_guess_epsilon(t: usize, epsilon: f64, delta: f64) -> f64 {
    epsilon / (4.0 * (2.0 * t as f64 * ((t as f64 + 1.0) / delta).ln()).sqrt())
}

/// Laplace threshold scale for one sparse-vector instance with cutoff `k`
/// that must be `(epsilon, delta)`-private: `sqrt(32 k ln(1/delta)) / epsilon`.
pub fn sparse_laplace_sigma(k: usize, epsilon: f64, delta: f64) -> Result<f64> {
    ensure_positive("epsilon", epsilon)?;
    ensure_open_unit("delta", delta)?;
    Ok((32.0 * k as f64 * (1.0 / delta).ln()).sqrt() / epsilon)
}

/// Gumbel scale for one sparse-vector instance that must be
/// `(epsilon, delta)`-private on a decomposable objective:
/// `8 / (epsilon ln 2) * ln(2 / (epsilon delta))`.
pub fn sparse_gumbel_gamma(epsilon: f64, delta: f64) -> Result<f64> {
    ensure_positive("epsilon", epsilon)?;
    ensure_open_unit("delta", delta)?;
    Ok(8.0 / (epsilon * LN_2) * (2.0 / (epsilon * delta)).ln())
}

/// Laplace scale for the full ladder of `t` instances under advanced
/// composition, each instance allotted `delta / (t + 1)`.
pub fn laplace_sigma(k: usize, t: usize, epsilon: f64, delta: f64) -> Result<f64> {
    check_ladder_args(k.max(1), t, epsilon, delta)?;
    let eps_prime = advanced_per_guess_epsilon(t, epsilon, delta);
    sparse_laplace_sigma(k, eps_prime, delta / (t as f64 + 1.0))
}

/// Gumbel scale for the full ladder of `t` instances under advanced
/// composition, each instance allotted `delta / (t + 1)`.
pub fn gumbel_gamma(t: usize, epsilon: f64, delta: f64) -> Result<f64> {
    check_ladder_args(1, t, epsilon, delta)?;
    let eps_prime = advanced_per_guess_epsilon(t, epsilon, delta);
    sparse_gumbel_gamma(eps_prime, delta / (t as f64 + 1.0))
}

fn check_ladder_args(k: usize, t: usize, epsilon: f64, delta: f64) -> Result<()> {
    ensure_positive("epsilon", epsilon)?;
    ensure_open_unit("delta", delta)?;
    if k == 0 || t == 0 {
        return Err(Error::Parameter("k and T must be at least 1".into()));
    }
    if epsilon >= 1.0 {
        log::warn!("epsilon = {epsilon} >= 1 is outside the analysed regime");
    }
    Ok(())
}

/// Even split of `(epsilon, delta)` over `t` mechanisms.
pub fn basic_split(epsilon: f64, delta: f64, t: usize) -> Result<(f64, f64)> {
    if t == 0 {
        return Err(Error::Parameter("T must be at least 1".into()));
    }
    Ok((epsilon / t as f64, delta / t as f64))
}

/// Splits the budget for a ladder of `t` instances with cutoff `k`.
pub fn budget_split(params: &PrivacyParams, k: usize, t: usize, family: NoiseFamily) -> Result<BudgetSplit> {
    if t == 0 {
        return Err(Error::Parameter("T must be at least 1".into()));
    }
    let half = params.epsilon / 2.0;
    let (per_guess_epsilon, per_guess_delta) = match params.mode {
        CompositionMode::Advanced => (
            advanced_per_guess_epsilon(t, params.epsilon, params.delta),
            params.delta / (t as f64 + 1.0),
        ),
        CompositionMode::Basic => basic_split(half, params.delta, t)?,
    };
    let k = k.max(1);
    let (laplace_sigma, gumbel_gamma) = match family {
        NoiseFamily::Laplace => (Some(sparse_laplace_sigma(k, per_guess_epsilon, per_guess_delta)?), None),
        NoiseFamily::Gumbel => (None, Some(sparse_gumbel_gamma(per_guess_epsilon, per_guess_delta)?)),
    };
    Ok(BudgetSplit {
        per_guess_epsilon,
        per_guess_delta,
        selection_epsilon: half,
        laplace_sigma,
        gumbel_gamma,
        num_guesses: t,
    })
}

impl BudgetSplit {
    /// Total `(epsilon, delta)` of the ladder plus the selection step, composed
    /// under `mode`.
    pub fn total(&self, mode: CompositionMode) -> Result<(f64, f64)> {
        let (ladder_eps, ladder_delta) = match mode {
            CompositionMode::Basic => {
                basic_compose(&vec![(self.per_guess_epsilon, self.per_guess_delta); self.num_guesses])
            }
            CompositionMode::Advanced => {
                let c = advanced_compose(self.per_guess_epsilon, self.per_guess_delta, self.num_guesses, self.per_guess_delta)?;
                (c.epsilon, c.delta)
            }
        };
        Ok(basic_compose(&[(ladder_eps, ladder_delta), (self.selection_epsilon, 0.0)]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn basic_compose_sums() {
        let (e, d) = basic_compose(&[(0.1, 1e-6), (0.2, 1e-6)]);
        assert!((e - 0.3).abs() < 1e-15 && (d - 2e-6).abs() < 1e-20);
        assert_eq!(basic_compose(&[]), (0.0, 0.0));
        let (e, d) = basic_compose(&[(0.25, 1e-5); 8]);
        assert_eq!((e, d), (2.0, 8e-5));
    }

    #[test]
    fn advanced_compose_values() {
        assert_eq!(advanced_compose(0.0, 0.0, 10, 1e-6).unwrap().epsilon, 0.0);
        // sqrt(20 ln 1e6) * 0.1 + 10 * 0.1 * (e^0.1 - 1)
        let c = advanced_compose(0.1, 1e-7, 10, 1e-6).unwrap();
        assert!((c.epsilon - 1.767_429_054).abs() < 1e-6, "{}", c.epsilon);
        assert!(rel(c.delta, 10.0 * 1e-7 + 1e-6) < 1e-12);
        assert!(advanced_compose(0.1, 0.0, 3, 0.0).is_err());
    }

    #[test]
    fn advanced_inverse_recomposes_below_target() {
        for &(target, k, delta) in &[(0.9, 10, 1e-5), (0.5, 50, 1e-6), (0.99, 3, 1e-3)] {
            let per_call = target / (2.0 * (2.0 * k as f64 * (1.0f64 / delta).ln()).sqrt());
            let c = advanced_compose(per_call, delta, k, delta).unwrap();
            assert!(c.epsilon <= target, "{} > {}", c.epsilon, target);
        }
    }

    #[test]
    fn laplace_sigma_regression() {
        let eps_prime = advanced_per_guess_epsilon(9, 1.0, 1e-3);
        assert!((eps_prime - 0.019_416_0).abs() < 1e-6, "{eps_prime}");
        let sigma = laplace_sigma(5, 9, 1.0, 1e-3).unwrap();
        assert!((sigma - 1977.115).abs() < 0.01, "{sigma}");
    }

    #[test]
    fn laplace_sigma_shape() {
        let s1 = laplace_sigma(5, 9, 0.4, 1e-3).unwrap();
        let s2 = laplace_sigma(5, 9, 0.8, 1e-3).unwrap();
        assert!(rel(s1, 2.0 * s2) < 1e-12);
        assert!(laplace_sigma(6, 9, 0.4, 1e-3).unwrap() > s1);
        assert!(laplace_sigma(5, 10, 0.4, 1e-3).unwrap() > s1);
    }

    #[test]
    fn gumbel_single_instance_value() {
        let g = sparse_gumbel_gamma(0.5, 1e-4).unwrap();
        assert!((g - 244.6).abs() < 0.1, "{g}");
    }

    #[test]
    fn gumbel_gamma_ladder_value() {
        // Independent evaluation: eps' = 0.5 / (4 sqrt(20 ln(11e4))), delta' = 1e-4 / 11.
        let g = gumbel_gamma(10, 0.5, 1e-4).unwrap();
        assert!(rel(g, 24_063.800_501_8) < 1e-9, "{g}");
    }

    #[test]
    fn gumbel_gamma_positive_and_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 1..100 {
            let eps = i as f64 / 100.0;
            let g = gumbel_gamma(10, eps, 1e-4).unwrap();
            assert!(g > 0.0 && g < prev);
            prev = g;
        }
    }

    #[test]
    fn basic_split_identity() {
        assert_eq!(basic_split(1.0, 1e-4, 10).unwrap(), (0.1, 1e-5));
        assert_eq!(basic_split(0.7, 1e-3, 1).unwrap(), (0.7, 1e-3));
        assert!(basic_split(1.0, 1e-4, 0).is_err());
    }

    #[test]
    fn budget_split_totals() {
        for mode in [CompositionMode::Basic, CompositionMode::Advanced] {
            let p = PrivacyParams::new(0.8, 1e-5, mode).unwrap();
            for family in [NoiseFamily::Laplace, NoiseFamily::Gumbel] {
                let split = budget_split(&p, 5, 12, family).unwrap();
                assert_eq!(split.selection_epsilon, 0.4);
                let (e, d) = split.total(mode).unwrap();
                assert!(e <= 0.8 * (1.0 + 1e-9), "{mode:?} {e}");
                assert!(d <= 1e-5 * (1.0 + 1e-9), "{mode:?} {d}");
                assert_eq!(split.laplace_sigma.is_some(), family == NoiseFamily::Laplace);
                assert_eq!(split.gumbel_gamma.is_some(), family == NoiseFamily::Gumbel);
            }
        }
    }

    #[test]
    fn privacy_params_validation() {
        assert!(PrivacyParams::new(0.0, 0.1, CompositionMode::Basic).is_err());
        assert!(PrivacyParams::new(1.0, 1.0, CompositionMode::Basic).is_err());
        assert!(PrivacyParams::new(1.0, 0.0, CompositionMode::Basic).is_err());
        assert!(PrivacyParams::new(2.0, 0.5, CompositionMode::Advanced).is_ok());
        assert_eq!("Basic".parse::<CompositionMode>().unwrap(), CompositionMode::Basic);
        assert!("moments".parse::<CompositionMode>().is_err());
    }
}
