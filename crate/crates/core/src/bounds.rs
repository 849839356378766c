//! Chernoff bounds for Poisson variables and an empirical tail check.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{config, Result};

/// Grid resolution for the minimisation over `theta`.
const THETA_STEPS: usize = 20_000;

/// Tail bounds for `P ~ Poisson(mu)`:
///
/// * `lower`: `P(P < (1 - eps) mu) < exp(-mu eps^2 / 2)`;
/// * `upper`: `P(P > (1 + eps) mu) < exp(-mu eps^2 / 4)`;
/// * `general`: `P(P > C mu) <= exp(-mu (1 - e^theta + theta C))`,
///   minimised over `theta >= 0` on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffBounds {
    pub mu: f64,
    pub epsilon: f64,
    pub c: f64,
    pub lower: f64,
    pub upper: f64,
    pub general: f64,
    /// Grid minimiser of the general bound.
    pub theta: f64,
}

/// The exponent `1 - e^theta + theta C` of the general bound.
pub fn general_exponent(theta: f64, c: f64) -> f64 {
    1.0 - theta.exp() + theta * c
}

pub fn poisson_chernoff_bounds(mu: f64, epsilon: f64, c: f64) -> Result<ChernoffBounds> {
    if !(mu > 0.0 && mu.is_finite()) {
        return config(format!("mu must be positive, got {mu}"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return config(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return config(format!("C must be positive, got {c}"));
    }
    // Negative theta does not give a valid upper-tail bound (Markov's
    // inequality on e^{theta P} needs theta >= 0), so the search starts at 0
    // where the bound is the trivial 1.
    let theta_max = 2.0 * c.ln().max(1.0);
    let (mut best, mut theta) = (0.0, 0.0);
    for i in 0..=THETA_STEPS {
        let th = theta_max * i as f64 / THETA_STEPS as f64;
        let e = general_exponent(th, c);
        if e > best {
            best = e;
            theta = th;
        }
    }
    Ok(ChernoffBounds {
        mu,
        epsilon,
        c,
        lower: (-mu * epsilon * epsilon / 2.0).exp(),
        upper: (-mu * epsilon * epsilon / 4.0).exp(),
        general: (-mu * best).exp(),
        theta,
    })
}

/// Empirical tail frequencies of `Poisson(mu)` next to the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheck {
    pub bounds: ChernoffBounds,
    pub samples: u64,
    pub lower_freq: f64,
    pub upper_freq: f64,
    pub general_freq: f64,
}

impl TailCheck {
    pub fn holds(&self) -> bool {
        self.lower_freq <= self.bounds.lower
            && self.upper_freq <= self.bounds.upper
            && self.general_freq <= self.bounds.general
    }
}

pub fn poisson_tail_check(
    mu: f64,
    epsilon: f64,
    c: f64,
    samples: u64,
    seed: u64,
) -> Result<TailCheck> {
    let bounds = poisson_chernoff_bounds(mu, epsilon, c)?;
    if samples == 0 {
        return config("tail check needs at least one sample");
    }
    let dist = Poisson::new(mu).map_err(|e| crate::Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi, mut gen) = (0u64, 0u64, 0u64);
    for _ in 0..samples {
        let x: f64 = dist.sample(&mut rng);
        if x < (1.0 - epsilon) * mu {
            lo += 1;
        }
        if x > (1.0 + epsilon) * mu {
            hi += 1;
        }
        if x > c * mu {
            gen += 1;
        }
    }
    let n = samples as f64;
    Ok(TailCheck {
        bounds,
        samples,
        lower_freq: lo as f64 / n,
        upper_freq: hi as f64 / n,
        general_freq: gen as f64 / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_tail_value() {
        let b = poisson_chernoff_bounds(100.0, 0.1, 1.5).unwrap();
        assert!((b.lower - (-0.5f64).exp()).abs() < 1e-15);
        assert!((b.upper - (-0.25f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn small_epsilon_bounds_tend_to_one() {
        let b = poisson_chernoff_bounds(100.0, 1e-9, 2.0).unwrap();
        assert!(1.0 - b.lower < 1e-12 && 1.0 - b.upper < 1e-12);
    }

    #[test]
    fn general_bound_matches_closed_form_optimum() {
        // For C > 1 the exponent is maximised at theta = ln C with value
        // 1 - C + C ln C.
        for c in [1.2, 2.0, 5.0] {
            let b = poisson_chernoff_bounds(10.0, 0.5, c).unwrap();
            let want = (-10.0 * (1.0 - c + c * f64::ln(c))).exp();
            assert!((b.general / want - 1.0).abs() < 1e-6, "{c}");
            assert!((b.theta - f64::ln(c)).abs() < 1e-3);
        }
        // Below the mean the bound is trivial.
        let b = poisson_chernoff_bounds(10.0, 0.5, 0.5).unwrap();
        assert_eq!(b.general, 1.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(poisson_chernoff_bounds(0.0, 0.1, 1.0).is_err());
        assert!(poisson_chernoff_bounds(1.0, 1.0, 1.0).is_err());
        assert!(poisson_chernoff_bounds(1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn empirical_tail_below_bound() {
        let t = poisson_tail_check(100.0, 0.1, 1.3, 100_000, 7).unwrap();
        assert!(t.holds(), "{t:?}");
        assert!(t.lower_freq > 0.0);
    }
}
