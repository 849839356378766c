//! Interval estimates, goodness-of-fit tests and least-squares fits.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::engine::Verdict;
use crate::error::{config, Result};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Two-sided standard normal quantile for a confidence level.
pub fn z_value(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return config(format!("confidence {confidence} outside (0, 1)"));
    }
    Ok(std_normal().inverse_cdf(1.0 - (1.0 - confidence) / 2.0))
}

/// Wilson score interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonInterval {
    pub successes: u64,
    pub trials: u64,
    pub confidence: f64,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<WilsonInterval> {
    if trials == 0 {
        return config("Wilson interval needs at least one trial");
    }
    if successes > trials {
        return config(format!("{successes} successes out of {trials} trials"));
    }
    let z = z_value(confidence)?;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // Pin the endpoints exactly at the boundary cases.
    let lower = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let upper = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    Ok(WilsonInterval {
        successes,
        trials,
        confidence,
        point: p,
        lower: lower.min(p),
        upper: upper.max(p),
    })
}

impl WilsonInterval {
    /// True when the two intervals do not overlap.
    pub fn separated_from(&self, other: &WilsonInterval) -> bool {
        self.upper < other.lower || other.upper < self.lower
    }
}

/// Outcome proportions over a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalEstimate {
    pub trials: u64,
    pub survived: u64,
    pub extinct: u64,
    pub capped: u64,
    /// Bounded-region runs that ended with no target reached.
    pub exhausted: u64,
    pub survived_ci: WilsonInterval,
    pub extinct_ci: WilsonInterval,
    pub capped_ci: WilsonInterval,
}

impl SurvivalEstimate {
    pub fn from_verdicts(
        verdicts: impl IntoIterator<Item = Verdict>,
        confidence: f64,
    ) -> Result<Self> {
        let (mut s, mut e, mut c, mut x) = (0, 0, 0, 0);
        for v in verdicts {
            match v {
                Verdict::SurvivedToTarget => s += 1,
                Verdict::Extinct => e += 1,
                Verdict::Capped => c += 1,
                Verdict::Exhausted => x += 1,
            }
        }
        Self::from_counts(s, e, c, x, confidence)
    }

    pub fn from_counts(
        survived: u64,
        extinct: u64,
        capped: u64,
        exhausted: u64,
        confidence: f64,
    ) -> Result<Self> {
        let trials = survived + extinct + capped + exhausted;
        Ok(Self {
            trials,
            survived,
            extinct,
            capped,
            exhausted,
            survived_ci: wilson_interval(survived, trials, confidence)?,
            extinct_ci: wilson_interval(extinct, trials, confidence)?,
            capped_ci: wilson_interval(capped, trials, confidence)?,
        })
    }
}

/// Sample mean with standard deviation and standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

pub fn mean_estimate(xs: &[f64]) -> MeanEstimate {
    let n = xs.len();
    if n == 0 {
        return MeanEstimate {
            n,
            mean: f64::NAN,
            sd: f64::NAN,
            se: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    MeanEstimate {
        n,
        mean,
        sd,
        se: sd / (n as f64).sqrt(),
    }
}

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and
/// a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic critical value of the one-sample KS statistic at level
/// `alpha` (about `1.6276 / sqrt(n)` at 1%).
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

pub fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
}

/// Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean_estimate(xs).mean;
    let my = mean_estimate(ys).mean;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Ordinary least squares `y = a + b x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return config("least squares needs two or more paired points");
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return config("least squares needs distinct abscissae");
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_se = if xs.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_se,
    })
}

/// Least squares `y = b x` through the origin; returns `(b, se(b))`.
pub fn fit_through_origin(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.is_empty() {
        return config("fit needs one or more paired points");
    }
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if sxx == 0.0 {
        return config("fit needs a nonzero abscissa");
    }
    let b = xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / sxx;
    let se = if xs.len() > 1 {
        let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - b * x).powi(2)).sum();
        (rss / (xs.len() - 1) as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok((b, se))
}

/// Pooled two-proportion z statistic and its two-sided p-value.
pub fn two_proportion_test(s1: u64, n1: u64, s2: u64, n2: u64) -> Result<(f64, f64)> {
    if n1 == 0 || n2 == 0 || s1 > n1 || s2 > n2 {
        return config("invalid counts for a two-proportion test");
    }
    let (p1, p2) = (s1 as f64 / n1 as f64, s2 as f64 / n2 as f64);
    let pooled = (s1 + s2) as f64 / (n1 + n2) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        return Ok((0.0, 1.0));
    }
    let z = (p1 - p2) / se;
    let p = 2.0 * (1.0 - std_normal().cdf(z.abs()));
    Ok((z, p))
}
