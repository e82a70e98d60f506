//! Monte Carlo summaries.

use serde::{Deserialize, Serialize};

/// One-sided 99% standard normal quantile.
pub const Z_99_ONE_SIDED: f64 = 2.326_347_874_040_840_8;

/// Monte Carlo point estimate.
///
/// `stderr` is the sample standard deviation (n−1 denominator) over `√reps`; it is 0
/// when fewer than two samples were averaged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    /// Number of samples averaged.
    pub reps: u64,
    /// Samples kept after conditioning; equals `reps` for unconditional estimates.
    pub accepted: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64], seed: u64) -> Self {
        let n = samples.len();
        let mean = if n == 0 {
            f64::NAN
        } else {
            samples.iter().sum::<f64>() / n as f64
        };
        let stderr = if n < 2 {
            0.0
        } else {
            let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        };
        Estimate {
            value: mean,
            stderr,
            reps: n as u64,
            accepted: n as u64,
            seed,
        }
    }

    pub fn from_indicators(hits: &[bool], seed: u64) -> Self {
        let samples: Vec<f64> = hits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self::from_samples(&samples, seed)
    }

    /// `value − z·stderr`.
    pub fn lower(&self, z: f64) -> f64 {
        self.value - z * self.stderr
    }

    pub fn upper(&self, z: f64) -> f64 {
        self.value + z * self.stderr
    }

    /// `|value − target| ≤ k·stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

/// Least-squares line `y = intercept + slope·x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

pub fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_of_bernoulli() {
        let hits: Vec<bool> = (0..100).map(|i| i % 4 == 0).collect();
        let e = Estimate::from_indicators(&hits, 0);
        assert_eq!(e.value, 0.25);
        // sample variance 0.25*0.75*100/99
        let expected = (0.1875f64 * 100.0 / 99.0).sqrt() / 10.0;
        assert!((e.stderr - expected).abs() < 1e-15);
        assert_eq!(Estimate::from_indicators(&[true; 10], 0).stderr, 0.0);
    }

    #[test]
    fn least_squares() {
        let xs = [3.0, 4.0, 5.0, 6.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 * x - 2.0).collect();
        let (a, b) = ols(&xs, &ys).unwrap();
        assert!((a + 2.0).abs() < 1e-12 && (b - 1.5).abs() < 1e-12);
        assert!(ols(&[1.0], &[1.0]).is_none());
    }
}
