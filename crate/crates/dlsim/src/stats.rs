//! Empirical CDF, nearest-rank percentiles, and the Jain fairness index.

use crate::error::{Error, Result};

/// Empirical CDF over pooled samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("CDF of an empty sample set"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN throughputs"));
        Ok(EmpiricalCdf { sorted })
    }

    /// The (value, cumulative probability) staircase, one step per sample.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, (i + 1) as f64 / n))
            .collect()
    }

    /// Nearest-rank percentile; `p` in (0, 100].
    pub fn percentile(&self, p: f64) -> Result<f64> {
        if !(0.0 < p && p <= 100.0) {
            return Err(Error::invalid(format!("percentile {p} outside (0, 100]")));
        }
        let n = self.sorted.len();
        let rank = ((p / 100.0 * n as f64).ceil() as usize).clamp(1, n);
        Ok(self.sorted[rank - 1])
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }
}

/// Jain fairness index (sum x)^2 / (n sum x^2); 1 is perfectly fair.
pub fn jain_index(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("fairness of an empty set"));
    }
    let sum: f64 = values.iter().sum();
    let sum_sq: f64 = values.iter().map(|v| v * v).sum();
    if sum_sq == 0.0 {
        // All-zero allocations are degenerate but perfectly equal.
        return Ok(1.0);
    }
    Ok(sum * sum / (values.len() as f64 * sum_sq))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_distribution_is_a_step() {
        let cdf = EmpiricalCdf::new(&[5.0; 8]).unwrap();
        let pts = cdf.points();
        assert!(pts.iter().all(|&(x, _)| x == 5.0));
        assert_eq!(pts.last().unwrap().1, 1.0);
        assert_eq!(cdf.percentile(50.0).unwrap(), 5.0);
        assert_eq!(cdf.percentile(100.0).unwrap(), 5.0);
    }

    #[test]
    fn cdf_monotone_reaching_one() {
        let cdf = EmpiricalCdf::new(&[3.0, 1.0, 2.0, 2.5]).unwrap();
        let pts = cdf.points();
        for w in pts.windows(2) {
            assert!(w[1].0 >= w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
        assert_eq!(pts.last().unwrap().1, 1.0);
    }

    #[test]
    fn nearest_rank_percentiles() {
        let cdf = EmpiricalCdf::new(&[10.0, 20.0, 30.0, 40.0]).unwrap();
        assert_eq!(cdf.percentile(50.0).unwrap(), 20.0);
        assert_eq!(cdf.percentile(95.0).unwrap(), 40.0);
        assert_eq!(cdf.percentile(100.0).unwrap(), 40.0);
        assert_eq!(cdf.percentile(25.0).unwrap(), 10.0);
        assert!(cdf.percentile(0.0).is_err());
        assert!(cdf.percentile(101.0).is_err());
    }

    #[test]
    fn empty_input_rejected() {
        assert!(EmpiricalCdf::new(&[]).is_err());
        assert!(jain_index(&[]).is_err());
    }

    #[test]
    fn jain_extremes() {
        assert!((jain_index(&[4.0; 10]).unwrap() - 1.0).abs() < 1e-12);
        let one_hog = jain_index(&[100.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((one_hog - 0.25).abs() < 1e-12);
        assert_eq!(jain_index(&[0.0, 0.0]).unwrap(), 1.0);
    }
}
