use std::io::Write;

use crate::error::Result;
use crate::series::RngSpec;
use crate::stats;

/// Empirical quantiles of a simulated statistic together with the
/// provenance needed to regenerate them.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    pub probs: Vec<f64>,
    pub values: Vec<f64>,
    pub reps: usize,
    pub seed: RngSpec,
}

impl QuantileTable {
    pub const DEFAULT_PROBS: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.50, 0.90, 0.95, 0.99];

    pub fn from_sample(sample: &[f64], probs: &[f64], seed: RngSpec) -> Self {
        let mut s = sample.to_vec();
        s.sort_by(f64::total_cmp);
        let mut probs = probs.to_vec();
        probs.sort_by(f64::total_cmp);
        let values = probs.iter().map(|p| stats::quantile_sorted(&s, *p)).collect();
        QuantileTable { probs, values, reps: sample.len(), seed }
    }

    /// Value at probability `p`, which must be one of the tabulated levels.
    pub fn get(&self, p: f64) -> Option<f64> {
        self.probs.iter().position(|q| (q - p).abs() < 1e-12).map(|i| self.values[i])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#schema=quantile-table/v1 reps={} seed={} stream={}", self.reps, self.seed.seed, self.seed.stream)?;
        writeln!(w, "prob,value")?;
        for (p, v) in self.probs.iter().zip(&self.values) {
            writeln!(w, "{p},{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_are_monotone() {
        let sample: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64).collect();
        let t = QuantileTable::from_sample(&sample, &QuantileTable::DEFAULT_PROBS, RngSpec::default());
        assert!(t.values.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(t.get(0.5), Some(499.5));
        assert_eq!(t.get(0.3), None);
    }
}
