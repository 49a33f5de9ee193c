use crate::error::{Error, Result};

use super::MIN_BATCHES;

/// Running Neumaier sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let s = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - s) + x;
        } else {
            self.comp += (x - s) + self.sum;
        }
        self.sum = s;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Per-batch numerator and denominator of a ratio estimator.
#[derive(Debug, Clone)]
pub(crate) struct RatioBatches {
    num: Vec<Compensated>,
    den: Vec<Compensated>,
}

impl RatioBatches {
    pub fn new(n_batches: usize) -> Self {
        Self {
            num: vec![Compensated::default(); n_batches],
            den: vec![Compensated::default(); n_batches],
        }
    }

    pub fn add(&mut self, batch: usize, num: f64, den: f64) {
        self.num[batch].add(num);
        self.den[batch].add(den);
    }

    pub fn total_den(&self) -> f64 {
        let mut d = Compensated::default();
        self.den.iter().for_each(|x| d.add(x.value()));
        d.value()
    }

    /// Pooled ratio `Σ num / Σ den` and the batch-means standard error of
    /// the per-batch ratios. Batches with an empty denominator are skipped;
    /// fewer than [`MIN_BATCHES`] usable batches is an error.
    pub fn estimate(&self) -> Result<(f64, f64)> {
        let mut num = Compensated::default();
        let mut den = Compensated::default();
        let mut ratios = Vec::with_capacity(self.num.len());
        for (n, d) in self.num.iter().zip(&self.den) {
            num.add(n.value());
            den.add(d.value());
            if d.value() > 0.0 {
                ratios.push(n.value() / d.value());
            }
        }
        let (_, se) = batch_ci(&ratios)?;
        Ok((num.value() / den.value(), se))
    }
}

/// Batch-means estimator: the mean of `batch_means` and its standard
/// error, the sample standard deviation over `√n`.
pub fn batch_ci(batch_means: &[f64]) -> Result<(f64, f64)> {
    let n = batch_means.len();
    if n < MIN_BATCHES {
        return Err(Error::Config(format!(
            "batch means need at least {MIN_BATCHES} batches, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = batch_means.iter().sum::<f64>() / nf;
    let var = batch_means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok((mean, (var / nf).sqrt()))
}
