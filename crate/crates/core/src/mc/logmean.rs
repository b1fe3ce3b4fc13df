//! Streaming `log(mean(exp(x)))`.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct LogMeanAccumulator {
    max: f64,
    /// `sum exp(x_i - max)`
    scaled: f64,
    count: u64,
}

impl Default for LogMeanAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl LogMeanAccumulator {
    pub fn new() -> Self {
        LogMeanAccumulator { max: f64::NEG_INFINITY, scaled: 0.0, count: 0 }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.scaled += (x - self.max).exp();
        }
    }

    pub fn merge(&mut self, other: &LogMeanAccumulator) {
        self.count += other.count;
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        } else {
            self.scaled += other.scaled * (other.max - self.max).exp();
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn value(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::EmptyStream);
        }
        if self.max == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.max + self.scaled.ln() - (self.count as f64).ln())
    }
}

pub fn log_mean_exp<I: IntoIterator<Item = f64>>(xs: I) -> Result<f64> {
    let mut acc = LogMeanAccumulator::new();
    xs.into_iter().for_each(|x| acc.push(x));
    acc.value()
}
