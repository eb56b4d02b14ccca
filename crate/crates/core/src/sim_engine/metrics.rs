use alloc::vec::Vec;

use crate::numerology::{Micros, Tick};

/// Counters from which every reported rate is derived, so that two
/// reports compare exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetricsReport {
    pub packets_simulated: u64,
    /// First-retransmission RTT of each retransmitted packet, in packet order.
    pub rtt_ticks: Vec<Tick>,
    /// `successes_by_attempt[i]` packets were delivered on attempt `i + 1`.
    pub successes_by_attempt: Vec<u64>,
    pub failures: u64,
    pub feedback_transmissions: u64,
    pub feedback_lost: u64,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl MetricsReport {
    pub(crate) fn record_success(&mut self, attempt: u32) {
        let i = attempt as usize - 1;
        if self.successes_by_attempt.len() <= i {
            self.successes_by_attempt.resize(i + 1, 0);
        }
        self.successes_by_attempt[i] += 1;
    }

    pub fn rtt_min(&self) -> Option<Tick> {
        self.rtt_ticks.iter().copied().min()
    }

    pub fn rtt_max(&self) -> Option<Tick> {
        self.rtt_ticks.iter().copied().max()
    }

    fn rtt_sum(&self) -> u128 {
        self.rtt_ticks.iter().map(|t| t.0 as u128).sum()
    }

    pub fn rtt_mean(&self) -> Option<Micros> {
        let n = self.rtt_ticks.len() as u128;
        (n > 0).then(|| Micros::from_ratio(self.rtt_sum(), n))
    }

    pub fn rtt_mean_ticks(&self) -> Option<f64> {
        let n = self.rtt_ticks.len();
        (n > 0).then(|| self.rtt_sum() as f64 / n as f64)
    }

    /// Sample standard deviation in ticks. The variance numerator is kept
    /// in integers, so identical samples give exactly 0.
    pub fn rtt_stddev_ticks(&self) -> Option<f64> {
        let n = self.rtt_ticks.len() as u128;
        if n < 2 {
            return None;
        }
        let sum = self.rtt_sum();
        let sum_sq: u128 = self.rtt_ticks.iter().map(|t| (t.0 as u128) * (t.0 as u128)).sum();
        let numer = n * sum_sq - sum * sum;
        if numer == 0 {
            return Some(0.0);
        }
        Some(libm::sqrt(numer as f64 / (n * (n - 1)) as f64))
    }

    pub fn first_attempt_success_rate(&self) -> Option<f64> {
        ratio(
            self.successes_by_attempt.first().copied().unwrap_or(0),
            self.packets_simulated,
        )
    }

    /// Fraction of packets delivered on each attempt, padded to `attempts`.
    pub fn success_rate_by_attempt(&self, attempts: usize) -> Option<Vec<f64>> {
        let n = self.packets_simulated;
        (n > 0).then(|| {
            (0..attempts.max(self.successes_by_attempt.len()))
                .map(|i| self.successes_by_attempt.get(i).copied().unwrap_or(0) as f64 / n as f64)
                .collect()
        })
    }

    pub fn residual_failure_rate(&self) -> Option<f64> {
        ratio(self.failures, self.packets_simulated)
    }

    pub fn ack_nack_loss_ratio(&self) -> Option<f64> {
        ratio(self.feedback_lost, self.feedback_transmissions)
    }

    /// Every packet reached exactly one terminal state.
    pub fn is_conserved(&self) -> bool {
        self.successes_by_attempt.iter().sum::<u64>() + self.failures == self.packets_simulated
    }
}
