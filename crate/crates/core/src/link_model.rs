//! Stochastic link abstraction: logistic BLER in dB, chase-combining gain
//! per retransmission and ACK/NACK loss, drawn from seeded ChaCha streams.
//!
//! Decoding and feedback draws come from separate ChaCha8 streams of the
//! same key, so adding draws to one never shifts the other.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

const DECODE_STREAM: u64 = 0;
const ACK_STREAM: u64 = 1;
/// Key domain for per-row seed derivation, kept apart from link keys.
const ROW_SEED_DOMAIN: u64 = 0x5eed_0f5e_ed0f_u64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("{field} = {value} is outside [0, 1]")]
    ProbabilityOutOfRange { field: &'static str, value: f64 },
    #[error("MCS table midpoints must strictly increase with index (at index {0})")]
    McsNotMonotone(u32),
    #[error("MCS index {0} not in table")]
    UnknownMcs(u32),
    #[error("BLER slope of MCS {0} must be positive and finite")]
    InvalidSlope(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct McsEntry {
    pub index: u32,
    pub modulation_order: u32,
    /// Code rate as `numerator / denominator`.
    pub code_rate: (u32, u32),
    pub tbs_bits: u32,
    pub bler_midpoint_snr_db: f64,
    /// Logistic steepness per dB.
    pub bler_slope: f64,
}

/// MCS entries ordered by index.
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    pub fn new(mut entries: Vec<McsEntry>) -> Result<Self, LinkError> {
        entries.sort_by_key(|e| e.index);
        for e in &entries {
            if !(e.bler_slope.is_finite() && e.bler_slope > 0.0) {
                return Err(LinkError::InvalidSlope(e.index));
            }
        }
        for pair in entries.windows(2) {
            if pair[0].index == pair[1].index || pair[1].bler_midpoint_snr_db <= pair[0].bler_midpoint_snr_db {
                return Err(LinkError::McsNotMonotone(pair[1].index));
            }
        }
        Ok(McsTable { entries })
    }

    /// Illustrative four-entry table for the 2-PRB allocation. TBS values
    /// and curve parameters are placeholders, not measured data.
    pub fn illustrative() -> Self {
        let e = |index, modulation_order, code_rate, tbs_bits, mid| McsEntry {
            index,
            modulation_order,
            code_rate,
            tbs_bits,
            bler_midpoint_snr_db: mid,
            bler_slope: 1.5,
        };
        McsTable::new(alloc::vec![
            e(2, 2, (193, 1024), 72, -1.0),
            e(9, 2, (602, 1024), 296, 5.0),
            e(16, 4, (658, 1024), 632, 11.0),
            e(24, 6, (754, 1024), 1192, 18.0),
        ])
        .expect("illustrative table is valid")
    }

    pub fn get(&self, index: u32) -> Result<&McsEntry, LinkError> {
        self.entries
            .iter()
            .find(|e| e.index == index)
            .ok_or(LinkError::UnknownMcs(index))
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }
}

fn logistic(slope: f64, x: f64) -> f64 {
    let p = 1.0 / (1.0 + libm::exp(slope * x));
    if p.is_nan() {
        0.0
    } else {
        p.clamp(0.0, 1.0)
    }
}

/// Block error probability of `attempt` (1-based) with `gain_db` of
/// effective SNR added per retransmission.
pub fn block_error_prob(snr_db: f64, mcs: &McsEntry, attempt: u32, gain_db: f64) -> f64 {
    debug_assert!(attempt >= 1);
    let effective = snr_db + gain_db * attempt.saturating_sub(1) as f64;
    logistic(mcs.bler_slope, effective - mcs.bler_midpoint_snr_db)
}

/// Uniform in [0, 1) from the top 53 bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Independent seed for row `index` of a batch sharing `master`.
pub fn derive_substream_seed(master: u64, index: u64) -> u64 {
    stream(master ^ ROW_SEED_DOMAIN, index).next_u64()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub snr_db: f64,
    pub combining_gain_db_per_retx: f64,
    pub ack_loss_prob: f64,
    /// Per-attempt block error probabilities overriding the curve; the last
    /// entry repeats for later attempts.
    pub forced_bler: Option<Vec<f64>>,
}

impl LinkParams {
    pub const HIGH_SNR_DB: (f64, f64) = (25.0, 26.0);
    pub const LOW_SNR_DB: (f64, f64) = (6.0, 8.0);

    pub fn validate(&self) -> Result<(), LinkError> {
        let check = |field, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(LinkError::ProbabilityOutOfRange { field, value })
            }
        };
        check("ack_loss_prob", self.ack_loss_prob)?;
        for p in self.forced_bler.iter().flatten() {
            check("forced_bler", *p)?;
        }
        Ok(())
    }
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams {
            snr_db: 25.0,
            combining_gain_db_per_retx: 3.0,
            ack_loss_prob: 0.0,
            forced_bler: None,
        }
    }
}

/// One run's link with its two random streams.
#[derive(Debug, Clone)]
pub struct LinkState {
    params: LinkParams,
    decode_rng: ChaCha8Rng,
    ack_rng: ChaCha8Rng,
}

impl LinkState {
    pub fn new(params: LinkParams, seed: u64) -> Result<Self, LinkError> {
        params.validate()?;
        Ok(LinkState {
            params,
            decode_rng: stream(seed, DECODE_STREAM),
            ack_rng: stream(seed, ACK_STREAM),
        })
    }

    pub fn params(&self) -> &LinkParams {
        &self.params
    }

    pub fn error_prob(&self, mcs: &McsEntry, attempt: u32) -> f64 {
        match &self.params.forced_bler {
            Some(forced) if !forced.is_empty() => {
                let i = (attempt.max(1) as usize - 1).min(forced.len() - 1);
                forced[i]
            }
            _ => block_error_prob(self.params.snr_db, mcs, attempt, self.params.combining_gain_db_per_retx),
        }
    }

    /// Consumes exactly one decode draw.
    pub fn draw_decode(&mut self, mcs: &McsEntry, attempt: u32) -> bool {
        let p = self.error_prob(mcs, attempt);
        unit(&mut self.decode_rng) >= p
    }

    /// Consumes exactly one feedback draw.
    pub fn draw_ack_delivery(&mut self) -> bool {
        unit(&mut self.ack_rng) >= self.params.ack_loss_prob
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mcs(mid: f64, slope: f64) -> McsEntry {
        McsEntry {
            index: 0,
            modulation_order: 2,
            code_rate: (1, 2),
            tbs_bits: 100,
            bler_midpoint_snr_db: mid,
            bler_slope: slope,
        }
    }

    fn forced(p: f64, ack_loss: f64) -> LinkState {
        let params = LinkParams {
            forced_bler: Some(alloc::vec![p]),
            ack_loss_prob: ack_loss,
            ..LinkParams::default()
        };
        LinkState::new(params, 42).unwrap()
    }

    #[test]
    fn logistic_points() {
        assert_eq!(block_error_prob(10.0, &mcs(10.0, 1.0), 1, 3.0), 0.5);
        assert_eq!(block_error_prob(f64::INFINITY, &mcs(10.0, 1.0), 1, 3.0), 0.0);
        assert_eq!(block_error_prob(f64::NEG_INFINITY, &mcs(10.0, 1.0), 1, 3.0), 1.0);
        assert!(block_error_prob(1e6, &mcs(10.0, 1.0), 1, 3.0) < 1e-300);
        let p = block_error_prob(10.0, &mcs(10.0, 1.0), 2, 3.0);
        // 1 / (1 + e^3)
        assert!((p - 0.047_425_873_177_566_78).abs() < 1e-15);
    }

    #[test]
    fn forced_extremes() {
        let m = mcs(0.0, 1.0);
        let mut always = forced(0.0, 0.0);
        assert!((0..10_000).all(|_| always.draw_decode(&m, 1)));
        let mut never = forced(1.0, 1.0);
        assert!((0..10_000).all(|_| !never.draw_decode(&m, 1)));
        assert!((0..10_000).all(|_| !never.draw_ack_delivery()));
    }

    #[test]
    fn forced_sequence_repeats_last_entry() {
        let params = LinkParams {
            forced_bler: Some(alloc::vec![1.0, 0.0]),
            ..LinkParams::default()
        };
        let link = LinkState::new(params, 1).unwrap();
        let m = mcs(0.0, 1.0);
        assert_eq!(link.error_prob(&m, 1), 1.0);
        assert_eq!(link.error_prob(&m, 2), 0.0);
        assert_eq!(link.error_prob(&m, 5), 0.0);
    }

    #[test]
    fn ack_loss_zero_never_loses() {
        let mut link = forced(0.0, 0.0);
        let lost = (0..100_000).filter(|_| !link.draw_ack_delivery()).count();
        assert_eq!(lost, 0);
    }

    fn within_three_sigma(hits: usize, n: usize, p: f64) -> bool {
        let sigma = libm::sqrt(p * (1.0 - p) / n as f64);
        ((hits as f64 / n as f64) - p).abs() <= 3.0 * sigma
    }

    #[test]
    fn empirical_rates_match() {
        let n = 100_000;
        let m = mcs(0.0, 1.0);
        let mut link = forced(0.1, 0.01);
        let ok = (0..n).filter(|_| link.draw_decode(&m, 1)).count();
        assert!(within_three_sigma(ok, n, 0.9), "{ok}");
        assert!((ok as f64 / n as f64 - 0.9).abs() <= 0.005);
        let lost = (0..n).filter(|_| !link.draw_ack_delivery()).count();
        assert!((lost as f64 / n as f64 - 0.01).abs() <= 0.003, "{lost}");
    }

    #[test]
    fn streams_are_independent() {
        let m = mcs(0.0, 1.0);
        let mut a = forced(0.5, 0.5);
        let mut b = forced(0.5, 0.5);
        for _ in 0..1000 {
            b.draw_ack_delivery();
        }
        let da: Vec<bool> = (0..1000).map(|_| a.draw_decode(&m, 1)).collect();
        let db: Vec<bool> = (0..1000).map(|_| b.draw_decode(&m, 1)).collect();
        assert_eq!(da, db);
    }

    #[test]
    fn rejects_bad_probabilities() {
        let params = LinkParams {
            ack_loss_prob: 1.3,
            ..LinkParams::default()
        };
        assert!(matches!(
            LinkState::new(params, 0),
            Err(LinkError::ProbabilityOutOfRange {
                field: "ack_loss_prob",
                ..
            })
        ));
    }

    #[test]
    fn mcs_table_ordering() {
        let mut a = mcs(5.0, 1.0);
        let mut b = mcs(4.0, 1.0);
        a.index = 1;
        b.index = 2;
        assert_eq!(McsTable::new(alloc::vec![a, b]), Err(LinkError::McsNotMonotone(2)));
        assert!(McsTable::illustrative().get(16).is_ok());
        assert_eq!(McsTable::illustrative().get(3), Err(LinkError::UnknownMcs(3)));
    }

    #[test]
    fn substream_seeds_differ_per_row() {
        let s: Vec<u64> = (0..8).map(|i| derive_substream_seed(7, i)).collect();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert_ne!(s[i], s[j]);
            }
        }
        assert_eq!(derive_substream_seed(7, 3), s[3]);
    }

    proptest! {
        #[test]
        fn bler_monotone(
            snr in -20.0f64..40.0, d_snr in 0.0f64..10.0,
            attempt in 1u32..6, gain in 0.0f64..6.0,
            mid in -5.0f64..20.0, d_mid in 0.0f64..10.0, slope in 0.1f64..4.0,
        ) {
            let m = mcs(mid, slope);
            let p = block_error_prob(snr, &m, attempt, gain);
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(block_error_prob(snr + d_snr, &m, attempt, gain) <= p);
            prop_assert!(block_error_prob(snr, &m, attempt + 1, gain) <= p);
            prop_assert!(block_error_prob(snr, &mcs(mid + d_mid, slope), attempt, gain) >= p);
        }

        #[test]
        fn same_seed_same_draws(seed in any::<u64>()) {
            let m = mcs(0.0, 1.0);
            let params = LinkParams { snr_db: 0.3, ack_loss_prob: 0.4, ..LinkParams::default() };
            let mut a = LinkState::new(params.clone(), seed).unwrap();
            let mut b = LinkState::new(params, seed).unwrap();
            for _ in 0..64 {
                prop_assert_eq!(a.draw_decode(&m, 1), b.draw_decode(&m, 1));
                prop_assert_eq!(a.draw_ack_delivery(), b.draw_ack_delivery());
            }
        }
    }
}
