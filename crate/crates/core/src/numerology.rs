//! OFDM numerology and the integer sample-tick time base.
//!
//! Every timestamp in the simulator is a [`Tick`]: one sample at the shared
//! 30.72 MHz reference rate. Numerologies that keep this sampling rate
//! (15 kHz / 2048-point and 30 kHz / 1024-point both do) express useful
//! symbol lengths and cyclic prefixes as whole ticks, so scheduling never
//! touches floating point.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Sub};

use thiserror::Error;

/// Reference sampling rate shared by every numerology.
pub const REFERENCE_SAMPLING_RATE_HZ: u64 = 30_720_000;
/// Ticks in one millisecond.
pub const TICKS_PER_MS: u64 = 30_720;
/// Radio frame length (10 ms) in ticks.
pub const FRAME_TICKS: u64 = 10 * TICKS_PER_MS;
/// LTE subframe length (1 ms) in ticks.
pub const LTE_SUBFRAME_TICKS: u64 = TICKS_PER_MS;

/// Sample count at [`REFERENCE_SAMPLING_RATE_HZ`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Tick(pub u64);

impl Tick {
    pub const ZERO: Tick = Tick(0);

    pub const fn new(value: u64) -> Self {
        Tick(value)
    }

    pub const fn get(self) -> u64 {
        self.0
    }

    pub const fn from_ms(ms: u64) -> Self {
        Tick(ms * TICKS_PER_MS)
    }

    pub fn checked_sub(self, rhs: Tick) -> Option<Tick> {
        self.0.checked_sub(rhs.0).map(Tick)
    }

    pub fn micros(self) -> Micros {
        ticks_to_micros(self)
    }
}

impl Add for Tick {
    type Output = Tick;
    fn add(self, rhs: Tick) -> Tick {
        Tick(self.0 + rhs.0)
    }
}

impl AddAssign for Tick {
    fn add_assign(&mut self, rhs: Tick) {
        self.0 += rhs.0;
    }
}

impl Sub for Tick {
    type Output = Tick;
    fn sub(self, rhs: Tick) -> Tick {
        Tick(self.0 - rhs.0)
    }
}

impl fmt::Display for Tick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Exact rational microsecond value, `ticks_num / ticks_den` ticks.
///
/// Only used for reporting. Display rounds half-up to two decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Micros {
    ticks_num: u128,
    ticks_den: u128,
}

impl Micros {
    /// Mean-style value: `total` ticks spread over `count` samples.
    pub fn from_ratio(total_ticks: u128, count: u128) -> Self {
        assert!(count > 0, "zero denominator");
        Micros {
            ticks_num: total_ticks,
            ticks_den: count,
        }
    }

    /// Value in hundredths of a microsecond, rounded half-up.
    pub fn hundredths(self) -> u128 {
        // us = ticks * 1000 / 30720 = ticks * 25 / 768
        let num = self.ticks_num * 2500;
        let den = self.ticks_den * 768;
        (2 * num + den) / (2 * den)
    }

    pub fn as_f64(self) -> f64 {
        (self.ticks_num as f64) * 25.0 / (768.0 * self.ticks_den as f64)
    }

    /// True when the value is an exact multiple of 0.01 us.
    pub fn is_exact_hundredths(self) -> bool {
        (self.ticks_num * 2500).is_multiple_of(self.ticks_den * 768)
    }
}

impl fmt::Display for Micros {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hundredths();
        write!(f, "{}.{:02}", h / 100, h % 100)
    }
}

/// Reporting-only conversion; never used for scheduling.
pub fn ticks_to_micros(t: Tick) -> Micros {
    Micros {
        ticks_num: t.0 as u128,
        ticks_den: 1,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumerologyError {
    #[error("invalid FFT size {0}: must be a power of two divisible by 64")]
    InvalidFftSize(u32),
    #[error("subcarrier spacing must be positive")]
    ZeroSubcarrierSpacing,
    #[error("symbols per subframe must be positive")]
    ZeroSymbols,
    #[error("sampling rate {actual_hz} Hz differs from the 30.72 MHz reference tick")]
    SamplingRateMismatch { actual_hz: u64 },
    #[error("non-integral derivation: {0}")]
    NonIntegralDerivation(&'static str),
    #[error("CP pattern of {pattern_ticks} ticks does not tile the {declared_ticks}-tick subframe")]
    GeometryMismatch { pattern_ticks: u64, declared_ticks: u64 },
    #[error("CP pattern has {actual} entries, numerology has {expected} symbols")]
    PatternLength { expected: usize, actual: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CpKind {
    Long,
    Short,
}

impl CpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CpKind::Long => "long",
            CpKind::Short => "short",
        }
    }
}

fn check_fft_size(fft_size: u32) -> Result<(), NumerologyError> {
    if fft_size == 0 || !fft_size.is_power_of_two() || !fft_size.is_multiple_of(64) {
        return Err(NumerologyError::InvalidFftSize(fft_size));
    }
    Ok(())
}

/// Cyclic prefix length in ticks: 5/64 of the FFT size for the long CP,
/// 4/64 for the short one.
pub fn cp_ticks(fft_size: u32, kind: CpKind) -> Result<Tick, NumerologyError> {
    check_fft_size(fft_size)?;
    let sixty_fourth = (fft_size / 64) as u64;
    Ok(Tick(match kind {
        CpKind::Long => 5 * sixty_fourth,
        CpKind::Short => 4 * sixty_fourth,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpProfile {
    pub long_cp_ticks: Tick,
    pub short_cp_ticks: Tick,
    /// CP kind of each symbol of a subframe, in symbol order.
    pub pattern: Vec<CpKind>,
}

impl CpProfile {
    pub fn ticks(&self, kind: CpKind) -> Tick {
        match kind {
            CpKind::Long => self.long_cp_ticks,
            CpKind::Short => self.short_cp_ticks,
        }
    }

    pub fn long_count(&self) -> usize {
        self.pattern.iter().filter(|k| **k == CpKind::Long).count()
    }
}

/// Front-loaded pattern: `long` long-CP symbols followed by short-CP ones.
pub fn front_loaded_pattern(symbols: usize, long: usize) -> Vec<CpKind> {
    (0..symbols)
        .map(|i| if i < long { CpKind::Long } else { CpKind::Short })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Numerology {
    pub subcarrier_spacing_hz: u32,
    pub fft_size: u32,
    pub sampling_rate_hz: u64,
    pub symbol_useful_ticks: Tick,
    pub subframe_symbol_count: u32,
    pub cp_profile: CpProfile,
    /// Declared subframe duration the CP pattern must tile.
    pub subframe_ticks: Tick,
    /// Subframes are scheduled as indivisible units (LTE baseline).
    pub atomic_subframe: bool,
}

/// Derives a symbol-granular numerology.
///
/// The declared subframe length is the one obtained with the fewest
/// front-loaded long CPs whose total divides the 10 ms frame. For
/// 30 kHz / 1024 / 7 symbols that is 4 long + 3 short = 7680 ticks.
pub fn derive_numerology(scs_hz: u32, fft_size: u32, symbols_per_subframe: u32) -> Result<Numerology, NumerologyError> {
    if scs_hz == 0 {
        return Err(NumerologyError::ZeroSubcarrierSpacing);
    }
    check_fft_size(fft_size)?;
    if symbols_per_subframe == 0 {
        return Err(NumerologyError::ZeroSymbols);
    }
    let sampling_rate_hz = scs_hz as u64 * fft_size as u64;
    if sampling_rate_hz != REFERENCE_SAMPLING_RATE_HZ {
        return Err(NumerologyError::SamplingRateMismatch {
            actual_hz: sampling_rate_hz,
        });
    }
    let long = cp_ticks(fft_size, CpKind::Long)?;
    let short = cp_ticks(fft_size, CpKind::Short)?;
    let useful = Tick(fft_size as u64);
    let n = symbols_per_subframe as u64;

    let long_count = (0..=n)
        .find(|l| {
            let total = n * useful.0 + l * long.0 + (n - l) * short.0;
            FRAME_TICKS.is_multiple_of(total)
        })
        .ok_or(NumerologyError::NonIntegralDerivation(
            "no long/short CP split tiles a subframe dividing the 10 ms frame",
        ))?;
    let subframe_ticks = Tick(n * useful.0 + long_count * long.0 + (n - long_count) * short.0);

    Ok(Numerology {
        subcarrier_spacing_hz: scs_hz,
        fft_size,
        sampling_rate_hz,
        symbol_useful_ticks: useful,
        subframe_symbol_count: symbols_per_subframe,
        cp_profile: CpProfile {
            long_cp_ticks: long,
            short_cp_ticks: short,
            pattern: front_loaded_pattern(n as usize, long_count as usize),
        },
        subframe_ticks,
        atomic_subframe: false,
    })
}

impl Numerology {
    /// 30 kHz, 1024-point FFT, 7 symbols per 0.25 ms subframe.
    pub fn proposed() -> Self {
        derive_numerology(30_000, 1024, 7).expect("proposed numerology is valid")
    }

    /// LTE-Advanced: 15 kHz, 2048-point FFT, 1 ms subframes handled atomically.
    pub fn lte() -> Self {
        Numerology {
            subcarrier_spacing_hz: 15_000,
            fft_size: 2048,
            sampling_rate_hz: REFERENCE_SAMPLING_RATE_HZ,
            symbol_useful_ticks: Tick(2048),
            subframe_symbol_count: 14,
            cp_profile: CpProfile {
                long_cp_ticks: Tick(160),
                short_cp_ticks: Tick(128),
                pattern: Vec::new(),
            },
            subframe_ticks: Tick(LTE_SUBFRAME_TICKS),
            atomic_subframe: true,
        }
    }

    /// Replaces the CP placement. The pattern is checked by [`build_geometry`].
    pub fn with_cp_pattern(mut self, pattern: Vec<CpKind>) -> Self {
        self.cp_profile.pattern = pattern;
        self
    }

    /// Useful symbol duration in ticks times the subcarrier spacing equals
    /// the sampling rate, i.e. one second.
    pub fn spacing_times_useful_is_unity(&self) -> bool {
        self.subcarrier_spacing_hz as u64 * self.symbol_useful_ticks.0 == self.sampling_rate_hz
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubframeGeometry {
    pub subframe_ticks: Tick,
    /// Half-open `(start, end)` of each symbol within the subframe.
    pub symbol_spans: Vec<(Tick, Tick)>,
    pub subframes_per_frame: u32,
    pub frame_ticks: Tick,
}

impl SubframeGeometry {
    pub fn symbol_count(&self) -> usize {
        self.symbol_spans.len()
    }

    pub fn symbol_len(&self, index: usize) -> Tick {
        let (s, e) = self.symbol_spans[index];
        e - s
    }
}

/// Lays out symbol spans for one subframe and checks that they tile the
/// declared subframe exactly. Atomic numerologies get a single span.
pub fn build_geometry(numerology: &Numerology) -> Result<SubframeGeometry, NumerologyError> {
    let declared = numerology.subframe_ticks;
    if declared.0 == 0 || !FRAME_TICKS.is_multiple_of(declared.0) {
        return Err(NumerologyError::NonIntegralDerivation(
            "subframe duration does not divide the 10 ms frame",
        ));
    }
    let subframes_per_frame = (FRAME_TICKS / declared.0) as u32;

    if numerology.atomic_subframe {
        return Ok(SubframeGeometry {
            subframe_ticks: declared,
            symbol_spans: alloc::vec![(Tick::ZERO, declared)],
            subframes_per_frame,
            frame_ticks: Tick(FRAME_TICKS),
        });
    }

    let profile = &numerology.cp_profile;
    let expected = numerology.subframe_symbol_count as usize;
    if profile.pattern.len() != expected {
        return Err(NumerologyError::PatternLength {
            expected,
            actual: profile.pattern.len(),
        });
    }

    let mut spans = Vec::with_capacity(expected);
    let mut cursor = Tick::ZERO;
    for kind in &profile.pattern {
        let end = cursor + profile.ticks(*kind) + numerology.symbol_useful_ticks;
        spans.push((cursor, end));
        cursor = end;
    }
    if cursor != declared {
        return Err(NumerologyError::GeometryMismatch {
            pattern_ticks: cursor.0,
            declared_ticks: declared.0,
        });
    }

    Ok(SubframeGeometry {
        subframe_ticks: declared,
        symbol_spans: spans,
        subframes_per_frame,
        frame_ticks: Tick(FRAME_TICKS),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn lte_symbol_timing() {
        let n = derive_numerology(15_000, 2048, 7).unwrap();
        assert_eq!(n.sampling_rate_hz, 30_720_000);
        assert_eq!(n.symbol_useful_ticks, Tick(2048));
        assert_eq!(n.symbol_useful_ticks.micros().to_string(), "66.67");
    }

    #[test]
    fn proposed_symbol_timing() {
        let n = derive_numerology(30_000, 1024, 7).unwrap();
        assert_eq!(n.sampling_rate_hz, 30_720_000);
        assert_eq!(n.symbol_useful_ticks, Tick(1024));
        assert_eq!(n.symbol_useful_ticks.micros().to_string(), "33.33");
        assert_eq!(n.subframe_ticks, Tick(7680));
        assert_eq!(n.cp_profile.pattern, front_loaded_pattern(7, 4));
    }

    #[test]
    fn rejects_bad_fft() {
        assert_eq!(
            derive_numerology(30_000, 1000, 7),
            Err(NumerologyError::InvalidFftSize(1000))
        );
        assert_eq!(
            derive_numerology(30_000, 32, 7),
            Err(NumerologyError::InvalidFftSize(32))
        );
        assert!(matches!(
            derive_numerology(30_000, 2048, 7),
            Err(NumerologyError::SamplingRateMismatch { actual_hz: 61_440_000 })
        ));
    }

    #[test]
    fn cp_lengths() {
        let long = cp_ticks(1024, CpKind::Long).unwrap();
        let short = cp_ticks(1024, CpKind::Short).unwrap();
        assert_eq!(long, Tick(80));
        assert_eq!(short, Tick(64));
        assert_eq!(long.micros().to_string(), "2.60");
        assert_eq!(short.micros().to_string(), "2.08");
        // 2.604 / 2.083 us at three decimals
        assert_eq!((long.0 * 1_000_000 + 15_360) / 30_720, 2604);
        assert_eq!((short.0 * 1_000_000 + 15_360) / 30_720, 2083);
        assert_eq!(cp_ticks(64, CpKind::Long).unwrap(), Tick(5));
        assert_eq!(cp_ticks(96, CpKind::Long), Err(NumerologyError::InvalidFftSize(96)));
    }

    #[test]
    fn proposed_geometry() {
        let g = build_geometry(&Numerology::proposed()).unwrap();
        assert_eq!(g.subframe_ticks, Tick(7680));
        assert_eq!(g.subframes_per_frame, 40);
        assert_eq!(g.frame_ticks, Tick(307_200));
        let lens: Vec<u64> = (0..7).map(|i| g.symbol_len(i).0).collect();
        assert_eq!(lens, vec![1104, 1104, 1104, 1104, 1088, 1088, 1088]);
    }

    #[test]
    fn all_short_pattern_does_not_tile() {
        let n = Numerology::proposed().with_cp_pattern(vec![CpKind::Short; 7]);
        assert_eq!(
            build_geometry(&n),
            Err(NumerologyError::GeometryMismatch {
                pattern_ticks: 7616,
                declared_ticks: 7680
            })
        );
    }

    #[test]
    fn lte_geometry_is_atomic() {
        let g = build_geometry(&Numerology::lte()).unwrap();
        assert_eq!(g.symbol_spans, vec![(Tick(0), Tick(30_720))]);
        assert_eq!(g.subframes_per_frame, 10);
        assert_eq!(g.frame_ticks, Tick(FRAME_TICKS));
    }

    #[test]
    fn micros_reporting() {
        assert_eq!(ticks_to_micros(Tick(30_720)).to_string(), "1000.00");
        assert_eq!(ticks_to_micros(Tick(7680)).to_string(), "250.00");
        assert_eq!(ticks_to_micros(Tick(2176)).to_string(), "70.83");
        assert!(ticks_to_micros(Tick(7680)).is_exact_hundredths());
        assert_eq!(Micros::from_ratio(46_080 * 3, 3).to_string(), "1500.00");
    }

    proptest! {
        #[test]
        fn long_cp_exceeds_short(shift in 6u32..20) {
            let fft = 1u32 << shift;
            prop_assert!(cp_ticks(fft, CpKind::Long).unwrap() > cp_ticks(fft, CpKind::Short).unwrap());
        }

        #[test]
        fn accepted_patterns_tile_gaplessly(bits in 0u8..128) {
            let pattern: Vec<CpKind> = (0..7)
                .map(|i| if bits >> i & 1 == 1 { CpKind::Long } else { CpKind::Short })
                .collect();
            let n = Numerology::proposed().with_cp_pattern(pattern);
            if let Ok(g) = build_geometry(&n) {
                prop_assert_eq!(g.symbol_spans[0].0, Tick::ZERO);
                for w in g.symbol_spans.windows(2) {
                    prop_assert_eq!(w[0].1, w[1].0);
                }
                prop_assert_eq!(g.symbol_spans[6].1, g.subframe_ticks);
                prop_assert_eq!(g.subframe_ticks.0 * g.subframes_per_frame as u64, 307_200);
            }
        }

        #[test]
        fn spacing_times_useful_symbol_is_one_second(shift in 6u32..16) {
            let fft = 1u32 << shift;
            let scs = (REFERENCE_SAMPLING_RATE_HZ / fft as u64) as u32;
            if let Ok(n) = derive_numerology(scs, fft, 7) {
                prop_assert!(n.spacing_times_useful_is_unity());
            }
        }
    }
}
