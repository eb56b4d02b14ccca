//! Subframe DL/GP/UL configurations and the periodic frame plan built from them.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::numerology::{Numerology, SubframeGeometry, Tick};

/// Symbols per subframe in the proposed frame structure.
pub const SYMBOLS_PER_SUBFRAME: u32 = 7;
pub const SUBCARRIERS_PER_PRB: u64 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("invalid subframe configuration {dl}:{gp}:{ul} (must sum to {expected})")]
    InvalidConfig { dl: u32, gp: u32, ul: u32, expected: u32 },
    #[error("unknown configuration index {0}")]
    UnknownConfigIndex(u32),
    #[error("frame plan is empty")]
    EmptyPlan,
    #[error("plan length {len} does not divide {subframes_per_frame} subframes per frame")]
    PlanLength { len: usize, subframes_per_frame: u32 },
    #[error("frame plan contains no {0} symbol")]
    RoleNeverOccurs(SymbolRole),
    #[error("non-integral allocation: {0}")]
    NonIntegralAllocation(&'static str),
    #[error("frame plans need a symbol-granular numerology")]
    AtomicNumerology,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolRole {
    Dl,
    Gp,
    Ul,
}

impl fmt::Display for SymbolRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolRole::Dl => "DL",
            SymbolRole::Gp => "GP",
            SymbolRole::Ul => "UL",
        })
    }
}

/// DL:GP:UL symbol split of one subframe, laid out DL first, then GP, then UL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubframeConfig {
    /// Table index for the presets, `None` for custom splits.
    pub index: Option<u32>,
    pub dl_symbols: u32,
    pub gp_symbols: u32,
    pub ul_symbols: u32,
}

impl SubframeConfig {
    /// Presets: 0 = 7:0:0 pure DL, 1 = 3:2:2 self-contained, 2 = 1:2:4 UL access.
    pub fn preset(index: u32) -> Result<Self, FrameError> {
        let (dl, gp, ul) = match index {
            0 => (7, 0, 0),
            1 => (3, 2, 2),
            2 => (1, 2, 4),
            other => return Err(FrameError::UnknownConfigIndex(other)),
        };
        Ok(SubframeConfig {
            index: Some(index),
            dl_symbols: dl,
            gp_symbols: gp,
            ul_symbols: ul,
        })
    }

    /// A custom split. Matching triples are normalised to their preset index.
    pub fn custom(dl: u32, gp: u32, ul: u32) -> Result<Self, FrameError> {
        if dl.checked_add(gp).and_then(|s| s.checked_add(ul)) != Some(SYMBOLS_PER_SUBFRAME) {
            return Err(FrameError::InvalidConfig {
                dl,
                gp,
                ul,
                expected: SYMBOLS_PER_SUBFRAME,
            });
        }
        let index = (0..3).find(|i| {
            let p = SubframeConfig::preset(*i).unwrap();
            (p.dl_symbols, p.gp_symbols, p.ul_symbols) == (dl, gp, ul)
        });
        Ok(SubframeConfig {
            index,
            dl_symbols: dl,
            gp_symbols: gp,
            ul_symbols: ul,
        })
    }

    pub fn total_symbols(&self) -> u32 {
        self.dl_symbols + self.gp_symbols + self.ul_symbols
    }

    pub fn roles(&self) -> Vec<SymbolRole> {
        let mut roles = Vec::with_capacity(self.total_symbols() as usize);
        roles.extend(core::iter::repeat_n(SymbolRole::Dl, self.dl_symbols as usize));
        roles.extend(core::iter::repeat_n(SymbolRole::Gp, self.gp_symbols as usize));
        roles.extend(core::iter::repeat_n(SymbolRole::Ul, self.ul_symbols as usize));
        roles
    }

    pub fn role_count(&self, role: SymbolRole) -> u32 {
        match role {
            SymbolRole::Dl => self.dl_symbols,
            SymbolRole::Gp => self.gp_symbols,
            SymbolRole::Ul => self.ul_symbols,
        }
    }

    /// Symbol index range `[first, first + count)` a role occupies.
    fn role_range(&self, role: SymbolRole) -> (u32, u32) {
        match role {
            SymbolRole::Dl => (0, self.dl_symbols),
            SymbolRole::Gp => (self.dl_symbols, self.gp_symbols),
            SymbolRole::Ul => (self.dl_symbols + self.gp_symbols, self.ul_symbols),
        }
    }
}

/// Ordered symbol roles of a preset configuration.
pub fn expand_config(index: u32) -> Result<Vec<SymbolRole>, FrameError> {
    SubframeConfig::preset(index).map(|c| c.roles())
}

/// Contiguous run of same-role symbols inside one subframe, absolute ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub subframe: u64,
    pub first_symbol: u32,
    pub symbol_count: u32,
    pub start: Tick,
    pub end: Tick,
}

/// Repeating sequence of subframe configurations over a fixed geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramePlan {
    configs: Vec<SubframeConfig>,
    geometry: SubframeGeometry,
}

impl FramePlan {
    pub fn new(configs: Vec<SubframeConfig>, geometry: SubframeGeometry) -> Result<Self, FrameError> {
        if configs.is_empty() {
            return Err(FrameError::EmptyPlan);
        }
        if geometry.symbol_count() != SYMBOLS_PER_SUBFRAME as usize {
            return Err(FrameError::AtomicNumerology);
        }
        for c in &configs {
            if c.total_symbols() != SYMBOLS_PER_SUBFRAME {
                return Err(FrameError::InvalidConfig {
                    dl: c.dl_symbols,
                    gp: c.gp_symbols,
                    ul: c.ul_symbols,
                    expected: SYMBOLS_PER_SUBFRAME,
                });
            }
        }
        if !(geometry.subframes_per_frame as usize).is_multiple_of(configs.len()) {
            return Err(FrameError::PlanLength {
                len: configs.len(),
                subframes_per_frame: geometry.subframes_per_frame,
            });
        }
        Ok(FramePlan { configs, geometry })
    }

    /// Same configuration in every subframe.
    pub fn uniform(config: SubframeConfig, geometry: SubframeGeometry) -> Result<Self, FrameError> {
        Self::new(alloc::vec![config], geometry)
    }

    pub fn configs(&self) -> &[SubframeConfig] {
        &self.configs
    }

    pub fn geometry(&self) -> &SubframeGeometry {
        &self.geometry
    }

    pub fn subframe_ticks(&self) -> Tick {
        self.geometry.subframe_ticks
    }

    pub fn frame_ticks(&self) -> Tick {
        self.geometry.frame_ticks
    }

    pub fn config_of(&self, subframe: u64) -> &SubframeConfig {
        &self.configs[(subframe % self.configs.len() as u64) as usize]
    }

    pub fn subframe_start(&self, subframe: u64) -> Tick {
        Tick(subframe * self.geometry.subframe_ticks.0)
    }

    pub fn subframe_containing(&self, t: Tick) -> u64 {
        t.0 / self.geometry.subframe_ticks.0
    }

    /// Absolute span of `symbol` in `subframe`.
    pub fn symbol_span(&self, subframe: u64, symbol: u32) -> (Tick, Tick) {
        let base = self.subframe_start(subframe);
        let (s, e) = self.geometry.symbol_spans[symbol as usize];
        (base + s, base + e)
    }

    pub fn role_at(&self, subframe: u64, symbol: u32) -> SymbolRole {
        let c = self.config_of(subframe);
        let (dl, gp) = (c.dl_symbols, c.gp_symbols);
        if symbol < dl {
            SymbolRole::Dl
        } else if symbol < dl + gp {
            SymbolRole::Gp
        } else {
            SymbolRole::Ul
        }
    }

    pub fn contains_role(&self, role: SymbolRole) -> bool {
        self.configs.iter().any(|c| c.role_count(role) > 0)
    }

    fn window_in(&self, subframe: u64, role: SymbolRole) -> Option<Window> {
        let (first, count) = self.config_of(subframe).role_range(role);
        if count == 0 {
            return None;
        }
        let (start, _) = self.symbol_span(subframe, first);
        let (_, end) = self.symbol_span(subframe, first + count - 1);
        Some(Window {
            subframe,
            first_symbol: first,
            symbol_count: count,
            start,
            end,
        })
    }

    /// Windows of `role` whose start is at or after `from`, in time order.
    /// A window that has already begun at `from` is skipped.
    pub fn symbol_windows(
        &self,
        role: SymbolRole,
        from: Tick,
    ) -> Result<impl Iterator<Item = Window> + '_, FrameError> {
        if !self.contains_role(role) {
            return Err(FrameError::RoleNeverOccurs(role));
        }
        let first = self.subframe_containing(from);
        Ok((first..)
            .filter_map(move |sf| self.window_in(sf, role))
            .filter(move |w| w.start >= from))
    }

    /// First subframe at or after `from` whose first symbol is DL.
    pub fn next_dl_subframe(&self, from: Tick) -> Result<u64, FrameError> {
        if self.configs.iter().all(|c| c.dl_symbols == 0) {
            return Err(FrameError::RoleNeverOccurs(SymbolRole::Dl));
        }
        let sf_ticks = self.geometry.subframe_ticks.0;
        let first = from.0.div_ceil(sf_ticks);
        Ok((first..)
            .find(|sf| self.config_of(*sf).dl_symbols > 0)
            .expect("plan contains a DL subframe"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceAllocation {
    pub allocation_bandwidth_hz: u64,
    pub subcarriers: u64,
    pub prb_count: u64,
    /// Unknown RE overhead per PRB per subframe; 0 by default.
    pub overhead_re_per_prb: u64,
}

impl ResourceAllocation {
    /// Data REs per PRB in a subframe with configuration `config`.
    pub fn re_per_prb(&self, config: &SubframeConfig) -> u64 {
        (SUBCARRIERS_PER_PRB * config.dl_symbols as u64).saturating_sub(self.overhead_re_per_prb)
    }

    pub fn total_re(&self, config: &SubframeConfig) -> u64 {
        self.re_per_prb(config) * self.prb_count
    }
}

/// Subcarrier and PRB count of a dedicated low-latency allocation.
pub fn allocation_capacity(
    bandwidth_hz: u64,
    numerology: &Numerology,
    overhead_re_per_prb: u64,
) -> Result<ResourceAllocation, FrameError> {
    let scs = numerology.subcarrier_spacing_hz as u64;
    if !bandwidth_hz.is_multiple_of(scs) {
        return Err(FrameError::NonIntegralAllocation(
            "bandwidth is not a whole number of subcarriers",
        ));
    }
    let subcarriers = bandwidth_hz / scs;
    if !subcarriers.is_multiple_of(SUBCARRIERS_PER_PRB) {
        return Err(FrameError::NonIntegralAllocation(
            "subcarriers are not a whole number of PRBs",
        ));
    }
    Ok(ResourceAllocation {
        allocation_bandwidth_hz: bandwidth_hz,
        subcarriers,
        prb_count: subcarriers / SUBCARRIERS_PER_PRB,
        overhead_re_per_prb,
    })
}
