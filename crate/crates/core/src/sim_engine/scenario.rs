use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::frame_structure::{allocation_capacity, FrameError, FramePlan, ResourceAllocation, SubframeConfig};
use crate::harq::{HarqError, HarqTimeline, ProcessingBudget, RttTimerRule};
use crate::link_model::{LinkError, LinkParams, McsEntry, McsTable};
use crate::numerology::{build_geometry, derive_numerology, CpKind, Numerology, NumerologyError, Tick};

#[derive(Debug, Clone, PartialEq)]
pub enum NumerologyChoice {
    Proposed,
    Lte,
    Explicit {
        scs_hz: u32,
        fft_size: u32,
        symbols: u32,
        cp_pattern: Option<Vec<CpKind>>,
    },
}

/// One subframe of the plan as written by the user; checked by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanEntry {
    Preset(u32),
    Custom { dl: u32, gp: u32, ul: u32 },
}

impl PlanEntry {
    pub fn to_config(self) -> Result<SubframeConfig, FrameError> {
        match self {
            PlanEntry::Preset(i) => SubframeConfig::preset(i),
            PlanEntry::Custom { dl, gp, ul } => SubframeConfig::custom(dl, gp, ul),
        }
    }
}

/// Descriptive trial parameters. Only the allocation fields affect output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialInfo {
    pub carrier_frequency_hz: u64,
    pub carrier_bandwidth_hz: u64,
    pub allocation_bandwidth_hz: u64,
    pub re_overhead_per_prb: u64,
    pub ue_count: u32,
    pub layers: u32,
    pub bs_antennas: String,
    pub ue_antennas: String,
    pub mimo_mode: String,
}

impl Default for TrialInfo {
    fn default() -> Self {
        TrialInfo {
            carrier_frequency_hz: 4_600_000_000,
            carrier_bandwidth_hz: 20_000_000,
            allocation_bandwidth_hz: 720_000,
            re_overhead_per_prb: 0,
            ue_count: 1,
            layers: 1,
            bs_antennas: "2T2R".into(),
            ue_antennas: "2T2R".into(),
            mimo_mode: "SFBC".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mode: RttTimerRule,
    pub numerology: NumerologyChoice,
    pub plan: Vec<PlanEntry>,
    pub budget: ProcessingBudget,
    pub link: LinkParams,
    pub mcs_table: Vec<McsEntry>,
    pub mcs_index: u32,
    pub packet_count: u64,
    pub max_attempts: u32,
    pub seed: u64,
    pub trial: TrialInfo,
}

impl Scenario {
    pub const DEFAULT_PACKETS: u64 = 100_000;
    pub const DEFAULT_MAX_ATTEMPTS: u32 = 4;
    pub const DEFAULT_SEED: u64 = 1;
    pub const DEFAULT_MCS: u32 = 16;

    /// Lab-trial configuration: proposed mode, 30 kHz numerology, all
    /// self-contained subframes, fixed MCS, 0.72 MHz allocation.
    pub fn lab_trial() -> Self {
        Scenario {
            mode: RttTimerRule::Proposed,
            numerology: NumerologyChoice::Proposed,
            plan: alloc::vec![PlanEntry::Preset(1)],
            budget: ProcessingBudget::PROPOSED,
            link: LinkParams::default(),
            mcs_table: McsTable::illustrative().entries().to_vec(),
            mcs_index: Self::DEFAULT_MCS,
            packet_count: Self::DEFAULT_PACKETS,
            max_attempts: Self::DEFAULT_MAX_ATTEMPTS,
            seed: Self::DEFAULT_SEED,
            trial: TrialInfo::default(),
        }
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Self::lab_trial()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationCode {
    InvalidFftSize,
    SamplingRateMismatch,
    NonIntegralDerivation,
    GeometryMismatch,
    PatternLength,
    ZeroParameter,
    InvalidConfig,
    UnknownConfigIndex,
    EmptyPlan,
    PlanLength,
    AtomicNumerology,
    NoUlOpportunity,
    NoDlOpportunity,
    UnsupportedDlTxSubframes,
    InvalidK,
    ProbabilityOutOfRange,
    UnknownMcs,
    McsNotMonotone,
    InvalidSlope,
    InvalidMaxAttempts,
    NonIntegralAllocation,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        use ViolationCode::*;
        match self {
            InvalidFftSize => "InvalidFftSize",
            SamplingRateMismatch => "SamplingRateMismatch",
            NonIntegralDerivation => "NonIntegralDerivation",
            GeometryMismatch => "GeometryMismatch",
            PatternLength => "PatternLength",
            ZeroParameter => "ZeroParameter",
            InvalidConfig => "InvalidConfig",
            UnknownConfigIndex => "UnknownConfigIndex",
            EmptyPlan => "EmptyPlan",
            PlanLength => "PlanLength",
            AtomicNumerology => "AtomicNumerology",
            NoUlOpportunity => "NoUlOpportunity",
            NoDlOpportunity => "NoDlOpportunity",
            UnsupportedDlTxSubframes => "UnsupportedDlTxSubframes",
            InvalidK => "InvalidK",
            ProbabilityOutOfRange => "ProbabilityOutOfRange",
            UnknownMcs => "UnknownMcs",
            McsNotMonotone => "McsNotMonotone",
            InvalidSlope => "InvalidSlope",
            InvalidMaxAttempts => "InvalidMaxAttempts",
            NonIntegralAllocation => "NonIntegralAllocation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    /// Dotted scenario field, e.g. `link.ack_loss_prob` or `plan[2]`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code.as_str(), self.field, self.message)
    }
}

fn violation(code: ViolationCode, field: impl Into<String>, message: impl fmt::Display) -> Violation {
    Violation {
        code,
        field: field.into(),
        message: format!("{message}"),
    }
}

fn numerology_violation(e: NumerologyError) -> Violation {
    use NumerologyError as E;
    let (code, field) = match &e {
        E::InvalidFftSize(_) => (ViolationCode::InvalidFftSize, "numerology.fft_size"),
        E::ZeroSubcarrierSpacing => (ViolationCode::ZeroParameter, "numerology.scs_hz"),
        E::ZeroSymbols => (ViolationCode::ZeroParameter, "numerology.symbols"),
        E::SamplingRateMismatch { .. } => (ViolationCode::SamplingRateMismatch, "numerology.scs_hz"),
        E::NonIntegralDerivation(_) => (ViolationCode::NonIntegralDerivation, "numerology"),
        E::GeometryMismatch { .. } => (ViolationCode::GeometryMismatch, "numerology.cp_pattern"),
        E::PatternLength { .. } => (ViolationCode::PatternLength, "numerology.cp_pattern"),
    };
    violation(code, field, e)
}

fn frame_violation(e: FrameError, field: String) -> Violation {
    let code = match &e {
        FrameError::InvalidConfig { .. } => ViolationCode::InvalidConfig,
        FrameError::UnknownConfigIndex(_) => ViolationCode::UnknownConfigIndex,
        FrameError::EmptyPlan => ViolationCode::EmptyPlan,
        FrameError::PlanLength { .. } => ViolationCode::PlanLength,
        FrameError::RoleNeverOccurs(crate::frame_structure::SymbolRole::Ul) => ViolationCode::NoUlOpportunity,
        FrameError::RoleNeverOccurs(_) => ViolationCode::NoDlOpportunity,
        FrameError::NonIntegralAllocation(_) => ViolationCode::NonIntegralAllocation,
        FrameError::AtomicNumerology => ViolationCode::AtomicNumerology,
    };
    violation(code, field, e)
}

pub(crate) fn harq_violation(e: HarqError) -> Violation {
    match e {
        HarqError::NoUlOpportunity { .. } => violation(ViolationCode::NoUlOpportunity, "plan", e),
        HarqError::NoDlOpportunity => violation(ViolationCode::NoDlOpportunity, "plan", e),
        HarqError::InvalidK => violation(ViolationCode::InvalidK, "mode.k", e),
        HarqError::Frame(f) => frame_violation(f, "plan".into()),
        other => violation(ViolationCode::InvalidConfig, "plan", other),
    }
}

fn link_violation(e: LinkError) -> Violation {
    match &e {
        LinkError::ProbabilityOutOfRange { field, .. } => {
            violation(ViolationCode::ProbabilityOutOfRange, format!("link.{field}"), &e)
        }
        LinkError::McsNotMonotone(_) => violation(ViolationCode::McsNotMonotone, "link.mcs", &e),
        LinkError::InvalidSlope(_) => violation(ViolationCode::InvalidSlope, "link.mcs", &e),
        LinkError::UnknownMcs(_) => violation(ViolationCode::UnknownMcs, "link.mcs_index", &e),
    }
}

/// A scenario whose every derived object has been built and checked.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub numerology: Numerology,
    pub timeline: HarqTimeline,
    pub mcs: McsEntry,
    pub allocation: ResourceAllocation,
    pub link: LinkParams,
    pub packet_count: u64,
    pub max_attempts: u32,
    pub seed: u64,
}

fn resolve_numerology(choice: &NumerologyChoice) -> Result<Numerology, NumerologyError> {
    let n = match choice {
        NumerologyChoice::Proposed => Numerology::proposed(),
        NumerologyChoice::Lte => Numerology::lte(),
        NumerologyChoice::Explicit {
            scs_hz,
            fft_size,
            symbols,
            cp_pattern,
        } => {
            let n = derive_numerology(*scs_hz, *fft_size, *symbols)?;
            match cp_pattern {
                Some(p) => n.with_cp_pattern(p.clone()),
                None => n,
            }
        }
    };
    build_geometry(&n)?;
    Ok(n)
}

/// Every DL-led subframe of the plan cycle must reach feedback and retransmission.
fn check_plan_schedulable(timeline: &HarqTimeline, plan: &FramePlan) -> Result<(), HarqError> {
    for sf in 0..plan.configs().len() as u64 {
        if plan.config_of(sf).dl_symbols == 0 {
            continue;
        }
        let tx = timeline.transmission_from(plan.subframe_start(sf))?;
        let (_, fb_end) = timeline.feedback(&tx)?;
        timeline.retransmission(fb_end)?;
    }
    Ok(())
}

pub fn resolve(scenario: &Scenario) -> Result<ResolvedScenario, Vec<Violation>> {
    let mut out = Vec::new();

    let numerology = resolve_numerology(&scenario.numerology).map_err(numerology_violation);
    let configs: Vec<Option<SubframeConfig>> = scenario
        .plan
        .iter()
        .enumerate()
        .map(|(i, e)| {
            e.to_config()
                .map_err(|err| out.push(frame_violation(err, format!("plan[{i}]"))))
                .ok()
        })
        .collect();
    if scenario.plan.is_empty() {
        out.push(frame_violation(FrameError::EmptyPlan, "plan".into()));
    }

    if scenario.budget.dl_tx_subframes != 1 {
        out.push(violation(
            ViolationCode::UnsupportedDlTxSubframes,
            "budget.dl_tx_subframes",
            "only single-subframe transport blocks are supported",
        ));
    }
    if scenario.budget.ack_ul_symbols == 0 {
        out.push(violation(
            ViolationCode::ZeroParameter,
            "budget.ack_symbols",
            "ACK/NACK needs at least one UL symbol",
        ));
    }
    if scenario.max_attempts == 0 {
        out.push(violation(
            ViolationCode::InvalidMaxAttempts,
            "run.max_attempts",
            "must be at least 1",
        ));
    }

    if let Err(e) = scenario.link.validate() {
        out.push(link_violation(e));
    }
    let mcs = match McsTable::new(scenario.mcs_table.clone()) {
        Ok(table) => match table.get(scenario.mcs_index) {
            Ok(m) => Some(m.clone()),
            Err(e) => {
                out.push(link_violation(e));
                None
            }
        },
        Err(e) => {
            out.push(link_violation(e));
            None
        }
    };

    let numerology = match numerology {
        Ok(n) => Some(n),
        Err(v) => {
            out.push(v);
            None
        }
    };

    let allocation = numerology.as_ref().and_then(|n| {
        allocation_capacity(
            scenario.trial.allocation_bandwidth_hz,
            n,
            scenario.trial.re_overhead_per_prb,
        )
        .map_err(|e| out.push(frame_violation(e, "trial.allocation_bandwidth_hz".into())))
        .ok()
    });

    let timeline = match scenario.mode {
        RttTimerRule::Proposed => {
            let plan = match (&numerology, configs.iter().copied().collect::<Option<Vec<_>>>()) {
                (Some(n), Some(cs)) if !cs.is_empty() => {
                    let geometry = build_geometry(n).expect("checked in resolve_numerology");
                    match FramePlan::new(cs, geometry) {
                        Ok(p) => Some(p),
                        Err(e) => {
                            out.push(frame_violation(e, "plan".into()));
                            None
                        }
                    }
                }
                _ => None,
            };
            plan.and_then(|plan| {
                let timeline = HarqTimeline::Proposed {
                    plan: plan.clone(),
                    budget: scenario.budget,
                };
                match check_plan_schedulable(&timeline, &plan) {
                    Ok(()) => Some(timeline),
                    Err(e) => {
                        out.push(harq_violation(e));
                        None
                    }
                }
            })
        }
        rule => HarqTimeline::lte(rule).map_err(|e| out.push(harq_violation(e))).ok(),
    };

    if !out.is_empty() {
        return Err(out);
    }
    Ok(ResolvedScenario {
        numerology: numerology.expect("no violations"),
        timeline: timeline.expect("no violations"),
        mcs: mcs.expect("no violations"),
        allocation: allocation.expect("no violations"),
        link: scenario.link.clone(),
        packet_count: scenario.packet_count,
        max_attempts: scenario.max_attempts,
        seed: scenario.seed,
    })
}

/// All invariant violations of `scenario`; empty means runnable.
pub fn validate(scenario: &Scenario) -> Vec<Violation> {
    resolve(scenario).err().unwrap_or_default()
}

impl ResolvedScenario {
    pub fn subframe_ticks(&self) -> Tick {
        match &self.timeline {
            HarqTimeline::Proposed { plan, .. } => plan.subframe_ticks(),
            HarqTimeline::Lte { .. } => Tick(crate::numerology::LTE_SUBFRAME_TICKS),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes(s: &Scenario) -> Vec<ViolationCode> {
        validate(s).into_iter().map(|v| v.code).collect()
    }

    #[test]
    fn default_is_valid() {
        assert_eq!(validate(&Scenario::lab_trial()), []);
    }

    #[test]
    fn pure_dl_plan_in_proposed_mode() {
        let s = Scenario {
            plan: alloc::vec![PlanEntry::Preset(0)],
            ..Scenario::lab_trial()
        };
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code, ViolationCode::NoUlOpportunity);
        assert_eq!(v[0].field, "plan");
    }

    #[test]
    fn pure_dl_plan_ignored_by_lte() {
        let s = Scenario {
            mode: RttTimerRule::LteFdd,
            plan: alloc::vec![PlanEntry::Preset(0)],
            ..Scenario::lab_trial()
        };
        assert_eq!(codes(&s), []);
    }

    #[test]
    fn probability_out_of_range() {
        let mut s = Scenario::lab_trial();
        s.link.ack_loss_prob = 1.3;
        let v = validate(&s);
        assert_eq!(v[0].code, ViolationCode::ProbabilityOutOfRange);
        assert_eq!(v[0].field, "link.ack_loss_prob");
    }

    #[test]
    fn bad_custom_config_names_entry() {
        let s = Scenario {
            plan: alloc::vec![PlanEntry::Preset(1), PlanEntry::Custom { dl: 4, gp: 2, ul: 2 }],
            ..Scenario::lab_trial()
        };
        let v = validate(&s);
        assert_eq!(v[0].code, ViolationCode::InvalidConfig);
        assert_eq!(v[0].field, "plan[1]");
    }

    #[test]
    fn collects_several_violations() {
        let mut s = Scenario::lab_trial();
        s.numerology = NumerologyChoice::Explicit {
            scs_hz: 30_000,
            fft_size: 1000,
            symbols: 7,
            cp_pattern: None,
        };
        s.max_attempts = 0;
        s.mcs_index = 99;
        s.mode = RttTimerRule::LteTdd { k: 0 };
        assert_eq!(
            codes(&s),
            [
                ViolationCode::InvalidMaxAttempts,
                ViolationCode::UnknownMcs,
                ViolationCode::InvalidFftSize,
                ViolationCode::InvalidK
            ]
        );
    }

    #[test]
    fn plan_length_and_geometry() {
        let mut s = Scenario {
            plan: alloc::vec![PlanEntry::Preset(1); 3],
            ..Scenario::lab_trial()
        };
        assert_eq!(codes(&s), [ViolationCode::PlanLength]);
        s.plan = alloc::vec![PlanEntry::Preset(1)];
        s.numerology = NumerologyChoice::Explicit {
            scs_hz: 30_000,
            fft_size: 1024,
            symbols: 7,
            cp_pattern: Some(alloc::vec![CpKind::Short; 7]),
        };
        assert_eq!(codes(&s), [ViolationCode::GeometryMismatch]);
    }

    #[test]
    fn lte_numerology_cannot_drive_proposed_mode() {
        let s = Scenario {
            numerology: NumerologyChoice::Lte,
            ..Scenario::lab_trial()
        };
        assert_eq!(codes(&s), [ViolationCode::AtomicNumerology]);
    }
}
