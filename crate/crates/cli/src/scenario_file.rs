//! TOML scenario documents and their mapping onto [`Scenario`].
//!
//! Every section is optional and falls back to the lab-trial defaults;
//! unknown keys are rejected.

use harq_core::harq::{ProcessingBudget, RttTimerRule};
use harq_core::link_model::{LinkParams, McsEntry};
use harq_core::numerology::{CpKind, Tick, TICKS_PER_MS};
use harq_core::sim_engine::{NumerologyChoice, PlanEntry, Scenario, TrialInfo, Violation, ViolationCode};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub mode: ModeSection,
    pub numerology: NumerologySection,
    pub plan: PlanSection,
    pub budget: BudgetSection,
    pub link: LinkSection,
    pub run: RunSection,
    pub trial: TrialSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    LteFdd,
    LteTdd,
    Proposed,
}

impl ModeKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lte_fdd" => Some(ModeKind::LteFdd),
            "lte_tdd" => Some(ModeKind::LteTdd),
            "proposed" => Some(ModeKind::Proposed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeSection {
    pub kind: ModeKind,
    /// LTE TDD DL-to-feedback interval in subframes.
    pub k: u32,
}

impl Default for ModeSection {
    fn default() -> Self {
        ModeSection {
            kind: ModeKind::Proposed,
            k: RttTimerRule::DEFAULT_TDD_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumerologySection {
    /// `proposed` or `lte`; mutually exclusive with the explicit fields.
    /// Omitted inside a written table, it means `proposed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scs_hz: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fft_size: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_pattern: Option<Vec<CpName>>,
}

impl Default for NumerologySection {
    fn default() -> Self {
        NumerologySection {
            preset: Some("proposed".into()),
            scs_hz: None,
            fft_size: None,
            symbols: None,
            cp_pattern: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpName {
    Long,
    Short,
}

impl From<CpName> for CpKind {
    fn from(c: CpName) -> Self {
        match c {
            CpName::Long => CpKind::Long,
            CpName::Short => CpKind::Short,
        }
    }
}

impl From<CpKind> for CpName {
    fn from(c: CpKind) -> Self {
        match c {
            CpKind::Long => CpName::Long,
            CpKind::Short => CpName::Short,
        }
    }
}

/// Either a configuration index or an explicit DL:GP:UL split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlanItem {
    Index(u32),
    Split { dl: i64, gp: i64, ul: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanSection {
    pub configs: Vec<PlanItem>,
}

impl Default for PlanSection {
    fn default() -> Self {
        PlanSection {
            configs: vec![PlanItem::Index(1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetSection {
    pub ue_us: f64,
    pub bs_us: f64,
    pub ack_symbols: u32,
    pub dl_tx_subframes: u32,
}

impl Default for BudgetSection {
    fn default() -> Self {
        let b = ProcessingBudget::PROPOSED;
        BudgetSection {
            ue_us: ticks_to_us(b.ue_processing),
            bs_us: ticks_to_us(b.bs_processing),
            ack_symbols: b.ack_ul_symbols,
            dl_tx_subframes: b.dl_tx_subframes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsRow {
    pub index: u32,
    pub modulation_order: u32,
    /// `"numerator/denominator"`.
    pub code_rate: String,
    pub tbs_bits: u32,
    pub midpoint_snr_db: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkSection {
    pub snr_db: f64,
    pub mcs_index: u32,
    pub combining_gain_db: f64,
    pub ack_loss_prob: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forced_bler: Option<Vec<f64>>,
    pub mcs: Vec<McsRow>,
}

impl Default for LinkSection {
    fn default() -> Self {
        let s = Scenario::lab_trial();
        LinkSection {
            snr_db: s.link.snr_db,
            mcs_index: s.mcs_index,
            combining_gain_db: s.link.combining_gain_db_per_retx,
            ack_loss_prob: s.link.ack_loss_prob,
            forced_bler: None,
            mcs: s.mcs_table.iter().map(McsRow::from_entry).collect(),
        }
    }
}

impl McsRow {
    fn from_entry(e: &McsEntry) -> Self {
        McsRow {
            index: e.index,
            modulation_order: e.modulation_order,
            code_rate: format!("{}/{}", e.code_rate.0, e.code_rate.1),
            tbs_bits: e.tbs_bits,
            midpoint_snr_db: e.bler_midpoint_snr_db,
            slope: e.bler_slope,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub packets: u64,
    pub max_attempts: u32,
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            packets: Scenario::DEFAULT_PACKETS,
            max_attempts: Scenario::DEFAULT_MAX_ATTEMPTS,
            seed: Scenario::DEFAULT_SEED,
        }
    }
}

/// Descriptive trial metadata; only the allocation fields reach the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialSection {
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

impl Default for TrialSection {
    fn default() -> Self {
        let t = TrialInfo::default();
        TrialSection {
            carrier_frequency_hz: t.carrier_frequency_hz,
            carrier_bandwidth_hz: t.carrier_bandwidth_hz,
            allocation_bandwidth_hz: t.allocation_bandwidth_hz,
            re_overhead_per_prb: t.re_overhead_per_prb,
            ue_count: t.ue_count,
            layers: t.layers,
            bs_antennas: t.bs_antennas,
            ue_antennas: t.ue_antennas,
            mimo_mode: t.mimo_mode,
        }
    }
}

pub fn ticks_to_us(t: Tick) -> f64 {
    t.0 as f64 * 1000.0 / TICKS_PER_MS as f64
}

/// Exact conversion or `None` when `us` is not a whole number of ticks.
pub fn us_to_ticks(us: f64) -> Option<Tick> {
    if !us.is_finite() || us < 0.0 {
        return None;
    }
    let ticks = (us * TICKS_PER_MS as f64 / 1000.0).round();
    let back = ticks * 1000.0 / TICKS_PER_MS as f64;
    ((back - us).abs() <= 1e-9 * us.max(1.0)).then_some(Tick(ticks as u64))
}

fn bad(code: ViolationCode, field: impl Into<String>, message: impl Into<String>) -> Violation {
    Violation {
        code,
        field: field.into(),
        message: message.into(),
    }
}

fn parse_code_rate(s: &str) -> Option<(u32, u32)> {
    let (n, d) = s.split_once('/')?;
    let (n, d) = (n.trim().parse().ok()?, d.trim().parse().ok()?);
    (d > 0).then_some((n, d))
}

/// Seeds are limited to the TOML integer range.
pub const MAX_SEED: u64 = i64::MAX as u64;

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Lowers the document into a core scenario. File-level problems
    /// (negative split counts, non-tick budgets, unknown presets) are
    /// reported here; the rest is left to [`harq_core::validate`].
    pub fn to_scenario(&self) -> Result<Scenario, Vec<Violation>> {
        let mut errs = Vec::new();

        let mode = match self.mode.kind {
            ModeKind::LteFdd => RttTimerRule::LteFdd,
            ModeKind::LteTdd => RttTimerRule::LteTdd { k: self.mode.k },
            ModeKind::Proposed => RttTimerRule::Proposed,
        };

        let n = &self.numerology;
        let explicit = n.scs_hz.is_some() || n.fft_size.is_some() || n.symbols.is_some();
        let numerology = match (n.preset.as_deref(), explicit) {
            (Some(_), true) => {
                errs.push(bad(
                    ViolationCode::InvalidConfig,
                    "numerology.preset",
                    "preset and explicit fields are exclusive",
                ));
                NumerologyChoice::Proposed
            }
            (Some("proposed"), false) | (None, false) => {
                if n.cp_pattern.is_some() {
                    NumerologyChoice::Explicit {
                        scs_hz: 30_000,
                        fft_size: 1024,
                        symbols: 7,
                        cp_pattern: n.cp_pattern.as_ref().map(|p| p.iter().map(|c| (*c).into()).collect()),
                    }
                } else {
                    NumerologyChoice::Proposed
                }
            }
            (Some("lte"), false) => NumerologyChoice::Lte,
            (Some(other), false) => {
                errs.push(bad(
                    ViolationCode::InvalidConfig,
                    "numerology.preset",
                    format!("unknown preset `{other}`"),
                ));
                NumerologyChoice::Proposed
            }
            (None, true) => match (n.scs_hz, n.fft_size, n.symbols) {
                (Some(scs_hz), Some(fft_size), symbols) => NumerologyChoice::Explicit {
                    scs_hz,
                    fft_size,
                    symbols: symbols.unwrap_or(7),
                    cp_pattern: n.cp_pattern.as_ref().map(|p| p.iter().map(|c| (*c).into()).collect()),
                },
                _ => {
                    errs.push(bad(
                        ViolationCode::ZeroParameter,
                        "numerology",
                        "explicit numerology needs scs_hz and fft_size",
                    ));
                    NumerologyChoice::Proposed
                }
            },
        };

        let mut plan = Vec::with_capacity(self.plan.configs.len());
        for (i, item) in self.plan.configs.iter().enumerate() {
            match *item {
                PlanItem::Index(idx) => plan.push(PlanEntry::Preset(idx)),
                PlanItem::Split { dl, gp, ul } => {
                    let conv = |v: i64| u32::try_from(v).ok();
                    match (conv(dl), conv(gp), conv(ul)) {
                        (Some(dl), Some(gp), Some(ul)) => plan.push(PlanEntry::Custom { dl, gp, ul }),
                        _ => errs.push(bad(
                            ViolationCode::InvalidConfig,
                            format!("plan.configs[{i}]"),
                            format!("{dl}:{gp}:{ul} has a negative count"),
                        )),
                    }
                }
            }
        }

        let ue = us_to_ticks(self.budget.ue_us);
        let bs = us_to_ticks(self.budget.bs_us);
        if ue.is_none() {
            errs.push(bad(
                ViolationCode::NonIntegralDerivation,
                "budget.ue_us",
                "not a whole number of 30.72 MHz ticks",
            ));
        }
        if bs.is_none() {
            errs.push(bad(
                ViolationCode::NonIntegralDerivation,
                "budget.bs_us",
                "not a whole number of 30.72 MHz ticks",
            ));
        }

        let mut mcs_table = Vec::with_capacity(self.link.mcs.len());
        for (i, row) in self.link.mcs.iter().enumerate() {
            match parse_code_rate(&row.code_rate) {
                Some(code_rate) => mcs_table.push(McsEntry {
                    index: row.index,
                    modulation_order: row.modulation_order,
                    code_rate,
                    tbs_bits: row.tbs_bits,
                    bler_midpoint_snr_db: row.midpoint_snr_db,
                    bler_slope: row.slope,
                }),
                None => errs.push(bad(
                    ViolationCode::InvalidConfig,
                    format!("link.mcs[{i}].code_rate"),
                    format!("`{}` is not `num/den`", row.code_rate),
                )),
            }
        }

        if self.run.seed > MAX_SEED {
            errs.push(bad(
                ViolationCode::ZeroParameter,
                "run.seed",
                "seed must fit in a signed 64-bit integer",
            ));
        }

        if !errs.is_empty() {
            return Err(errs);
        }

        let t = &self.trial;
        Ok(Scenario {
            mode,
            numerology,
            plan,
            budget: ProcessingBudget {
                ue_processing: ue.unwrap(),
                bs_processing: bs.unwrap(),
                dl_tx_subframes: self.budget.dl_tx_subframes,
                ack_ul_symbols: self.budget.ack_symbols,
            },
            link: LinkParams {
                snr_db: self.link.snr_db,
                combining_gain_db_per_retx: self.link.combining_gain_db,
                ack_loss_prob: self.link.ack_loss_prob,
                forced_bler: self.link.forced_bler.clone(),
            },
            mcs_table,
            mcs_index: self.link.mcs_index,
            packet_count: self.run.packets,
            max_attempts: self.run.max_attempts,
            seed: self.run.seed,
            trial: TrialInfo {
                carrier_frequency_hz: t.carrier_frequency_hz,
                carrier_bandwidth_hz: t.carrier_bandwidth_hz,
                allocation_bandwidth_hz: t.allocation_bandwidth_hz,
                re_overhead_per_prb: t.re_overhead_per_prb,
                ue_count: t.ue_count,
                layers: t.layers,
                bs_antennas: t.bs_antennas.clone(),
                ue_antennas: t.ue_antennas.clone(),
                mimo_mode: t.mimo_mode.clone(),
            },
        })
    }

    /// Document form of a core scenario.
    pub fn from_scenario(s: &Scenario) -> Self {
        let (kind, k) = match s.mode {
            RttTimerRule::LteFdd => (ModeKind::LteFdd, RttTimerRule::DEFAULT_TDD_K),
            RttTimerRule::LteTdd { k } => (ModeKind::LteTdd, k),
            RttTimerRule::Proposed => (ModeKind::Proposed, RttTimerRule::DEFAULT_TDD_K),
        };
        let numerology = match &s.numerology {
            NumerologyChoice::Proposed => NumerologySection::default(),
            NumerologyChoice::Lte => NumerologySection {
                preset: Some("lte".into()),
                ..NumerologySection::default()
            },
            NumerologyChoice::Explicit {
                scs_hz,
                fft_size,
                symbols,
                cp_pattern,
            } => NumerologySection {
                preset: None,
                scs_hz: Some(*scs_hz),
                fft_size: Some(*fft_size),
                symbols: Some(*symbols),
                cp_pattern: cp_pattern.as_ref().map(|p| p.iter().map(|c| (*c).into()).collect()),
            },
        };
        let plan = s
            .plan
            .iter()
            .map(|e| match *e {
                PlanEntry::Preset(i) => PlanItem::Index(i),
                PlanEntry::Custom { dl, gp, ul } => PlanItem::Split {
                    dl: dl.into(),
                    gp: gp.into(),
                    ul: ul.into(),
                },
            })
            .collect();
        let t = &s.trial;
        ScenarioFile {
            mode: ModeSection { kind, k },
            numerology,
            plan: PlanSection { configs: plan },
            budget: BudgetSection {
                ue_us: ticks_to_us(s.budget.ue_processing),
                bs_us: ticks_to_us(s.budget.bs_processing),
                ack_symbols: s.budget.ack_ul_symbols,
                dl_tx_subframes: s.budget.dl_tx_subframes,
            },
            link: LinkSection {
                snr_db: s.link.snr_db,
                mcs_index: s.mcs_index,
                combining_gain_db: s.link.combining_gain_db_per_retx,
                ack_loss_prob: s.link.ack_loss_prob,
                forced_bler: s.link.forced_bler.clone(),
                mcs: s.mcs_table.iter().map(McsRow::from_entry).collect(),
            },
            run: RunSection {
                packets: s.packet_count,
                max_attempts: s.max_attempts,
                seed: s.seed,
            },
            trial: TrialSection {
                carrier_frequency_hz: t.carrier_frequency_hz,
                carrier_bandwidth_hz: t.carrier_bandwidth_hz,
                allocation_bandwidth_hz: t.allocation_bandwidth_hz,
                re_overhead_per_prb: t.re_overhead_per_prb,
                ue_count: t.ue_count,
                layers: t.layers,
                bs_antennas: t.bs_antennas.clone(),
                ue_antennas: t.ue_antennas.clone(),
                mimo_mode: t.mimo_mode.clone(),
            },
        }
    }
}
