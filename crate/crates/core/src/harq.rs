//! Stop-and-wait downlink HARQ: RTT timer rules, tick-exact scheduling of
//! feedback and retransmission, and the per-process state machine.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::frame_structure::{FrameError, FramePlan, SymbolRole};
use crate::numerology::{Tick, LTE_SUBFRAME_TICKS};

/// LTE processing allowance on either side, in subframes.
const LTE_PROCESSING_SUBFRAMES: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarqError {
    #[error("illegal transition: {event} in state {state}")]
    IllegalTransition { state: HarqState, event: &'static str },
    #[error("no UL window of {ack_symbols} symbols within one frame after tick {ready}")]
    NoUlOpportunity { ready: Tick, ack_symbols: u32 },
    #[error("frame plan has no DL subframe")]
    NoDlOpportunity,
    #[error("process was never retransmitted")]
    NotRetransmitted,
    #[error("LTE TDD feedback interval k must be at least 1")]
    InvalidK,
    #[error(transparent)]
    Frame(#[from] FrameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProcessingBudget {
    pub ue_processing: Tick,
    pub bs_processing: Tick,
    pub dl_tx_subframes: u32,
    pub ack_ul_symbols: u32,
}

impl ProcessingBudget {
    /// UE 0.7 ms, BS 0.5 ms, one DL subframe, two UL symbols for ACK/NACK.
    pub const PROPOSED: ProcessingBudget = ProcessingBudget {
        ue_processing: Tick(21_504),
        bs_processing: Tick(15_360),
        dl_tx_subframes: 1,
        ack_ul_symbols: 2,
    };
}

impl Default for ProcessingBudget {
    fn default() -> Self {
        Self::PROPOSED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RttTimerRule {
    LteFdd,
    /// `k` is the DL-to-feedback interval in subframes, usually 6 or 7.
    LteTdd {
        k: u32,
    },
    Proposed,
}

impl RttTimerRule {
    pub const DEFAULT_TDD_K: u32 = 7;

    pub fn name(self) -> &'static str {
        match self {
            RttTimerRule::LteFdd => "lte_fdd",
            RttTimerRule::LteTdd { .. } => "lte_tdd",
            RttTimerRule::Proposed => "proposed",
        }
    }

    pub fn is_lte(self) -> bool {
        !matches!(self, RttTimerRule::Proposed)
    }
}

/// Minimum subframes before a retransmission is expected.
pub fn rtt_timer_subframes(rule: RttTimerRule) -> u32 {
    match rule {
        RttTimerRule::LteFdd => 8,
        RttTimerRule::LteTdd { k } => k + 4,
        RttTimerRule::Proposed => 6,
    }
}

/// Earliest UL window able to carry the ACK/NACK once UE processing is done.
/// A window starting exactly when processing completes qualifies.
pub fn schedule_feedback(
    dl_data_end: Tick,
    budget: &ProcessingBudget,
    plan: &FramePlan,
) -> Result<(Tick, Tick), HarqError> {
    let ready = dl_data_end + budget.ue_processing;
    let no_window = HarqError::NoUlOpportunity {
        ready,
        ack_symbols: budget.ack_ul_symbols,
    };
    if budget.ack_ul_symbols == 0 {
        return Err(no_window);
    }
    let horizon = ready + plan.frame_ticks();
    let window = plan
        .symbol_windows(SymbolRole::Ul, ready)
        .map_err(|_| no_window.clone())?
        .take_while(|w| w.start <= horizon)
        .find(|w| w.symbol_count >= budget.ack_ul_symbols)
        .ok_or(no_window)?;
    let (_, end) = plan.symbol_span(window.subframe, window.first_symbol + budget.ack_ul_symbols - 1);
    Ok((window.start, end))
}

/// Start of the first DL-led subframe after BS processing. Retransmissions
/// are subframe aligned; a boundary equal to the ready time qualifies.
pub fn schedule_retransmission(
    feedback_end: Tick,
    budget: &ProcessingBudget,
    plan: &FramePlan,
) -> Result<Tick, HarqError> {
    let ready = feedback_end + budget.bs_processing;
    let sf = plan.next_dl_subframe(ready).map_err(|_| HarqError::NoDlOpportunity)?;
    Ok(plan.subframe_start(sf))
}

/// One DL transmission of a transport block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transmission {
    pub start: Tick,
    /// End of the last DL data symbol.
    pub data_end: Tick,
    /// End of the carrying subframe.
    pub subframe_end: Tick,
}

/// The timing rules a HARQ process follows in a given mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HarqTimeline {
    /// Symbol-level scheduling over a frame plan.
    Proposed { plan: FramePlan, budget: ProcessingBudget },
    /// Subframe-granular LTE-Advanced baselines.
    Lte { rule: RttTimerRule },
}

impl HarqTimeline {
    pub fn lte(rule: RttTimerRule) -> Result<Self, HarqError> {
        if let RttTimerRule::LteTdd { k: 0 } = rule {
            return Err(HarqError::InvalidK);
        }
        Ok(HarqTimeline::Lte { rule })
    }

    pub fn rule(&self) -> RttTimerRule {
        match self {
            HarqTimeline::Proposed { .. } => RttTimerRule::Proposed,
            HarqTimeline::Lte { rule } => *rule,
        }
    }

    /// First transmission opportunity at or after `from`.
    pub fn transmission_from(&self, from: Tick) -> Result<Transmission, HarqError> {
        match self {
            HarqTimeline::Proposed { plan, .. } => {
                let sf = plan.next_dl_subframe(from).map_err(|_| HarqError::NoDlOpportunity)?;
                let dl = plan.config_of(sf).dl_symbols;
                let (start, _) = plan.symbol_span(sf, 0);
                let (_, data_end) = plan.symbol_span(sf, dl - 1);
                Ok(Transmission {
                    start,
                    data_end,
                    subframe_end: plan.subframe_start(sf + 1),
                })
            }
            HarqTimeline::Lte { .. } => {
                let start = Tick(from.0.div_ceil(LTE_SUBFRAME_TICKS) * LTE_SUBFRAME_TICKS);
                let end = start + Tick(LTE_SUBFRAME_TICKS);
                Ok(Transmission {
                    start,
                    data_end: end,
                    subframe_end: end,
                })
            }
        }
    }

    pub fn feedback(&self, tx: &Transmission) -> Result<(Tick, Tick), HarqError> {
        match self {
            HarqTimeline::Proposed { plan, budget } => schedule_feedback(tx.data_end, budget, plan),
            HarqTimeline::Lte { rule } => {
                let offset = (rtt_timer_subframes(*rule) as u64 - 1 - LTE_PROCESSING_SUBFRAMES) * LTE_SUBFRAME_TICKS;
                let start = tx.start + Tick(offset);
                Ok((start, start + Tick(LTE_SUBFRAME_TICKS)))
            }
        }
    }

    pub fn retransmission(&self, feedback_end: Tick) -> Result<Tick, HarqError> {
        match self {
            HarqTimeline::Proposed { plan, budget } => schedule_retransmission(feedback_end, budget, plan),
            HarqTimeline::Lte { .. } => Ok(feedback_end + Tick(LTE_PROCESSING_SUBFRAMES * LTE_SUBFRAME_TICKS)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HarqState {
    Idle,
    DlSent,
    AwaitingFeedback,
    FeedbackReceived,
    Done,
    Failed,
}

impl fmt::Display for HarqState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feedback {
    Ack,
    Nack,
    Lost,
}

impl Feedback {
    pub fn as_str(self) -> &'static str {
        match self {
            Feedback::Ack => "ack",
            Feedback::Nack => "nack",
            Feedback::Lost => "lost",
        }
    }
}

/// Inputs to [`HarqProcess::advance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarqEvent {
    /// Packet handed to the process; the first transmission is scheduled.
    Arrival,
    /// DL data finished; `decoded` is the UE's decoding outcome.
    DlTxEnd {
        decoded: bool,
    },
    /// ACK/NACK transmission begins.
    FeedbackDue,
    /// ACK/NACK transmission ends; `delivered` is false when it was lost.
    FeedbackTxEnd {
        delivered: bool,
    },
    RetxDue,
}

impl HarqEvent {
    fn name(self) -> &'static str {
        match self {
            HarqEvent::Arrival => "arrival",
            HarqEvent::DlTxEnd { .. } => "dl_tx_end",
            HarqEvent::FeedbackDue => "feedback_due",
            HarqEvent::FeedbackTxEnd { .. } => "feedback_tx_end",
            HarqEvent::RetxDue => "retx_due",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Followup {
    DlTxEnd,
    FeedbackDue,
    FeedbackTxEnd,
    RetxDue,
    Done,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scheduled {
    pub at: Tick,
    pub kind: Followup,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarqProcess {
    pub process_id: u64,
    pub state: HarqState,
    pub attempt: u32,
    pub max_attempts: u32,
    pub first_tx_start: Tick,
    pub tx_start: Tick,
    pub tx_end: Tick,
    pub feedback_start: Tick,
    pub feedback_end: Tick,
    pub retx_start: Option<Tick>,
    /// Start of the attempt preceding the latest retransmission.
    prev_tx_start: Option<Tick>,
    decoded: bool,
    feedback_in_flight: bool,
    pub last_feedback: Option<Feedback>,
}

impl HarqProcess {
    pub fn new(process_id: u64, max_attempts: u32) -> Self {
        assert!(max_attempts >= 1, "max_attempts must be at least 1");
        HarqProcess {
            process_id,
            state: HarqState::Idle,
            attempt: 1,
            max_attempts,
            first_tx_start: Tick::ZERO,
            tx_start: Tick::ZERO,
            tx_end: Tick::ZERO,
            feedback_start: Tick::ZERO,
            feedback_end: Tick::ZERO,
            retx_start: None,
            prev_tx_start: None,
            decoded: false,
            feedback_in_flight: false,
            last_feedback: None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.state, HarqState::Done | HarqState::Failed)
    }

    fn illegal(&self, event: HarqEvent) -> HarqError {
        HarqError::IllegalTransition {
            state: self.state,
            event: event.name(),
        }
    }

    fn start_attempt(&mut self, tx: Transmission) -> Scheduled {
        self.tx_start = tx.start;
        self.tx_end = tx.data_end;
        self.state = HarqState::DlSent;
        Scheduled {
            at: tx.data_end,
            kind: Followup::DlTxEnd,
        }
    }

    /// Applies `event` at time `now`. On error the process is left untouched.
    pub fn advance(
        &mut self,
        event: HarqEvent,
        now: Tick,
        timeline: &HarqTimeline,
    ) -> Result<Vec<Scheduled>, HarqError> {
        use HarqState::*;
        match (self.state, event) {
            (Idle, HarqEvent::Arrival) => {
                let tx = timeline.transmission_from(now)?;
                self.first_tx_start = tx.start;
                Ok(alloc::vec![self.start_attempt(tx)])
            }
            (DlSent, HarqEvent::DlTxEnd { decoded }) => {
                let tx = Transmission {
                    start: self.tx_start,
                    data_end: self.tx_end,
                    subframe_end: self.tx_end,
                };
                let (fb_start, fb_end) = timeline.feedback(&tx)?;
                self.decoded = decoded;
                self.feedback_start = fb_start;
                self.feedback_end = fb_end;
                self.feedback_in_flight = false;
                self.state = AwaitingFeedback;
                Ok(alloc::vec![Scheduled {
                    at: fb_start,
                    kind: Followup::FeedbackDue
                }])
            }
            (AwaitingFeedback, HarqEvent::FeedbackDue) if !self.feedback_in_flight => {
                self.feedback_in_flight = true;
                Ok(alloc::vec![Scheduled {
                    at: self.feedback_end,
                    kind: Followup::FeedbackTxEnd
                }])
            }
            (AwaitingFeedback, HarqEvent::FeedbackTxEnd { delivered }) if self.feedback_in_flight => {
                let feedback = match (delivered, self.decoded) {
                    (false, _) => Feedback::Lost,
                    (true, true) => Feedback::Ack,
                    (true, false) => Feedback::Nack,
                };
                // A lost ACK/NACK is handled as a NACK.
                if feedback == Feedback::Ack {
                    self.feedback_in_flight = false;
                    self.last_feedback = Some(feedback);
                    self.state = Done;
                    return Ok(alloc::vec![Scheduled {
                        at: now,
                        kind: Followup::Done
                    }]);
                }
                if self.attempt >= self.max_attempts {
                    self.feedback_in_flight = false;
                    self.last_feedback = Some(feedback);
                    self.state = Failed;
                    return Ok(alloc::vec![Scheduled {
                        at: now,
                        kind: Followup::Failed
                    }]);
                }
                let retx = timeline.retransmission(self.feedback_end)?;
                self.feedback_in_flight = false;
                self.last_feedback = Some(feedback);
                self.retx_start = Some(retx);
                self.state = FeedbackReceived;
                Ok(alloc::vec![Scheduled {
                    at: retx,
                    kind: Followup::RetxDue
                }])
            }
            (FeedbackReceived, HarqEvent::RetxDue) => {
                let tx = timeline.transmission_from(now)?;
                self.prev_tx_start = Some(self.tx_start);
                self.attempt += 1;
                Ok(alloc::vec![self.start_attempt(tx)])
            }
            _ => Err(self.illegal(event)),
        }
    }
}

/// Retransmission start minus the start of the attempt it repeats.
pub fn measure_rtt(process: &HarqProcess) -> Result<Tick, HarqError> {
    match (process.prev_tx_start, process.retx_start) {
        (Some(prev), Some(retx)) if process.attempt > 1 => Ok(retx - prev),
        _ => Err(HarqError::NotRetransmitted),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    DlTransmission,
    UeWindow,
    AckNack,
    BsWindow,
    Retransmission,
}

impl ComponentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::DlTransmission => "dl_tx",
            ComponentKind::UeWindow => "ue_window",
            ComponentKind::AckNack => "ack_nack",
            ComponentKind::BsWindow => "bs_window",
            ComponentKind::Retransmission => "retx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimelineComponent {
    pub kind: ComponentKind,
    pub start: Tick,
    /// `None` for instants.
    pub end: Option<Tick>,
}

impl TimelineComponent {
    pub fn duration(&self) -> Option<Tick> {
        self.end.map(|e| e - self.start)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyticTimeline {
    pub rule: RttTimerRule,
    pub components: Vec<TimelineComponent>,
    pub rtt: Tick,
}

impl AnalyticTimeline {
    pub fn component(&self, kind: ComponentKind) -> Option<&TimelineComponent> {
        self.components.iter().find(|c| c.kind == kind)
    }
}

/// RNG-free timeline of one packet whose first attempt is NACKed.
///
/// LTE baselines only report the transmission and retransmission instants.
pub fn analytic_timeline(timeline: &HarqTimeline) -> Result<AnalyticTimeline, HarqError> {
    let tx = timeline.transmission_from(Tick::ZERO)?;
    let (fb_start, fb_end) = timeline.feedback(&tx)?;
    let retx = timeline.retransmission(fb_end)?;
    let instant = |kind, at| TimelineComponent {
        kind,
        start: at,
        end: None,
    };
    let components = match timeline {
        HarqTimeline::Lte { .. } => alloc::vec![
            instant(ComponentKind::DlTransmission, tx.start),
            instant(ComponentKind::Retransmission, retx),
        ],
        HarqTimeline::Proposed { .. } => alloc::vec![
            TimelineComponent {
                kind: ComponentKind::DlTransmission,
                start: tx.start,
                end: Some(tx.subframe_end)
            },
            TimelineComponent {
                kind: ComponentKind::UeWindow,
                start: tx.data_end,
                end: Some(fb_start)
            },
            TimelineComponent {
                kind: ComponentKind::AckNack,
                start: fb_start,
                end: Some(fb_end)
            },
            TimelineComponent {
                kind: ComponentKind::BsWindow,
                start: fb_end,
                end: Some(retx)
            },
            instant(ComponentKind::Retransmission, retx),
        ],
    };
    Ok(AnalyticTimeline {
        rule: timeline.rule(),
        components,
        rtt: retx - tx.start,
    })
}
