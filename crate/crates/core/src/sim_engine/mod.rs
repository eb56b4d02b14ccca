//! Deterministic discrete-event executor.
//!
//! Packets are served closed-loop by a single HARQ flow: packet `n + 1`
//! arrives at the instant packet `n` reaches `Done` or `Failed`. Events are
//! executed in `(time, sequence_no)` order, time is integer ticks and all
//! randomness comes from the seeded link streams, so a scenario fully
//! determines the report and the trace.

mod metrics;
mod queue;
mod scenario;
mod trace;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

pub use metrics::MetricsReport;
pub use queue::{Event, EventKind, EventQueue};
pub use scenario::{
    resolve, validate, NumerologyChoice, PlanEntry, ResolvedScenario, Scenario, TrialInfo, Violation, ViolationCode,
};
pub use trace::{summarize, SummarizeError, TraceRecord, Transition};

use crate::harq::{measure_rtt, Followup, HarqError, HarqEvent, HarqProcess};
use crate::link_model::LinkState;
use crate::numerology::Tick;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("scenario has {} violation(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
    #[error("process {process_id}: {source} (check `{field}`)")]
    Harq {
        process_id: u64,
        field: &'static str,
        source: HarqError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutput {
    pub report: MetricsReport,
    pub trace: Vec<TraceRecord>,
}

fn followup_kind(f: Followup) -> EventKind {
    match f {
        Followup::DlTxEnd => EventKind::DlTxEnd,
        Followup::FeedbackDue => EventKind::FeedbackDue,
        Followup::FeedbackTxEnd => EventKind::FeedbackTxEnd,
        Followup::RetxDue => EventKind::RetxDue,
        Followup::Done => EventKind::ProcessDone,
        Followup::Failed => EventKind::ProcessFailed,
    }
}

struct Engine<'a> {
    resolved: &'a ResolvedScenario,
    link: LinkState,
    queue: EventQueue,
    processes: BTreeMap<u64, HarqProcess>,
    report: MetricsReport,
    trace: Option<Vec<TraceRecord>>,
    last_time: Tick,
}

impl Engine<'_> {
    fn harq_error(process_id: u64, source: HarqError) -> SimError {
        let field = match source {
            HarqError::NoUlOpportunity { .. } | HarqError::NoDlOpportunity => "plan",
            _ => "mode",
        };
        SimError::Harq {
            process_id,
            field,
            source,
        }
    }

    fn record(&mut self, time: Tick, process: &HarqProcess, transition: Transition) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceRecord {
                time,
                process_id: process.process_id,
                attempt: process.attempt,
                transition,
            });
        }
    }

    fn execute(&mut self, ev: Event) -> Result<(), SimError> {
        debug_assert!(ev.time >= self.last_time, "event executed out of order");
        self.last_time = ev.time;
        let id = ev.process_id;
        let timeline = &self.resolved.timeline;

        if ev.kind == EventKind::PacketArrival {
            let mut p = HarqProcess::new(id, self.resolved.max_attempts);
            let next = p
                .advance(HarqEvent::Arrival, ev.time, timeline)
                .map_err(|e| Self::harq_error(id, e))?;
            self.report.packets_simulated += 1;
            self.record(
                ev.time,
                &p,
                Transition::Arrival {
                    tx_start: p.first_tx_start,
                },
            );
            for s in next {
                self.queue.push(s.at, followup_kind(s.kind), id);
            }
            self.processes.insert(id, p);
            return Ok(());
        }

        let mut p = self.processes.remove(&id).expect("event for a live process");
        let (harq_event, transition) = match ev.kind {
            EventKind::DlTxEnd => {
                let decoded = self.link.draw_decode(&self.resolved.mcs, p.attempt);
                (Some(HarqEvent::DlTxEnd { decoded }), Transition::DlTxEnd { decoded })
            }
            EventKind::FeedbackDue => (Some(HarqEvent::FeedbackDue), Transition::FeedbackStart),
            EventKind::FeedbackTxEnd => {
                let delivered = self.link.draw_ack_delivery();
                self.report.feedback_transmissions += 1;
                if !delivered {
                    self.report.feedback_lost += 1;
                }
                (Some(HarqEvent::FeedbackTxEnd { delivered }), Transition::FeedbackStart)
            }
            EventKind::RetxDue => (Some(HarqEvent::RetxDue), Transition::RetxStart),
            EventKind::ProcessDone => {
                self.report.record_success(p.attempt);
                (None, Transition::Done)
            }
            EventKind::ProcessFailed => {
                self.report.failures += 1;
                (None, Transition::Failed)
            }
            EventKind::PacketArrival => unreachable!(),
        };

        match harq_event {
            Some(he) => {
                let next = p.advance(he, ev.time, timeline).map_err(|e| Self::harq_error(id, e))?;
                let transition = match transition {
                    Transition::FeedbackStart if ev.kind == EventKind::FeedbackTxEnd => Transition::FeedbackEnd {
                        feedback: p.last_feedback.expect("feedback resolved"),
                    },
                    t => t,
                };
                if ev.kind == EventKind::RetxDue && p.attempt == 2 {
                    self.report
                        .rtt_ticks
                        .push(measure_rtt(&p).map_err(|e| Self::harq_error(id, e))?);
                }
                self.record(ev.time, &p, transition);
                for s in next {
                    self.queue.push(s.at, followup_kind(s.kind), id);
                }
                self.processes.insert(id, p);
            }
            None => {
                self.record(ev.time, &p, transition);
                if id + 1 < self.resolved.packet_count {
                    self.queue.push(ev.time, EventKind::PacketArrival, id + 1);
                }
            }
        }
        Ok(())
    }
}

fn simulate(resolved: &ResolvedScenario, keep_trace: bool) -> Result<SimOutput, SimError> {
    let link = LinkState::new(resolved.link.clone(), resolved.seed).expect("link parameters validated during resolve");
    let mut engine = Engine {
        resolved,
        link,
        queue: EventQueue::new(),
        processes: BTreeMap::new(),
        report: MetricsReport::default(),
        trace: keep_trace.then(Vec::new),
        last_time: Tick::ZERO,
    };
    if resolved.packet_count > 0 {
        engine.queue.push(Tick::ZERO, EventKind::PacketArrival, 0);
    }
    while let Some(ev) = engine.queue.pop() {
        engine.execute(ev)?;
    }
    debug_assert!(engine.processes.is_empty());
    Ok(SimOutput {
        report: engine.report,
        trace: engine.trace.unwrap_or_default(),
    })
}

/// Runs `scenario` and returns the online report together with the trace.
pub fn run(scenario: &Scenario) -> Result<SimOutput, SimError> {
    let resolved = resolve(scenario).map_err(SimError::Invalid)?;
    simulate(&resolved, true)
}

/// Same as [`run`] without keeping the trace.
pub fn run_report(scenario: &Scenario) -> Result<MetricsReport, SimError> {
    let resolved = resolve(scenario).map_err(SimError::Invalid)?;
    simulate(&resolved, false).map(|o| o.report)
}
