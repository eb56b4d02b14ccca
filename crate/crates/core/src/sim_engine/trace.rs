use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use thiserror::Error;

use super::metrics::MetricsReport;
use crate::harq::Feedback;
use crate::numerology::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// Packet entered its HARQ process; first transmission begins at `tx_start`.
    Arrival {
        tx_start: Tick,
    },
    DlTxEnd {
        decoded: bool,
    },
    FeedbackStart,
    FeedbackEnd {
        feedback: Feedback,
    },
    RetxStart,
    Done,
    Failed,
}

impl Transition {
    pub fn name(&self) -> &'static str {
        match self {
            Transition::Arrival { .. } => "arrival",
            Transition::DlTxEnd { .. } => "dl_tx_end",
            Transition::FeedbackStart => "feedback_start",
            Transition::FeedbackEnd { .. } => "feedback_end",
            Transition::RetxStart => "retx_start",
            Transition::Done => "done",
            Transition::Failed => "failed",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            Transition::Arrival { tx_start } => format!("tx_start={tx_start}"),
            Transition::DlTxEnd { decoded } => format!("decoded={decoded}"),
            Transition::FeedbackEnd { feedback } => format!("feedback={}", feedback.as_str()),
            _ => String::new(),
        }
    }

    /// Inverse of ([`name`](Self::name), [`detail`](Self::detail)).
    pub fn parse(name: &str, detail: &str) -> Option<Transition> {
        let value = |key: &str| detail.strip_prefix(key).and_then(|d| d.strip_prefix('='));
        let t = match name {
            "arrival" => Transition::Arrival {
                tx_start: Tick(value("tx_start")?.parse().ok()?),
            },
            "dl_tx_end" => Transition::DlTxEnd {
                decoded: value("decoded")?.parse().ok()?,
            },
            "feedback_start" => Transition::FeedbackStart,
            "feedback_end" => Transition::FeedbackEnd {
                feedback: match value("feedback")? {
                    "ack" => Feedback::Ack,
                    "nack" => Feedback::Nack,
                    "lost" => Feedback::Lost,
                    _ => return None,
                },
            },
            "retx_start" => Transition::RetxStart,
            "done" => Transition::Done,
            "failed" => Transition::Failed,
            _ => return None,
        };
        if !matches!(
            t,
            Transition::Arrival { .. } | Transition::DlTxEnd { .. } | Transition::FeedbackEnd { .. }
        ) && !detail.is_empty()
        {
            return None;
        }
        Some(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub time: Tick,
    pub process_id: u64,
    pub attempt: u32,
    pub transition: Transition,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SummarizeError {
    #[error("process {0} never reached a terminal state")]
    IncompleteTrace(u64),
    #[error("process {0} has a record before its arrival")]
    MissingArrival(u64),
}

#[derive(Default)]
struct PacketView {
    tx_start: Tick,
    first_tx_start: Tick,
    terminal: bool,
}

/// Rebuilds the metrics from a trace alone, independently of the online
/// bookkeeping in [`run`](super::run).
pub fn summarize(trace: &[TraceRecord]) -> Result<MetricsReport, SummarizeError> {
    let mut report = MetricsReport::default();
    let mut packets: BTreeMap<u64, PacketView> = BTreeMap::new();

    for rec in trace {
        if let Transition::Arrival { tx_start } = rec.transition {
            report.packets_simulated += 1;
            packets.insert(
                rec.process_id,
                PacketView {
                    tx_start,
                    first_tx_start: tx_start,
                    terminal: false,
                },
            );
            continue;
        }
        let view = packets
            .get_mut(&rec.process_id)
            .ok_or(SummarizeError::MissingArrival(rec.process_id))?;
        match rec.transition {
            Transition::FeedbackEnd { feedback } => {
                report.feedback_transmissions += 1;
                if feedback == Feedback::Lost {
                    report.feedback_lost += 1;
                }
            }
            Transition::RetxStart => {
                if rec.attempt == 2 {
                    report.rtt_ticks.push(rec.time - view.first_tx_start);
                }
                view.tx_start = rec.time;
            }
            Transition::Done => {
                report.record_success(rec.attempt);
                view.terminal = true;
            }
            Transition::Failed => {
                report.failures += 1;
                view.terminal = true;
            }
            _ => {}
        }
    }

    if let Some((id, _)) = packets.iter().find(|(_, v)| !v.terminal) {
        return Err(SummarizeError::IncompleteTrace(*id));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(time: u64, attempt: u32, transition: Transition) -> TraceRecord {
        TraceRecord {
            time: Tick(time),
            process_id: 0,
            attempt,
            transition,
        }
    }

    #[test]
    fn empty_trace() {
        let r = summarize(&[]).unwrap();
        assert_eq!(r.packets_simulated, 0);
        assert_eq!(r.first_attempt_success_rate(), None);
    }

    #[test]
    fn single_ack_first_try() {
        let trace = vec![
            rec(0, 1, Transition::Arrival { tx_start: Tick(0) }),
            rec(3312, 1, Transition::DlTxEnd { decoded: true }),
            rec(28_544, 1, Transition::FeedbackStart),
            rec(
                30_720,
                1,
                Transition::FeedbackEnd {
                    feedback: Feedback::Ack,
                },
            ),
            rec(30_720, 1, Transition::Done),
        ];
        let r = summarize(&trace).unwrap();
        assert_eq!(r.first_attempt_success_rate(), Some(1.0));
        assert!(r.rtt_ticks.is_empty());
        assert_eq!(r.ack_nack_loss_ratio(), Some(0.0));
    }

    #[test]
    fn unfinished_process() {
        let trace = vec![rec(0, 1, Transition::Arrival { tx_start: Tick(0) })];
        assert_eq!(summarize(&trace), Err(SummarizeError::IncompleteTrace(0)));
        assert_eq!(
            summarize(&[rec(5, 1, Transition::Done)]),
            Err(SummarizeError::MissingArrival(0))
        );
    }

    #[test]
    fn transition_text_round_trip() {
        let all = [
            Transition::Arrival { tx_start: Tick(7680) },
            Transition::DlTxEnd { decoded: false },
            Transition::FeedbackStart,
            Transition::FeedbackEnd {
                feedback: Feedback::Lost,
            },
            Transition::FeedbackEnd {
                feedback: Feedback::Ack,
            },
            Transition::RetxStart,
            Transition::Done,
            Transition::Failed,
        ];
        for t in all {
            assert_eq!(Transition::parse(t.name(), &t.detail()), Some(t));
        }
        assert_eq!(Transition::parse("done", "x"), None);
        assert_eq!(Transition::parse("dl_tx_end", "decoded=maybe"), None);
        assert_eq!(Transition::parse("warp", ""), None);
    }
}
