//! TOML run reports.

use harq_core::sim_engine::{MetricsReport, ResolvedScenario};
use serde::Serialize;

use crate::scenario_file::ScenarioFile;

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    /// Unix seconds; omitted in deterministic mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    pub summary: Summary,
    pub rtt: RttSection,
    pub decoding: DecodingSection,
    pub feedback: FeedbackSection,
    pub allocation: AllocationSection,
    /// Exact input, so the report can be re-run.
    pub scenario: ScenarioFile,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub mode: String,
    pub packets_simulated: u64,
    pub max_attempts: u32,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct RttSection {
    pub samples: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_ticks: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ticks: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_ticks: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stddev_ticks: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_us: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_us: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_us: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct DecodingSection {
    pub successes_by_attempt: Vec<u64>,
    pub failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_attempt_success_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_rate_by_attempt: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_failure_rate: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct FeedbackSection {
    pub transmissions: u64,
    pub lost: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ack_nack_loss_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct AllocationSection {
    pub bandwidth_hz: u64,
    pub subcarriers: u64,
    pub prb_count: u64,
    pub overhead_re_per_prb: u64,
    pub mcs_index: u32,
    pub tbs_bits: u32,
}

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn build(
    file: &ScenarioFile,
    resolved: &ResolvedScenario,
    metrics: &MetricsReport,
    generated_at: Option<u64>,
) -> Report {
    let us = |t: harq_core::Tick| t.micros().to_string();
    let alloc = &resolved.allocation;
    Report {
        tool: TOOL.into(),
        version: VERSION.into(),
        generated_at,
        summary: Summary {
            mode: resolved.timeline.rule().name().into(),
            packets_simulated: metrics.packets_simulated,
            max_attempts: resolved.max_attempts,
            seed: resolved.seed,
        },
        rtt: RttSection {
            samples: metrics.rtt_ticks.len() as u64,
            min_ticks: metrics.rtt_min().map(|t| t.0),
            max_ticks: metrics.rtt_max().map(|t| t.0),
            mean_ticks: metrics.rtt_mean_ticks(),
            stddev_ticks: metrics.rtt_stddev_ticks(),
            min_us: metrics.rtt_min().map(us),
            mean_us: metrics.rtt_mean().map(|m| m.to_string()),
            max_us: metrics.rtt_max().map(us),
        },
        decoding: DecodingSection {
            successes_by_attempt: metrics.successes_by_attempt.clone(),
            failures: metrics.failures,
            first_attempt_success_rate: metrics.first_attempt_success_rate(),
            success_rate_by_attempt: metrics.success_rate_by_attempt(resolved.max_attempts as usize),
            residual_failure_rate: metrics.residual_failure_rate(),
        },
        feedback: FeedbackSection {
            transmissions: metrics.feedback_transmissions,
            lost: metrics.feedback_lost,
            ack_nack_loss_ratio: metrics.ack_nack_loss_ratio(),
        },
        allocation: AllocationSection {
            bandwidth_hz: alloc.allocation_bandwidth_hz,
            subcarriers: alloc.subcarriers,
            prb_count: alloc.prb_count,
            overhead_re_per_prb: alloc.overhead_re_per_prb,
            mcs_index: resolved.mcs.index,
            tbs_bits: resolved.mcs.tbs_bits,
        },
        scenario: file.clone(),
    }
}

impl Report {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}
