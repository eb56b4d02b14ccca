//! One-dimensional parameter sweeps.
//!
//! Rows are independent runs executed in parallel; row `i` uses the seed
//! derived from the master seed and `i`, so results do not depend on
//! thread scheduling and the output keeps the input order.

use std::io::Write;

use harq_core::link_model::derive_substream_seed;
use harq_core::sim_engine::{resolve, run_report, MetricsReport};
use rayon::prelude::*;

use crate::error::CliError;
use crate::scenario_file::{ModeKind, ScenarioFile, MAX_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepField {
    Mode,
    K,
    SnrDb,
    McsIndex,
    CombiningGainDb,
    AckLossProb,
    UeUs,
    BsUs,
    AckSymbols,
    Packets,
    MaxAttempts,
    AllocationBandwidthHz,
}

impl SweepField {
    pub const ALL: [(&'static str, SweepField); 12] = [
        ("mode", SweepField::Mode),
        ("k", SweepField::K),
        ("snr_db", SweepField::SnrDb),
        ("mcs_index", SweepField::McsIndex),
        ("combining_gain_db", SweepField::CombiningGainDb),
        ("ack_loss_prob", SweepField::AckLossProb),
        ("ue_us", SweepField::UeUs),
        ("bs_us", SweepField::BsUs),
        ("ack_symbols", SweepField::AckSymbols),
        ("packets", SweepField::Packets),
        ("max_attempts", SweepField::MaxAttempts),
        ("allocation_bandwidth_hz", SweepField::AllocationBandwidthHz),
    ];

    pub fn parse(name: &str) -> Result<Self, CliError> {
        Self::ALL
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, f)| *f)
            .ok_or_else(|| CliError::UnknownSweepField(name.into()))
    }

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, f)| *f == self).map(|(n, _)| *n).unwrap()
    }

    /// Writes `value` into `file`.
    pub fn apply(self, file: &mut ScenarioFile, value: &str) -> Result<(), CliError> {
        fn num<T: std::str::FromStr>(field: SweepField, v: &str) -> Result<T, CliError> {
            v.trim().parse().map_err(|_| CliError::BadValue {
                what: field.name().into(),
                message: format!("`{v}` is not a valid number"),
            })
        }
        match self {
            SweepField::Mode => {
                file.mode.kind = ModeKind::parse(value.trim()).ok_or_else(|| CliError::BadValue {
                    what: "mode".into(),
                    message: format!("`{value}` is not lte_fdd, lte_tdd or proposed"),
                })?
            }
            SweepField::K => file.mode.k = num(self, value)?,
            SweepField::SnrDb => file.link.snr_db = num(self, value)?,
            SweepField::McsIndex => file.link.mcs_index = num(self, value)?,
            SweepField::CombiningGainDb => file.link.combining_gain_db = num(self, value)?,
            SweepField::AckLossProb => file.link.ack_loss_prob = num(self, value)?,
            SweepField::UeUs => file.budget.ue_us = num(self, value)?,
            SweepField::BsUs => file.budget.bs_us = num(self, value)?,
            SweepField::AckSymbols => file.budget.ack_symbols = num(self, value)?,
            SweepField::Packets => file.run.packets = num(self, value)?,
            SweepField::MaxAttempts => file.run.max_attempts = num(self, value)?,
            SweepField::AllocationBandwidthHz => file.trial.allocation_bandwidth_hz = num(self, value)?,
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub row: usize,
    pub value: String,
    pub seed: u64,
    pub metrics: MetricsReport,
}

/// Seed of row `row`, kept within the range a scenario file can hold.
pub fn row_seed(master: u64, row: usize) -> u64 {
    derive_substream_seed(master, row as u64) & MAX_SEED
}

/// Builds every row's scenario first, so a bad value fails before any run.
pub fn run_sweep(base: &ScenarioFile, field: SweepField, values: &[String]) -> Result<Vec<SweepRow>, CliError> {
    let mut files = Vec::with_capacity(values.len());
    for (row, v) in values.iter().enumerate() {
        let mut f = base.clone();
        field.apply(&mut f, v)?;
        f.run.seed = row_seed(base.run.seed, row);
        let scenario = f.to_scenario().map_err(CliError::Validation)?;
        resolve(&scenario).map_err(CliError::Validation)?;
        files.push((row, v.clone(), scenario));
    }
    files
        .into_par_iter()
        .map(|(row, value, scenario)| {
            let metrics = run_report(&scenario).map_err(|e| CliError::Simulation(e.to_string()))?;
            Ok(SweepRow {
                row,
                value,
                seed: scenario.seed,
                metrics,
            })
        })
        .collect()
}

pub const COLUMNS: [&str; 13] = [
    "row",
    "field",
    "value",
    "seed",
    "packets_simulated",
    "rtt_samples",
    "rtt_min_us",
    "rtt_mean_us",
    "rtt_max_us",
    "rtt_stddev_ticks",
    "first_attempt_success_rate",
    "residual_failure_rate",
    "ack_nack_loss_ratio",
];

/// CSV table; undefined statistics are left empty.
pub fn write_sweep<W: Write>(out: W, field: SweepField, rows: &[SweepRow]) -> Result<(), csv::Error> {
    let opt = |v: Option<String>| v.unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.row.to_string(),
            field.name().to_string(),
            r.value.clone(),
            r.seed.to_string(),
            m.packets_simulated.to_string(),
            m.rtt_ticks.len().to_string(),
            opt(m.rtt_min().map(|t| t.micros().to_string())),
            opt(m.rtt_mean().map(|t| t.to_string())),
            opt(m.rtt_max().map(|t| t.micros().to_string())),
            opt(m.rtt_stddev_ticks().map(|v| v.to_string())),
            opt(m.first_attempt_success_rate().map(|v| v.to_string())),
            opt(m.residual_failure_rate().map(|v| v.to_string())),
            opt(m.ack_nack_loss_ratio().map(|v| v.to_string())),
        ])?;
    }
    w.flush()?;
    Ok(())
}
