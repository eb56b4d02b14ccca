//! CSV event traces.
//!
//! One row per transition, in execution order. `time_us` is informational;
//! reading uses `time_tick` only.

use std::io::{Read, Write};

use harq_core::sim_engine::{TraceRecord, Transition};
use harq_core::Tick;
use thiserror::Error;

pub const HEADER: [&str; 6] = ["time_tick", "time_us", "process_id", "attempt", "transition", "detail"];

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Malformed { row: u64, message: String },
}

pub fn write_trace<W: Write>(out: W, records: &[TraceRecord]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.time.0.to_string(),
            r.time.micros().to_string(),
            r.process_id.to_string(),
            r.attempt.to_string(),
            r.transition.name().to_string(),
            r.transition.detail(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(TraceError::Malformed {
            row: 0,
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row?;
        let n = i as u64 + 1;
        let bad = |message: String| TraceError::Malformed { row: n, message };
        let num = |col: usize| -> Result<u64, TraceError> {
            row[col]
                .parse()
                .map_err(|_| bad(format!("{} `{}` is not an integer", HEADER[col], &row[col])))
        };
        let time = Tick(num(0)?);
        let process_id = num(2)?;
        let attempt = u32::try_from(num(3)?).map_err(|_| bad("attempt out of range".into()))?;
        let transition = Transition::parse(&row[4], &row[5])
            .ok_or_else(|| bad(format!("unknown transition `{}` / `{}`", &row[4], &row[5])))?;
        out.push(TraceRecord {
            time,
            process_id,
            attempt,
            transition,
        });
    }
    Ok(out)
}
