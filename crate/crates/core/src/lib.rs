//! Tick-exact HARQ round-trip simulation over OFDM TDD frame structures.
//!
//! - [`numerology`]: sampling-tick time base, CP lengths, subframe geometry
//! - [`frame_structure`]: DL/GP/UL subframe configurations and frame plans
//! - [`harq`]: RTT timer rules, feedback/retransmission scheduling, process state machine
//! - [`link_model`]: logistic BLER, combining gain and ACK/NACK loss on seeded streams
//! - [`sim_engine`]: the discrete-event executor, scenarios, metrics and traces
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod frame_structure;
pub mod harq;
pub mod link_model;
pub mod numerology;
pub mod sim_engine;

pub use frame_structure::{FramePlan, SubframeConfig, SymbolRole};
pub use harq::{HarqProcess, HarqTimeline, ProcessingBudget, RttTimerRule};
pub use link_model::{LinkParams, LinkState, McsEntry, McsTable};
pub use numerology::{Micros, Numerology, Tick, TICKS_PER_MS};
pub use sim_engine::{run, run_report, summarize, validate, MetricsReport, Scenario, SimOutput};
