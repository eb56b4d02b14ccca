//! Analytic timeline printout.

use std::fmt::Write;

use harq_core::harq::analytic_timeline;
use harq_core::sim_engine::ResolvedScenario;
use harq_core::Tick;

use crate::error::CliError;

/// Component-by-component table of one NACKed packet. No RNG involved.
pub fn explain(resolved: &ResolvedScenario) -> Result<String, CliError> {
    let tl = analytic_timeline(&resolved.timeline).map_err(|e| CliError::Simulation(e.to_string()))?;
    let us = |t: Tick| t.micros().to_string();
    let mut s = String::new();
    writeln!(s, "mode {}", tl.rule.name()).unwrap();
    writeln!(
        s,
        "{:<10} {:>10} {:>10} {:>10} {:>12}",
        "component", "start", "end", "ticks", "us"
    )
    .unwrap();
    for c in &tl.components {
        match c.end {
            Some(end) => writeln!(
                s,
                "{:<10} {:>10} {:>10} {:>10} {:>12}",
                c.kind.as_str(),
                c.start.0,
                end.0,
                (end - c.start).0,
                us(end - c.start)
            ),
            None => writeln!(
                s,
                "{:<10} {:>10} {:>10} {:>10} {:>12}",
                c.kind.as_str(),
                c.start.0,
                "-",
                "-",
                "-"
            ),
        }
        .unwrap();
    }
    writeln!(s, "rtt {} ticks ({} us)", tl.rtt, us(tl.rtt)).unwrap();
    Ok(s)
}
