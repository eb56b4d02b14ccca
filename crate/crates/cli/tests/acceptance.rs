//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use harq_core::numerology::{build_geometry, CpKind, Numerology};
use harq_core::sim_engine::{run, run_report, summarize};
use harq_core::Tick;
use harq_sim::scenario_file::ModeKind;
use harq_sim::sweep::{run_sweep, SweepField};
use harq_sim::{explain, lower, run_file, trace_file, ScenarioFile};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Lab-trial preset with the first attempt always failing.
fn forced(kind: ModeKind, k: u32, packets: u64) -> ScenarioFile {
    let mut f = ScenarioFile::default();
    f.mode.kind = kind;
    f.mode.k = k;
    f.link.forced_bler = Some(vec![1.0, 0.0]);
    f.run.packets = packets;
    f
}

/// Every RTT sample of a forced run, checked to be identical.
fn constant_rtt(f: &ScenarioFile) -> Result<Tick, String> {
    let (scenario, _) = lower(f).map_err(|e| e.to_string())?;
    let m = run_report(&scenario).map_err(|e| e.to_string())?;
    ensure(m.rtt_ticks.len() as u64 == f.run.packets, || {
        format!("{} RTT samples for {} packets", m.rtt_ticks.len(), f.run.packets)
    })?;
    let first = m.rtt_ticks[0];
    ensure(m.rtt_ticks.iter().all(|&t| t == first), || "RTT varies".into())?;
    ensure(f.run.packets < 2 || m.rtt_stddev_ticks() == Some(0.0), || {
        format!("stddev {:?}", m.rtt_stddev_ticks())
    })?;
    Ok(first)
}

const TICKS_PER_MS: u64 = 30_720;

fn c1_proposed_rtt() -> Outcome {
    let started = Instant::now();
    let rtt = constant_rtt(&forced(ModeKind::Proposed, 7, 10_000))?;
    let elapsed = started.elapsed();
    // 1.5 ms at 30.72 MHz.
    ensure(rtt == Tick(3 * TICKS_PER_MS / 2), || format!("RTT {rtt} ticks"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("10^4 packets, RTT {rtt} ticks, stddev 0, {elapsed:.2?}"))
}

fn lte_rtts() -> Result<[Tick; 3], String> {
    Ok([
        constant_rtt(&forced(ModeKind::LteFdd, 7, 200))?,
        constant_rtt(&forced(ModeKind::LteTdd, 7, 200))?,
        constant_rtt(&forced(ModeKind::LteTdd, 6, 200))?,
    ])
}

fn c2_lte_baselines() -> Outcome {
    let [fdd, tdd7, tdd6] = lte_rtts()?;
    ensure(fdd == Tick(8 * TICKS_PER_MS), || format!("FDD {fdd}"))?;
    ensure(tdd7 == Tick(11 * TICKS_PER_MS), || format!("TDD k=7 {tdd7}"))?;
    ensure(tdd6 == Tick(10 * TICKS_PER_MS), || format!("TDD k=6 {tdd6}"))?;
    Ok(format!(
        "FDD {} / TDD7 {} / TDD6 {} us",
        fdd.micros(),
        tdd7.micros(),
        tdd6.micros()
    ))
}

fn c3_ratios() -> Outcome {
    let proposed = constant_rtt(&forced(ModeKind::Proposed, 7, 200))?;
    let [fdd, tdd7, _] = lte_rtts()?;
    // Exact rational comparison: a / b == n / d  <=>  a d == n b.
    ensure(tdd7.0 * 3 == proposed.0 * 22, || format!("TDD ratio {tdd7}/{proposed}"))?;
    ensure(fdd.0 * 3 == proposed.0 * 16, || format!("FDD ratio {fdd}/{proposed}"))?;
    let fdd_ratio = fdd.0 as f64 / proposed.0 as f64;
    ensure((4.5..6.0).contains(&fdd_ratio), || {
        format!("FDD ratio {fdd_ratio} not around 5")
    })?;
    Ok(format!(
        "TDD7/proposed = 22/3 ({:.2}), FDD/proposed = 16/3 ({fdd_ratio:.2})",
        tdd7.0 as f64 / proposed.0 as f64
    ))
}

fn c4_cp_tiling() -> Outcome {
    const FFT: u64 = 1024;
    let long = FFT * 5 / 64;
    let short = FFT * 4 / 64;
    let subframe = TICKS_PER_MS / 4;
    let mut tiling = 0;
    for mask in 0u32..(1 << 7) {
        let pattern: Vec<CpKind> = (0..7)
            .map(|i| {
                if mask & (1 << i) != 0 {
                    CpKind::Long
                } else {
                    CpKind::Short
                }
            })
            .collect();
        let n_long = mask.count_ones() as u64;
        let total = n_long * (FFT + long) + (7 - n_long) * (FFT + short);
        let oracle = total == subframe;
        ensure(!oracle || n_long == 4, || format!("{n_long} long CPs also tile"))?;
        let accepted = build_geometry(&Numerology::proposed().with_cp_pattern(pattern)).is_ok();
        ensure(accepted == oracle, || {
            format!("pattern {mask:07b}: accepted={accepted}, oracle={oracle}")
        })?;
        tiling += oracle as u32;
    }
    // C(7, 4)
    ensure(tiling == 35, || format!("{tiling} tiling patterns"))?;
    Ok(format!(
        "128 patterns checked, {tiling} tile {subframe} ticks, all with 4 long CPs"
    ))
}

fn c5_explain_components() -> Outcome {
    let (_, resolved) = lower(&ScenarioFile::default()).map_err(|e| e.to_string())?;
    let text = explain::explain(&resolved).map_err(|e| e.to_string())?;
    let duration_us = |name: &str| -> Result<f64, String> {
        let line = text
            .lines()
            .find(|l| l.split_whitespace().next() == Some(name))
            .ok_or_else(|| format!("no `{name}` line"))?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        let ticks: f64 = cols[3].parse().map_err(|_| format!("bad ticks in `{line}`"))?;
        let us: f64 = cols[4].parse().map_err(|_| format!("bad us in `{line}`"))?;
        ensure((ticks * 1000.0 / TICKS_PER_MS as f64 - us).abs() <= 0.005, || {
            format!("inconsistent `{line}`")
        })?;
        Ok(us)
    };
    let near = |v: f64, target: f64| (v - target).abs() <= 5.0;
    let dl = duration_us("dl_tx")?;
    let ack = duration_us("ack_nack")?;
    let bs = duration_us("bs_window")?;
    let ue = duration_us("ue_window")?;
    ensure(near(dl, 250.0), || format!("DL {dl}"))?;
    ensure(near(ack, 2.0 * 1088.0 * 1000.0 / TICKS_PER_MS as f64), || {
        format!("ACK {ack}")
    })?;
    ensure(near(ack, 70.0), || format!("ACK {ack} not ~0.07 ms"))?;
    ensure(near(bs, 500.0), || format!("BS {bs}"))?;
    ensure(ue >= 700.0 - 5.0, || format!("UE window {ue}"))?;
    Ok(format!("DL {dl} us, ACK {ack} us, BS {bs} us, UE window {ue} us"))
}

fn c6_no_ack_loss() -> Outcome {
    let mut f = ScenarioFile::default();
    f.run.packets = 100_000;
    f.link.ack_loss_prob = 0.0;
    f.link.snr_db = 11.0; // ~50% first-attempt BLER, so plenty of NACKs
    let (scenario, _) = lower(&f).map_err(|e| e.to_string())?;
    let m = run_report(&scenario).map_err(|e| e.to_string())?;
    ensure(m.packets_simulated == 100_000, || "packet count".into())?;
    ensure(m.feedback_lost == 0, || format!("{} feedbacks lost", m.feedback_lost))?;
    ensure(m.ack_nack_loss_ratio() == Some(0.0), || {
        format!("ratio {:?}", m.ack_nack_loss_ratio())
    })?;
    Ok(format!("{} feedback transmissions, 0 lost", m.feedback_transmissions))
}

fn c7_statistics() -> Outcome {
    let started = Instant::now();
    let n = 100_000u64;
    let mut notes = Vec::new();
    for p in [0.5f64, 0.1, 0.01] {
        // MCS 16: midpoint 11 dB, slope 1.5/dB; invert the logistic curve.
        let mut f = ScenarioFile::default();
        f.link.snr_db = 11.0 + ((1.0 - p) / p).ln() / 1.5;
        f.run.packets = n;
        f.run.max_attempts = 1;
        f.run.seed = 7;
        let (scenario, _) = lower(&f).map_err(|e| e.to_string())?;
        let m = run_report(&scenario).map_err(|e| e.to_string())?;
        let observed = m.failures as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        ensure((observed - p).abs() <= 3.0 * sigma, || {
            format!("p={p}: observed {observed}, 3 sigma {}", 3.0 * sigma)
        })?;
        notes.push(format!("p={p}: {observed:.4}"));
    }
    let base = {
        let mut f = ScenarioFile::default();
        f.run.packets = 10_000;
        f.run.max_attempts = 1;
        f
    };
    let values: Vec<String> = (6..=26).step_by(2).map(|s| s.to_string()).collect();
    let rows = run_sweep(&base, SweepField::SnrDb, &values).map_err(|e| e.to_string())?;
    let rates: Vec<f64> = rows
        .iter()
        .map(|r| r.metrics.first_attempt_success_rate().unwrap())
        .collect();
    ensure(rates.windows(2).all(|w| w[0] <= w[1]), || {
        format!("not monotone: {rates:?}")
    })?;
    ensure(rates[0] < 0.01 && *rates.last().unwrap() == 1.0, || {
        format!("sweep ends {rates:?}")
    })?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{}; decode rate monotone over 6..26 dB; {elapsed:.2?}",
        notes.join(", ")
    ))
}

fn corpus() -> Vec<(&'static str, ScenarioFile)> {
    let mut out = Vec::new();
    let mut lab = ScenarioFile::default();
    lab.run.packets = 2_000;
    out.push(("lab-trial", lab.clone()));
    out.push(("forced", forced(ModeKind::Proposed, 7, 500)));
    out.push(("lte-fdd", forced(ModeKind::LteFdd, 7, 300)));
    out.push(("lte-tdd-6", forced(ModeKind::LteTdd, 6, 300)));
    let mut lossy = lab.clone();
    lossy.link.snr_db = 9.0;
    lossy.link.ack_loss_prob = 0.3;
    out.push(("lossy", lossy));
    let mut exhausted = lab.clone();
    exhausted.link.snr_db = -10.0;
    exhausted.run.max_attempts = 3;
    out.push(("exhausted", exhausted));
    let mut mixed = ScenarioFile::parse("[plan]\nconfigs = [1, 2, { dl = 4, gp = 1, ul = 2 }, 0]\n").unwrap();
    mixed.run.packets = 1_000;
    mixed.link.snr_db = 10.0;
    out.push(("mixed-plan", mixed));
    out
}

fn c8_determinism() -> Outcome {
    for (name, f) in corpus() {
        let a = run_file(&f, true).map_err(|e| format!("{name}: {e}"))?;
        let b = run_file(&f, true).map_err(|e| format!("{name}: {e}"))?;
        ensure(a.report == b.report, || format!("{name}: reports differ"))?;

        let (scenario, _) = lower(&f).map_err(|e| e.to_string())?;
        let out = run(&scenario).map_err(|e| e.to_string())?;
        let offline = summarize(&out.trace).map_err(|e| format!("{name}: {e:?}"))?;
        ensure(offline == out.report, || {
            format!("{name}: summarize(trace) differs from online report")
        })?;

        let mut csv = Vec::new();
        trace_file::write_trace(&mut csv, &out.trace).map_err(|e| e.to_string())?;
        let back = trace_file::read_trace(csv.as_slice()).map_err(|e| e.to_string())?;
        ensure(back == out.trace, || format!("{name}: CSV trace does not round-trip"))?;

        // The scenario echoed in the report re-runs to the same report.
        let doc: toml::Table = a.report.parse().map_err(|e| format!("{name}: {e}"))?;
        let echo = toml::to_string(&doc["scenario"]).unwrap();
        let again =
            run_file(&ScenarioFile::parse(&echo).map_err(|e| e.to_string())?, true).map_err(|e| e.to_string())?;
        ensure(again.report == a.report, || {
            format!("{name}: echoed scenario gives a different report")
        })?;
    }

    // Same check through the binary with an explicit seed.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("r{i}.toml"));
        let status = Command::new(env!("CARGO_BIN_EXE_harq-sim"))
            .args([
                "run",
                "--preset",
                "lab-trial",
                "--seed",
                "99",
                "--deterministic",
                "--out",
            ])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("binary exited with {status}"))?;
        bytes.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(bytes[0] == bytes[1], || "binary reports differ".into())?;
    Ok(format!(
        "{} corpus scenarios, byte-identical reports, summarize == online",
        corpus().len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("proposed-mode RTT is exactly 1.5 ms", c1_proposed_rtt),
        ("LTE baselines 8 / 11 / 10 ms", c2_lte_baselines),
        ("RTT ratios against LTE", c3_ratios),
        ("CP tiling oracle", c4_cp_tiling),
        ("explain budget components", c5_explain_components),
        ("zero ACK/NACK loss", c6_no_ack_loss),
        ("BLER statistics and SNR monotonicity", c7_statistics),
        ("determinism and two-path consistency", c8_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
