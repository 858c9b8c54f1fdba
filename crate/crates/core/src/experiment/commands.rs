//! File-producing pipelines behind the `djam` binary.
//!
//! Each command writes into an output directory and returns the notes it
//! also records in `log.txt` there.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::config::ExperimentConfig;
use super::harness::{prepare, run_trials, AggregateTrace, Algorithm, Prepared, TraceColumns, TraceSink};
use super::instance::generate_instance;
use crate::error::{Error, Result};
use crate::fmt_f64;

/// Threshold reported as `rounds_to_1e-6` in `summary.csv`.
pub const SUMMARY_THRESHOLD: f64 = 1e-6;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(&path, e))
}

fn write_log(dir: &Path, notes: &[String]) -> Result<()> {
    let mut f = create(dir, "log.txt")?;
    let path = dir.join("log.txt");
    for n in notes {
        writeln!(f, "{n}").map_err(|e| Error::io(&path, e))?;
    }
    f.flush().map_err(|e| Error::io(&path, e))
}

fn describe(cfg: &ExperimentConfig, prep: &Prepared) -> Vec<String> {
    let mut notes = prep.notes.clone();
    notes.push(format!(
        "instance: n = {}, edges = {}, seed = {}",
        prep.instance.n(),
        prep.instance.net.num_edges(),
        prep.seed
    ));
    notes.push(format!("oracle residual: {:e}", prep.solution.residual));
    notes.push(format!(
        "trials = {}, rounds = {}, trial master seed = {}",
        cfg.trials,
        cfg.rounds,
        cfg.trial_master_seed()
    ));
    notes
}

/// `gen`: the instance CSV bundle in `out/instance/`.
pub fn gen(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>> {
    let inst = generate_instance(cfg)?;
    inst.write_bundle(&out.join("instance"))?;
    let notes = vec![format!(
        "instance: n = {}, edges = {}, seed = {}",
        inst.n(),
        inst.net.num_edges(),
        cfg.instance_seed()
    )];
    write_log(out, &notes)?;
    Ok(notes)
}

/// `solve`: the instance bundle and the oracle solution `solution.csv`.
pub fn solve(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>> {
    let prep = prepare(cfg)?;
    prep.instance.write_bundle(&out.join("instance"))?;
    write_solution(&prep, out)?;
    let notes = describe(cfg, &prep);
    write_log(out, &notes)?;
    Ok(notes)
}

fn write_solution(prep: &Prepared, out: &Path) -> Result<()> {
    let mut f = create(out, "solution.csv")?;
    let path = out.join("solution.csv");
    prep.solution
        .write_csv(&mut f)
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(&path, e))
}

fn run_single(cfg: &ExperimentConfig, out: &Path, algorithm: Algorithm, columns: TraceColumns) -> Result<Vec<String>> {
    let prep = prepare(cfg)?;
    write_solution(&prep, out)?;
    let trace_path = out.join("trace.csv");
    let mut trace = create(out, "trace.csv")?;
    writeln!(trace, "{}", columns.header()).map_err(|e| Error::io(&trace_path, e))?;
    let agg = run_trials(
        cfg,
        &prep,
        algorithm,
        Some(TraceSink {
            out: &mut trace,
            columns,
        }),
    )?;
    write_aggregates(out, &[agg.clone()], cfg.trace_stride)?;
    let mut notes = describe(cfg, &prep);
    notes.push(summary_line(&agg));
    write_log(out, &notes)?;
    Ok(notes)
}

/// `run-djam`: `trace.csv`, `aggregate.csv`, `solution.csv`.
pub fn run_djam(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>> {
    run_single(cfg, out, Algorithm::Djam, TraceColumns::Plain)
}

/// `run-admm --rho r`: as `run-djam`, with a `rho` trace column.
pub fn run_admm(cfg: &ExperimentConfig, rho: f64, out: &Path) -> Result<Vec<String>> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::NonpositiveRho(rho));
    }
    run_single(cfg, out, Algorithm::Admm { rho }, TraceColumns::Rho)
}

/// `compare`: DJAM and ADMM for every `ρ` in `cfg.rhos` on one instance.
/// Writes `trace.csv`, `aggregate.csv`, `summary.csv`, `solution.csv`.
pub fn compare(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<String>> {
    let (_, notes) = compare_with_results(cfg, out)?;
    Ok(notes)
}

/// [`compare`], also returning the aggregates (DJAM first, then by `ρ`).
pub fn compare_with_results(cfg: &ExperimentConfig, out: &Path) -> Result<(Vec<AggregateTrace>, Vec<String>)> {
    let prep = prepare(cfg)?;
    write_solution(&prep, out)?;
    let trace_path = out.join("trace.csv");
    let mut trace = create(out, "trace.csv")?;
    let columns = TraceColumns::AlgorithmRho;
    writeln!(trace, "{}", columns.header()).map_err(|e| Error::io(&trace_path, e))?;

    let algorithms = std::iter::once(Algorithm::Djam).chain(cfg.rhos.iter().map(|&rho| Algorithm::Admm { rho }));
    let mut aggs = Vec::new();
    for alg in algorithms {
        aggs.push(run_trials(
            cfg,
            &prep,
            alg,
            Some(TraceSink {
                out: &mut trace,
                columns,
            }),
        )?);
    }
    write_aggregates(out, &aggs, cfg.trace_stride)?;

    let summary_path = out.join("summary.csv");
    let mut summary = create(out, "summary.csv")?;
    let mut body = String::from("algorithm,rho,terminal_mean_rel_error,rounds_to_1e-6\n");
    for a in &aggs {
        body.push_str(&format!(
            "{},{},{},{}\n",
            a.algorithm.name(),
            a.algorithm.rho().map(|r| r.to_string()).unwrap_or_default(),
            fmt_f64(a.terminal()),
            a.rounds_to(SUMMARY_THRESHOLD).map(|t| t.to_string()).unwrap_or_default()
        ));
    }
    summary
        .write_all(body.as_bytes())
        .and_then(|_| summary.flush())
        .map_err(|e| Error::io(&summary_path, e))?;

    let mut notes = describe(cfg, &prep);
    notes.extend(aggs.iter().map(summary_line));
    write_log(out, &notes)?;
    Ok((aggs, notes))
}

fn write_aggregates(out: &Path, aggs: &[AggregateTrace], stride: u64) -> Result<()> {
    let path = out.join("aggregate.csv");
    let mut f = create(out, "aggregate.csv")?;
    let mut res = writeln!(f, "{}", AggregateTrace::HEADER);
    for a in aggs {
        res = res.and_then(|_| a.write_csv(&mut f, stride, false));
    }
    res.and_then(|_| f.flush()).map_err(|e| Error::io(&path, e))
}

fn summary_line(a: &AggregateTrace) -> String {
    let label = match a.algorithm.rho() {
        Some(r) => format!("{} (rho = {r})", a.algorithm.name()),
        None => a.algorithm.name().to_string(),
    };
    let reach = a
        .rounds_to(SUMMARY_THRESHOLD)
        .map(|t| t.to_string())
        .unwrap_or_else(|| "never".into());
    format!(
        "{label}: terminal mean relative error {:e}, rounds to {SUMMARY_THRESHOLD:e}: {reach}",
        a.terminal()
    )
}
