use std::io::Write;

use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::network::{Edge, Network};

/// Header of the per-round trace CSV.
pub const TRACE_HEADER: &str = "trial,round,edge_i,edge_j,V,mean_rel_error,epoch";

/// Diagnostics of one round, recorded after the round's update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: u64,
    pub edge: Edge,
    /// Max error over stored neighbor copies, when a reference solution is known.
    pub v: Option<f64>,
    pub mean_rel_error: Option<f64>,
    /// `Some(m)` when this round is the epoch boundary `T_m`.
    pub epoch: Option<usize>,
}

impl RoundRecord {
    /// CSV row matching [`TRACE_HEADER`]; agents are written 1-based.
    pub fn csv_row(&self, trial: usize) -> String {
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            trial,
            self.round,
            self.edge.lo() + 1,
            self.edge.hi() + 1,
            opt(self.v),
            opt(self.mean_rel_error),
            self.epoch.map(|m| m.to_string()).unwrap_or_default()
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    /// `V(0)`, when a reference solution is known.
    pub initial_v: Option<f64>,
    pub initial_mean_rel_error: Option<f64>,
    pub records: Vec<RoundRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.records.iter().map(|r| r.edge).collect()
    }

    /// `V(0), V(1), …` (empty without a reference solution).
    pub fn v_series(&self) -> Vec<f64> {
        self.initial_v
            .into_iter()
            .chain(self.records.iter().filter_map(|r| r.v))
            .collect()
    }

    pub fn mean_rel_error_series(&self) -> Vec<f64> {
        self.initial_mean_rel_error
            .into_iter()
            .chain(self.records.iter().filter_map(|r| r.mean_rel_error))
            .collect()
    }

    /// Epoch boundaries `[T_1, T_2, …]` seen in this trace.
    pub fn epochs(&self) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.epoch.is_some())
            .map(|r| r.round)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W, trial: usize, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "{TRACE_HEADER}")?;
        }
        for r in &self.records {
            writeln!(out, "{}", r.csv_row(trial))?;
        }
        Ok(())
    }
}

/// Online detection of the rounds by which every edge has been drawn since
/// the previous boundary.
#[derive(Debug, Clone)]
pub struct EpochTracker {
    seen: Vec<bool>,
    missing: usize,
    completed: usize,
}

impl EpochTracker {
    pub fn new(num_edges: usize) -> Self {
        EpochTracker {
            seen: vec![false; num_edges],
            missing: num_edges,
            completed: 0,
        }
    }

    /// Registers a draw; returns `Some(m)` if it completes epoch `m`.
    pub fn observe(&mut self, edge: usize) -> Option<usize> {
        if !std::mem::replace(&mut self.seen[edge], true) {
            self.missing -= 1;
        }
        if self.missing == 0 {
            self.seen.iter_mut().for_each(|s| *s = false);
            self.missing = self.seen.len();
            self.completed += 1;
            Some(self.completed)
        } else {
            None
        }
    }

    pub fn completed(&self) -> usize {
        self.completed
    }
}

/// Epoch boundaries `[T_1, T_2, …]` (1-based rounds) of an edge sequence.
///
/// `T_{m+1}` is the first round after `T_m` by which every edge of `net` has
/// appeared in rounds `T_m + 1 ..= T_{m+1}`; incomplete trailing epochs are
/// dropped.
pub fn epoch_boundaries(edges: &[Edge], net: &Network) -> Result<Vec<u64>> {
    let mut tracker = EpochTracker::new(net.num_edges());
    let mut out = Vec::new();
    for (t, e) in edges.iter().enumerate() {
        let k = net
            .edge_index(e.lo(), e.hi())
            .ok_or(Error::UnknownEdge(e.lo(), e.hi()))?;
        if tracker.observe(k).is_some() {
            out.push(t as u64 + 1);
        }
    }
    Ok(out)
}
