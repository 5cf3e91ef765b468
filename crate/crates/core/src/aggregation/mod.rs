//! Reduction of attack traces to effort percentiles and success rates.

mod report;

pub use report::{emit_report, read_csv, render_svg, write_csv, write_json, Format};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pruning::{GreedyTrace, StatTrace, SuccessCriterion};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Greedy,
    Statistical,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Greedy => "greedy",
            Mode::Statistical => "statistical",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Mode::Greedy),
            "statistical" => Ok(Mode::Statistical),
            _ => Err(Error::config("mode", format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum TraceRef<'a> {
    Greedy(&'a GreedyTrace),
    Statistical(&'a StatTrace),
}

impl TraceRef<'_> {
    pub fn mode(&self) -> Mode {
        match self {
            TraceRef::Greedy(_) => Mode::Greedy,
            TraceRef::Statistical(_) => Mode::Statistical,
        }
    }
}

/// What a set of traces was produced from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportKey {
    pub game_label: String,
    pub encoding: String,
    pub logic: String,
}

/// One `(archive, logic, mode, n)` cell of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub game_label: String,
    pub encoding: String,
    pub logic: String,
    pub mode: Mode,
    pub n: usize,
    pub samples: usize,
    pub p25: u64,
    pub p50: u64,
    pub p75: u64,
    pub mean_success_rate: f64,
    /// Success criterion of statistical rows.
    pub criterion: Option<String>,
}

/// Nearest-rank percentile: the element at `ceil(q * len) - 1` of the sorted samples.
pub fn percentile<T: Copy + PartialOrd>(samples: &[T], q: f64) -> Result<T> {
    weighted_percentile(&samples.iter().map(|&s| (s, 1.0)).collect::<Vec<_>>(), q)
}

/// Nearest-rank percentile over `(value, weight)` pairs: the smallest value
/// whose cumulative weight reaches `q` of the total.
pub fn weighted_percentile<T: Copy + PartialOrd>(samples: &[(T, f64)], q: f64) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::Data("percentile of empty sample".into()));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::config("q", "percentile must lie in (0, 1]"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable samples"));
    let total: f64 = sorted.iter().map(|s| s.1).sum();
    let target = q * total;
    let tolerance = 1e-9 * total;
    let mut acc = 0.0;
    for &(v, w) in &sorted {
        acc += w;
        if acc >= target - tolerance {
            return Ok(v);
        }
    }
    Ok(sorted[sorted.len() - 1].0)
}

/// Reduces homogeneous traces to one row per scan count `n`.
///
/// Statistical traces are judged by `criterion` (default top-100), which must
/// be one of the criteria the traces were evaluated under unless it is a
/// top-k criterion, which is recomputed from the rank.
pub fn aggregate(
    traces: &[TraceRef<'_>],
    key: &ReportKey,
    weights: Option<&[f64]>,
    criterion: Option<SuccessCriterion>,
) -> Result<Vec<ReportRow>> {
    let Some(first) = traces.first() else {
        return Err(Error::Data("no traces to aggregate".into()));
    };
    let mode = first.mode();
    if traces.iter().any(|t| t.mode() != mode) {
        return Err(Error::Data("cannot aggregate greedy and statistical traces together".into()));
    }
    if let Some(w) = weights {
        if w.len() != traces.len() || w.iter().any(|&x| !(x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::config("weights", "need one non-negative weight per trace"));
        }
    }
    let criterion = match mode {
        Mode::Greedy => None,
        Mode::Statistical => Some(criterion.unwrap_or(SuccessCriterion::DEFAULT)),
    };

    // (n, value, success, weight)
    let mut points: Vec<(usize, u64, bool, f64)> = Vec::new();
    for (k, t) in traces.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[k]);
        match t {
            TraceRef::Greedy(g) => {
                points.extend(g.points.iter().map(|p| (p.n, p.remaining, p.recall, w)));
            }
            TraceRef::Statistical(s) => {
                let c = criterion.expect("statistical criterion");
                let slot = s.criteria.iter().position(|&x| x == c);
                for p in &s.points {
                    let ok = match (slot, c) {
                        (Some(i), _) => p.recall_under[i],
                        (None, SuccessCriterion::TopK(k)) => p.rank <= k,
                        (None, _) => {
                            return Err(Error::Data(format!("traces were not evaluated under {c}")))
                        }
                    };
                    points.push((p.n, p.rank, ok, w));
                }
            }
        }
    }
    points.sort_by_key(|p| p.0);

    let mut rows = Vec::new();
    for chunk in points.chunk_by(|a, b| a.0 == b.0) {
        let values: Vec<(u64, f64)> = chunk.iter().map(|p| (p.1, p.3)).collect();
        let total: f64 = chunk.iter().map(|p| p.3).sum();
        let hits: f64 = chunk.iter().filter(|p| p.2).fold(0.0, |acc, p| acc + p.3);
        rows.push(ReportRow {
            game_label: key.game_label.clone(),
            encoding: key.encoding.clone(),
            logic: key.logic.clone(),
            mode,
            n: chunk[0].0,
            samples: chunk.len(),
            p25: weighted_percentile(&values, 0.25)?,
            p50: weighted_percentile(&values, 0.50)?,
            p75: weighted_percentile(&values, 0.75)?,
            mean_success_rate: if total > 0.0 { hits / total } else { 0.0 },
            criterion: criterion.map(|c| c.to_string()),
        });
    }
    Ok(rows)
}
