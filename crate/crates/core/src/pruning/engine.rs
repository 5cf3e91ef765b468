use serde::{Deserialize, Serialize};

use super::{check, LocationState, PruningError, PruningLogic, SuccessCriterion};
use crate::model::{DumpSequence, SelectedSequence};
use crate::WordValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyPoint {
    pub n: usize,
    pub remaining: u64,
    /// Every ground-truth location is still a candidate.
    pub recall: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub points: Vec<GreedyPoint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatPoint {
    pub n: usize,
    /// 1-based rank of the best-ranked ground-truth location under
    /// (score descending, index ascending).
    pub rank: u64,
    pub strictly_better: u64,
    /// One flag per criterion of the owning trace.
    pub recall_under: Vec<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatTrace {
    pub criteria: Vec<SuccessCriterion>,
    pub points: Vec<StatPoint>,
}

fn validate(seq: &DumpSequence, logic: PruningLogic, indices: &[usize]) -> Result<(), PruningError> {
    if indices.is_empty() {
        return Err(PruningError::EmptySelection);
    }
    if logic.requires_incremental() {
        for w in indices.windows(2) {
            let (a, b) = (seq.dumps[w[0]].on_screen_value, seq.dumps[w[1]].on_screen_value);
            if a.abs_diff(b) != 1 {
                return Err(PruningError::NonUnitStride { logic, from: a as u64, to: b as u64 });
            }
        }
    }
    Ok(())
}

/// Greedy attack state: surviving candidates after the scans fed so far.
#[derive(Clone, Debug)]
pub struct GreedyRun<'a> {
    seq: &'a DumpSequence,
    logic: PruningLogic,
    /// `None` until the first check; then ascending word indices.
    candidates: Option<Vec<u32>>,
    /// Parallel to `candidates` for stateful logics.
    states: Vec<LocationState<WordValue>>,
    prev: Option<usize>,
    scans: usize,
}

impl<'a> GreedyRun<'a> {
    pub fn new(seq: &'a DumpSequence, logic: PruningLogic) -> Self {
        GreedyRun { seq, logic, candidates: None, states: Vec::new(), prev: None, scans: 0 }
    }

    /// Feeds dump `dump`. Stride preconditions are the caller's business.
    pub fn scan(&mut self, dump: usize) {
        let cur = &self.seq.dumps[dump];
        let a2 = cur.on_screen_value;
        let prev = self.prev.map(|p| &self.seq.dumps[p]);
        self.prev = Some(dump);
        self.scans += 1;
        if prev.is_none() && self.logic.is_pairwise() {
            return;
        }
        let logic = self.logic;
        let stateful = logic.has_state();
        let mut kept = Vec::new();
        let mut kept_states = Vec::new();
        let mut visit = |k: usize, i: usize| {
            let mut st = if stateful {
                self.states.get(k).copied().unwrap_or_else(LocationState::new)
            } else {
                LocationState::default()
            };
            let p = prev.map(|d| (d.on_screen_value, d.words[i]));
            if check(logic, &mut st, p, (a2, cur.words[i])) {
                kept.push(i as u32);
                if stateful {
                    kept_states.push(st);
                }
            }
        };
        match &self.candidates {
            Some(c) => c.iter().enumerate().for_each(|(k, &i)| visit(k, i as usize)),
            None => (0..self.seq.word_count).for_each(|i| visit(i, i)),
        }
        self.candidates = Some(kept);
        self.states = kept_states;
    }

    pub fn scans(&self) -> usize {
        self.scans
    }

    pub fn remaining(&self) -> usize {
        self.candidates.as_ref().map_or(self.seq.word_count, Vec::len)
    }

    pub fn contains(&self, location: usize) -> bool {
        match &self.candidates {
            None => location < self.seq.word_count,
            Some(c) => c.binary_search(&(location as u32)).is_ok(),
        }
    }

    pub fn candidates(&self) -> Vec<u32> {
        match &self.candidates {
            None => (0..self.seq.word_count as u32).collect(),
            Some(c) => c.clone(),
        }
    }

    pub fn recall(&self) -> bool {
        self.seq.ground_truth.locations.iter().all(|&l| self.contains(l))
    }

    pub fn point(&self) -> GreedyPoint {
        GreedyPoint { n: self.scans, remaining: self.remaining() as u64, recall: self.recall() }
    }
}

/// Statistical attack state: per-location conformance counts.
#[derive(Clone, Debug)]
pub struct StatRun<'a> {
    seq: &'a DumpSequence,
    logic: PruningLogic,
    counts: Vec<u32>,
    checks: u32,
    states: Vec<LocationState<WordValue>>,
    prev: Option<usize>,
    scans: usize,
}

impl<'a> StatRun<'a> {
    pub fn new(seq: &'a DumpSequence, logic: PruningLogic) -> Self {
        let states =
            if logic.has_state() { vec![LocationState::new(); seq.word_count] } else { Vec::new() };
        StatRun { seq, logic, counts: vec![0; seq.word_count], checks: 0, states, prev: None, scans: 0 }
    }

    pub fn scan(&mut self, dump: usize) {
        let cur = &self.seq.dumps[dump];
        let a2 = cur.on_screen_value;
        let prev = self.prev.map(|p| &self.seq.dumps[p]);
        self.prev = Some(dump);
        self.scans += 1;
        if prev.is_none() && self.logic.is_pairwise() {
            return;
        }
        self.checks += 1;
        let logic = self.logic;
        let a = prev.map(|d| d.on_screen_value);
        if logic.has_state() {
            for (i, (count, st)) in self.counts.iter_mut().zip(self.states.iter_mut()).enumerate() {
                let p = prev.map(|d| (a.unwrap(), d.words[i]));
                *count += check(logic, st, p, (a2, cur.words[i])) as u32;
            }
        } else {
            let mut st = LocationState::default();
            for (i, count) in self.counts.iter_mut().enumerate() {
                let p = prev.map(|d| (a.unwrap(), d.words[i]));
                *count += check(logic, &mut st, p, (a2, cur.words[i])) as u32;
            }
        }
    }

    pub fn scans(&self) -> usize {
        self.scans
    }

    /// Checks made per location so far.
    pub fn checks(&self) -> u32 {
        self.checks
    }

    /// Conforming checks per location.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn score(&self, location: usize) -> f64 {
        if self.checks == 0 {
            1.0
        } else {
            self.counts[location] as f64 / self.checks as f64
        }
    }

    /// Locations that conformed at every check.
    pub fn perfect(&self) -> Vec<u32> {
        (0..self.counts.len() as u32).filter(|&i| self.counts[i as usize] == self.checks).collect()
    }

    pub fn point(&self, criteria: &[SuccessCriterion]) -> StatPoint {
        let gt = &self.seq.ground_truth.locations;
        let mut hist = vec![0u64; self.checks as usize + 1];
        let mut ties_before = vec![0u64; gt.len()];
        for (i, &c) in self.counts.iter().enumerate() {
            hist[c as usize] += 1;
            for (t, &g) in ties_before.iter_mut().zip(gt) {
                if i < g && c == self.counts[g] {
                    *t += 1;
                }
            }
        }
        let (best, rank, strictly_better) = gt
            .iter()
            .zip(&ties_before)
            .map(|(&g, &t)| {
                let c = self.counts[g] as usize;
                let better: u64 = hist[c + 1..].iter().sum();
                (g, 1 + better + t, better)
            })
            .min_by_key(|&(_, rank, _)| rank)
            .expect("ground truth has locations");
        let score = self.score(best);
        let recall_under = criteria
            .iter()
            .map(|c| match *c {
                SuccessCriterion::Threshold(tau) => {
                    self.checks == 0 || self.counts[best] as f64 >= tau * self.checks as f64 - 1e-9
                }
                SuccessCriterion::TopK(k) => rank <= k,
                SuccessCriterion::ScoreDrop(delta) => {
                    let levels: Vec<f64> = (0..hist.len())
                        .rev()
                        .filter(|&c| hist[c] > 0)
                        .map(|c| if self.checks == 0 { 1.0 } else { c as f64 / self.checks as f64 })
                        .collect();
                    match levels.windows(2).find(|w| w[0] - w[1] > delta) {
                        Some(w) => score >= w[0],
                        None => true,
                    }
                }
            })
            .collect();
        StatPoint { n: self.scans, rank, strictly_better, recall_under }
    }
}

pub fn greedy_attack(sel: &SelectedSequence<'_>, logic: PruningLogic) -> Result<GreedyTrace, PruningError> {
    let seq = sel.source();
    validate(seq, logic, sel.indices())?;
    let mut run = GreedyRun::new(seq, logic);
    let points = sel
        .indices()
        .iter()
        .map(|&i| {
            run.scan(i);
            run.point()
        })
        .collect();
    Ok(GreedyTrace { points })
}

pub fn statistical_attack(
    sel: &SelectedSequence<'_>,
    logic: PruningLogic,
    criteria: &[SuccessCriterion],
) -> Result<StatTrace, PruningError> {
    let seq = sel.source();
    validate(seq, logic, sel.indices())?;
    let mut run = StatRun::new(seq, logic);
    let points = sel
        .indices()
        .iter()
        .map(|&i| {
            run.scan(i);
            run.point(criteria)
        })
        .collect();
    Ok(StatTrace { criteria: criteria.to_vec(), points })
}

/// Runs one attack per selection, sharing work between common prefixes.
/// Results are identical to attacking each selection separately and are
/// returned in input order.
fn batch<R: Clone, P: Clone>(
    seq: &DumpSequence,
    logic: PruningLogic,
    selections: &[Vec<usize>],
    fresh: impl Fn() -> R,
    scan: impl Fn(&mut R, usize),
    point: impl Fn(&R) -> P,
) -> Result<Vec<Vec<P>>, PruningError> {
    for s in selections {
        validate(seq, logic, s)?;
    }
    let mut order: Vec<usize> = (0..selections.len()).collect();
    order.sort_by(|&a, &b| selections[a].cmp(&selections[b]));
    let mut out = vec![Vec::new(); selections.len()];
    // stack[d] is the state after scanning the first d + 1 dumps of `path`
    let mut stack: Vec<(R, P)> = Vec::new();
    let mut path: &[usize] = &[];
    for k in order {
        let sel = &selections[k];
        let common = path.iter().zip(sel).take_while(|(a, b)| a == b).count();
        stack.truncate(common);
        for &dump in &sel[common..] {
            let mut run = stack.last().map_or_else(&fresh, |(r, _)| r.clone());
            scan(&mut run, dump);
            let p = point(&run);
            stack.push((run, p));
        }
        out[k] = stack.iter().take(sel.len()).map(|(_, p)| p.clone()).collect();
        path = sel;
    }
    Ok(out)
}

pub fn greedy_attack_batch(
    seq: &DumpSequence,
    logic: PruningLogic,
    selections: &[Vec<usize>],
) -> Result<Vec<GreedyTrace>, PruningError> {
    let traces = batch(seq, logic, selections, || GreedyRun::new(seq, logic), GreedyRun::scan, GreedyRun::point)?;
    Ok(traces.into_iter().map(|points| GreedyTrace { points }).collect())
}

pub fn statistical_attack_batch(
    seq: &DumpSequence,
    logic: PruningLogic,
    selections: &[Vec<usize>],
    criteria: &[SuccessCriterion],
) -> Result<Vec<StatTrace>, PruningError> {
    let traces = batch(
        seq,
        logic,
        selections,
        || StatRun::new(seq, logic),
        StatRun::scan,
        |r| r.point(criteria),
    )?;
    Ok(traces
        .into_iter()
        .map(|points| StatTrace { criteria: criteria.to_vec(), points })
        .collect())
}
