//! Attacker scan subsequences.
//!
//! Every policy is prefix-closed and decomposes into a counting recurrence,
//! so conforming subsequences are counted exactly and addressed by rank.
//! Exhaustive mode unranks every rank; sampling draws distinct ranks
//! uniformly (Floyd's algorithm) and unranks those.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DumpSequence, SelectedSequence};

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelectionPolicy {
    /// No two scans share a resource amount.
    Binned,
    /// Resource moves by exactly one between consecutive scans, in one
    /// direction. With `mixed_direction` each step may go either way (and
    /// amounts may then repeat).
    Incremental {
        #[serde(default, skip_serializing_if = "is_false")]
        mixed_direction: bool,
    },
    FullyRandom,
    /// Consecutive scans at most `t_max_ms` apart.
    Rapid { t_max_ms: u64 },
}

impl SelectionPolicy {
    pub const INCREMENTAL: SelectionPolicy = SelectionPolicy::Incremental { mixed_direction: false };

    pub fn validate(&self) -> Result<()> {
        match self {
            SelectionPolicy::Rapid { t_max_ms: 0 } => {
                Err(Error::config("policy.t_max_ms", "must be positive"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_incremental(&self) -> bool {
        matches!(self, SelectionPolicy::Incremental { .. })
    }
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionPolicy::Binned => f.write_str("binned"),
            SelectionPolicy::Incremental { mixed_direction: false } => f.write_str("incremental"),
            SelectionPolicy::Incremental { mixed_direction: true } => f.write_str("incremental_mixed"),
            SelectionPolicy::FullyRandom => f.write_str("fully_random"),
            SelectionPolicy::Rapid { t_max_ms } => write!(f, "rapid_{t_max_ms}ms"),
        }
    }
}

fn value_at(seq: &DumpSequence, i: usize) -> i64 {
    seq.dumps[i].on_screen_value as i64
}

fn edge(seq: &DumpSequence, policy: SelectionPolicy, dir: i64, i: usize, j: usize) -> bool {
    match policy {
        SelectionPolicy::FullyRandom => true,
        SelectionPolicy::Rapid { t_max_ms } => {
            seq.dumps[j].timestamp_ms - seq.dumps[i].timestamp_ms <= t_max_ms
        }
        SelectionPolicy::Incremental { mixed_direction: true } => {
            (value_at(seq, j) - value_at(seq, i)).abs() == 1
        }
        SelectionPolicy::Incremental { mixed_direction: false } => {
            value_at(seq, j) - value_at(seq, i) == dir
        }
        SelectionPolicy::Binned => unreachable!("binned is not a chain policy"),
    }
}

/// Whether the dumps at `indices` form an admissible scan sequence.
pub fn conforms(policy: SelectionPolicy, seq: &DumpSequence, indices: &[usize]) -> bool {
    let values: Vec<i64> = indices.iter().map(|&i| value_at(seq, i)).collect();
    match policy {
        SelectionPolicy::Binned => {
            let mut v = values;
            v.sort_unstable();
            v.windows(2).all(|w| w[0] != w[1])
        }
        SelectionPolicy::Incremental { mixed_direction } => {
            let deltas: Vec<i64> = values.windows(2).map(|w| w[1] - w[0]).collect();
            if mixed_direction {
                deltas.iter().all(|d| d.abs() == 1)
            } else {
                deltas.iter().all(|&d| d == 1) || deltas.iter().all(|&d| d == -1)
            }
        }
        SelectionPolicy::FullyRandom => true,
        SelectionPolicy::Rapid { t_max_ms } => indices
            .windows(2)
            .all(|w| seq.dumps[w[1]].timestamp_ms - seq.dumps[w[0]].timestamp_ms <= t_max_ms),
    }
}

/// Ranked space of the conforming subsequences of one length.
enum Space {
    /// Chains over the dump DAG; one block per direction.
    Chains { blocks: Vec<ChainBlock>, n: usize },
    /// One dump from each of `n` distinct value groups.
    Binned { groups: Vec<Vec<usize>>, ways: Vec<Vec<u128>>, n: usize },
}

struct ChainBlock {
    dir: i64,
    /// `paths[len][i]`: conforming chains of length `len` starting at dump `i`.
    paths: Vec<Vec<u128>>,
    total: u128,
}

fn overflow() -> Error {
    Error::Data("too many conforming subsequences to count".into())
}

impl Space {
    fn build(seq: &DumpSequence, policy: SelectionPolicy, n: usize) -> Result<Space> {
        let len = seq.len();
        if let SelectionPolicy::Binned = policy {
            let mut by_value: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            for (i, d) in seq.dumps.iter().enumerate() {
                by_value.entry(d.on_screen_value).or_default().push(i);
            }
            let groups: Vec<Vec<usize>> = by_value.into_values().collect();
            // ways[g][k]: picks of k dumps from groups g.. with distinct groups
            let mut ways = vec![vec![0u128; n + 1]; groups.len() + 1];
            ways[groups.len()][0] = 1;
            for g in (0..groups.len()).rev() {
                ways[g][0] = 1;
                for k in 1..=n {
                    let take = (groups[g].len() as u128)
                        .checked_mul(ways[g + 1][k - 1])
                        .ok_or_else(overflow)?;
                    ways[g][k] = ways[g + 1][k].checked_add(take).ok_or_else(overflow)?;
                }
            }
            return Ok(Space::Binned { groups, ways, n });
        }

        let dirs: &[i64] = match policy {
            SelectionPolicy::Incremental { mixed_direction: false } if n > 1 => &[1, -1],
            _ => &[0],
        };
        let mut blocks = Vec::new();
        for &dir in dirs {
            let mut paths = vec![vec![0u128; len]; n + 1];
            paths[1] = vec![1; len];
            for l in 2..=n {
                for i in (0..len).rev() {
                    let mut total = 0u128;
                    for j in i + 1..len {
                        if paths[l - 1][j] != 0 && edge(seq, policy, dir, i, j) {
                            total = total.checked_add(paths[l - 1][j]).ok_or_else(overflow)?;
                        }
                    }
                    paths[l][i] = total;
                }
            }
            let mut total = 0u128;
            for &p in &paths[n] {
                total = total.checked_add(p).ok_or_else(overflow)?;
            }
            blocks.push(ChainBlock { dir, paths, total });
        }
        Ok(Space::Chains { blocks, n })
    }

    fn count(&self) -> Result<u128> {
        match self {
            Space::Chains { blocks, .. } => blocks
                .iter()
                .try_fold(0u128, |acc, b| acc.checked_add(b.total))
                .ok_or_else(overflow),
            Space::Binned { ways, n, .. } => Ok(ways[0][*n]),
        }
    }

    fn unrank(&self, seq: &DumpSequence, policy: SelectionPolicy, mut rank: u128) -> Vec<usize> {
        match self {
            Space::Chains { blocks, n } => {
                let block = blocks
                    .iter()
                    .find(|b| {
                        if rank < b.total {
                            true
                        } else {
                            rank -= b.total;
                            false
                        }
                    })
                    .expect("rank within count");
                let mut out = Vec::with_capacity(*n);
                let mut prev: Option<usize> = None;
                for l in (1..=*n).rev() {
                    let start = prev.map_or(0, |p| p + 1);
                    let mut chosen = None;
                    for j in start..seq.len() {
                        if let Some(p) = prev {
                            if !edge(seq, policy, block.dir, p, j) {
                                continue;
                            }
                        }
                        let c = block.paths[l][j];
                        if rank < c {
                            chosen = Some(j);
                            break;
                        }
                        rank -= c;
                    }
                    let j = chosen.expect("rank within block");
                    out.push(j);
                    prev = Some(j);
                }
                out
            }
            Space::Binned { groups, ways, n } => {
                let mut out = Vec::with_capacity(*n);
                let mut k = *n;
                for (g, group) in groups.iter().enumerate() {
                    if k == 0 {
                        break;
                    }
                    let skip = ways[g + 1][k];
                    if rank < skip {
                        continue;
                    }
                    rank -= skip;
                    let per_pick = ways[g + 1][k - 1];
                    out.push(group[(rank / per_pick) as usize]);
                    rank %= per_pick;
                    k -= 1;
                }
                out.sort_unstable();
                out
            }
        }
    }
}

/// Number of conforming subsequences of length `n`.
pub fn count_conforming(seq: &DumpSequence, policy: SelectionPolicy, n: usize) -> Result<u128> {
    if n == 0 || n > seq.len() {
        return Ok(0);
    }
    Space::build(seq, policy, n)?.count()
}

/// Index lists of the selected subsequences, sorted lexicographically.
///
/// All conforming subsequences when there are at most `cap`, otherwise `cap`
/// distinct ones drawn uniformly with `seed`.
pub fn enumerate_indices(
    seq: &DumpSequence,
    policy: SelectionPolicy,
    n: usize,
    cap: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    policy.validate()?;
    if cap == 0 {
        return Err(Error::config("cap", "must be positive"));
    }
    if n == 0 || n > seq.len() {
        return Ok(Vec::new());
    }
    let space = Space::build(seq, policy, n)?;
    let total = space.count()?;
    let ranks: Vec<u128> = if total <= cap as u128 {
        (0..total).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = HashSet::with_capacity(cap);
        for j in total - cap as u128..total {
            let r = rng.random_range(0..=j);
            if !picked.insert(r) {
                picked.insert(j);
            }
        }
        picked.into_iter().collect()
    };
    let mut out: Vec<Vec<usize>> = ranks.into_iter().map(|r| space.unrank(seq, policy, r)).collect();
    out.sort_unstable();
    Ok(out)
}

pub fn enumerate_subsequences<'a>(
    seq: &'a DumpSequence,
    policy: SelectionPolicy,
    n: usize,
    cap: usize,
    seed: u64,
) -> Result<Vec<SelectedSequence<'a>>> {
    enumerate_indices(seq, policy, n, cap, seed)?
        .into_iter()
        .map(|ix| SelectedSequence::new(seq, ix))
        .collect()
}
