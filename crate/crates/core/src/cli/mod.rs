//! Command implementations behind the `locsim` binary.
//!
//! Work is split into cells `(archive, attack, n)`. Each cell derives its own
//! seed from the campaign seed and its coordinates, so results do not depend
//! on scheduling or on the order of the matrix.

mod config;
mod trace;

pub use config::{
    load_json, parse_json, thread_count, ArchiveSource, AttackSpec, CampaignConfig, LengthRange,
};
pub use trace::{read_traces, write_traces, TraceRecord};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::aggregation::{aggregate, emit_report, Format, Mode, ReportKey, ReportRow, TraceRef};
use crate::archive::{read_archive, write_archive};
use crate::error::{Error, Result};
use crate::gamesim::{simulate, SimConfig};
use crate::model::DumpSequence;
use crate::pruning::{greedy_attack_batch, statistical_attack_batch, PruningLogic, SuccessCriterion};
use crate::selection::{enumerate_indices, SelectionPolicy};

pub const TRACES_FILE: &str = "traces.jsonl";
pub const TIMING_FILE: &str = "timing.log";

/// A dump sequence with the label used in reports.
#[derive(Clone, Debug)]
pub struct LoadedArchive {
    pub label: String,
    pub seq: DumpSequence,
}

impl LoadedArchive {
    pub fn new(seq: DumpSequence) -> Self {
        LoadedArchive { label: format!("{}-{}", seq.game_label, encoding_name(&seq)), seq }
    }
}

fn encoding_name(seq: &DumpSequence) -> &'static str {
    seq.ground_truth.encoding.kind().as_str()
}

pub fn load_archive(source: &ArchiveSource) -> Result<LoadedArchive> {
    let seq = match source {
        ArchiveSource::Sim(cfg) => simulate(cfg)?,
        ArchiveSource::Path(p) => read_archive(p)?,
    };
    Ok(LoadedArchive::new(seq))
}

/// Seed of one campaign cell.
pub fn cell_seed(seed: u64, label: &str, logic: PruningLogic, policy: SelectionPolicy, n: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for part in [label, &logic.to_string(), &policy.to_string()] {
        h.update(part.as_bytes());
        h.update([0]);
    }
    h.update((n as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Clone, Copy, Debug)]
pub struct Cell<'a> {
    pub archive: &'a LoadedArchive,
    pub attack: &'a AttackSpec,
    pub n: usize,
}

impl Cell<'_> {
    pub fn describe(&self) -> String {
        format!(
            "{} {} {} {} n={}",
            self.archive.label, self.attack.logic, self.attack.mode, self.attack.policy, self.n
        )
    }
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub records: Vec<TraceRecord>,
    /// Report rows for this cell's `n` (one per criterion in statistical mode).
    pub rows: Vec<ReportRow>,
    pub elapsed: Duration,
}

pub fn run_cell(cell: Cell<'_>, campaign_seed: u64) -> Result<CellResult> {
    let start = Instant::now();
    let Cell { archive, attack, n } = cell;
    let seq = &archive.seq;
    let seed = cell_seed(campaign_seed, &archive.label, attack.logic, attack.policy, n);
    let selections = enumerate_indices(seq, attack.policy, n, attack.cap, seed)?;
    let key = ReportKey {
        game_label: seq.game_label.clone(),
        encoding: encoding_name(seq).to_string(),
        logic: attack.logic.to_string(),
    };
    let record = |selection: &Vec<usize>| TraceRecord {
        archive: archive.label.clone(),
        game_label: key.game_label.clone(),
        encoding: key.encoding.clone(),
        logic: key.logic.clone(),
        mode: attack.mode,
        policy: attack.policy,
        n,
        selection: selection.clone(),
        greedy: None,
        statistical: None,
    };
    let mut records: Vec<TraceRecord> = selections.iter().map(record).collect();
    let mut rows = Vec::new();
    if !selections.is_empty() {
        match attack.mode {
            Mode::Greedy => {
                let traces = greedy_attack_batch(seq, attack.logic, &selections)?;
                let refs: Vec<TraceRef> = traces.iter().map(TraceRef::Greedy).collect();
                rows.extend(aggregate(&refs, &key, None, None)?.into_iter().filter(|r| r.n == n));
                for (r, t) in records.iter_mut().zip(traces) {
                    r.greedy = Some(t);
                }
            }
            Mode::Statistical => {
                let criteria = attack.effective_criteria();
                let traces = statistical_attack_batch(seq, attack.logic, &selections, &criteria)?;
                let refs: Vec<TraceRef> = traces.iter().map(TraceRef::Statistical).collect();
                for &c in &criteria {
                    rows.extend(aggregate(&refs, &key, None, Some(c))?.into_iter().filter(|r| r.n == n));
                }
                for (r, t) in records.iter_mut().zip(traces) {
                    r.statistical = Some(t);
                }
            }
        }
    }
    Ok(CellResult { records, rows, elapsed: start.elapsed() })
}

/// Runs `cells` on `threads` workers; results come back in cell order.
pub fn run_cells(cells: &[Cell<'_>], campaign_seed: u64, threads: usize) -> Result<Vec<CellResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("parallelism", e.to_string()))?;
    pool.install(|| cells.par_iter().map(|&c| run_cell(c, campaign_seed)).collect())
}

fn write_timing(path: &Path, cells: &[Cell<'_>], results: &[CellResult]) -> Result<()> {
    let mut text = String::from("# cell\tselections\telapsed_ms\n");
    for (c, r) in cells.iter().zip(results) {
        let _ = writeln!(text, "{}\t{}\t{:.3}", c.describe(), r.records.len(), r.elapsed.as_secs_f64() * 1e3);
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug)]
pub struct CampaignOutcome {
    pub rows: Vec<ReportRow>,
    /// Cells without a single conforming subsequence.
    pub empty_cells: Vec<String>,
    pub files: Vec<PathBuf>,
}

pub fn run_campaign(cfg: &CampaignConfig, out_dir: &Path, threads: usize) -> Result<CampaignOutcome> {
    cfg.validate()?;
    let formats = Format::parse_list(&cfg.formats)?;
    let archives: Vec<LoadedArchive> = cfg.archives.iter().map(load_archive).collect::<Result<_>>()?;
    let mut labels: Vec<&str> = archives.iter().map(|a| a.label.as_str()).collect();
    labels.sort_unstable();
    if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::config("archives", format!("duplicate archive label `{}`", w[0])));
    }

    let mut cells = Vec::new();
    for archive in &archives {
        for attack in &cfg.attacks {
            for n in attack.lengths.iter() {
                cells.push(Cell { archive, attack, n });
            }
        }
    }
    let results = run_cells(&cells, cfg.seed, threads)?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut rows = Vec::new();
    let mut empty_cells = Vec::new();
    for (c, r) in cells.iter().zip(&results) {
        if r.records.is_empty() {
            empty_cells.push(c.describe());
        }
        rows.extend(r.rows.iter().cloned());
    }
    let mut files = Vec::new();
    if !rows.is_empty() {
        files = emit_report(&rows, &formats, out_dir)?;
    }
    if cfg.write_traces {
        let p = out_dir.join(TRACES_FILE);
        write_traces(&p, results.iter().flat_map(|r| r.records.iter()))?;
        files.push(p);
    }
    let timing = out_dir.join(TIMING_FILE);
    write_timing(&timing, &cells, &results)?;
    files.push(timing);
    Ok(CampaignOutcome { rows, empty_cells, files })
}

pub fn cmd_campaign(config_path: &Path, out_dir: Option<&Path>) -> Result<CampaignOutcome> {
    let cfg: CampaignConfig = load_json(config_path)?;
    let out = match (out_dir, &cfg.out_dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => o.clone(),
        (None, None) => return Err(Error::config("out_dir", "no output directory given")),
    };
    let threads = thread_count(cfg.parallelism)?;
    run_campaign(&cfg, &out, threads)
}

/// Simulates the configured game and writes the archive. Returns a summary.
pub fn cmd_generate(config_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<String> {
    let mut cfg: SimConfig = load_json(config_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let seq = simulate(&cfg)?;
    write_archive(&seq, out_dir)?;
    Ok(summary(&seq))
}

pub fn summary(seq: &DumpSequence) -> String {
    let gt = &seq.ground_truth;
    let values: Vec<u32> = seq.values().collect();
    let mut s = String::new();
    let _ = writeln!(s, "game_label: {}", seq.game_label);
    let _ = writeln!(s, "word_count: {}", seq.word_count);
    let _ = writeln!(s, "dumps: {}", seq.len());
    if let (Some(first), Some(last)) = (values.first(), values.last()) {
        let _ = writeln!(s, "values: {first} -> {last}");
    }
    let _ = writeln!(s, "ground truth: {} at {:?}", gt.encoding.kind(), gt.locations);
    for d in &gt.distractors {
        let _ = writeln!(s, "distractor: {} at {}", d.role, d.index);
    }
    s
}

#[derive(Clone, Debug)]
pub struct AttackArgs {
    pub archive: PathBuf,
    pub logic: PruningLogic,
    pub mode: Mode,
    pub policy: SelectionPolicy,
    pub lengths: LengthRange,
    pub cap: usize,
    pub seed: u64,
    pub criteria: Vec<SuccessCriterion>,
    pub out_dir: PathBuf,
    pub threads: usize,
}

/// Reads a policy from inline JSON or from a file.
pub fn parse_policy(arg: &str) -> Result<SelectionPolicy> {
    let policy: SelectionPolicy =
        if arg.trim_start().starts_with('{') { parse_json(arg)? } else { load_json(Path::new(arg))? };
    policy.validate()?;
    Ok(policy)
}

pub fn parse_logic(arg: &str) -> Result<PruningLogic> {
    PruningLogic::parse(arg).ok_or_else(|| Error::config("logic", format!("unknown logic `{arg}`")))
}

/// Parses `top_k=100,threshold=0.9,score_drop=0.2`.
pub fn parse_criteria(arg: &str) -> Result<Vec<SuccessCriterion>> {
    arg.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let bad = || Error::config("criteria", format!("cannot parse criterion `{s}`"));
            let (name, value) = s.split_once('=').ok_or_else(bad)?;
            let c = match name {
                "threshold" => SuccessCriterion::Threshold(value.parse().map_err(|_| bad())?),
                "top_k" => SuccessCriterion::TopK(value.parse().map_err(|_| bad())?),
                "score_drop" => SuccessCriterion::ScoreDrop(value.parse().map_err(|_| bad())?),
                _ => return Err(bad()),
            };
            c.validate()?;
            Ok(c)
        })
        .collect()
}

/// Runs one attack over a range of scan counts and writes its traces.
/// Returns the number of trace records.
pub fn cmd_attack(args: &AttackArgs) -> Result<usize> {
    let spec = AttackSpec {
        logic: args.logic,
        mode: args.mode,
        policy: args.policy,
        lengths: args.lengths,
        cap: args.cap,
        criteria: args.criteria.clone(),
    };
    spec.validate("attack")?;
    let archive = LoadedArchive::new(read_archive(&args.archive)?);
    let cells: Vec<Cell> = args.lengths.iter().map(|n| Cell { archive: &archive, attack: &spec, n }).collect();
    let results = run_cells(&cells, args.seed, args.threads)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let records: Vec<&TraceRecord> = results.iter().flat_map(|r| r.records.iter()).collect();
    write_traces(&args.out_dir.join(TRACES_FILE), records.iter().copied())?;
    write_timing(&args.out_dir.join(TIMING_FILE), &cells, &results)?;
    Ok(records.len())
}

/// Aggregates every `*.jsonl` trace file under `traces_dir`.
pub fn cmd_report(traces_dir: &Path, formats: &[Format], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(traces_dir)
        .map_err(|e| Error::io(traces_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    let mut records = Vec::new();
    for f in &files {
        records.extend(read_traces(f)?);
    }
    let rows = report_rows(&records)?;
    emit_report(&rows, formats, out_dir)
}

/// Rows of a report over trace records: one aggregation per cell, keeping
/// the row whose `n` is the cell's selection length.
pub fn report_rows(records: &[TraceRecord]) -> Result<Vec<ReportRow>> {
    type CellKey = (String, String, String, String, Mode, String, usize);
    let mut cells: BTreeMap<CellKey, Vec<&TraceRecord>> = BTreeMap::new();
    for r in records {
        let key = (
            r.archive.clone(),
            r.game_label.clone(),
            r.encoding.clone(),
            r.logic.clone(),
            r.mode,
            r.policy.to_string(),
            r.n,
        );
        cells.entry(key).or_default().push(r);
    }
    let mut rows = Vec::new();
    for ((_, game_label, encoding, logic, mode, _, n), recs) in cells {
        let key = ReportKey { game_label, encoding, logic };
        let refs: Vec<TraceRef> = recs
            .iter()
            .map(|r| match (mode, &r.greedy, &r.statistical) {
                (Mode::Greedy, Some(g), _) => Ok(TraceRef::Greedy(g)),
                (Mode::Statistical, _, Some(s)) => Ok(TraceRef::Statistical(s)),
                _ => Err(Error::Data(format!("trace record for {} lacks its {mode} trace", r.archive))),
            })
            .collect::<Result<_>>()?;
        let criteria: Vec<Option<SuccessCriterion>> = match refs.first() {
            Some(TraceRef::Statistical(s)) if !s.criteria.is_empty() => {
                s.criteria.iter().copied().map(Some).collect()
            }
            _ => vec![None],
        };
        for c in criteria {
            rows.extend(aggregate(&refs, &key, None, c)?.into_iter().filter(|r| r.n == n));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seeds_depend_on_every_coordinate() {
        let base = cell_seed(1, "a", PruningLogic::Base, SelectionPolicy::Binned, 2);
        assert_eq!(base, cell_seed(1, "a", PruningLogic::Base, SelectionPolicy::Binned, 2));
        assert_ne!(base, cell_seed(2, "a", PruningLogic::Base, SelectionPolicy::Binned, 2));
        assert_ne!(base, cell_seed(1, "b", PruningLogic::Base, SelectionPolicy::Binned, 2));
        assert_ne!(base, cell_seed(1, "a", PruningLogic::Xor, SelectionPolicy::Binned, 2));
        assert_ne!(base, cell_seed(1, "a", PruningLogic::Base, SelectionPolicy::FullyRandom, 2));
        assert_ne!(base, cell_seed(1, "a", PruningLogic::Base, SelectionPolicy::Binned, 3));
    }

    #[test]
    fn criteria_lists() {
        assert_eq!(
            parse_criteria("top_k=100, threshold=0.9,score_drop=0.25").unwrap(),
            vec![
                SuccessCriterion::TopK(100),
                SuccessCriterion::Threshold(0.9),
                SuccessCriterion::ScoreDrop(0.25)
            ]
        );
        assert!(parse_criteria("top_k=0").is_err());
        assert!(parse_criteria("median").is_err());
    }

    #[test]
    fn inline_policy() {
        assert_eq!(parse_policy(r#"{"kind":"binned"}"#).unwrap(), SelectionPolicy::Binned);
        assert!(parse_policy(r#"{"kind":"rapid","t_max_ms":0}"#).is_err());
    }
}
