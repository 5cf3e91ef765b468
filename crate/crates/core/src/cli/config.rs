use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::aggregation::Mode;
use crate::error::{Error, Result};
use crate::gamesim::SimConfig;
use crate::pruning::{PruningLogic, SuccessCriterion};
use crate::selection::SelectionPolicy;

/// Reads a JSON file into `T`; schema violations become config errors
/// naming the offending field path.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_json(&text)
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        Error::config(if field == "." { "<root>".to_string() } else { field }, e.into_inner().to_string())
    })
}

/// Inclusive range of scan counts, written `a..b` (or a single `n`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LengthRange {
    pub first: usize,
    pub last: usize,
}

impl LengthRange {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.first..=self.last
    }
}

impl FromStr for LengthRange {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("n", format!("expected `a..b` with 1 <= a <= b, got `{s}`"));
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
            None => (s.trim(), s.trim()),
        };
        let first: usize = a.parse().map_err(|_| bad())?;
        let last: usize = b.parse().map_err(|_| bad())?;
        if first == 0 || first > last {
            return Err(bad());
        }
        Ok(LengthRange { first, last })
    }
}

impl fmt::Display for LengthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

impl Serialize for LengthRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LengthRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ArchiveSource {
    /// Simulated on the fly.
    Sim(SimConfig),
    /// An archive directory written by `generate`.
    Path(PathBuf),
}

fn default_cap() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub logic: PruningLogic,
    pub mode: Mode,
    pub policy: SelectionPolicy,
    pub lengths: LengthRange,
    #[serde(default = "default_cap")]
    pub cap: usize,
    /// Statistical success criteria; top-100 when empty.
    #[serde(default)]
    pub criteria: Vec<SuccessCriterion>,
}

impl AttackSpec {
    pub fn validate(&self, field: &str) -> Result<()> {
        if self.logic.requires_incremental() && !self.policy.is_incremental() {
            return Err(Error::config(
                format!("{field}.policy"),
                format!("{} requires incremental selection", self.logic),
            ));
        }
        self.policy.validate()?;
        if self.cap == 0 {
            return Err(Error::config(format!("{field}.cap"), "must be positive"));
        }
        for c in &self.criteria {
            c.validate()?;
        }
        Ok(())
    }

    pub fn effective_criteria(&self) -> Vec<SuccessCriterion> {
        if self.criteria.is_empty() {
            vec![SuccessCriterion::DEFAULT]
        } else {
            self.criteria.clone()
        }
    }
}

fn default_parallelism() -> usize {
    1
}

fn default_formats() -> String {
    "csv,json,svg".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub archives: Vec<ArchiveSource>,
    pub attacks: Vec<AttackSpec>,
    pub seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Where reports go unless overridden on the command line.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: String,
    /// Also write every trace as JSON lines.
    #[serde(default)]
    pub write_traces: bool,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.archives.is_empty() {
            return Err(Error::config("archives", "at least one archive is required"));
        }
        if self.attacks.is_empty() {
            return Err(Error::config("attacks", "at least one attack is required"));
        }
        if self.parallelism == 0 {
            return Err(Error::config("parallelism", "must be positive"));
        }
        for (i, a) in self.attacks.iter().enumerate() {
            a.validate(&format!("attacks[{i}]"))?;
        }
        Ok(())
    }
}

/// Worker count: `LOCSIM_THREADS` wins over the configured value.
pub fn thread_count(configured: usize) -> Result<usize> {
    match std::env::var("LOCSIM_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::config("LOCSIM_THREADS", format!("expected a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(configured.max(1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_ranges() {
        assert_eq!("1..8".parse::<LengthRange>().unwrap(), LengthRange { first: 1, last: 8 });
        assert_eq!("3".parse::<LengthRange>().unwrap(), LengthRange { first: 3, last: 3 });
        assert_eq!("2..=4".parse::<LengthRange>().unwrap(), LengthRange { first: 2, last: 4 });
        assert!("0..2".parse::<LengthRange>().is_err());
        assert!("5..2".parse::<LengthRange>().is_err());
    }

    #[test]
    fn incremental_logics_need_incremental_policy() {
        let spec: AttackSpec = parse_json(
            r#"{"logic":{"logic":"add_xor"},"mode":"greedy","policy":{"kind":"fully_random"},"lengths":"1..3"}"#,
        )
        .unwrap();
        let err = spec.validate("attacks[0]").unwrap_err();
        assert!(err.to_string().contains("requires incremental selection"));
        assert!(err.is_config());
    }

    #[test]
    fn schema_errors_name_the_path() {
        let err = parse_json::<AttackSpec>(
            r#"{"logic":{"logic":"base"},"mode":"greedy","policy":{"kind":"rapid"},"lengths":"1..3"}"#,
        )
        .unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "policy"),
            other => panic!("{other}"),
        }
    }
}
