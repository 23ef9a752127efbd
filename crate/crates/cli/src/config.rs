//! Run configuration: a `key = value` file merged under command-line flags,
//! validated before any computation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use supersingular::gfq::is_prime;
use supersingular::weights::SerreWeight;

/// A violated precondition of the configuration; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

macro_rules! reject {
    ($($arg:tt)*) => {
        return Err($crate::config::ConfigError(format!($($arg)*)).into())
    };
}
pub(crate) use reject;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        <Format as ValueEnum>::from_str(s, true).map_err(|_| anyhow!("unknown format {s:?}, expected text, json or csv"))
    }
}

/// Flags shared by every command; each may also come from the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Residue characteristic.
    #[arg(long)]
    pub p: Option<u32>,
    /// Residue degree.
    #[arg(long)]
    pub f: Option<u32>,
    /// Ramification index.
    #[arg(long)]
    pub e: Option<u32>,
    /// Digits r_0,…,r_{f−1}, comma separated.
    #[arg(long)]
    pub r: Option<String>,
    /// Determinant twist.
    #[arg(long, allow_negative_numbers = true)]
    pub w: Option<i64>,
    /// Radius: enumeration radius, or the radius budget of a staged run.
    #[arg(long)]
    pub radius: Option<u32>,
    /// Number of string places to execute in a staged run.
    #[arg(long)]
    pub stages: Option<usize>,
    /// Comma-separated verification suites, or `all`.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the randomized suites.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub p: u32,
    pub f: u32,
    pub e: u32,
    pub r: Vec<u32>,
    pub w: i64,
    pub radius: Option<u32>,
    pub stages: Option<usize>,
    pub suite: Vec<String>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} f={} e={} r={:?} w={}", self.p, self.f, self.e, self.r, self.w)
    }
}

const KEYS: [&str; 11] = ["p", "f", "e", "r", "w", "radius", "stages", "suite", "format", "out", "seed"];

fn parse_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), no + 1))?;
        let k = k.trim().to_string();
        if !KEYS.contains(&k.as_str()) {
            bail!("{}:{}: unknown key {k:?}", path.display(), no + 1);
        }
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            bail!("{}:{}: duplicate key {k:?}", path.display(), no + 1);
        }
    }
    Ok(out)
}

fn from_file<T: FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: fmt::Display,
{
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|err| anyhow!("config key {key}: cannot parse {v:?}: {err}")))
        .transpose()
}

fn parse_digits(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|d| d.trim().parse::<u32>().map_err(|err| anyhow!("digit {d:?} in r: {err}")))
        .collect()
}

impl RunConfig {
    /// Merges flags over the config file. `p`, `f`, `e` and `r` must be given
    /// explicitly in one of the two.
    pub fn resolve(flags: &Flags) -> Result<RunConfig> {
        let file = match &flags.config {
            Some(path) => parse_file(path)?,
            None => BTreeMap::new(),
        };
        let need = |name: &str| anyhow!("missing required parameter {name} (flag --{name} or config key {name})");
        let p = flags.p.or(from_file(&file, "p")?).ok_or_else(|| need("p"))?;
        let f = flags.f.or(from_file(&file, "f")?).ok_or_else(|| need("f"))?;
        let e = flags.e.or(from_file(&file, "e")?).ok_or_else(|| need("e"))?;
        let r_text = flags.r.clone().or(file.get("r").cloned()).ok_or_else(|| need("r"))?;
        let format = match flags.format {
            Some(fm) => fm,
            None => from_file::<Format>(&file, "format")?.unwrap_or(Format::Text),
        };
        let suite_text = flags.suite.clone().or(file.get("suite").cloned()).unwrap_or_else(|| "all".into());
        let cfg = RunConfig {
            p,
            f,
            e,
            r: parse_digits(&r_text)?,
            w: flags.w.or(from_file(&file, "w")?).unwrap_or(0),
            radius: flags.radius.or(from_file(&file, "radius")?),
            stages: flags.stages.or(from_file(&file, "stages")?),
            suite: suite_text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            format,
            out: flags.out.clone().or(file.get("out").map(PathBuf::from)),
            seed: flags.seed.or(from_file(&file, "seed")?).unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !is_prime(self.p as u64) {
            reject!("p = {} is not a prime", self.p);
        }
        if self.f == 0 || self.e == 0 {
            reject!("residue degree and ramification index must be positive, got f={} e={}", self.f, self.e);
        }
        if (self.p as u64).checked_pow(self.f).is_none_or(|q| q > 1 << 20) {
            reject!("residue field of order {}^{} is too large", self.p, self.f);
        }
        if self.r.len() != self.f as usize {
            reject!("r has {} digits but f = {}", self.r.len(), self.f);
        }
        if let Some((j, &rj)) = self.r.iter().enumerate().find(|(_, &rj)| rj >= self.p) {
            reject!("digit r_{j} = {rj} is outside 0 <= r_j <= p-1");
        }
        Ok(())
    }

    pub fn weight(&self) -> Result<SerreWeight> {
        Ok(SerreWeight::new(self.p, self.r.clone(), self.w)?)
    }

    /// Genericity `2 < r_j < p − 3`, required by the staged construction.
    pub fn require_generic(&self) -> Result<()> {
        if let Some((j, &rj)) = self.r.iter().enumerate().find(|(_, &rj)| rj <= 2 || rj + 3 >= self.p) {
            reject!("genericity 2 < r_j < p-3 fails at r_{j} = {rj} for p = {}", self.p);
        }
        Ok(())
    }

    /// The ramified weight set and construction need f = 2 and 2e < min r_j.
    pub fn require_weight_set_regime(&self) -> Result<()> {
        if self.e == 1 {
            return Ok(());
        }
        if self.f != 2 {
            reject!("ramified weight sets are implemented for f = 2 only, got f = {}", self.f);
        }
        let min = self.r.iter().copied().min().unwrap_or(0);
        if 2 * self.e >= min {
            reject!("ramified weight set needs 2e < min r_j, got e = {} and min r_j = {min}", self.e);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(p: u32, f: u32, e: u32, r: &str) -> Flags {
        Flags { p: Some(p), f: Some(f), e: Some(e), r: Some(r.into()), ..Flags::default() }
    }

    #[test]
    fn flags_resolve() {
        let cfg = RunConfig::resolve(&flags(7, 2, 1, "3,3")).unwrap();
        assert_eq!(cfg.r, vec![3, 3]);
        assert_eq!(cfg.suite, vec!["all".to_string()]);
        assert_eq!(cfg.format, Format::Text);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RunConfig::resolve(&flags(8, 1, 1, "3")).is_err());
        assert!(RunConfig::resolve(&flags(7, 2, 1, "3")).is_err());
        assert!(RunConfig::resolve(&flags(7, 1, 1, "7")).is_err());
        let missing = Flags { p: Some(7), f: Some(1), r: Some("3".into()), ..Flags::default() };
        assert!(RunConfig::resolve(&missing).unwrap_err().to_string().contains("missing required parameter e"));
    }

    #[test]
    fn file_is_overridden_by_flags() {
        let dir = std::env::temp_dir().join(format!("supersingular-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "# example\np = 7\nf = 2\ne = 1\nr = 3, 3\nformat = json\nseed = 5\n").unwrap();
        let fl = Flags { config: Some(path.clone()), seed: Some(9), ..Flags::default() };
        let cfg = RunConfig::resolve(&fl).unwrap();
        assert_eq!((cfg.p, cfg.f, cfg.e, cfg.seed, cfg.format), (7, 2, 1, 9, Format::Json));
        std::fs::write(&path, "p = 7\nq = 3\n").unwrap();
        assert!(RunConfig::resolve(&Flags { config: Some(path), ..Flags::default() }).is_err());
    }
}
