//! Run configuration: defaults, `key = value` files, environment and flags.
//!
//! Precedence, lowest first: built-in defaults, the `--config` file, the
//! `NCLAURENT_SEED` environment variable (seed only), explicit flags.

use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use nclaurent::blockring::validate_h;
use nclaurent::{Budget, Coeff, HSpec, Side};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SEED_ENV: &str = "NCLAURENT_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Laurent,
    Commutator,
    Inverse,
    Abelian,
    Recurrence,
    Division,
    Pit,
    Positivity,
    Toric,
    Charts,
}

impl Check {
    pub const ALL: [Check; 10] = [
        Check::Laurent,
        Check::Commutator,
        Check::Inverse,
        Check::Abelian,
        Check::Recurrence,
        Check::Division,
        Check::Pit,
        Check::Positivity,
        Check::Toric,
        Check::Charts,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Laurent => "laurent",
            Check::Commutator => "commutator",
            Check::Inverse => "inverse",
            Check::Abelian => "abelian",
            Check::Recurrence => "recurrence",
            Check::Division => "division",
            Check::Pit => "pit",
            Check::Positivity => "positivity",
            Check::Toric => "toric",
            Check::Charts => "charts",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TargetSel {
    X,
    Y,
    Both,
}

impl TargetSel {
    pub fn sides(self) -> Vec<Side> {
        match self {
            TargetSel::X => vec![Side::X],
            TargetSel::Y => vec![Side::Y],
            TargetSel::Both => vec![Side::X, Side::Y],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(rename = "H")]
    pub h: Vec<Coeff>,
    pub allow_nonreversible: bool,
    pub k_min: i64,
    pub k_max: i64,
    pub target: TargetSel,
    pub checks: Vec<Check>,
    pub format: Format,
    pub seed: u64,
    pub max_abs_k: u32,
    pub max_terms: usize,
    pub max_seconds: Option<u64>,
    /// Division is attempted only for `|k|` up to this bound.
    pub division_max_k: i64,
    pub division_rounds: u32,
    /// Matrix evaluation is run only for `|k|` up to this bound.
    pub pit_max_k: i64,
    pub trials: u32,
    pub dims: Vec<usize>,
    pub prime: u64,
    /// Degree for the lattice checks; defaults to `deg H`.
    pub n: Option<i64>,
    pub i: i64,
    pub timings: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            h: vec![Coeff::ONE, Coeff::ZERO, Coeff::ONE],
            allow_nonreversible: false,
            k_min: -6,
            k_max: 6,
            target: TargetSel::Both,
            checks: Check::ALL.to_vec(),
            format: Format::Json,
            seed: 0,
            max_abs_k: Budget::default().max_abs_k,
            max_terms: Budget::default().max_terms,
            max_seconds: None,
            division_max_k: 4,
            division_rounds: 2,
            pit_max_k: 4,
            trials: 20,
            dims: vec![2, 3],
            prime: nclaurent::pitoracle::DEFAULT_PRIME,
            n: None,
            i: 1,
            timings: false,
            out: None,
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',').map(|p| p.trim().parse::<T>().map_err(|e| format!("{p:?}: {e}"))).collect()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("expected a boolean, got {s:?}")),
    }
}

fn parse_enum<T: ValueEnum>(s: &str) -> Result<T, String> {
    T::from_str(s, true)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Set one option by its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let num = |v: &str| v.parse::<i64>().map_err(|e| format!("{key}: {e}"));
        match key.trim() {
            "H" => self.h = parse_list(v)?,
            "allow_nonreversible" => self.allow_nonreversible = parse_bool(v)?,
            "k" => {
                self.k_min = num(v)?;
                self.k_max = self.k_min;
            }
            "k_min" => self.k_min = num(v)?,
            "k_max" => self.k_max = num(v)?,
            "target" => self.target = parse_enum(v)?,
            "checks" => self.checks = v.split(',').map(|c| parse_enum(c.trim())).collect::<Result<_, _>>()?,
            "format" => self.format = parse_enum(v)?,
            "seed" => self.seed = v.parse().map_err(|e| format!("seed: {e}"))?,
            "max_abs_k" => self.max_abs_k = v.parse().map_err(|e| format!("{key}: {e}"))?,
            "max_terms" => self.max_terms = v.parse().map_err(|e| format!("{key}: {e}"))?,
            "max_seconds" => {
                self.max_seconds = if v == "none" { None } else { Some(v.parse().map_err(|e| format!("{key}: {e}"))?) }
            }
            "division_max_k" => self.division_max_k = num(v)?,
            "division_rounds" => self.division_rounds = v.parse().map_err(|e| format!("{key}: {e}"))?,
            "pit_max_k" => self.pit_max_k = num(v)?,
            "trials" => self.trials = v.parse().map_err(|e| format!("{key}: {e}"))?,
            "dims" => self.dims = parse_list(v)?,
            "prime" => self.prime = v.parse().map_err(|e| format!("{key}: {e}"))?,
            "n" => self.n = if v == "none" { None } else { Some(num(v)?) },
            "i" => self.i = num(v)?,
            "timings" => self.timings = parse_bool(v)?,
            "out" => self.out = if v == "none" { None } else { Some(PathBuf::from(v)) },
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    /// Apply a `key = value` document; `#` starts a comment.
    pub fn apply_kv(&mut self, text: &str) -> Result<(), String> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            self.set(k, v).map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(())
    }

    /// Render as a `key = value` document that [`apply_kv`](Self::apply_kv) reads back.
    pub fn to_kv(&self) -> String {
        let opt = |o: Option<String>| o.unwrap_or_else(|| "none".into());
        let en = |v: serde_json::Value| v.as_str().unwrap().to_string();
        let lines = [
            ("H", join(&self.h)),
            ("allow_nonreversible", self.allow_nonreversible.to_string()),
            ("k_min", self.k_min.to_string()),
            ("k_max", self.k_max.to_string()),
            ("target", en(serde_json::to_value(self.target).unwrap())),
            ("checks", self.checks.iter().map(|c| c.name()).collect::<Vec<_>>().join(",")),
            ("format", en(serde_json::to_value(self.format).unwrap())),
            ("seed", self.seed.to_string()),
            ("max_abs_k", self.max_abs_k.to_string()),
            ("max_terms", self.max_terms.to_string()),
            ("max_seconds", opt(self.max_seconds.map(|s| s.to_string()))),
            ("division_max_k", self.division_max_k.to_string()),
            ("division_rounds", self.division_rounds.to_string()),
            ("pit_max_k", self.pit_max_k.to_string()),
            ("trials", self.trials.to_string()),
            ("dims", join(&self.dims)),
            ("prime", self.prime.to_string()),
            ("n", opt(self.n.map(|n| n.to_string()))),
            ("i", self.i.to_string()),
            ("timings", self.timings.to_string()),
            ("out", opt(self.out.as_ref().map(|p| p.display().to_string()))),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn hspec(&self) -> Result<HSpec, CliError> {
        validate_h(&self.h, self.allow_nonreversible).map_err(|e| CliError::Usage(format!("invalid H: {e}")))
    }

    pub fn budget(&self) -> Budget {
        Budget {
            max_abs_k: self.max_abs_k,
            max_terms: self.max_terms,
            max_wall: self.max_seconds.map(std::time::Duration::from_secs),
        }
    }

    pub fn k_range(&self) -> Result<std::ops::RangeInclusive<i64>, CliError> {
        if self.k_min > self.k_max {
            return Err(CliError::Usage(format!("k_min = {} exceeds k_max = {}", self.k_min, self.k_max)));
        }
        Ok(self.k_min..=self.k_max)
    }

    /// Checks in canonical order without duplicates.
    pub fn enabled_checks(&self) -> Vec<Check> {
        let mut c = self.checks.clone();
        c.sort();
        c.dedup();
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.apply_kv("H = 1,1,1\nk_min=-2 # comment\nk_max = 3\nchecks = pit,commutator\nout = /tmp/x\nn = 3\n")
            .unwrap();
        assert_eq!(cfg.h, vec![Coeff::ONE; 3]);
        assert_eq!((cfg.k_min, cfg.k_max), (-2, 3));
        assert_eq!(cfg.enabled_checks(), vec![Check::Commutator, Check::Pit]);
        let mut back = RunConfig::default();
        back.apply_kv(&cfg.to_kv()).unwrap();
        assert_eq!(back, cfg);
        let mut d = RunConfig::default();
        d.apply_kv(&RunConfig::default().to_kv()).unwrap();
        assert_eq!(d, RunConfig::default());
    }

    #[test]
    fn json_round_trip() {
        let cfg = RunConfig { seed: 99, max_seconds: Some(5), ..RunConfig::default() };
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), cfg);
    }

    #[test]
    fn bad_keys_are_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.apply_kv("colour = blue").is_err());
        assert!(cfg.apply_kv("k_min").is_err());
        assert!(cfg.apply_kv("checks = laurent,bogus").is_err());
    }
}
