//! Experiment configuration and its flat `key = value` text form.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::ScheduleConvention;

/// Which experiment a configuration drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Table1,
    Table2,
    FigQsDensity,
    FigAqsDensity,
    Concentration,
    Gapscan,
    Solve,
}

impl ExperimentKind {
    pub const ALL: [Self; 7] = [
        Self::Table1,
        Self::Table2,
        Self::FigQsDensity,
        Self::FigAqsDensity,
        Self::Concentration,
        Self::Gapscan,
        Self::Solve,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Table1 => "table1",
            Self::Table2 => "table2",
            Self::FigQsDensity => "fig_qs_density",
            Self::FigAqsDensity => "fig_aqs_density",
            Self::Concentration => "concentration",
            Self::Gapscan => "gapscan",
            Self::Solve => "solve",
        }
    }

    /// Stable numeric tag mixed into derived seeds.
    pub(crate) fn tag(self) -> u64 {
        Self::ALL.iter().position(|&k| k == self).expect("listed") as u64 + 1
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind {s:?}")))
    }
}

/// Clause count of a sweep cell: absolute, or proportional to n or n².
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MSpec {
    Absolute(usize),
    PerN(f64),
    PerN2(f64),
}

impl MSpec {
    /// Clause count at `n`, rounded to the nearest integer.
    pub fn resolve(self, n: usize) -> Result<usize> {
        let m = match self {
            Self::Absolute(m) => m,
            Self::PerN(c) => (c * n as f64).round() as usize,
            Self::PerN2(c) => (c * (n * n) as f64).round() as usize,
        };
        if m == 0 {
            return Err(Error::Config(format!("clause count {self} resolves to 0 at n = {n}")));
        }
        Ok(m)
    }

    /// The density coefficient, or the absolute count.
    pub fn coefficient(self) -> f64 {
        match self {
            Self::Absolute(m) => m as f64,
            Self::PerN(c) | Self::PerN2(c) => c,
        }
    }
}

impl fmt::Display for MSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Absolute(m) => write!(f, "{m}"),
            Self::PerN(c) => write!(f, "{c}n"),
            Self::PerN2(c) => write!(f, "{c}n^2"),
        }
    }
}

impl FromStr for MSpec {
    type Err = Error;

    /// `400`, `4.5n`, `2n^2` (also `2n2`), `n`, `n^2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Config(format!("cannot parse clause count {s:?}"));
        let coef = |c: &str| -> Result<f64> {
            if c.is_empty() {
                return Ok(1.0);
            }
            let v: f64 = c.trim_end_matches('*').parse().map_err(|_| bad())?;
            if !(v.is_finite() && v > 0.0) {
                return Err(bad());
            }
            Ok(v)
        };
        if let Some(c) = s.strip_suffix("n^2").or_else(|| s.strip_suffix("n2")) {
            return Ok(Self::PerN2(coef(c)?));
        }
        if let Some(c) = s.strip_suffix('n') {
            return Ok(Self::PerN(coef(c)?));
        }
        s.parse::<usize>().map(Self::Absolute).map_err(|_| bad())
    }
}

/// Output formats of [`super::emit_outputs`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Svg => "svg",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

/// Everything needed to reproduce one experiment run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n_list: Vec<usize>,
    /// Locality. Tables run every k listed; other kinds use the first.
    pub k_list: Vec<usize>,
    /// Clause-count cells of instance-based experiments.
    pub m_specs: Vec<MSpec>,
    pub instance_count: usize,
    pub seed: u64,
    pub theta: f64,
    /// Success threshold of the adiabatic step search.
    pub threshold: f64,
    /// Coverage multipliers of the concentration study.
    pub coverage_c: Vec<f64>,
    /// Interpolation grid size of the gap scan.
    pub s_points: usize,
    pub convention: ScheduleConvention,
    /// Measurement shots per adiabatic round of the solver.
    pub shots: usize,
    /// Fixed step count overriding the per-n search of density sweeps.
    pub steps: Option<usize>,
    pub out_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    /// Worker threads; 0 means all cores.
    pub jobs: usize,
    /// Record per-task wall time. Off by default so reruns are byte-identical.
    pub wall_time: bool,
}

impl ExperimentConfig {
    /// Defaults for `kind`, matching the published experiment grids.
    pub fn for_kind(kind: ExperimentKind) -> Self {
        let base = Self {
            kind,
            n_list: (10..=20).collect(),
            k_list: vec![3],
            m_specs: vec![],
            instance_count: 100,
            seed: 1,
            theta: std::f64::consts::PI,
            threshold: 0.99,
            coverage_c: vec![1.0, 2.0, 3.0],
            s_points: 21,
            convention: ScheduleConvention::default(),
            shots: 8,
            steps: None,
            out_dir: PathBuf::from("results"),
            formats: vec![OutputFormat::Csv],
            jobs: 0,
            wall_time: false,
        };
        match kind {
            ExperimentKind::Table1 => Self { k_list: vec![1, 2, 3], ..base },
            ExperimentKind::Table2 => base,
            ExperimentKind::FigQsDensity => Self {
                n_list: vec![12, 14, 16],
                m_specs: vec![MSpec::PerN2(1.0), MSpec::PerN2(2.0), MSpec::PerN2(4.0)],
                ..base
            },
            ExperimentKind::FigAqsDensity => Self {
                n_list: vec![16, 18, 20],
                m_specs: [2.5, 4.0, 5.0, 7.0, 10.0].into_iter().map(MSpec::PerN).collect(),
                ..base
            },
            ExperimentKind::Concentration => {
                Self { n_list: vec![10], m_specs: vec![MSpec::Absolute(10_000)], instance_count: 200, ..base }
            }
            ExperimentKind::Gapscan => Self { n_list: vec![8, 10, 12, 14, 16], ..base },
            ExperimentKind::Solve => Self { n_list: vec![14], m_specs: vec![MSpec::PerN2(1.0)], ..base },
        }
    }

    /// First listed locality.
    pub fn k(&self) -> usize {
        self.k_list[0]
    }

    /// Checks ranges and that every clause cell resolves to a positive count.
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return err("n_list must be nonempty and positive");
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return err("k must be nonempty and positive");
        }
        if self.instance_count == 0 {
            return err("instance_count must be positive");
        }
        if !(self.theta > 0.0 && self.theta <= std::f64::consts::PI) {
            return err("theta must lie in (0, pi]");
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return err("threshold must lie in (0, 1)");
        }
        if self.formats.is_empty() {
            return err("at least one output format is required");
        }
        if self.shots == 0 {
            return err("shots must be positive");
        }
        let needs_m = matches!(
            self.kind,
            ExperimentKind::FigQsDensity
                | ExperimentKind::FigAqsDensity
                | ExperimentKind::Concentration
                | ExperimentKind::Solve
        );
        if needs_m && self.m_specs.is_empty() {
            return err("m must list at least one clause count");
        }
        if self.kind == ExperimentKind::Concentration && self.coverage_c.is_empty() {
            return err("coverage_c must be nonempty");
        }
        if self.kind == ExperimentKind::Gapscan && self.s_points < 2 {
            return err("s_points must be at least 2");
        }
        for &n in &self.n_list {
            for m in &self.m_specs {
                m.resolve(n)?;
            }
        }
        Ok(())
    }

    /// Parses the text form: one `key = value` per line, `#` comments, lists
    /// comma-separated, `a..b` for inclusive integer ranges. `kind` is
    /// required; other keys override the kind's defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            pairs.push((i + 1, key.trim().to_string(), value.trim().to_string()));
        }
        let kind = pairs
            .iter()
            .find(|(_, k, _)| k == "kind")
            .ok_or_else(|| Error::Config("missing key `kind`".into()))?
            .2
            .parse()?;
        let mut cfg = Self::for_kind(kind);
        for (line, key, value) in &pairs {
            cfg.set(key, value).map_err(|e| Error::Config(format!("line {line}: {}", strip_prefix(e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Overrides one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "kind" => self.kind = value.parse()?,
            "n" | "n_list" => self.n_list = parse_usize_list(value)?,
            "k" | "k_list" => self.k_list = parse_usize_list(value)?,
            "m" | "m_spec" | "m_specs" => self.m_specs = parse_list(value)?,
            "instance_count" | "trials" => self.instance_count = parse_one(value)?,
            "seed" => self.seed = parse_one(value)?,
            "theta" => self.theta = parse_angle(value)?,
            "threshold" => self.threshold = parse_one(value)?,
            "coverage_c" => self.coverage_c = parse_list(value)?,
            "s_points" => self.s_points = parse_one(value)?,
            "convention" => self.convention = value.parse()?,
            "shots" => self.shots = parse_one(value)?,
            "steps" => self.steps = if value.is_empty() || value == "auto" { None } else { Some(parse_one(value)?) },
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            "format" | "formats" => self.formats = parse_list(value)?,
            "jobs" => self.jobs = parse_one(value)?,
            "wall_time" => self.wall_time = parse_one(value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

fn parse_one<T: FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Config(format!("cannot parse {s:?}")))
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| Error::Config(format!("cannot parse list item {t:?}"))))
        .collect()
}

/// Comma list of integers and inclusive `a..b` ranges.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let (a, b): (usize, usize) = (parse_one(a)?, parse_one(b.trim_start_matches('='))?);
            if a > b {
                return Err(Error::Config(format!("empty range {item:?}")));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_one(item)?);
        }
    }
    Ok(out)
}

/// A number, `pi`, `pi/x` or `x*pi`.
pub fn parse_angle(s: &str) -> Result<f64> {
    use std::f64::consts::PI;
    let t = s.trim().to_ascii_lowercase();
    if t == "pi" {
        return Ok(PI);
    }
    if let Some(d) = t.strip_prefix("pi/") {
        return Ok(PI / parse_one::<f64>(d)?);
    }
    if let Some(c) = t.strip_suffix("*pi").or_else(|| t.strip_suffix("pi")) {
        return Ok(parse_one::<f64>(c)? * PI);
    }
    parse_one(&t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clause_specs_parse_and_resolve() {
        assert_eq!("400".parse::<MSpec>().unwrap(), MSpec::Absolute(400));
        assert_eq!("4.5n".parse::<MSpec>().unwrap(), MSpec::PerN(4.5));
        assert_eq!("2n^2".parse::<MSpec>().unwrap(), MSpec::PerN2(2.0));
        assert_eq!("n2".parse::<MSpec>().unwrap(), MSpec::PerN2(1.0));
        assert_eq!(MSpec::PerN(2.5).resolve(16).unwrap(), 40);
        assert_eq!(MSpec::PerN2(4.0).resolve(14).unwrap(), 784);
        assert!("-2n".parse::<MSpec>().is_err());
        assert!("abc".parse::<MSpec>().is_err());
        assert!(MSpec::PerN(0.01).resolve(10).is_err());
    }

    #[test]
    fn text_form_overrides_defaults() {
        let cfg = ExperimentConfig::parse(
            "# quick sweep\nkind = fig_aqs_density\nn = 12..14\nm = 4n, 5n\ntrials = 20\nseed = 9\n\
             theta = pi/2\nformat = csv, svg\njobs = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::FigAqsDensity);
        assert_eq!(cfg.n_list, vec![12, 13, 14]);
        assert_eq!(cfg.m_specs, vec![MSpec::PerN(4.0), MSpec::PerN(5.0)]);
        assert_eq!(cfg.instance_count, 20);
        assert_eq!(cfg.seed, 9);
        assert!((cfg.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(cfg.formats, vec![OutputFormat::Csv, OutputFormat::Svg]);
        assert_eq!(cfg.jobs, 2);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::parse("n = 10").is_err());
        assert!(ExperimentConfig::parse("kind = table9").is_err());
        assert!(ExperimentConfig::parse("kind = table1\nn = ").is_err());
        assert!(ExperimentConfig::parse("kind = table1\nbogus = 1").is_err());
        assert!(ExperimentConfig::parse("kind = solve\ntrials = 0").is_err());
        assert!(ExperimentConfig::parse("kind = table2\nthreshold = 1.5").is_err());
        assert!(ExperimentConfig::parse("kind = table1\nn = 5..3").is_err());
    }

    #[test]
    fn every_default_config_validates() {
        for kind in ExperimentKind::ALL {
            ExperimentConfig::for_kind(kind).validate().unwrap();
            assert_eq!(kind.as_str().parse::<ExperimentKind>().unwrap(), kind);
        }
    }
}
