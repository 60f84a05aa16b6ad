//! Flat `key = value` experiment files.
//!
//! One assignment per line, `#` starts a comment, keys are case sensitive.
//! Every key is checked against the subcommand before anything runs, and
//! every error carries the line it came from.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use kdvb_core::operators::probe::{OperatorKind, ProbeEnsemble};
use kdvb_core::phase::Thresholds;
use kdvb_core::{Equation, Method};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

fn at(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Line { line, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Simulate,
    Sweep,
    VerifyLemmas,
    Probe,
    Report,
    Truncation,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::Simulate,
        Subcommand::Sweep,
        Subcommand::VerifyLemmas,
        Subcommand::Probe,
        Subcommand::Report,
        Subcommand::Truncation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Sweep => "sweep",
            Subcommand::VerifyLemmas => "verify-lemmas",
            Subcommand::Probe => "probe",
            Subcommand::Report => "report",
            Subcommand::Truncation => "truncation",
        }
    }

    /// Keys accepted on top of the shared ones.
    fn extra_keys(self) -> &'static [&'static str] {
        match self {
            Subcommand::Simulate | Subcommand::Report => &["epsilon"],
            Subcommand::Sweep => &["epsilons", "fit"],
            Subcommand::VerifyLemmas => &["epsilons", "c_much_less", "c_gtrsim", "c_sim"],
            Subcommand::Probe => &["epsilon", "operator", "splits", "trials", "t", "ensemble", "project"],
            Subcommand::Truncation => &["epsilon", "cutoffs"],
        }
    }

    fn uses_solver(self) -> bool {
        !matches!(self, Subcommand::VerifyLemmas | Subcommand::Probe)
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand '{s}'"))
    }
}

const SHARED_KEYS: &[&str] = &[
    "subcommand",
    "equation",
    "s",
    "T",
    "K",
    "N",
    "dt",
    "time_steps",
    "substeps",
    "method",
    "seed",
    "initial_data",
    "data.mode",
    "data.amplitude",
    "data.modes",
    "data.decay",
    "data.norm",
    "output_dir",
    "threads",
];

/// Initial datum, built in physical gauge on the configured band.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    Zero,
    Cos { mode: i64, amplitude: f64 },
    /// Real parts of `û_k` for positive `k`.
    SumOfModes { modes: Vec<(i64, f64)> },
    RandomSobolev { decay: f64, amplitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Horizon {
    Fixed(f64),
    /// The largest horizon the Picard gate admits for the datum.
    Gated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Steps {
    Nodes(usize),
    Spacing(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSettings {
    pub operator: OperatorKind,
    pub splits: Vec<usize>,
    pub trials: usize,
    pub t: f64,
    pub ensemble: ProbeEnsemble,
    pub project: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub equation: Equation,
    pub epsilons: Vec<f64>,
    pub s: f64,
    pub horizon: Horizon,
    pub band: usize,
    pub split: Option<usize>,
    pub steps: Steps,
    pub substeps: usize,
    pub method: Method,
    pub seed: u64,
    pub initial_data: InitialData,
    /// Rescale the datum to this `H^s` norm.
    pub data_norm: Option<f64>,
    pub output_dir: Option<String>,
    pub threads: Option<usize>,
    pub fit: bool,
    pub cutoffs: Vec<usize>,
    pub probe: Option<ProbeSettings>,
    /// Constants standing in for the asymptotic comparisons in the lemma checks.
    pub thresholds: Thresholds,
    /// Raw assignments in file order, echoed into the manifest.
    pub raw: Vec<(String, String)>,
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Result<Option<(usize, T)>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(|x| Some((line, x)))
                .map_err(|e| at(line, format!("{key}: cannot parse '{v}': {e}"))),
        }
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<(usize, Vec<T>)>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => {
                let items = v
                    .split(',')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .map(|x| x.parse::<T>().map_err(|e| at(line, format!("{key}: bad entry '{x}': {e}"))))
                    .collect::<Result<Vec<T>, _>>()?;
                Ok(Some((line, items)))
            }
        }
    }
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(at(line, format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn positive(line: usize, key: &str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(at(line, format!("{key} must be positive and finite, got {x}")))
    }
}

/// The value of a `subcommand` key, if the file sets one.
pub fn declared_subcommand(text: &str) -> Result<Option<Subcommand>, ConfigError> {
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if let Some((k, v)) = body.split_once('=') {
            if k.trim() == "subcommand" {
                return v.trim().parse().map(Some).map_err(|m: String| at(i + 1, m));
            }
        }
    }
    Ok(None)
}

impl ExperimentConfig {
    /// Parses a config for `command`. A `subcommand` key, when present, must
    /// agree with it.
    pub fn parse(text: &str, command: Subcommand) -> Result<Self, ConfigError> {
        let mut raw = Vec::new();
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| at(n, format!("expected 'key = value', got '{body}'")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(at(n, format!("empty key or value in '{body}'")));
            }
            if !SHARED_KEYS.contains(&k) && !command.extra_keys().contains(&k) {
                return Err(at(n, format!("unknown key '{k}' for {command}")));
            }
            if let Some((first, _)) = map.insert(k.to_string(), (n, v.to_string())) {
                return Err(at(n, format!("duplicate key '{k}' (first set on line {first})")));
            }
            raw.push((k.to_string(), v.to_string()));
        }
        let mut e = Entries { map };

        if let Some((line, name)) = e.take("subcommand") {
            let sc: Subcommand = name.parse().map_err(|m: String| at(line, m))?;
            if sc != command {
                return Err(at(line, format!("config is for {sc}, invoked as {command}")));
            }
        }

        let equation = match e.take("equation") {
            None => Equation::KdvBurgers,
            Some((_, v)) if v == "kdvb" => Equation::KdvBurgers,
            Some((_, v)) if v == "mkdvb" => Equation::MkdvBurgers,
            Some((line, v)) => return Err(at(line, format!("equation must be kdvb or mkdvb, got '{v}'"))),
        };

        let epsilons = match command {
            Subcommand::Sweep | Subcommand::VerifyLemmas => {
                let default = if command == Subcommand::VerifyLemmas { vec![0.0, 0.5, 1.0] } else { vec![] };
                let (line, eps) = e.list::<f64>("epsilons")?.unwrap_or((0, default));
                if let Some(bad) = eps.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
                    return Err(at(line, format!("epsilons must be >= 0, got {bad}")));
                }
                eps
            }
            _ => {
                let (line, eps) = e.parse::<f64>("epsilon")?.unwrap_or((0, 0.0));
                if !(eps >= 0.0 && eps.is_finite()) {
                    return Err(at(line, format!("epsilon must be >= 0, got {eps}")));
                }
                vec![eps]
            }
        };

        let default_s = if equation == Equation::MkdvBurgers { 0.5 } else { 0.0 };
        let (s_line, s) = e.parse::<f64>("s")?.unwrap_or((0, default_s));
        if !s.is_finite() || s < 0.0 {
            return Err(at(s_line, format!("s must be >= 0, got {s}")));
        }

        let horizon = match e.take("T") {
            None => Horizon::Fixed(1.0),
            Some((_, v)) if v == "gated" => Horizon::Gated,
            Some((line, v)) => {
                let t = v.parse::<f64>().map_err(|err| at(line, format!("T: cannot parse '{v}': {err}")))?;
                Horizon::Fixed(positive(line, "T", t)?)
            }
        };

        let (k_line, band) = e.parse::<usize>("K")?.unwrap_or((0, 32));
        if band == 0 {
            return Err(at(k_line, "K must be at least 1"));
        }
        let split = match e.parse::<usize>("N")? {
            Some((line, 0)) => return Err(at(line, "N must be at least 1")),
            Some((line, n)) if n > band => return Err(at(line, format!("N = {n} exceeds K = {band}"))),
            other => other.map(|(_, n)| n),
        };

        let steps = match (e.parse::<f64>("dt")?, e.parse::<usize>("time_steps")?) {
            (Some(_), Some((line, _))) => return Err(at(line, "set either dt or time_steps, not both")),
            (Some((line, dt)), None) => Steps::Spacing(positive(line, "dt", dt)?),
            (None, Some((line, 0))) => return Err(at(line, "time_steps must be at least 1")),
            (None, Some((_, n))) => Steps::Nodes(n),
            (None, None) => Steps::Nodes(64),
        };
        if let (Steps::Spacing(dt), Horizon::Fixed(t)) = (steps, horizon) {
            let n = t / dt;
            if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
                return Err(ConfigError::Invalid(format!("T = {t} is not a whole number of dt = {dt} steps")));
            }
        }
        let substeps = match e.parse::<usize>("substeps")? {
            Some((line, 0)) => return Err(at(line, "substeps must be at least 1")),
            Some((_, n)) => n,
            None => 8,
        };

        let method = match e.take("method") {
            None => Method::Reference,
            Some((_, v)) if v == "reference" => Method::Reference,
            Some((_, v)) if v == "picard" => Method::Picard,
            Some((line, v)) => return Err(at(line, format!("method must be reference or picard, got '{v}'"))),
        };
        let seed = e.parse::<u64>("seed")?.map_or(0, |(_, x)| x);

        let initial_data = Self::initial_data(&mut e, band)?;
        let data_norm = match e.parse::<f64>("data.norm")? {
            Some((line, x)) if !(x >= 0.0 && x.is_finite()) => {
                return Err(at(line, format!("data.norm must be >= 0, got {x}")))
            }
            other => other.map(|(_, x)| x),
        };

        let output_dir = e.take("output_dir").map(|(_, v)| v);
        let threads = match e.parse::<usize>("threads")? {
            Some((line, 0)) => return Err(at(line, "threads must be at least 1")),
            other => other.map(|(_, n)| n),
        };

        let fit = match e.take("fit") {
            Some((line, v)) => parse_bool(line, "fit", &v)?,
            None => command == Subcommand::Sweep,
        };
        if command == Subcommand::Sweep {
            if epsilons.is_empty() {
                return Err(ConfigError::Invalid("sweep needs an epsilons list".into()));
            }
            if fit && epsilons.len() < 3 {
                return Err(ConfigError::Invalid(format!(
                    "at least 3 epsilons required for fit, got {}",
                    epsilons.len()
                )));
            }
        }

        let cutoffs = match e.list::<usize>("cutoffs")? {
            Some((line, c)) => {
                if let Some(bad) = c.iter().find(|&&x| x == 0 || x > band) {
                    return Err(at(line, format!("cutoff {bad} outside 1..={band}")));
                }
                if c.is_empty() {
                    return Err(at(line, "cutoffs is empty"));
                }
                c
            }
            None if command == Subcommand::Truncation => {
                let mut c: Vec<usize> = std::iter::successors(Some(2usize), |x| Some(x * 2)).take_while(|&x| x < band).collect();
                c.push(band);
                c
            }
            None => vec![],
        };

        let mut thresholds = Thresholds::default();
        for (key, slot) in [
            ("c_much_less", &mut thresholds.c_much_less),
            ("c_gtrsim", &mut thresholds.c_gtrsim),
            ("c_sim", &mut thresholds.c_sim),
        ] {
            if let Some((line, x)) = e.parse::<f64>(key)? {
                *slot = positive(line, key, x)?;
            }
        }

        let probe = if command == Subcommand::Probe { Some(Self::probe(&mut e, band)?) } else { None };

        if command.uses_solver() && equation == Equation::MkdvBurgers && method == Method::Picard && s < 0.5 {
            return Err(at(s_line, format!("picard on mkdvb needs s >= 0.5, got {s}")));
        }
        debug_assert!(e.map.is_empty(), "unconsumed keys {:?}", e.map.keys());

        Ok(Self {
            subcommand: command,
            equation,
            epsilons,
            s,
            horizon,
            band,
            split,
            steps,
            substeps,
            method,
            seed,
            initial_data,
            data_norm,
            output_dir,
            threads,
            fit,
            cutoffs,
            probe,
            thresholds,
            raw,
        })
    }

    fn initial_data(e: &mut Entries, band: usize) -> Result<InitialData, ConfigError> {
        let kb = band as i64;
        let in_band = |line: usize, k: i64| {
            if k >= 1 && k <= kb {
                Ok(k)
            } else {
                Err(at(line, format!("mode {k} outside 1..={band}")))
            }
        };
        let (line, name) = e.take("initial_data").unwrap_or((0, "cos".into()));
        let data = match name.as_str() {
            "zero" => InitialData::Zero,
            "cos" => {
                let mode = match e.parse::<i64>("data.mode")? {
                    Some((l, m)) => in_band(l, m)?,
                    None => 1,
                };
                let amplitude = e.parse::<f64>("data.amplitude")?.map_or(0.1, |(_, a)| a);
                InitialData::Cos { mode, amplitude }
            }
            "sum-of-modes" => {
                let (l, v) = e
                    .take("data.modes")
                    .ok_or_else(|| at(line, "sum-of-modes needs data.modes = k:c, k:c, ..."))?;
                let mut modes = Vec::new();
                for item in v.split(',').map(str::trim).filter(|x| !x.is_empty()) {
                    let (k, c) = item
                        .split_once(':')
                        .ok_or_else(|| at(l, format!("data.modes: expected k:c, got '{item}'")))?;
                    let k = k.trim().parse::<i64>().map_err(|err| at(l, format!("data.modes: bad mode '{k}': {err}")))?;
                    let c = c.trim().parse::<f64>().map_err(|err| at(l, format!("data.modes: bad value '{c}': {err}")))?;
                    if modes.iter().any(|&(m, _)| m == k) {
                        return Err(at(l, format!("data.modes: mode {k} repeated")));
                    }
                    modes.push((in_band(l, k)?, c));
                }
                InitialData::SumOfModes { modes }
            }
            "random-sobolev" => {
                let decay = e.parse::<f64>("data.decay")?.map_or(1.0, |(_, d)| d);
                let amplitude = e.parse::<f64>("data.amplitude")?.map_or(0.1, |(_, a)| a);
                InitialData::RandomSobolev { decay, amplitude }
            }
            other => {
                return Err(at(line, format!("initial_data must be zero, cos, sum-of-modes or random-sobolev, got '{other}'")))
            }
        };
        for key in ["data.mode", "data.amplitude", "data.modes", "data.decay"] {
            if let Some((l, _)) = e.take(key) {
                return Err(at(l, format!("{key} does not apply to initial_data = {name}")));
            }
        }
        Ok(data)
    }

    fn probe(e: &mut Entries, band: usize) -> Result<ProbeSettings, ConfigError> {
        let operator = match e.take("operator") {
            Some((line, v)) => OperatorKind::parse(&v).ok_or_else(|| at(line, format!("unknown operator '{v}'")))?,
            None => return Err(ConfigError::Invalid("probe needs an operator key".into())),
        };
        let (line, splits) = e.list::<usize>("splits")?.unwrap_or((0, vec![8, 16, 32]));
        if let Some(bad) = splits.iter().find(|&&n| n == 0 || 2 * n > band) {
            return Err(at(line, format!("split {bad} needs 1 <= N and 2N <= K = {band}")));
        }
        if splits.is_empty() {
            return Err(at(line, "splits is empty"));
        }
        let trials = match e.parse::<usize>("trials")? {
            Some((l, 0)) => return Err(at(l, "trials must be at least 1")),
            Some((_, n)) => n,
            None => 16,
        };
        let t = match e.parse::<f64>("t")? {
            Some((l, t)) if !(t >= 0.0 && t.is_finite()) => return Err(at(l, format!("t must be >= 0, got {t}"))),
            other => other.map_or(0.0, |(_, t)| t),
        };
        let ensemble = match e.take("ensemble") {
            None => ProbeEnsemble::Extremal,
            Some((_, v)) if v == "extremal" => ProbeEnsemble::Extremal,
            Some((_, v)) if v == "sobolev" => ProbeEnsemble::Sobolev,
            Some((l, v)) => return Err(at(l, format!("ensemble must be extremal or sobolev, got '{v}'"))),
        };
        let project = match e.take("project") {
            Some((l, v)) => parse_bool(l, "project", &v)?,
            None => true,
        };
        Ok(ProbeSettings { operator, splits, trials, t, ensemble, project })
    }
}
