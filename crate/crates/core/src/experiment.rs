//! Time-sweep experiments: configuration, execution and CSV output.
//!
//! Configuration is a flat `key = value` text with `#` comments. Settings are
//! applied in order, so later ones win; callers put command-line overrides
//! after the file contents.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::circuits::{
    concurrence_circuit_with, concurrence_estimate, default_trotter_steps, evolution_circuit_with,
    swap_test_concurrence, vacuum_circuit, EvolutionOptions,
};
use crate::error::Error;
use crate::neutrino::{
    baseline_for_phase, concurrence_exact, inversion_target, swap_period, vacuum_disappearance,
    ExactEvolver, FlavourString, NeutrinoParams, PairAngles,
};
use crate::qsim::{
    derive_seed, format_bitstring, run_noisy, run_statevector, sample_counts, Counts, NoiseModel,
    StateVector,
};

pub const DEFAULT_SHOTS: u64 = 4096;
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_POINTS: usize = 41;
pub const DEFAULT_NOISE: NoiseModel = NoiseModel {
    p_depol_1q: 0.0005,
    p_depol_2q: 0.01,
    p_readout_flip: 0.02,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Vacuum,
    Invert,
    Concurrence,
}

impl ExperimentKind {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Vacuum => &["t", "p_surv_theory", "p_dis_theory", "p_dis_est", "stderr"],
            ExperimentKind::Invert => &["t", "p_inv_theory", "p_inv_est", "stderr"],
            ExperimentKind::Concurrence => &["t", "c_theory", "c_est", "stderr"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Vacuum => "vacuum",
            ExperimentKind::Invert => "invert",
            ExperimentKind::Concurrence => "concurrence",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "vacuum" => Ok(ExperimentKind::Vacuum),
            "invert" | "inversion" => Ok(ExperimentKind::Invert),
            "concurrence" => Ok(ExperimentKind::Concurrence),
            other => Err(format!("unknown experiment {other:?}; expected vacuum, invert or concurrence")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Statevector probabilities, no sampling.
    Exact,
    /// Ideal circuit, finite shots.
    StatevectorShots,
    /// Monte-Carlo gate noise and readout flips, finite shots.
    Noisy,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Mode::Exact),
            "statevector-shots" | "shots" => Ok(Mode::StatevectorShots),
            "noisy" => Ok(Mode::Noisy),
            other => Err(format!("unknown mode {other:?}; expected exact, statevector-shots or noisy")),
        }
    }
}

/// Diagnostics for configuration problems.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}field `{field}`: {message}", location(*.line))]
    Field {
        field: String,
        line: Option<usize>,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(#[from] Error),
}

fn location(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

/// One `key = value` assignment and where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub key: String,
    pub value: String,
    /// 1-based line in the config file; `None` for command-line overrides.
    pub line: Option<usize>,
}

impl Setting {
    pub fn flag(key: &str, value: impl Into<String>) -> Self {
        Self {
            key: normalize_key(key),
            value: value.into(),
            line: None,
        }
    }

    fn error(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::Field {
            field: self.key.clone(),
            line: self.line,
            message: message.into(),
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

const KEYS: &[&str] = &[
    "experiment",
    "n",
    "theta_nu",
    "pair_angle",
    "dm2",
    "energy",
    "v_cc",
    "initial",
    "t_min",
    "t_max",
    "points",
    "mode",
    "shots",
    "steps",
    "seed",
    "noise",
    "hardware_swaps",
    "out",
];

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<Setting>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got {content:?}"),
            });
        };
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("unknown key {:?}", k.trim()),
            });
        }
        out.push(Setting {
            key,
            value: v.trim().to_string(),
            line: Some(line),
        });
    }
    Ok(out)
}

/// Real number, optionally a product/quotient involving `pi`, e.g. `pi/6`,
/// `2*pi/3`, `1e-4`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let malformed = || format!("malformed number {s:?}");
    let factor = |tok: &str| -> Result<f64, String> {
        match tok.trim() {
            "pi" | "π" => Ok(std::f64::consts::PI),
            t => t.parse::<f64>().map_err(|_| malformed()),
        }
    };
    let mut value = 1.0;
    let mut rest = s;
    let mut divide = false;
    loop {
        let cut = rest.find(['*', '/']);
        let tok = &rest[..cut.unwrap_or(rest.len())];
        let v = factor(tok)?;
        value = if divide { value / v } else { value * v };
        match cut {
            Some(i) => {
                divide = rest.as_bytes()[i] == b'/';
                rest = &rest[i + 1..];
            }
            None => break,
        }
    }
    if !value.is_finite() {
        return Err(format!("{s:?} is not a finite number"));
    }
    Ok(value)
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("expected true or false, got {other:?}")),
    }
}

/// `p:q:θ` with 1-based neutrino indices.
fn parse_pair_angle(s: &str) -> Result<(usize, usize, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected p:q:angle, got {s:?}"));
    }
    let idx = |t: &str| -> Result<usize, String> {
        let v: usize = t.trim().parse().map_err(|_| format!("bad neutrino index {t:?}"))?;
        if v == 0 {
            return Err("neutrino indices start at 1".into());
        }
        Ok(v - 1)
    };
    let (p, q) = (idx(parts[0])?, idx(parts[1])?);
    if p == q {
        return Err(format!("pair {s:?} repeats neutrino {}", p + 1));
    }
    Ok((p, q, parse_real(parts[2])?))
}

fn parse_noise(s: &str) -> Result<NoiseModel, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected p1,p2,pr, got {s:?}"));
    }
    let v: Vec<f64> = parts.iter().map(|p| parse_real(p)).collect::<Result<_, _>>()?;
    NoiseModel::new(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub params: NeutrinoParams,
    pub t_min: f64,
    pub t_max: f64,
    pub grid_points: usize,
    pub mode: Mode,
    pub shots: u64,
    pub trotter_steps: usize,
    pub noise: NoiseModel,
    pub seed: u64,
    pub hardware_swaps: bool,
    pub out_path: Option<PathBuf>,
}

/// Base parameters for `n` neutrinos.
pub fn preset_params(n: usize) -> NeutrinoParams {
    match n {
        1 => NeutrinoParams::vacuum(),
        2 => NeutrinoParams::two_neutrino(),
        3 => NeutrinoParams::three_neutrino(),
        _ => NeutrinoParams {
            n,
            coupling_angles: PairAngles::uniform(n, std::f64::consts::FRAC_PI_6),
            initial_flavours: FlavourString::default_for(n),
            ..NeutrinoParams::three_neutrino()
        },
    }
}

/// Default upper time: π for the vacuum experiment, one flavour-swap period
/// for two neutrinos, and the default two-neutrino period otherwise.
fn default_t_max(kind: ExperimentKind, params: &NeutrinoParams) -> f64 {
    match kind {
        ExperimentKind::Vacuum => std::f64::consts::PI,
        _ => swap_period(params)
            .or_else(|_| swap_period(&NeutrinoParams::two_neutrino()))
            .expect("the two-neutrino preset has a positive coupling"),
    }
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let n = if kind == ExperimentKind::Vacuum { 1 } else { 2 };
        let params = preset_params(n);
        Self {
            experiment: kind,
            t_min: 0.0,
            t_max: default_t_max(kind, &params),
            grid_points: DEFAULT_POINTS,
            mode: Mode::StatevectorShots,
            shots: DEFAULT_SHOTS,
            trotter_steps: default_trotter_steps(n),
            noise: DEFAULT_NOISE,
            seed: DEFAULT_SEED,
            hardware_swaps: false,
            out_path: None,
            params,
        }
    }

    /// Builds a configuration from ordered settings; `kind` overrides any
    /// `experiment` key.
    pub fn from_settings(kind: Option<ExperimentKind>, settings: &[Setting]) -> Result<Self, ConfigError> {
        let last = |key: &str| settings.iter().rev().find(|s| s.key == key);

        let kind = match (kind, last("experiment")) {
            (Some(k), _) => k,
            (None, Some(s)) => s.value.parse().map_err(|m: String| s.error(m))?,
            (None, None) => {
                return Err(ConfigError::Field {
                    field: "experiment".into(),
                    line: None,
                    message: "no experiment given".into(),
                })
            }
        };
        let mut cfg = Self::defaults(kind);

        if let Some(s) = last("n") {
            let n: usize = s.value.parse().map_err(|_| s.error(format!("expected an integer, got {:?}", s.value)))?;
            if n == 0 {
                return Err(s.error("n must be at least 1"));
            }
            match kind {
                ExperimentKind::Vacuum if n != 1 => return Err(s.error("the vacuum experiment uses n = 1")),
                ExperimentKind::Concurrence if n != 2 => {
                    return Err(s.error("the concurrence experiment needs n = 2"))
                }
                ExperimentKind::Invert if n < 2 => return Err(s.error("inversion needs n ≥ 2")),
                _ => {}
            }
            cfg.params = preset_params(n);
            cfg.trotter_steps = default_trotter_steps(n);
        }
        let mut explicit_t_max = false;
        for s in settings {
            let real = || parse_real(&s.value).map_err(|m| s.error(m));
            let count = || {
                s.value
                    .parse::<u64>()
                    .ok()
                    .filter(|&v| v > 0)
                    .ok_or_else(|| s.error(format!("expected a positive integer, got {:?}", s.value)))
            };
            match s.key.as_str() {
                "experiment" | "n" => {}
                "theta_nu" => cfg.params.theta_nu = real()?,
                "pair_angle" => {
                    let (p, q, th) = parse_pair_angle(&s.value).map_err(|m| s.error(m))?;
                    if p.max(q) >= cfg.params.n {
                        return Err(s.error(format!(
                            "pair ({}, {}) is outside n = {}",
                            p + 1,
                            q + 1,
                            cfg.params.n
                        )));
                    }
                    cfg.params.coupling_angles.set(p, q, th);
                }
                "dm2" => cfg.params.delta_m2 = real()?,
                "energy" => cfg.params.energy = real()?,
                "v_cc" => cfg.params.v_cc = real()?,
                "initial" => {
                    cfg.params.initial_flavours =
                        s.value.parse().map_err(|e: Error| s.error(e.to_string()))?
                }
                "t_min" => cfg.t_min = real()?,
                "t_max" => {
                    cfg.t_max = real()?;
                    explicit_t_max = true;
                }
                "points" => cfg.grid_points = count()? as usize,
                "mode" => cfg.mode = s.value.parse().map_err(|m: String| s.error(m))?,
                "shots" => cfg.shots = count()?,
                "steps" => cfg.trotter_steps = count()? as usize,
                "seed" => {
                    cfg.seed = s
                        .value
                        .parse()
                        .map_err(|_| s.error(format!("expected a non-negative integer, got {:?}", s.value)))?
                }
                "noise" => cfg.noise = parse_noise(&s.value).map_err(|m| s.error(m))?,
                "hardware_swaps" => cfg.hardware_swaps = parse_bool(&s.value).map_err(|m| s.error(m))?,
                "out" => cfg.out_path = Some(PathBuf::from(&s.value)),
                other => return Err(s.error(format!("unknown key {other:?}"))),
            }
        }
        if !explicit_t_max {
            cfg.t_max = default_t_max(kind, &cfg.params);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies `overrides` after it.
    pub fn load(
        kind: Option<ExperimentKind>,
        path: Option<&Path>,
        overrides: &[Setting],
    ) -> Result<Self, ConfigError> {
        let mut settings = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Field {
                    field: "config".into(),
                    line: None,
                    message: format!("cannot read {}: {e}", p.display()),
                })?;
                parse_config_text(&text)?
            }
            None => Vec::new(),
        };
        settings.extend_from_slice(overrides);
        Self::from_settings(kind, &settings)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let field = |f: &str, m: String| ConfigError::Field {
            field: f.into(),
            line: None,
            message: m,
        };
        self.params.validate()?;
        if !(self.t_min.is_finite() && self.t_max.is_finite()) || self.t_min > self.t_max {
            return Err(field("t_max", format!("need t_min ≤ t_max, got {} > {}", self.t_min, self.t_max)));
        }
        if self.grid_points == 0 {
            return Err(field("points", "need at least one grid point".into()));
        }
        if self.shots == 0 {
            return Err(field("shots", "need at least one shot".into()));
        }
        if self.trotter_steps == 0 {
            return Err(field("steps", "need at least one Trotter step".into()));
        }
        self.noise.validate()?;
        match self.experiment {
            ExperimentKind::Vacuum if self.params.n != 1 => {
                Err(field("n", "the vacuum experiment uses n = 1".into()))
            }
            ExperimentKind::Concurrence if self.params.n != 2 => {
                Err(field("n", "the concurrence experiment needs n = 2".into()))
            }
            ExperimentKind::Invert => inversion_target(&self.params).map(|_| ()).map_err(|e| field("initial", e.to_string())),
            _ => Ok(()),
        }
    }

    /// Evenly spaced times from `t_min` to `t_max` inclusive.
    pub fn time_grid(&self) -> Vec<f64> {
        if self.grid_points == 1 {
            return vec![self.t_min];
        }
        let step = (self.t_max - self.t_min) / (self.grid_points - 1) as f64;
        (0..self.grid_points)
            .map(|i| {
                if i == self.grid_points - 1 {
                    self.t_max
                } else {
                    self.t_min + step * i as f64
                }
            })
            .collect()
    }

    fn evolution_options(&self) -> EvolutionOptions {
        EvolutionOptions {
            hardware_swaps: self.hardware_swaps,
            ..EvolutionOptions::new(self.trotter_steps)
        }
    }
}

/// Table of reals with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvReport {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn format_cell(v: f64) -> String {
    let s = format!("{v:.12}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

impl CsvReport {
    pub fn new(header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
        }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Values of the named column, or `None` if absent.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// LF-terminated CSV text, every value with 12 decimals.
    pub fn to_csv_string(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_cell(v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv_string())
    }
}

impl fmt::Display for CsvReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv_string())
    }
}

/// Measured estimate of one probability with its binomial standard error.
fn probability_estimate(counts: &Counts, bits: &str) -> (f64, f64) {
    let p = counts.frequency(bits);
    (p, (p * (1.0 - p) / counts.shots() as f64).sqrt())
}

struct Point {
    theory: Vec<f64>,
    est: f64,
    stderr: f64,
}

fn measure(
    cfg: &ExperimentConfig,
    circuit: &crate::qsim::Circuit,
    ideal: &StateVector,
    seed: u64,
) -> crate::error::Result<Counts> {
    match cfg.mode {
        Mode::Noisy => run_noisy(
            circuit,
            &StateVector::basis(circuit.num_qubits(), 0)?,
            cfg.shots,
            &cfg.noise,
            seed,
        ),
        _ => sample_counts(ideal, cfg.shots, seed, None),
    }
}

fn vacuum_point(cfg: &ExperimentConfig, t: f64, seed: u64) -> crate::error::Result<Point> {
    let p = &cfg.params;
    let length = baseline_for_phase(t, p.delta_m2, p.energy);
    let dis = vacuum_disappearance(p.theta_nu, p.delta_m2, length, p.energy)?;
    let c = vacuum_circuit(p.theta_nu, 2.0 * t)?;
    let state = run_statevector(&c, &StateVector::basis(1, 0)?)?;
    let (est, stderr) = match cfg.mode {
        Mode::Exact => (state.probability_of("1")?, 0.0),
        _ => probability_estimate(&measure(cfg, &c, &state, seed)?, "1"),
    };
    Ok(Point {
        theory: vec![1.0 - dis, dis],
        est,
        stderr,
    })
}

fn invert_point(cfg: &ExperimentConfig, ev: &ExactEvolver, t: f64, seed: u64) -> crate::error::Result<Point> {
    let target = inversion_target(&cfg.params)?;
    let bits = format_bitstring(target, cfg.params.n);
    let theory = ev.inversion_probability(t)?;
    let c = evolution_circuit_with(&cfg.params, t, &cfg.evolution_options())?;
    let state = run_statevector(&c, &StateVector::basis(cfg.params.n, 0)?)?;
    let (est, stderr) = match cfg.mode {
        Mode::Exact => (state.probability_of(&bits)?, 0.0),
        _ => probability_estimate(&measure(cfg, &c, &state, seed)?, &bits),
    };
    Ok(Point {
        theory: vec![theory],
        est,
        stderr,
    })
}

fn concurrence_point(cfg: &ExperimentConfig, ev: &ExactEvolver, t: f64, seed: u64) -> crate::error::Result<Point> {
    let theory = concurrence_exact(&ev.state(t)?)?;
    let c = concurrence_circuit_with(&cfg.params, t, &cfg.evolution_options())?;
    let state = run_statevector(&c, &StateVector::basis(c.num_qubits(), 0)?)?;
    let (est, stderr) = match cfg.mode {
        Mode::Exact => (swap_test_concurrence(&state)?, 0.0),
        _ => concurrence_estimate(&measure(cfg, &c, &state, seed)?.marginal(&[0])?)?,
    };
    Ok(Point {
        theory: vec![theory],
        est,
        stderr,
    })
}

/// Runs every grid point (in parallel) and returns rows in grid order.
///
/// Grid point `i` samples with seed `derive_seed(seed, i)`, so the output
/// depends only on the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CsvReport, ConfigError> {
    cfg.validate()?;
    let grid = cfg.time_grid();
    let evolver = match cfg.experiment {
        ExperimentKind::Vacuum => None,
        _ => Some(ExactEvolver::new(&cfg.params)?),
    };
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let seed = derive_seed(cfg.seed, i as u64);
            let point = match (cfg.experiment, &evolver) {
                (ExperimentKind::Vacuum, _) => vacuum_point(cfg, t, seed),
                (ExperimentKind::Invert, Some(ev)) => invert_point(cfg, ev, t, seed),
                (ExperimentKind::Concurrence, Some(ev)) => concurrence_point(cfg, ev, t, seed),
                _ => unreachable!("evolver exists for interacting experiments"),
            }?;
            let mut row = vec![t];
            row.extend(point.theory);
            row.push(point.est);
            row.push(point.stderr);
            Ok(row)
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    Ok(CsvReport::new(cfg.experiment.header(), rows))
}
