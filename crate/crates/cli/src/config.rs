//! Run configuration: JSON file merged with command-line overrides.

use crate::error::InputError;
use anyhow::Result;
use calabi_core::gluing::{classify, nu0, NuRegime};
use calabi_core::params::{BetaSpec, GeometryParams, Q, J0};
use calabi_core::profile::Normalization;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        self != Format::Json
    }

    pub fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NormArg {
    Raw,
    A1,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Raw => Normalization::Raw,
            NormArg::A1 => Normalization::A1Normalized,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn to_q(self) -> Result<Q> {
        if self.den == 0 {
            return Err(InputError::new(format!("zero denominator in {}/{}", self.num, self.den)).into());
        }
        Ok(Q::new(self.num as i128, self.den as i128))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "serde_json::Value")]
pub enum J0Input {
    Finite(u32),
    Named(String),
}

impl TryFrom<serde_json::Value> for J0Input {
    type Error = String;

    fn try_from(v: serde_json::Value) -> std::result::Result<Self, String> {
        match v {
            serde_json::Value::String(s) => Ok(J0Input::Named(s)),
            serde_json::Value::Number(k) => k
                .as_u64()
                .and_then(|k| u32::try_from(k).ok())
                .map(J0Input::Finite)
                .ok_or_else(|| format!("j0 must be a nonnegative integer, got {k}")),
            other => Err(format!("j0 must be an integer or \"infinity\", got {other}")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryInput {
    pub n: u32,
    pub alpha: Rational,
    #[serde(default = "default_j0")]
    pub j0: J0Input,
}

fn default_j0() -> J0Input {
    J0Input::Finite(1)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "serde_json::Value")]
pub enum BetaInput {
    Exact(Rational),
    Offset {
        offset: f64,
    },
    Value {
        value: f64,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OffsetField {
    offset: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValueField {
    value: f64,
}

impl TryFrom<serde_json::Value> for BetaInput {
    type Error = String;

    fn try_from(v: serde_json::Value) -> std::result::Result<Self, String> {
        if let Ok(r) = serde_json::from_value::<Rational>(v.clone()) {
            return Ok(BetaInput::Exact(r));
        }
        if let Ok(o) = serde_json::from_value::<OffsetField>(v.clone()) {
            return Ok(BetaInput::Offset { offset: o.offset });
        }
        serde_json::from_value::<ValueField>(v.clone())
            .map(|x| BetaInput::Value { value: x.value })
            .map_err(|_| format!("beta must be {{num, den}}, {{offset}} or {{value}}, got {v}"))
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub monge_ampere: f64,
    pub first_integral: f64,
    pub eigen: f64,
    pub branch: f64,
    pub closed_form: f64,
    pub cone_d: f64,
    pub far_cone: f64,
    pub green: f64,
    pub linearization: f64,
    pub extinction_k: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            monge_ampere: 1e-8,
            first_integral: 1e-9,
            eigen: 1e-7,
            branch: 1e-8,
            closed_form: 1e-8,
            cone_d: 1e-6,
            far_cone: 1e-4,
            green: 0.02,
            linearization: 1e-4,
            extinction_k: 1.0,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub geometry: Option<GeometryInput>,
    pub beta: Option<BetaInput>,
    pub betas: Option<Vec<BetaInput>>,
    pub theta: Option<f64>,
    pub eta: Option<f64>,
    pub etas: Option<Vec<f64>>,
    pub margin: Option<f64>,
    pub tolerances: Option<Tolerances>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub normalization: Option<NormArg>,
}

/// Flags shared by every subcommand; each one overrides the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// rational, e.g. 3/2
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// positive integer or "infinity"
    #[arg(long, global = true)]
    pub j0: Option<String>,
    /// rational (exact), decimal, or "star"
    #[arg(long, global = true, conflicts_with = "offset")]
    pub beta: Option<String>,
    /// beta - beta_*
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub offset: Option<f64>,
    /// comma-separated list of beta values for sweep
    #[arg(long, global = true, value_delimiter = ',')]
    pub betas: Option<Vec<String>>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// comma-separated eta values for traces
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub etas: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub margin: Option<f64>,
    /// output directory; defaults to $CALABI_OUT, then ./calabi_out
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, value_enum)]
    pub normalization: Option<NormArg>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: GeometryParams,
    pub beta: BetaSpec,
    pub betas: Vec<BetaSpec>,
    pub theta: f64,
    pub eta: f64,
    pub etas: Vec<f64>,
    pub margin: f64,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    pub format: Format,
    pub normalization: Option<Normalization>,
}

pub fn parse_rational(s: &str) -> Result<Q> {
    let bad = || InputError::new(format!("malformed rational {s:?}"));
    let (a, b) = match s.trim().split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), "1"),
    };
    let num: i128 = a.parse().map_err(|_| bad())?;
    let den: i128 = b.parse().map_err(|_| bad())?;
    if den == 0 {
        return Err(InputError::new(format!("zero denominator in {s:?}")).into());
    }
    Ok(Q::new(num, den))
}

pub fn parse_j0(s: &str) -> Result<J0> {
    match s.trim() {
        "inf" | "infinity" | "Infinity" => Ok(J0::Infinite),
        t => t.parse::<u32>().map(J0::Finite).map_err(|_| InputError::new(format!("malformed j0 {s:?}")).into()),
    }
}

/// "star" gives beta_*, a decimal point gives a float, anything else an exact rational.
pub fn parse_beta(s: &str, geom: &GeometryParams) -> Result<BetaSpec> {
    let t = s.trim();
    if t == "star" {
        return Ok(BetaSpec::Exact(geom.beta_star_exact()));
    }
    if t.contains(['.', 'e', 'E']) {
        let v: f64 = t.parse().map_err(|_| InputError::new(format!("malformed beta {s:?}")))?;
        return Ok(BetaSpec::Value(v));
    }
    Ok(BetaSpec::Exact(parse_rational(t)?))
}

fn beta_from_input(b: &BetaInput) -> Result<BetaSpec> {
    Ok(match b {
        BetaInput::Exact(r) => BetaSpec::Exact(r.to_q()?),
        BetaInput::Offset { offset } => BetaSpec::Offset(*offset),
        BetaInput::Value { value } => BetaSpec::Value(*value),
    })
}

fn j0_from_input(j: &J0Input) -> Result<J0> {
    match j {
        J0Input::Finite(k) => Ok(J0::Finite(*k)),
        J0Input::Named(s) => parse_j0(s),
    }
}

/// 0.8 when admissible, else the midpoint between the lower bound and 1.
pub fn default_theta(geom: &GeometryParams) -> f64 {
    let nf = geom.n as f64;
    let lo = match classify(geom) {
        NuRegime::Less => 1.0 - (nu0(geom) - 1.0) / nf,
        NuRegime::Greater => 1.0 / (nf + 1.0),
        NuRegime::Equal => 0.0,
    };
    if lo < 0.8 {
        0.8
    } else {
        (lo + 1.0) / 2.0
    }
}

pub fn load_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError::new(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| InputError::new(format!("bad config {}: {e}", path.display())).into())
}

impl RunConfig {
    pub fn resolve(o: &Overrides) -> Result<RunConfig> {
        let file = match &o.config {
            Some(p) => load_file(p)?,
            None => ConfigFile::default(),
        };
        let (mut n, mut alpha, mut j0) = (2u32, Q::new(3, 2), J0::Finite(1));
        if let Some(g) = &file.geometry {
            n = g.n;
            alpha = g.alpha.to_q()?;
            j0 = j0_from_input(&g.j0)?;
        }
        if let Some(v) = o.n {
            n = v;
        }
        if let Some(s) = &o.alpha {
            alpha = parse_rational(s)?;
        }
        if let Some(s) = &o.j0 {
            j0 = parse_j0(s)?;
        }
        let geometry = GeometryParams::new(n, alpha, j0).map_err(|e| InputError::new(e.to_string()))?;
        let mut beta = match &file.beta {
            Some(b) => beta_from_input(b)?,
            None => BetaSpec::Offset(1e-8),
        };
        if let Some(s) = &o.beta {
            beta = parse_beta(s, &geometry)?;
        }
        if let Some(d) = o.offset {
            beta = BetaSpec::Offset(d);
        }
        let mut betas = match &file.betas {
            Some(v) => v.iter().map(beta_from_input).collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        if let Some(v) = &o.betas {
            betas = v.iter().map(|s| parse_beta(s, &geometry)).collect::<Result<Vec<_>>>()?;
        }
        let output_dir = o
            .out
            .clone()
            .or(file.output_dir.clone())
            .or_else(|| std::env::var_os("CALABI_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("calabi_out"));
        let theta = o.theta.or(file.theta).unwrap_or_else(|| default_theta(&geometry));
        let margin = o.margin.or(file.margin).unwrap_or(10.0);
        if !(margin > 0.0) {
            return Err(InputError::new(format!("margin = {margin} must be positive")).into());
        }
        Ok(RunConfig {
            beta,
            betas,
            theta,
            eta: o.eta.or(file.eta).unwrap_or(0.0),
            etas: o.etas.clone().or(file.etas.clone()).unwrap_or_default(),
            margin,
            tolerances: file.tolerances.unwrap_or_default(),
            output_dir,
            format: o.format.or(file.format).unwrap_or(Format::Both),
            normalization: o.normalization.or(file.normalization).map(Normalization::from),
            geometry,
        })
    }
}
