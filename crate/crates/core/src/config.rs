//! Experiment configuration read from TOML.
//!
//! Every field has a default, so an empty file is a valid configuration:
//! a 2×2 pure-gauge Trotter run at g = 1 for 20 steps.

use crate::circuit::Mode;
use crate::error::{Error, Result};
use crate::hamiltonians::{Couplings, Theory};
use crate::lattice::LatticeGeometry;
use crate::pvqd::{PartOrder, PvqdConfig};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeSize,
    pub theory: Theory,
    pub mode: Mode,
    pub seed: u64,
    pub couplings: Couplings,
    pub evolution: Evolution,
    pub pvqd: Option<PvqdSettings>,
    pub observables: Vec<Observable>,
    pub output: Output,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lattice: LatticeSize::default(),
            theory: Theory::Pure,
            mode: Mode::Optimized,
            seed: 0,
            couplings: Couplings::from_g(1.0),
            evolution: Evolution::default(),
            pvqd: None,
            observables: vec![Observable::Plaquette(0, 0), Observable::GaussMin, Observable::FidelityVsExact],
            output: Output::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSize {
    pub m: usize,
    pub n: usize,
}

impl Default for LatticeSize {
    fn default() -> Self {
        LatticeSize { m: 2, n: 2 }
    }
}

impl FromStr for LatticeSize {
    type Err = Error;
    /// `"4x2"` → m = 4, n = 2.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("lattice must look like 2x2, got '{s}'"));
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        Ok(LatticeSize { m: a.trim().parse().map_err(|_| bad())?, n: b.trim().parse().map_err(|_| bad())? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Trotter,
    Exact,
    Pvqd,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "trotter" => Ok(Method::Trotter),
            "exact" => Ok(Method::Exact),
            "pvqd" => Ok(Method::Pvqd),
            _ => Err(Error::InvalidArgument(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Evolution {
    /// Absolute time step.
    pub delta: f64,
    pub n_steps: usize,
    pub method: Method,
}

impl Default for Evolution {
    fn default() -> Self {
        Evolution { delta: 0.2, n_steps: 20, method: Method::Trotter }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PvqdSettings {
    pub k: usize,
    pub tol: f64,
    pub grad_eps: f64,
    pub max_iters: usize,
    pub order: PartOrder,
}

impl Default for PvqdSettings {
    fn default() -> Self {
        let d = PvqdConfig::default();
        PvqdSettings { k: d.k, tol: d.tol, grad_eps: d.grad_eps, max_iters: d.max_iters, order: d.order }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    /// Stdout when absent.
    pub path: Option<String>,
    pub format: Format,
}

/// A recorded quantity. Written in config files as `plaquette(0,0)`,
/// `occupation(1,0)`, `gauss(0,1)`, `gauss_min`, `energy`, `fid_vs_exact`
/// or `fid_vs_trotter`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Plaquette(i64, i64),
    Occupation(i64, i64),
    Gauss(i64, i64),
    GaussMin,
    Energy,
    FidelityVsExact,
    FidelityVsTrotter,
}

impl Observable {
    /// CSV column name.
    pub fn column(&self) -> String {
        match self {
            Observable::Plaquette(x, y) => format!("plaq_{x}_{y}"),
            Observable::Occupation(x, y) => format!("occ_{x}_{y}"),
            Observable::Gauss(x, y) => format!("gauss_{x}_{y}"),
            Observable::GaussMin => "gauss_min".into(),
            Observable::Energy => "energy".into(),
            Observable::FidelityVsExact => "fid_vs_exact".into(),
            Observable::FidelityVsTrotter => "fid_vs_trotter".into(),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Plaquette(x, y) => write!(f, "plaquette({x},{y})"),
            Observable::Occupation(x, y) => write!(f, "occupation({x},{y})"),
            Observable::Gauss(x, y) => write!(f, "gauss({x},{y})"),
            other => f.write_str(&other.column()),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::InvalidArgument(format!("unknown observable '{s}'"));
        match s.as_str() {
            "gauss_min" => return Ok(Observable::GaussMin),
            "energy" => return Ok(Observable::Energy),
            "fid_vs_exact" => return Ok(Observable::FidelityVsExact),
            "fid_vs_trotter" => return Ok(Observable::FidelityVsTrotter),
            _ => {}
        }
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let (x, y) = args.split_once(',').ok_or_else(bad)?;
        let x: i64 = x.trim().parse().map_err(|_| bad())?;
        let y: i64 = y.trim().parse().map_err(|_| bad())?;
        match name.trim() {
            "plaquette" => Ok(Observable::Plaquette(x, y)),
            "occupation" => Ok(Observable::Occupation(x, y)),
            "gauss" => Ok(Observable::Gauss(x, y)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Observable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|r| text[..r.start].lines().count().max(1)).unwrap_or(0);
            Error::Parse { line, msg: e.message().to_string() }
        })?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn geometry(&self) -> Result<LatticeGeometry> {
        LatticeGeometry::new(self.lattice.m, self.lattice.n)
    }

    pub fn num_qubits(&self) -> Result<usize> {
        Ok(self.theory.num_qubits(&self.geometry()?))
    }

    /// Checks the cross-field rules that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        if self.evolution.method == Method::Pvqd {
            if self.pvqd.is_none() {
                return Err(Error::InvalidArgument("method = \"pvqd\" needs a [pvqd] section".into()));
            }
            self.pvqd_config()?.validate()?;
        }
        for o in &self.observables {
            match o {
                Observable::Occupation(..) if self.theory == Theory::Pure => {
                    return Err(Error::InvalidArgument("the pure theory has no occupation observable".into()))
                }
                Observable::Plaquette(x, y) | Observable::Occupation(x, y) | Observable::Gauss(x, y)
                    if *x < 0 || *y < 0 || *x >= self.lattice.m as i64 || *y >= self.lattice.n as i64 =>
                {
                    return Err(Error::InvalidArgument(format!("{o} is outside the lattice")))
                }
                _ => {}
            }
        }
        if !(self.evolution.delta.is_finite()) {
            return Err(Error::InvalidArgument("delta must be finite".into()));
        }
        Ok(())
    }

    pub fn pvqd_config(&self) -> Result<PvqdConfig> {
        let p = self.pvqd.ok_or_else(|| Error::InvalidArgument("missing [pvqd] section".into()))?;
        Ok(PvqdConfig {
            k: p.k,
            delta: self.evolution.delta,
            n_steps: self.evolution.n_steps,
            theory: self.theory,
            grad_eps: p.grad_eps,
            tol: p.tol,
            max_iters: p.max_iters,
            seed: self.seed,
            order: p.order,
        })
    }
}
