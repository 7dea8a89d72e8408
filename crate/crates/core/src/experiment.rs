//! Runs configured experiments and renders their results as CSV or JSON.

use crate::circuit::{fmt_sig, trotter_step};
use crate::config::{ExperimentConfig, Format, Method, Observable};
use crate::error::{Error, Result};
use crate::hamiltonians::{build, gauss_law_op, plaquette_x4, plaquette_y2x2z2, vc_matter, Theory};
use crate::lattice::LatticeGeometry;
use crate::pauli::{PauliString, PauliSum};
use crate::pvqd::{occupation_observable, Pvqd, PvqdTrace};
use crate::simulator::{expval, fidelity, ExactPropagator, StateVector, STATE_LIMIT};
use serde_json::{json, Map, Value};
use std::fmt::Write as _;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => fmt_sig(*x, 12),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Real(x) => json!(x),
            Cell::Flag(b) => json!(b),
        }
    }
}

/// One row per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn real_column(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .map(|c| match c {
                Cell::Real(x) => Some(x),
                Cell::Int(i) => Some(i as f64),
                Cell::Flag(_) => None,
            })
            .collect()
    }
}

/// Result of an `evolve` or `pvqd` run.
#[derive(Debug, Clone)]
pub struct Report {
    pub config: ExperimentConfig,
    pub table: Table,
    pub trace: Option<PvqdTrace>,
}

impl Report {
    pub fn all_converged(&self) -> bool {
        self.trace.as_ref().is_none_or(|t| t.all_converged())
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Header lines starting with `#`, then a header row and the data rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "# z2lgt {VERSION}").unwrap();
        writeln!(out, "# seed = {}", self.config.seed).unwrap();
        writeln!(out, "# config:").unwrap();
        for line in self.config.to_toml()?.lines().filter(|l| !l.is_empty()) {
            writeln!(out, "#   {line}").unwrap();
        }
        writeln!(out, "{}", self.table.columns.join(",")).unwrap();
        for row in &self.table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let steps: Vec<Value> = self
            .table
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.table.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        let mut obj = json!({
            "tool": format!("z2lgt {VERSION}"),
            "seed": self.config.seed,
            "config": serde_json::to_value(&self.config).map_err(|e| Error::InvalidArgument(e.to_string()))?,
            "steps": steps,
        });
        if let Some(t) = &self.trace {
            obj["trace"] = serde_json::to_value(t).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        serde_json::to_string_pretty(&obj).map(|s| s + "\n").map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

/// Plaquette string at `(x,y)` in the given encoding.
pub fn plaquette_string(theory: Theory, geom: &LatticeGeometry, x: i64, y: i64) -> PauliString {
    match theory {
        Theory::Full => plaquette_y2x2z2(geom, x, y),
        _ => plaquette_x4(geom, theory.num_qubits(geom), x, y),
    }
}

/// Occupation `n(x,y)` with `n = 1` meaning a fermion present.
pub fn occupation_op(theory: Theory, geom: &LatticeGeometry, x: i64, y: i64) -> Result<PauliSum> {
    match theory {
        Theory::Pure => Err(Error::InvalidArgument("the pure theory has no matter".into())),
        Theory::Full => Ok(occupation_observable(geom, x, y)),
        Theory::Vc => {
            let n = theory.num_qubits(geom);
            let z = PauliString::single(n, vc_matter(geom, x, y), crate::pauli::Axis::Z);
            PauliSum::from_terms(n, [(-0.5, z)], 0.5)
        }
    }
}

fn single(s: PauliString) -> PauliSum {
    let n = s.num_qubits();
    PauliSum::from_terms(n, [(1.0, s)], 0.0).unwrap()
}

/// Evaluates observables on a sequence of states.
struct Probe<'a> {
    cfg: &'a ExperimentConfig,
    geom: LatticeGeometry,
    ops: Vec<Option<PauliSum>>,
    gauss: Vec<PauliSum>,
    energy: PauliSum,
}

impl<'a> Probe<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        let geom = cfg.geometry()?;
        let t = cfg.theory;
        let ops = cfg
            .observables
            .iter()
            .map(|o| {
                Ok(match *o {
                    Observable::Plaquette(x, y) => Some(single(plaquette_string(t, &geom, x, y))),
                    Observable::Occupation(x, y) => Some(occupation_op(t, &geom, x, y)?),
                    Observable::Gauss(x, y) => Some(single(gauss_law_op(t, &geom, x, y))),
                    _ => None,
                })
            })
            .collect::<Result<_>>()?;
        let gauss = geom.vertices().map(|(x, y)| single(gauss_law_op(t, &geom, x, y))).collect();
        let energy = build(t, &geom, &cfg.couplings).total()?;
        Ok(Probe { cfg, geom, ops, gauss, energy })
    }

    fn row(&self, psi: &StateVector, exact: Option<&StateVector>, trotter: Option<f64>) -> Result<Vec<Cell>> {
        let mut row = Vec::new();
        for (o, op) in self.cfg.observables.iter().zip(&self.ops) {
            let v = match o {
                Observable::GaussMin => {
                    let mut m = f64::INFINITY;
                    for g in &self.gauss {
                        m = m.min(expval(psi, g)?);
                    }
                    m
                }
                Observable::Energy => expval(psi, &self.energy)?,
                Observable::FidelityVsExact => fidelity(psi, exact.expect("exact state requested"))?,
                Observable::FidelityVsTrotter => trotter.expect("trotter fidelity requested"),
                _ => expval(psi, op.as_ref().unwrap())?,
            };
            row.push(Cell::Real(v));
        }
        Ok(row)
    }
}

/// Runs `cfg.evolution` from |0…0⟩ and records the configured observables.
pub fn run_evolution(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let n = cfg.num_qubits()?;
    if n > STATE_LIMIT {
        return Err(Error::TooManyQubits { n, limit: STATE_LIMIT });
    }
    let probe = Probe::new(cfg)?;
    let geom = probe.geom;
    let ev = cfg.evolution;
    let needs_exact = ev.method == Method::Exact || cfg.observables.contains(&Observable::FidelityVsExact);
    let exact = if needs_exact { Some(ExactPropagator::new(&probe.energy)?) } else { None };
    let psi0 = StateVector::zero(n);
    let mut columns = vec!["step".to_string(), "t".to_string()];
    if ev.method == Method::Pvqd {
        columns.extend(["cost", "iters", "converged"].map(String::from));
    }
    columns.extend(cfg.observables.iter().map(Observable::column));
    let mut rows = Vec::new();
    let mut trace = None;

    match ev.method {
        Method::Trotter | Method::Exact => {
            let step = trotter_step(cfg.theory, &geom, &cfg.couplings, ev.delta, cfg.mode);
            let mut trot = psi0.clone();
            for i in 0..=ev.n_steps {
                if i > 0 {
                    trot.apply_circuit(&step)?;
                }
                let t = i as f64 * ev.delta;
                let ex = exact.as_ref().map(|e| e.evolve(&psi0, t)).transpose()?;
                let psi = if ev.method == Method::Exact { ex.as_ref().unwrap() } else { &trot };
                let fid_trot = if ev.method == Method::Exact { fidelity(psi, &trot)? } else { 1.0 };
                let mut row = vec![Cell::Int(i as i64), Cell::Real(t)];
                row.extend(probe.row(psi, ex.as_ref(), Some(fid_trot))?);
                rows.push(row);
            }
        }
        Method::Pvqd => {
            let pv = Pvqd::new(cfg.pvqd_config()?, cfg.couplings, geom)?;
            let tr = pv.run()?;
            for s in &tr.steps {
                let psi = pv.state(&s.theta)?;
                let ex = exact.as_ref().map(|e| e.evolve(&psi0, s.time)).transpose()?;
                let mut row = vec![
                    Cell::Int(s.step as i64),
                    Cell::Real(s.time),
                    Cell::Real(s.cost),
                    Cell::Int(s.iters as i64),
                    Cell::Flag(s.converged),
                ];
                row.extend(probe.row(&psi, ex.as_ref(), Some(s.fid_trotter))?);
                rows.push(row);
            }
            trace = Some(tr);
        }
    }
    Ok(Report { config: cfg.clone(), table: Table { columns, rows }, trace })
}

/// Runs pVQD and tabulates the raw trace, one parameter per column.
pub fn run_pvqd_report(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let pc = cfg.pvqd_config()?;
    let tr = Pvqd::new(pc.clone(), cfg.couplings, cfg.geometry()?)?.run()?;
    let mut columns: Vec<String> =
        ["step", "t", "cost", "iters", "converged", "plaquette", "fid_vs_trotter", "fid_vs_exact"]
            .map(String::from)
            .into();
    if pc.theory == Theory::Full {
        columns.insert(6, "occupation".into());
    }
    let np = tr.steps.first().map_or(0, |s| s.theta.len());
    columns.extend((0..np).map(|i| format!("theta_{i}")));
    let rows = tr
        .steps
        .iter()
        .map(|s| {
            let mut r = vec![
                Cell::Int(s.step as i64),
                Cell::Real(s.time),
                Cell::Real(s.cost),
                Cell::Int(s.iters as i64),
                Cell::Flag(s.converged),
                Cell::Real(s.plaquette),
            ];
            if let Some(o) = s.occupation {
                r.push(Cell::Real(o));
            }
            r.push(Cell::Real(s.fid_trotter));
            r.push(Cell::Real(s.fid_exact));
            r.extend(s.theta.iter().map(|&x| Cell::Real(x)));
            r
        })
        .collect();
    Ok(Report { config: cfg.clone(), table: Table { columns, rows }, trace: Some(tr) })
}
