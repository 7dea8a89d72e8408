//! Projected variational quantum dynamics.
//!
//! The ansatz is `k` layers of part exponentials with one parameter per part
//! per layer. Parameters are laid out layer by layer; within a layer the
//! pure theory uses `[θ_B, θ_E]` and the eliminated theory
//! `[θ_B, θ_E, θ_V, θ_M, θ_H]`. Inside a layer the parts are applied in
//! reverse of that order (H_E first for the pure theory, H_H first for the
//! eliminated one), and the first layer is applied first.
//!
//! Each step maximises |⟨U(θ)ψ₀| V(δ) U(θ_prev)ψ₀⟩|² where `V(δ)` is one
//! layer with every parameter set to δ, i.e. a first-order Trotter step.

use crate::circuit::{part_schedule, Circuit, Mode, Term};
use crate::error::{Error, Result};
use crate::hamiltonians::{gauss_op, plaquette_x4, plaquette_y2x2z2, Couplings, Part, Theory};
use crate::lattice::LatticeGeometry;
use crate::pauli::{PauliString, PauliSum};
use crate::simulator::{expval, fidelity, ExactPropagator, StateVector};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvqdConfig {
    pub k: usize,
    /// Absolute time step.
    pub delta: f64,
    pub n_steps: usize,
    pub theory: Theory,
    pub grad_eps: f64,
    /// Target infidelity per step.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    #[serde(default)]
    pub order: PartOrder,
}

/// Which end of a layer acts on the state first.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartOrder {
    /// A layer is the operator product `e^{−iθ_B H_B}·e^{−iθ_E H_E}…`, so
    /// the rightmost factor acts first. A one-layer ansatz at δ is the
    /// Trotter step.
    #[default]
    Product,
    /// Parts act in the order they are listed, H_B first.
    Listed,
}

impl std::str::FromStr for PartOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "product" => Ok(PartOrder::Product),
            "listed" => Ok(PartOrder::Listed),
            _ => Err(Error::InvalidArgument(format!("unknown part order '{s}'"))),
        }
    }
}

impl Default for PvqdConfig {
    fn default() -> Self {
        PvqdConfig {
            k: 2,
            delta: 0.1,
            n_steps: 20,
            theory: Theory::Pure,
            grad_eps: 1e-4,
            tol: 1e-8,
            max_iters: 500,
            seed: 0,
            order: PartOrder::Product,
        }
    }
}

impl PvqdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err(Error::InvalidArgument("delta must be positive".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument("tol must lie in (0,1)".into()));
        }
        if self.grad_eps.is_nan() || self.grad_eps <= 0.0 {
            return Err(Error::InvalidArgument("grad_eps must be positive".into()));
        }
        if self.theory == Theory::Vc {
            return Err(Error::InvalidArgument("pVQD supports the pure and eliminated theories".into()));
        }
        Ok(())
    }
}

/// Parts in parameter order within one layer.
pub fn layer_parts(theory: Theory) -> &'static [Part] {
    match theory {
        Theory::Pure => &[Part::Magnetic, Part::Electric],
        _ => &[Part::Magnetic, Part::Electric, Part::HopV, Part::Mass, Part::HopH],
    }
}

pub fn num_params(theory: Theory, k: usize) -> usize {
    layer_parts(theory).len() * k
}

/// The ansatz as a flat list of `exp(−i·θ[param]·coeff·string)` factors in
/// application order.
#[derive(Debug, Clone)]
pub struct Program {
    n: usize,
    n_params: usize,
    ops: Vec<(usize, Term)>,
    parts: Vec<(usize, crate::circuit::Schedule)>,
}

impl Program {
    pub fn new(theory: Theory, geom: &LatticeGeometry, c: &Couplings, k: usize, order: PartOrder) -> Program {
        let per_layer = layer_parts(theory);
        let scheds: Vec<_> = per_layer.iter().map(|&p| part_schedule(theory, geom, c, p)).collect();
        let mut ops = Vec::new();
        let mut parts = Vec::new();
        let idxs: Vec<usize> = match order {
            PartOrder::Product => (0..per_layer.len()).rev().collect(),
            PartOrder::Listed => (0..per_layer.len()).collect(),
        };
        for layer in 0..k {
            for &idx in &idxs {
                let param = layer * per_layer.len() + idx;
                for t in scheds[idx].terms() {
                    ops.push((param, t.clone()));
                }
                parts.push((param, scheds[idx].clone()));
            }
        }
        Program { n: theory.num_qubits(geom), n_params: per_layer.len() * k, ops, parts }
    }

    pub fn num_params(&self) -> usize {
        self.n_params
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::BadParameterCount { expected: self.n_params, got: theta.len() });
        }
        Ok(())
    }

    pub fn apply(&self, psi: &mut StateVector, theta: &[f64]) -> Result<()> {
        self.check(theta)?;
        for (p, t) in &self.ops {
            psi.apply_pauli_exp(&t.string, theta[*p] * t.coeff);
        }
        Ok(())
    }

    pub fn circuit(&self, theta: &[f64]) -> Result<Circuit> {
        self.check(theta)?;
        let mut c = Circuit::new(self.n);
        for (p, s) in &self.parts {
            c.append(&s.compile(theta[*p], Mode::Naive).circuit)?;
        }
        Ok(c)
    }
}

/// Ansatz circuit for parameters `theta`.
pub fn ansatz(geom: &LatticeGeometry, c: &Couplings, theta: &[f64], k: usize, theory: Theory) -> Result<Circuit> {
    Program::new(theory, geom, c, k, PartOrder::Product).circuit(theta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub theta: Vec<f64>,
    /// 1 − |overlap|² at `theta`.
    pub cost: f64,
    pub iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvqdStep {
    pub step: usize,
    pub time: f64,
    pub theta: Vec<f64>,
    pub cost: f64,
    pub iters: usize,
    pub converged: bool,
    pub plaquette: f64,
    pub occupation: Option<f64>,
    pub fid_trotter: f64,
    pub fid_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvqdTrace {
    pub config: PvqdConfig,
    pub couplings: Couplings,
    pub lattice: (usize, usize),
    pub steps: Vec<PvqdStep>,
}

impl PvqdTrace {
    pub fn all_converged(&self) -> bool {
        self.steps.iter().all(|s| s.converged)
    }
}

/// Plaquette observable at `(0,0)` in the given encoding.
pub fn plaquette_observable(theory: Theory, geom: &LatticeGeometry) -> PauliString {
    match theory {
        Theory::Full => plaquette_y2x2z2(geom, 0, 0),
        _ => plaquette_x4(geom, theory.num_qubits(geom), 0, 0),
    }
}

/// Occupation `(1 − G)/2` of the site `(x,y)` in the eliminated encoding.
pub fn occupation_observable(geom: &LatticeGeometry, x: i64, y: i64) -> PauliSum {
    PauliSum::from_terms(geom.num_links(), [(-0.5, gauss_op(geom, x, y))], 0.5).unwrap()
}

/// Driver holding everything a trajectory needs.
pub struct Pvqd {
    pub cfg: PvqdConfig,
    pub couplings: Couplings,
    pub geom: LatticeGeometry,
    ansatz: Program,
    step: Program,
    psi0: StateVector,
}

impl Pvqd {
    pub fn new(cfg: PvqdConfig, couplings: Couplings, geom: LatticeGeometry) -> Result<Pvqd> {
        cfg.validate()?;
        let n = cfg.theory.num_qubits(&geom);
        if n > 16 {
            return Err(Error::TooManyQubits { n, limit: 16 });
        }
        Ok(Pvqd {
            ansatz: Program::new(cfg.theory, &geom, &couplings, cfg.k, cfg.order),
            step: Program::new(cfg.theory, &geom, &couplings, 1, PartOrder::Product),
            psi0: StateVector::zero(n),
            cfg,
            couplings,
            geom,
        })
    }

    pub fn num_params(&self) -> usize {
        self.ansatz.num_params()
    }

    pub fn state(&self, theta: &[f64]) -> Result<StateVector> {
        let mut psi = self.psi0.clone();
        self.ansatz.apply(&mut psi, theta)?;
        Ok(psi)
    }

    /// V(δ)·ψ.
    pub fn trotter_step(&self, psi: &mut StateVector) {
        let d = vec![self.cfg.delta; self.step.num_params()];
        self.step.apply(psi, &d).unwrap();
    }

    /// Circuit of one reference Trotter step.
    pub fn trotter_circuit(&self) -> Circuit {
        self.step.circuit(&vec![self.cfg.delta; self.step.num_params()]).unwrap()
    }

    /// Parameters that reproduce as much of one Trotter step from ψ₀ as the
    /// ansatz allows: each part of the step, in the order it acts, takes the
    /// next free slot of the same part. With `PartOrder::Product` this is
    /// the first layer at δ and the rest at zero.
    pub fn trotter_embedding(&self) -> Vec<f64> {
        let per = layer_parts(self.cfg.theory).len();
        let mut th = vec![0.0; self.num_params()];
        let mut slots = self.ansatz.parts.iter().map(|(p, _)| *p);
        for (want, _) in &self.step.parts {
            if let Some(p) = slots.by_ref().find(|p| p % per == *want) {
                th[p] = self.cfg.delta;
            }
        }
        th
    }

    fn target(&self, theta_prev: &[f64]) -> Result<StateVector> {
        let mut t = self.state(theta_prev)?;
        self.trotter_step(&mut t);
        Ok(t)
    }

    /// |⟨ψ₀|U†(θ_new)·V(δ)·U(θ_prev)|ψ₀⟩|².
    pub fn step_overlap(&self, theta_prev: &[f64], theta_new: &[f64]) -> Result<f64> {
        fidelity(&self.state(theta_new)?, &self.target(theta_prev)?)
    }

    /// Maximises the step overlap from `start` using central-difference
    /// gradients and an Armijo backtracking line search.
    pub fn optimize_from(&self, theta_prev: &[f64], start: &[f64], rng: &mut ChaCha8Rng) -> Result<StepResult> {
        let target = self.target(theta_prev)?;
        let f = |th: &[f64]| -> f64 { fidelity(&self.state(th).unwrap(), &target).unwrap() };
        let grad = |th: &[f64]| -> Vec<f64> {
            let h = self.cfg.grad_eps;
            (0..th.len())
                .into_par_iter()
                .map(|i| {
                    let mut p = th.to_vec();
                    p[i] += h;
                    let fp = f(&p);
                    p[i] -= 2.0 * h;
                    (fp - f(&p)) / (2.0 * h)
                })
                .collect()
        };
        self.ansatz.check(start)?;
        let mut theta = start.to_vec();
        let mut val = f(&theta);
        let mut g = grad(&theta);
        if norm(&g) < 1e-10 && 1.0 - val > self.cfg.tol {
            for t in theta.iter_mut() {
                *t += rng.random_range(-1e-3..=1e-3);
            }
            val = f(&theta);
            g = grad(&theta);
        }
        // Quasi-Newton ascent: the direction is H·g with H a BFGS estimate of
        // the inverse negative Hessian, reset to the identity whenever it
        // stops giving an ascent direction.
        let dim = theta.len();
        let mut hinv = DMatrix::<f64>::identity(dim, dim);
        let mut iters = 0;
        while iters < self.cfg.max_iters && 1.0 - val > self.cfg.tol {
            iters += 1;
            let gv = DVector::from_column_slice(&g);
            let mut dir = &hinv * &gv;
            let mut slope = dir.dot(&gv);
            if slope.is_nan() || slope <= 0.0 {
                hinv.fill_with_identity();
                dir = gv.clone();
                slope = dir.dot(&gv);
            }
            if slope == 0.0 {
                break;
            }
            let mut accepted = None;
            let mut a = 1.0;
            for _ in 0..60 {
                let trial: Vec<f64> = theta.iter().zip(dir.iter()).map(|(t, d)| t + a * d).collect();
                let fv = f(&trial);
                if fv >= val + 1e-4 * a * slope {
                    accepted = Some((trial, fv));
                    break;
                }
                a *= 0.5;
            }
            let Some((trial, fv)) = accepted else { break };
            let g_new = grad(&trial);
            let step = DVector::from_iterator(dim, trial.iter().zip(&theta).map(|(n, o)| n - o));
            // Curvature of the cost 1 − f.
            let dg = DVector::from_iterator(dim, g.iter().zip(&g_new).map(|(o, n)| o - n));
            let sy = step.dot(&dg);
            if sy > 1e-14 {
                let rho = 1.0 / sy;
                let eye = DMatrix::<f64>::identity(dim, dim);
                let left = &eye - rho * &step * dg.transpose();
                let right = &eye - rho * &dg * step.transpose();
                hinv = left * &hinv * right + rho * &step * step.transpose();
            }
            theta = trial;
            val = fv;
            g = g_new;
        }
        let cost = 1.0 - val;
        Ok(StepResult { theta, cost, iters, converged: cost <= self.cfg.tol })
    }

    /// One pVQD step warm-started from `theta_prev`.
    pub fn optimize_step(&self, theta_prev: &[f64], rng: &mut ChaCha8Rng) -> Result<StepResult> {
        self.optimize_from(theta_prev, theta_prev, rng)
    }

    pub fn run(&self) -> Result<PvqdTrace> {
        let theory = self.cfg.theory;
        let plaq =
            PauliSum::from_terms(self.psi0.num_qubits(), [(1.0, plaquette_observable(theory, &self.geom))], 0.0)?;
        let occ = (theory == Theory::Full).then(|| occupation_observable(&self.geom, 0, 0));
        let h = crate::hamiltonians::build(theory, &self.geom, &self.couplings).total()?;
        let exact = ExactPropagator::new(&h)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);

        let record = |step: usize, res: &StepResult, psi: &StateVector, trotter: &StateVector| -> Result<PvqdStep> {
            let t = step as f64 * self.cfg.delta;
            Ok(PvqdStep {
                step,
                time: t,
                theta: res.theta.clone(),
                cost: res.cost,
                iters: res.iters,
                converged: res.converged,
                plaquette: expval(psi, &plaq)?,
                occupation: occ.as_ref().map(|o| expval(psi, o)).transpose()?,
                fid_trotter: fidelity(psi, trotter)?,
                fid_exact: fidelity(psi, &exact.evolve(&self.psi0, t)?)?,
            })
        };

        let zero = StepResult { theta: vec![0.0; self.num_params()], cost: 0.0, iters: 0, converged: true };
        let mut trotter = self.psi0.clone();
        let mut steps = vec![record(0, &zero, &self.psi0, &trotter)?];
        let mut theta = zero.theta.clone();
        for i in 1..=self.cfg.n_steps {
            let res = if i == 1 {
                self.optimize_from(&theta, &self.trotter_embedding(), &mut rng)?
            } else {
                self.optimize_step(&theta, &mut rng)?
            };
            self.trotter_step(&mut trotter);
            let psi = self.state(&res.theta)?;
            steps.push(record(i, &res, &psi, &trotter)?);
            theta = res.theta;
        }
        Ok(PvqdTrace {
            config: self.cfg.clone(),
            couplings: self.couplings,
            lattice: (self.geom.m(), self.geom.n()),
            steps,
        })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Convenience wrapper: |⟨ψ₀|U†(θ_new)·V(δ)·U(θ_prev)|ψ₀⟩|² on |0…0⟩.
pub fn step_overlap(
    geom: &LatticeGeometry,
    c: &Couplings,
    cfg: &PvqdConfig,
    theta_prev: &[f64],
    theta_new: &[f64],
) -> Result<f64> {
    Pvqd::new(cfg.clone(), *c, *geom)?.step_overlap(theta_prev, theta_new)
}

pub fn run_pvqd(cfg: &PvqdConfig, c: &Couplings, geom: &LatticeGeometry) -> Result<PvqdTrace> {
    Pvqd::new(cfg.clone(), *c, *geom)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, cx_count, trotter_step_pure};
    use crate::lattice::make_lattice;
    use crate::linalg::{phase_insensitive_overlap, CMat};
    use crate::simulator::apply_circuit;

    fn g22() -> LatticeGeometry {
        make_lattice(2, 2).unwrap()
    }

    fn pure_cfg(k: usize, delta: f64) -> PvqdConfig {
        PvqdConfig { k, delta, theory: Theory::Pure, ..PvqdConfig::default() }
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(num_params(Theory::Full, 2), 10);
        assert_eq!(num_params(Theory::Pure, 3), 6);
        let g = g22();
        let err = ansatz(&g, &Couplings::default(), &[0.1; 3], 2, Theory::Pure).unwrap_err();
        assert_eq!(err, Error::BadParameterCount { expected: 4, got: 3 });
    }

    #[test]
    fn single_layer_is_the_trotter_step() {
        let g = g22();
        let c = Couplings::from_g(1.0);
        let d = 0.2;
        assert_eq!(ansatz(&g, &c, &[d, d], 1, Theory::Pure).unwrap(), trotter_step_pure(&g, &c, d));
    }

    #[test]
    fn zero_parameters_give_identity() {
        let g = g22();
        for theory in [Theory::Pure, Theory::Full] {
            let c = Couplings::default();
            let circ = ansatz(&g, &c, &vec![0.0; num_params(theory, 2)], 2, theory).unwrap();
            let ov = phase_insensitive_overlap(&circuit_unitary(&circ).unwrap(), &CMat::identity(256, 256));
            assert!(ov >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn program_matches_circuit() {
        let g = g22();
        let c = Couplings::default();
        for theory in [Theory::Pure, Theory::Full] {
            let p = Program::new(theory, &g, &c, 2, PartOrder::Product);
            let theta: Vec<f64> = (0..p.num_params()).map(|i| 0.1 + 0.07 * i as f64).collect();
            let mut a = StateVector::zero(8);
            p.apply(&mut a, &theta).unwrap();
            let b = apply_circuit(&StateVector::zero(8), &p.circuit(&theta).unwrap()).unwrap();
            assert!((fidelity(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn depth_does_not_depend_on_parameters() {
        let g = g22();
        let c = Couplings::default();
        let a = ansatz(&g, &c, &[0.1; 10], 2, Theory::Full).unwrap();
        let b = ansatz(&g, &c, &[2.3; 10], 2, Theory::Full).unwrap();
        assert_eq!(cx_count(&a), cx_count(&b));
    }

    #[test]
    fn overlap_limits() {
        let g = g22();
        let c = Couplings::from_g(1.0);
        let tiny = Pvqd::new(pure_cfg(2, 1e-12), c, g).unwrap();
        let th = [0.3, -0.2, 0.5, 0.1];
        assert!((tiny.step_overlap(&th, &th).unwrap() - 1.0).abs() < 1e-10);
        let p = Pvqd::new(pure_cfg(1, 0.2), c, g).unwrap();
        assert!((p.step_overlap(&[0.0, 0.0], &[0.2, 0.2]).unwrap() - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = Pvqd::new(pure_cfg(2, 0.2), c, g).unwrap();
        for _ in 0..100 {
            let a: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let v = q.step_overlap(&a, &b).unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn gradient_vanishes_at_the_embedding() {
        let g = g22();
        let p = Pvqd::new(pure_cfg(1, 0.2), Couplings::from_g(1.0), g).unwrap();
        let h = 1e-4;
        let emb = p.trotter_embedding();
        for i in 0..2 {
            let mut a = emb.clone();
            a[i] += h;
            let mut b = emb.clone();
            b[i] -= h;
            let gi = (p.step_overlap(&[0.0, 0.0], &a).unwrap() - p.step_overlap(&[0.0, 0.0], &b).unwrap()) / (2.0 * h);
            assert!(gi.abs() < 1e-8);
        }
    }

    #[test]
    fn optimizer_reaches_tolerance() {
        let g = g22();
        let c = Couplings::from_g(1.0);
        let cfg = PvqdConfig { tol: 1e-6, max_iters: 200, ..pure_cfg(2, 0.05 / c.lambda_e) };
        let p = Pvqd::new(cfg, c, g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let first = p.optimize_from(&[0.0; 4], &p.trotter_embedding(), &mut rng).unwrap();
        assert!(first.converged);
        let second = p.optimize_step(&first.theta, &mut rng).unwrap();
        assert!(second.converged, "{second:?}");
        assert!(second.cost < 1e-6);
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let g = g22();
        let c = Couplings::from_g(1.0);
        let cfg = PvqdConfig { tol: 1e-15, max_iters: 1, ..pure_cfg(2, 0.3) };
        let p = Pvqd::new(cfg, c, g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let start = [0.3, 0.3, 0.1, 0.0];
        let res = p.optimize_step(&start, &mut rng).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iters, 1);
        assert!(1.0 - res.cost >= p.step_overlap(&start, &start).unwrap());
    }

    #[test]
    fn empty_trajectory() {
        let cfg = PvqdConfig { n_steps: 0, ..pure_cfg(2, 0.1) };
        let tr = run_pvqd(&cfg, &Couplings::from_g(1.0), &g22()).unwrap();
        assert_eq!(tr.steps.len(), 1);
        assert_eq!(tr.steps[0].fid_trotter, 1.0);
        assert_eq!(tr.steps[0].plaquette, 0.0);
    }

    #[test]
    fn short_trajectory_tracks_trotter() {
        // With H_B acting first the two-layer ansatz holds the Trotter
        // trajectory exactly.
        let c = Couplings::from_g(1.0);
        let cfg = PvqdConfig { n_steps: 4, order: PartOrder::Listed, ..pure_cfg(2, 0.1 / c.lambda_e) };
        let tr = run_pvqd(&cfg, &c, &g22()).unwrap();
        assert!(tr.all_converged());
        for s in &tr.steps {
            assert!(1.0 - s.fid_trotter < 1e-6, "{s:?}");
            assert_eq!(s.theta.len(), 4);
        }
    }

    #[test]
    fn product_order_loses_the_trotter_state() {
        // In product order the first layer's H_E acts on |0...0>, where it is
        // a phase, so the ansatz falls behind after a few steps.
        let c = Couplings::from_g(1.0);
        let cfg = PvqdConfig { n_steps: 4, max_iters: 100, ..pure_cfg(2, 0.1 / c.lambda_e) };
        let tr = run_pvqd(&cfg, &c, &g22()).unwrap();
        assert!(1.0 - tr.steps[1].fid_trotter < 1e-6);
        assert!(1.0 - tr.steps[4].fid_trotter > 1e-4, "{:?}", tr.steps[4]);
    }

    #[test]
    fn listed_embedding_has_unit_overlap() {
        let c = Couplings::default();
        // Listed layers hold the reversed step only once there is a layer per part.
        for (theory, k) in [(Theory::Pure, 2), (Theory::Full, 5)] {
            let cfg = PvqdConfig { k, delta: 0.1, theory, order: PartOrder::Listed, ..PvqdConfig::default() };
            let p = Pvqd::new(cfg, c, g22()).unwrap();
            let zero = vec![0.0; p.num_params()];
            assert!(p.step_overlap(&zero, &p.trotter_embedding()).unwrap() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn part_order_parses() {
        assert_eq!("listed".parse::<PartOrder>().unwrap(), PartOrder::Listed);
        assert_eq!("product".parse::<PartOrder>().unwrap(), PartOrder::Product);
        assert!("reversed".parse::<PartOrder>().is_err());
    }

    #[test]
    fn full_theory_occupation_starts_empty() {
        let c = Couplings::default();
        let cfg = PvqdConfig { n_steps: 1, theory: Theory::Full, ..pure_cfg(2, 0.1) };
        let tr = run_pvqd(&cfg, &c, &g22()).unwrap();
        assert_eq!(tr.steps[0].occupation, Some(0.0));
        assert_eq!(tr.steps[1].theta.len(), 10);
        assert!(tr.steps[1].converged);
    }
}
