//! Statevector backend. Basis index bit `q` holds qubit `q` (little-endian).

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, HermitianEigen};
use crate::pauli::{expect_string, PauliString, PauliSum};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use std::io::{Read, Write};

/// Largest register handled by the dense exact solver.
pub const DENSE_LIMIT: usize = 12;
/// Largest register handled at all.
pub const STATE_LIMIT: usize = 20;

const KRYLOV_STEP_TOL: f64 = 1e-10;

type C = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C>,
}

impl StateVector {
    /// |0…0⟩.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[index] = C::new(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn from_amplitudes(amps: Vec<C>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("length {dim} is not a power of two")));
        }
        let s = StateVector { n: dim.trailing_zeros() as usize, amps };
        if (s.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("state norm {} is not 1", s.norm())));
        }
        Ok(s)
    }

    /// Haar-like random state from Gaussian amplitudes.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let mut amps: Vec<C> = (0..1usize << n)
            .map(|_| {
                let g = |r: &mut R| {
                    let u1: f64 = r.random::<f64>().max(1e-300);
                    let u2: f64 = r.random();
                    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                };
                C::new(g(rng), g(rng))
            })
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    fn apply_single(&mut self, q: usize, m: [[C; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        let o = C::new(0.0, 0.0);
        let l = C::new(1.0, 0.0);
        let i = C::new(0.0, 1.0);
        match *g {
            Gate::Rz(q, th) => {
                let bit = 1usize << q;
                let (p0, p1) = (C::from_polar(1.0, -th / 2.0), C::from_polar(1.0, th / 2.0));
                for (k, a) in self.amps.iter_mut().enumerate() {
                    *a *= if k & bit == 0 { p0 } else { p1 };
                }
            }
            Gate::Rx(q, th) => {
                let (c, s) = ((th / 2.0).cos(), (th / 2.0).sin());
                self.apply_single(q, [[l * c, -i * s], [-i * s, l * c]]);
            }
            Gate::Ry(q, th) => {
                let (c, s) = ((th / 2.0).cos(), (th / 2.0).sin());
                self.apply_single(q, [[l * c, -l * s], [l * s, l * c]]);
            }
            Gate::H(q) => {
                let h = l * std::f64::consts::FRAC_1_SQRT_2;
                self.apply_single(q, [[h, h], [h, -h]]);
            }
            Gate::X(q) => self.apply_single(q, [[o, l], [l, o]]),
            Gate::Y(q) => self.apply_single(q, [[o, -i], [i, o]]),
            Gate::Z(q) => self.apply_single(q, [[l, o], [o, -l]]),
            Gate::Cx(c, t) => {
                let (cb, tb) = (1usize << c, 1usize << t);
                for k in 0..self.amps.len() {
                    if k & cb != 0 && k & tb == 0 {
                        self.amps.swap(k, k | tb);
                    }
                }
            }
        }
    }

    pub fn apply_circuit(&mut self, circ: &Circuit) -> Result<()> {
        if circ.num_qubits() != self.n {
            return Err(Error::DimensionMismatch(self.n, circ.num_qubits()));
        }
        for g in circ.gates() {
            self.apply_gate(g);
        }
        Ok(())
    }

    /// ψ ← exp(−iφP)ψ = cos φ·ψ − i sin φ·Pψ.
    pub fn apply_pauli_exp(&mut self, p: &PauliString, phi: f64) {
        let mut tmp = vec![C::new(0.0, 0.0); self.amps.len()];
        p.apply(&self.amps, &mut tmp);
        let (c, s) = (phi.cos(), phi.sin());
        for (a, t) in self.amps.iter_mut().zip(&tmp) {
            *a = *a * c + C::new(0.0, -s) * t;
        }
    }

    /// Writes an 8-byte little-endian qubit count followed by the
    /// amplitudes as little-endian (re, im) doubles.
    pub fn dump<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load<R: Read>(r: &mut R) -> std::io::Result<StateVector> {
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        if n > STATE_LIMIT {
            return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "qubit count too large"));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for _ in 0..1usize << n {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            amps.push(C::new(re, f64::from_le_bytes(b8)));
        }
        Ok(StateVector { n, amps })
    }
}

pub fn apply_circuit(psi: &StateVector, circ: &Circuit) -> Result<StateVector> {
    let mut out = psi.clone();
    out.apply_circuit(circ)?;
    Ok(out)
}

pub fn expval(psi: &StateVector, h: &PauliSum) -> Result<f64> {
    if psi.num_qubits() != h.num_qubits() {
        return Err(Error::DimensionMismatch(psi.num_qubits(), h.num_qubits()));
    }
    let mut acc = h.constant();
    for (c, s) in h.terms() {
        acc += c * expect_string(psi, s)?;
    }
    Ok(acc)
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// exp(−iHt)ψ, dense for small registers and Lanczos above that.
pub fn exact_evolve(psi: &StateVector, h: &PauliSum, t: f64) -> Result<StateVector> {
    ExactPropagator::new(h)?.evolve(psi, t)
}

/// Reusable exact time evolution for one Hamiltonian.
pub enum ExactPropagator {
    Dense { n: usize, eig: HermitianEigen },
    Krylov { h: PauliSum },
}

impl ExactPropagator {
    pub fn new(h: &PauliSum) -> Result<Self> {
        let n = h.num_qubits();
        if n <= DENSE_LIMIT {
            Ok(ExactPropagator::Dense { n, eig: hermitian_eigen(&h.to_matrix()?) })
        } else if n <= STATE_LIMIT {
            Ok(ExactPropagator::Krylov { h: h.clone() })
        } else {
            Err(Error::TooManyQubits { n, limit: STATE_LIMIT })
        }
    }

    pub fn krylov(h: &PauliSum) -> Result<Self> {
        if h.num_qubits() > STATE_LIMIT {
            return Err(Error::TooManyQubits { n: h.num_qubits(), limit: STATE_LIMIT });
        }
        Ok(ExactPropagator::Krylov { h: h.clone() })
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        match self {
            ExactPropagator::Dense { n, eig } => {
                if psi.n != *n {
                    return Err(Error::DimensionMismatch(psi.n, *n));
                }
                Ok(StateVector { n: *n, amps: eig.evolve(&psi.amps, t) })
            }
            ExactPropagator::Krylov { h } => {
                if psi.n != h.num_qubits() {
                    return Err(Error::DimensionMismatch(psi.n, h.num_qubits()));
                }
                Ok(StateVector { n: psi.n, amps: krylov_evolve(h, &psi.amps, t)? })
            }
        }
    }
}

fn norm(v: &[C]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

struct Lanczos {
    basis: Vec<Vec<C>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    exhausted: bool,
}

impl Lanczos {
    fn start(v0: Vec<C>) -> Self {
        Lanczos { basis: vec![v0], alpha: Vec::new(), beta: Vec::new(), exhausted: false }
    }

    /// Grows the basis to `m` vectors, with full reorthogonalization.
    fn extend(&mut self, h: &PauliSum, m: usize) {
        let mut w = vec![C::new(0.0, 0.0); self.basis[0].len()];
        while !self.exhausted && self.alpha.len() < m {
            let j = self.alpha.len();
            h.apply(&self.basis[j], &mut w);
            let a = dot(&self.basis[j], &w).re;
            for _ in 0..2 {
                for v in &self.basis {
                    let c = dot(v, &w);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            self.alpha.push(a);
            let b = norm(&w);
            self.beta.push(b);
            if b < 1e-13 {
                self.exhausted = true;
            } else {
                self.basis.push(w.iter().map(|x| x / b).collect());
            }
        }
    }

    /// Coefficients of exp(−iτT)e₁ and the residual estimate.
    fn propagate(&self, tau: f64) -> (Vec<C>, f64) {
        let m = self.alpha.len();
        let t = DMatrix::<f64>::from_fn(m, m, |r, c| {
            if r == c {
                self.alpha[r]
            } else if r + 1 == c {
                self.beta[r]
            } else if c + 1 == r {
                self.beta[c]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let y: Vec<C> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|k| {
                        let v = &eig.eigenvectors;
                        C::from_polar(1.0, -eig.eigenvalues[k] * tau) * v[(r, k)] * v[(0, k)]
                    })
                    .sum()
            })
            .collect();
        let err = if self.exhausted { 0.0 } else { self.beta[m - 1] * y[m - 1].norm() };
        (y, err)
    }
}

fn krylov_evolve(h: &PauliSum, psi: &[C], t: f64) -> Result<Vec<C>> {
    let mut cur = psi.to_vec();
    let mut remaining = t;
    let mut tau = t;
    while remaining.abs() > 0.0 {
        let scale = norm(&cur);
        let mut lz = Lanczos::start(cur.iter().map(|x| x / scale).collect());
        tau = if tau.abs() > remaining.abs() { remaining } else { tau };
        let step = 'search: loop {
            for m in [20, 40, 60] {
                lz.extend(h, m);
                let (y, err) = lz.propagate(tau);
                if err <= KRYLOV_STEP_TOL {
                    break 'search Some(y);
                }
            }
            tau /= 2.0;
            if tau.abs() < 1e-12 * t.abs().max(1.0) {
                break None;
            }
        };
        let y = step.ok_or_else(|| Error::ConvergenceFailure(format!("sub-step shrank below {tau:e}")))?;
        let mut next = vec![C::new(0.0, 0.0); cur.len()];
        for (c, v) in y.iter().zip(&lz.basis) {
            next.iter_mut().zip(v).for_each(|(x, b)| *x += c * b * scale);
        }
        cur = next;
        remaining -= tau;
        if remaining.abs() < 1e-15 * t.abs() {
            break;
        }
    }
    Ok(cur)
}
