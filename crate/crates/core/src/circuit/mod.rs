//! Gate-level circuits, peephole CX cancellation and the dense oracle.
//!
//! All rotations follow R_P(θ) = exp(−iθP/2).

mod compile;

pub use compile::*;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::pauli::{Axis, PauliString};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    /// Control, target.
    Cx(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) | Gate::H(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => {
                (q, None)
            }
            Gate::Cx(c, t) => (c, Some(t)),
        }
    }

    pub fn touches(&self, q: usize) -> bool {
        let (a, b) = self.qubits();
        a == q || b == Some(q)
    }

    pub fn is_cx(&self) -> bool {
        matches!(self, Gate::Cx(..))
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx(q, t) => Gate::Rx(q, -t),
            Gate::Ry(q, t) => Gate::Ry(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            g => g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateCounts {
    pub cx: usize,
    pub single: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, gates: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        let (a, b) = g.qubits();
        if a >= self.n || b.is_some_and(|b| b >= self.n) {
            return Err(Error::InvalidArgument(format!("{g:?} out of range for {} qubits", self.n)));
        }
        if b == Some(a) {
            return Err(Error::InvalidArgument(format!("{g:?} uses the same qubit twice")));
        }
        self.gates.push(g);
        Ok(())
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n != self.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn inverse(&self) -> Circuit {
        Circuit { n: self.n, gates: self.gates.iter().rev().map(Gate::inverse).collect() }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.n);
        for g in &self.gates {
            match *g {
                Gate::Rx(q, t) => writeln!(s, "RX {q} {}", fmt_g17(t)),
                Gate::Ry(q, t) => writeln!(s, "RY {q} {}", fmt_g17(t)),
                Gate::Rz(q, t) => writeln!(s, "RZ {q} {}", fmt_g17(t)),
                Gate::H(q) => writeln!(s, "H {q}"),
                Gate::X(q) => writeln!(s, "X {q}"),
                Gate::Y(q) => writeln!(s, "Y {q}"),
                Gate::Z(q) => writeln!(s, "Z {q}"),
                Gate::Cx(c, t) => writeln!(s, "CX {c} {t}"),
            }
            .unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut circ: Option<Circuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let f: Vec<&str> = line.split_whitespace().collect();
            let uint = |s: &str| s.parse::<usize>().map_err(|_| err("bad qubit index"));
            let real = |s: &str| s.parse::<f64>().map_err(|_| err("bad angle"));
            let Some(c) = circ.as_mut() else {
                if f.len() == 2 && f[0] == "QUBITS" {
                    circ = Some(Circuit::new(uint(f[1])?));
                    continue;
                }
                return Err(err("expected QUBITS header"));
            };
            let g = match (f[0], f.len()) {
                ("RX", 3) => Gate::Rx(uint(f[1])?, real(f[2])?),
                ("RY", 3) => Gate::Ry(uint(f[1])?, real(f[2])?),
                ("RZ", 3) => Gate::Rz(uint(f[1])?, real(f[2])?),
                ("H", 2) => Gate::H(uint(f[1])?),
                ("X", 2) => Gate::X(uint(f[1])?),
                ("Y", 2) => Gate::Y(uint(f[1])?),
                ("Z", 2) => Gate::Z(uint(f[1])?),
                ("CX", 3) => Gate::Cx(uint(f[1])?, uint(f[2])?),
                _ => return Err(err("unknown gate")),
            };
            c.push(g).map_err(|e| err(&e.to_string()))?;
        }
        circ.ok_or(Error::Parse { line: 0, msg: "empty circuit file".into() })
    }
}

/// `%.17g`-style formatting: enough digits to round-trip any f64.
pub fn fmt_g17(x: f64) -> String {
    fmt_sig(x, 17)
}

/// `%.{digits}g`-style formatting.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}{:02}", trim(mant.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    }
}

pub fn cx_count(circ: &Circuit) -> GateCounts {
    let cx = circ.gates.iter().filter(|g| g.is_cx()).count();
    GateCounts { cx, single: circ.gates.len() - cx }
}

/// Indices of the gates that survive CX pair cancellation.
///
/// Each CX looks back for the most recent gate sharing a qubit with it; if
/// that gate is the identical CX, both are dropped.
pub fn peephole_keep(gates: &[Gate]) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::with_capacity(gates.len());
    for (i, g) in gates.iter().enumerate() {
        if let Gate::Cx(c, t) = *g {
            let blocker = kept.iter().rposition(|&j| gates[j].touches(c) || gates[j].touches(t));
            if let Some(pos) = blocker {
                if gates[kept[pos]] == *g {
                    kept.remove(pos);
                    continue;
                }
            }
        }
        kept.push(i);
    }
    kept
}

pub fn peephole_cancel(circ: &Circuit) -> Circuit {
    let mut gates = circ.gates.clone();
    loop {
        let keep = peephole_keep(&gates);
        if keep.len() == gates.len() {
            return Circuit { n: circ.n, gates };
        }
        gates = keep.into_iter().map(|i| gates[i]).collect();
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli2(a: Axis) -> [[Complex64; 2]; 2] {
    match a {
        Axis::I => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]],
        Axis::X => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
        Axis::Y => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
        Axis::Z => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
    }
}

fn rotation2(a: Axis, theta: f64) -> CMat {
    let p = pauli2(a);
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    CMat::from_fn(2, 2, |r, k| if r == k { c(co, 0.0) } else { c(0.0, 0.0) } - c(0.0, si) * p[r][k])
}

/// Local matrix of a gate; for CX the local basis index is `control + 2·target`.
fn local_matrix(g: &Gate) -> (Vec<usize>, CMat) {
    let from = |a: Axis| CMat::from_fn(2, 2, |r, k| pauli2(a)[r][k]);
    match *g {
        Gate::Rx(q, t) => (vec![q], rotation2(Axis::X, t)),
        Gate::Ry(q, t) => (vec![q], rotation2(Axis::Y, t)),
        Gate::Rz(q, t) => (vec![q], rotation2(Axis::Z, t)),
        Gate::H(q) => (vec![q], (from(Axis::X) + from(Axis::Z)) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
        Gate::X(q) => (vec![q], from(Axis::X)),
        Gate::Y(q) => (vec![q], from(Axis::Y)),
        Gate::Z(q) => (vec![q], from(Axis::Z)),
        Gate::Cx(ctl, tgt) => {
            let mut m = CMat::zeros(4, 4);
            for local in 0..4usize {
                let (cb, tb) = (local & 1, local >> 1);
                let out = cb | ((tb ^ cb) << 1);
                m[(out, local)] = c(1.0, 0.0);
            }
            (vec![ctl, tgt], m)
        }
    }
}

/// Product of the gate matrices in application order, built by embedding
/// each local matrix on the full register.
pub fn circuit_unitary(circ: &Circuit) -> Result<CMat> {
    if circ.n > 12 {
        return Err(Error::TooManyQubits { n: circ.n, limit: 12 });
    }
    let dim = 1usize << circ.n;
    let mut u = CMat::identity(dim, dim);
    for g in &circ.gates {
        let (qs, m) = local_matrix(g);
        let k = qs.len();
        let mask: usize = qs.iter().map(|q| 1usize << q).sum();
        let spread = |local: usize| -> usize { (0..k).filter(|j| local >> j & 1 == 1).map(|j| 1usize << qs[j]).sum() };
        let offsets: Vec<usize> = (0..1usize << k).map(spread).collect();
        let bases: Vec<usize> = (0..dim).filter(|b| b & mask == 0).collect();
        let mut v = [Complex64::new(0.0, 0.0); 4];
        for col in 0..dim {
            for &base in &bases {
                for (slot, o) in offsets.iter().enumerate() {
                    v[slot] = u[(base | o, col)];
                }
                for (r, o) in offsets.iter().enumerate() {
                    u[(base | o, col)] = (0..offsets.len()).map(|s| m[(r, s)] * v[s]).sum();
                }
            }
        }
    }
    Ok(u)
}

/// Circuit for exp(−i(θ/2)·s): basis change to Z, a CX chain collecting the
/// parity on the last support qubit, RZ(θ) there, and the mirror image.
pub fn pauli_rotation(s: &PauliString, theta: f64) -> Result<Circuit> {
    let support = s.support();
    if support.is_empty() {
        return Err(Error::EmptyString);
    }
    let basis: Vec<(usize, Axis)> = s.axes();
    let ladder: Vec<(usize, usize)> = support.windows(2).map(|w| (w[0], w[1])).collect();
    let mut circ = Circuit::new(s.num_qubits());
    emit_rotation(&mut circ, &basis, &ladder, *support.last().unwrap(), theta);
    Ok(circ)
}

pub(crate) fn basis_in(circ: &mut Circuit, q: usize, a: Axis) {
    match a {
        Axis::X => circ.push(Gate::H(q)).unwrap(),
        Axis::Y => {
            circ.push(Gate::Rz(q, -FRAC_PI_2)).unwrap();
            circ.push(Gate::H(q)).unwrap();
        }
        _ => {}
    }
}

pub(crate) fn basis_out(circ: &mut Circuit, q: usize, a: Axis) {
    match a {
        Axis::X => circ.push(Gate::H(q)).unwrap(),
        Axis::Y => {
            circ.push(Gate::H(q)).unwrap();
            circ.push(Gate::Rz(q, FRAC_PI_2)).unwrap();
        }
        _ => {}
    }
}

/// Emits `B, L, RZ(θ) on rot, L†, B†`. Basis changes come first so every
/// qubit is rotated into Z before any CX touches it.
pub(crate) fn emit_rotation(
    circ: &mut Circuit,
    basis: &[(usize, Axis)],
    ladder: &[(usize, usize)],
    rot: usize,
    theta: f64,
) {
    for &(q, a) in basis {
        basis_in(circ, q, a);
    }
    for &(ctl, tgt) in ladder {
        circ.push(Gate::Cx(ctl, tgt)).unwrap();
    }
    circ.push(Gate::Rz(rot, theta)).unwrap();
    for &(ctl, tgt) in ladder.iter().rev() {
        circ.push(Gate::Cx(ctl, tgt)).unwrap();
    }
    for &(q, a) in basis.iter().rev() {
        basis_out(circ, q, a);
    }
}
