//! Pauli strings in symplectic (x, z) bit form and real-weighted sums of them.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::simulator::StateVector;
use num_complex::Complex64;
use std::cmp::Ordering;
use std::fmt;

const ZERO_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    pub fn from_char(c: char) -> Option<Axis> {
        match c {
            'I' => Some(Axis::I),
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

/// Powers of i, stored mod 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase(pub u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn to_complex(self) -> Complex64 {
        match self.0 % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: vec![0; words(n)], z: vec![0; words(n)] }
    }

    pub fn from_axes(n: usize, axes: &[(usize, Axis)]) -> Self {
        let mut s = Self::identity(n);
        for &(q, a) in axes {
            s.set(q, a);
        }
        s
    }

    pub fn single(n: usize, q: usize, a: Axis) -> Self {
        Self::from_axes(n, &[(q, a)])
    }

    /// Parses a string like `XIZY`; character `i` is qubit `i`.
    pub fn parse(s: &str) -> Option<Self> {
        let chars: Vec<char> = s.chars().collect();
        let mut p = Self::identity(chars.len());
        for (q, c) in chars.into_iter().enumerate() {
            p.set(q, Axis::from_char(c)?);
        }
        Some(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn axis(&self, q: usize) -> Axis {
        let (w, b) = (q / 64, q % 64);
        match ((self.x[w] >> b) & 1, (self.z[w] >> b) & 1) {
            (0, 0) => Axis::I,
            (1, 0) => Axis::X,
            (1, 1) => Axis::Y,
            _ => Axis::Z,
        }
    }

    pub fn set(&mut self, q: usize, a: Axis) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / 64, q % 64);
        let (xb, zb) = match a {
            Axis::I => (0, 0),
            Axis::X => (1, 0),
            Axis::Y => (1, 1),
            Axis::Z => (0, 1),
        };
        self.x[w] = (self.x[w] & !(1 << b)) | (xb << b);
        self.z[w] = (self.z[w] & !(1 << b)) | (zb << b);
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Qubits with a non-identity axis, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.axis(q) != Axis::I).collect()
    }

    pub fn axes(&self) -> Vec<(usize, Axis)> {
        self.support().into_iter().map(|q| (q, self.axis(q))).collect()
    }

    fn check_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        Ok(())
    }

    fn y_count(&self) -> u32 {
        self.x.iter().zip(&self.z).map(|(x, z)| (x & z).count_ones()).sum()
    }

    /// Matrix product `self · other` as `phase · string`.
    pub fn mul(&self, other: &Self) -> Result<(Phase, PauliString)> {
        self.check_n(other)?;
        let mut out = Self::identity(self.n);
        let mut cross = 0u32;
        for w in 0..self.x.len() {
            out.x[w] = self.x[w] ^ other.x[w];
            out.z[w] = self.z[w] ^ other.z[w];
            cross += (self.z[w] & other.x[w]).count_ones();
        }
        // Y = i·XZ on every qubit, and Z·X = −X·Z when moving Z's past X's.
        let e = self.y_count() as i64 + other.y_count() as i64 + 2 * cross as i64 - out.y_count() as i64;
        Ok((Phase(e.rem_euclid(4) as u8), out))
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_n(other)?;
        let mut anti = 0u32;
        for w in 0..self.x.len() {
            anti += (self.x[w] & other.z[w]).count_ones() + (self.z[w] & other.x[w]).count_ones();
        }
        Ok(anti.is_multiple_of(2))
    }

    /// Bit masks for statevector action; requires at most 64 qubits.
    pub fn masks(&self) -> (u64, u64) {
        assert!(self.n <= 64, "bit masks need at most 64 qubits");
        (self.x[0], self.z[0])
    }

    /// `out = self · amps`, matrix-free.
    pub fn apply(&self, amps: &[Complex64], out: &mut [Complex64]) {
        let (xm, zm) = self.masks();
        let ph = Phase(self.y_count() as u8 % 4).to_complex();
        for (b, a) in amps.iter().enumerate() {
            let sign = if (b as u64 & zm).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            out[b ^ xm as usize] = ph * sign * a;
        }
    }

    /// Dense matrix of this string alone.
    pub fn to_matrix(&self) -> Result<CMat> {
        if self.n > 14 {
            return Err(Error::TooManyQubits { n: self.n, limit: 14 });
        }
        let dim = 1usize << self.n;
        let (xm, zm) = self.masks();
        let ph = Phase(self.y_count() as u8 % 4).to_complex();
        let mut m = CMat::zeros(dim, dim);
        for b in 0..dim {
            let sign = if (b as u64 & zm).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            m[(b ^ xm as usize, b)] = ph * sign;
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.axis(q).to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.weight().cmp(&other.weight()))
            .then_with(|| self.support().cmp(&other.support()))
            .then_with(|| self.axes().cmp(&other.axes()))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Real-weighted sum of Pauli strings plus an identity offset.
///
/// Terms are kept sorted by (weight, support, axes) with duplicates merged
/// and near-zero coefficients dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(f64, PauliString)>,
    constant: f64,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        PauliSum { n, terms: Vec::new(), constant: 0.0 }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (f64, PauliString)>, constant: f64) -> Result<Self> {
        let mut s = PauliSum { n, terms: Vec::new(), constant };
        for (c, p) in terms {
            if p.num_qubits() != n {
                return Err(Error::QubitCountMismatch(n, p.num_qubits()));
            }
            if p.is_identity() {
                s.constant += c;
            } else {
                s.terms.push((c, p));
            }
        }
        s.canonicalize();
        Ok(s)
    }

    fn canonicalize(&mut self) {
        let mut terms = std::mem::take(&mut self.terms);
        terms.sort_by(|a, b| a.1.cmp(&b.1));
        let mut merged: Vec<(f64, PauliString)> = Vec::with_capacity(terms.len());
        for (c, p) in terms {
            match merged.last_mut() {
                Some(last) if last.1 == p => last.0 += c,
                _ => merged.push((c, p)),
            }
        }
        merged.retain(|(c, _)| c.abs() >= ZERO_CUTOFF);
        self.terms = merged;
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n != other.n {
            return Err(Error::QubitCountMismatch(self.n, other.n));
        }
        PauliSum::from_terms(
            self.n,
            self.terms.iter().chain(other.terms.iter()).cloned(),
            self.constant + other.constant,
        )
    }

    pub fn scale(&self, a: f64) -> PauliSum {
        PauliSum::from_terms(self.n, self.terms.iter().map(|(c, p)| (a * c, p.clone())), a * self.constant).unwrap()
    }

    pub fn sum_all<'a>(n: usize, parts: impl IntoIterator<Item = &'a PauliSum>) -> Result<PauliSum> {
        parts.into_iter().try_fold(PauliSum::zero(n), |acc, p| acc.add(p))
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        if self.n > 14 {
            return Err(Error::TooManyQubits { n: self.n, limit: 14 });
        }
        let dim = 1usize << self.n;
        let mut m = CMat::identity(dim, dim) * Complex64::new(self.constant, 0.0);
        for (c, p) in &self.terms {
            let (xm, zm) = p.masks();
            let ph = Phase(p.y_count() as u8 % 4).to_complex() * *c;
            for b in 0..dim {
                let sign = if (b as u64 & zm).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                m[(b ^ xm as usize, b)] += ph * sign;
            }
        }
        Ok(m)
    }

    /// `out = self · amps`, matrix-free.
    pub fn apply(&self, amps: &[Complex64], out: &mut [Complex64]) {
        let mut tmp = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (o, a) in out.iter_mut().zip(amps) {
            *o = a * self.constant;
        }
        for (c, p) in &self.terms {
            p.apply(amps, &mut tmp);
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += t * c;
            }
        }
    }

    /// One `<coeff> <axes>` line per term, then `CONST <value>`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (c, p) in &self.terms {
            s.push_str(&format!("{c:?} {p}\n"));
        }
        s.push_str(&format!("CONST {:?}\n", self.constant));
        s
    }

    pub fn from_text(text: &str) -> Result<PauliSum> {
        let mut n: Option<usize> = None;
        let mut terms = Vec::new();
        let mut constant = 0.0;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
            let mut parts = line.split_whitespace();
            let (a, b) = (parts.next().unwrap(), parts.next().ok_or_else(|| err("expected two fields"))?);
            if parts.next().is_some() {
                return Err(err("expected two fields"));
            }
            if a == "CONST" {
                constant += b.parse::<f64>().map_err(|_| err("bad constant"))?;
                continue;
            }
            let c: f64 = a.parse().map_err(|_| err("bad coefficient"))?;
            let p = PauliString::parse(b).ok_or_else(|| err("bad axes string"))?;
            match n {
                None => n = Some(p.num_qubits()),
                Some(k) if k != p.num_qubits() => return Err(err("inconsistent qubit count")),
                _ => {}
            }
            terms.push((c, p));
        }
        let n = n.ok_or(Error::Parse { line: 0, msg: "no terms".into() })?;
        PauliSum::from_terms(n, terms, constant)
    }
}

/// ⟨ψ|s|ψ⟩.
pub fn expect_string(state: &StateVector, s: &PauliString) -> Result<f64> {
    if state.num_qubits() != s.num_qubits() {
        return Err(Error::DimensionMismatch(state.num_qubits(), s.num_qubits()));
    }
    let amps = state.amplitudes();
    let (xm, zm) = s.masks();
    let ph = Phase(s.y_count() as u8 % 4).to_complex();
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, a) in amps.iter().enumerate() {
        let sign = if (b as u64 & zm).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += amps[b ^ xm as usize].conj() * a * sign;
    }
    Ok((acc * ph).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single_matrix(a: Axis) -> CMat {
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        match a {
            Axis::I => CMat::from_row_slice(2, 2, &[l, o, o, l]),
            Axis::X => CMat::from_row_slice(2, 2, &[o, l, l, o]),
            Axis::Y => CMat::from_row_slice(2, 2, &[o, -i, i, o]),
            Axis::Z => CMat::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }

    /// Kronecker construction with qubit 0 as the least significant factor.
    fn kron_matrix(p: &PauliString) -> CMat {
        let mut m = CMat::identity(1, 1);
        for q in 0..p.num_qubits() {
            m = kron(&single_matrix(p.axis(q)), &m);
        }
        m
    }

    fn axis_strategy() -> impl Strategy<Value = Axis> {
        prop_oneof![Just(Axis::I), Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
    }

    fn string_strategy(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(axis_strategy(), n).prop_map(move |axes| {
            let v: Vec<_> = axes.into_iter().enumerate().collect();
            PauliString::from_axes(n, &v)
        })
    }

    #[test]
    fn products_on_one_qubit() {
        let x = PauliString::parse("X").unwrap();
        let y = PauliString::parse("Y").unwrap();
        let z = PauliString::parse("Z").unwrap();
        assert_eq!(x.mul(&y).unwrap(), (Phase::I, z.clone()));
        assert_eq!(z.mul(&z).unwrap(), (Phase::ONE, PauliString::identity(1)));
        let a = PauliString::parse("XZ").unwrap();
        let b = PauliString::parse("YZ").unwrap();
        assert_eq!(a.mul(&b).unwrap(), (Phase::I, PauliString::parse("ZI").unwrap()));
        assert!(x.mul(&PauliString::parse("XX").unwrap()).is_err());
    }

    #[test]
    fn all_single_qubit_products_match_matrices() {
        let all = [Axis::I, Axis::X, Axis::Y, Axis::Z];
        for &a in &all {
            for &b in &all {
                let pa = PauliString::single(1, 0, a);
                let pb = PauliString::single(1, 0, b);
                let (ph, p) = pa.mul(&pb).unwrap();
                let lhs = single_matrix(a) * single_matrix(b);
                let rhs = single_matrix(p.axis(0)) * ph.to_complex();
                assert!((lhs - rhs).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn commutation_basics() {
        let p = |s| PauliString::parse(s).unwrap();
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
    }

    #[test]
    fn single_z_matrix() {
        let h = PauliSum::from_terms(1, [(1.0, PauliString::parse("Z").unwrap())], 0.0).unwrap();
        let m = h.to_matrix().unwrap();
        assert_eq!(m[(0, 0)], c(1.0, 0.0));
        assert_eq!(m[(1, 1)], c(-1.0, 0.0));
        assert_eq!(m[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn canonical_order_and_merging() {
        let p = |s| PauliString::parse(s).unwrap();
        let h = PauliSum::from_terms(
            3,
            [(1.0, p("ZZI")), (2.0, p("IIX")), (0.5, p("XII")), (-1.0, p("ZZI")), (1e-16, p("YYY")), (3.0, p("III"))],
            1.0,
        )
        .unwrap();
        let got: Vec<String> = h.terms().iter().map(|(_, s)| s.to_string()).collect();
        assert_eq!(got, vec!["XII", "IIX"]);
        assert_eq!(h.constant(), 4.0);
    }

    #[test]
    fn text_round_trip() {
        let p = |s| PauliString::parse(s).unwrap();
        let h = PauliSum::from_terms(4, [(-2.0, p("ZIII")), (0.1 + 0.2, p("XYZX"))], 0.5).unwrap();
        let text = h.to_text();
        assert!(text.contains("-2.0 ZIII"));
        assert!(text.ends_with("CONST 0.5\n"));
        assert_eq!(PauliSum::from_text(&text).unwrap(), h);
        assert!(PauliSum::from_text("1.0 XQ\n").is_err());
        assert!(PauliSum::from_text("1.0 XX\n1.0 X\n").is_err());
    }

    #[test]
    fn expectations_on_basis_state() {
        let s = StateVector::zero(1);
        assert_eq!(expect_string(&s, &PauliString::parse("Z").unwrap()).unwrap(), 1.0);
        assert_eq!(expect_string(&s, &PauliString::parse("X").unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn expectation_matches_dense_on_random_states() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let psi = StateVector::random(6, &mut rng);
            let axes: Vec<(usize, Axis)> =
                (0..6).map(|q| (q, [Axis::I, Axis::X, Axis::Y, Axis::Z][rng.random_range(0..4)])).collect();
            let s = PauliString::from_axes(6, &axes);
            let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
            let dense = (v.adjoint() * kron_matrix(&s) * &v)[(0, 0)];
            assert!(dense.im.abs() < 1e-12);
            assert!((dense.re - expect_string(&psi, &s).unwrap()).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn matrix_matches_kronecker(s in string_strategy(4)) {
            prop_assert!((s.to_matrix().unwrap() - kron_matrix(&s)).norm() < 1e-14);
        }

        #[test]
        fn product_matches_dense(a in string_strategy(3), b in string_strategy(3)) {
            let (ph, p) = a.mul(&b).unwrap();
            let lhs = kron_matrix(&a) * kron_matrix(&b);
            let rhs = kron_matrix(&p) * ph.to_complex();
            prop_assert!((lhs - rhs).norm() < 1e-13);
        }

        #[test]
        fn associative(a in string_strategy(3), b in string_strategy(3), c in string_strategy(3)) {
            let (p1, ab) = a.mul(&b).unwrap();
            let (p2, ab_c) = ab.mul(&c).unwrap();
            let (p3, bc) = b.mul(&c).unwrap();
            let (p4, a_bc) = a.mul(&bc).unwrap();
            prop_assert_eq!(&ab_c, &a_bc);
            prop_assert_eq!((p1.0 + p2.0) % 4, (p3.0 + p4.0) % 4);
        }

        #[test]
        fn commutes_matches_dense(a in string_strategy(4), b in string_strategy(4)) {
            let (ma, mb) = (kron_matrix(&a), kron_matrix(&b));
            let dense = (&ma * &mb - &mb * &ma).norm() < 1e-12;
            prop_assert_eq!(a.commutes(&b).unwrap(), dense);
            let (pab, _) = a.mul(&b).unwrap();
            let (pba, _) = b.mul(&a).unwrap();
            prop_assert_eq!(a.commutes(&b).unwrap(), pab == pba);
        }

        #[test]
        fn squares_to_identity(a in string_strategy(5)) {
            let (ph, p) = a.mul(&a).unwrap();
            prop_assert_eq!(ph, Phase::ONE);
            prop_assert!(p.is_identity());
        }

        #[test]
        fn hermitian_sum(cs in proptest::collection::vec(-2.0f64..2.0, 4), ss in proptest::collection::vec(string_strategy(3), 4)) {
            let h = PauliSum::from_terms(3, cs.into_iter().zip(ss), 0.3).unwrap();
            let m = h.to_matrix().unwrap();
            prop_assert!((m.adjoint() - &m).norm() == 0.0);
        }

        #[test]
        fn expectation_in_unit_interval(s in string_strategy(5), seed in 0u64..1000) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let psi = StateVector::random(5, &mut rng);
            let e = expect_string(&psi, &s).unwrap();
            prop_assert!(e.abs() <= 1.0 + 1e-12);
        }
    }
}
