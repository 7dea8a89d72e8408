//! Qubit Hamiltonians for the Z2 gauge theory in three encodings.
//!
//! * pure gauge on the L link qubits,
//! * matter eliminated through the Gauss law, again on L link qubits,
//! * matter kept through the Verstraete-Cirac map, on 2L qubits.

use crate::error::{Error, Result};
use crate::lattice::{site_parity, LatticeGeometry, LinkId};
use crate::linalg::CMat;
use crate::pauli::{Axis, PauliString, PauliSum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub lambda_e: f64,
    pub lambda_b: f64,
    pub eps: f64,
    pub mass: f64,
}

impl Couplings {
    /// Pure-gauge couplings for gauge coupling `g`: λ_E = g²/2, λ_B = 1/(2g²).
    pub fn from_g(g: f64) -> Self {
        Couplings { lambda_e: g * g / 2.0, lambda_b: 1.0 / (2.0 * g * g), eps: 0.0, mass: 0.0 }
    }
}

impl Default for Couplings {
    fn default() -> Self {
        Couplings { lambda_e: 1.0, lambda_b: 1.0, eps: 0.2, mass: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theory {
    Pure,
    Full,
    Vc,
}

impl Theory {
    pub fn num_qubits(self, geom: &LatticeGeometry) -> usize {
        match self {
            Theory::Pure | Theory::Full => geom.num_links(),
            Theory::Vc => 2 * geom.num_links(),
        }
    }
}

impl std::str::FromStr for Theory {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pure" => Ok(Theory::Pure),
            "full" | "eliminated" => Ok(Theory::Full),
            "vc" => Ok(Theory::Vc),
            _ => Err(Error::InvalidArgument(format!("unknown theory '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Part {
    Electric,
    Magnetic,
    Mass,
    HopH,
    HopV,
}

impl Part {
    pub fn label(self) -> &'static str {
        match self {
            Part::Electric => "H_E",
            Part::Magnetic => "H_B",
            Part::Mass => "H_M",
            Part::HopH => "H_H",
            Part::HopV => "H_V",
        }
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A Hamiltonian as an ordered list of labelled parts.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSplit {
    n: usize,
    parts: Vec<(Part, PauliSum)>,
}

impl HamiltonianSplit {
    pub fn new(n: usize, parts: Vec<(Part, PauliSum)>) -> Result<Self> {
        for (_, p) in &parts {
            if p.num_qubits() != n {
                return Err(Error::QubitCountMismatch(n, p.num_qubits()));
            }
        }
        Ok(HamiltonianSplit { n, parts })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[(Part, PauliSum)] {
        &self.parts
    }

    pub fn part(&self, which: Part) -> Option<&PauliSum> {
        self.parts.iter().find(|(p, _)| *p == which).map(|(_, s)| s)
    }

    pub fn total(&self) -> Result<PauliSum> {
        PauliSum::sum_all(self.n, self.parts.iter().map(|(_, s)| s))
    }
}

fn lq(geom: &LatticeGeometry, l: LinkId) -> usize {
    geom.link_qubit(l)
}

fn z_string(n: usize, qubits: &[usize]) -> PauliString {
    // Repeated qubits square away.
    let mut s = PauliString::identity(n);
    for &q in qubits {
        let next = if s.axis(q) == Axis::Z { Axis::I } else { Axis::Z };
        s.set(q, next);
    }
    s
}

fn product(a: &PauliString, b: &PauliString) -> PauliString {
    let (ph, p) = a.mul(b).expect("same register");
    assert_eq!(ph.0, 0, "factors are expected to combine without phase");
    p
}

/// Z on the four links of the star at `(x,y)`.
pub fn gauss_op(geom: &LatticeGeometry, x: i64, y: i64) -> PauliString {
    let s = geom.vertex_star(x, y);
    z_string(geom.num_links(), &s.links().map(|l| lq(geom, l)))
}

fn gauss_op_in(geom: &LatticeGeometry, n: usize, x: i64, y: i64) -> PauliString {
    let s = geom.vertex_star(x, y);
    z_string(n, &s.links().map(|l| lq(geom, l)))
}

/// X on the four edges of the plaquette at `(x,y)`.
pub fn plaquette_x4(geom: &LatticeGeometry, n: usize, x: i64, y: i64) -> PauliString {
    let p = geom.plaquette_links(x, y);
    PauliString::from_axes(n, &p.edges().map(|l| (lq(geom, l), Axis::X)))
}

/// The six-body magnetic string of the eliminated theory.
pub fn plaquette_y2x2z2(geom: &LatticeGeometry, x: i64, y: i64) -> PauliString {
    let p = geom.plaquette_links(x, y);
    let n = geom.num_links();
    PauliString::from_axes(
        n,
        &[
            (lq(geom, p.p1), Axis::Y),
            (lq(geom, p.p2), Axis::Y),
            (lq(geom, p.p3), Axis::X),
            (lq(geom, p.p4), Axis::X),
            (lq(geom, p.p5), Axis::Z),
            (lq(geom, p.p6), Axis::Z),
        ],
    )
}

fn electric(geom: &LatticeGeometry, n: usize, c: &Couplings) -> PauliSum {
    let terms = (0..geom.num_links()).map(|q| (-2.0 * c.lambda_e, PauliString::single(n, q, Axis::Z)));
    PauliSum::from_terms(n, terms, 0.0).unwrap()
}

fn magnetic_pure(geom: &LatticeGeometry, n: usize, c: &Couplings) -> PauliSum {
    let terms = geom.vertices().map(|(x, y)| (-2.0 * c.lambda_b, plaquette_x4(geom, n, x, y)));
    PauliSum::from_terms(n, terms, 0.0).unwrap()
}

pub fn build_pure(geom: &LatticeGeometry, c: &Couplings) -> HamiltonianSplit {
    let n = geom.num_links();
    HamiltonianSplit::new(n, vec![(Part::Electric, electric(geom, n, c)), (Part::Magnetic, magnetic_pure(geom, n, c))])
        .unwrap()
}

/// The two strings of the eliminated horizontal hopping on `Right(x,y)`,
/// with their shared coefficient: the short `Y_r Z_d(x+1,y)` and its product
/// with the Gauss operators of both endpoints.
pub fn hopping_h_strings(geom: &LatticeGeometry, c: &Couplings, x: i64, y: i64) -> (f64, PauliString, PauliString) {
    let n = geom.num_links();
    let s0 = geom.vertex_star(x, y);
    let s1 = geom.vertex_star(x + 1, y);
    let short = PauliString::from_axes(n, &[(lq(geom, s0.r), Axis::Y), (lq(geom, s1.d), Axis::Z)]);
    let long = product(&short, &product(&gauss_op(geom, x, y), &gauss_op(geom, x + 1, y)));
    (-0.5 * c.eps * site_parity(x, y) as f64, short, long)
}

/// Vertical analogue on `Up(x,y)`: `Y_u Z_r(x,y)` and its Gauss-dressed partner.
pub fn hopping_v_strings(geom: &LatticeGeometry, c: &Couplings, x: i64, y: i64) -> (f64, PauliString, PauliString) {
    let n = geom.num_links();
    let s0 = geom.vertex_star(x, y);
    let short = PauliString::from_axes(n, &[(lq(geom, s0.u), Axis::Y), (lq(geom, s0.r), Axis::Z)]);
    let long = product(&short, &product(&gauss_op(geom, x, y), &gauss_op(geom, x, y + 1)));
    (-0.5 * c.eps * site_parity(x, y) as f64, short, long)
}

pub fn build_eliminated(geom: &LatticeGeometry, c: &Couplings) -> HamiltonianSplit {
    let n = geom.num_links();
    let magnetic =
        PauliSum::from_terms(n, geom.vertices().map(|(x, y)| (-2.0 * c.lambda_b, plaquette_y2x2z2(geom, x, y))), 0.0)
            .unwrap();
    let mass = PauliSum::from_terms(
        n,
        geom.vertices().map(|(x, y)| (-0.5 * c.mass, gauss_op(geom, x, y))),
        0.5 * c.mass * geom.num_vertices() as f64,
    )
    .unwrap();
    let mut hh = Vec::new();
    let mut hv = Vec::new();
    for (x, y) in geom.vertices() {
        let (ch, a, b) = hopping_h_strings(geom, c, x, y);
        hh.push((ch, a));
        hh.push((ch, b));
        let (cv, a, b) = hopping_v_strings(geom, c, x, y);
        hv.push((cv, a));
        hv.push((cv, b));
    }
    HamiltonianSplit::new(
        n,
        vec![
            (Part::Electric, electric(geom, n, c)),
            (Part::Magnetic, magnetic),
            (Part::Mass, mass),
            (Part::HopH, PauliSum::from_terms(n, hh, 0.0).unwrap()),
            (Part::HopV, PauliSum::from_terms(n, hv, 0.0).unwrap()),
        ],
    )
    .unwrap()
}

/// Complex-weighted Pauli sums, only needed to expand the projected form.
#[derive(Clone)]
struct ComplexSum(HashMap<PauliString, Complex64>);

impl ComplexSum {
    fn term(c: Complex64, p: PauliString) -> Self {
        ComplexSum(HashMap::from([(p, c)]))
    }

    fn mul(&self, other: &ComplexSum) -> ComplexSum {
        let mut out: HashMap<PauliString, Complex64> = HashMap::new();
        for (pa, ca) in &self.0 {
            for (pb, cb) in &other.0 {
                let (ph, p) = pa.mul(pb).unwrap();
                *out.entry(p).or_default() += ca * cb * ph.to_complex();
            }
        }
        ComplexSum(out)
    }

    fn add(&mut self, other: &ComplexSum) {
        for (p, c) in &other.0 {
            *self.0.entry(p.clone()).or_default() += c;
        }
    }

    fn adjoint(&self) -> ComplexSum {
        ComplexSum(self.0.iter().map(|(p, c)| (p.clone(), c.conj())).collect())
    }
}

/// (1 + sign·G)/2 at a vertex.
fn projector(geom: &LatticeGeometry, x: i64, y: i64, sign: f64) -> ComplexSum {
    let n = geom.num_links();
    let mut s = ComplexSum::term(Complex64::new(0.5, 0.0), PauliString::identity(n));
    s.add(&ComplexSum::term(Complex64::new(0.5 * sign, 0.0), gauss_op(geom, x, y)));
    s
}

/// The hopping interaction before simplification: for every link,
/// `−iε(−1)^s ξ Π₋(x) X_link Π₊(x') + h.c.` with the Z-string phase `ξ`,
/// expanded into Pauli strings.
pub fn build_projected_interaction(geom: &LatticeGeometry, c: &Couplings) -> PauliSum {
    let n = geom.num_links();
    let mut acc = ComplexSum(HashMap::new());
    for (x, y) in geom.vertices() {
        let pre = Complex64::new(0.0, -c.eps * site_parity(x, y) as f64);
        let s0 = geom.vertex_star(x, y);
        let s1 = geom.vertex_star(x + 1, y);
        let xi_h = z_string(n, &[lq(geom, s0.u), lq(geom, s0.l), lq(geom, s0.d), lq(geom, s1.d)]);
        let hop = ComplexSum::term(pre, xi_h)
            .mul(&projector(geom, x, y, -1.0))
            .mul(&ComplexSum::term(Complex64::new(1.0, 0.0), PauliString::single(n, lq(geom, s0.r), Axis::X)))
            .mul(&projector(geom, x + 1, y, 1.0));
        acc.add(&hop);
        acc.add(&hop.adjoint());

        let xi_v = z_string(n, &[lq(geom, s0.l), lq(geom, s0.d)]);
        let hop = ComplexSum::term(pre, xi_v)
            .mul(&projector(geom, x, y, -1.0))
            .mul(&ComplexSum::term(Complex64::new(1.0, 0.0), PauliString::single(n, lq(geom, s0.u), Axis::X)))
            .mul(&projector(geom, x, y + 1, 1.0));
        acc.add(&hop);
        acc.add(&hop.adjoint());
    }
    let mut terms = Vec::new();
    for (p, c) in acc.0 {
        assert!(c.im.abs() < 1e-12, "non-Hermitian residue {} on {p}", c.im);
        terms.push((c.re, p));
    }
    PauliSum::from_terms(n, terms, 0.0).unwrap()
}

/// Qubit of the matter site `(x,y)` in the Verstraete-Cirac register.
pub fn vc_matter(geom: &LatticeGeometry, x: i64, y: i64) -> usize {
    geom.num_links() + 2 * geom.vertex_index(x, y)
}

/// Qubit of the ancilla attached to `(x,y)` in the Verstraete-Cirac register.
pub fn vc_ancilla(geom: &LatticeGeometry, x: i64, y: i64) -> usize {
    geom.num_links() + 2 * geom.vertex_index(x, y) + 1
}

/// The two strings of the VC horizontal hopping on `Right(x,y)`, with their
/// coefficients.
pub fn vc_hopping_h(geom: &LatticeGeometry, c: &Couplings, x: i64, y: i64) -> [(f64, PauliString); 2] {
    let n = 2 * geom.num_links();
    let link = lq(geom, LinkId::right(x, y));
    let (a, b, anc) = (vc_matter(geom, x, y), vc_matter(geom, x + 1, y), vc_ancilla(geom, x, y));
    let k = 0.5 * c.eps;
    let s = |m: Axis| PauliString::from_axes(n, &[(link, Axis::X), (a, m), (b, m), (anc, Axis::Z)]);
    [(k, s(Axis::X)), (k, s(Axis::Y))]
}

/// VC vertical hopping on `Up(x,y)`.
pub fn vc_hopping_v(geom: &LatticeGeometry, c: &Couplings, x: i64, y: i64) -> [(f64, PauliString); 2] {
    let n = 2 * geom.num_links();
    let link = lq(geom, LinkId::up(x, y));
    let (a, at) = (vc_matter(geom, x, y), vc_ancilla(geom, x, y));
    let (b, bt) = (vc_matter(geom, x, y + 1), vc_ancilla(geom, x, y + 1));
    let k = 0.5 * c.eps;
    let s = |ma: Axis, mb: Axis| {
        PauliString::from_axes(n, &[(link, Axis::X), (a, ma), (at, Axis::Y), (b, mb), (bt, Axis::X)])
    };
    [(k, s(Axis::X, Axis::Y)), (-k, s(Axis::Y, Axis::X))]
}

pub fn build_vc(geom: &LatticeGeometry, c: &Couplings) -> HamiltonianSplit {
    let n = 2 * geom.num_links();
    let mass = geom.vertices().map(|(x, y)| {
        (site_parity(x, y) as f64 * 0.5 * c.mass, PauliString::single(n, vc_matter(geom, x, y), Axis::Z))
    });
    let hh = geom.vertices().flat_map(|(x, y)| vc_hopping_h(geom, c, x, y));
    let hv = geom.vertices().flat_map(|(x, y)| vc_hopping_v(geom, c, x, y));
    HamiltonianSplit::new(
        n,
        vec![
            (Part::Electric, electric(geom, n, c)),
            (Part::Magnetic, magnetic_pure(geom, n, c)),
            (Part::Mass, PauliSum::from_terms(n, mass, 0.0).unwrap()),
            (Part::HopH, PauliSum::from_terms(n, hh, 0.0).unwrap()),
            (Part::HopV, PauliSum::from_terms(n, hv, 0.0).unwrap()),
        ],
    )
    .unwrap()
}

pub fn build(theory: Theory, geom: &LatticeGeometry, c: &Couplings) -> HamiltonianSplit {
    match theory {
        Theory::Pure => build_pure(geom, c),
        Theory::Full => build_eliminated(geom, c),
        Theory::Vc => build_vc(geom, c),
    }
}

/// Gauss operator on the link register of any encoding.
pub fn gauss_op_for(theory: Theory, geom: &LatticeGeometry, x: i64, y: i64) -> PauliString {
    gauss_op_in(geom, theory.num_qubits(geom), x, y)
}

/// Generator of the local gauge symmetry in each encoding. In the eliminated
/// encoding the star measures the matter parity instead and is not
/// conserved; in VC it is the star times the parity of the matter qubit.
pub fn gauss_law_op(theory: Theory, geom: &LatticeGeometry, x: i64, y: i64) -> PauliString {
    let mut g = gauss_op_for(theory, geom, x, y);
    if theory == Theory::Vc {
        g.set(vc_matter(geom, x, y), Axis::Z);
    }
    g
}

fn commutator_norm(a: &CMat, b: &CMat) -> f64 {
    // i[A,B] is Hermitian, so its spectral norm is the largest |eigenvalue|.
    let c = (a * b - b * a) * Complex64::new(0.0, 1.0);
    let c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let e = crate::linalg::hermitian_eigen(&c).values;
    e.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// First-order product-formula bound (tδ/2)·Σᵢ‖Σ_{j>i}[Hᵢ,Hⱼ]‖.
pub fn trotter_error_bound(split: &HamiltonianSplit, t: f64, delta: f64) -> Result<f64> {
    if split.num_qubits() > 12 {
        return Err(Error::TooManyQubits { n: split.num_qubits(), limit: 12 });
    }
    if delta <= 0.0 || t < 0.0 {
        return Err(Error::InvalidArgument("need delta > 0 and t >= 0".into()));
    }
    let mats: Vec<CMat> = split.parts().iter().map(|(_, s)| s.to_matrix()).collect::<Result<_>>()?;
    let mut total = 0.0;
    for i in 0..mats.len() {
        if i + 1 == mats.len() {
            break;
        }
        let rest = mats[i + 1..].iter().fold(CMat::zeros(mats[i].nrows(), mats[i].ncols()), |acc, m| acc + m);
        total += commutator_norm(&mats[i], &rest);
    }
    Ok(0.5 * t * delta * total)
}
