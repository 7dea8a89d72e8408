//! Trotter-step compilation for the three encodings.
//!
//! A step is a [`Schedule`]: an ordered list of blocks, each exponentiating
//! one Pauli string (or a few commuting strings sharing a CX ladder). The
//! circuit of a step is the concatenation of the blocks, optionally followed
//! by [`peephole_keep`].
//!
//! The eliminated theory is scheduled as: electric layer, every two-body
//! hopping term, then four sweeps over the vertex classes `(x%2, y%2)` =
//! (0,0), (0,1), (1,0), (1,1). Each vertex `v=(x,y)` emits
//!
//! 1. the six-body horizontal hopping on `Right(x,y)`,
//! 2. the mass term on the star of `v`,
//! 3. the magnetic term of the plaquette below-right of `v`,
//! 4. the six-body vertical hopping on `Up(x,y-1)`.
//!
//! With the ladders below, three CX pairs cancel between neighbouring terms
//! of every block, which brings 20 CX per link down to 17.

use super::{basis_in, basis_out, peephole_keep, Circuit, Gate};
use crate::error::{Error, Result};
use crate::hamiltonians::{
    build, gauss_op, hopping_h_strings, hopping_v_strings, plaquette_x4, plaquette_y2x2z2, vc_hopping_h, vc_hopping_v,
    vc_matter, Couplings, Part, Theory,
};
use crate::lattice::{LatticeGeometry, LinkId};
use crate::linalg::CMat;
use crate::pauli::{Axis, PauliString};
use crate::simulator::{StateVector, DENSE_LIMIT};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Naive,
    #[default]
    Optimized,
}

impl std::str::FromStr for Mode {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(Mode::Naive),
            "optimized" | "optimised" => Ok(Mode::Optimized),
            _ => Err(crate::error::Error::InvalidArgument(format!("unknown mode '{s}'"))),
        }
    }
}

/// One term `coeff · string` of a Hamiltonian part.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub part: Part,
    pub coeff: f64,
    pub string: PauliString,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    /// exp(−iδ·coeff·string) as `B, L, R(2·coeff·δ), L†, B†`. With
    /// `x_rotation` the ladder collects X parity and the rotation is RX.
    Ladder { term: Term, basis: Vec<(usize, Axis)>, ladder: Vec<(usize, usize)>, rot: usize, x_rotation: bool },
    /// Commuting strings on a common support, sharing the CX chain over the
    /// qubits where all of them carry the same axis.
    Shared { terms: Vec<Term> },
}

impl Block {
    fn ladder(term: Term, basis: Vec<(usize, Axis)>, ladder: Vec<(usize, usize)>, rot: usize) -> Block {
        Block::Ladder { term, basis, ladder, rot, x_rotation: false }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Block::Ladder { term, .. } => vec![term],
            Block::Shared { terms } => terms.iter().collect(),
        }
    }

    fn emit(&self, delta: f64, out: &mut Circuit) {
        match self {
            Block::Ladder { term, basis, ladder, rot, x_rotation } => {
                let angle = 2.0 * term.coeff * delta;
                if *x_rotation {
                    for &(c, t) in ladder {
                        out.push(Gate::Cx(c, t)).unwrap();
                    }
                    out.push(Gate::Rx(*rot, angle)).unwrap();
                    for &(c, t) in ladder.iter().rev() {
                        out.push(Gate::Cx(c, t)).unwrap();
                    }
                } else {
                    super::emit_rotation(out, basis, ladder, *rot, angle);
                }
            }
            Block::Shared { terms } => emit_shared(terms, delta, out),
        }
    }

    /// The string this block's gates exponentiate, obtained by pushing the
    /// rotation axis back through the ladder and basis change.
    pub fn implemented_string(&self) -> Option<PauliString> {
        let Block::Ladder { term, basis, ladder, rot, x_rotation } = self else {
            return None;
        };
        let n = term.string.num_qubits();
        let mut s = PauliString::identity(n);
        let axis = if *x_rotation { Axis::X } else { Axis::Z };
        s.set(*rot, axis);
        for &(c, t) in ladder.iter().rev() {
            // CX maps Z_t to Z_c Z_t and X_c to X_c X_t.
            let (from, to) = if *x_rotation { (c, t) } else { (t, c) };
            if s.axis(from) == axis {
                let flipped = if s.axis(to) == axis { Axis::I } else { axis };
                s.set(to, flipped);
            }
        }
        for &(q, a) in basis {
            if s.axis(q) != Axis::Z {
                return None;
            }
            s.set(q, a);
        }
        Some(s)
    }
}

fn chain(list: &[usize], root: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = list.windows(2).map(|w| (w[0], w[1])).collect();
    if let Some(&last) = list.last() {
        out.push((last, root));
    }
    out
}

fn emit_shared(terms: &[Term], delta: f64, out: &mut Circuit) {
    let support = terms[0].string.support();
    assert!(terms.iter().all(|t| t.string.support() == support), "shared block needs a common support");
    let (common, varied): (Vec<usize>, Vec<usize>) =
        support.iter().partition(|&&q| terms.iter().all(|t| t.string.axis(q) == terms[0].string.axis(q)));
    let root = common[0];
    let common_basis: Vec<(usize, Axis)> = common.iter().map(|&q| (q, terms[0].string.axis(q))).collect();
    let common_ladder = chain(&common[1..], root);
    for &(q, a) in &common_basis {
        basis_in(out, q, a);
    }
    for &(c, t) in &common_ladder {
        out.push(Gate::Cx(c, t)).unwrap();
    }
    for term in terms {
        let basis: Vec<(usize, Axis)> = varied.iter().map(|&q| (q, term.string.axis(q))).collect();
        super::emit_rotation(out, &basis, &chain(&varied, root), root, 2.0 * term.coeff * delta);
    }
    for &(c, t) in common_ladder.iter().rev() {
        out.push(Gate::Cx(c, t)).unwrap();
    }
    for &(q, a) in common_basis.iter().rev() {
        basis_out(out, q, a);
    }
}

/// Ordered list of blocks making up one first-order Trotter step.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    n: usize,
    blocks: Vec<Block>,
}

/// A compiled step with the part each surviving gate came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledStep {
    pub circuit: Circuit,
    pub origin: Vec<Part>,
}

impl CompiledStep {
    pub fn cx_by_part(&self) -> BTreeMap<Part, usize> {
        let mut m = BTreeMap::new();
        for (g, p) in self.circuit.gates().iter().zip(&self.origin) {
            if g.is_cx() {
                *m.entry(*p).or_insert(0) += 1;
            }
        }
        m
    }
}

impl Schedule {
    pub fn new(n: usize, blocks: Vec<Block>) -> Self {
        Schedule { n, blocks }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// All terms in emission order.
    pub fn terms(&self) -> Vec<&Term> {
        self.blocks.iter().flat_map(|b| b.terms()).collect()
    }

    /// The step applied term by term as exact exponentials, in schedule order.
    pub fn apply_exact(&self, psi: &mut StateVector, delta: f64) {
        for t in self.terms() {
            psi.apply_pauli_exp(&t.string, t.coeff * delta);
        }
    }

    /// Dense unitary of [`Schedule::apply_exact`].
    pub fn exact_unitary(&self, delta: f64) -> Result<CMat> {
        if self.n > DENSE_LIMIT {
            return Err(Error::TooManyQubits { n: self.n, limit: DENSE_LIMIT });
        }
        let dim = 1usize << self.n;
        let mut u = CMat::zeros(dim, dim);
        for col in 0..dim {
            let mut psi = StateVector::basis(self.n, col);
            self.apply_exact(&mut psi, delta);
            u.column_mut(col).copy_from_slice(psi.amplitudes());
        }
        Ok(u)
    }

    pub fn compile(&self, delta: f64, mode: Mode) -> CompiledStep {
        let mut circuit = Circuit::new(self.n);
        let mut origin = Vec::new();
        for b in &self.blocks {
            let before = circuit.len();
            b.emit(delta, &mut circuit);
            origin.extend(std::iter::repeat_n(b.terms()[0].part, circuit.len() - before));
        }
        if mode == Mode::Optimized {
            let keep = peephole_keep(circuit.gates());
            let gates: Vec<Gate> = keep.iter().map(|&i| circuit.gates()[i]).collect();
            origin = keep.iter().map(|&i| origin[i]).collect();
            circuit = Circuit::new(self.n);
            for g in gates {
                circuit.push(g).unwrap();
            }
        }
        CompiledStep { circuit, origin }
    }
}

fn q(geom: &LatticeGeometry, l: LinkId) -> usize {
    geom.link_qubit(l)
}

fn electric_blocks(geom: &LatticeGeometry, n: usize, c: &Couplings) -> Vec<Block> {
    (0..geom.num_links())
        .map(|k| {
            let term =
                Term { part: Part::Electric, coeff: -2.0 * c.lambda_e, string: PauliString::single(n, k, Axis::Z) };
            Block::ladder(term, vec![], vec![], k)
        })
        .collect()
}

/// X⁴ on the plaquette at `(x,y)`: CX(bottom→right), CX(left→top),
/// CX(bottom→left), then RX on the bottom link. Every CX joins two links of
/// a common vertex.
pub fn magnetic_x4_block(geom: &LatticeGeometry, n: usize, c: &Couplings, x: i64, y: i64) -> Block {
    let bottom = q(geom, LinkId::right(x, y));
    let right = q(geom, LinkId::up(x + 1, y));
    let left = q(geom, LinkId::up(x, y));
    let top = q(geom, LinkId::right(x, y + 1));
    let term = Term { part: Part::Magnetic, coeff: -2.0 * c.lambda_b, string: plaquette_x4(geom, n, x, y) };
    Block::Ladder {
        term,
        basis: vec![],
        ladder: vec![(bottom, right), (left, top), (bottom, left)],
        rot: bottom,
        x_rotation: true,
    }
}

pub fn pure_schedule(geom: &LatticeGeometry, c: &Couplings) -> Schedule {
    let n = geom.num_links();
    let mut blocks = electric_blocks(geom, n, c);
    blocks.extend(geom.vertices().map(|(x, y)| magnetic_x4_block(geom, n, c, x, y)));
    Schedule { n, blocks }
}

/// Links around vertex `(x,y)` that the six-body ladders touch.
struct Roles {
    u: usize,
    r: usize,
    d: usize,
    l: usize,
    u1: usize,
    r1: usize,
    dw: usize,
    lw: usize,
    p1: usize,
    p2: usize,
}

impl Roles {
    fn at(geom: &LatticeGeometry, x: i64, y: i64) -> Roles {
        Roles {
            u: q(geom, LinkId::up(x, y)),
            r: q(geom, LinkId::right(x, y)),
            d: q(geom, LinkId::up(x, y - 1)),
            l: q(geom, LinkId::right(x - 1, y)),
            u1: q(geom, LinkId::up(x + 1, y)),
            r1: q(geom, LinkId::right(x + 1, y)),
            dw: q(geom, LinkId::up(x, y - 2)),
            lw: q(geom, LinkId::right(x - 1, y - 1)),
            p1: q(geom, LinkId::up(x + 1, y - 1)),
            p2: q(geom, LinkId::right(x, y - 1)),
        }
    }
}

/// The four terms of a vertex block, in the order the schedule emits them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexTerm {
    HopH,
    Mass,
    Magnetic,
    HopV,
}

pub const VERTEX_ORDER: [VertexTerm; 4] = [VertexTerm::HopH, VertexTerm::Mass, VertexTerm::Magnetic, VertexTerm::HopV];

/// Six-body horizontal hopping on `Right(x,y)`: Y on r, Z on u, l, d, u1, r1.
pub fn hop_h_long_block(geom: &LatticeGeometry, c: &Couplings, x: i64, y: i64) -> Block {
    let o = Roles::at(geom, x, y);
    let (coeff, _, string) = hopping_h_strings(geom, c, x, y);
    Block::ladder(
        Term { part: Part::HopH, coeff, string },
        vec![(o.r, Axis::Y)],
        vec![(o.l, o.u), (o.d, o.u), (o.r1, o.u1), (o.u, o.r), (o.u1, o.r)],
        o.r,
    )
}

/// Z⁴ on the star of `(x,y)`.
pub fn mass_block(geom: &LatticeGeometry, c: &Couplings, x: i64, y: i64) -> Block {
    let o = Roles::at(geom, x, y);
    Block::ladder(
        Term { part: Part::Mass, coeff: -0.5 * c.mass, string: gauss_op(geom, x, y) },
        vec![],
        vec![(o.l, o.u), (o.d, o.u), (o.u, o.r)],
        o.r,
    )
}

/// Six-body magnetic term of the plaquette at `(x, y-1)`, whose Z slots are
/// the `u` and `l` links of `(x,y)`.
pub fn magnetic_block(geom: &LatticeGeometry, c: &Couplings, x: i64, y: i64) -> Block {
    let o = Roles::at(geom, x, y);
    Block::ladder(
        Term { part: Part::Magnetic, coeff: -2.0 * c.lambda_b, string: plaquette_y2x2z2(geom, x, y - 1) },
        vec![(o.p1, Axis::Y), (o.p2, Axis::Y), (o.d, Axis::X), (o.r, Axis::X)],
        vec![(o.l, o.u), (o.r, o.d), (o.p1, o.p2), (o.u, o.d), (o.p2, o.d)],
        o.d,
    )
}

/// Six-body vertical hopping on `Up(x, y-1)`: Y on d, Z on u, r, l, dw, lw.
pub fn hop_v_long_block(geom: &LatticeGeometry, c: &Couplings, x: i64, y: i64) -> Block {
    let o = Roles::at(geom, x, y);
    let (coeff, _, string) = hopping_v_strings(geom, c, x, y - 1);
    Block::ladder(
        Term { part: Part::HopV, coeff, string },
        vec![(o.d, Axis::Y)],
        vec![(o.u, o.l), (o.dw, o.lw), (o.l, o.r), (o.r, o.d), (o.lw, o.d)],
        o.d,
    )
}

/// `Y_r Z_d(x+1,y)` with one CX.
pub fn hop_h_short_block(geom: &LatticeGeometry, c: &Couplings, x: i64, y: i64) -> Block {
    let o = Roles::at(geom, x, y);
    let (coeff, string, _) = hopping_h_strings(geom, c, x, y);
    Block::ladder(Term { part: Part::HopH, coeff, string }, vec![(o.r, Axis::Y)], vec![(o.p1, o.r)], o.r)
}

/// `Y_u Z_r` at `(x,y)` with one CX.
pub fn hop_v_short_block(geom: &LatticeGeometry, c: &Couplings, x: i64, y: i64) -> Block {
    let o = Roles::at(geom, x, y);
    let (coeff, string, _) = hopping_v_strings(geom, c, x, y);
    Block::ladder(Term { part: Part::HopV, coeff, string }, vec![(o.u, Axis::Y)], vec![(o.r, o.u)], o.u)
}

pub fn vertex_term_block(geom: &LatticeGeometry, c: &Couplings, x: i64, y: i64, which: VertexTerm) -> Block {
    match which {
        VertexTerm::HopH => hop_h_long_block(geom, c, x, y),
        VertexTerm::Mass => mass_block(geom, c, x, y),
        VertexTerm::Magnetic => magnetic_block(geom, c, x, y),
        VertexTerm::HopV => hop_v_long_block(geom, c, x, y),
    }
}

pub fn full_schedule(geom: &LatticeGeometry, c: &Couplings) -> Schedule {
    full_schedule_with(geom, c, &VERTEX_ORDER)
}

/// The eliminated-theory schedule with a custom per-vertex term order.
pub fn full_schedule_with(geom: &LatticeGeometry, c: &Couplings, order: &[VertexTerm]) -> Schedule {
    let n = geom.num_links();
    let mut blocks = electric_blocks(geom, n, c);
    for (x, y) in geom.vertices() {
        blocks.push(hop_h_short_block(geom, c, x, y));
        blocks.push(hop_v_short_block(geom, c, x, y));
    }
    for class in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        for (x, y) in geom.vertices().filter(|&(x, y)| (x % 2, y % 2) == class) {
            blocks.extend(order.iter().map(|&w| vertex_term_block(geom, c, x, y, w)));
        }
    }
    Schedule { n, blocks }
}

pub fn vc_schedule(geom: &LatticeGeometry, c: &Couplings) -> Schedule {
    let n = 2 * geom.num_links();
    let mut blocks = electric_blocks(geom, n, c);
    blocks.extend(geom.vertices().map(|(x, y)| magnetic_x4_block(geom, n, c, x, y)));
    for (x, y) in geom.vertices() {
        let m = vc_matter(geom, x, y);
        let coeff = crate::lattice::site_parity(x, y) as f64 * 0.5 * c.mass;
        let term = Term { part: Part::Mass, coeff, string: PauliString::single(n, m, Axis::Z) };
        blocks.push(Block::ladder(term, vec![], vec![], m));
    }
    let shared = |part: Part, pairs: [(f64, PauliString); 2]| Block::Shared {
        terms: pairs.into_iter().map(|(coeff, string)| Term { part, coeff, string }).collect(),
    };
    for (x, y) in geom.vertices() {
        blocks.push(shared(Part::HopH, vc_hopping_h(geom, c, x, y)));
    }
    for (x, y) in geom.vertices() {
        blocks.push(shared(Part::HopV, vc_hopping_v(geom, c, x, y)));
    }
    Schedule { n, blocks }
}

/// Generic ladder for one term: CX chain along the support, rotation on the
/// last support qubit.
pub fn generic_block(term: Term) -> Block {
    let support = term.string.support();
    let rot = *support.last().expect("non-identity term");
    let basis = term.string.axes();
    let ladder = chain(&support[..support.len() - 1], rot);
    Block::ladder(term, basis, ladder, rot)
}

/// exp(−iθ·part) as its own schedule. The pure-gauge parts reuse the
/// Trotter-step blocks; other parts use [`generic_block`] in canonical term
/// order.
pub fn part_schedule(theory: Theory, geom: &LatticeGeometry, c: &Couplings, part: Part) -> Schedule {
    let n = theory.num_qubits(geom);
    let blocks = match (theory, part) {
        (Theory::Pure, Part::Electric) => electric_blocks(geom, n, c),
        (Theory::Pure, Part::Magnetic) => geom.vertices().map(|(x, y)| magnetic_x4_block(geom, n, c, x, y)).collect(),
        _ => {
            let split = build(theory, geom, c);
            let sum = split.part(part).cloned().unwrap_or_else(|| crate::pauli::PauliSum::zero(n));
            sum.terms()
                .iter()
                .map(|(coeff, string)| generic_block(Term { part, coeff: *coeff, string: string.clone() }))
                .collect()
        }
    };
    Schedule { n, blocks }
}

pub fn schedule(theory: Theory, geom: &LatticeGeometry, c: &Couplings) -> Schedule {
    match theory {
        Theory::Pure => pure_schedule(geom, c),
        Theory::Full => full_schedule(geom, c),
        Theory::Vc => vc_schedule(geom, c),
    }
}

/// exp(−iδH_B)·exp(−iδH_E): electric RZ layer, then one X⁴ block per plaquette.
pub fn trotter_step_pure(geom: &LatticeGeometry, c: &Couplings, delta: f64) -> Circuit {
    pure_schedule(geom, c).compile(delta, Mode::Naive).circuit
}

pub fn trotter_step_full(geom: &LatticeGeometry, c: &Couplings, delta: f64, mode: Mode) -> Circuit {
    full_schedule(geom, c).compile(delta, mode).circuit
}

pub fn trotter_step_vc(geom: &LatticeGeometry, c: &Couplings, delta: f64) -> Circuit {
    vc_schedule(geom, c).compile(delta, Mode::Naive).circuit
}

pub fn trotter_step(theory: Theory, geom: &LatticeGeometry, c: &Couplings, delta: f64, mode: Mode) -> Circuit {
    match theory {
        Theory::Full => trotter_step_full(geom, c, delta, mode),
        Theory::Pure => trotter_step_pure(geom, c, delta),
        Theory::Vc => trotter_step_vc(geom, c, delta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, cx_count, peephole_cancel};
    use crate::hamiltonians::{build_eliminated, build_pure, build_vc};
    use crate::lattice::make_lattice;
    use crate::linalg::{expm_hermitian, phase_insensitive_overlap, CMat};
    use crate::pauli::PauliSum;
    use crate::simulator::StateVector;
    use rand::{Rng, SeedableRng};

    const SIZES: [(usize, usize); 4] = [(2, 2), (4, 4), (2, 4), (4, 2)];

    fn term_exp(t: &Term, delta: f64) -> CMat {
        let h = PauliSum::from_terms(t.string.num_qubits(), [(t.coeff, t.string.clone())], 0.0).unwrap();
        expm_hermitian(&h.to_matrix().unwrap(), delta)
    }

    fn ordered_product(s: &Schedule, delta: f64) -> CMat {
        let dim = 1 << s.num_qubits();
        s.terms().iter().fold(CMat::identity(dim, dim), |acc, t| term_exp(t, delta) * acc)
    }

    #[test]
    fn gate_counts_per_link() {
        let c = Couplings::default();
        for (m, n) in [(2, 2), (4, 4), (2, 4), (4, 2), (6, 4)] {
            let g = make_lattice(m, n).unwrap();
            let l = g.num_links();
            assert_eq!(cx_count(&trotter_step_pure(&g, &c, 0.1)).cx, 3 * l);
            assert_eq!(cx_count(&trotter_step_full(&g, &c, 0.1, Mode::Naive)).cx, 20 * l);
            assert_eq!(cx_count(&trotter_step_full(&g, &c, 0.1, Mode::Optimized)).cx, 17 * l);
            assert_eq!(cx_count(&trotter_step_vc(&g, &c, 0.1)).cx, 14 * l);
        }
    }

    #[test]
    fn per_term_costs() {
        let g = make_lattice(4, 4).unwrap();
        let c = Couplings::default();
        let cost = |b: Block| {
            let s = Schedule { n: g.num_links(), blocks: vec![b] };
            cx_count(&s.compile(0.1, Mode::Naive).circuit).cx
        };
        assert_eq!(cost(magnetic_block(&g, &c, 1, 1)), 10);
        assert_eq!(cost(mass_block(&g, &c, 1, 1)), 6);
        assert_eq!(cost(hop_h_long_block(&g, &c, 1, 1)) + cost(hop_h_short_block(&g, &c, 1, 1)), 12);
        assert_eq!(cost(hop_v_long_block(&g, &c, 1, 1)) + cost(hop_v_short_block(&g, &c, 1, 1)), 12);
    }

    #[test]
    fn ladders_implement_their_strings_on_every_size() {
        let c = Couplings::default();
        for (m, n) in SIZES {
            let g = make_lattice(m, n).unwrap();
            for s in [pure_schedule(&g, &c), full_schedule(&g, &c)] {
                for b in s.blocks() {
                    assert_eq!(b.implemented_string().as_ref(), Some(&b.terms()[0].string));
                }
            }
        }
    }

    #[test]
    fn schedules_cover_the_hamiltonian() {
        let c = Couplings::default();
        let g = make_lattice(4, 2).unwrap();
        for (s, h) in [
            (pure_schedule(&g, &c), build_pure(&g, &c)),
            (full_schedule(&g, &c), build_eliminated(&g, &c)),
            (vc_schedule(&g, &c), build_vc(&g, &c)),
        ] {
            let sum = PauliSum::from_terms(s.num_qubits(), s.terms().iter().map(|t| (t.coeff, t.string.clone())), 0.0)
                .unwrap();
            let mut want = h.total().unwrap();
            want = want.add(&PauliSum::from_terms(want.num_qubits(), [], -want.constant()).unwrap()).unwrap();
            assert_eq!(sum, want);
        }
    }

    #[test]
    fn cx_gates_join_adjacent_links() {
        let c = Couplings::default();
        for (m, n) in SIZES {
            let g = make_lattice(m, n).unwrap();
            for circ in [trotter_step_pure(&g, &c, 0.1), trotter_step_full(&g, &c, 0.1, Mode::Naive)] {
                for gate in circ.gates() {
                    if let Gate::Cx(a, b) = *gate {
                        assert!(g.links_adjacent(a, b), "{m}x{n}: CX({a},{b})");
                    }
                }
            }
        }
    }

    #[test]
    fn individual_blocks_match_exact_exponentials() {
        let g = make_lattice(2, 2).unwrap();
        let c = Couplings { lambda_e: 0.7, lambda_b: 1.3, eps: 0.4, mass: 0.9 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for (x, y) in g.vertices() {
            let blocks = [
                magnetic_x4_block(&g, 8, &c, x, y),
                magnetic_block(&g, &c, x, y),
                mass_block(&g, &c, x, y),
                hop_h_long_block(&g, &c, x, y),
                hop_v_long_block(&g, &c, x, y),
                hop_h_short_block(&g, &c, x, y),
                hop_v_short_block(&g, &c, x, y),
            ];
            for b in blocks {
                let delta = rng.random_range(-2.0..2.0);
                let s = Schedule { n: 8, blocks: vec![b.clone()] };
                let u = circuit_unitary(&s.compile(delta, Mode::Naive).circuit).unwrap();
                let ov = phase_insensitive_overlap(&u, &term_exp(b.terms()[0], delta));
                assert!(ov >= 1.0 - 1e-10, "{b:?}: {ov}");
            }
        }
    }

    #[test]
    fn pure_step_matches_part_exponentials() {
        let g = make_lattice(2, 2).unwrap();
        let c = Couplings::from_g(1.0);
        let h = build_pure(&g, &c);
        let d = 0.1;
        let exact = expm_hermitian(&h.part(Part::Magnetic).unwrap().to_matrix().unwrap(), d)
            * expm_hermitian(&h.part(Part::Electric).unwrap().to_matrix().unwrap(), d);
        let u = circuit_unitary(&trotter_step_pure(&g, &c, d)).unwrap();
        assert!(phase_insensitive_overlap(&u, &exact) >= 1.0 - 1e-10);
        let id = circuit_unitary(&trotter_step_pure(&g, &c, 0.0)).unwrap();
        assert!(phase_insensitive_overlap(&id, &CMat::identity(256, 256)) >= 1.0 - 1e-12);
    }

    #[test]
    fn full_step_modes_agree_with_ordered_product() {
        let g = make_lattice(2, 2).unwrap();
        let c = Couplings::default();
        let s = full_schedule(&g, &c);
        for d in [0.1, -0.37] {
            let exact = ordered_product(&s, d);
            let naive = circuit_unitary(&trotter_step_full(&g, &c, d, Mode::Naive)).unwrap();
            let opt = circuit_unitary(&trotter_step_full(&g, &c, d, Mode::Optimized)).unwrap();
            assert!(phase_insensitive_overlap(&naive, &exact) >= 1.0 - 1e-10);
            assert!(phase_insensitive_overlap(&opt, &exact) >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn optimized_is_peephole_of_naive() {
        let g = make_lattice(4, 4).unwrap();
        let c = Couplings::default();
        let naive = trotter_step_full(&g, &c, 0.2, Mode::Naive);
        assert_eq!(peephole_cancel(&naive), trotter_step_full(&g, &c, 0.2, Mode::Optimized));
    }

    #[test]
    fn other_vertex_orders_cancel_less() {
        let g = make_lattice(2, 2).unwrap();
        let c = Couplings::default();
        let order = [VertexTerm::HopH, VertexTerm::HopV, VertexTerm::Mass, VertexTerm::Magnetic];
        let cx = cx_count(&full_schedule_with(&g, &c, &order).compile(0.1, Mode::Optimized).circuit).cx;
        assert!(cx > 17 * g.num_links());
    }

    #[test]
    fn part_attribution_sums_to_total() {
        let g = make_lattice(2, 2).unwrap();
        let step = full_schedule(&g, &Couplings::default()).compile(0.1, Mode::Optimized);
        let by_part = step.cx_by_part();
        assert_eq!(by_part.values().sum::<usize>(), 136);
        assert!(!by_part.contains_key(&Part::Electric));
    }

    #[test]
    fn shared_ladder_pair_on_small_register() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let p = |s: &str| PauliString::parse(s).unwrap();
        for (a, b, sign) in [("XXXZ", "XYYZ", 1.0), ("XXYYX", "XYYXX", -1.0)] {
            let terms = vec![
                Term { part: Part::HopH, coeff: 0.3, string: p(a) },
                Term { part: Part::HopH, coeff: 0.3 * sign, string: p(b) },
            ];
            let delta = rng.random_range(-2.0..2.0);
            let s = Schedule { n: terms[0].string.num_qubits(), blocks: vec![Block::Shared { terms }] };
            let circ = s.compile(delta, Mode::Naive).circuit;
            assert_eq!(cx_count(&circ).cx, if a.len() == 4 { 10 } else { 12 });
            let u = circuit_unitary(&circ).unwrap();
            assert!(phase_insensitive_overlap(&u, &ordered_product(&s, delta)) >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn vc_step_matches_term_product_on_random_states() {
        let g = make_lattice(2, 2).unwrap();
        let c = Couplings::default();
        let s = vc_schedule(&g, &c);
        let delta = 0.1;
        let circ = trotter_step_vc(&g, &c, delta);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let psi = StateVector::random(16, &mut rng);
            let mut a = psi.clone();
            a.apply_circuit(&circ).unwrap();
            let mut b = psi;
            for t in s.terms() {
                b.apply_pauli_exp(&t.string, t.coeff * delta);
            }
            let ov = a.inner(&b).unwrap().norm();
            assert!(ov >= 1.0 - 1e-10, "{ov}");
        }
    }
}
