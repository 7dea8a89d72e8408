//! Periodic M×N lattice with gauge qubits on the links.
//!
//! Qubit numbering is fixed: `Right(x,y)` sits on qubit `2(yM+x)` and
//! `Up(x,y)` on qubit `2(yM+x)+1`. All coordinates wrap silently.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    Right,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkId {
    pub x: i64,
    pub y: i64,
    pub dir: Dir,
}

impl LinkId {
    pub fn right(x: i64, y: i64) -> Self {
        LinkId { x, y, dir: Dir::Right }
    }

    pub fn up(x: i64, y: i64) -> Self {
        LinkId { x, y, dir: Dir::Up }
    }
}

/// The four links touching a vertex. `u` and `r` leave the vertex, `d` and
/// `l` are the Up/Right links of the neighbours below and to the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexStar {
    pub u: LinkId,
    pub r: LinkId,
    pub d: LinkId,
    pub l: LinkId,
}

impl VertexStar {
    pub fn links(&self) -> [LinkId; 4] {
        [self.u, self.r, self.d, self.l]
    }
}

/// Links entering the six-body magnetic term of the plaquette with lower-left
/// corner `(x,y)`.
///
/// `p1`, `p2` carry Y, `p3`, `p4` carry X and `p5`, `p6` carry Z:
///
/// ```text
///   p1 = Up(x+1,y)     p2 = Right(x,y)
///   p3 = Up(x,y)       p4 = Right(x,y+1)
///   p5 = Up(x,y+1)     p6 = Right(x-1,y+1)
/// ```
///
/// `p3, p4, p5, p6` form the star of the top-left corner `(x,y+1)`. This is the
/// only choice of Z slots for which the magnetic term commutes with every
/// hopping term and with the other plaquettes (see the tests in
/// `hamiltonians`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlaquetteLinks {
    pub p1: LinkId,
    pub p2: LinkId,
    pub p3: LinkId,
    pub p4: LinkId,
    pub p5: LinkId,
    pub p6: LinkId,
}

impl PlaquetteLinks {
    pub fn edges(&self) -> [LinkId; 4] {
        [self.p1, self.p2, self.p3, self.p4]
    }

    pub fn all(&self) -> [LinkId; 6] {
        [self.p1, self.p2, self.p3, self.p4, self.p5, self.p6]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeGeometry {
    m: usize,
    n: usize,
}

pub fn make_lattice(m: usize, n: usize) -> Result<LatticeGeometry> {
    LatticeGeometry::new(m, n)
}

/// +1 on even sites, −1 on odd ones.
pub fn site_parity(x: i64, y: i64) -> i32 {
    if (x + y).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

impl LatticeGeometry {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(Error::TooSmall { m, n });
        }
        if !m.is_multiple_of(2) || !n.is_multiple_of(2) {
            return Err(Error::OddDimension { m, n });
        }
        Ok(LatticeGeometry { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_links(&self) -> usize {
        2 * self.m * self.n
    }

    pub fn num_vertices(&self) -> usize {
        self.m * self.n
    }

    pub fn num_plaquettes(&self) -> usize {
        self.m * self.n
    }

    fn wrap(&self, x: i64, y: i64) -> (i64, i64) {
        (x.rem_euclid(self.m as i64), y.rem_euclid(self.n as i64))
    }

    pub fn canonical(&self, link: LinkId) -> LinkId {
        let (x, y) = self.wrap(link.x, link.y);
        LinkId { x, y, dir: link.dir }
    }

    pub fn link_qubit(&self, link: LinkId) -> usize {
        let (x, y) = self.wrap(link.x, link.y);
        let base = 2 * (y as usize * self.m + x as usize);
        match link.dir {
            Dir::Right => base,
            Dir::Up => base + 1,
        }
    }

    pub fn qubit_link(&self, q: usize) -> Option<LinkId> {
        if q >= self.num_links() {
            return None;
        }
        let site = q / 2;
        let x = (site % self.m) as i64;
        let y = (site / self.m) as i64;
        Some(if q.is_multiple_of(2) { LinkId::right(x, y) } else { LinkId::up(x, y) })
    }

    pub fn links(&self) -> impl Iterator<Item = LinkId> + '_ {
        (0..self.num_links()).map(|q| self.qubit_link(q).unwrap())
    }

    /// Vertices in row-major order.
    pub fn vertices(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let m = self.m as i64;
        (0..self.num_vertices() as i64).map(move |i| (i % m, i / m))
    }

    pub fn vertex_index(&self, x: i64, y: i64) -> usize {
        let (x, y) = self.wrap(x, y);
        y as usize * self.m + x as usize
    }

    pub fn vertex_star(&self, x: i64, y: i64) -> VertexStar {
        let c = |l| self.canonical(l);
        VertexStar {
            u: c(LinkId::up(x, y)),
            r: c(LinkId::right(x, y)),
            d: c(LinkId::up(x, y - 1)),
            l: c(LinkId::right(x - 1, y)),
        }
    }

    pub fn plaquette_links(&self, x: i64, y: i64) -> PlaquetteLinks {
        let c = |l| self.canonical(l);
        PlaquetteLinks {
            p1: c(LinkId::up(x + 1, y)),
            p2: c(LinkId::right(x, y)),
            p3: c(LinkId::up(x, y)),
            p4: c(LinkId::right(x, y + 1)),
            p5: c(LinkId::up(x, y + 1)),
            p6: c(LinkId::right(x - 1, y + 1)),
        }
    }

    /// The two endpoints of a link, wrapped.
    pub fn endpoints(&self, link: LinkId) -> [(i64, i64); 2] {
        let a = self.wrap(link.x, link.y);
        let b = match link.dir {
            Dir::Right => self.wrap(link.x + 1, link.y),
            Dir::Up => self.wrap(link.x, link.y + 1),
        };
        [a, b]
    }

    /// True when the two link qubits are distinct links sharing a vertex.
    pub fn links_adjacent(&self, qa: usize, qb: usize) -> bool {
        let (Some(a), Some(b)) = (self.qubit_link(qa), self.qubit_link(qb)) else {
            return false;
        };
        if qa == qb {
            return false;
        }
        let ea = self.endpoints(a);
        let eb = self.endpoints(b);
        ea.iter().any(|p| eb.contains(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn sizes_and_errors() {
        let g = make_lattice(2, 2).unwrap();
        assert_eq!((g.num_links(), g.num_vertices(), g.num_plaquettes()), (8, 4, 4));
        assert_eq!(make_lattice(4, 4).unwrap().num_links(), 32);
        assert_eq!(make_lattice(3, 2), Err(Error::OddDimension { m: 3, n: 2 }));
        assert_eq!(make_lattice(0, 2), Err(Error::TooSmall { m: 0, n: 2 }));
    }

    #[test]
    fn qubit_numbering_is_a_bijection() {
        for (m, n) in [(2, 2), (2, 4), (4, 2), (4, 4), (6, 4)] {
            let g = make_lattice(m, n).unwrap();
            let mut seen: Vec<usize> = g.links().map(|l| g.link_qubit(l)).collect();
            seen.sort();
            assert_eq!(seen, (0..g.num_links()).collect::<Vec<_>>());
            for q in 0..g.num_links() {
                assert_eq!(g.link_qubit(g.qubit_link(q).unwrap()), q);
            }
        }
    }

    #[test]
    fn wrap_around() {
        let g = make_lattice(2, 2).unwrap();
        assert_eq!(g.link_qubit(LinkId::right(2, 0)), g.link_qubit(LinkId::right(0, 0)));
        assert_eq!(g.link_qubit(LinkId::up(-1, 3)), g.link_qubit(LinkId::up(1, 1)));
    }

    #[test]
    fn star_at_origin_on_2x2() {
        let g = make_lattice(2, 2).unwrap();
        let s = g.vertex_star(0, 0);
        assert_eq!(s.u, LinkId::up(0, 0));
        assert_eq!(s.r, LinkId::right(0, 0));
        assert_eq!(s.d, LinkId::up(0, 1));
        assert_eq!(s.l, LinkId::right(1, 0));
        assert_eq!(g.vertex_star(2, 0), s);
    }

    #[test]
    fn stars_and_plaquettes_have_distinct_links() {
        for (m, n) in [(2, 2), (4, 4), (2, 4)] {
            let g = make_lattice(m, n).unwrap();
            for (x, y) in g.vertices() {
                let s: HashSet<_> = g.vertex_star(x, y).links().iter().map(|l| g.link_qubit(*l)).collect();
                assert_eq!(s.len(), 4);
                let p: HashSet<_> = g.plaquette_links(x, y).all().iter().map(|l| g.link_qubit(*l)).collect();
                assert_eq!(p.len(), 6);
            }
        }
    }

    #[test]
    fn every_link_borders_two_plaquettes_and_two_stars() {
        let g = make_lattice(4, 2).unwrap();
        let mut faces = vec![0; g.num_links()];
        let mut out_roles = vec![0; g.num_links()];
        let mut in_roles = vec![0; g.num_links()];
        for (x, y) in g.vertices() {
            for l in g.plaquette_links(x, y).edges() {
                faces[g.link_qubit(l)] += 1;
            }
            let s = g.vertex_star(x, y);
            out_roles[g.link_qubit(s.u)] += 1;
            out_roles[g.link_qubit(s.r)] += 1;
            in_roles[g.link_qubit(s.d)] += 1;
            in_roles[g.link_qubit(s.l)] += 1;
        }
        assert!(faces.iter().all(|&c| c == 2));
        assert!(out_roles.iter().all(|&c| c == 1));
        assert!(in_roles.iter().all(|&c| c == 1));
    }

    #[test]
    fn translation_covariance() {
        let g = make_lattice(4, 4).unwrap();
        let shift = |l: LinkId| g.canonical(LinkId { x: l.x + 1, ..l });
        for (x, y) in g.vertices() {
            let a = g.vertex_star(x, y);
            let b = g.vertex_star(x + 1, y);
            assert_eq!(a.links().map(shift), b.links());
            let p = g.plaquette_links(x, y);
            let q = g.plaquette_links(x + 1, y);
            assert_eq!(p.all().map(shift), q.all());
        }
    }

    #[test]
    fn parity() {
        assert_eq!(site_parity(0, 0), 1);
        assert_eq!(site_parity(1, 0), -1);
        assert_eq!(site_parity(2, 2), 1);
        assert_eq!(site_parity(-1, 0), -1);
    }

    #[test]
    fn adjacency() {
        let g = make_lattice(4, 4).unwrap();
        let q = |l| g.link_qubit(l);
        assert!(g.links_adjacent(q(LinkId::right(0, 0)), q(LinkId::up(1, 0))));
        assert!(g.links_adjacent(q(LinkId::right(0, 0)), q(LinkId::up(0, 3))));
        assert!(!g.links_adjacent(q(LinkId::right(0, 0)), q(LinkId::right(0, 1))));
        assert!(!g.links_adjacent(q(LinkId::right(0, 0)), q(LinkId::right(0, 0))));
    }
}
