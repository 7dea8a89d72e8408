//! Small dense helpers used by the exact solvers and the test oracles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn hermitian_eigen(h: &CMat) -> HermitianEigen {
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

impl HermitianEigen {
    /// exp(−i·t·H).
    pub fn propagator(&self, t: f64) -> CMat {
        let mut scaled = self.vectors.clone();
        for (c, e) in self.values.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -e * t);
            scaled.column_mut(c).iter_mut().for_each(|z| *z *= ph);
        }
        scaled * self.vectors.adjoint()
    }

    /// exp(−i·t·H)·ψ without forming the full propagator.
    pub fn evolve(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let v = CVec::from_column_slice(psi);
        let mut coeffs = self.vectors.adjoint() * v;
        for (c, e) in coeffs.iter_mut().zip(&self.values) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        (&self.vectors * coeffs).iter().copied().collect()
    }
}

/// exp(−i·t·H) for Hermitian H.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    hermitian_eigen(h).propagator(t)
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> f64 {
    let g = a.adjoint() * a;
    let g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let top = hermitian_eigen(&g).values.last().copied().unwrap_or(0.0);
    top.max(0.0).sqrt()
}

/// Largest |entry|.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// |tr(U†V)| / dim; equals 1 iff U and V agree up to a global phase.
pub fn phase_insensitive_overlap(u: &CMat, v: &CMat) -> f64 {
    let tr: Complex64 = (u.adjoint() * v).trace();
    tr.norm() / u.nrows() as f64
}
