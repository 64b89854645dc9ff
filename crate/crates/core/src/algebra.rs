//! Magnetic matrices: the twisted-convolution representation of the
//! rotation algebra used for equivalence tests.
//!
//! A finitely supported symbol f: ℤ² → ℂ^{n×n} is realized on a finite index
//! box as the operator with kernel
//!     A^h(f)[γ,δ] = e^{−i(h/2)σ(γ,δ)} f(γ−δ),
//! σ(γ,δ) = γ₁δ₂ − δ₁γ₂. The product of two magnetic matrices is again one,
//! with symbol given by the twisted convolution #_h, and the adjoint
//! corresponds to the involution f*(γ) = conj(f(−γ))ᵀ.

use crate::lattice::LatticeKind;
use crate::linalg::CMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Finitely supported ℂ^{n×n}-valued symbol on ℤ².
#[derive(Debug, Clone)]
pub struct Symbol {
    pub n: usize,
    pub terms: BTreeMap<(i64, i64), CMatrix>,
}

impl Symbol {
    pub fn new(n: usize) -> Self {
        Symbol { n, terms: BTreeMap::new() }
    }

    pub fn insert(&mut self, gamma: (i64, i64), m: CMatrix) {
        assert_eq!((m.nrows(), m.ncols()), (self.n, self.n));
        match self.terms.get_mut(&gamma) {
            Some(existing) => *existing += m,
            None => {
                self.terms.insert(gamma, m);
            }
        }
    }

    pub fn scalar(gamma: (i64, i64), v: Complex64) -> Self {
        let mut s = Symbol::new(1);
        s.insert(gamma, CMatrix::from_element(1, 1, v));
        s
    }

    /// δ₀·c — the identity element scaled by c.
    pub fn delta0(n: usize, c: Complex64) -> Self {
        let mut s = Symbol::new(n);
        s.insert((0, 0), CMatrix::identity(n, n) * c);
        s
    }

    pub fn get(&self, gamma: (i64, i64)) -> CMatrix {
        self.terms
            .get(&gamma)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.n, self.n))
    }

    /// Involution f*(γ) = conj(f(−γ))ᵀ; A^h(f*) = A^h(f)†.
    pub fn involution(&self) -> Symbol {
        let mut out = Symbol::new(self.n);
        for (&(g1, g2), m) in &self.terms {
            out.insert((-g1, -g2), m.adjoint());
        }
        out
    }

    pub fn support(&self) -> Vec<(i64, i64)> {
        self.terms.keys().copied().collect()
    }
}

/// Hopping symbol of the square-lattice operator (negative convention):
/// value −1/4 at the four unit steps.
pub fn a_square() -> Symbol {
    let mut s = Symbol::new(1);
    let v = CMatrix::from_element(1, 1, Complex64::new(-0.25, 0.0));
    for g in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
        s.insert(g, v.clone());
    }
    s
}

/// Hopping symbol of the honeycomb operator (negative convention):
/// 2×2 blocks coupling the two sublattices.
pub fn a_hex() -> Symbol {
    let mut s = Symbol::new(2);
    let c = Complex64::new(-1.0 / 3.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let onsite = CMatrix::from_row_slice(2, 2, &[z, c, c, z]);
    let upper = CMatrix::from_row_slice(2, 2, &[z, c, z, z]);
    let lower = CMatrix::from_row_slice(2, 2, &[z, z, c, z]);
    s.insert((0, 0), onsite);
    s.insert((1, 0), upper.clone());
    s.insert((0, 1), upper);
    s.insert((-1, 0), lower.clone());
    s.insert((0, -1), lower);
    s
}

pub fn hopping_symbol(kind: LatticeKind) -> Symbol {
    match kind {
        LatticeKind::Square => a_square(),
        LatticeKind::Hex => a_hex(),
    }
}

/// Magnetic matrix A^h(f) realized densely on the index box [−L, L]².
#[derive(Debug, Clone)]
pub struct MagneticMatrix {
    pub h: f64,
    pub box_radius: i64,
    pub n: usize,
    pub matrix: CMatrix,
}

/// σ(γ,δ) = γ₁δ₂ − δ₁γ₂.
#[inline]
pub fn sigma_symp(g: (i64, i64), d: (i64, i64)) -> f64 {
    (g.0 * d.1 - d.0 * g.1) as f64
}

/// Realize A^h(f) on the box γ ∈ [−L, L]², dimension n·(2L+1)².
pub fn magnetic_matrix(symbol: &Symbol, h: f64, box_radius: i64) -> MagneticMatrix {
    let l = box_radius;
    let side = (2 * l + 1) as usize;
    let n = symbol.n;
    let dim = n * side * side;
    let mut m = CMatrix::zeros(dim, dim);
    let cell_of = |i: usize| -> (i64, i64) {
        let c = (i / n) as i64;
        (c % side as i64 - l, c / side as i64 - l)
    };
    let index_of = |g: (i64, i64), comp: usize| -> usize {
        (((g.1 + l) * side as i64 + (g.0 + l)) as usize) * n + comp
    };
    for row in 0..dim {
        let gamma = cell_of(row);
        let ri = row % n;
        for (&off, blk) in &symbol.terms {
            let delta = (gamma.0 - off.0, gamma.1 - off.1);
            if delta.0.abs() > l || delta.1.abs() > l {
                continue;
            }
            let phase = Complex64::from_polar(1.0, -0.5 * h * sigma_symp(gamma, delta));
            for cj in 0..n {
                let v = blk[(ri, cj)];
                if v != Complex64::new(0.0, 0.0) {
                    m[(row, index_of(delta, cj))] += phase * v;
                }
            }
        }
    }
    MagneticMatrix { h, box_radius, n, matrix: m }
}

/// Twisted convolution (f #_h g)(γ) = Σ_z f(γ−z) g(z) e^{−i(h/2)σ(γ,z)};
/// satisfies A^h(f #_h g) = A^h(f)·A^h(g) on interior indices.
pub fn hash_product(f: &Symbol, g: &Symbol, h: f64) -> Symbol {
    assert_eq!(f.n, g.n);
    let mut out = Symbol::new(f.n);
    for (&zf, mf) in &f.terms {
        for (&zg, mg) in &g.terms {
            let gamma = (zf.0 + zg.0, zf.1 + zg.1);
            let phase = Complex64::from_polar(1.0, -0.5 * h * sigma_symp(gamma, zg));
            out.insert(gamma, mf * mg * phase);
        }
    }
    // drop numerically vanished terms so support statements stay sharp
    out.terms.retain(|_, m| m.iter().any(|z| z.norm() > 1e-15));
    out
}
