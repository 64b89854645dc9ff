//! Finite-volume magnetic random Hamiltonians and magnetic translations.
//!
//! The Hamiltonians act on ℓ²(sites) of an L×L patch of cells, either with
//! magnetic-periodic boundary conditions (torus) or with open boundaries.
//! Hopping carries the symmetric-gauge Peierls phase e^{−iA_e} of the
//! [`lattice`](crate::lattice) catalog and prefactor −1/4 (square) or −1/3
//! (hex); the diagonal is λ·V_ω for an i.i.d. disorder field V_ω.
//!
//! Torus boundary conditions identify u(γ + L·e_i) with W_i(γ)·u(γ) where
//! W_i are the magnetic-translation wrap phases, so every plaquette crossing
//! the seam carries the same flux h as the bulk. This requires hL² ∈ 2πℤ;
//! we enforce the stronger (and Floquet-friendly) condition q | L at flux
//! 2πp/q.

use crate::error::{Error, Result};
use crate::lattice::{build_lattice, Flux, LatticeKind, LatticeSpec};
use crate::linalg::CMatrix;
use crate::rng::{self, Stream};
use num_complex::Complex64;
use serde::Serialize;

/// Finite region: torus or open box, both L×L cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Torus { l: usize },
    Box { l: usize },
}

impl Region {
    pub fn l(&self) -> usize {
        match *self {
            Region::Torus { l } | Region::Box { l } => l,
        }
    }
    pub fn is_torus(&self) -> bool {
        matches!(self, Region::Torus { .. })
    }
}

/// Single-site disorder distribution with compact support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Distribution {
    None,
    Uniform { a: f64, b: f64 },
    Bernoulli { w: f64 },
    TwoPoint { v1: f64, v2: f64, p: f64 },
}

impl Distribution {
    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::None => 0.0,
            Distribution::Uniform { a, b } => 0.5 * (a + b),
            Distribution::Bernoulli { .. } => 0.0,
            Distribution::TwoPoint { v1, v2, p } => p * v1 + (1.0 - p) * v2,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Distribution::None => 0.0,
            Distribution::Uniform { a, b } => (b - a) * (b - a) / 12.0,
            Distribution::Bernoulli { w } => w * w,
            Distribution::TwoPoint { v1, v2, p } => p * (1.0 - p) * (v1 - v2) * (v1 - v2),
        }
    }

    /// sup |V| over the support.
    pub fn sup_abs(&self) -> f64 {
        match *self {
            Distribution::None => 0.0,
            Distribution::Uniform { a, b } => a.abs().max(b.abs()),
            Distribution::Bernoulli { w } => w.abs(),
            Distribution::TwoPoint { v1, v2, .. } => v1.abs().max(v2.abs()),
        }
    }

    fn draw(&self, seed: u64, realization: u64, site: u64) -> f64 {
        match *self {
            Distribution::None => 0.0,
            Distribution::Uniform { a, b } => {
                a + (b - a) * rng::uniform01(seed, Stream::Disorder, realization, site)
            }
            Distribution::Bernoulli { w } => {
                if rng::bits(seed, Stream::Disorder, realization, site) & 1 == 0 {
                    w
                } else {
                    -w
                }
            }
            Distribution::TwoPoint { v1, v2, p } => {
                if rng::uniform01(seed, Stream::Disorder, realization, site) < p {
                    v1
                } else {
                    v2
                }
            }
        }
    }
}

/// Disorder specification: distribution, coupling λ ≥ 0 and base seed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DisorderSpec {
    pub distribution: Distribution,
    pub lambda: f64,
    pub seed: u64,
}

impl DisorderSpec {
    pub fn none() -> Self {
        DisorderSpec { distribution: Distribution::None, lambda: 0.0, seed: 0 }
    }

    pub fn new(distribution: Distribution, lambda: f64, seed: u64) -> Result<Self> {
        if lambda < 0.0 {
            return Err(Error::Validation(format!("disorder coupling λ must be ≥ 0, got {lambda}")));
        }
        Ok(DisorderSpec { distribution, lambda, seed })
    }

    pub fn mean(&self) -> f64 {
        self.distribution.mean()
    }
    pub fn variance(&self) -> f64 {
        self.distribution.variance()
    }
}

/// One realization of the i.i.d. field V_ω on a region, indexed like the
/// operator sites. Deterministic in (seed, realization index, site index).
pub fn sample_potential(
    spec: &DisorderSpec,
    lat: &LatticeSpec,
    region: Region,
    realization: u64,
) -> Vec<f64> {
    let l = region.l();
    let n = lat.sites_per_cell() * l * l;
    (0..n)
        .map(|i| spec.distribution.draw(spec.seed, realization, i as u64))
        .collect()
}

/// Compressed sparse rows over Complex64; rows are Hermitian partners of
/// columns by construction.
#[derive(Debug, Clone)]
pub struct SparseHermitian {
    pub dim: usize,
    pub row_ptr: Vec<u32>,
    pub cols: Vec<u32>,
    pub vals: Vec<Complex64>,
}

impl SparseHermitian {
    fn from_triplets(dim: usize, triplets: &mut Vec<(u32, u32, Complex64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0u32; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets.iter() {
            // merge duplicates
            if row_ptr[r as usize + 1] > row_ptr[r as usize]
                && *cols.last().unwrap() == c
                && cols.len() as u32 == row_ptr[r as usize + 1]
            {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r as usize + 1] += 1;
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseHermitian { dim, row_ptr, cols, vals }
    }

    /// y = M x.
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            let lo = self.row_ptr[r] as usize;
            let hi = self.row_ptr[r + 1] as usize;
            for k in lo..hi {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[r] = acc;
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r] as usize..self.row_ptr[r + 1] as usize {
                m[(r, self.cols[k] as usize)] += self.vals[k];
            }
        }
        m
    }

    /// max |M − M†| over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for k in self.row_ptr[r] as usize..self.row_ptr[r + 1] as usize {
                let c = self.cols[k] as usize;
                let mut partner = Complex64::new(0.0, 0.0);
                for k2 in self.row_ptr[c] as usize..self.row_ptr[c + 1] as usize {
                    if self.cols[k2] as usize == r {
                        partner = self.vals[k2];
                    }
                }
                let d = (self.vals[k] - partner.conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Finite-volume magnetic Schrödinger operator H^h_{λ,ω}.
#[derive(Debug, Clone)]
pub struct MagneticOperator {
    pub lattice: LatticeSpec,
    pub flux: Flux,
    pub disorder: DisorderSpec,
    pub realization: u64,
    pub region: Region,
    pub potential: Vec<f64>,
    pub matrix: SparseHermitian,
}

impl MagneticOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    /// Operator-norm bound 1 + λ·sup|V| from Schur's test on the hopping part.
    pub fn norm_bound(&self) -> f64 {
        1.0 + self.disorder.lambda * self.disorder.distribution.sup_abs()
    }

    pub fn to_dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }

    /// Flat site index of (cell, sublattice site).
    pub fn site_index(&self, gamma: (usize, usize), s: usize) -> usize {
        let l = self.region.l();
        (gamma.1 * l + gamma.0) * self.lattice.sites_per_cell() + s
    }

    /// Geometric position of a flat site index, in lattice embedding
    /// coordinates relative to the cell origin `origin_cell`.
    pub fn site_position(&self, idx: usize, origin_cell: (i64, i64)) -> [f64; 2] {
        let ns = self.lattice.sites_per_cell();
        let l = self.region.l();
        let s = idx % ns;
        let cell = idx / ns;
        let c1 = (cell % l) as i64 - origin_cell.0;
        let c2 = (cell / l) as i64 - origin_cell.1;
        self.lattice.position((c1, c2), s)
    }
}

/// Magnetic-translation wrap phase for crossing the torus seam once in
/// direction `dir` (0 → +L·e₁, 1 → +L·e₂): u(γ + L·e_dir, s) = W·u(γ, s).
fn wrap_phase(kind: LatticeKind, h: f64, l: usize, dir: usize, cell: (i64, i64), s: usize) -> Complex64 {
    let lf = l as f64;
    let (c1, c2) = (cell.0 as f64, cell.1 as f64);
    let i = Complex64::i();
    match (kind, dir) {
        (LatticeKind::Square, 0) => (i * 0.5 * h * lf * c2).exp(),
        (LatticeKind::Square, 1) => (-i * 0.5 * h * lf * c1).exp(),
        (LatticeKind::Hex, 0) => {
            let site = if s == 1 { (i * h * lf / 6.0).exp() } else { Complex64::new(1.0, 0.0) };
            (-i * 0.5 * h * lf * c2).exp() * site
        }
        (LatticeKind::Hex, 1) => {
            let site = if s == 1 { (-i * h * lf / 6.0).exp() } else { Complex64::new(1.0, 0.0) };
            (i * 0.5 * h * lf * c1).exp() * site
        }
        _ => unreachable!(),
    }
}

/// Reduce an unwrapped cell coordinate into [0,L)², accumulating the wrap
/// phases for site `s`. Returns (in-range cell, phase).
fn reduce_cell(
    kind: LatticeKind,
    h: f64,
    l: usize,
    mut cell: (i64, i64),
    s: usize,
) -> ((usize, usize), Complex64) {
    let li = l as i64;
    let mut w = Complex64::new(1.0, 0.0);
    while cell.0 < 0 {
        // u(c) = conj(W₁(c)) u(c + L e₁)
        w *= wrap_phase(kind, h, l, 0, cell, s).conj();
        cell.0 += li;
    }
    while cell.0 >= li {
        cell.0 -= li;
        w *= wrap_phase(kind, h, l, 0, cell, s);
    }
    while cell.1 < 0 {
        w *= wrap_phase(kind, h, l, 1, cell, s).conj();
        cell.1 += li;
    }
    while cell.1 >= li {
        cell.1 -= li;
        w *= wrap_phase(kind, h, l, 1, cell, s);
    }
    ((cell.0 as usize, cell.1 as usize), w)
}

/// Build H^h_{λ,ω} on the region with the given boundary condition.
///
/// Torus preconditions: rational flux 2πp/q and q | L.
pub fn build_hamiltonian(
    kind: LatticeKind,
    flux: Flux,
    disorder: &DisorderSpec,
    region: Region,
    realization: u64,
) -> Result<MagneticOperator> {
    let lat = build_lattice(kind);
    let potential = sample_potential(disorder, &lat, region, realization);
    build_hamiltonian_with_potential(kind, flux, disorder, region, realization, potential)
}

/// Same, but with an explicitly supplied potential realization (used e.g.
/// for antithetic ±V pairs in the disorder-scaling checks).
pub fn build_hamiltonian_with_potential(
    kind: LatticeKind,
    flux: Flux,
    disorder: &DisorderSpec,
    region: Region,
    realization: u64,
    potential: Vec<f64>,
) -> Result<MagneticOperator> {
    let lat = build_lattice(kind);
    let l = region.l();
    if l == 0 {
        return Err(Error::Validation("region must contain at least one cell".into()));
    }
    if region.is_torus() {
        let (p, q) = flux.pq().map_err(|_| {
            Error::Validation("torus boundary conditions require a rational flux 2πp/q".into())
        })?;
        if l % q as usize != 0 {
            return Err(Error::IncommensurateTorus { p, q, l });
        }
    }
    let h = flux.value;
    let ns = lat.sites_per_cell();
    let dim = ns * l * l;
    if potential.len() != dim {
        return Err(Error::Validation(format!(
            "potential has {} entries for dimension {dim}",
            potential.len()
        )));
    }
    let hop = Complex64::new(lat.hopping(), 0.0);
    let idx = |c: (usize, usize), s: usize| ((c.1 * l + c.0) * ns + s) as u32;

    let mut triplets: Vec<(u32, u32, Complex64)> = Vec::with_capacity(dim * 5);
    for c2 in 0..l as i64 {
        for c1 in 0..l as i64 {
            let from_cell = (c1 as usize, c2 as usize);
            for e in &lat.edge_types {
                let target = (c1 + e.cell_offset.0, c2 + e.cell_offset.1);
                let amp = if region.is_torus() {
                    let (cell, w) = reduce_cell(kind, h, l, target, e.to_site);
                    Some((cell, w))
                } else if target.0 >= 0 && target.0 < l as i64 && target.1 >= 0 && target.1 < l as i64 {
                    Some(((target.0 as usize, target.1 as usize), Complex64::new(1.0, 0.0)))
                } else {
                    None
                };
                if let Some((to_cell, wrap)) = amp {
                    let a = lat.edge_phase(e, (c1, c2), h);
                    let v = hop * (-Complex64::i() * a).exp() * wrap;
                    let r = idx(from_cell, e.from_site);
                    let c = idx(to_cell, e.to_site);
                    triplets.push((r, c, v));
                    triplets.push((c, r, v.conj()));
                }
            }
            for s in 0..ns {
                let r = idx(from_cell, s);
                let v = disorder.lambda * potential[r as usize];
                if v != 0.0 {
                    triplets.push((r, r, Complex64::new(v, 0.0)));
                }
            }
        }
    }
    let matrix = SparseHermitian::from_triplets(dim, &mut triplets);
    Ok(MagneticOperator {
        lattice: lat,
        flux,
        disorder: *disorder,
        realization,
        region,
        potential,
        matrix,
    })
}

/// Magnetic translation T^h_γ on the torus, as a sparse unitary.
#[derive(Debug, Clone)]
pub struct MagneticTranslation {
    pub gamma: (i64, i64),
    pub matrix: SparseHermitian, // not Hermitian; reusing the CSR container
}

/// Magnetic translation by γ on an L×L torus at rational flux.
///
/// Square: T^h_γ = (T^h_{(1,0)})^{γ₁}(T^h_{(0,1)})^{γ₂} with the paper's
/// elementary translations, giving the prefactor
/// exp(i(h/2)(γ₁c₂ − γ₂c₁ + γ₁γ₂)); hex: prefactor exp(i(h/2)σ(γ,c)) with
/// the extra e^{iα(γ)}, α = (h/6)(γ₁−γ₂), on the r₁ sublattice.
pub fn magnetic_translation(
    kind: LatticeKind,
    flux: Flux,
    region: Region,
    gamma: (i64, i64),
) -> Result<MagneticTranslation> {
    if !region.is_torus() {
        return Err(Error::Validation("magnetic translations are defined on the torus".into()));
    }
    let l = region.l();
    let (p, q) = flux.pq()?;
    if l % q as usize != 0 {
        return Err(Error::IncommensurateTorus { p, q, l });
    }
    let h = flux.value;
    let lf = l as f64;
    // Wraparound compatibility: hLγ_i ∈ 2πZ (holds automatically when q | L).
    for &g in &[gamma.0, gamma.1] {
        let cycles = h * lf * g as f64 / (2.0 * std::f64::consts::PI);
        if (cycles - cycles.round()).abs() > 1e-9 {
            return Err(Error::IncompatibleTranslation { g1: gamma.0, g2: gamma.1, l });
        }
    }
    let lat = build_lattice(kind);
    let ns = lat.sites_per_cell();
    let dim = ns * l * l;
    let idx = |c: (usize, usize), s: usize| ((c.1 * l + c.0) * ns + s) as u32;
    let i = Complex64::i();
    let (g1, g2) = (gamma.0 as f64, gamma.1 as f64);
    let alpha = h / 6.0 * (g1 - g2);

    let mut triplets: Vec<(u32, u32, Complex64)> = Vec::with_capacity(dim);
    for c2 in 0..l as i64 {
        for c1 in 0..l as i64 {
            for s in 0..ns {
                let phase = match kind {
                    LatticeKind::Square => {
                        (i * 0.5 * h * (g1 * c2 as f64 - g2 * c1 as f64 + g1 * g2)).exp()
                    }
                    LatticeKind::Hex => {
                        let base = (i * 0.5 * h * (g1 * c2 as f64 - c1 as f64 * g2)).exp();
                        if s == 1 {
                            base * (i * alpha).exp()
                        } else {
                            base
                        }
                    }
                };
                let (src, w) = reduce_cell(kind, h, l, (c1 - gamma.0, c2 - gamma.1), s);
                triplets.push((idx((c1 as usize, c2 as usize), s), idx(src, s), phase * w));
            }
        }
    }
    let matrix = SparseHermitian::from_triplets(dim, &mut triplets);
    Ok(MagneticTranslation { gamma, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh, hermiticity_defect};
    use std::f64::consts::PI;

    fn dense_commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
        let ab = a * b;
        let ba = b * a;
        (&ab - &ba).iter().map(|z| z.norm()).fold(0.0f64, f64::max)
    }

    #[test]
    fn sample_potential_contracts() {
        let lat = build_lattice(LatticeKind::Square);
        let none = DisorderSpec::none();
        let v = sample_potential(&none, &lat, Region::Torus { l: 8 }, 0);
        assert!(v.iter().all(|&x| x == 0.0));

        let uni = DisorderSpec::new(Distribution::Uniform { a: 0.0, b: 1.0 }, 1.0, 11).unwrap();
        let v = sample_potential(&uni, &lat, Region::Box { l: 1000 }, 3);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        assert!((mean - 0.5).abs() < 3.0 / (12.0 * n).sqrt(), "LLN bound violated: {mean}");
        let v2 = sample_potential(&uni, &lat, Region::Box { l: 1000 }, 3);
        assert_eq!(v, v2);

        let ber = DisorderSpec::new(Distribution::Bernoulli { w: 1.0 }, 1.0, 5).unwrap();
        let v = sample_potential(&ber, &lat, Region::Box { l: 20 }, 0);
        assert!(v.iter().all(|&x| x == 1.0 || x == -1.0));
    }

    #[test]
    fn square_free_torus_spectrum_is_plane_waves() {
        let op = build_hamiltonian(
            LatticeKind::Square,
            Flux::rational(0, 1).unwrap(),
            &DisorderSpec::none(),
            Region::Torus { l: 4 },
            0,
        )
        .unwrap();
        assert!(op.matrix.hermiticity_defect() < 1e-14);
        let ev = eigvalsh(&op.to_dense());
        let mut expect: Vec<f64> = (0..4)
            .flat_map(|j| (0..4).map(move |k| {
                -((2.0 * PI * j as f64 / 4.0).cos() + (2.0 * PI * k as f64 / 4.0).cos()) / 2.0
            }))
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn hex_free_torus_spectrum_is_plane_waves() {
        let l = 6;
        let op = build_hamiltonian(
            LatticeKind::Hex,
            Flux::rational(0, 1).unwrap(),
            &DisorderSpec::none(),
            Region::Torus { l },
            0,
        )
        .unwrap();
        let ev = eigvalsh(&op.to_dense());
        let mut expect = Vec::new();
        for j in 0..l {
            for k in 0..l {
                let z = Complex64::new(1.0, 0.0)
                    + Complex64::from_polar(1.0, 2.0 * PI * j as f64 / l as f64)
                    + Complex64::from_polar(1.0, 2.0 * PI * k as f64 / l as f64);
                expect.push(z.norm() / 3.0);
                expect.push(-z.norm() / 3.0);
            }
        }
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn incommensurate_torus_rejected() {
        let err = build_hamiltonian(
            LatticeKind::Square,
            Flux::rational(1, 3).unwrap(),
            &DisorderSpec::none(),
            Region::Torus { l: 8 },
            0,
        )
        .unwrap_err();
        match err {
            Error::IncommensurateTorus { q, l, .. } => {
                assert_eq!((q, l), (3, 8));
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn gauge_symmetry_square_spectrum_symmetric() {
        for (p, q, l) in [(1, 3, 6), (2, 5, 10)] {
            let op = build_hamiltonian(
                LatticeKind::Square,
                Flux::rational(p, q).unwrap(),
                &DisorderSpec::none(),
                Region::Torus { l },
                0,
            )
            .unwrap();
            let dense = op.to_dense();
            assert!(hermiticity_defect(&dense) < 1e-14);
            let ev = eigvalsh(&dense);
            let n = ev.len();
            for i in 0..n {
                assert!((ev[i] + ev[n - 1 - i]).abs() < 1e-10);
            }
            // conjugating by (−1)^{γ1+γ2} flips the sign of H
            let ls = op.region.l();
            let sign = CMatrix::from_fn(n, n, |i, j| {
                if i != j {
                    return Complex64::new(0.0, 0.0);
                }
                let c1 = i % ls;
                let c2 = i / ls;
                Complex64::new(if (c1 + c2) % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
            });
            let flipped = &sign * &dense * &sign;
            let err = (&flipped + &dense).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            assert!(err < 1e-13, "gauge conjugation defect {err}");
        }
    }

    #[test]
    fn chiral_symmetry_hex() {
        let op = build_hamiltonian(
            LatticeKind::Hex,
            Flux::rational(2, 5).unwrap(),
            &DisorderSpec::none(),
            Region::Torus { l: 10 },
            0,
        )
        .unwrap();
        let dense = op.to_dense();
        let n = dense.nrows();
        let s = CMatrix::from_fn(n, n, |i, j| {
            if i != j {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        });
        let shs = &s * &dense * &s;
        let err = (&shs + &dense).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        assert!(err < 1e-13, "chiral defect {err}");
        let ev = eigvalsh(&dense);
        for i in 0..n {
            assert!((ev[i] + ev[n - 1 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn magnetic_translations_unitary_commuting_weyl() {
        for (kind, p, q, l) in [
            (LatticeKind::Square, 1, 3, 6),
            (LatticeKind::Hex, 1, 3, 6),
            (LatticeKind::Hex, 1, 2, 4),
        ] {
            let flux = Flux::rational(p, q).unwrap();
            let region = Region::Torus { l };
            let op = build_hamiltonian(kind, flux, &DisorderSpec::none(), region, 0).unwrap();
            let h_dense = op.to_dense();
            let t1 = magnetic_translation(kind, flux, region, (1, 0)).unwrap().matrix.to_dense();
            let t2 = magnetic_translation(kind, flux, region, (0, 1)).unwrap().matrix.to_dense();
            let n = t1.nrows();
            let id = CMatrix::identity(n, n);
            let udef = (&t1 * t1.adjoint() - &id).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            assert!(udef < 1e-13, "unitarity defect {udef}");
            assert!(dense_commutator_norm(&t1, &h_dense) < 1e-12, "{kind:?} [T1,H]");
            assert!(dense_commutator_norm(&t2, &h_dense) < 1e-12, "{kind:?} [T2,H]");
            // T1 T2 = e^{ih} T2 T1
            let lhs = &t1 * &t2;
            let rhs = (&t2 * &t1) * Complex64::from_polar(1.0, flux.value);
            let werr = (&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            assert!(werr < 1e-12, "Weyl relation defect {werr}");
        }
    }

    #[test]
    fn translation_at_zero_flux_is_permutation() {
        let t = magnetic_translation(
            LatticeKind::Square,
            Flux::rational(0, 1).unwrap(),
            Region::Torus { l: 4 },
            (1, 0),
        )
        .unwrap();
        for v in &t.matrix.vals {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn covariance_with_shifted_disorder() {
        // Building H from the shifted field equals conjugation by T^h_γ.
        let kind = LatticeKind::Hex;
        let flux = Flux::rational(1, 2).unwrap();
        let region = Region::Torus { l: 4 };
        let disorder =
            DisorderSpec::new(Distribution::Uniform { a: -0.5, b: 0.5 }, 0.3, 99).unwrap();
        let op = build_hamiltonian(kind, flux, &disorder, region, 0).unwrap();
        let gamma = (1i64, 0i64);
        let t = magnetic_translation(kind, flux, region, gamma).unwrap().matrix.to_dense();
        let h_dense = op.to_dense();
        let conj = &t * &h_dense * t.adjoint();

        // same hopping, potential shifted by γ (cells move by +γ under T).
        let l = region.l();
        let ns = 2usize;
        let mut shifted = build_hamiltonian(kind, flux, &DisorderSpec::none(), region, 0)
            .unwrap()
            .to_dense();
        for c2 in 0..l {
            for c1 in 0..l {
                for s in 0..ns {
                    let dst = (c2 * l + c1) * ns + s;
                    let sc1 = (c1 as i64 - gamma.0).rem_euclid(l as i64) as usize;
                    let sc2 = (c2 as i64 - gamma.1).rem_euclid(l as i64) as usize;
                    let src = (sc2 * l + sc1) * ns + s;
                    shifted[(dst, dst)] +=
                        Complex64::new(disorder.lambda * op.potential[src], 0.0);
                }
            }
        }
        let err = (&conj - &shifted).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        assert!(err < 1e-12, "covariance defect {err}");
    }
}
