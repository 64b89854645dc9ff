//! Quantized Hall conductivity in spectral gaps, by two independent routes:
//! Středa finite differences of the IDS across flux, and lattice Chern
//! numbers on the magnetic Brillouin zone summing to the Kubo-Chern value.
//!
//! Středa: c_H(μ) = |b₁∧b₂| · d(IDS)/dh with μ tracked through "the same"
//! gap (by Landau index) along a ladder of rational fluxes; the affine IDS
//! coefficients (γ₁, γ₂) of the gap-labelling form
//! IDS = (γ₁ + γ₂·h/2π)/|b₁∧b₂| are reported alongside.
//!
//! Chern route: Fukui–Hatsugai link variables of the Fermi projector below
//! the gap (non-abelian, so touchings inside the occupied group are
//! harmless), on the magnetic Brillouin zone k ∈ [0,2π/q)×[0,2π); the seam
//! columns are diagonalized at the literal wrapped momenta, which realizes
//! the constant transition unitary automatically.

use crate::error::{Error, Result};
use crate::floquet::{band_edges_fast, floquet_hex, floquet_square, TOUCH_TOL};
use crate::lattice::{build_lattice, LatticeKind};
use crate::linalg::{self, CMatrix};
use crate::semiclassics::{landau_levels_hex, landau_levels_square, LandauTable};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Gap selector, tracked by Landau index across the flux ladder.
///
/// `SquareAbove(n)`: gap above the n-th square Landau band (n ≥ 1).
/// `HexAbove(n)`: gap above the honeycomb level z_n (n ∈ ℤ; `HexAbove(-1)`
/// is the gap below z₀).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapSelector {
    SquareAbove(i64),
    HexAbove(i64),
}

impl GapSelector {
    pub fn kind(&self) -> LatticeKind {
        match self {
            GapSelector::SquareAbove(_) => LatticeKind::Square,
            GapSelector::HexAbove(_) => LatticeKind::Hex,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdsSample {
    pub p: i64,
    pub q: i64,
    pub h: f64,
    /// gap midpoint used as the Fermi energy
    pub mu: f64,
    pub ids: f64,
    /// number of Floquet branches strictly below μ
    pub branches_below: usize,
}

/// Landau prediction table for one small-field flux.
fn small_field_table(kind: LatticeKind, h: f64, n_levels: i64) -> Result<LandauTable> {
    match kind {
        LatticeKind::Square => landau_levels_square(h, n_levels),
        LatticeKind::Hex => landau_levels_hex(h, n_levels, 0, 1),
    }
}

/// Locate the gap above level `n` in the measured band edges using the
/// prediction table, and return (μ at the measured gap midpoint, #branches
/// below μ). The level windows keep tracking stable across the ladder.
fn locate_gap(
    edges: &[(f64, f64)],
    table: &LandauTable,
    n: i64,
    p: i64,
    q: i64,
    gap_id: usize,
) -> Result<(f64, usize)> {
    let z_n = table
        .levels
        .iter()
        .find(|l| l.n == n)
        .ok_or_else(|| Error::Validation(format!("level {n} beyond the trusted table")))?
        .z;
    let z_next = table
        .levels
        .iter()
        .filter(|l| l.z > z_n + 1e-12)
        .map(|l| l.z)
        .fold(f64::INFINITY, f64::min);
    let probe = if z_next.is_finite() {
        0.5 * (z_n + z_next)
    } else {
        // table truncated at the trust window: probe half a local spacing up
        let z_prev = table
            .levels
            .iter()
            .filter(|l| l.z < z_n - 1e-12)
            .map(|l| l.z)
            .fold(f64::NEG_INFINITY, f64::max);
        if !z_prev.is_finite() {
            return Err(Error::Validation(format!("level {n} has no neighbors in the table")));
        }
        z_n + 0.5 * (z_n - z_prev)
    };
    // measured gap: nearest band edges straddling the probe
    let below = edges.iter().map(|&(_, hi)| hi).filter(|&e| e <= probe).fold(f64::NEG_INFINITY, f64::max);
    let above = edges.iter().map(|&(lo, _)| lo).filter(|&e| e > probe).fold(f64::INFINITY, f64::min);
    if !(below.is_finite() && above.is_finite()) || above - below < TOUCH_TOL {
        return Err(Error::GapClosed { gap: gap_id, p, q });
    }
    let mu = 0.5 * (below + above);
    let branches_below = edges.iter().filter(|&&(_, hi)| hi < mu).count();
    Ok((mu, branches_below))
}

/// IDS(μ_gap, h) along a ladder of rational fluxes; errors name the flux if
/// the selected gap closes.
pub fn ids_vs_flux(gap: GapSelector, fluxes: &[(i64, i64)]) -> Result<Vec<IdsSample>> {
    if fluxes.len() < 3 {
        return Err(Error::Validation("at least 3 fluxes are needed for the Středa fit".into()));
    }
    let kind = gap.kind();
    let lat = build_lattice(kind);
    let n = match gap {
        GapSelector::SquareAbove(n) => {
            if n < 1 {
                return Err(Error::Validation("square gaps are indexed from n = 1".into()));
            }
            n
        }
        GapSelector::HexAbove(n) => n,
    };
    let mut out = Vec::with_capacity(fluxes.len());
    for (i, &(p, q)) in fluxes.iter().enumerate() {
        let h = 2.0 * PI * p as f64 / q as f64;
        let table = small_field_table(kind, h, n.abs() + 2)?;
        let edges = band_edges_fast(kind, p, q)?;
        let (mu, branches_below) = locate_gap(&edges, &table, n, p, q, i)?;
        let ids = branches_below as f64 / (q as f64 * lat.cell_area);
        out.push(IdsSample { p, q, h, mu, ids, branches_below });
    }
    Ok(out)
}

/// Result of one Středa fit (optionally with the Chern cross-check).
#[derive(Debug, Clone, Serialize)]
pub struct HallResult {
    pub kind: LatticeKind,
    pub gap: GapSelector,
    pub samples: Vec<IdsSample>,
    pub slope: f64,
    pub intercept: f64,
    /// 2π·c_H = 2π·|b₁∧b₂|·slope before rounding
    pub two_pi_ch: f64,
    /// rounded Hall integer
    pub m: i64,
    pub pre_round_error: f64,
    pub fit_residual: f64,
    /// gap-labelling coefficients: IDS = (γ₁ + γ₂·h/2π)/|b₁∧b₂|
    pub gamma1: f64,
    pub gamma2: f64,
    pub chern_sum: Option<i64>,
    pub agree: Option<bool>,
}

/// Least-squares Středa fit through the IDS samples.
pub fn streda(gap: GapSelector, samples: &[IdsSample]) -> Result<HallResult> {
    if samples.len() < 3 {
        return Err(Error::Validation("Středa fit needs ≥ 3 samples".into()));
    }
    let lat = build_lattice(gap.kind());
    let hs: Vec<f64> = samples.iter().map(|s| s.h).collect();
    let ids: Vec<f64> = samples.iter().map(|s| s.ids).collect();
    let (intercept, slope, resid) = linalg::affine_fit(&hs, &ids);
    let range = ids.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - ids.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if resid > 1e-4 * range.max(1e-12) {
        return Err(Error::NonAffineIds { residual: resid, tol: 1e-4 * range });
    }
    let ch = lat.cell_area * slope;
    let two_pi_ch = 2.0 * PI * ch;
    let m = two_pi_ch.round() as i64;
    Ok(HallResult {
        kind: gap.kind(),
        gap,
        samples: samples.to_vec(),
        slope,
        intercept,
        two_pi_ch,
        m,
        pre_round_error: (two_pi_ch - m as f64).abs(),
        fit_residual: resid,
        gamma1: lat.cell_area * intercept,
        gamma2: two_pi_ch,
        chern_sum: None,
        agree: None,
    })
}

// ---------------------------------------------------------------------------
// Fukui–Hatsugai link variables on the magnetic Brillouin zone
// ---------------------------------------------------------------------------

fn floquet_any(kind: LatticeKind, p: i64, q: i64, k: (f64, f64)) -> CMatrix {
    match kind {
        LatticeKind::Square => floquet_square(p, q, k).unwrap(),
        LatticeKind::Hex => floquet_hex(p, q, k).unwrap(),
    }
}

/// Eigen column data at one k: eigenvalues plus the first `keep` eigenvectors.
struct EigCol {
    vals: Vec<f64>,
    vecs: CMatrix,
}

fn eig_column(kind: LatticeKind, p: i64, q: i64, k1: f64, n: usize, keep: usize) -> Vec<EigCol> {
    (0..=n)
        .into_par_iter()
        .map(|j| {
            let k2 = 2.0 * PI * j as f64 / n as f64;
            let (vals, vecs) = linalg::eigh(&floquet_any(kind, p, q, (k1, k2)));
            let dim = vecs.nrows();
            EigCol { vals, vecs: vecs.view((0, 0), (dim, keep)).clone_owned() }
        })
        .collect()
}

/// det of the overlap block ⟨ψ_a(x)|ψ_b(y)⟩ for bands lo..hi.
fn overlap_det(x: &EigCol, y: &EigCol, lo: usize, hi: usize) -> Complex64 {
    let r = hi - lo;
    let block = x.vecs.columns(lo, r).adjoint() * y.vecs.columns(lo, r);
    linalg::det(&block)
}

/// Chern number of the contiguous band group [lo, hi) by non-abelian
/// link variables on an n×n grid of the magnetic Brillouin zone.
///
/// Fails with `BandTouching` when the group boundary closes on the grid or
/// a link determinant degenerates.
pub fn chern_group(kind: LatticeKind, p: i64, q: i64, lo: usize, hi: usize, n: usize) -> Result<i64> {
    crate::lattice::Flux::rational(p, q)?;
    if n < 8 {
        return Err(Error::Validation(format!("Chern grid n = {n} too coarse")));
    }
    let m = match kind {
        LatticeKind::Square => q as usize,
        LatticeKind::Hex => 2 * q as usize,
    };
    if hi <= lo || hi > m {
        return Err(Error::Validation(format!("band group {lo}..{hi} outside 0..{m}")));
    }
    let keep = hi;
    let k1_of = |i: usize| 2.0 * PI / q as f64 * i as f64 / n as f64;

    let mut total_field = 0.0f64;
    let mut col_a = eig_column(kind, p, q, k1_of(0), n, keep);
    for i in 0..n {
        let col_b = eig_column(kind, p, q, k1_of(i + 1), n, keep);
        // group-boundary isolation on this column
        for col in [&col_a, &col_b] {
            for e in col {
                if hi < m && e.vals[hi] - e.vals[hi - 1] < 1e-9 {
                    return Err(Error::BandTouching { band: hi - 1 });
                }
                if lo > 0 && e.vals[lo] - e.vals[lo - 1] < 1e-9 {
                    return Err(Error::BandTouching { band: lo });
                }
            }
        }
        for j in 0..n {
            let u1 = overlap_det(&col_a[j], &col_b[j], lo, hi);
            let u2 = overlap_det(&col_b[j], &col_b[j + 1], lo, hi);
            let u3 = overlap_det(&col_a[j + 1], &col_b[j + 1], lo, hi);
            let u4 = overlap_det(&col_a[j], &col_a[j + 1], lo, hi);
            for u in [u1, u2, u3, u4] {
                if u.norm() < 1e-10 {
                    return Err(Error::BandTouching { band: lo });
                }
            }
            total_field += (u1 * u2 * u3.conj() * u4.conj()).arg();
        }
        col_a = col_b;
    }
    let c = total_field / (2.0 * PI);
    let rounded = c.round();
    if (c - rounded).abs() > 1e-6 {
        return Err(Error::Validation(format!("non-integer Chern sum {c}")));
    }
    Ok(rounded as i64)
}

/// Chern number of a single isolated band (0-based index).
pub fn chern_band(kind: LatticeKind, p: i64, q: i64, band: usize, n: usize) -> Result<i64> {
    if n < 24 {
        return Err(Error::Validation(format!("single-band Chern grid n = {n} below 24")));
    }
    chern_group(kind, p, q, band, band + 1, n)
}

/// Hall integer of a gap by the Chern route: total Chern number of the
/// Fermi projector below the gap, with the n vs 2n grid-stability gate.
pub fn hall_in_gap_chern(
    kind: LatticeKind,
    p: i64,
    q: i64,
    branches_below: usize,
    n: usize,
) -> Result<i64> {
    let c1 = chern_group(kind, p, q, 0, branches_below, n)?;
    let c2 = chern_group(kind, p, q, 0, branches_below, 2 * n)?;
    if c1 != c2 {
        return Err(Error::Validation(format!(
            "Chern sum unstable under grid refinement: {c1} (n={n}) vs {c2} (n={})",
            2 * n
        )));
    }
    Ok(c1)
}

/// Full gap computation: Středa ladder plus the Chern cross-check at the
/// middle flux of the ladder.
pub fn hall_in_gap(gap: GapSelector, fluxes: &[(i64, i64)], chern_grid: usize) -> Result<HallResult> {
    let samples = ids_vs_flux(gap, fluxes)?;
    let mut result = streda(gap, &samples)?;
    let mid = &samples[samples.len() / 2];
    let chern = hall_in_gap_chern(gap.kind(), mid.p, mid.q, mid.branches_below, chern_grid)?;
    result.agree = Some(chern == result.m);
    result.chern_sum = Some(chern);
    Ok(result)
}

/// Středa integer across a ladder of small perturbations h = 2π/N around
/// the rational flux 2πp/q, tracking the near-rational gap above level n.
/// The expected integer is (2n+1)·q.
pub fn near_rational_hall(p: i64, q: i64, n: i64, ladder: &[i64]) -> Result<HallResult> {
    if ladder.len() < 3 {
        return Err(Error::Validation("need ≥ 3 perturbations in the ladder".into()));
    }
    let lat = build_lattice(LatticeKind::Hex);
    let mut samples = Vec::with_capacity(ladder.len());
    for (i, &big_n) in ladder.iter().enumerate() {
        if big_n <= 0 {
            return Err(Error::Validation(format!("bad ladder entry {big_n}")));
        }
        let h = 2.0 * PI / big_n as f64;
        // total flux 2π(p·N + q)/(q·N), reduced
        let num = p * big_n + q;
        let den = q * big_n;
        let g = crate::lattice::gcd(num, den);
        let (pt, qt) = (num / g, den / g);
        let table = landau_levels_hex(h, n + 2, p, q)?;
        let edges = band_edges_fast(LatticeKind::Hex, pt, qt)?;
        let (mu, branches_below) = locate_gap(&edges, &table, n, pt, qt, i)?;
        let ids = branches_below as f64 / (qt as f64 * lat.cell_area);
        samples.push(IdsSample { p: pt, q: qt, h, mu, ids, branches_below });
    }
    // fit against the perturbation h (same slope as against total flux)
    streda(GapSelector::HexAbove(n), &samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Staircase on the square lattice: m = n for the n-th gap.
    #[test]
    fn square_streda_staircase() {
        let fluxes = [(1i64, 48i64), (1, 46), (1, 44)];
        for n in 1..=2i64 {
            let r = hall_in_gap(GapSelector::SquareAbove(n), &fluxes, 12).unwrap_or_else(|e| {
                panic!("gap {n}: {e}")
            });
            assert_eq!(r.m, n, "square gap {n}: 2πc_H = {}", r.two_pi_ch);
            assert!(r.pre_round_error < 0.02);
            assert_eq!(r.chern_sum, Some(n));
            assert_eq!(r.agree, Some(true));
            // intercept γ1 = 0 for the square staircase
            assert!(r.gamma1.abs() < 1e-3, "γ1 = {}", r.gamma1);
        }
    }

    /// Hex staircase: m = 2n+1 above z_n, m = −1 below z₀, and the
    /// particle-hole antisymmetry m(above z_n) + m(below z_{−n}) = 0.
    #[test]
    fn hex_streda_staircase() {
        let fluxes = [(1i64, 48i64), (1, 46), (1, 44)];
        let r0 = hall_in_gap(GapSelector::HexAbove(0), &fluxes, 12).unwrap();
        assert_eq!(r0.m, 1, "2πc_H = {}", r0.two_pi_ch);
        assert_eq!(r0.chern_sum, Some(1));
        let r1 = ids_vs_flux(GapSelector::HexAbove(1), &fluxes).unwrap();
        let s1 = streda(GapSelector::HexAbove(1), &r1).unwrap();
        assert_eq!(s1.m, 3);
        let below = streda(
            GapSelector::HexAbove(-1),
            &ids_vs_flux(GapSelector::HexAbove(-1), &fluxes).unwrap(),
        )
        .unwrap();
        assert_eq!(below.m, -1);
        assert_eq!(r0.m + below.m, 0, "particle-hole antisymmetry");
        // half-filling intercept: γ1 = 1 (one full band per cell below 0)
        assert!((r0.gamma1 - 1.0).abs() < 1e-3, "γ1 = {}", r0.gamma1);
    }

    /// Known TKNN value: lowest Harper band at p/q = 1/3 has Chern number 1.
    #[test]
    fn harper_lowest_band_chern() {
        let c = chern_band(LatticeKind::Square, 1, 3, 0, 48).unwrap();
        assert_eq!(c, 1);
        // grid stability
        assert_eq!(chern_band(LatticeKind::Square, 1, 3, 0, 24).unwrap(), 1);
    }

    /// All bands sum to zero Chern number.
    #[test]
    fn total_chern_vanishes() {
        for (kind, p, q) in [(LatticeKind::Square, 1i64, 3i64), (LatticeKind::Hex, 1, 3)] {
            let m = match kind {
                LatticeKind::Square => q as usize,
                LatticeKind::Hex => 2 * q as usize,
            };
            let c = chern_group(kind, p, q, 0, m, 16).unwrap();
            assert_eq!(c, 0, "{kind:?}");
        }
    }

    /// Near the base flux 1/3 the central gap carries the Hall integer
    /// 3 = q·(2n+1) with n = 0: at total flux 1/3 + 1/60 = 7/20, the gap sits
    /// above 21 of the 40 branches (gap labels r = γ₁Q + 3P with γ₁ = 0).
    #[test]
    fn hex_third_flux_near_rational_gap() {
        let c = chern_group(LatticeKind::Hex, 7, 20, 0, 21, 24).unwrap();
        assert_eq!(c, 3);
        // cross-check through the Středa route
        let r = near_rational_hall(1, 3, 0, &[54, 60, 66]).unwrap();
        assert_eq!(r.m, 3, "2πc_H = {}", r.two_pi_ch);
    }

    /// hex gap above z₀ at p/q = 1/5 → 1; square first gap at 1/5 → 1.
    #[test]
    fn fifth_flux_gaps() {
        let c = chern_group(LatticeKind::Hex, 1, 5, 0, 5 + 1, 24).unwrap();
        assert_eq!(c, 1);
        let c = chern_group(LatticeKind::Square, 1, 5, 0, 1, 24).unwrap();
        assert_eq!(c, 1);
    }

    #[test]
    fn touching_bands_rejected() {
        // hex central bands touch at 0: single-band Chern must fail
        let err = chern_band(LatticeKind::Hex, 1, 2, 1, 24).unwrap_err();
        assert!(matches!(err, Error::BandTouching { .. }));
    }

    /// Near-rational Hall: (p,q)=(1,2), n=0 → Středa integer q·(2n+1) = 2.
    #[test]
    fn near_rational_half_flux() {
        let r = near_rational_hall(1, 2, 0, &[240, 280, 320]).unwrap();
        assert_eq!(r.m, 2, "2πc_H = {}", r.two_pi_ch);
        assert!(r.pre_round_error < 0.02);
    }
}
