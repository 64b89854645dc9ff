//! Lattice geometry: the square lattice ℤ² and the honeycomb lattice, their
//! oriented edges, and the symmetric-gauge Peierls phase attached to every
//! edge.
//!
//! Both lattices are spanned by two basis vectors with a small set of sites
//! per fundamental cell; sites are addressed by (cell index γ ∈ ℤ², site
//! index) so that no floating-point position comparison is ever needed.
//!
//! Edge phases follow the symmetric gauge A = ½B(−x₂dx₁ + x₁dx₂) evaluated
//! at the initial vertex of each edge:
//!   square:  A(up edge at γ)    =  (h/2)γ₁,   A(right edge at γ) = −(h/2)γ₂
//!   hex:     A(f edge at γ)     =  (h/6)(γ₁−γ₂)
//!            A(g edge at γ)     =  (h/6)(γ₁+2γ₂)
//!            A(h edge at γ)     = −(h/6)(2γ₁+γ₂)
//! where h is the flux per fundamental cell.

use crate::error::{Error, Result};
use serde::Serialize;

pub const SQRT3: f64 = 1.732050807568877293527446341505872367_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LatticeKind {
    Square,
    Hex,
}

impl LatticeKind {
    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Square => "square",
            LatticeKind::Hex => "hex",
        }
    }
}

impl std::str::FromStr for LatticeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(LatticeKind::Square),
            "hex" | "honeycomb" | "hexagonal" => Ok(LatticeKind::Hex),
            other => Err(Error::Validation(format!("unknown lattice kind `{other}`"))),
        }
    }
}

/// Oriented edge template: from `from_site` in cell γ to `to_site` in cell
/// γ + `cell_offset`. All edges of the lattice are translates of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeType {
    pub name: &'static str,
    pub from_site: usize,
    pub to_site: usize,
    pub cell_offset: (i64, i64),
}

/// Geometry of one of the two lattices: basis vectors, fundamental-cell
/// sites, cell area and the oriented edge catalog.
#[derive(Debug, Clone)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub basis: [[f64; 2]; 2],
    pub cell_sites: Vec<[f64; 2]>,
    pub cell_area: f64,
    pub edge_types: Vec<EdgeType>,
}

/// Magnetic flux per fundamental cell, with the reduced rational form when
/// the flux is 2πp/q.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Flux {
    pub value: f64,
    pub rational: Option<(i64, i64)>,
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Flux {
    /// Arbitrary real flux with no rational structure attached.
    pub fn real(value: f64) -> Self {
        Flux { value, rational: None }
    }

    /// Rational flux 2πp/q with gcd(p,q) = 1 enforced by reduction.
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q < 1 {
            return Err(Error::Validation(format!("flux denominator must be ≥ 1, got {q}")));
        }
        let g = gcd(p, q).max(1);
        let (p, q) = (p / g, q / g);
        Ok(Flux {
            value: 2.0 * std::f64::consts::PI * p as f64 / q as f64,
            rational: Some((p, q)),
        })
    }

    pub fn is_rational(&self) -> bool {
        self.rational.is_some()
    }

    /// (p, q) if rational, error otherwise.
    pub fn pq(&self) -> Result<(i64, i64)> {
        self.rational
            .ok_or_else(|| Error::Validation("operation requires a rational flux 2πp/q".into()))
    }
}

/// Build the full geometric catalog for one lattice kind. Deterministic.
pub fn build_lattice(kind: LatticeKind) -> LatticeSpec {
    match kind {
        LatticeKind::Square => LatticeSpec {
            kind,
            basis: [[1.0, 0.0], [0.0, 1.0]],
            cell_sites: vec![[0.0, 0.0]],
            cell_area: 1.0,
            edge_types: vec![
                // geometric "right" (+b1) and "up" (+b2) edges
                EdgeType { name: "f_right", from_site: 0, to_site: 0, cell_offset: (1, 0) },
                EdgeType { name: "f_up", from_site: 0, to_site: 0, cell_offset: (0, 1) },
            ],
        },
        LatticeKind::Hex => LatticeSpec {
            kind,
            basis: [[1.5, SQRT3 / 2.0], [0.0, SQRT3]],
            cell_sites: vec![[0.0, 0.0], [0.5, SQRT3 / 2.0]],
            cell_area: 1.5 * SQRT3,
            edge_types: vec![
                // all hex edges run from the r0 sublattice to the r1 sublattice
                EdgeType { name: "f", from_site: 0, to_site: 1, cell_offset: (0, 0) },
                EdgeType { name: "g", from_site: 0, to_site: 1, cell_offset: (-1, 0) },
                EdgeType { name: "h", from_site: 0, to_site: 1, cell_offset: (0, -1) },
            ],
        },
    }
}

impl LatticeSpec {
    pub fn sites_per_cell(&self) -> usize {
        self.cell_sites.len()
    }

    /// Hopping prefactor of the tight-binding operator: −1/4 on the square
    /// lattice, −1/3 on the honeycomb (negative-sign convention, which puts
    /// the bottom of the square spectrum at −1).
    pub fn hopping(&self) -> f64 {
        match self.kind {
            LatticeKind::Square => -0.25,
            LatticeKind::Hex => -1.0 / 3.0,
        }
    }

    /// Geometric position of site `s` in cell γ.
    pub fn position(&self, gamma: (i64, i64), s: usize) -> [f64; 2] {
        let b = &self.basis;
        let r = &self.cell_sites[s];
        [
            gamma.0 as f64 * b[0][0] + gamma.1 as f64 * b[1][0] + r[0],
            gamma.0 as f64 * b[0][1] + gamma.1 as f64 * b[1][1] + r[1],
        ]
    }

    pub fn edge_type(&self, name: &str) -> Result<&EdgeType> {
        self.edge_types
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownEdgeType(name.to_string()))
    }

    /// Symmetric-gauge Peierls phase A_e of edge type `edge` translated to
    /// cell γ, at flux `h` per cell.
    pub fn edge_phase(&self, edge: &EdgeType, gamma: (i64, i64), h: f64) -> f64 {
        let (g1, g2) = (gamma.0 as f64, gamma.1 as f64);
        match (self.kind, edge.name) {
            (LatticeKind::Square, "f_up") => 0.5 * h * g1,
            (LatticeKind::Square, "f_right") => -0.5 * h * g2,
            (LatticeKind::Hex, "f") => h / 6.0 * (g1 - g2),
            (LatticeKind::Hex, "g") => h / 6.0 * (g1 + 2.0 * g2),
            (LatticeKind::Hex, "h") => -h / 6.0 * (2.0 * g1 + g2),
            _ => unreachable!("edge catalog and kind are built together"),
        }
    }

    /// Same as [`edge_phase`](Self::edge_phase) but looked up by name.
    pub fn edge_phase_by_name(&self, name: &str, gamma: (i64, i64), h: f64) -> Result<f64> {
        let e = *self.edge_type(name)?;
        Ok(self.edge_phase(&e, gamma, h))
    }
}

/// Flux per fundamental cell for a uniform field of strength B:
/// h = B on the square lattice, h = (3√3/2)·B on the honeycomb.
pub fn flux_from_field(lat: &LatticeSpec, b_field: f64) -> Flux {
    Flux::real(b_field * lat.cell_area)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogs_match_geometry() {
        let sq = build_lattice(LatticeKind::Square);
        assert_eq!(sq.basis, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(sq.cell_area, 1.0);
        assert_eq!(sq.cell_sites.len(), 1);

        let hex = build_lattice(LatticeKind::Hex);
        assert!((hex.cell_area - 2.598076211353316).abs() < 1e-15);
        assert_eq!(hex.cell_sites.len(), 2);
        assert_eq!(hex.cell_sites[0], [0.0, 0.0]);
        assert!((hex.cell_sites[1][0] - 0.5).abs() < 1e-15);
        assert!((hex.cell_sites[1][1] - SQRT3 / 2.0).abs() < 1e-15);
        // |b1 ∧ b2| recomputed from the stored basis
        let det = hex.basis[0][0] * hex.basis[1][1] - hex.basis[0][1] * hex.basis[1][0];
        assert!((det - hex.cell_area).abs() < 1e-14);
    }

    #[test]
    fn edge_templates_close_geometrically() {
        for kind in [LatticeKind::Square, LatticeKind::Hex] {
            let lat = build_lattice(kind);
            for e in &lat.edge_types {
                let a = lat.position((3, -2), e.from_site);
                let b = lat.position((3 + e.cell_offset.0, -2 + e.cell_offset.1), e.to_site);
                // terminal = initial + stored geometric offset (unit edge length... hex edges
                // have length 1, square edges length 1)
                let d = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                assert!((d - 1.0).abs() < 1e-14, "edge {} length {d}", e.name);
            }
        }
    }

    #[test]
    fn edge_phase_examples() {
        let hex = build_lattice(LatticeKind::Hex);
        let h = 0.7391;
        assert!((hex.edge_phase_by_name("f", (1, 0), h).unwrap() - h / 6.0).abs() < 1e-15);
        assert!((hex.edge_phase_by_name("h", (1, 1), h).unwrap() + h / 2.0).abs() < 1e-15);
        let sq = build_lattice(LatticeKind::Square);
        for name in ["f_up", "f_right"] {
            assert_eq!(sq.edge_phase_by_name(name, (0, 0), h).unwrap(), 0.0);
        }
        assert!(sq.edge_phase_by_name("f", (0, 0), h).is_err());
    }

    #[test]
    fn flux_from_field_scales_with_cell_area() {
        let sq = build_lattice(LatticeKind::Square);
        let hex = build_lattice(LatticeKind::Hex);
        assert_eq!(flux_from_field(&sq, 1.0).value, 1.0);
        assert!((flux_from_field(&hex, 1.0).value - 2.598076211353316).abs() < 1e-12);
        assert_eq!(flux_from_field(&hex, 0.0).value, 0.0);
    }

    #[test]
    fn rational_flux_reduces() {
        let f = Flux::rational(4, 6).unwrap();
        assert_eq!(f.rational, Some((2, 3)));
        assert!((f.value - 2.0 * std::f64::consts::PI * 2.0 / 3.0).abs() < 1e-14);
        assert!(Flux::rational(1, 0).is_err());
    }

    /// Signed sum of edge phases around every elementary plaquette equals ±h
    /// (mod 2π): square cells on a 5×5 patch, 20 random fluxes.
    #[test]
    fn square_plaquette_flux() {
        let lat = build_lattice(LatticeKind::Square);
        let mut h = 0.0;
        for trial in 0..20 {
            h = (h + 2.399963) % (2.0 * std::f64::consts::PI) + 0.01 * trial as f64;
            for g1 in -2..3i64 {
                for g2 in -2..3i64 {
                    // right(γ), up(γ+e1), −right(γ+e2), −up(γ)
                    let s = lat.edge_phase_by_name("f_right", (g1, g2), h).unwrap()
                        + lat.edge_phase_by_name("f_up", (g1 + 1, g2), h).unwrap()
                        - lat.edge_phase_by_name("f_right", (g1, g2 + 1), h).unwrap()
                        - lat.edge_phase_by_name("f_up", (g1, g2), h).unwrap();
                    let defect = (s - h).rem_euclid(2.0 * std::f64::consts::PI);
                    let defect = defect.min(2.0 * std::f64::consts::PI - defect);
                    assert!(defect < 1e-12, "square plaquette at ({g1},{g2}), h={h}: {defect}");
                }
            }
        }
    }

    /// Hexagon cycle: r0(γ) f→ r1(γ) ←g r0(γ+e1) h→ r1(γ+e1−e2) ←f
    /// r0(γ+e1−e2) g→ r1(γ−e2) ←h r0(γ).
    #[test]
    fn hexagon_plaquette_flux() {
        let lat = build_lattice(LatticeKind::Hex);
        let mut h = 0.0;
        for trial in 0..20 {
            h = (h + 1.847001) % (2.0 * std::f64::consts::PI) + 0.013 * trial as f64;
            for g1 in -2..3i64 {
                for g2 in -2..3i64 {
                    let s = lat.edge_phase_by_name("f", (g1, g2), h).unwrap()
                        - lat.edge_phase_by_name("g", (g1 + 1, g2), h).unwrap()
                        + lat.edge_phase_by_name("h", (g1 + 1, g2), h).unwrap()
                        - lat.edge_phase_by_name("f", (g1 + 1, g2 - 1), h).unwrap()
                        + lat.edge_phase_by_name("g", (g1 + 1, g2 - 1), h).unwrap()
                        - lat.edge_phase_by_name("h", (g1, g2), h).unwrap();
                    let defect = (s + h).rem_euclid(2.0 * std::f64::consts::PI);
                    let defect = defect.min(2.0 * std::f64::consts::PI - defect);
                    assert!(defect < 1e-12, "hexagon at ({g1},{g2}), h={h}: {defect}");
                }
            }
        }
    }
}
