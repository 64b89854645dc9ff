//! Compact invariant suite behind `hoflab selfcheck`: one line per check.

use hoflab_core::lattice::{build_lattice, Flux, LatticeKind};
use hoflab_core::linalg::eigvalsh;
use hoflab_core::operator::{build_hamiltonian, magnetic_translation, DisorderSpec, Region};
use hoflab_core::{algebra, dirac, floquet};
use num_complex::Complex64;
use std::f64::consts::PI;

fn check(name: &str, ok: bool, detail: String) -> u32 {
    if ok {
        println!("PASS {name}: {detail}");
        0
    } else {
        println!("FAIL {name}: {detail}");
        1
    }
}

pub fn run_all() -> u32 {
    let mut failures = 0;

    // plaquette flux on both lattices
    let mut worst = 0.0f64;
    for kind in [LatticeKind::Square, LatticeKind::Hex] {
        let lat = build_lattice(kind);
        for i in 0..20 {
            let h = 0.3 + 0.29 * i as f64;
            let defect = match kind {
                LatticeKind::Square => {
                    let s = lat.edge_phase_by_name("f_right", (2, -1), h).unwrap()
                        + lat.edge_phase_by_name("f_up", (3, -1), h).unwrap()
                        - lat.edge_phase_by_name("f_right", (2, 0), h).unwrap()
                        - lat.edge_phase_by_name("f_up", (2, -1), h).unwrap();
                    ((s - h).rem_euclid(2.0 * PI)).min(2.0 * PI - (s - h).rem_euclid(2.0 * PI))
                }
                LatticeKind::Hex => {
                    let s = lat.edge_phase_by_name("f", (1, 2), h).unwrap()
                        - lat.edge_phase_by_name("g", (2, 2), h).unwrap()
                        + lat.edge_phase_by_name("h", (2, 2), h).unwrap()
                        - lat.edge_phase_by_name("f", (2, 1), h).unwrap()
                        + lat.edge_phase_by_name("g", (2, 1), h).unwrap()
                        - lat.edge_phase_by_name("h", (1, 2), h).unwrap();
                    ((s + h).rem_euclid(2.0 * PI)).min(2.0 * PI - (s + h).rem_euclid(2.0 * PI))
                }
            };
            worst = worst.max(defect);
        }
    }
    failures += check("plaquette-flux", worst < 1e-12, format!("max defect {worst:.2e}"));

    // magnetic translation Weyl relation and commutation with H
    for (kind, p, q, l) in [(LatticeKind::Square, 1i64, 3i64, 6usize), (LatticeKind::Hex, 1, 3, 6)] {
        let flux = Flux::rational(p, q).unwrap();
        let region = Region::Torus { l };
        let h = build_hamiltonian(kind, flux, &DisorderSpec::none(), region, 0)
            .unwrap()
            .to_dense();
        let t1 = magnetic_translation(kind, flux, region, (1, 0)).unwrap().matrix.to_dense();
        let t2 = magnetic_translation(kind, flux, region, (0, 1)).unwrap().matrix.to_dense();
        let comm = (&t1 * &h - &h * &t1).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let weyl = (&t1 * &t2 - (&t2 * &t1) * Complex64::from_polar(1.0, flux.value))
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        failures += check(
            &format!("magnetic-translations-{}", kind.name()),
            comm < 1e-12 && weyl < 1e-12,
            format!("[T,H] {comm:.2e}, Weyl {weyl:.2e}"),
        );
    }

    // Chambers identity for q ≤ 4
    let mut ok = true;
    let mut detail = String::new();
    for (p, q) in [(0i64, 1i64), (1, 2), (1, 3), (1, 4), (3, 4)] {
        match floquet::chambers(p, q) {
            Ok(ch) => {
                let f3 = (ch.eval(-3.0) - 3.0).abs();
                if f3 > 1e-9 {
                    ok = false;
                    detail = format!("f(-3) defect {f3:.2e} at {p}/{q}");
                }
            }
            Err(e) => {
                ok = false;
                detail = e.to_string();
            }
        }
    }
    failures += check("chambers", ok, if detail.is_empty() { "f(-3) = 3, residual < 1e-9".into() } else { detail });

    // Dirac touching and Hessian at small q
    let mut ok = true;
    let mut worst = 0.0f64;
    for (p, q) in [(0i64, 1i64), (1, 2), (1, 3)] {
        match dirac::cone_slope(p, q) {
            Ok(rep) => {
                worst = worst.max(rep.residual).max(rep.hessian.rel_error);
                if rep.residual > 1e-8 || rep.hessian.rel_error > 1e-3 {
                    ok = false;
                }
            }
            Err(_) => ok = false,
        }
    }
    failures += check("dirac-cones", ok, format!("max residual/Hessian error {worst:.2e}"));

    // twisted-convolution product against the matrix product
    let h = 2.0 * PI / 5.0;
    let f = algebra::a_hex();
    let a = algebra::magnetic_matrix(&f, h, 6);
    let sq = &a.matrix * &a.matrix;
    let asq = algebra::magnetic_matrix(&algebra::hash_product(&f, &f, h), h, 6).matrix;
    let side = 13i64;
    let mut worst = 0.0f64;
    for row in 0..sq.nrows() {
        let c = (row / 2) as i64;
        let (g1, g2) = (c % side - 6, c / side - 6);
        if g1.abs() > 4 || g2.abs() > 4 {
            continue;
        }
        for col in 0..sq.ncols() {
            worst = worst.max((sq[(row, col)] - asq[(row, col)]).norm());
        }
    }
    failures += check("hash-product", worst < 1e-10, format!("interior defect {worst:.2e}"));

    // unitary equivalence of lattice operators and magnetic matrices
    let mut worst = 0.0f64;
    for kind in [LatticeKind::Square, LatticeKind::Hex] {
        let flux = Flux::rational(2, 5).unwrap();
        let a = algebra::magnetic_matrix(&algebra::hopping_symbol(kind), flux.value, 5).matrix;
        let op = build_hamiltonian(kind, flux, &DisorderSpec::none(), Region::Box { l: 11 }, 0).unwrap();
        let ea = eigvalsh(&a);
        let eh = eigvalsh(&op.to_dense());
        worst = worst.max(
            ea.iter().zip(&eh).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max),
        );
    }
    failures += check("unitary-equivalence", worst < 1e-9, format!("spectral defect {worst:.2e}"));

    // torus spectra equal Floquet unions
    let mut worst = 0.0f64;
    for (kind, p, q, l) in [(LatticeKind::Square, 1i64, 3i64, 6usize), (LatticeKind::Hex, 1, 2, 4)] {
        let op = build_hamiltonian(kind, Flux::rational(p, q).unwrap(), &DisorderSpec::none(), Region::Torus { l }, 0)
            .unwrap();
        let dense = eigvalsh(&op.to_dense());
        let floq = floquet::torus_spectrum_via_floquet(kind, p, q, l).unwrap();
        worst = worst.max(
            dense.iter().zip(&floq).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max),
        );
    }
    failures += check("torus-floquet", worst < 1e-10, format!("multiset defect {worst:.2e}"));

    failures
}
