//! Finite-volume spectra, integrated density of states, disorder-averaged
//! DOS curves, and the semiclassical trace-formula checks.
//!
//! The regularized trace is realized as the finite-volume surrogate
//!     tr̃ f(H) ≈ (1/(L²·|b₁∧b₂|)) · E_ω[ tr f(H_{λ,ω}) ],
//! with the torus average supplying the per-cell trace (exact translation
//! covariance at λ = 0) and the ensemble mean realizing the expectation.
//!
//! Two spectral paths feed every statistic: dense diagonalization for small
//! volumes and the kernel polynomial method (Chebyshev moments with Jackson
//! damping, stochastic phase-vector traces) above the dense cutoff.

use crate::error::{Error, Result};
use crate::floquet::{self, BandStructure};
use crate::lattice::{build_lattice, Flux, LatticeKind};
use crate::linalg::{self, kahan_sum};
use crate::operator::{build_hamiltonian, DisorderSpec, MagneticOperator, Region};
use crate::rng::{self, Stream};
use crate::semiclassics::LandauTable;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Dense-diagonalization cutoff; larger operators go through the KPM path.
pub const DENSE_DIM_LIMIT: usize = 20_000;
/// Practical dense cutoff used by the automatic path switch.
pub const DENSE_DIM_AUTO: usize = 2_048;

/// Sorted finite-volume spectrum with its per-unit-area normalization.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralData {
    pub kind: LatticeKind,
    pub flux: Flux,
    pub l: usize,
    pub torus: bool,
    pub lambda: f64,
    pub realization: u64,
    pub eigenvalues: Vec<f64>,
    /// 1/(L²·|b₁∧b₂|)
    pub norm: f64,
}

/// Dense spectrum of a finite operator. Dimension is capped; use the KPM
/// path for larger volumes.
pub fn spectrum_finite(op: &MagneticOperator) -> Result<SpectralData> {
    if op.dim() > DENSE_DIM_LIMIT {
        return Err(Error::Validation(format!(
            "dimension {} exceeds the dense-solve cap {DENSE_DIM_LIMIT}; use the KPM path",
            op.dim()
        )));
    }
    let eigenvalues = linalg::eigvalsh(&op.to_dense());
    let bound = op.norm_bound() + 1e-12;
    if let Some(bad) = eigenvalues.iter().find(|e| e.abs() > bound) {
        return Err(Error::Validation(format!(
            "eigenvalue {bad} outside the norm bound {bound} (lattice {:?}, L = {})",
            op.lattice.kind,
            op.region.l()
        )));
    }
    let l = op.region.l();
    Ok(SpectralData {
        kind: op.lattice.kind,
        flux: op.flux,
        l,
        torus: op.region.is_torus(),
        lambda: op.disorder.lambda,
        realization: op.realization,
        norm: 1.0 / (l as f64 * l as f64 * op.lattice.cell_area),
        eigenvalues,
    })
}

impl SpectralData {
    /// Integrated density of states #{E ≤ μ}/(L²|b₁∧b₂|). Exact zero modes
    /// (the honeycomb z₀ states) are split evenly below/above μ = 0, the
    /// symmetric counting convention of the Hall bookkeeping.
    pub fn ids(&self, mu: f64) -> f64 {
        let tol = 1e-12;
        if mu.abs() <= tol {
            let strictly_below = self.eigenvalues.partition_point(|&e| e < -tol);
            let zeros = self.eigenvalues.partition_point(|&e| e <= tol) - strictly_below;
            return (strictly_below as f64 + 0.5 * zeros as f64) * self.norm;
        }
        let below = self.eigenvalues.partition_point(|&e| e <= mu);
        below as f64 * self.norm
    }
}

/// IDS from a Floquet band structure: mean branch count below μ per cell,
/// divided by the cell area.
pub fn ids_floquet(bands: &BandStructure, mu: f64) -> f64 {
    let lat = build_lattice(bands.kind);
    bands.states_below_per_cell(mu) / lat.cell_area
}

/// Ensemble DOS curve on a fixed energy grid.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DosCurve {
    pub energies: Vec<f64>,
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    pub method: String,
}

impl DosCurve {
    /// ∫ρ dE by the trapezoid rule; equals (#cell sites)/|b₁∧b₂| for
    /// histogram curves by construction.
    pub fn total_mass(&self) -> f64 {
        let mut acc = 0.0;
        for w in self.energies.windows(2).zip(self.density.windows(2)) {
            acc += 0.5 * (w.0[1] - w.0[0]) * (w.1[0] + w.1[1]);
        }
        acc
    }
}

/// Histogram DOS of one spectrum on [−e_max, e_max] with `bins` bins,
/// normalized to states per unit area per unit energy.
fn histogram(eigs: &[f64], norm: f64, e_max: f64, bins: usize) -> Vec<f64> {
    let mut rho = vec![0.0; bins];
    let de = 2.0 * e_max / bins as f64;
    for &e in eigs {
        let b = (((e + e_max) / de).floor() as isize).clamp(0, bins as isize - 1) as usize;
        rho[b] += norm / de;
    }
    rho
}

/// Disorder-ensemble DOS on a torus: histogram path below the dense cutoff,
/// KPM path above. Deterministic in (spec, R).
pub fn dos_curve(
    kind: LatticeKind,
    flux: Flux,
    disorder: &DisorderSpec,
    l: usize,
    ensemble: usize,
    bins: usize,
) -> Result<DosCurve> {
    let lat = build_lattice(kind);
    let dim = lat.sites_per_cell() * l * l;
    let e_max = 1.0 + disorder.lambda * disorder.distribution.sup_abs() + 0.05;
    let energies: Vec<f64> =
        (0..bins).map(|b| -e_max + (b as f64 + 0.5) * 2.0 * e_max / bins as f64).collect();

    let curves: Vec<Vec<f64>> = (0..ensemble as u64)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let op = build_hamiltonian(kind, flux, disorder, Region::Torus { l }, r)?;
            if dim <= DENSE_DIM_AUTO {
                let data = spectrum_finite(&op)?;
                Ok(histogram(&data.eigenvalues, data.norm, e_max, bins))
            } else {
                let params = KpmParams::default();
                let moments = kpm_mean_moments(&op, &params, r);
                let a = kpm_scale(&op);
                let norm = 1.0 / (l as f64 * l as f64 * lat.cell_area);
                Ok(kpm_density_on_grid(&moments, a, &energies).iter().map(|d| d * norm).collect())
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let r = ensemble as f64;
    let mut density = vec![0.0; bins];
    let mut stderr = vec![0.0; bins];
    for b in 0..bins {
        // deviations from the first curve: identical realizations give an
        // exact zero variance
        let base = curves[0][b];
        let dbar = kahan_sum(curves.iter().map(|c| c[b] - base)) / r;
        let var = kahan_sum(curves.iter().map(|c| {
            let d = (c[b] - base) - dbar;
            d * d
        })) / (r * (r - 1.0).max(1.0));
        density[b] = base + dbar;
        stderr[b] = if ensemble > 1 { var.sqrt() } else { 0.0 };
    }
    Ok(DosCurve {
        energies,
        density,
        stderr,
        method: if dim <= DENSE_DIM_AUTO { "histogram".into() } else { "kpm".into() },
    })
}

// ---------------------------------------------------------------------------
// Kernel polynomial method
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct KpmParams {
    pub moments: usize,
    pub vectors: usize,
}

impl Default for KpmParams {
    fn default() -> Self {
        KpmParams { moments: 2000, vectors: 8 }
    }
}

/// Rescaling H̃ = H/a with a slightly above the norm bound.
pub fn kpm_scale(op: &MagneticOperator) -> f64 {
    op.norm_bound() * 1.02
}

/// Jackson damping factors g_0..g_{M−1}.
pub fn jackson(m_total: usize) -> Vec<f64> {
    let mp = m_total as f64 + 1.0;
    (0..m_total)
        .map(|m| {
            let x = PI * m as f64 / mp;
            ((mp - m as f64) * x.cos() + x.sin() / (PI / mp).tan()) / mp
        })
        .collect()
}

/// Chebyshev moments μ_m ≈ tr T_m(H/a) averaged over random phase vectors,
/// two moments per matvec. Deterministic in (seed, realization, vector).
pub fn kpm_mean_moments(op: &MagneticOperator, params: &KpmParams, realization: u64) -> Vec<f64> {
    let dim = op.dim();
    let a = kpm_scale(op);
    let m_total = params.moments;
    let half = m_total / 2;
    let mut mean = vec![0.0f64; m_total];
    for v in 0..params.vectors as u64 {
        let key_hi = realization.wrapping_mul(0x1_0000).wrapping_add(v);
        let mut z: Vec<Complex64> = (0..dim)
            .map(|i| {
                Complex64::from_polar(
                    1.0,
                    2.0 * PI * rng::uniform01(op.disorder.seed, Stream::KpmVector, key_hi, i as u64),
                )
            })
            .collect();
        // t0 = z, t1 = H̃ z
        let mut t_prev = z.clone();
        let mut t_cur = vec![Complex64::new(0.0, 0.0); dim];
        op.matrix.matvec(&t_prev, &mut t_cur);
        for x in t_cur.iter_mut() {
            *x /= a;
        }
        let mu0 = dim as f64;
        let mu1: f64 = t_cur.iter().zip(&t_prev).map(|(x, y)| (y.conj() * x).re).sum();
        let mut mus = vec![0.0f64; m_total];
        mus[0] = mu0;
        if m_total > 1 {
            mus[1] = mu1;
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
        for m in 1..=half {
            // μ_{2m} = 2⟨t_m, t_m⟩ − μ_0 ; μ_{2m+1} = 2⟨t_{m+1}, t_m⟩ − μ_1
            let tm_tm: f64 = t_cur.iter().map(|x| x.norm_sqr()).sum();
            if 2 * m < m_total {
                mus[2 * m] = 2.0 * tm_tm - mu0;
            }
            op.matrix.matvec(&t_cur, &mut scratch);
            for i in 0..dim {
                let next = scratch[i] / a * 2.0 - t_prev[i];
                t_prev[i] = t_cur[i];
                t_cur[i] = next;
            }
            if 2 * m + 1 < m_total {
                let tn_tm: f64 = t_cur.iter().zip(&t_prev).map(|(x, y)| (y.conj() * x).re).sum();
                mus[2 * m + 1] = 2.0 * tn_tm - mu1;
            }
        }
        for m in 0..m_total {
            mean[m] += mus[m];
        }
        z.clear();
    }
    for m in &mut mean {
        *m /= params.vectors as f64;
    }
    mean
}

/// Reconstruct the density (states per unit energy, whole operator) on an
/// energy grid from damped moments.
pub fn kpm_density_on_grid(moments: &[f64], a: f64, energies: &[f64]) -> Vec<f64> {
    let g = jackson(moments.len());
    energies
        .iter()
        .map(|&e| {
            let x = e / a;
            if x.abs() >= 1.0 {
                return 0.0;
            }
            let th = x.acos();
            let mut acc = g[0] * moments[0];
            for m in 1..moments.len() {
                acc += 2.0 * g[m] * moments[m] * (m as f64 * th).cos();
            }
            acc / (PI * (1.0 - x * x).sqrt()) / a
        })
        .collect()
}

/// Chebyshev coefficients of the indicator of [lo, hi] on the scaled axis.
fn indicator_coeffs(m_total: usize, a: f64, lo: f64, hi: f64) -> Vec<f64> {
    let xa = (lo / a).clamp(-1.0, 1.0);
    let xb = (hi / a).clamp(-1.0, 1.0);
    let (ta, tb) = (xa.acos(), xb.acos()); // ta ≥ tb
    let mut c = vec![0.0; m_total];
    c[0] = (ta - tb) / PI;
    for m in 1..m_total {
        let mf = m as f64;
        c[m] = 2.0 / PI * ((mf * ta).sin() - (mf * tb).sin()) / mf;
    }
    c
}

/// Chebyshev coefficients of x·1_{[lo,hi]}(x) on the scaled axis.
fn first_moment_coeffs(m_total: usize, a: f64, lo: f64, hi: f64) -> Vec<f64> {
    let xa = (lo / a).clamp(-1.0, 1.0);
    let xb = (hi / a).clamp(-1.0, 1.0);
    let (ta, tb) = (xa.acos(), xb.acos());
    let s = |k: i64, th: f64| -> f64 {
        if k == 0 {
            th
        } else {
            (k as f64 * th).sin() / k as f64
        }
    };
    let mut c = vec![0.0; m_total];
    for m in 0..m_total as i64 {
        let pref = if m == 0 { 1.0 } else { 2.0 } / (2.0 * PI);
        c[m as usize] =
            pref * (s(m - 1, ta) - s(m - 1, tb) + s(m + 1, ta) - s(m + 1, tb));
    }
    c
}

/// Chebyshev coefficients of a smooth function sampled by Gauss–Chebyshev
/// quadrature on the scaled axis.
pub fn smooth_coeffs(m_total: usize, a: f64, f: &dyn Fn(f64) -> f64, nodes: usize) -> Vec<f64> {
    let mut c = vec![0.0; m_total];
    for k in 0..nodes {
        let th = PI * (k as f64 + 0.5) / nodes as f64;
        let fx = f(a * th.cos());
        for (m, cm) in c.iter_mut().enumerate() {
            *cm += fx * (m as f64 * th).cos();
        }
    }
    for (m, cm) in c.iter_mut().enumerate() {
        *cm *= if m == 0 { 1.0 } else { 2.0 } / nodes as f64;
    }
    c
}

/// Damped spectral sum Σ g_m μ_m c_m ≈ tr f(H).
pub fn kpm_spectral_sum(moments: &[f64], coeffs: &[f64]) -> f64 {
    let g = jackson(moments.len());
    kahan_sum((0..moments.len()).map(|m| g[m] * moments[m] * coeffs[m]))
}

/// State count and energy centroid of the window [lo, hi] from moments.
pub fn kpm_window_mass_center(moments: &[f64], a: f64, lo: f64, hi: f64) -> (f64, f64) {
    let mass = kpm_spectral_sum(moments, &indicator_coeffs(moments.len(), a, lo, hi));
    let first = kpm_spectral_sum(moments, &first_moment_coeffs(moments.len(), a, lo, hi)) * a;
    (mass, if mass.abs() > 1e-12 { first / mass } else { 0.0 })
}

// ---------------------------------------------------------------------------
// Trace-formula checks
// ---------------------------------------------------------------------------

/// C^∞ bump supported on (center−width, center+width), value 1 at center.
pub fn bump(center: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let t = (x - center) / width;
        if t.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    }
}

/// Per-level weight of the trace formula: h/2π on the square lattice,
/// h/(π|b₁∧b₂|) on the honeycomb, q·h/(π|b₁∧b₂|) near a rational.
pub fn level_weight(kind: LatticeKind, q_base: i64, h: f64) -> f64 {
    let lat = build_lattice(kind);
    match kind {
        LatticeKind::Square => h / (2.0 * PI),
        LatticeKind::Hex => q_base as f64 * h / (PI * lat.cell_area),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceCheckReport {
    pub kind: LatticeKind,
    pub h: f64,
    pub l: usize,
    pub ensemble: usize,
    pub lambda: f64,
    pub bump_center: f64,
    pub bump_width: f64,
    /// Σ_n w·f(z_n + λE(V))
    pub prediction: f64,
    /// ensemble mean of tr̃ f(H_{λ,ω})
    pub measured: f64,
    pub measured_stderr: f64,
    pub residual: f64,
    /// |measured(λ) − measured(0)| over the λ ladder, with the common-seed
    /// clean baseline subtracted; empty unless the ladder was requested
    pub lambda_ladder: Vec<(f64, f64)>,
    /// log-log slope fitted through the ladder
    pub scaling_exponent: Option<f64>,
}

/// Ensemble mean of tr̃ f(H_{λ,ω}) for a smooth f, with the dense or KPM
/// path chosen by volume. Returns (mean, stderr).
pub fn measure_trace(
    kind: LatticeKind,
    flux: Flux,
    disorder: &DisorderSpec,
    l: usize,
    ensemble: usize,
    f: &(dyn Fn(f64) -> f64 + Sync),
    params: &KpmParams,
) -> Result<(f64, f64)> {
    let lat = build_lattice(kind);
    let dim = lat.sites_per_cell() * l * l;
    let norm = 1.0 / (l as f64 * l as f64 * lat.cell_area);
    let vals: Vec<f64> = (0..ensemble as u64)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let op = build_hamiltonian(kind, flux, disorder, Region::Torus { l }, r)?;
            if dim <= DENSE_DIM_AUTO {
                let data = spectrum_finite(&op)?;
                Ok(kahan_sum(data.eigenvalues.iter().map(|&e| f(e))) * norm)
            } else {
                let moments = kpm_mean_moments(&op, params, r);
                let a = kpm_scale(&op);
                let coeffs = smooth_coeffs(moments.len(), a, &f, 4096);
                Ok(kpm_spectral_sum(&moments, &coeffs) * norm)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let r = ensemble as f64;
    let base = vals[0];
    let dbar = kahan_sum(vals.iter().map(|v| v - base)) / r;
    let var = kahan_sum(vals.iter().map(|v| {
        let d = (v - base) - dbar;
        d * d
    })) / (r * (r - 1.0).max(1.0));
    Ok((base + dbar, if ensemble > 1 { var.sqrt() } else { 0.0 }))
}

/// Check the semiclassical trace formula against an ensemble measurement:
/// prediction Σ_n w·f(z_n + λE(V)) versus tr̃ f(H_{λ,ω}).
///
/// Refuses when the disorder broadening λ·sup|V| closes a predicted gap
/// around the bump support (outside the theorem's regime).
pub fn trace_formula_check(
    kind: LatticeKind,
    flux: Flux,
    disorder: &DisorderSpec,
    l: usize,
    ensemble: usize,
    table: &LandauTable,
    bump_center: f64,
    bump_width: f64,
    params: &KpmParams,
) -> Result<TraceCheckReport> {
    let broaden = disorder.lambda * disorder.distribution.sup_abs();
    for gap in table.gaps() {
        if gap < 2.0 * broaden {
            return Err(Error::BandOverlap { lambda: disorder.lambda });
        }
    }
    let f = bump(bump_center, bump_width);
    let w = level_weight(kind, table.q, table.h);
    let shift = disorder.lambda * disorder.mean();
    let prediction: f64 = table.levels.iter().map(|lv| w * f(lv.z + shift)).sum();
    let (measured, stderr) = measure_trace(kind, flux, disorder, l, ensemble, &f, params)?;
    Ok(TraceCheckReport {
        kind,
        h: table.h,
        l,
        ensemble,
        lambda: disorder.lambda,
        bump_center,
        bump_width,
        prediction,
        measured,
        measured_stderr: stderr,
        residual: (measured - prediction).abs(),
        lambda_ladder: Vec::new(),
        scaling_exponent: None,
    })
}

/// Fit the λ-scaling exponent of the disorder correction for a centered
/// distribution: residual(λ) = |m(λ) − m(0)| over the ladder.
///
/// Variance control: common random numbers across rungs (same realizations
/// and KPM vectors), and each realization enters as the antithetic pair
/// (V, −V), so all odd-in-λ sampling error cancels pathwise and the even
/// Var(V)·λ² signal is exposed cleanly.
pub fn trace_scaling_exponent(
    kind: LatticeKind,
    flux: Flux,
    distribution: crate::operator::Distribution,
    seed: u64,
    l: usize,
    ensemble: usize,
    bump_center: f64,
    bump_width: f64,
    lambdas: &[f64],
    params: &KpmParams,
) -> Result<(Vec<(f64, f64)>, f64)> {
    let lat = build_lattice(kind);
    let dim = lat.sites_per_cell() * l * l;
    let norm = 1.0 / (l as f64 * l as f64 * lat.cell_area);
    let f = bump(bump_center, bump_width);

    let measure_lambda = |lam: f64| -> Result<f64> {
        let spec = DisorderSpec { distribution, lambda: lam.abs().max(0.0), seed };
        let vals: Vec<f64> = (0..ensemble as u64)
            .into_par_iter()
            .map(|r| -> Result<f64> {
                let base = crate::operator::sample_potential(&spec, &lat, Region::Torus { l }, r);
                let mut acc = 0.0;
                let signs: &[f64] = if lam == 0.0 { &[1.0] } else { &[1.0, -1.0] };
                for &s in signs {
                    let pot: Vec<f64> = base.iter().map(|&v| s * v).collect();
                    let op = crate::operator::build_hamiltonian_with_potential(
                        kind,
                        flux,
                        &DisorderSpec { distribution, lambda: lam, seed },
                        Region::Torus { l },
                        r,
                        pot,
                    )?;
                    acc += if dim <= DENSE_DIM_AUTO {
                        let data = spectrum_finite(&op)?;
                        kahan_sum(data.eigenvalues.iter().map(|&e| f(e))) * norm
                    } else {
                        let moments = kpm_mean_moments(&op, params, r);
                        let a = kpm_scale(&op);
                        let coeffs = smooth_coeffs(moments.len(), a, &f, 4096);
                        kpm_spectral_sum(&moments, &coeffs) * norm
                    };
                }
                Ok(acc / signs.len() as f64)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(kahan_sum(vals.iter().copied()) / ensemble as f64)
    };

    let m0 = measure_lambda(0.0)?;
    let mut ladder = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let m = measure_lambda(lam)?;
        ladder.push((lam, (m - m0).abs()));
    }
    let xs: Vec<f64> = ladder.iter().map(|&(l, _)| l.ln()).collect();
    let ys: Vec<f64> = ladder.iter().map(|&(_, r)| r.max(1e-300).ln()).collect();
    let (_, slope, _) = linalg::affine_fit(&xs, &ys);
    Ok((ladder, slope))
}

/// Branch-cluster masses near zero at flux 2πP/Q, for the near-rational
/// trace weight check: counts the Floquet branches inside each level window
/// of `table` (states per unit area).
pub fn cluster_masses_near_zero(
    p_total: i64,
    q_total: i64,
    table: &LandauTable,
    ns: &[i64],
) -> Result<Vec<(i64, f64)>> {
    let lat = build_lattice(LatticeKind::Hex);
    // branch intervals from the two extremal-k eigensolves
    let edges = floquet::band_edges_fast(LatticeKind::Hex, p_total, q_total)?;
    let per_branch = 1.0 / (q_total as f64 * lat.cell_area);
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let (lo, hi) = table
            .window_of(n)
            .ok_or_else(|| Error::Validation(format!("level {n} not in table")))?;
        let count = edges.iter().filter(|&&(a, b)| a > lo && b < hi).count();
        out.push((n, count as f64 * per_branch));
    }
    Ok(out)
}
