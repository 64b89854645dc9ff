//! Dense Hermitian eigensolvers and small helpers shared across modules.
//!
//! All spectra in this crate come from Hermitian matrices, so the wrappers
//! here are thin fronts over nalgebra's Hermitian-specific routines with the
//! eigenvalues returned sorted ascending.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues of a Hermitian matrix, sorted ascending.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, sorted ascending.
/// Column j of the returned matrix is the eigenvector of the j-th eigenvalue.
///
/// The eigenvalue attached to each column is recomputed as the Rayleigh
/// quotient and the pairs re-sorted: nalgebra's SymmetricEigen has been
/// observed to permute eigenvector columns against its eigenvalue list on
/// matrices with a large spectral range. A residual check guards the result.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let se = m.clone().symmetric_eigen();
    let n = se.eigenvalues.len();
    let av = m * &se.eigenvectors;
    let rayleigh: Vec<f64> = (0..n)
        .map(|j| {
            se.eigenvectors
                .column(j)
                .iter()
                .zip(av.column(j).iter())
                .map(|(v, w)| (v.conj() * w).re)
                .sum()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| rayleigh[a].partial_cmp(&rayleigh[b]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&j| rayleigh[j]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    let scale = vals.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    for (col, &j) in order.iter().enumerate() {
        let resid: f64 = se
            .eigenvectors
            .column(j)
            .iter()
            .zip(av.column(j).iter())
            .map(|(v, w)| (w - v * Complex64::new(rayleigh[j], 0.0)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        // mispaired columns leave residuals on the order of eigenvalue
        // gaps; honest solver noise stays orders of magnitude below this
        assert!(
            resid <= 1e-6 * scale * (n as f64).sqrt(),
            "Hermitian eigensolver produced an invalid pair (residual {resid:.3e})"
        );
        vecs.set_column(col, &se.eigenvectors.column(j));
    }
    (vals, vecs)
}

/// Smallest eigenvalue of a Hermitian matrix. Sizes 1–3 use closed forms
/// (hot path of the phase-space area scans).
pub fn min_eigvalsh(m: &CMatrix) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)].re,
        2 => {
            let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
            let half = 0.5 * (a - d);
            0.5 * (a + d) - (half * half + m[(0, 1)].norm_sqr()).sqrt()
        }
        3 => {
            // trigonometric closed form for 3×3 Hermitian eigenvalues
            let p1 = m[(0, 1)].norm_sqr() + m[(0, 2)].norm_sqr() + m[(1, 2)].norm_sqr();
            let (a, b, c) = (m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re);
            if p1 == 0.0 {
                return a.min(b).min(c);
            }
            let q = (a + b + c) / 3.0;
            let p2 = (a - q).powi(2) + (b - q).powi(2) + (c - q).powi(2) + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            let det_b = {
                let s = |i: usize, j: usize| {
                    if i == j {
                        Complex64::new(m[(i, i)].re - q, 0.0)
                    } else {
                        m[(i, j)]
                    }
                };
                let d = s(0, 0) * (s(1, 1) * s(2, 2) - s(1, 2) * s(2, 1))
                    - s(0, 1) * (s(1, 0) * s(2, 2) - s(1, 2) * s(2, 0))
                    + s(0, 2) * (s(1, 0) * s(2, 1) - s(1, 1) * s(2, 0));
                d.re / (p * p * p)
            };
            let r = (det_b / 2.0).clamp(-1.0, 1.0);
            let phi = r.acos() / 3.0;
            q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
        }
        _ => eigvalsh(m).into_iter().next().unwrap(),
    }
}

/// Determinant through LU.
pub fn det(m: &CMatrix) -> Complex64 {
    m.clone().lu().determinant()
}

/// Max entrywise deviation from Hermiticity, ‖M − M†‖_∞.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Coefficients of ∏_j (e_j − λ) as a polynomial in λ, index = power of λ.
/// The leading coefficient is exactly (−1)^n by construction.
pub fn poly_from_roots_desc(eigs: &[f64]) -> Vec<f64> {
    let mut coeffs = vec![1.0f64]; // constant polynomial 1
    for &e in eigs {
        // multiply by (e - λ)
        let mut next = vec![0.0; coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k] += e * c;
            next[k + 1] -= c;
        }
        coeffs = next;
    }
    coeffs
}

/// Evaluate a polynomial with coefficient vector in ascending powers.
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Kahan-compensated sum; used where reductions must be order-stable.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Mean and standard deviation (population) of a slice.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = kahan_sum(xs.iter().copied()) / n;
    let var = kahan_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / n;
    (mean, var.sqrt())
}

/// Least-squares affine fit y ≈ a + b·x. Returns (a, b, max residual).
pub fn affine_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx = kahan_sum(xs.iter().copied());
    let sy = kahan_sum(ys.iter().copied());
    let sxx = kahan_sum(xs.iter().map(|x| x * x));
    let sxy = kahan_sum(xs.iter().zip(ys).map(|(x, y)| x * y));
    let denom = n * sxx - sx * sx;
    let b = (n * sxy - sx * sy) / denom;
    let a = (sy - b * sx) / n;
    let resid = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - a - b * x).abs())
        .fold(0.0f64, f64::max);
    (a, b, resid)
}
