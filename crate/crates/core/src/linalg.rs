//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{CMatrix, CVector};

/// Entries drawn i.i.d. CN(0, 1): real and imaginary parts each N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Row-major fill so that the leading rows do not depend on the row count.
    let mut m = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(r, c)] = Complex64::new(re * s, im * s);
        }
    }
    m
}

pub fn real_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// `cols` orthonormal columns spanning a random subspace of C^rows.
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let g = complex_gaussian(rng, rows, cols);
    let q = g.qr().q();
    q.columns(0, cols).into_owned()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Conjugate of every entry.
pub fn conj(v: &CVector) -> CVector {
    v.map(|z| z.conj())
}

/// Thin SVD with singular values sorted in descending order.
pub struct SortedSvd {
    pub u: CMatrix,
    pub s: DVector<f64>,
    pub v: CMatrix,
}

pub fn sorted_svd(m: &CMatrix) -> SortedSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let v = v_t.adjoint();
    let u_sorted = CMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v_sorted = CMatrix::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])]);
    let s_sorted = DVector::from_fn(order.len(), |i, _| s[order[i]]);
    SortedSvd {
        u: u_sorted,
        s: s_sorted,
        v: v_sorted,
    }
}
