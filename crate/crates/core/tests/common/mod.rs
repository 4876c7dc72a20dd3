#![allow(dead_code)]

use pixelwpt::antenna::{synthesize_antenna, AntennaConfig};
use pixelwpt::rectenna::RectennaParams;
use pixelwpt::rng::{self, Rng};
use pixelwpt::system::SystemModel;
use pixelwpt::{CMatrix, CVector, Complex64};
use rand::Rng as _;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> Rng {
    rng::seeded(seed)
}

pub fn cn(r: &mut Rng) -> Complex64 {
    let re: f64 = r.sample(StandardNormal);
    let im: f64 = r.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn cmatrix(r: &mut Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| cn(r))
}

pub fn cvector(r: &mut Rng, len: usize) -> CVector {
    CVector::from_fn(len, |_, _| cn(r))
}

pub fn bits(r: &mut Rng, len: usize) -> Vec<bool> {
    (0..len).map(|_| r.random::<bool>()).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Synthetic antenna model with default settings.
pub fn model(seed: u64, q: usize, k: usize, rank: usize) -> SystemModel {
    let cfg = AntennaConfig::default();
    let net = synthesize_antenna(seed, q, k, rank, &cfg).unwrap();
    SystemModel::new(net, cfg, RectennaParams::default()).unwrap()
}

/// Time average of `Re{a e^{jt}}^i` by an `n`-point rectangle rule, exact for
/// trigonometric polynomials of degree below `n`.
pub fn quadrature_moment(a: Complex64, i: u32, n: usize) -> f64 {
    (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            (a * Complex64::from_polar(1.0, t)).re.powi(i as i32)
        })
        .sum::<f64>()
        / n as f64
}

/// DC voltage of one rectenna from quadrature moments.
pub fn quadrature_voltage(a: Complex64, p: &RectennaParams) -> f64 {
    (2..=p.n_0)
        .step_by(2)
        .map(|i| {
            let fact: f64 = (1..=i).map(f64::from).product();
            let beta = p.r_ant.powf(f64::from(i) / 2.0) / (fact * (p.i_d * p.v_t).powi(i as i32 - 1));
            beta * quadrature_moment(a, i, 512)
        })
        .sum()
}

/// Largest squared singular value by power iteration on `H^H H`.
pub fn power_iteration_sigma_sq(h: &CMatrix) -> f64 {
    let g = h.adjoint() * h;
    let mut v = CVector::from_element(g.ncols(), Complex64::new(1.0, 0.0));
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w = &g * &v;
        let next = w.norm();
        v = w / Complex64::new(next, 0.0);
        let done = (next - lambda).abs() <= 1e-15 * next;
        lambda = next;
        if done {
            break;
        }
    }
    // Rayleigh quotient of the converged vector.
    v.dotc(&(&g * &v)).re
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`.
pub fn sign_test_p(k: usize, n: usize) -> f64 {
    let ln_half_n = n as f64 * 0.5f64.ln();
    let mut ln_c = 0.0; // ln C(n, 0)
    let mut p = 0.0;
    for j in 0..=n {
        if j > 0 {
            ln_c += ((n - j + 1) as f64).ln() - (j as f64).ln();
        }
        if j >= k {
            p += (ln_c + ln_half_n).exp();
        }
    }
    p
}
