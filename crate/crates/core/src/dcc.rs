//! DC combining: SCA transmit beamforming alternated with antenna coding.

use serde::{Deserialize, Serialize};

use crate::channel::{BeamspaceChannel, CoderMatrix};
use crate::rectenna::{self, RectennaParams};
use crate::search::{quasi_newton_maximize, sebo_maximize, QuasiNewtonConfig, SeboConfig};
use crate::system::{self, ErrorSlot, ReactanceCache, ReactanceMatrix, SystemModel};
use crate::{rng, CMatrix, CVector, Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaConfig {
    /// Relative objective change that ends the iteration.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaStatus {
    Converged,
    MaxIterations,
    /// Every branch amplitude vanished; the initial beamformer is returned.
    ZeroDirection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaIterate {
    pub p_t: CVector,
    /// `r_n = |h_n p_T|^2`.
    pub r: Vec<f64>,
    /// Ascent direction evaluated at `p_t`.
    pub a: CVector,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome {
    pub p_t: CVector,
    pub objective: f64,
    pub status: ScaStatus,
    pub iterations: usize,
    /// Starting point followed by every iterate.
    pub history: Vec<ScaIterate>,
}

fn branch_gains(h: &CMatrix, p_t: &CVector) -> Vec<f64> {
    (h * p_t).iter().map(|y| y.norm_sqr()).collect()
}

/// `a = (1/R_L) sum_n sum_{i,j} beta_i beta_j zeta_i zeta_j (i+j) r_n^{(i+j)/2-1} h_n^H h_n p_T`.
pub fn ascent_direction(h: &CMatrix, p_t: &CVector, p: &RectennaParams) -> CVector {
    let coeffs = p.coefficients();
    let y = h * p_t;
    let mut a = CVector::zeros(h.ncols());
    for (n, yn) in y.iter().enumerate() {
        let r = yn.norm_sqr();
        let mut w = 0.0;
        for &(i, ci) in &coeffs {
            for &(j, cj) in &coeffs {
                let k = (i + j) / 2;
                w += ci * cj * f64::from(i + j) * r.powi(k as i32 - 1);
            }
        }
        if w != 0.0 {
            let row = h.row(n);
            for m in 0..h.ncols() {
                a[m] += row[m].conj() * *yn * (w / p.r_l);
            }
        }
    }
    a
}

/// Linear minorant of `r^{(i+j)/2}` around `p0`, evaluated at `p`:
/// `Re{(i+j) r0^{(i+j)/2-1} p0^H h^H h p} - (i+j-1) r0^{(i+j)/2}`.
pub fn surrogate_term(h_row: &CVector, p0: &CVector, p: &CVector, i: u32, j: u32) -> f64 {
    let y0 = h_row.dot(p0);
    let y = h_row.dot(p);
    let r0 = y0.norm_sqr();
    let k = f64::from(i + j) / 2.0;
    let lin = (y0.conj() * y).re;
    f64::from(i + j) * r0.powf(k - 1.0) * lin - f64::from(i + j - 1) * r0.powf(k)
}

/// Conjugate of the strongest channel row, scaled to `1/2 ||p||^2 = power`.
pub fn default_init(h: &CMatrix, power: f64) -> Result<CVector> {
    let best = (0..h.nrows())
        .map(|n| (n, h.row(n).norm()))
        .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
    if !(best.1 > 0.0) {
        return Err(Error::ZeroChannel);
    }
    let row = h.row(best.0).adjoint();
    Ok(row * Complex64::new((2.0 * power).sqrt() / best.1, 0.0))
}

fn scale_to_power(v: &CVector, power: f64) -> CVector {
    v * Complex64::new((2.0 * power).sqrt() / v.norm(), 0.0)
}

/// Closed-form SCA iterations `p_T <- sqrt(2P) a / ||a||`.
pub fn sca_transmit_beamforming(
    h: &CMatrix,
    power: f64,
    p: &RectennaParams,
    cfg: &ScaConfig,
    init: Option<&CVector>,
) -> Result<ScaOutcome> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::config("transmit_power", "must be positive and finite"));
    }
    let mut p_t = match init {
        Some(v) if v.len() != h.ncols() => {
            return Err(Error::DimensionMismatch(format!(
                "initial beamformer has {} entries, channel has {} columns",
                v.len(),
                h.ncols()
            )))
        }
        Some(v) if v.norm() > 0.0 => scale_to_power(v, power),
        _ => default_init(h, power)?,
    };
    let mut objective = rectenna::power_dcc(h, &p_t, p)?;
    let mut history = Vec::new();
    let mut status = ScaStatus::MaxIterations;
    let mut iterations = 0;
    for _ in 0..cfg.max_iter {
        let a = ascent_direction(h, &p_t, p);
        history.push(ScaIterate {
            p_t: p_t.clone(),
            r: branch_gains(h, &p_t),
            a: a.clone(),
            objective,
        });
        let na = a.norm();
        if !(na > 0.0) {
            status = ScaStatus::ZeroDirection;
            break;
        }
        let next = scale_to_power(&a, power);
        let value = rectenna::power_dcc(h, &next, p)?;
        iterations += 1;
        let change = (value - objective).abs() / objective.abs().max(f64::MIN_POSITIVE);
        p_t = next;
        objective = value;
        if change < cfg.tol {
            status = ScaStatus::Converged;
            break;
        }
    }
    if status != ScaStatus::ZeroDirection {
        history.push(ScaIterate {
            a: ascent_direction(h, &p_t, p),
            r: branch_gains(h, &p_t),
            p_t: p_t.clone(),
            objective,
        });
    }
    Ok(ScaOutcome {
        p_t,
        objective,
        status,
        iterations,
        history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DccConfig {
    pub sca: ScaConfig,
    pub sebo: SeboConfig,
    pub qn: QuasiNewtonConfig,
    /// Relative change of the alternation objective that ends the loop.
    pub tol: f64,
    pub max_outer: usize,
    /// Draw fresh random reactance starts on every alternation step, not only the first.
    pub restart_every_outer: bool,
}

impl Default for DccConfig {
    fn default() -> Self {
        Self {
            sca: ScaConfig::default(),
            sebo: SeboConfig::default(),
            qn: QuasiNewtonConfig::default(),
            tol: 1e-6,
            max_outer: 30,
            restart_every_outer: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DccOutcome {
    pub p_t: CVector,
    pub b_t: CoderMatrix,
    pub b_r: CoderMatrix,
    pub power: f64,
    pub outer_iterations: usize,
    /// Objective after every beamforming and coding step.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DccContinuousOutcome {
    pub p_t: CVector,
    pub x: ReactanceMatrix,
    /// Reported coders `clamp(|x| / x_oc, 0, 1)`.
    pub b_t: CoderMatrix,
    pub b_r: CoderMatrix,
    pub power: f64,
    pub outer_iterations: usize,
    pub history: Vec<f64>,
}

fn relative_change(new: f64, old: f64) -> f64 {
    (new - old).abs() / old.abs().max(f64::MIN_POSITIVE)
}

/// Best complete state seen by an alternation.
struct Incumbent<S> {
    state: S,
    p_t: CVector,
    power: f64,
}

impl<S: Clone> Incumbent<S> {
    fn offer(slot: &mut Option<Self>, state: &S, p_t: &CVector, power: f64) {
        if slot.as_ref().is_none_or(|b| power > b.power) {
            *slot = Some(Self {
                state: state.clone(),
                p_t: p_t.clone(),
                power,
            });
        }
    }
}

/// Alternates SCA beamforming and SEBO over the joint coder bits.
///
/// The first beamforming step starts from [`default_init`], so the result is
/// never worse than `init` with SCA beamforming.
pub fn optimize_dcc_binary(
    model: &SystemModel,
    ch: &BeamspaceChannel,
    power: f64,
    cfg: &DccConfig,
    init: (&CoderMatrix, &CoderMatrix),
) -> Result<DccOutcome> {
    let (m, n) = model.antenna_counts(ch)?;
    if init.0.count() != m || init.1.count() != n {
        return Err(Error::DimensionMismatch(format!(
            "initial coders cover {}+{} antennas, channel has {m}+{n}",
            init.0.count(),
            init.1.count()
        )));
    }
    let params = model.rectenna();
    let mut bits = system::join_bits(init.0, init.1);
    let mut h = model.channel_for_bits(ch, &bits)?;
    let mut p_t: Option<CVector> = None;
    let mut best = None;
    let mut history = Vec::new();
    let mut value = f64::NAN;
    let mut outer = 0;

    while outer < cfg.max_outer {
        outer += 1;
        let sca = sca_transmit_beamforming(&h, power, params, &cfg.sca, p_t.as_ref())?;
        history.push(sca.objective);
        Incumbent::offer(&mut best, &bits, &sca.p_t, sca.objective);
        let beam = sca.p_t;

        let mut slot = ErrorSlot::default();
        let objective = |b: &[bool]| {
            let r = model
                .channel_for_bits(ch, b)
                .and_then(|hb| rectenna::power_dcc(&hb, &beam, params));
            slot.value(r)
        };
        let sebo_cfg = cfg.sebo.with_seed(rng::derive_seed(cfg.sebo.rng_seed, outer as u64));
        let res = sebo_maximize(objective, bits.len(), &bits, &sebo_cfg);
        let res = slot.resolve(res)?;
        bits = res.bits;
        h = model.channel_for_bits(ch, &bits)?;
        history.push(res.value);
        Incumbent::offer(&mut best, &bits, &beam, res.value);
        p_t = Some(beam);

        let previous = value;
        value = res.value;
        if outer > 1 && relative_change(value, previous) < cfg.tol {
            break;
        }
    }

    // Final beamformer for the final coders.
    let sca = sca_transmit_beamforming(&h, power, params, &cfg.sca, p_t.as_ref())?;
    Incumbent::offer(&mut best, &bits, &sca.p_t, sca.objective);
    let best = best.expect("at least one alternation step");
    let (b_t, b_r) = system::split_bits(&best.state, m, model.q());
    Ok(DccOutcome {
        p_t: best.p_t,
        b_t,
        b_r,
        power: best.power,
        outer_iterations: outer,
        history,
    })
}

/// Alternates SCA beamforming and multi-start BFGS over stacked reactances.
///
/// `init` is one BFGS start and `init_p_t` warm-starts the first beamforming
/// step; the result is never worse than `init` under `init_p_t`.
pub fn optimize_dcc_continuous(
    model: &SystemModel,
    ch: &BeamspaceChannel,
    power: f64,
    cfg: &DccConfig,
    init: &ReactanceMatrix,
    init_p_t: Option<&CVector>,
) -> Result<DccContinuousOutcome> {
    let (m, n) = model.antenna_counts(ch)?;
    let q = model.q();
    let mut x = init.stacked();
    if init.x_t.len() != m || init.x_r.len() != n || x.len() != (m + n) * q {
        return Err(Error::DimensionMismatch(format!(
            "initial reactances do not cover {m}+{n} antennas of {q} pixels"
        )));
    }
    let params = model.rectenna();
    let mut cache = ReactanceCache::new(m, n);
    let mut h = cache.channel(model, ch, &x)?;
    let mut best = None;
    if let Some(p0) = init_p_t {
        Incumbent::offer(&mut best, &x, p0, rectenna::power_dcc(&h, p0, params)?);
    }
    let mut p_t: Option<CVector> = init_p_t.cloned();
    let mut history = Vec::new();
    let mut value = f64::NAN;
    let mut outer = 0;

    while outer < cfg.max_outer {
        outer += 1;
        let sca = sca_transmit_beamforming(&h, power, params, &cfg.sca, p_t.as_ref())?;
        history.push(sca.objective);
        Incumbent::offer(&mut best, &x, &sca.p_t, sca.objective);
        let beam = sca.p_t;
        let scale = if sca.objective > 0.0 { sca.objective } else { 1.0 };

        let mut slot = ErrorSlot::default();
        let mut eval_cache = cache.clone();
        let objective = |xs: &[f64]| {
            let r = eval_cache
                .channel(model, ch, xs)
                .and_then(|hx| rectenna::power_dcc(&hx, &beam, params));
            slot.value(r) / scale
        };
        let mut qn_cfg = cfg.qn.with_seed(rng::derive_seed(cfg.qn.rng_seed, outer as u64));
        if outer > 1 && !cfg.restart_every_outer {
            qn_cfg.restarts = 0;
        }
        let res = maximize_with_incumbent(objective, &x, &qn_cfg);
        let res = slot.resolve(res)?;
        x = res.0;
        h = cache.channel(model, ch, &x)?;
        let v = rectenna::power_dcc(&h, &beam, params)?;
        history.push(v);
        Incumbent::offer(&mut best, &x, &beam, v);
        p_t = Some(beam);

        let previous = value;
        value = v;
        if outer > 1 && relative_change(value, previous) < cfg.tol {
            break;
        }
    }

    let sca = sca_transmit_beamforming(&h, power, params, &cfg.sca, p_t.as_ref())?;
    Incumbent::offer(&mut best, &x, &sca.p_t, sca.objective);
    let best = best.expect("at least one alternation step");
    let x = ReactanceMatrix::from_stacked(&best.state, m, q);
    let (b_t, b_r) = x.coders(model.antenna_config());
    Ok(DccContinuousOutcome {
        p_t: best.p_t,
        x,
        b_t,
        b_r,
        power: best.power,
        outer_iterations: outer,
        history,
    })
}

/// Multi-start BFGS with `incumbent` as the first start. A random-start
/// result replaces the incumbent only when strictly better, and a zero
/// restart count polishes the incumbent alone.
pub(crate) fn maximize_with_incumbent<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    incumbent: &[f64],
    cfg: &QuasiNewtonConfig,
) -> Result<(Vec<f64>, f64)> {
    let x0 = incumbent.to_vec();
    if cfg.restarts == 0 {
        let polish = QuasiNewtonConfig {
            restarts: 1,
            ..cfg.clone()
        };
        polish.validate()?;
        let run = crate::search::bfgs_ascent(&mut objective, x0, &polish)?;
        return Ok((run.x, run.value));
    }
    let out = quasi_newton_maximize(objective, incumbent.len(), cfg, &[x0])?;
    Ok((out.x, out.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_branch_converges_to_mrt() {
        let p = RectennaParams::default();
        let h = CMatrix::from_row_slice(1, 2, &[c(1e-3, 0.0), c(0.0, 1e-3)]);
        let out = sca_transmit_beamforming(&h, 1.0, &p, &ScaConfig::default(), None).unwrap();
        let mrt = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, -1.0)]);
        let expected = rectenna::power_dcc(&h, &mrt, &p).unwrap();
        assert!((out.objective - expected).abs() <= 1e-6 * expected);
        assert!((out.p_t.norm_squared() / 2.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_transmit_antenna_is_phase_invariant() {
        let p = RectennaParams::default();
        let h = CMatrix::from_row_slice(2, 1, &[c(1e-3, 2e-4), c(-3e-4, 5e-4)]);
        let a = CVector::from_element(1, c(1.0, 0.0));
        let b = CVector::from_element(1, c(0.0, 1.0));
        let ra = sca_transmit_beamforming(&h, 2.0, &p, &ScaConfig::default(), Some(&a)).unwrap();
        let rb = sca_transmit_beamforming(&h, 2.0, &p, &ScaConfig::default(), Some(&b)).unwrap();
        assert!((ra.objective - rb.objective).abs() <= 1e-14 * ra.objective);
    }

    #[test]
    fn zero_channel_is_an_error_without_init() {
        let h = CMatrix::zeros(2, 2);
        let err = sca_transmit_beamforming(&h, 1.0, &RectennaParams::default(), &ScaConfig::default(), None);
        assert!(matches!(err, Err(Error::ZeroChannel)));
    }

    #[test]
    fn zero_direction_returns_init() {
        let h = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let init = CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        let out =
            sca_transmit_beamforming(&h, 1.0, &RectennaParams::default(), &ScaConfig::default(), Some(&init))
                .unwrap();
        assert_eq!(out.status, ScaStatus::ZeroDirection);
        assert_eq!(out.p_t, init);
    }

    #[test]
    fn surrogate_is_tangent() {
        let h = CVector::from_vec(vec![c(0.3, -0.2), c(0.1, 0.7)]);
        let p0 = CVector::from_vec(vec![c(1.0, 0.5), c(-0.4, 0.2)]);
        let r0 = h.dot(&p0).norm_sqr();
        assert!((surrogate_term(&h, &p0, &p0, 2, 4) - r0.powi(3)).abs() < 1e-12);
    }
}
