//! RF combining into a single rectifier.
//!
//! The output power is an increasing function of the channel gain
//! `|p_R^H H p_T|^2`, so every optimizer here works on the gain and converts
//! to watts only at the end.

use serde::{Deserialize, Serialize};

use crate::channel::{BeamspaceChannel, CoderMatrix};
use crate::dcc::maximize_with_incumbent;
use crate::rectenna;
use crate::search::{sebo_maximize, QuasiNewtonConfig, SeboConfig};
use crate::system::{self, ErrorSlot, ReactanceCache, ReactanceMatrix, SystemModel};
use crate::{linalg, rng, CMatrix, CVector, Complex64, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RfcBeamformers {
    pub p_t: CVector,
    pub p_r: CVector,
    /// `|p_R^H H p_T|^2`.
    pub gain: f64,
}

fn check_power(power: f64) -> Result<()> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::config("transmit_power", "must be positive and finite"));
    }
    Ok(())
}

/// Largest squared singular value.
pub fn sigma_max_sq(h: &CMatrix) -> f64 {
    let (r, c) = h.shape();
    if r == 1 || c == 1 {
        return h.norm_squared();
    }
    if r == 2 || c == 2 {
        // Closed form for the 2x2 Gram matrix.
        let g = if r == 2 { h * h.adjoint() } else { h.adjoint() * h };
        let a = g[(0, 0)].re;
        let d = g[(1, 1)].re;
        let b = g[(0, 1)].norm_sqr();
        let half = 0.5 * (a - d);
        return 0.5 * (a + d) + (half * half + b).sqrt();
    }
    let s = h.singular_values();
    let top = s.iter().copied().fold(0.0, f64::max);
    top * top
}

/// Dominant singular pair: `p_T = sqrt(2P) v_1`, `p_R = u_1`, gain `2P sigma_max^2`.
///
/// The common phase is fixed so that the largest-magnitude entry of `v_1` is
/// real and positive.
pub fn svd_beamformers(h: &CMatrix, power: f64) -> Result<RfcBeamformers> {
    check_power(power)?;
    let svd = linalg::sorted_svd(h);
    let sigma = svd.s.get(0).copied().unwrap_or(0.0);
    if !(sigma > 0.0) {
        return Err(Error::ZeroChannel);
    }
    let v1 = svd.v.column(0).into_owned();
    let u1 = svd.u.column(0).into_owned();
    let lead = v1
        .iter()
        .fold(Complex64::new(0.0, 0.0), |b, z| if z.norm() > b.norm() { *z } else { b });
    let rot = lead.conj() / lead.norm();
    Ok(RfcBeamformers {
        p_t: v1 * rot * Complex64::new((2.0 * power).sqrt(), 0.0),
        p_r: u1 * rot,
        gain: 2.0 * power * sigma * sigma,
    })
}

/// Maximum ratio transmission against a fixed receive combiner.
pub fn mrt(h: &CMatrix, p_r: &CVector, power: f64) -> Result<RfcBeamformers> {
    check_power(power)?;
    let g = h.adjoint() * p_r;
    let norm = g.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroChannel);
    }
    Ok(RfcBeamformers {
        p_t: g * Complex64::new((2.0 * power).sqrt() / norm, 0.0),
        p_r: p_r.clone(),
        gain: 2.0 * power * norm * norm,
    })
}

pub fn gain_of(h: &CMatrix, p_t: &CVector, p_r: &CVector) -> f64 {
    p_r.dotc(&(h * p_t)).norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AbfConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AbfConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbfOutcome {
    pub beamformers: RfcBeamformers,
    pub iterations: usize,
    pub converged: bool,
    /// `||p_R^H H||^2` for the start point and after every iteration.
    pub history: Vec<f64>,
}

fn unit_modulus(v: &CVector, previous: Option<&CVector>) -> CVector {
    let inv = 1.0 / (v.len() as f64).sqrt();
    CVector::from_fn(v.len(), |n, _| {
        let z = v[n];
        if z.norm() > 0.0 {
            z / z.norm() * inv
        } else {
            match previous {
                Some(p) => p[n],
                None => Complex64::new(inv, 0.0),
            }
        }
    })
}

/// Phase-only receive combining by the fixed-point iteration
/// `p_R <- e^{j arg(H H^H p_R)} / sqrt(N)`, followed by MRT.
pub fn abf_receive_beamforming(
    h: &CMatrix,
    power: f64,
    cfg: &AbfConfig,
    init: Option<&CVector>,
) -> Result<AbfOutcome> {
    check_power(power)?;
    let n = h.nrows();
    if h.norm() == 0.0 {
        return Err(Error::ZeroChannel);
    }
    let mut p_r = match init {
        Some(v) if v.len() != n => {
            return Err(Error::DimensionMismatch(format!(
                "initial combiner has {} entries, channel has {n} rows",
                v.len()
            )))
        }
        Some(v) => unit_modulus(v, None),
        None => unit_modulus(&CVector::from_element(n, Complex64::new(1.0, 0.0)), None),
    };
    let gram = h * h.adjoint();
    let objective = |p: &CVector| (h.adjoint() * p).norm_squared();
    let mut value = objective(&p_r);
    let mut history = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let z = &gram * &p_r;
        let next = unit_modulus(&z, Some(&p_r));
        let step = (&next - &p_r).norm() / next.norm();
        let v = objective(&next);
        let obj_change = (v - value).abs() / value.abs().max(f64::MIN_POSITIVE);
        p_r = next;
        value = v;
        history.push(value);
        if step < cfg.tol || obj_change < cfg.tol * cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(AbfOutcome {
        beamformers: mrt(h, &p_r, power)?,
        iterations,
        converged,
        history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfcConfig {
    pub sebo: SeboConfig,
    pub qn: QuasiNewtonConfig,
    pub abf: AbfConfig,
    pub tol: f64,
    pub max_outer: usize,
    pub restart_every_outer: bool,
}

impl Default for RfcConfig {
    fn default() -> Self {
        Self {
            sebo: SeboConfig::default(),
            qn: QuasiNewtonConfig::default(),
            abf: AbfConfig::default(),
            tol: 1e-6,
            max_outer: 30,
            restart_every_outer: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfcOutcome {
    pub b_t: CoderMatrix,
    pub b_r: CoderMatrix,
    /// Raw reactances for continuous coding.
    pub x: Option<ReactanceMatrix>,
    pub beamformers: RfcBeamformers,
    pub power: f64,
    pub outer_iterations: usize,
    /// Channel gain after every step.
    pub history: Vec<f64>,
}

fn check_init(model: &SystemModel, ch: &BeamspaceChannel, b_t: usize, b_r: usize) -> Result<(usize, usize)> {
    let (m, n) = model.antenna_counts(ch)?;
    if b_t != m || b_r != n {
        return Err(Error::DimensionMismatch(format!(
            "initial coders cover {b_t}+{b_r} antennas, channel has {m}+{n}"
        )));
    }
    Ok((m, n))
}

fn finish(model: &SystemModel, bf: RfcBeamformers) -> (RfcBeamformers, f64) {
    let power = rectenna::power_rfc_of_gain(bf.gain, model.rectenna());
    (bf, power)
}

/// SEBO on `2P sigma_max^2(H(B_T, B_R))` with SVD beamformers.
pub fn optimize_rfc_binary(
    model: &SystemModel,
    ch: &BeamspaceChannel,
    power: f64,
    cfg: &RfcConfig,
    init: (&CoderMatrix, &CoderMatrix),
) -> Result<RfcOutcome> {
    check_power(power)?;
    let (m, _) = check_init(model, ch, init.0.count(), init.1.count())?;
    let bits0 = system::join_bits(init.0, init.1);
    let mut slot = ErrorSlot::default();
    let objective = |b: &[bool]| {
        let r = model
            .channel_for_bits(ch, b)
            .map(|h| 2.0 * power * sigma_max_sq(&h));
        slot.value(r)
    };
    let res = sebo_maximize(objective, bits0.len(), &bits0, &cfg.sebo);
    let res = slot.resolve(res)?;
    let h = model.channel_for_bits(ch, &res.bits)?;
    let (beamformers, out_power) = finish(model, svd_beamformers(&h, power)?);
    let (b_t, b_r) = system::split_bits(&res.bits, m, model.q());
    Ok(RfcOutcome {
        b_t,
        b_r,
        x: None,
        history: res.round_values,
        beamformers,
        power: out_power,
        outer_iterations: 1,
    })
}

/// Keeps `(state, bf)` when its gain beats the stored one.
fn offer<S: Clone>(slot: &mut Option<(S, RfcBeamformers)>, state: &S, bf: &RfcBeamformers) {
    if slot.as_ref().is_none_or(|(_, b)| bf.gain > b.gain) {
        *slot = Some((state.clone(), bf.clone()));
    }
}

/// Multi-start BFGS on `2P sigma_max^2` over stacked reactances, with `init`
/// as one start.
pub fn optimize_rfc_continuous(
    model: &SystemModel,
    ch: &BeamspaceChannel,
    power: f64,
    cfg: &RfcConfig,
    init: &ReactanceMatrix,
) -> Result<RfcOutcome> {
    check_power(power)?;
    let (m, n) = check_init(model, ch, init.x_t.len(), init.x_r.len())?;
    let x0 = init.stacked();
    let mut cache = ReactanceCache::new(m, n);
    let h0 = cache.channel(model, ch, &x0)?;
    let mut best = None;
    offer(&mut best, &x0, &svd_beamformers(&h0, power)?);
    let g0 = 2.0 * power * sigma_max_sq(&h0);
    let scale = if g0 > 0.0 { g0 } else { 1.0 };
    let mut slot = ErrorSlot::default();
    let mut eval_cache = cache.clone();
    let objective = |xs: &[f64]| {
        let r = eval_cache
            .channel(model, ch, xs)
            .map(|h| 2.0 * power * sigma_max_sq(&h));
        slot.value(r) / scale
    };
    let res = maximize_with_incumbent(objective, &x0, &cfg.qn);
    let (x, _) = slot.resolve(res)?;
    let h = cache.channel(model, ch, &x)?;
    let bf = svd_beamformers(&h, power)?;
    let history = vec![g0, bf.gain];
    offer(&mut best, &x, &bf);
    let (x, bf) = best.expect("initial state offered");
    let (beamformers, out_power) = finish(model, bf);
    let xm = ReactanceMatrix::from_stacked(&x, m, model.q());
    let (b_t, b_r) = xm.coders(model.antenna_config());
    Ok(RfcOutcome {
        b_t,
        b_r,
        x: Some(xm),
        history,
        beamformers,
        power: out_power,
        outer_iterations: 1,
    })
}

/// Alternates phase-only receive combining (with MRT transmit) and SEBO on
/// `|p_R^H H(B) p_T|^2` with both beamformers held fixed.
pub fn optimize_abf_binary(
    model: &SystemModel,
    ch: &BeamspaceChannel,
    power: f64,
    cfg: &RfcConfig,
    init: (&CoderMatrix, &CoderMatrix),
) -> Result<RfcOutcome> {
    let (m, _) = check_init(model, ch, init.0.count(), init.1.count())?;
    let mut bits = system::join_bits(init.0, init.1);
    let mut h = model.channel_for_bits(ch, &bits)?;
    let mut p_r: Option<CVector> = None;
    let mut best = None;
    let mut history = Vec::new();
    let mut value = f64::NAN;
    let mut outer = 0;
    while outer < cfg.max_outer {
        outer += 1;
        let abf = abf_receive_beamforming(&h, power, &cfg.abf, p_r.as_ref())?;
        let bf = abf.beamformers;
        history.push(bf.gain);
        offer(&mut best, &bits, &bf);
        let mut slot = ErrorSlot::default();
        let objective = |b: &[bool]| {
            let r = model.channel_for_bits(ch, b).map(|hb| gain_of(&hb, &bf.p_t, &bf.p_r));
            slot.value(r)
        };
        let sebo_cfg = cfg.sebo.with_seed(rng::derive_seed(cfg.sebo.rng_seed, outer as u64));
        let res = sebo_maximize(objective, bits.len(), &bits, &sebo_cfg);
        let res = slot.resolve(res)?;
        bits = res.bits;
        h = model.channel_for_bits(ch, &bits)?;
        history.push(res.value);
        offer(&mut best, &bits, &RfcBeamformers { gain: res.value, ..bf.clone() });
        p_r = Some(bf.p_r);
        let previous = value;
        value = res.value;
        if outer > 1 && (value - previous).abs() < cfg.tol * previous.abs() {
            break;
        }
    }
    let abf = abf_receive_beamforming(&h, power, &cfg.abf, p_r.as_ref())?;
    offer(&mut best, &bits, &abf.beamformers);
    let (bits, bf) = best.expect("at least one alternation step");
    let (beamformers, out_power) = finish(model, bf);
    let (b_t, b_r) = system::split_bits(&bits, m, model.q());
    Ok(RfcOutcome {
        b_t,
        b_r,
        x: None,
        beamformers,
        power: out_power,
        outer_iterations: outer,
        history,
    })
}

/// Continuous counterpart of [`optimize_abf_binary`] over stacked reactances;
/// `init_p_r` warm-starts the first receive-combining step.
pub fn optimize_abf_continuous(
    model: &SystemModel,
    ch: &BeamspaceChannel,
    power: f64,
    cfg: &RfcConfig,
    init: &ReactanceMatrix,
    init_p_r: Option<&CVector>,
) -> Result<RfcOutcome> {
    let (m, n) = check_init(model, ch, init.x_t.len(), init.x_r.len())?;
    let mut x = init.stacked();
    let mut cache = ReactanceCache::new(m, n);
    let mut h = cache.channel(model, ch, &x)?;
    let mut best = None;
    if let Some(Ok(bf)) = init_p_r.map(|p0| mrt(&h, p0, power)) {
        offer(&mut best, &x, &bf);
    }
    let mut p_r: Option<CVector> = init_p_r.cloned();
    let mut history = Vec::new();
    let mut value = f64::NAN;
    let mut outer = 0;
    while outer < cfg.max_outer {
        outer += 1;
        let abf = abf_receive_beamforming(&h, power, &cfg.abf, p_r.as_ref())?;
        let bf = abf.beamformers;
        history.push(bf.gain);
        offer(&mut best, &x, &bf);
        let scale = if bf.gain > 0.0 { bf.gain } else { 1.0 };
        let mut slot = ErrorSlot::default();
        let mut eval_cache = cache.clone();
        let objective = |xs: &[f64]| {
            let r = eval_cache
                .channel(model, ch, xs)
                .map(|hx| gain_of(&hx, &bf.p_t, &bf.p_r));
            slot.value(r) / scale
        };
        let mut qn_cfg = cfg.qn.with_seed(rng::derive_seed(cfg.qn.rng_seed, outer as u64));
        if outer > 1 && !cfg.restart_every_outer {
            qn_cfg.restarts = 0;
        }
        let res = maximize_with_incumbent(objective, &x, &qn_cfg);
        x = slot.resolve(res)?.0;
        h = cache.channel(model, ch, &x)?;
        let v = gain_of(&h, &bf.p_t, &bf.p_r);
        history.push(v);
        offer(&mut best, &x, &RfcBeamformers { gain: v, ..bf.clone() });
        p_r = Some(bf.p_r);
        let previous = value;
        value = v;
        if outer > 1 && (value - previous).abs() < cfg.tol * previous.abs() {
            break;
        }
    }
    let abf = abf_receive_beamforming(&h, power, &cfg.abf, p_r.as_ref())?;
    offer(&mut best, &x, &abf.beamformers);
    let (x, bf) = best.expect("at least one alternation step");
    let (beamformers, out_power) = finish(model, bf);
    let xm = ReactanceMatrix::from_stacked(&x, m, model.q());
    let (b_t, b_r) = xm.coders(model.antenna_config());
    Ok(RfcOutcome {
        b_t,
        b_r,
        x: Some(xm),
        beamformers,
        power: out_power,
        outer_iterations: outer,
        history,
    })
}
