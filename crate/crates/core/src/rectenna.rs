//! Truncated diode model of the rectenna.
//!
//! The DC output voltage of a rectifier fed by the phasor `A` is
//! `sum_{i even, 2 <= i <= n_0} beta_i * zeta_i * |A|^i` with
//! `beta_i = R_ant^{i/2} / (i! (I_d v_t)^{i-1})` and `zeta_i` the time average
//! of `sin^i`. Amplitudes are volts, powers watts.

use serde::{Deserialize, Serialize};

use crate::{CMatrix, CVector, Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RectennaParams {
    /// Antenna resistance, ohms.
    pub r_ant: f64,
    /// Rectifier load, ohms.
    pub r_l: f64,
    /// Diode ideality factor.
    pub i_d: f64,
    /// Thermal voltage, volts.
    pub v_t: f64,
    /// Truncation order (even).
    pub n_0: u32,
}

impl Default for RectennaParams {
    fn default() -> Self {
        Self {
            r_ant: 50.0,
            r_l: 5000.0,
            i_d: 1.05,
            v_t: 0.025,
            n_0: 4,
        }
    }
}

impl RectennaParams {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("rectenna.r_ant", self.r_ant),
            ("rectenna.r_l", self.r_l),
            ("rectenna.i_d", self.i_d),
            ("rectenna.v_t", self.v_t),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, "must be positive and finite"));
            }
        }
        if self.n_0 < 2 || !self.n_0.is_multiple_of(2) {
            return Err(Error::config("rectenna.n_0", "must be an even integer >= 2"));
        }
        Ok(())
    }

    /// `beta_i` for even `i`.
    pub fn beta(&self, i: u32) -> f64 {
        let fact: f64 = (1..=i).map(f64::from).product();
        self.r_ant.powf(f64::from(i) / 2.0) / (fact * (self.i_d * self.v_t).powi(i as i32 - 1))
    }

    /// Pairs `(i, beta_i * zeta_i)` for every even order up to `n_0`.
    pub fn coefficients(&self) -> Vec<(u32, f64)> {
        (2..=self.n_0)
            .step_by(2)
            .map(|i| (i, self.beta(i) * zeta(i)))
            .collect()
    }

    /// Scalar map from branch amplitude magnitude to DC voltage.
    pub fn voltage_of_magnitude(&self, magnitude: f64) -> f64 {
        let m2 = magnitude * magnitude;
        let mut pow = 1.0;
        let mut v = 0.0;
        for i in (2..=self.n_0).step_by(2) {
            pow *= m2;
            v += self.beta(i) * zeta(i) * pow;
        }
        v
    }
}

/// `(1/2pi) int_0^{2pi} sin^i t dt = (i-1)!! / i!!` for even `i`, zero for odd `i`.
pub fn zeta(i: u32) -> f64 {
    if i % 2 == 1 {
        return 0.0;
    }
    (1..=i / 2).map(|k| (2 * k - 1) as f64 / (2 * k) as f64).product()
}

/// Time average of `Re{A e^{jwt}}^i`, equal to `zeta_i |A|^i`.
pub fn harmonic_moment(amplitude: Complex64, i: u32) -> Result<f64> {
    if i < 2 || !i.is_multiple_of(2) {
        return Err(Error::OddOrder(i));
    }
    Ok(zeta(i) * amplitude.norm().powi(i as i32))
}

pub fn dc_voltage_branch(amplitude: Complex64, p: &RectennaParams) -> f64 {
    p.voltage_of_magnitude(amplitude.norm())
}

/// Output power with DC combining: every receive branch has its own rectifier.
pub fn power_dcc(h: &CMatrix, p_t: &CVector, p: &RectennaParams) -> Result<f64> {
    if h.ncols() != p_t.len() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} columns, beamformer has {} entries",
            h.ncols(),
            p_t.len()
        )));
    }
    let y = h * p_t;
    Ok(y.iter()
        .map(|a| {
            let v = dc_voltage_branch(*a, p);
            v * v
        })
        .sum::<f64>()
        / p.r_l)
}

/// Output power with RF combining into one rectifier.
pub fn power_rfc(h: &CMatrix, p_t: &CVector, p_r: &CVector, p: &RectennaParams) -> Result<f64> {
    if h.ncols() != p_t.len() || h.nrows() != p_r.len() {
        return Err(Error::DimensionMismatch(format!(
            "channel is {}x{}, beamformers have {} and {} entries",
            h.nrows(),
            h.ncols(),
            p_r.len(),
            p_t.len()
        )));
    }
    let y = p_r.dotc(&(h * p_t));
    Ok(power_rfc_of_gain(y.norm_sqr(), p))
}

/// RFC power as a function of the channel gain `|p_R^H H p_T|^2`.
pub fn power_rfc_of_gain(gain: f64, p: &RectennaParams) -> f64 {
    let v = p.voltage_of_magnitude(gain.max(0.0).sqrt());
    v * v / p.r_l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_closed_form() {
        assert_eq!(zeta(2), 0.5);
        assert_eq!(zeta(4), 0.375);
        assert!((zeta(6) - 0.3125).abs() < 1e-15);
    }

    #[test]
    fn moments() {
        assert_eq!(harmonic_moment(Complex64::new(1.0, 0.0), 2).unwrap(), 0.5);
        assert_eq!(harmonic_moment(Complex64::new(0.0, 0.0), 4).unwrap(), 0.0);
        // (2 sin t)^4 averages to 16 * 3/8.
        assert!((harmonic_moment(Complex64::new(2.0, 0.0), 4).unwrap() - 6.0).abs() < 1e-12);
        assert!(matches!(harmonic_moment(Complex64::new(1.0, 0.0), 3), Err(Error::OddOrder(3))));
        assert!(matches!(harmonic_moment(Complex64::new(1.0, 0.0), 0), Err(Error::OddOrder(0))));
    }

    #[test]
    fn beta_values_for_default_constants() {
        let p = RectennaParams::default();
        assert!((p.beta(2) - 952.380_952_380_952_4).abs() < 1e-9);
        assert!((p.beta(4) / 5.758_9e6 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn branch_voltage_at_one_millivolt() {
        let p = RectennaParams::default();
        let v = dc_voltage_branch(Complex64::new(0.0, 1e-3), &p);
        let expected = p.beta(2) * 0.5 * 1e-6 + p.beta(4) * 0.375 * 1e-12;
        assert!((v - expected).abs() <= 1e-15 * expected);
        assert_eq!(dc_voltage_branch(Complex64::new(0.0, 0.0), &p), 0.0);
    }

    #[test]
    fn per_term_homogeneity() {
        let p = RectennaParams::default();
        let a = 3e-3;
        let c2 = p.beta(2) * zeta(2);
        let c4 = p.beta(4) * zeta(4);
        let v1 = p.voltage_of_magnitude(a);
        let v2 = p.voltage_of_magnitude(2.0 * a);
        let expected = 4.0 * c2 * a * a + 16.0 * c4 * a.powi(4);
        assert!((v2 - expected).abs() < 1e-12 * expected);
        assert!(v2 > v1);
    }

    #[test]
    fn validation() {
        let mut p = RectennaParams::default();
        p.n_0 = 3;
        assert!(p.validate().is_err());
        p.n_0 = 6;
        p.validate().unwrap();
        p.r_l = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn single_receive_antenna_rfc_equals_dcc() {
        let p = RectennaParams::default();
        let h = CMatrix::from_row_slice(1, 2, &[Complex64::new(1e-3, 2e-3), Complex64::new(-3e-3, 0.5e-3)]);
        let pt = CVector::from_vec(vec![Complex64::new(1.0, 0.5), Complex64::new(-0.2, 1.1)]);
        let pr = CVector::from_element(1, Complex64::new(1.0, 0.0));
        let a = power_dcc(&h, &pt, &p).unwrap();
        let b = power_rfc(&h, &pt, &pr, &p).unwrap();
        assert!((a - b).abs() <= 1e-14 * a);
    }
}
