//! Beamspace MIMO channel.
//!
//! `H_C` links the `M * N_eff` transmit basis patterns to the `N * N_eff`
//! receive basis patterns. Antenna coders pick one unit-norm pattern coder per
//! antenna, and the effective `N x M` channel is `W_R^H H_C W_T` with
//! block-diagonal `W_T`, `W_R`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antenna::{self, AntennaCoder, AntennaConfig, CodingMode, MultiportNetwork, PatternBasis, Side};
use crate::{linalg, rng, CMatrix, CVector, Error, Result};

/// Antenna coders of one array side, one column per antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct CoderMatrix {
    columns: Vec<AntennaCoder>,
}

impl CoderMatrix {
    pub fn new(columns: Vec<AntennaCoder>) -> Result<Self> {
        if let Some(first) = columns.first() {
            let (q, mode) = (first.len(), first.mode());
            if let Some(bad) = columns.iter().position(|c| c.len() != q || c.mode() != mode) {
                return Err(Error::InvalidCoder(format!(
                    "column {bad} differs in length or mode from column 0"
                )));
            }
        }
        Ok(Self { columns })
    }

    /// All-zero coders (every switch on).
    pub fn zeros(count: usize, q: usize, mode: CodingMode) -> Self {
        Self {
            columns: vec![AntennaCoder::zeros(q, mode); count],
        }
    }

    /// Binary coders from `count * q` bits, antenna by antenna.
    pub fn from_bits(bits: &[bool], q: usize) -> Self {
        assert!(q > 0 && bits.len().is_multiple_of(q), "bit count must be a multiple of q");
        Self {
            columns: bits.chunks(q).map(AntennaCoder::binary).collect(),
        }
    }

    pub fn bits(&self) -> Vec<bool> {
        self.columns.iter().flat_map(|c| c.bits()).collect()
    }

    pub fn columns(&self) -> &[AntennaCoder] {
        &self.columns
    }

    pub fn count(&self) -> usize {
        self.columns.len()
    }

    pub fn q(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }

    pub fn mode(&self) -> Option<CodingMode> {
        self.columns.first().map(|c| c.mode())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamspaceChannel {
    h_c: CMatrix,
    amplitude_scale: f64,
}

impl BeamspaceChannel {
    pub fn new(h_c: CMatrix, amplitude_scale: f64) -> Result<Self> {
        if !linalg::is_finite(&h_c) {
            return Err(Error::DimensionMismatch("channel contains NaN or Inf".into()));
        }
        if !(amplitude_scale >= 0.0) {
            return Err(Error::config("scale", "amplitude scale must be nonnegative"));
        }
        Ok(Self {
            h_c,
            amplitude_scale,
        })
    }

    pub fn h_c(&self) -> &CMatrix {
        &self.h_c
    }

    pub fn amplitude_scale(&self) -> f64 {
        self.amplitude_scale
    }

    pub fn n_r(&self) -> usize {
        self.h_c.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.h_c.ncols()
    }

    /// Copy with amplitudes multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            h_c: &self.h_c * Complex64::new(factor, 0.0),
            amplitude_scale: self.amplitude_scale * factor,
        }
    }

    pub fn to_file(&self) -> ChannelFile {
        let (real, imag) = antenna::split_row_major(&self.h_c);
        ChannelFile {
            n_r: self.n_r(),
            n_t: self.n_t(),
            scale: self.amplitude_scale,
            real,
            imag,
        }
    }

    pub fn from_file(file: &ChannelFile) -> Result<Self> {
        let want = file.n_r * file.n_t;
        if file.real.len() != want || file.imag.len() != want {
            return Err(Error::DimensionMismatch(format!(
                "channel file holds {}/{} entries, expected {want}",
                file.real.len(),
                file.imag.len()
            )));
        }
        Self::new(
            antenna::join_row_major(file.n_r, file.n_t, &file.real, &file.imag),
            file.scale,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }
}

/// Channel dump used for regression fixtures. Entries are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub n_r: usize,
    pub n_t: usize,
    pub scale: f64,
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

/// Channel between all `2K` angular samples of both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualChannel {
    h_v: CMatrix,
}

impl VirtualChannel {
    pub fn new(h_v: CMatrix) -> Result<Self> {
        if h_v.nrows() != h_v.ncols() || !h_v.nrows().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "virtual channel must be 2K x 2K, got {}x{}",
                h_v.nrows(),
                h_v.ncols()
            )));
        }
        Ok(Self { h_v })
    }

    pub fn h_v(&self) -> &CMatrix {
        &self.h_v
    }
}

/// Amplitude factor for a path loss given in dB.
pub fn amplitude_scale_for_loss_db(path_loss_db: f64) -> f64 {
    10f64.powf(-path_loss_db / 20.0)
}

/// I.i.d. CN(0, 1) entries scaled by `amplitude_scale`, filled row by row.
pub fn sample_channel(
    rng_seed: u64,
    n_r: usize,
    n_t: usize,
    amplitude_scale: f64,
) -> Result<BeamspaceChannel> {
    if n_r == 0 || n_t == 0 {
        return Err(Error::DimensionMismatch("channel needs n_r, n_t >= 1".into()));
    }
    if !(amplitude_scale > 0.0 && amplitude_scale.is_finite()) {
        return Err(Error::config("amplitude_scale", "must be positive and finite"));
    }
    let mut rng = rng::seeded(rng_seed);
    let h = linalg::complex_gaussian(&mut rng, n_r, n_t) * Complex64::new(amplitude_scale, 0.0);
    BeamspaceChannel::new(h, amplitude_scale)
}

/// Stacks unit pattern coders into the block-diagonal `(count * N_eff) x count` matrix.
pub fn block_diagonal(ws: &[CVector]) -> CMatrix {
    let n_eff = ws.first().map_or(0, |w| w.len());
    let mut out = CMatrix::zeros(ws.len() * n_eff, ws.len());
    for (m, w) in ws.iter().enumerate() {
        out.view_mut((m * n_eff, m), (n_eff, 1)).copy_from(w);
    }
    out
}

pub fn assemble_pattern_coders(
    coders: &CoderMatrix,
    antenna: &MultiportNetwork,
    basis: &PatternBasis,
    cfg: &AntennaConfig,
    side: Side,
) -> Result<CMatrix> {
    let ws = coders
        .columns()
        .iter()
        .enumerate()
        .map(|(m, c)| {
            antenna::pattern_coder(basis, antenna, c, cfg, side).map_err(|e| match e {
                Error::DegenerateRadiator { .. } => Error::DegenerateRadiator { antenna: Some(m) },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(block_diagonal(&ws))
}

/// `W_R^H H_C W_T`.
pub fn effective_channel(ch: &BeamspaceChannel, w_t: &CMatrix, w_r: &CMatrix) -> Result<CMatrix> {
    let h = ch.h_c();
    if w_t.nrows() != h.ncols() || w_r.nrows() != h.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "H_C is {}x{}, W_T has {} rows, W_R has {} rows",
            h.nrows(),
            h.ncols(),
            w_t.nrows(),
            w_r.nrows()
        )));
    }
    Ok(w_r.adjoint() * h * w_t)
}

/// Effective channel from per-antenna pattern coders without forming the
/// block-diagonal matrices: entry `(n, m)` is `w_R,n^H H_C[n, m] w_T,m`.
pub fn effective_channel_blocks<W: std::borrow::Borrow<CVector>>(h_c: &CMatrix, w_t: &[W], w_r: &[W]) -> CMatrix {
    let n_eff = w_t.first().map_or(0, |w| w.borrow().len());
    let mut out = CMatrix::zeros(w_r.len(), w_t.len());
    for (m, wt) in w_t.iter().enumerate() {
        let wt = wt.borrow();
        for (n, wr) in w_r.iter().enumerate() {
            let wr = wr.borrow();
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..n_eff {
                let col = m * n_eff + b;
                let mut s = Complex64::new(0.0, 0.0);
                for a in 0..n_eff {
                    s += wr[a].conj() * h_c[(n * n_eff + a, col)];
                }
                acc += s * wt[b];
            }
            out[(n, m)] = acc;
        }
    }
    out
}

/// `H_C = E_bs,R^T H_V E_bs,T` with `E_bs` stacking the basis patterns `U`.
pub fn virtual_to_beamspace(
    hv: &VirtualChannel,
    basis_t: &[PatternBasis],
    basis_r: &[PatternBasis],
) -> Result<BeamspaceChannel> {
    let dim = hv.h_v().nrows();
    if basis_t.is_empty() || basis_r.is_empty() {
        return Err(Error::DimensionMismatch("need at least one basis per side".into()));
    }
    if let Some(b) = basis_t.iter().chain(basis_r).find(|b| b.pattern_len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "basis patterns have {} samples, virtual channel has {dim}",
            b.pattern_len()
        )));
    }
    let stack = |bases: &[PatternBasis]| {
        let cols: usize = bases.iter().map(|b| b.n_eff()).sum();
        let mut e = CMatrix::zeros(dim, cols);
        let mut off = 0;
        for b in bases {
            e.view_mut((0, off), (dim, b.n_eff())).copy_from(b.u());
            off += b.n_eff();
        }
        e
    };
    let e_t = stack(basis_t);
    let e_r = stack(basis_r);
    BeamspaceChannel::new(e_r.transpose() * hv.h_v() * e_t, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_effective_channel() {
        let ch = BeamspaceChannel::new(CMatrix::from_element(1, 1, Complex64::new(2.0, 0.0)), 1.0)
            .unwrap();
        let w_t = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let w_r = CMatrix::from_element(1, 1, Complex64::new(0.0, 1.0));
        let h = effective_channel(&ch, &w_t, &w_r).unwrap();
        assert_eq!(h[(0, 0)], Complex64::new(0.0, -2.0));
    }

    #[test]
    fn effective_channel_rejects_bad_shapes() {
        let ch = sample_channel(1, 4, 4, 1.0).unwrap();
        let w = CMatrix::zeros(3, 1);
        assert!(matches!(
            effective_channel(&ch, &w, &w),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_channel(42, 6, 8, 0.5).unwrap();
        let b = sample_channel(42, 6, 8, 0.5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_channel(43, 6, 8, 0.5).unwrap());
    }

    #[test]
    fn leading_rows_are_shared_across_receive_sizes() {
        let small = sample_channel(9, 4, 8, 1.0).unwrap();
        let large = sample_channel(9, 8, 8, 1.0).unwrap();
        assert_eq!(small.h_c(), &large.h_c().rows(0, 4).into_owned());
    }

    #[test]
    fn zero_virtual_channel_maps_to_zero() {
        let cfg = AntennaConfig::default();
        let net = antenna::synthesize_antenna(2, 5, 4, 3, &cfg).unwrap();
        let basis = antenna::compute_basis(&net, &cfg).unwrap();
        let hv = VirtualChannel::new(CMatrix::zeros(8, 8)).unwrap();
        let hc = virtual_to_beamspace(&hv, &[basis.clone()], &[basis.clone(), basis]).unwrap();
        assert_eq!(hc.n_r(), 6);
        assert_eq!(hc.n_t(), 3);
        assert!(hc.h_c().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn channel_file_round_trip() {
        let ch = sample_channel(5, 3, 2, 1e-3).unwrap();
        let back = BeamspaceChannel::from_json(&ch.to_json().unwrap()).unwrap();
        assert_eq!(ch, back);
    }
}
