//! One antenna design, its pattern basis and the rectenna, bundled so that
//! optimizers can score coders against a channel.
//!
//! Joint coder vectors list the transmit antennas first and then the receive
//! antennas, `Q` entries per antenna: `[b_T,1 .. b_T,M, b_R,1 .. b_R,N]`.

use crate::antenna::{
    self, AntennaCoder, AntennaConfig, CodingMode, MultiportNetwork, PatternBasis, Side,
};
use crate::channel::{self, BeamspaceChannel, CoderMatrix};
use crate::rectenna::{self, RectennaParams};
use crate::{CMatrix, CVector, Error, Result};

/// Largest `Q` for which every binary pattern coder is precomputed.
pub const MAX_TABLE_BITS: usize = 12;

#[derive(Debug, Clone)]
pub struct SystemModel {
    antenna: MultiportNetwork,
    basis: PatternBasis,
    cfg: AntennaConfig,
    rectenna: RectennaParams,
    tables: Option<[Vec<Option<CVector>>; 2]>,
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Transmit => 0,
        Side::Receive => 1,
    }
}

fn mask_of(bits: &[bool]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (t, &b)| acc | (usize::from(b) << t))
}

impl SystemModel {
    pub fn new(antenna: MultiportNetwork, cfg: AntennaConfig, rectenna: RectennaParams) -> Result<Self> {
        cfg.validate()?;
        rectenna.validate()?;
        let basis = antenna::compute_basis(&antenna, &cfg)?;
        let mut model = Self {
            antenna,
            basis,
            cfg,
            rectenna,
            tables: None,
        };
        let q = model.q();
        if q <= MAX_TABLE_BITS {
            let build = |side| {
                (0..1usize << q)
                    .map(|mask| {
                        let bits: Vec<bool> = (0..q).map(|t| (mask >> t) & 1 == 1).collect();
                        model.compute_binary(&bits, side).ok()
                    })
                    .collect::<Vec<_>>()
            };
            model.tables = Some([build(Side::Transmit), build(Side::Receive)]);
        }
        Ok(model)
    }

    pub fn antenna(&self) -> &MultiportNetwork {
        &self.antenna
    }

    pub fn basis(&self) -> &PatternBasis {
        &self.basis
    }

    pub fn antenna_config(&self) -> &AntennaConfig {
        &self.cfg
    }

    pub fn rectenna(&self) -> &RectennaParams {
        &self.rectenna
    }

    pub fn q(&self) -> usize {
        self.antenna.q()
    }

    pub fn n_eff(&self) -> usize {
        self.basis.n_eff()
    }

    fn compute_binary(&self, bits: &[bool], side: Side) -> Result<CVector> {
        antenna::pattern_coder(&self.basis, &self.antenna, &AntennaCoder::binary(bits), &self.cfg, side)
    }

    /// Pattern coder of one antenna under a binary coder.
    pub fn coder_for_bits(&self, bits: &[bool], side: Side) -> Result<CVector> {
        if bits.len() != self.q() {
            return Err(Error::DimensionMismatch(format!(
                "{} bits for an antenna with {} pixel ports",
                bits.len(),
                self.q()
            )));
        }
        match &self.tables {
            Some(t) => match &t[side_index(side)][mask_of(bits)] {
                Some(w) => Ok(w.clone()),
                None => self.compute_binary(bits, side),
            },
            None => self.compute_binary(bits, side),
        }
    }

    /// Pattern coder of one antenna under explicit pixel reactances.
    pub fn coder_for_reactances(&self, x: &[f64], side: Side) -> Result<CVector> {
        antenna::pattern_coder_from_reactances(&self.basis, &self.antenna, x, &self.cfg, side)
    }

    fn check_channel(&self, ch: &BeamspaceChannel, m: usize, n: usize) -> Result<()> {
        let ne = self.n_eff();
        if ch.n_t() != m * ne || ch.n_r() != n * ne {
            return Err(Error::DimensionMismatch(format!(
                "H_C is {}x{}, coders imply {}x{}",
                ch.n_r(),
                ch.n_t(),
                n * ne,
                m * ne
            )));
        }
        Ok(())
    }

    /// Number of transmit and receive antennas for a channel.
    pub fn antenna_counts(&self, ch: &BeamspaceChannel) -> Result<(usize, usize)> {
        let ne = self.n_eff();
        if !ch.n_t().is_multiple_of(ne) || !ch.n_r().is_multiple_of(ne) {
            return Err(Error::DimensionMismatch(format!(
                "H_C is {}x{}, not a multiple of N_eff = {ne}",
                ch.n_r(),
                ch.n_t()
            )));
        }
        Ok((ch.n_t() / ne, ch.n_r() / ne))
    }

    /// Effective `N x M` channel for a joint bit vector of `(M + N) Q` bits.
    pub fn channel_for_bits(&self, ch: &BeamspaceChannel, bits: &[bool]) -> Result<CMatrix> {
        let (m, n) = self.antenna_counts(ch)?;
        let q = self.q();
        if bits.len() != (m + n) * q {
            return Err(Error::DimensionMismatch(format!(
                "{} bits for {} antennas of {q} pixels",
                bits.len(),
                m + n
            )));
        }
        if let Some(tables) = &self.tables {
            let lookup = |a: usize, side: Side| -> Result<&CVector> {
                match &tables[side_index(side)][mask_of(&bits[a * q..(a + 1) * q])] {
                    Some(w) => Ok(w),
                    None => Err(tag_antenna(
                        self.compute_binary(&bits[a * q..(a + 1) * q], side)
                            .err()
                            .unwrap_or(Error::DegenerateRadiator { antenna: None }),
                        a,
                    )),
                }
            };
            let w_t = (0..m).map(|a| lookup(a, Side::Transmit)).collect::<Result<Vec<_>>>()?;
            let w_r = (m..m + n).map(|a| lookup(a, Side::Receive)).collect::<Result<Vec<_>>>()?;
            return Ok(channel::effective_channel_blocks(ch.h_c(), &w_t, &w_r));
        }
        let coders = |range: std::ops::Range<usize>, side| {
            range
                .map(|a| {
                    self.compute_binary(&bits[a * q..(a + 1) * q], side)
                        .map_err(|e| tag_antenna(e, a))
                })
                .collect::<Result<Vec<_>>>()
        };
        let w_t = coders(0..m, Side::Transmit)?;
        let w_r = coders(m..m + n, Side::Receive)?;
        Ok(channel::effective_channel_blocks(ch.h_c(), &w_t, &w_r))
    }

    /// Effective channel for coder matrices of either mode.
    pub fn channel_for_coders(
        &self,
        ch: &BeamspaceChannel,
        b_t: &CoderMatrix,
        b_r: &CoderMatrix,
    ) -> Result<CMatrix> {
        self.check_channel(ch, b_t.count(), b_r.count())?;
        let w_t = channel::assemble_pattern_coders(b_t, &self.antenna, &self.basis, &self.cfg, Side::Transmit)?;
        let w_r = channel::assemble_pattern_coders(b_r, &self.antenna, &self.basis, &self.cfg, Side::Receive)?;
        channel::effective_channel(ch, &w_t, &w_r)
    }

    /// DC-combining output power for given coders and transmit beamformer.
    pub fn power_dcc_of_coders(
        &self,
        b_t: &CoderMatrix,
        b_r: &CoderMatrix,
        ch: &BeamspaceChannel,
        p_t: &CVector,
    ) -> Result<f64> {
        let h = self.channel_for_coders(ch, b_t, b_r)?;
        rectenna::power_dcc(&h, p_t, &self.rectenna)
    }
}

/// Attach an antenna index to an error raised for one antenna's coder.
pub(crate) fn tag_antenna(e: Error, index: usize) -> Error {
    match e {
        Error::DegenerateRadiator { .. } => Error::DegenerateRadiator { antenna: Some(index) },
        other => other,
    }
}

/// Splits a joint bit vector into transmit and receive coder matrices.
pub fn split_bits(bits: &[bool], m: usize, q: usize) -> (CoderMatrix, CoderMatrix) {
    (
        CoderMatrix::from_bits(&bits[..m * q], q),
        CoderMatrix::from_bits(&bits[m * q..], q),
    )
}

/// Joint bit vector of a coder pair.
pub fn join_bits(b_t: &CoderMatrix, b_r: &CoderMatrix) -> Vec<bool> {
    let mut bits = b_t.bits();
    bits.extend(b_r.bits());
    bits
}

/// Per-antenna reactance vectors, transmit first.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactanceMatrix {
    pub x_t: Vec<Vec<f64>>,
    pub x_r: Vec<Vec<f64>>,
}

impl ReactanceMatrix {
    pub fn from_coders(b_t: &CoderMatrix, b_r: &CoderMatrix, cfg: &AntennaConfig) -> Self {
        let map = |c: &CoderMatrix| c.columns().iter().map(|a| a.reactances(cfg)).collect();
        Self {
            x_t: map(b_t),
            x_r: map(b_r),
        }
    }

    pub fn from_stacked(x: &[f64], m: usize, q: usize) -> Self {
        let chunks: Vec<Vec<f64>> = x.chunks(q).map(<[f64]>::to_vec).collect();
        Self {
            x_t: chunks[..m].to_vec(),
            x_r: chunks[m..].to_vec(),
        }
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.x_t.iter().chain(&self.x_r).flatten().copied().collect()
    }

    /// Normalized coders `clamp(|x| / x_oc, 0, 1)` for reporting.
    pub fn coders(&self, cfg: &AntennaConfig) -> (CoderMatrix, CoderMatrix) {
        let map = |xs: &[Vec<f64>]| {
            let cols = xs.iter().map(|x| AntennaCoder::from_reactances(x, cfg)).collect();
            CoderMatrix::new(cols).expect("reactance columns share length and mode")
        };
        (map(&self.x_t), map(&self.x_r))
    }
}

/// Effective channel from stacked reactances, recomputing only the antennas
/// whose reactances changed since the previous call.
#[derive(Debug, Clone)]
pub struct ReactanceCache {
    m: usize,
    n: usize,
    keys: Vec<Vec<f64>>,
    coders: Vec<CVector>,
}

impl ReactanceCache {
    pub fn new(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            keys: vec![Vec::new(); m + n],
            coders: vec![CVector::zeros(0); m + n],
        }
    }

    pub fn channel(&mut self, model: &SystemModel, ch: &BeamspaceChannel, x: &[f64]) -> Result<CMatrix> {
        let q = model.q();
        if x.len() != (self.m + self.n) * q {
            return Err(Error::DimensionMismatch(format!(
                "{} reactances for {} antennas of {q} pixels",
                x.len(),
                self.m + self.n
            )));
        }
        for a in 0..self.m + self.n {
            let xa = &x[a * q..(a + 1) * q];
            if self.keys[a] != xa {
                let side = if a < self.m { Side::Transmit } else { Side::Receive };
                self.coders[a] = model
                    .coder_for_reactances(xa, side)
                    .map_err(|e| tag_antenna(e, a))?;
                self.keys[a] = xa.to_vec();
            }
        }
        Ok(channel::effective_channel_blocks(
            ch.h_c(),
            &self.coders[..self.m],
            &self.coders[self.m..],
        ))
    }
}

/// Fixed-configuration coders: the same coder on every antenna.
pub fn uniform_coders(m: usize, n: usize, coder: &AntennaCoder) -> (CoderMatrix, CoderMatrix) {
    let build = |count| CoderMatrix::new(vec![coder.clone(); count]).expect("identical columns");
    (build(m), build(n))
}

/// All-zero binary coders for `m` transmit and `n` receive antennas.
pub fn zero_coders(m: usize, n: usize, q: usize) -> (CoderMatrix, CoderMatrix) {
    uniform_coders(m, n, &AntennaCoder::zeros(q, CodingMode::Binary))
}

/// Shared slot for the first error raised inside an objective closure that
/// must return a plain float.
#[derive(Debug, Default)]
pub(crate) struct ErrorSlot(Option<Error>);

impl ErrorSlot {
    pub(crate) fn value(&mut self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                if self.0.is_none() {
                    self.0 = Some(e);
                }
                f64::NAN
            }
        }
    }

    /// Prefers the recorded root cause over the optimizer's non-finite report.
    pub(crate) fn resolve<T>(&mut self, r: Result<T>) -> Result<T> {
        match (r, self.0.take()) {
            (Err(Error::ObjectiveNonFinite { .. }), Some(e)) => Err(e),
            (r, _) => r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_channel;
    use crate::Complex64;

    fn model(q: usize) -> SystemModel {
        let cfg = AntennaConfig::default();
        let net = antenna::synthesize_antenna(3, q, 8, 3, &cfg).unwrap();
        SystemModel::new(net, cfg, RectennaParams::default()).unwrap()
    }

    #[test]
    fn table_matches_direct_computation() {
        let m = model(6);
        let bits = [true, false, false, true, true, false];
        for side in [Side::Transmit, Side::Receive] {
            let a = m.coder_for_bits(&bits, side).unwrap();
            let b = m.compute_binary(&bits, side).unwrap();
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn bit_and_coder_paths_agree() {
        let m = model(5);
        let ch = sample_channel(1, 2 * 3, 3 * 3, 1.0).unwrap();
        let bits: Vec<bool> = (0..25usize).map(|i| i.is_multiple_of(3)).collect();
        let (bt, br) = split_bits(&bits, 3, 5);
        let a = m.channel_for_bits(&ch, &bits).unwrap();
        let b = m.channel_for_coders(&ch, &bt, &br).unwrap();
        assert!((a - b).norm() < 1e-12);
        assert_eq!(join_bits(&bt, &br), bits);
    }

    #[test]
    fn reactance_cache_tracks_changes() {
        let m = model(4);
        let ch = sample_channel(2, 3, 6, 1.0).unwrap();
        let mut cache = ReactanceCache::new(2, 1);
        let mut x = vec![0.0; 12];
        let h0 = cache.channel(&m, &ch, &x).unwrap();
        x[5] = 17.0;
        let h1 = cache.channel(&m, &ch, &x).unwrap();
        let fresh = ReactanceCache::new(2, 1).channel(&m, &ch, &x).unwrap();
        assert!((&h1 - fresh).norm() < 1e-15);
        // Only transmit antenna 1 changed, so only column 1 moves.
        assert!((h0.column(0) - h1.column(0)).norm() == 0.0);
        assert!((h0.column(1) - h1.column(1)).norm() > 0.0);
    }

    #[test]
    fn zero_beamformer_gives_zero_power() {
        let m = model(4);
        let ch = sample_channel(5, 3, 3, 1.0).unwrap();
        let (bt, br) = zero_coders(1, 1, 4);
        let p = CVector::from_element(1, Complex64::new(0.0, 0.0));
        assert_eq!(m.power_dcc_of_coders(&bt, &br, &ch, &p).unwrap(), 0.0);
    }

    #[test]
    fn wrong_channel_shape_is_rejected() {
        let m = model(4);
        let ch = sample_channel(5, 4, 3, 1.0).unwrap();
        assert!(m.channel_for_bits(&ch, &[false; 8]).is_err());
    }
}
