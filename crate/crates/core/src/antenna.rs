//! Pixel antenna as a (Q+1)-port network.
//!
//! Port 0 is the antenna port, ports 1..=Q are pixel ports terminated by
//! switches or variable reactances. An antenna coder `b` selects the load on
//! every pixel port; the loaded network fixes the port currents, and the
//! currents projected onto the dominant right singular vectors of the
//! open-circuit pattern matrix give the unit-norm pattern coder.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, sorted_svd};
use crate::{rng, CMatrix, CVector, Error, Result};

/// Loaded pixel-port matrices above this condition number are rejected.
pub const MAX_CONDITION: f64 = 1e14;

const RECIPROCITY_TOL: f64 = 1e-9;
const PASSIVITY_TOL: f64 = 1e-9;

/// Impedance matrix and open-circuit patterns of one pixel antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiportNetwork {
    q: usize,
    k: usize,
    z: CMatrix,
    e_oc: CMatrix,
    z_pp: CMatrix,
    z_pa: CVector,
}

impl MultiportNetwork {
    /// Builds a network and checks every invariant, reporting the first one violated.
    pub fn new(z: CMatrix, e_oc: CMatrix) -> Result<Self> {
        let ports = z.nrows();
        if ports < 2 || z.ncols() != ports {
            return Err(Error::InvalidAntennaData(format!(
                "z must be square with at least 2 ports, got {}x{}",
                z.nrows(),
                z.ncols()
            )));
        }
        let q = ports - 1;
        if e_oc.ncols() != ports {
            return Err(Error::InvalidAntennaData(format!(
                "e_oc has {} columns, expected q + 1 = {ports}",
                e_oc.ncols()
            )));
        }
        if e_oc.nrows() == 0 || !e_oc.nrows().is_multiple_of(2) {
            return Err(Error::InvalidAntennaData(format!(
                "e_oc must have 2k rows, got {}",
                e_oc.nrows()
            )));
        }
        let k = e_oc.nrows() / 2;
        if !linalg::is_finite(&z) {
            return Err(Error::InvalidAntennaData("z contains NaN or Inf".into()));
        }
        if !linalg::is_finite(&e_oc) {
            return Err(Error::InvalidAntennaData("e_oc contains NaN or Inf".into()));
        }
        let scale = linalg::max_abs(&z).max(f64::MIN_POSITIVE);
        let asym = linalg::max_abs(&(&z - z.transpose()));
        if asym > RECIPROCITY_TOL * scale {
            return Err(Error::InvalidAntennaData(format!(
                "z is not reciprocal: max |z - z^T| = {asym:.3e}"
            )));
        }
        let re: DMatrix<f64> = z.map(|c| c.re);
        let re_sym = (&re + re.transpose()) * 0.5;
        let min_eig = re_sym.symmetric_eigenvalues().min();
        if min_eig < -PASSIVITY_TOL * scale {
            return Err(Error::InvalidAntennaData(format!(
                "Re(z) is not positive semidefinite: smallest eigenvalue {min_eig:.3e}"
            )));
        }
        let z_pp = z.view((1, 1), (q, q)).into_owned();
        let z_pa = z.view((1, 0), (q, 1)).column(0).into_owned();
        Ok(Self {
            q,
            k,
            z,
            e_oc,
            z_pp,
            z_pa,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn z(&self) -> &CMatrix {
        &self.z
    }

    pub fn e_oc(&self) -> &CMatrix {
        &self.e_oc
    }

    pub fn z_aa(&self) -> Complex64 {
        self.z[(0, 0)]
    }

    pub fn z_pa(&self) -> &CVector {
        &self.z_pa
    }

    pub fn z_pp(&self) -> &CMatrix {
        &self.z_pp
    }

    pub fn to_file(&self) -> AntennaFile {
        let (zr, zi) = split_row_major(&self.z);
        let (er, ei) = split_row_major(&self.e_oc);
        AntennaFile {
            q: self.q,
            k: self.k,
            z_real: zr,
            z_imag: zi,
            eoc_real: er,
            eoc_imag: ei,
        }
    }

    pub fn from_file(file: &AntennaFile) -> Result<Self> {
        let ports = file.q + 1;
        let rows = 2 * file.k;
        for (name, len, want) in [
            ("z_real", file.z_real.len(), ports * ports),
            ("z_imag", file.z_imag.len(), ports * ports),
            ("eoc_real", file.eoc_real.len(), rows * ports),
            ("eoc_imag", file.eoc_imag.len(), rows * ports),
        ] {
            if len != want {
                return Err(Error::InvalidAntennaData(format!(
                    "`{name}` has {len} entries, expected {want}"
                )));
            }
        }
        let z = join_row_major(ports, ports, &file.z_real, &file.z_imag);
        let e_oc = join_row_major(rows, ports, &file.eoc_real, &file.eoc_imag);
        Self::new(z, e_oc)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: AntennaFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }
}

/// On-disk antenna description. Matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaFile {
    pub q: usize,
    pub k: usize,
    pub z_real: Vec<f64>,
    pub z_imag: Vec<f64>,
    pub eoc_real: Vec<f64>,
    pub eoc_imag: Vec<f64>,
}

pub(crate) fn split_row_major(m: &CMatrix) -> (Vec<f64>, Vec<f64>) {
    let mut re = Vec::with_capacity(m.len());
    let mut im = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            re.push(m[(r, c)].re);
            im.push(m[(r, c)].im);
        }
    }
    (re, im)
}

pub(crate) fn join_row_major(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> CMatrix {
    CMatrix::from_fn(rows, cols, |r, c| {
        Complex64::new(re[r * cols + c], im[r * cols + c])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodingMode {
    Binary,
    Continuous,
}

/// Per-pixel-port control values.
///
/// Binary coders hold exact 0/1 switch states (0 = switch on, short circuit);
/// continuous coders hold normalized reactances in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaCoder {
    b: Vec<f64>,
    mode: CodingMode,
}

impl AntennaCoder {
    pub fn new(b: Vec<f64>, mode: CodingMode) -> Result<Self> {
        for (i, &v) in b.iter().enumerate() {
            let ok = match mode {
                CodingMode::Binary => v == 0.0 || v == 1.0,
                CodingMode::Continuous => (0.0..=1.0).contains(&v),
            };
            if !ok {
                return Err(Error::InvalidCoder(format!(
                    "entry {i} = {v} is outside the {mode:?} domain"
                )));
            }
        }
        Ok(Self { b, mode })
    }

    pub fn binary(bits: &[bool]) -> Self {
        Self {
            b: bits.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect(),
            mode: CodingMode::Binary,
        }
    }

    pub fn zeros(q: usize, mode: CodingMode) -> Self {
        Self {
            b: vec![0.0; q],
            mode,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.b
    }

    pub fn mode(&self) -> CodingMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Bit view of a binary coder; continuous entries are thresholded at 1/2.
    pub fn bits(&self) -> Vec<bool> {
        self.b.iter().map(|&v| v >= 0.5).collect()
    }

    /// Load reactances `x_oc * b_q` in ohms.
    pub fn reactances(&self, cfg: &AntennaConfig) -> Vec<f64> {
        self.b.iter().map(|&v| cfg.x_oc * v).collect()
    }

    /// Reports a raw reactance vector as a coder, `b = clamp(|x| / x_oc, 0, 1)`.
    pub fn from_reactances(x: &[f64], cfg: &AntennaConfig) -> Self {
        Self {
            b: x
                .iter()
                .map(|v| (v.abs() / cfg.x_oc).clamp(0.0, 1.0))
                .collect(),
            mode: CodingMode::Continuous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AntennaConfig {
    /// Reactance standing in for an open circuit, ohms.
    pub x_oc: f64,
    /// Share of radiated power the pattern basis must capture.
    pub power_fraction: f64,
    /// Antenna-port excitation current `i_A`.
    #[serde(skip)]
    pub unit_excitation: Complex64,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        Self {
            x_oc: 1e9,
            power_fraction: 0.998,
            unit_excitation: Complex64::new(1.0, 0.0),
        }
    }
}

impl AntennaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_oc > 0.0 && self.x_oc.is_finite()) {
            return Err(Error::config("antenna.x_oc", "must be positive and finite"));
        }
        if !(self.power_fraction > 0.9 && self.power_fraction < 1.0) {
            return Err(Error::config("antenna.power_fraction", "must lie in (0.9, 1)"));
        }
        Ok(())
    }
}

/// Diagonal load matrix `diag(j x_oc b_q)`.
pub fn load_impedance(coder: &AntennaCoder, cfg: &AntennaConfig) -> CMatrix {
    let d = CVector::from_iterator(
        coder.len(),
        coder.values().iter().map(|&b| Complex64::new(0.0, cfg.x_oc * b)),
    );
    CMatrix::from_diagonal(&d)
}

/// All port currents `[i_A; i_P]` for pixel loads `j x_q`.
pub fn loaded_currents(
    net: &MultiportNetwork,
    reactances: &[f64],
    cfg: &AntennaConfig,
) -> Result<CVector> {
    let q = net.q;
    if reactances.len() != q {
        return Err(Error::DimensionMismatch(format!(
            "{} reactances for {q} pixel ports",
            reactances.len()
        )));
    }
    let mut a = net.z_pp.clone();
    for (i, &x) in reactances.iter().enumerate() {
        a[(i, i)] += Complex64::new(0.0, x);
    }
    let norm_a = linalg::norm1(&a);
    let lu = a.lu();
    let inv = lu.try_inverse().ok_or(Error::SingularLoadedNetwork {
        condition: f64::INFINITY,
    })?;
    let condition = norm_a * linalg::norm1(&inv);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularLoadedNetwork { condition });
    }
    let rhs = -(&net.z_pa * cfg.unit_excitation);
    let i_p = lu.solve(&rhs).ok_or(Error::SingularLoadedNetwork { condition })?;
    let mut i = CVector::zeros(q + 1);
    i[0] = cfg.unit_excitation;
    i.rows_mut(1, q).copy_from(&i_p);
    Ok(i)
}

/// Pixel-port currents `i_P = -(Z_PP + Z_L(b))^{-1} z_PA i_A`.
pub fn port_currents(
    net: &MultiportNetwork,
    coder: &AntennaCoder,
    cfg: &AntennaConfig,
) -> Result<CVector> {
    let i = loaded_currents(net, &coder.reactances(cfg), cfg)?;
    Ok(i.rows(1, net.q).into_owned())
}

/// Dominant SVD factors of the open-circuit pattern matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternBasis {
    u: CMatrix,
    s: DVector<f64>,
    v: CMatrix,
    s_vh: CMatrix,
    s_vt: CMatrix,
}

impl PatternBasis {
    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn s(&self) -> &DVector<f64> {
        &self.s
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    /// Effective aerial degrees of freedom.
    pub fn n_eff(&self) -> usize {
        self.s.len()
    }

    /// Number of angular samples times two polarizations.
    pub fn pattern_len(&self) -> usize {
        self.u.nrows()
    }

    fn from_factors(u: CMatrix, s: DVector<f64>, v: CMatrix) -> Self {
        let s_c = CMatrix::from_diagonal(&s.map(|x| Complex64::new(x, 0.0)));
        let s_vh = &s_c * v.adjoint();
        let s_vt = &s_c * v.transpose();
        Self {
            u,
            s,
            v,
            s_vh,
            s_vt,
        }
    }
}

/// Truncated SVD of `e_oc` keeping the fewest singular values whose energy
/// reaches `cfg.power_fraction` of the total.
pub fn compute_basis(net: &MultiportNetwork, cfg: &AntennaConfig) -> Result<PatternBasis> {
    let svd = sorted_svd(net.e_oc());
    let energy: Vec<f64> = svd.s.iter().map(|s| s * s).collect();
    let total: f64 = energy.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroPatternMatrix);
    }
    let target = cfg.power_fraction * total * (1.0 - 1e-12);
    let mut cum = 0.0;
    let mut n_eff = energy.len();
    for (i, e) in energy.iter().enumerate() {
        cum += e;
        if cum >= target {
            n_eff = i + 1;
            break;
        }
    }
    let u = svd.u.columns(0, n_eff).into_owned();
    let v = svd.v.columns(0, n_eff).into_owned();
    let s = svd.s.rows(0, n_eff).into_owned();
    Ok(PatternBasis::from_factors(u, s, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Transmit,
    Receive,
}

/// Pattern coder for explicit pixel reactances.
pub fn pattern_coder_from_reactances(
    basis: &PatternBasis,
    net: &MultiportNetwork,
    reactances: &[f64],
    cfg: &AntennaConfig,
    side: Side,
) -> Result<CVector> {
    if basis.v.nrows() != net.q + 1 {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} ports, antenna has {}",
            basis.v.nrows(),
            net.q + 1
        )));
    }
    let i = loaded_currents(net, reactances, cfg)?;
    let raw = match side {
        Side::Transmit => &basis.s_vh * &i,
        // Receive coders use V^T and conjugated currents.
        Side::Receive => &basis.s_vt * linalg::conj(&i),
    };
    let norm = raw.norm();
    if !(norm >= 1e-14) {
        return Err(Error::DegenerateRadiator { antenna: None });
    }
    Ok(raw / Complex64::new(norm, 0.0))
}

/// Unit-norm pattern coder `w` with `e(b) = U w` (transmit) for one antenna.
pub fn pattern_coder(
    basis: &PatternBasis,
    net: &MultiportNetwork,
    coder: &AntennaCoder,
    cfg: &AntennaConfig,
    side: Side,
) -> Result<CVector> {
    pattern_coder_from_reactances(basis, net, &coder.reactances(cfg), cfg, side)
}

/// Radiation pattern `U w` synthesized from the orthogonal basis.
pub fn radiation_pattern(basis: &PatternBasis, w: &CVector) -> Result<CVector> {
    if w.len() != basis.n_eff() {
        return Err(Error::DimensionMismatch(format!(
            "pattern coder of length {} for a basis of {} patterns",
            w.len(),
            basis.n_eff()
        )));
    }
    Ok(&basis.u * w)
}

/// Random antenna with the structure of measured pixel-antenna data.
///
/// `Re z` is a symmetric positive definite Gram matrix and `Im z` a symmetric
/// Gaussian matrix, so the network is reciprocal and passive. `e_oc` is built
/// from random orthonormal factors with `target_rank` dominant singular values
/// and a weak tail, so [`compute_basis`] recovers exactly `target_rank`
/// patterns under `cfg.power_fraction`.
pub fn synthesize_antenna(
    seed: u64,
    q: usize,
    k: usize,
    target_rank: usize,
    cfg: &AntennaConfig,
) -> Result<MultiportNetwork> {
    let ports = q + 1;
    let full_rank = (2 * k).min(ports);
    if q == 0 || k == 0 || target_rank == 0 || target_rank > full_rank {
        return Err(Error::InfeasibleRank {
            rank: target_rank,
            q,
            k,
        });
    }
    let mut rng = rng::seeded(seed);

    let r = linalg::real_gaussian(&mut rng, ports, ports);
    let g = linalg::real_gaussian(&mut rng, ports, ports);
    let resistance = r.transpose() * &r * (20.0 / ports as f64)
        + DMatrix::<f64>::identity(ports, ports) * 2.0;
    let reactance = (&g + g.transpose()) * 15.0;
    let mut z = CMatrix::from_fn(ports, ports, |i, j| {
        Complex64::new(resistance[(i, j)], reactance[(i, j)])
    });
    // Exact symmetry regardless of roundoff in the Gram product.
    for i in 0..ports {
        for j in (i + 1)..ports {
            z[(j, i)] = z[(i, j)];
        }
    }

    let u0 = linalg::random_orthonormal(&mut rng, 2 * k, full_rank);
    let v0 = linalg::random_orthonormal(&mut rng, ports, full_rank);
    let sigma = synthetic_spectrum(target_rank, full_rank, cfg.power_fraction);
    let s_c = CMatrix::from_diagonal(&CVector::from_iterator(
        full_rank,
        sigma.iter().map(|&s| Complex64::new(s, 0.0)),
    ));
    let e_oc = u0 * s_c * v0.adjoint();

    let net = MultiportNetwork::new(z, e_oc)?;
    if compute_basis(&net, cfg)?.n_eff() != target_rank {
        return Err(Error::InfeasibleRank {
            rank: target_rank,
            q,
            k,
        });
    }
    Ok(net)
}

/// Log-spaced dominant values on `[10^-0.5, 1]` and a geometric tail holding a
/// quarter of the energy the basis may discard.
fn synthetic_spectrum(rank: usize, full_rank: usize, power_fraction: f64) -> Vec<f64> {
    let mut sigma: Vec<f64> = (0..rank)
        .map(|i| {
            let t = if rank > 1 { i as f64 / (rank - 1) as f64 } else { 0.0 };
            10f64.powf(-0.5 * t)
        })
        .collect();
    let tail_len = full_rank - rank;
    if tail_len > 0 {
        let top: f64 = sigma.iter().map(|s| s * s).sum();
        let budget = 0.25 * (1.0 - power_fraction) / power_fraction * top;
        let weights: Vec<f64> = (0..tail_len).map(|i| 0.5f64.powi(i as i32)).collect();
        let wsum: f64 = weights.iter().sum();
        sigma.extend(weights.iter().map(|w| (budget * w / wsum).sqrt()));
    }
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn load_impedance_maps_coder_linearly() {
        let cfg = AntennaConfig::default();
        let coder = AntennaCoder::new(vec![0.0, 1.0, 0.5], CodingMode::Continuous).unwrap();
        let zl = load_impedance(&coder, &cfg);
        assert_eq!(zl[(0, 0)], c(0.0, 0.0));
        assert_eq!(zl[(1, 1)], c(0.0, 1e9));
        assert_eq!(zl[(2, 2)], c(0.0, 5e8));
        assert_eq!(zl[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn coder_domains_are_enforced() {
        assert!(AntennaCoder::new(vec![0.5], CodingMode::Binary).is_err());
        assert!(AntennaCoder::new(vec![1.5], CodingMode::Continuous).is_err());
        assert!(AntennaCoder::new(vec![0.0, 1.0], CodingMode::Binary).is_ok());
    }

    fn one_pixel(z_pp: Complex64, z_pa: Complex64) -> MultiportNetwork {
        let z = CMatrix::from_row_slice(2, 2, &[c(50.0, 0.0), z_pa, z_pa, z_pp]);
        let e = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        MultiportNetwork::new(z, e).unwrap()
    }

    #[test]
    fn open_circuit_kills_pixel_current() {
        let net = one_pixel(c(10.0, 5.0), c(0.0, 2.0));
        let i = port_currents(&net, &AntennaCoder::binary(&[true]), &AntennaConfig::default())
            .unwrap();
        assert!(i[0].norm() < 1e-7);
    }

    #[test]
    fn short_circuit_one_pixel_by_hand() {
        let net = one_pixel(c(10.0, 0.0), c(2.0, 0.0));
        let i = port_currents(&net, &AntennaCoder::binary(&[false]), &AntennaConfig::default())
            .unwrap();
        assert!((i[0] - c(-0.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_loaded_network_is_rejected() {
        // Purely reactive Z_PP cancelled exactly by the load.
        let z = CMatrix::from_row_slice(2, 2, &[c(50.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, -10.0)]);
        let e = CMatrix::identity(2, 2);
        let net = MultiportNetwork::new(z, e).unwrap();
        let err = loaded_currents(&net, &[10.0], &AntennaConfig::default()).unwrap_err();
        assert!(matches!(err, Error::SingularLoadedNetwork { .. }));
    }

    #[test]
    fn equal_energy_truncation() {
        // Singular values (1, 1, 1, 0).
        let mut e = CMatrix::zeros(4, 4);
        for i in 0..3 {
            e[(i, i)] = c(1.0, 0.0);
        }
        let z = CMatrix::identity(4, 4) * c(10.0, 0.0);
        let net = MultiportNetwork::new(z, e).unwrap();
        let basis = compute_basis(&net, &AntennaConfig::default()).unwrap();
        assert_eq!(basis.n_eff(), 3);
    }

    #[test]
    fn zero_pattern_matrix_is_rejected() {
        let z = CMatrix::identity(3, 3) * c(10.0, 0.0);
        let net = MultiportNetwork::new(z, CMatrix::zeros(4, 3)).unwrap();
        assert!(matches!(
            compute_basis(&net, &AntennaConfig::default()),
            Err(Error::ZeroPatternMatrix)
        ));
    }

    #[test]
    fn loader_reports_reciprocity_violation() {
        let mut z = CMatrix::identity(2, 2) * c(10.0, 0.0);
        z[(0, 1)] = c(1.0, 0.0);
        let err = MultiportNetwork::new(z, CMatrix::identity(2, 2)).unwrap_err();
        assert!(err.to_string().contains("reciprocal"), "{err}");
    }

    #[test]
    fn loader_reports_passivity_violation() {
        let z = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(5.0, 0.0), c(5.0, 0.0), c(1.0, 0.0)]);
        let err = MultiportNetwork::new(z, CMatrix::identity(2, 2)).unwrap_err();
        assert!(err.to_string().contains("semidefinite"), "{err}");
    }

    #[test]
    fn loader_reports_bad_lengths() {
        let net = synthesize_antenna(3, 4, 3, 2, &AntennaConfig::default()).unwrap();
        let mut file = net.to_file();
        file.eoc_imag.pop();
        let err = MultiportNetwork::from_file(&file).unwrap_err();
        assert!(err.to_string().contains("eoc_imag"), "{err}");
    }

    #[test]
    fn infeasible_rank() {
        let cfg = AntennaConfig::default();
        assert!(matches!(
            synthesize_antenna(1, 3, 8, 5, &cfg),
            Err(Error::InfeasibleRank { .. })
        ));
        assert!(matches!(
            synthesize_antenna(1, 3, 8, 0, &cfg),
            Err(Error::InfeasibleRank { .. })
        ));
    }

    #[test]
    fn single_pattern_basis_gives_unit_phase() {
        let cfg = AntennaConfig::default();
        let net = synthesize_antenna(5, 6, 4, 1, &cfg).unwrap();
        let basis = compute_basis(&net, &cfg).unwrap();
        assert_eq!(basis.n_eff(), 1);
        let w = pattern_coder(&basis, &net, &AntennaCoder::zeros(6, CodingMode::Binary), &cfg, Side::Transmit)
            .unwrap();
        assert!((w[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radiation_pattern_dimension_mismatch() {
        let cfg = AntennaConfig::default();
        let net = synthesize_antenna(5, 6, 4, 3, &cfg).unwrap();
        let basis = compute_basis(&net, &cfg).unwrap();
        assert!(radiation_pattern(&basis, &CVector::zeros(2)).is_err());
    }
}
