//! Antenna-coder codebooks: K-means training over optimized coders and
//! block-coordinate deployment on new channels.

use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::channel::{BeamspaceChannel, CoderMatrix};
use crate::dcc::{self, DccConfig, ScaConfig};
use crate::rfc::{self, AbfConfig, RfcConfig};
use crate::search::{bits_to_string, sebo_maximize, SeboConfig};
use crate::system::{self, SystemModel};
use crate::{rectenna, rng, CMatrix, CVector, Error, Result};

/// Optimized coders collected from training channels, one entry per antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct CoderPool {
    pub q: usize,
    pub entries: Vec<Vec<bool>>,
    /// Optimizer objective reached on each training channel.
    pub objectives: Vec<f64>,
}

impl CoderPool {
    pub fn new(q: usize, entries: Vec<Vec<bool>>) -> Result<Self> {
        if let Some(bad) = entries.iter().position(|e| e.len() != q) {
            return Err(Error::DimensionMismatch(format!(
                "pool entry {bad} has {} bits, expected {q}",
                entries[bad].len()
            )));
        }
        Ok(Self {
            q,
            entries,
            objectives: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn distinct(&self) -> usize {
        let mut e = self.entries.clone();
        e.sort();
        e.dedup();
        e.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    q: usize,
    codewords: Vec<Vec<bool>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CodebookFile {
    q: usize,
    d: usize,
    codewords: Vec<String>,
}

impl Codebook {
    pub fn new(q: usize, codewords: Vec<Vec<bool>>) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::EmptyCodebook);
        }
        if let Some(bad) = codewords.iter().position(|c| c.len() != q) {
            return Err(Error::DimensionMismatch(format!(
                "codeword {bad} has {} bits, expected {q}",
                codewords[bad].len()
            )));
        }
        Ok(Self { q, codewords })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn d(&self) -> usize {
        self.codewords.len()
    }

    pub fn codewords(&self) -> &[Vec<bool>] {
        &self.codewords
    }

    /// First `d` codewords.
    pub fn prefix(&self, d: usize) -> Result<Self> {
        Self::new(self.q, self.codewords.iter().take(d).cloned().collect())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CodebookFile {
            q: self.q,
            d: self.d(),
            codewords: self.codewords.iter().map(|c| bits_to_string(c)).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CodebookFile = serde_json::from_str(text)?;
        if file.d != file.codewords.len() {
            return Err(Error::InvalidCoder(format!(
                "codebook declares d = {} but lists {} codewords",
                file.d,
                file.codewords.len()
            )));
        }
        let codewords = file
            .codewords
            .iter()
            .map(|s| {
                s.chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(Error::InvalidCoder(format!("bad bit character {other:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.q, codewords)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Nearest-codeword labels; row `l` of the assignment matrix has its single
/// one in column `labels[l]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub labels: Vec<usize>,
    pub d: usize,
}

impl Assignment {
    pub fn matrix(&self) -> Vec<Vec<bool>> {
        self.labels
            .iter()
            .map(|&l| (0..self.d).map(|d| d == l).collect())
            .collect()
    }

    pub fn cluster(&self, d: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == d)
            .map(|(i, _)| i)
    }
}

/// Euclidean distance between bit vectors, i.e. the square root of the Hamming distance.
pub fn distance(a: &[bool], b: &[bool]) -> f64 {
    (a.iter().zip(b).filter(|(x, y)| x != y).count() as f64).sqrt()
}

pub fn assign_coders(pool: &CoderPool, cb: &Codebook) -> Assignment {
    let labels = pool
        .entries
        .iter()
        .map(|e| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (d, c) in cb.codewords.iter().enumerate() {
                let v = distance(e, c);
                if v < best_d {
                    best_d = v;
                    best = d;
                }
            }
            best
        })
        .collect();
    Assignment { labels, d: cb.d() }
}

pub fn distortion(pool: &CoderPool, cb: &Codebook, asg: &Assignment) -> f64 {
    pool.entries
        .iter()
        .zip(&asg.labels)
        .map(|(e, &l)| distance(e, &cb.codewords[l]))
        .sum()
}

/// Replaces each codeword by the bit vector minimizing the summed distance to
/// its cluster, searched by SEBO from the current codeword. An empty cluster
/// takes the pool entry farthest from its assigned codeword.
pub fn update_centers(pool: &CoderPool, asg: &Assignment, cb: &Codebook, cfg: &SeboConfig) -> Result<Codebook> {
    let mut next = cb.codewords.clone();
    let mut taken: Vec<usize> = Vec::new();
    for d in 0..cb.d() {
        let members: Vec<&Vec<bool>> = asg.cluster(d).map(|l| &pool.entries[l]).collect();
        if members.is_empty() {
            let far = (0..pool.len())
                .filter(|l| !taken.contains(l))
                .map(|l| (l, distance(&pool.entries[l], &cb.codewords[asg.labels[l]])))
                .fold(None::<(usize, f64)>, |b, c| match b {
                    Some(b) if b.1 >= c.1 => Some(b),
                    _ => Some(c),
                });
            if let Some((l, _)) = far {
                next[d] = pool.entries[l].clone();
                taken.push(l);
            }
            continue;
        }
        let objective = |c: &[bool]| -members.iter().map(|e| distance(e, c)).sum::<f64>();
        let res = sebo_maximize(objective, cb.q, &cb.codewords[d], &cfg.with_seed(rng::derive_seed(cfg.rng_seed, d as u64)))?;
        next[d] = res.bits;
    }
    Codebook::new(cb.q, next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub sebo: SeboConfig,
    /// Distortion change that ends training.
    pub tol: f64,
    pub k_max: usize,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            sebo: SeboConfig::default(),
            tol: 1e-9,
            k_max: 50,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub codebook: Codebook,
    /// Distortion after the initial assignment and after every later step.
    pub distortions: Vec<f64>,
    pub iterations: usize,
    /// Codewords equal to an earlier codeword.
    pub duplicates: usize,
}

/// Farthest-point seeding from a random first entry; repeats pool entries
/// only once every distinct entry is used.
fn initial_codebook(pool: &CoderPool, d: usize, seed: u64) -> Result<Codebook> {
    let mut distinct = pool.entries.clone();
    distinct.sort();
    distinct.dedup();
    let mut r = rng::seeded(seed);
    let first = index::sample(&mut r, distinct.len(), 1).index(0);
    let mut chosen = vec![distinct[first].clone()];
    while chosen.len() < d {
        let (idx, _) = distinct
            .iter()
            .enumerate()
            .map(|(i, e)| (i, chosen.iter().map(|c| distance(e, c)).fold(f64::INFINITY, f64::min)))
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        chosen.push(distinct[idx].clone());
    }
    Codebook::new(pool.q, chosen)
}

pub fn train_codebook(pool: &CoderPool, d: usize, cfg: &TrainConfig) -> Result<TrainingReport> {
    if d == 0 || pool.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    let mut cb = initial_codebook(pool, d, cfg.rng_seed)?;
    let mut asg = assign_coders(pool, &cb);
    let mut current = distortion(pool, &cb, &asg);
    let mut distortions = vec![current];
    let mut iterations = 0;
    while iterations < cfg.k_max {
        iterations += 1;
        let before = current;
        let sebo = cfg.sebo.with_seed(rng::derive_seed(cfg.rng_seed, iterations as u64));
        cb = update_centers(pool, &asg, &cb, &sebo)?;
        distortions.push(distortion(pool, &cb, &asg));
        asg = assign_coders(pool, &cb);
        current = distortion(pool, &cb, &asg);
        distortions.push(current);
        if (before - current).abs() <= cfg.tol {
            break;
        }
    }
    let duplicates = (0..cb.d())
        .filter(|&i| cb.codewords[..i].contains(&cb.codewords[i]))
        .count();
    Ok(TrainingReport {
        codebook: cb,
        distortions,
        iterations,
        duplicates,
    })
}

/// `D` distinct random codewords (or all of `{0,1}^Q` when `D >= 2^Q`).
pub fn random_codebook(q: usize, d: usize, seed: u64) -> Result<Codebook> {
    let space = 1usize.checked_shl(q as u32).unwrap_or(usize::MAX);
    let mut r = rng::seeded(seed);
    let words = index::sample(&mut r, space, d.min(space))
        .into_iter()
        .map(|v| (0..q).map(|t| (v >> (q - 1 - t)) & 1 == 1).collect())
        .collect();
    Codebook::new(q, words)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolScheme {
    DccOpt,
    RfcSvd,
}

/// Runs the scheme's binary optimizer from all-zero coders on every training
/// channel and collects the `M + N` optimized coders of each.
pub fn build_pool(
    model: &SystemModel,
    channels: &[BeamspaceChannel],
    scheme: PoolScheme,
    power: f64,
    dcc_cfg: &DccConfig,
    rfc_cfg: &RfcConfig,
) -> Result<CoderPool> {
    let q = model.q();
    let mut entries = Vec::new();
    let mut objectives = Vec::new();
    let dims = channels.first().map(|c| (c.n_r(), c.n_t()));
    for (i, ch) in channels.iter().enumerate() {
        if Some((ch.n_r(), ch.n_t())) != dims {
            return Err(Error::DimensionMismatch(format!("training channel {i} differs in shape")));
        }
        let (m, n) = model.antenna_counts(ch)?;
        let (bt0, br0) = system::zero_coders(m, n, q);
        let wrap = |e: Error| Error::RunFailed(format!("training channel {i}: {e}"));
        let (b_t, b_r, value) = match scheme {
            PoolScheme::DccOpt => {
                let mut c = dcc_cfg.clone();
                c.sebo.rng_seed = rng::derive_seed(dcc_cfg.sebo.rng_seed, i as u64);
                let out = dcc::optimize_dcc_binary(model, ch, power, &c, (&bt0, &br0)).map_err(wrap)?;
                (out.b_t, out.b_r, out.power)
            }
            PoolScheme::RfcSvd => {
                let mut c = rfc_cfg.clone();
                c.sebo.rng_seed = rng::derive_seed(rfc_cfg.sebo.rng_seed, i as u64);
                let out = rfc::optimize_rfc_binary(model, ch, power, &c, (&bt0, &br0)).map_err(wrap)?;
                (out.b_t, out.b_r, out.beamformers.gain)
            }
        };
        entries.extend(b_t.columns().iter().chain(b_r.columns()).map(|c| c.bits()));
        objectives.push(value);
    }
    let mut pool = CoderPool::new(q, entries)?;
    pool.objectives = objectives;
    Ok(pool)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeployScheme {
    /// DC combining, SCA beamforming per candidate.
    DccOpt,
    /// DC combining with `p_T = sqrt(2P) v_1`.
    DccSvd,
    /// RF combining with SVD beamformers.
    RfcSvd,
    /// RF combining with phase-only receive beamforming.
    RfcAbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeployConfig {
    pub max_sweeps: usize,
    /// Beamformer settings used to score each candidate.
    pub sca: ScaConfig,
    pub abf: AbfConfig,
}

impl Default for DeployConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 20,
            sca: ScaConfig {
                tol: 1e-10,
                max_iter: 10,
            },
            abf: AbfConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub b_t: CoderMatrix,
    pub b_r: CoderMatrix,
    /// Codeword index per antenna, transmit first.
    pub choice: Vec<usize>,
    pub p_t: CVector,
    /// Receive combiner for RF combining.
    pub p_r: Option<CVector>,
    /// Deployment objective: DC power for DC combining, channel gain for RF combining.
    pub objective: f64,
    pub power: f64,
    pub evaluations: u64,
    pub sweeps: usize,
    /// Objective after every per-antenna update.
    pub trace: Vec<f64>,
}

struct Scored {
    objective: f64,
    power: f64,
    p_t: CVector,
    p_r: Option<CVector>,
}

fn score(model: &SystemModel, h: &CMatrix, scheme: DeployScheme, power: f64, cfg: &DeployConfig) -> Result<Scored> {
    let params = model.rectenna();
    Ok(match scheme {
        DeployScheme::DccOpt => {
            let out = dcc::sca_transmit_beamforming(h, power, params, &cfg.sca, None)?;
            Scored {
                objective: out.objective,
                power: out.objective,
                p_t: out.p_t,
                p_r: None,
            }
        }
        DeployScheme::DccSvd => {
            let bf = rfc::svd_beamformers(h, power)?;
            let p = rectenna::power_dcc(h, &bf.p_t, params)?;
            Scored {
                objective: p,
                power: p,
                p_t: bf.p_t,
                p_r: None,
            }
        }
        DeployScheme::RfcSvd => {
            let bf = rfc::svd_beamformers(h, power)?;
            Scored {
                objective: bf.gain,
                power: rectenna::power_rfc_of_gain(bf.gain, params),
                p_t: bf.p_t,
                p_r: Some(bf.p_r),
            }
        }
        DeployScheme::RfcAbf => {
            let bf = rfc::abf_receive_beamforming(h, power, &cfg.abf, None)?.beamformers;
            Scored {
                objective: bf.gain,
                power: rectenna::power_rfc_of_gain(bf.gain, params),
                p_t: bf.p_t,
                p_r: Some(bf.p_r),
            }
        }
    })
}

/// Cyclic per-antenna codeword search. Every antenna starts at codeword 0;
/// each visit scores all `D` codewords with the other antennas fixed.
pub fn deploy_codebook(
    model: &SystemModel,
    ch: &BeamspaceChannel,
    cb: &Codebook,
    scheme: DeployScheme,
    power: f64,
    cfg: &DeployConfig,
) -> Result<Deployment> {
    if cb.d() == 0 {
        return Err(Error::EmptyCodebook);
    }
    if cb.q != model.q() {
        return Err(Error::DimensionMismatch(format!(
            "codebook has q = {}, antenna has {}",
            cb.q,
            model.q()
        )));
    }
    let (m, n) = model.antenna_counts(ch)?;
    let q = cb.q;
    let mut choice = vec![0usize; m + n];
    let bits_of = |choice: &[usize]| -> Vec<bool> {
        choice.iter().flat_map(|&c| cb.codewords[c].iter().copied()).collect()
    };
    let mut evaluations = 0u64;
    let mut trace = Vec::new();
    let mut best: Option<Scored> = None;
    let mut sweeps = 0;
    while sweeps < cfg.max_sweeps.max(1) {
        sweeps += 1;
        let mut changed = false;
        for a in 0..m + n {
            let mut trial = choice.clone();
            for d in 0..cb.d() {
                trial[a] = d;
                let h = model.channel_for_bits(ch, &bits_of(&trial))?;
                let s = score(model, &h, scheme, power, cfg)?;
                evaluations += 1;
                // Re-scoring the current codeword reproduces the incumbent,
                // so only a strict improvement moves the antenna.
                if best.as_ref().is_none_or(|b| s.objective > b.objective) {
                    changed |= best.is_some();
                    choice[a] = d;
                    best = Some(s);
                }
            }
            trace.push(best.as_ref().map_or(0.0, |b| b.objective));
        }
        if !changed {
            break;
        }
    }
    let best = best.expect("at least one evaluation");
    let all = bits_of(&choice);
    let (b_t, b_r) = system::split_bits(&all, m, q);
    Ok(Deployment {
        b_t,
        b_r,
        choice,
        p_t: best.p_t,
        p_r: best.p_r,
        objective: best.objective,
        power: best.power,
        evaluations,
        sweeps,
        trace,
    })
}
