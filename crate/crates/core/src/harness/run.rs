use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Coding, ExperimentConfig, Scheme};
use crate::antenna::{synthesize_antenna, AntennaCoder, MultiportNetwork};
use crate::channel::{amplitude_scale_for_loss_db, sample_channel, BeamspaceChannel, CoderMatrix};
use crate::codebook::{self, Codebook, DeployScheme, PoolScheme, TrainConfig, TrainingReport};
use crate::dcc::{self, DccConfig};
use crate::rfc::{self, RfcConfig};
use crate::rng::{self, Purpose};
use crate::system::{self, ReactanceMatrix, SystemModel};
use crate::{rectenna, CVector, Error, Result};

pub const CSV_HEADER: &str = "trial,scheme,coding,power_watts,power_dbm,iterations,wall_ms";

/// A failure rate above this fraction fails the whole run.
pub const MAX_FAILURE_RATE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial_index: usize,
    pub scheme: Scheme,
    pub coding: Coding,
    pub power_watts: f64,
    pub power_dbm: f64,
    pub iterations_outer: usize,
    pub wall_time_ms: f64,
    /// Error message of a failed trial.
    pub failed: Option<String>,
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1000.0).log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean_watts: f64,
    /// `mean_watts` converted once; dBm values are never averaged.
    pub mean_dbm: f64,
    pub trials_ok: usize,
    pub trials_failed: usize,
}

impl Summary {
    pub fn of<'a>(results: impl IntoIterator<Item = &'a TrialResult>) -> Self {
        let (mut sum, mut ok, mut failed) = (0.0, 0usize, 0usize);
        for r in results {
            if r.failed.is_some() {
                failed += 1;
            } else {
                sum += r.power_watts;
                ok += 1;
            }
        }
        let mean_watts = if ok > 0 { sum / ok as f64 } else { f64::NAN };
        Self {
            mean_watts,
            mean_dbm: watts_to_dbm(mean_watts),
            trials_ok: ok,
            trials_failed: failed,
        }
    }

    fn footer(&self) -> String {
        format!(
            "mean_watts={:.9e},mean_dbm={:.4},trials_ok={},trials_failed={}",
            self.mean_watts, self.mean_dbm, self.trials_ok, self.trials_failed
        )
    }
}

fn push_row(out: &mut String, r: &TrialResult) {
    let _ = writeln!(
        out,
        "{},{},{},{:.9e},{:.4},{},{:.3}",
        r.trial_index,
        r.scheme.as_str(),
        r.coding.as_str(),
        r.power_watts,
        r.power_dbm,
        r.iterations_outer,
        r.wall_time_ms
    );
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub results: Vec<TrialResult>,
    pub summary: Summary,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.results {
            push_row(&mut out, r);
        }
        let _ = writeln!(out, "# {}", self.summary.footer());
        out
    }
}

/// Paired results of several codings on the same trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub codings: Vec<Coding>,
    /// Row `t` holds trial `t` under every coding, in `codings` order.
    pub results: Vec<Vec<TrialResult>>,
    pub summaries: Vec<Summary>,
}

impl CompareReport {
    pub fn column(&self, coding: Coding) -> Option<Vec<&TrialResult>> {
        let i = self.codings.iter().position(|&c| c == coding)?;
        Some(self.results.iter().map(|row| &row[i]).collect())
    }

    pub fn summary(&self, coding: Coding) -> Option<Summary> {
        let i = self.codings.iter().position(|&c| c == coding)?;
        Some(self.summaries[i])
    }

    /// `10 log10(mean(a) / mean(b))`.
    pub fn gain_db(&self, a: Coding, b: Coding) -> Option<f64> {
        Some(10.0 * (self.summary(a)?.mean_watts / self.summary(b)?.mean_watts).log10())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in self.results.iter().flatten() {
            push_row(&mut out, r);
        }
        for (c, s) in self.codings.iter().zip(&self.summaries) {
            let _ = writeln!(out, "# [{}] {}", c.as_str(), s.footer());
        }
        for (i, &a) in self.codings.iter().enumerate() {
            for &b in &self.codings[..i] {
                if let Some(g) = self.gain_db(a, b) {
                    let _ = writeln!(out, "# gain_db[{}/{}]={:.4}", a.as_str(), b.as_str(), g);
                }
            }
        }
        out
    }
}

/// The coder pair every fixed-configuration trial uses.
pub fn fixed_baseline(cfg: &ExperimentConfig) -> Result<(CoderMatrix, CoderMatrix)> {
    match &cfg.baseline_coder {
        None => Ok(system::zero_coders(cfg.m, cfg.n, cfg.q)),
        Some(s) => {
            if s.len() != cfg.q || !s.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::config(
                    "baseline_coder",
                    format!("must be a string of {} zeros and ones", cfg.q),
                ));
            }
            let bits: Vec<bool> = s.chars().map(|c| c == '1').collect();
            Ok(system::uniform_coders(cfg.m, cfg.n, &AntennaCoder::binary(&bits)))
        }
    }
}

/// The antenna described by `cfg`: read from `antenna_path` or synthesized.
pub fn load_antenna(cfg: &ExperimentConfig) -> Result<MultiportNetwork> {
    match &cfg.antenna_path {
        Some(p) => MultiportNetwork::from_json(&std::fs::read_to_string(p)?),
        None => synthesize_antenna(cfg.antenna_seed, cfg.q, cfg.k, cfg.target_rank, &cfg.antenna),
    }
}

/// One solved trial under one coding.
#[derive(Debug, Clone)]
struct Solved {
    power: f64,
    iterations: usize,
    b_t: CoderMatrix,
    b_r: CoderMatrix,
    p_t: CVector,
    p_r: Option<CVector>,
}

/// Validated configuration with the antenna model and codebook loaded.
pub struct Experiment {
    cfg: ExperimentConfig,
    model: SystemModel,
    codebook: Option<Codebook>,
    baseline: (CoderMatrix, CoderMatrix),
    power: f64,
    amplitude: f64,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let codebook = match (&cfg.codebook_path, cfg.coding) {
            (Some(p), Coding::Codebook) => Some(Codebook::load(p)?),
            _ => None,
        };
        Self::build(cfg, codebook)
    }

    /// Deploys `cb` instead of reading `codebook_path`.
    pub fn with_codebook_config(cfg: ExperimentConfig, cb: Codebook) -> Result<Self> {
        cfg.validate_fields()?;
        Self::build(cfg, Some(cb))
    }

    fn build(cfg: ExperimentConfig, codebook: Option<Codebook>) -> Result<Self> {
        let model = SystemModel::new(load_antenna(&cfg)?, cfg.antenna, cfg.rectenna)?;
        if model.q() != cfg.q {
            return Err(Error::config("q", format!("antenna file has q = {}", model.q())));
        }
        if let Some(cb) = &codebook {
            if cb.q() != cfg.q {
                return Err(Error::config("codebook_path", format!("codebook has q = {}", cb.q())));
            }
        }
        Ok(Self {
            baseline: fixed_baseline(&cfg)?,
            power: cfg.transmit_power_watts(),
            amplitude: amplitude_scale_for_loss_db(cfg.path_loss_db),
            cfg,
            model,
            codebook,
        })
    }

    /// Replaces the deployment codebook.
    pub fn with_codebook(mut self, cb: Codebook) -> Result<Self> {
        if cb.q() != self.cfg.q {
            return Err(Error::config("codebook_path", format!("codebook has q = {}", cb.q())));
        }
        self.codebook = Some(cb);
        Ok(self)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn transmit_power(&self) -> f64 {
        self.power
    }

    /// Seed of trial `t`.
    pub fn trial_seed(&self, t: usize) -> u64 {
        rng::derive_seed(self.cfg.master_seed, t as u64)
    }

    /// Beamspace channel of trial `t`, of shape `(N N_eff) x (M N_eff)`.
    pub fn trial_channel(&self, t: usize) -> Result<BeamspaceChannel> {
        self.channel_from_seed(rng::purpose_seed(self.trial_seed(t), Purpose::Channel))
    }

    fn channel_from_seed(&self, seed: u64) -> Result<BeamspaceChannel> {
        let ne = self.model.n_eff();
        sample_channel(seed, self.cfg.n * ne, self.cfg.m * ne, self.amplitude)
    }

    fn dcc_config(&self, seed: u64, max_outer: usize) -> DccConfig {
        DccConfig {
            sca: self.cfg.sca,
            sebo: self.cfg.sebo.with_seed(rng::purpose_seed(seed, Purpose::Sebo)),
            qn: self.cfg.qn.with_seed(rng::purpose_seed(seed, Purpose::QuasiNewton)),
            tol: self.cfg.outer_tol,
            max_outer,
            restart_every_outer: false,
        }
    }

    fn rfc_config(&self, seed: u64, max_outer: usize) -> RfcConfig {
        RfcConfig {
            sebo: self.cfg.sebo.with_seed(rng::purpose_seed(seed, Purpose::Sebo)),
            qn: self.cfg.qn.with_seed(rng::purpose_seed(seed, Purpose::QuasiNewton)),
            abf: self.cfg.abf,
            tol: self.cfg.outer_tol,
            max_outer,
            restart_every_outer: false,
        }
    }

    fn solve_fixed(&self, ch: &BeamspaceChannel) -> Result<Solved> {
        let (b_t, b_r) = self.baseline.clone();
        let h = self.model.channel_for_bits(ch, &system::join_bits(&b_t, &b_r))?;
        let params = self.model.rectenna();
        let (power, p_t, p_r) = match self.cfg.scheme {
            Scheme::DccOpt => {
                let out = dcc::sca_transmit_beamforming(&h, self.power, params, &self.cfg.sca, None)?;
                (out.objective, out.p_t, None)
            }
            Scheme::RfcSvd => {
                let bf = rfc::svd_beamformers(&h, self.power)?;
                (rectenna::power_rfc_of_gain(bf.gain, params), bf.p_t, Some(bf.p_r))
            }
            Scheme::RfcAbf => {
                let bf = rfc::abf_receive_beamforming(&h, self.power, &self.cfg.abf, None)?.beamformers;
                (rectenna::power_rfc_of_gain(bf.gain, params), bf.p_t, Some(bf.p_r))
            }
        };
        Ok(Solved {
            power,
            iterations: 0,
            b_t,
            b_r,
            p_t,
            p_r,
        })
    }

    fn solve_binary(&self, ch: &BeamspaceChannel, seed: u64, fixed: &Solved) -> Result<Solved> {
        let init = (&self.baseline.0, &self.baseline.1);
        let solved = match self.cfg.scheme {
            Scheme::DccOpt => {
                let out = dcc::optimize_dcc_binary(
                    &self.model,
                    ch,
                    self.power,
                    &self.dcc_config(seed, self.cfg.max_outer),
                    init,
                )?;
                Solved {
                    power: out.power,
                    iterations: out.outer_iterations,
                    b_t: out.b_t,
                    b_r: out.b_r,
                    p_t: out.p_t,
                    p_r: None,
                }
            }
            Scheme::RfcSvd | Scheme::RfcAbf => {
                let c = self.rfc_config(seed, self.cfg.max_outer);
                let out = if self.cfg.scheme == Scheme::RfcSvd {
                    rfc::optimize_rfc_binary(&self.model, ch, self.power, &c, init)?
                } else {
                    rfc::optimize_abf_binary(&self.model, ch, self.power, &c, init)?
                };
                Solved {
                    power: out.power,
                    iterations: out.outer_iterations,
                    b_t: out.b_t,
                    b_r: out.b_r,
                    p_t: out.beamformers.p_t,
                    p_r: Some(out.beamformers.p_r),
                }
            }
        };
        // The baseline is a feasible binary point, so the search never reports less.
        Ok(keep_better(solved, fixed))
    }

    fn solve_continuous(&self, ch: &BeamspaceChannel, seed: u64, binary: &Solved) -> Result<Solved> {
        let x0 = ReactanceMatrix::from_coders(&binary.b_t, &binary.b_r, self.model.antenna_config());
        let max_outer = self.cfg.continuous_max_outer;
        let solved = match self.cfg.scheme {
            Scheme::DccOpt => {
                let out = dcc::optimize_dcc_continuous(
                    &self.model,
                    ch,
                    self.power,
                    &self.dcc_config(seed, max_outer),
                    &x0,
                    Some(&binary.p_t),
                )?;
                Solved {
                    power: out.power,
                    iterations: out.outer_iterations,
                    b_t: out.b_t,
                    b_r: out.b_r,
                    p_t: out.p_t,
                    p_r: None,
                }
            }
            Scheme::RfcSvd | Scheme::RfcAbf => {
                let c = self.rfc_config(seed, max_outer);
                let out = if self.cfg.scheme == Scheme::RfcSvd {
                    rfc::optimize_rfc_continuous(&self.model, ch, self.power, &c, &x0)?
                } else {
                    rfc::optimize_abf_continuous(&self.model, ch, self.power, &c, &x0, binary.p_r.as_ref())?
                };
                Solved {
                    power: out.power,
                    iterations: out.outer_iterations,
                    b_t: out.b_t,
                    b_r: out.b_r,
                    p_t: out.beamformers.p_t,
                    p_r: Some(out.beamformers.p_r),
                }
            }
        };
        // The binary solution is one of the continuous starts.
        Ok(keep_better(solved, binary))
    }

    fn solve_codebook(&self, ch: &BeamspaceChannel) -> Result<Solved> {
        let cb = self
            .codebook
            .as_ref()
            .ok_or_else(|| Error::config("codebook_path", "required when coding = codebook"))?;
        let scheme = match self.cfg.scheme {
            Scheme::DccOpt => DeployScheme::DccOpt,
            Scheme::RfcSvd => DeployScheme::RfcSvd,
            Scheme::RfcAbf => DeployScheme::RfcAbf,
        };
        let out = codebook::deploy_codebook(&self.model, ch, cb, scheme, self.power, &self.cfg.deploy)?;
        Ok(Solved {
            power: out.power,
            iterations: out.sweeps,
            b_t: out.b_t,
            b_r: out.b_r,
            p_t: out.p_t,
            p_r: out.p_r,
        })
    }

    /// Trial `t` under every coding in `codings`. Binary and continuous share
    /// one fixed and one binary solve.
    pub fn run_trial(&self, t: usize, codings: &[Coding]) -> Vec<TrialResult> {
        let seed = self.trial_seed(t);
        let ch = self.trial_channel(t);
        let mut fixed: Option<Result<Solved, String>> = None;
        let mut binary: Option<Result<Solved, String>> = None;
        let mut out = Vec::with_capacity(codings.len());
        for &coding in codings {
            let start = Instant::now();
            let res: Result<Solved, String> = match &ch {
                Err(e) => Err(e.to_string()),
                Ok(ch) => {
                    let fixed = fixed
                        .get_or_insert_with(|| self.solve_fixed(ch).map_err(|e| e.to_string()))
                        .clone();
                    let mut binary_of = |fixed: &Solved| {
                        binary
                            .get_or_insert_with(|| self.solve_binary(ch, seed, fixed).map_err(|e| e.to_string()))
                            .clone()
                    };
                    match coding {
                        Coding::Fixed => fixed,
                        Coding::Binary => fixed.and_then(|f| binary_of(&f)),
                        Coding::Continuous => fixed
                            .and_then(|f| binary_of(&f))
                            .and_then(|b| self.solve_continuous(ch, seed, &b).map_err(|e| e.to_string())),
                        Coding::Codebook => self.solve_codebook(ch).map_err(|e| e.to_string()),
                    }
                }
            };
            let wall = if self.cfg.record_wall_time {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            out.push(match res {
                Ok(s) => TrialResult {
                    trial_index: t,
                    scheme: self.cfg.scheme,
                    coding,
                    power_watts: s.power,
                    power_dbm: watts_to_dbm(s.power),
                    iterations_outer: s.iterations,
                    wall_time_ms: wall,
                    failed: None,
                },
                Err(msg) => TrialResult {
                    trial_index: t,
                    scheme: self.cfg.scheme,
                    coding,
                    power_watts: f64::NAN,
                    power_dbm: f64::NAN,
                    iterations_outer: 0,
                    wall_time_ms: wall,
                    failed: Some(msg),
                },
            });
        }
        out
    }

    /// All trials under `codings`, ordered by trial index.
    pub fn run_trials(&self, codings: &[Coding]) -> Result<Vec<Vec<TrialResult>>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.workers)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?;
        let rows: Vec<Vec<TrialResult>> =
            pool.install(|| (0..self.cfg.trials).into_par_iter().map(|t| self.run_trial(t, codings)).collect());
        for (i, &c) in codings.iter().enumerate() {
            let failed: Vec<&TrialResult> = rows.iter().map(|r| &r[i]).filter(|r| r.failed.is_some()).collect();
            if failed.len() as f64 > MAX_FAILURE_RATE * self.cfg.trials as f64 {
                return Err(Error::RunFailed(format!(
                    "{} of {} {} trials failed; first: trial {}: {}",
                    failed.len(),
                    self.cfg.trials,
                    c.as_str(),
                    failed[0].trial_index,
                    failed[0].failed.as_deref().unwrap_or_default()
                )));
            }
        }
        Ok(rows)
    }

    pub fn run(&self) -> Result<ExperimentReport> {
        let results: Vec<TrialResult> = self.run_trials(&[self.cfg.coding])?.into_iter().flatten().collect();
        Ok(ExperimentReport {
            summary: Summary::of(&results),
            results,
        })
    }

    pub fn compare(&self, codings: &[Coding]) -> Result<CompareReport> {
        if codings.is_empty() {
            return Err(Error::config("codings", "must name at least one coding"));
        }
        let results = self.run_trials(codings)?;
        let summaries = (0..codings.len())
            .map(|i| Summary::of(results.iter().map(|row| &row[i])))
            .collect();
        Ok(CompareReport {
            codings: codings.to_vec(),
            results,
            summaries,
        })
    }

    /// Trains a `d`-word codebook on coders optimized over `pool_channels`
    /// training channels drawn independently of the trial channels.
    pub fn train_codebook(&self, pool_channels: usize, d: usize) -> Result<TrainingReport> {
        if pool_channels == 0 {
            return Err(Error::config("pool_channels", "must be >= 1"));
        }
        let master = rng::purpose_seed(self.cfg.master_seed, Purpose::TrainingChannels);
        let channels = (0..pool_channels)
            .map(|i| self.channel_from_seed(rng::derive_seed(master, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let scheme = match self.cfg.scheme {
            Scheme::DccOpt => PoolScheme::DccOpt,
            Scheme::RfcSvd | Scheme::RfcAbf => PoolScheme::RfcSvd,
        };
        let pool = codebook::build_pool(
            &self.model,
            &channels,
            scheme,
            self.power,
            &self.dcc_config(master, self.cfg.max_outer),
            &self.rfc_config(master, self.cfg.max_outer),
        )?;
        let train = TrainConfig {
            rng_seed: rng::purpose_seed(self.cfg.master_seed, Purpose::Codebook),
            ..self.cfg.train.clone()
        };
        codebook::train_codebook(&pool, d, &train)
    }
}

fn keep_better(solved: Solved, incumbent: &Solved) -> Solved {
    if incumbent.power > solved.power {
        Solved {
            iterations: solved.iterations,
            ..incumbent.clone()
        }
    } else {
        solved
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    Experiment::new(cfg.clone())?.run()
}

/// Paired run of several codings on shared trial seeds.
pub fn compare(cfg: &ExperimentConfig, codings: &[Coding]) -> Result<CompareReport> {
    Experiment::new(cfg.clone())?.compare(codings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    ReceiveAntennas,
    CodebookSize,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::ReceiveAntennas => "receive_antennas",
            SweepAxis::CodebookSize => "codebook_size",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "receive_antennas" => Ok(SweepAxis::ReceiveAntennas),
            "codebook_size" => Ok(SweepAxis::CodebookSize),
            other => Err(Error::config("axis", format!("unknown axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: usize,
    pub summary: Summary,
}

/// One summary per axis value with every trial seed shared across values.
/// Codebook sizes use prefixes of the configured codebook, so smaller
/// codebooks are nested in larger ones.
pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[usize]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::config("values", "must be nonempty"));
    }
    let mut rows = Vec::with_capacity(values.len());
    match axis {
        SweepAxis::ReceiveAntennas => {
            for &n in values {
                let report = run_experiment(&ExperimentConfig { n, ..cfg.clone() })?;
                rows.push(SweepRow {
                    value: n,
                    summary: report.summary,
                });
            }
        }
        SweepAxis::CodebookSize => {
            if cfg.coding != Coding::Codebook {
                return Err(Error::config("coding", "codebook_size sweeps need coding = codebook"));
            }
            let exp = Experiment::new(cfg.clone())?;
            let full = exp.codebook.clone().ok_or(Error::EmptyCodebook)?;
            let mut exp = Some(exp);
            for &d in values {
                if d == 0 || d > full.d() {
                    return Err(Error::config("values", format!("codebook size {d} outside 1..={}", full.d())));
                }
                let e = exp.take().expect("experiment restored each step").with_codebook(full.prefix(d)?)?;
                rows.push(SweepRow {
                    value: d,
                    summary: e.run()?.summary,
                });
                exp = Some(e);
            }
        }
    }
    Ok(rows)
}

pub fn sweep_csv(cfg: &ExperimentConfig, axis: SweepAxis, rows: &[SweepRow]) -> String {
    let mut out = format!("{},scheme,coding,mean_watts,mean_dbm,trials_ok,trials_failed\n", axis.as_str());
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.9e},{:.4},{},{}",
            r.value,
            cfg.scheme.as_str(),
            cfg.coding.as_str(),
            r.summary.mean_watts,
            r.summary.mean_dbm,
            r.summary.trials_ok,
            r.summary.trials_failed
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(coding: Coding) -> ExperimentConfig {
        ExperimentConfig {
            m: 1,
            n: 1,
            q: 6,
            k: 8,
            target_rank: 3,
            trials: 3,
            coding,
            ..Default::default()
        }
    }

    #[test]
    fn dbm_of_watts() {
        assert!((watts_to_dbm(1.0) - 30.0).abs() < 1e-12);
        assert!((watts_to_dbm(1e-3)).abs() < 1e-12);
    }

    #[test]
    fn mean_of_watts_not_dbm() {
        let r = |w: f64| TrialResult {
            trial_index: 0,
            scheme: Scheme::DccOpt,
            coding: Coding::Fixed,
            power_watts: w,
            power_dbm: watts_to_dbm(w),
            iterations_outer: 0,
            wall_time_ms: 0.0,
            failed: None,
        };
        let s = Summary::of(&[r(1e-3), r(1e-1)]);
        assert!((s.mean_watts - 0.0505).abs() < 1e-15);
        assert!((s.mean_dbm - watts_to_dbm(0.0505)).abs() < 1e-12);
    }

    #[test]
    fn baseline_is_all_zeros_by_default() {
        let (b_t, b_r) = fixed_baseline(&ExperimentConfig::default()).unwrap();
        assert!(b_t.bits().iter().chain(&b_r.bits()).all(|&b| !b));
        let cfg = ExperimentConfig {
            q: 3,
            baseline_coder: Some("101".into()),
            ..Default::default()
        };
        let (b_t, _) = fixed_baseline(&cfg).unwrap();
        assert_eq!(b_t.bits(), vec![true, false, true, true, false, true]);
    }

    #[test]
    fn fixed_run_is_deterministic() {
        let cfg = tiny(Coding::Fixed);
        let a = run_experiment(&cfg).unwrap().to_csv();
        let b = run_experiment(&cfg).unwrap().to_csv();
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
        assert!(a.lines().last().unwrap().starts_with("# mean_watts="));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let cfg = tiny(Coding::Binary);
        let a = run_experiment(&cfg).unwrap().to_csv();
        let b = run_experiment(&ExperimentConfig { workers: 3, ..cfg }).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn single_value_sweep_matches_run() {
        let cfg = tiny(Coding::Fixed);
        let rows = sweep(&cfg, SweepAxis::ReceiveAntennas, &[1]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].summary, run_experiment(&cfg).unwrap().summary);
    }
}
