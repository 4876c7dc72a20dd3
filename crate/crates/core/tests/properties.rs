mod common;

use pixelwpt::channel::{effective_channel, BeamspaceChannel, CoderMatrix};
use pixelwpt::codebook::{assign_coders, distance, Codebook, CoderPool};
use pixelwpt::dcc::{self, ScaConfig};
use pixelwpt::harness::{watts_to_dbm, Coding, Scheme, Summary, TrialResult};
use pixelwpt::rectenna::{harmonic_moment, power_dcc, RectennaParams};
use pixelwpt::rfc::{self, AbfConfig};
use pixelwpt::search::{quasi_newton_maximize, sebo_maximize, QuasiNewtonConfig, SeboConfig};
use pixelwpt::system::{join_bits, split_bits, ReactanceMatrix};
use pixelwpt::{CMatrix, Complex64};
use proptest::prelude::*;

use common::*;

fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn effective_channel_is_linear_in_h_c(seed in any::<u64>(), alpha in -10.0f64..10.0) {
        let mut r = rng(seed);
        let h_c = cmatrix(&mut r, 6, 4);
        let w_t = cmatrix(&mut r, 4, 2);
        let w_r = cmatrix(&mut r, 6, 3);
        let h = effective_channel(&BeamspaceChannel::new(h_c.clone(), 1.0).unwrap(), &w_t, &w_r).unwrap();
        let scaled = effective_channel(&BeamspaceChannel::new(&h_c * Complex64::new(alpha, 0.0), 1.0).unwrap(), &w_t, &w_r).unwrap();
        prop_assert!(close(&scaled, &(&h * Complex64::new(alpha, 0.0)), 1e-12));
    }

    #[test]
    fn transmit_phase_rotates_one_column(seed in any::<u64>(), theta in 0.0f64..6.3, col in 0usize..2) {
        let mut r = rng(seed);
        let ch = BeamspaceChannel::new(cmatrix(&mut r, 6, 4), 1.0).unwrap();
        let w_t = cmatrix(&mut r, 4, 2);
        let w_r = cmatrix(&mut r, 6, 3);
        let rot = Complex64::from_polar(1.0, theta);
        let mut w_rot = w_t.clone();
        let scaled = w_rot.column(col) * rot;
        w_rot.set_column(col, &scaled);
        let h = effective_channel(&ch, &w_t, &w_r).unwrap();
        let g = effective_channel(&ch, &w_rot, &w_r).unwrap();
        let mut want = h.clone();
        let c = h.column(col) * rot;
        want.set_column(col, &c);
        prop_assert!(close(&g, &want, 1e-12));
        for (a, b) in g.iter().zip(h.iter()) {
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn moment_matches_quadrature(re in -3.0f64..3.0, im in -3.0f64..3.0, order in 1u32..4) {
        let a = Complex64::new(re, im);
        let i = 2 * order;
        let got = harmonic_moment(a, i).unwrap();
        let want = quadrature_moment(a, i, 512);
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1e-300));
    }

    #[test]
    fn dc_power_ignores_common_phase(seed in any::<u64>(), theta in 0.0f64..6.3) {
        let mut r = rng(seed);
        let h = cmatrix(&mut r, 3, 2) * Complex64::new(0.01, 0.0);
        let p = cvector(&mut r, 2);
        let params = RectennaParams::default();
        let a = power_dcc(&h, &p, &params).unwrap();
        let b = power_dcc(&h, &(&p * Complex64::from_polar(1.0, theta)), &params).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn sca_meets_power_constraint(seed in any::<u64>(), n in 1usize..5, m in 1usize..5, power in 0.1f64..10.0) {
        let mut r = rng(seed);
        let h = cmatrix(&mut r, n, m) * Complex64::new(0.01, 0.0);
        let out = dcc::sca_transmit_beamforming(&h, power, &RectennaParams::default(), &ScaConfig::default(), None).unwrap();
        prop_assert!(rel(0.5 * out.p_t.norm_squared(), power) <= 1e-12);
        prop_assert!(out.objective >= out.history[0].objective * (1.0 - 1e-12));
    }

    #[test]
    fn abf_never_beats_svd(seed in any::<u64>(), n in 1usize..6, m in 1usize..6) {
        let mut r = rng(seed);
        let h = cmatrix(&mut r, n, m);
        let abf = rfc::abf_receive_beamforming(&h, 1.0, &AbfConfig::default(), None).unwrap();
        let svd = rfc::svd_beamformers(&h, 1.0).unwrap();
        prop_assert!(abf.beamformers.gain <= svd.gain * (1.0 + 1e-12));
    }

    #[test]
    fn sqrt_hamming_is_a_metric(a in prop::collection::vec(any::<bool>(), 8), b in prop::collection::vec(any::<bool>(), 8), c in prop::collection::vec(any::<bool>(), 8)) {
        prop_assert_eq!(distance(&a, &b), distance(&b, &a));
        prop_assert_eq!(distance(&a, &a), 0.0);
        prop_assert!(distance(&a, &c) <= distance(&a, &b) + distance(&b, &c) + 1e-12);
    }

    #[test]
    fn assignment_picks_a_nearest_codeword(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let pool = CoderPool::new(7, (0..20).map(|_| bits(&mut r, 7)).collect()).unwrap();
        let cb = Codebook::new(7, (0..d).map(|_| bits(&mut r, 7)).collect()).unwrap();
        let asg = assign_coders(&pool, &cb);
        for (e, &l) in pool.entries.iter().zip(&asg.labels) {
            let best = cb.codewords().iter().map(|c| distance(e, c)).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(distance(e, &cb.codewords()[l]), best);
        }
    }

    #[test]
    fn codebook_json_round_trip(seed in any::<u64>(), q in 1usize..12, d in 1usize..8) {
        let mut r = rng(seed);
        let cb = Codebook::new(q, (0..d).map(|_| bits(&mut r, q)).collect()).unwrap();
        prop_assert_eq!(Codebook::from_json(&cb.to_json().unwrap()).unwrap(), cb);
    }

    #[test]
    fn bits_and_reactances_round_trip(seed in any::<u64>(), m in 1usize..4, n in 1usize..4, q in 1usize..6) {
        let mut r = rng(seed);
        let b = bits(&mut r, (m + n) * q);
        let (bt, br) = split_bits(&b, m, q);
        prop_assert_eq!(join_bits(&bt, &br), b.clone());
        let cfg = pixelwpt::antenna::AntennaConfig::default();
        let x = ReactanceMatrix::from_coders(&bt, &br, &cfg);
        prop_assert_eq!(ReactanceMatrix::from_stacked(&x.stacked(), m, q), x.clone());
        let (ct, cr) = x.coders(&cfg);
        let back: Vec<bool> = ct.columns().iter().chain(cr.columns()).flat_map(|c| c.bits()).collect();
        prop_assert_eq!(back, b);
        prop_assert_eq!(CoderMatrix::from_bits(&join_bits(&bt, &br)[..m * q], q), bt);
    }

    #[test]
    fn summary_converts_mean_of_watts(watts in prop::collection::vec(1e-12f64..1.0, 1..30)) {
        let results: Vec<TrialResult> = watts.iter().enumerate().map(|(t, &w)| TrialResult {
            trial_index: t,
            scheme: Scheme::DccOpt,
            coding: Coding::Fixed,
            power_watts: w,
            power_dbm: watts_to_dbm(w),
            iterations_outer: 0,
            wall_time_ms: 0.0,
            failed: None,
        }).collect();
        let s = Summary::of(&results);
        let mean = watts.iter().sum::<f64>() / watts.len() as f64;
        prop_assert!(rel(s.mean_watts, mean) <= 1e-12);
        prop_assert!((s.mean_dbm - watts_to_dbm(mean)).abs() <= 1e-9);
        prop_assert_eq!(s.trials_ok, watts.len());
    }

    #[test]
    fn sebo_never_loses_the_start(seed in any::<u64>(), n_bits in 1usize..16, block in 1usize..6) {
        let mut r = rng(seed);
        let weights: Vec<f64> = (0..n_bits * n_bits).map(|_| cn(&mut r).re).collect();
        let f = |b: &[bool]| {
            let mut s = 0.0;
            for i in 0..b.len() {
                for j in 0..b.len() {
                    if b[i] && b[j] {
                        s += weights[i * b.len() + j];
                    }
                }
            }
            s
        };
        let init = bits(&mut r, n_bits);
        let cfg = SeboConfig { block_size: block, rounds: 3, rng_seed: seed, ..SeboConfig::default() };
        let out = sebo_maximize(f, n_bits, &init, &cfg).unwrap();
        prop_assert!(out.value >= f(&init));
        prop_assert_eq!(out.value, f(&out.bits));
    }

    #[test]
    fn quasi_newton_never_loses_a_seeded_start(seed in any::<u64>(), c0 in -5.0f64..5.0, c1 in -5.0f64..5.0) {
        let f = |x: &[f64]| -((x[0] - c0).powi(2) + 3.0 * (x[1] - c1).powi(4)) + (x[0] * x[1]).sin();
        let start = vec![c0 + 1.0, c1 - 1.0];
        let cfg = QuasiNewtonConfig { restarts: 2, rng_seed: seed, ..QuasiNewtonConfig::default() };
        let out = quasi_newton_maximize(f, 2, &cfg, std::slice::from_ref(&start)).unwrap();
        prop_assert!(out.value >= f(&start));
    }
}
