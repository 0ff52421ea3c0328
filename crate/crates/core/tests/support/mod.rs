//! Property checks shared by the `properties` and `acceptance` test targets.
//!
//! Each check drives a proptest [`TestRunner`] for a given number of cases and
//! reports the first (shrunk) counterexample as a string.

#![allow(dead_code)]

use std::path::Path;

use delay_rc::experiment::{emit_results, read_results_csv, result_rows, run_experiment, ExperimentConfig};
use delay_rc::physical::{one_pole_highpass, simulate_loop, AnalogSignal, LoopSettings, PhysicalParams};
use delay_rc::readout::{nmse, train_linear, RegressionConfig, SymbolAlphabet};
use delay_rc::reservoir::{
    generate_mask, run_discrete, step_desynchronized, InitialState, InputMask, MaskDistribution, MaskSpec,
    ReservoirParams,
};
use delay_rc::series::{InputSequence, StateMatrix};
use delay_rc::tasks::{
    gen_channel, gen_memory_task, gen_narma10, gen_sine_square, linear_channel, read_dataset_csv, ChannelConfig,
    Targets, CHANNEL_TAPS,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub struct Property {
    pub name: &'static str,
    /// Cases per run; the expensive checks use fewer.
    pub cases: u32,
    pub check: fn(u32) -> Result<(), String>,
}

pub const PROPERTIES: &[Property] = &[
    Property { name: "state boundedness", cases: 64, check: state_boundedness },
    Property { name: "desync dependency", cases: 64, check: desync_dependency },
    Property { name: "fading memory", cases: 32, check: fading_memory },
    Property { name: "ridge shrinkage monotonicity", cases: 64, check: ridge_monotonicity },
    Property { name: "regression vs dense oracle", cases: 64, check: regression_matches_oracle },
    Property { name: "least-squares optimality", cases: 16, check: least_squares_optimality },
    Property { name: "nmse scale invariance", cases: 256, check: nmse_scale_invariance },
    Property { name: "quantizer idempotence", cases: 256, check: quantizer_idempotence },
    Property { name: "channel convolution oracle", cases: 64, check: channel_convolution },
    Property { name: "generator determinism", cases: 16, check: generator_determinism },
    Property { name: "run determinism", cases: 32, check: run_determinism },
    Property { name: "loop boundedness", cases: 16, check: loop_boundedness },
    Property { name: "highpass zero mean", cases: 4, check: highpass_zero_mean },
    Property { name: "csv round trip", cases: 8, check: csv_round_trip },
    Property { name: "concurrency determinism", cases: 3, check: concurrency_determinism },
];

fn runner(cases: u32) -> TestRunner {
    // fixed RNG so failures replay identically
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    )
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

fn params_strategy() -> impl Strategy<Value = ReservoirParams> {
    (1usize..30)
        .prop_flat_map(|n| (Just(n), 0..n, 0.0..=4.2f64, -5.0..5.0f64, -3.2..3.2f64))
        .prop_map(|(n, k, a, b, phi)| ReservoirParams::new(n, k, a, b, phi).unwrap())
}

fn mask_for(n: usize, k_inputs: usize, seed: u64) -> InputMask {
    generate_mask(&MaskSpec {
        distribution: MaskDistribution::Uniform { lo: -1.0, hi: 1.0 },
        n_nodes: n,
        n_inputs: k_inputs,
        seed,
    })
    .unwrap()
}

pub fn state_boundedness(cases: u32) -> Result<(), String> {
    let s = (params_strategy(), any::<u64>(), prop::collection::vec(-10.0..10.0f64, 1..60));
    run(cases, s, |(p, seed, u)| {
        let mask = mask_for(p.n_nodes, 1, seed);
        let states = ok(run_discrete(&p, &mask, &InputSequence::scalar(u).unwrap(), None))?;
        prop_assert!(states.as_slice().iter().all(|x| (-1.0..=1.0).contains(x)));
        Ok(())
    })
}

pub fn desync_dependency(cases: u32) -> Result<(), String> {
    let s = (2usize..20)
        .prop_flat_map(|n| {
            (
                Just(n),
                1..n,
                prop::collection::vec(-1.0..1.0f64, n),
                prop::collection::vec(-1.0..1.0f64, n),
                0..n,
                0..n,
            )
        })
        .prop_flat_map(|t| (Just(t), 0.1..4.2f64, -2.0..2.0f64, any::<u64>()));
    run(cases, s, |((n, k, nm1, nm2, i, j), alpha, u, seed)| {
        let p = ReservoirParams::new(n, k, alpha, 0.7, 0.2).unwrap();
        let mask = mask_for(n, 1, seed);
        let base = ok(step_desynchronized(&p, &mask, &nm1, &nm2, &[u]))?;

        let mut bumped = nm1.clone();
        bumped[j] += 1e-3;
        let out1 = ok(step_desynchronized(&p, &mask, &bumped, &nm2, &[u]))?;
        let mut bumped = nm2.clone();
        bumped[j] += 1e-3;
        let out2 = ok(step_desynchronized(&p, &mask, &nm1, &bumped, &[u]))?;

        let from_nm1 = i >= k && j == i - k;
        let from_nm2 = i < k && j == n + i - k;
        prop_assert_eq!(out1[i] != base[i], from_nm1, "x(n-1)[{}] -> out[{}]", j, i);
        prop_assert_eq!(out2[i] != base[i], from_nm2, "x(n-2)[{}] -> out[{}]", j, i);
        Ok(())
    })
}

/// Two runs from different initial states at the NARMA10 operating point
/// (input gain 0.2, mask on [0, 1], input on [0, 0.5]).
pub fn fading_memory(cases: u32) -> Result<(), String> {
    let s = (
        0.0..=0.9f64,
        any::<u64>(),
        prop::collection::vec(-1.0..1.0f64, 100),
        prop::collection::vec(-1.0..1.0f64, 100),
        prop::collection::vec(0.0..0.5f64, 200),
    );
    run(cases, s, |(alpha, seed, a, b, u)| {
        let p = ReservoirParams::new(50, 1, alpha, 0.2, 0.0).unwrap();
        let mask = generate_mask(&MaskSpec {
            distribution: MaskDistribution::Uniform { lo: 0.0, hi: 1.0 },
            n_nodes: 50,
            n_inputs: 1,
            seed,
        })
        .unwrap();
        let u = InputSequence::scalar(u).unwrap();
        let ia = InitialState { prev: a[..50].to_vec(), prev2: a[50..].to_vec() };
        let ib = InitialState { prev: b[..50].to_vec(), prev2: b[50..].to_vec() };
        let xa = ok(run_discrete(&p, &mask, &u, Some(&ia)))?;
        let xb = ok(run_discrete(&p, &mask, &u, Some(&ib)))?;
        let diff = ok(xa.slice(100..200).max_abs_diff(&xb.slice(100..200)))?;
        prop_assert!(diff < 1e-10, "alpha = {}: max difference {:e} after washout", alpha, diff);
        Ok(())
    })
}

fn regression_data() -> impl Strategy<Value = (StateMatrix, Vec<f64>)> {
    (1usize..12, 40usize..120)
        .prop_flat_map(|(n, len)| {
            (
                Just(n),
                prop::collection::vec(-1.0..1.0f64, n * len),
                prop::collection::vec(-2.0..2.0f64, len),
            )
        })
        .prop_map(|(n, x, y)| (StateMatrix::new(n, x).unwrap(), y))
}

pub fn ridge_monotonicity(cases: u32) -> Result<(), String> {
    let s = (regression_data(), 0.0..1.0f64, 0.0..1.0f64, any::<bool>());
    run(cases, s, |((x, y), l1, l2, intercept)| {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let cfg = |lambda| RegressionConfig { ridge_lambda: lambda, washout: 0, intercept };
        let w_lo = ok(train_linear(&x, &y, &cfg(lo)))?;
        let w_hi = ok(train_linear(&x, &y, &cfg(hi)))?;
        prop_assert!(
            w_lo.norm() >= w_hi.norm() * (1.0 - 1e-12),
            "|W({})| = {} < |W({})| = {}",
            lo,
            w_lo.norm(),
            hi,
            w_hi.norm()
        );
        Ok(())
    })
}

/// Gaussian elimination with partial pivoting on the normal equations.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Node weights then intercept, from explicit sums over the training columns.
fn oracle_weights(x: &StateMatrix, y: &[f64], washout: usize, lambda: f64, intercept: bool) -> Vec<f64> {
    let n = x.n_nodes();
    let p = n + usize::from(intercept);
    let cols: Vec<Vec<f64>> = (washout..x.n_steps())
        .map(|t| {
            let mut c = x.column(t).to_vec();
            if intercept {
                c.push(1.0);
            }
            c
        })
        .collect();
    let t = cols.len() as f64;
    let mut r = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    for (c, &target) in cols.iter().zip(&y[washout..]) {
        for i in 0..p {
            rhs[i] += c[i] * target / t;
            for j in 0..p {
                r[i][j] += c[i] * c[j] / t;
            }
        }
    }
    for (i, row) in r.iter_mut().enumerate().take(n) {
        row[i] += lambda;
    }
    dense_solve(r, rhs)
}

pub fn regression_matches_oracle(cases: u32) -> Result<(), String> {
    let s = (regression_data(), prop_oneof![Just(0.0), 1e-6..1.0f64], any::<bool>(), 0usize..20);
    run(cases, s, |((x, y), lambda, intercept, washout)| {
        let cfg = RegressionConfig { ridge_lambda: lambda, washout, intercept };
        let w = ok(train_linear(&x, &y, &cfg))?;
        let oracle = oracle_weights(&x, &y, washout, lambda, intercept);
        let mut got = w.weights().to_vec();
        if intercept {
            got.push(w.intercept());
        }
        for (g, o) in got.iter().zip(&oracle) {
            prop_assert!((g - o).abs() <= 1e-8, "weight {} vs oracle {}", g, o);
        }
        Ok(())
    })
}

fn training_mse(x: &StateMatrix, y: &[f64], w: &[f64], b: f64) -> f64 {
    x.columns()
        .zip(y)
        .map(|(c, t)| {
            let e = c.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b - t;
            e * e
        })
        .sum::<f64>()
        / y.len() as f64
}

/// At zero ridge the fit beats 1000 random perturbations of itself.
pub fn least_squares_optimality(cases: u32) -> Result<(), String> {
    let s = (regression_data(), any::<u64>());
    run(cases, s, |((x, y), seed)| {
        let w = ok(train_linear(&x, &y, &RegressionConfig { ridge_lambda: 0.0, washout: 0, intercept: true }))?;
        let best = training_mse(&x, &y, w.weights(), w.intercept());
        let mut rng = delay_rc::seed::rng_from_seed(seed);
        for _ in 0..1000 {
            let scale = 10f64.powf(delay_rc::seed::uniform(&mut rng, -4.0, 0.0));
            let pw: Vec<f64> = w.weights().iter().map(|v| v + scale * delay_rc::seed::normal(&mut rng)).collect();
            let pb = w.intercept() + scale * delay_rc::seed::normal(&mut rng);
            let mse = training_mse(&x, &y, &pw, pb);
            prop_assert!(mse >= best * (1.0 - 1e-12), "perturbed mse {} < fitted {}", mse, best);
        }
        Ok(())
    })
}

pub fn nmse_scale_invariance(cases: u32) -> Result<(), String> {
    let s = (1usize..50)
        .prop_flat_map(|n| (prop::collection::vec(-5.0..5.0f64, n), prop::collection::vec(-5.0..5.0f64, n)))
        .prop_flat_map(|v| (Just(v), prop_oneof![-1e3..-1e-3f64, 1e-3..1e3f64]));
    run(cases, s, |((y, yhat), c)| {
        prop_assume!(y.iter().any(|v| *v != 0.0));
        let base = ok(nmse(&y, &yhat))?;
        let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
        let yhats: Vec<f64> = yhat.iter().map(|v| v * c).collect();
        let scaled = ok(nmse(&ys, &yhats))?;
        prop_assert!((scaled - base).abs() <= 1e-12 * base.max(1.0), "{} vs {}", scaled, base);
        Ok(())
    })
}

pub fn quantizer_idempotence(cases: u32) -> Result<(), String> {
    let s = prop_oneof![-10.0..10.0f64, Just(-2.0), Just(0.0), Just(2.0), Just(f64::MAX), Just(-f64::MAX)];
    run(cases, s, |v| {
        let pam4 = SymbolAlphabet::pam4();
        let once = pam4.quantize(v);
        prop_assert!(pam4.symbols().contains(&once));
        prop_assert_eq!(pam4.quantize(once), once);
        Ok(())
    })
}

pub fn channel_convolution(cases: u32) -> Result<(), String> {
    let s = prop::collection::vec(prop::sample::select(vec![-3.0, -1.0, 1.0, 3.0]), 10..300);
    run(cases, s, |d| {
        let q = ok(linear_channel(&d))?;
        prop_assert_eq!(q.len(), d.len() - 9);
        for (idx, n) in (7..d.len() - 2).enumerate() {
            let mut direct = 0.0;
            for (j, tap) in CHANNEL_TAPS.iter().enumerate() {
                // tap j multiplies d(n + 2 - j)
                direct += tap * d[n + 2 - j];
            }
            prop_assert!((q[idx] - direct).abs() <= 1e-12, "q({}) = {} vs {}", n, q[idx], direct);
        }
        Ok(())
    })
}

pub fn generator_determinism(cases: u32) -> Result<(), String> {
    let s = (any::<u64>(), 20usize..400, 0.0..40.0f64);
    run(cases, s, |(seed, len, snr)| {
        prop_assert_eq!(ok(gen_narma10(len, seed))?, ok(gen_narma10(len, seed))?);
        let cfg = ChannelConfig { snr_db: snr, length: len, seed, decision_delay: 2 };
        prop_assert_eq!(ok(gen_channel(&cfg))?, ok(gen_channel(&cfg))?);
        prop_assert_eq!(ok(gen_sine_square(len / 12 + 1, seed))?, ok(gen_sine_square(len / 12 + 1, seed))?);
        prop_assert_eq!(ok(gen_memory_task(len, 3, None, seed))?, ok(gen_memory_task(len, 3, None, seed))?);
        prop_assert_ne!(ok(gen_narma10(len, seed))?.inputs, ok(gen_narma10(len, seed ^ 1))?.inputs);
        Ok(())
    })
}

pub fn run_determinism(cases: u32) -> Result<(), String> {
    let s = (params_strategy(), any::<u64>(), prop::collection::vec(-1.0..1.0f64, 1..80));
    run(cases, s, |(p, seed, u)| {
        let mask = mask_for(p.n_nodes, 1, seed);
        let u = InputSequence::scalar(u).unwrap();
        let a = ok(run_discrete(&p, &mask, &u, None))?;
        let b = ok(run_discrete(&p, &mask, &u, None))?;
        let bits = |m: &StateMatrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a), bits(&b));
        Ok(())
    })
}

pub fn loop_boundedness(cases: u32) -> Result<(), String> {
    let s = (
        2usize..12,
        0.0..=4.2f64,
        -3.0..3.0f64,
        -3.2..3.2f64,
        0.0..0.2f64,
        any::<u64>(),
        prop::collection::vec(-5.0..5.0f64, 64..256),
    );
    run(cases, s, |(n, alpha, beta, phi, noise, seed, drive)| {
        let settings = LoopSettings { theta_samples: 4, noise_std: noise, ..LoopSettings::default() };
        let reservoir = ReservoirParams::new(n, 1, alpha, beta, phi).unwrap();
        let params = ok(PhysicalParams::new(reservoir, settings, seed))?;
        let len = drive.len() / 4 * 4;
        let drive = ok(AnalogSignal::new(drive[..len].to_vec(), params.rate()))?;
        let out = ok(simulate_loop(&params, &drive))?;
        prop_assert!(out.samples().iter().all(|x| (-1.0..=1.0).contains(x)));
        let again = ok(simulate_loop(&params, &drive))?;
        prop_assert_eq!(out.samples(), again.samples());
        Ok(())
    })
}

/// Constant drive through the default highpass, 10^6 samples.
pub fn highpass_zero_mean(cases: u32) -> Result<(), String> {
    let s = prop_oneof![-1.0..-0.01f64, 0.01..1.0f64];
    run(cases, s, |level| {
        let settings = LoopSettings::default();
        let signal = ok(AnalogSignal::new(vec![level; 1_000_000], settings.sample_rate))?;
        let out = ok(one_pole_highpass(&signal, settings.highpass_cutoff_hz))?;
        let mean = out.samples().iter().sum::<f64>() / out.len() as f64;
        prop_assert!(mean.abs() < 1e-3, "mean {} for constant {}", mean, level);
        Ok(())
    })
}

fn small_narma_config(master_seed: u64, trials: usize) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
        trials = {trials}
        master_seed = {master_seed}
        [task]
        kind = "narma10"
        train = 200
        test = 200
        [reservoir]
        n_nodes = 20
        feedback_gain = 0.8
        input_gain = 0.2
        [readout]
        ridge_lambda = 1e-8
        "#
    ))
    .unwrap()
}

pub fn csv_round_trip(cases: u32) -> Result<(), String> {
    let s = (any::<u64>(), 20usize..300);
    run(cases, s, |(seed, len)| {
        let dir = ok(tempfile::tempdir())?;
        let data = ok(gen_narma10(len, seed))?;
        let path = dir.path().join("narma.csv");
        ok(data.write_csv(&path))?;
        let (inputs, targets) = ok(read_dataset_csv(&path))?;
        prop_assert_eq!(&inputs, &data.inputs);
        prop_assert_eq!(Targets::Scalar(targets), data.targets.clone());

        let report = ok(run_experiment(&small_narma_config(seed, 2)))?;
        ok(emit_results(std::slice::from_ref(&report), dir.path()))?;
        let rows = ok(read_results_csv(&dir.path().join("results.csv")))?;
        prop_assert_eq!(rows, result_rows(&report));
        Ok(())
    })
}

fn emit_in_pool(config: &ExperimentConfig, threads: usize, dir: &Path) -> Result<Vec<Vec<u8>>, TestCaseError> {
    let pool = ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build())?;
    let report = ok(pool.install(|| run_experiment(config)))?;
    ok(emit_results(&[report], dir))?;
    ["results.csv", "summary.csv"]
        .iter()
        .map(|f| ok(std::fs::read(dir.join(f))))
        .collect()
}

/// One worker versus several: identical result files.
pub fn concurrency_determinism(cases: u32) -> Result<(), String> {
    run(cases, any::<u64>(), |seed| {
        let config = small_narma_config(seed, 6);
        let dir = ok(tempfile::tempdir())?;
        let serial = emit_in_pool(&config, 1, &dir.path().join("serial"))?;
        let parallel = emit_in_pool(&config, 4, &dir.path().join("parallel"))?;
        prop_assert!(serial == parallel, "result files differ between 1 and 4 workers");
        Ok(())
    })
}
