//! Acceptance suite: one test per release criterion, each printing a
//! `[PASS]`/`[FAIL]` line (run with `--nocapture` to see them).
//!
//! Tolerances are pinned in the constants below; timing budgets assume an
//! optimized test profile (the workspace sets `opt-level = 2` for tests).

mod common;

use std::sync::Mutex;
use std::time::Instant;

use common::{kahan_sum, oracle_solve, TestRng};
use tiltsweep_core::dataset::{Task, TestSet};
use tiltsweep_core::harness;
use tiltsweep_core::indicators::{self, RateConvention};
use tiltsweep_core::projection::{
    feasibility_check, mean_cov_constraint, mean_constraint, solve_weights, ConstraintSpec,
    SolverOptions,
};
use tiltsweep_core::stress::{self, StressSpec};
use tiltsweep_core::sweep::{self, Cell, SweepConfig};

const TOL_ABS: f64 = 1e-10;
const TOL_REL: f64 = 1e-9;
const TOL_NORMALIZATION: f64 = 1e-12;
const TOL_KL_IDENTITY: f64 = 1e-10;
const TOL_ORACLE_WEIGHT: f64 = 1e-4;
const TOL_CLOSED_FORM: f64 = 1e-9;
const TOL_BASELINE: f64 = 1e-12;
const TOL_NULL_SLOPE: f64 = 0.01;
const BUDGET_CONSTRAINT_SECS: f64 = 30.0;
const BUDGET_RECOVERY_SECS: f64 = 60.0;
const BUDGET_BASE_SWEEP_SECS: f64 = 2.0;
const SCALING_RATIO_LO: f64 = 6.0;
const SCALING_RATIO_HI: f64 = 14.0;

/// Criteria with timing budgets must not share the machine with the other
/// tests of this binary while they measure.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial_guard() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "[{}] criterion {id}: {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// A single-column dataset with an admissible stressed mean target.
struct MeanInstance {
    values: Vec<f64>,
    target: f64,
    range: f64,
}

fn testset_around(values: Vec<f64>) -> TestSet<f64> {
    let n = values.len();
    let preds: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
    TestSet::new(
        vec![values],
        vec!["x".into()],
        preds.clone(),
        preds,
        Task::Binary,
    )
    .unwrap()
}

fn random_mean_instances(count: usize, seed: u64) -> Vec<MeanInstance> {
    let mut rng = TestRng::new(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = (10f64.powf(rng.range(1.0, 4.0))).round() as usize;
        let offset = rng.range(-100.0, 100.0);
        let scale = rng.range(0.05, 50.0);
        let law = rng.usize_in(0, 2);
        let values: Vec<f64> = (0..n)
            .map(|_| {
                let u = rng.unit();
                let shaped = match law {
                    0 => u,
                    1 => u * u,
                    _ => {
                        // two clusters
                        if u < 0.5 {
                            0.2 * u
                        } else {
                            0.8 + 0.2 * (u - 0.5)
                        }
                    }
                };
                offset + scale * shaped
            })
            .collect();
        let ts = testset_around(values.clone());
        let stats = ts.column_stats(0).unwrap();
        let tau = rng.range(-0.9, 0.9);
        let spec = StressSpec {
            variable: 0,
            tau,
            alpha: 0.05,
        };
        let target = match stress::target_for_tau(&stats, &spec) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let constraint =
            ConstraintSpec::new(vec![values.clone()], vec![target], vec!["x".into()]).unwrap();
        if !feasibility_check(&constraint).feasible {
            continue;
        }
        out.push(MeanInstance {
            values,
            target,
            range: stats.max - stats.min,
        });
    }
    out
}

fn solve_instance(inst: &MeanInstance) -> tiltsweep_core::WeightVector {
    let spec = ConstraintSpec::new(
        vec![inst.values.clone()],
        vec![inst.target],
        vec!["x".into()],
    )
    .unwrap();
    solve_weights(&spec, &SolverOptions::default()).expect("feasible instance must solve")
}

#[test]
fn criterion_1_constraint_satisfaction() {
    let _serial = serial_guard();
    let started = Instant::now();
    let instances = random_mean_instances(1000, 11);
    let mut worst_moment = 0.0f64;
    let mut worst_norm = 0.0f64;
    let mut all_positive = true;
    for inst in &instances {
        let w = solve_instance(inst);
        let n = inst.values.len() as f64;
        let achieved =
            kahan_sum(w.lambdas.iter().zip(&inst.values).map(|(&l, &v)| l * v)) / n;
        let tol = TOL_ABS + TOL_REL * inst.range;
        worst_moment = worst_moment.max(((achieved - inst.target) / tol).abs());
        all_positive &= w.lambdas.iter().all(|&l| l > 0.0);
        let mean_lambda = kahan_sum(w.lambdas.iter().copied()) / n;
        worst_norm = worst_norm.max((mean_lambda - 1.0).abs());
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_moment <= 1.0
        && all_positive
        && worst_norm <= TOL_NORMALIZATION
        && elapsed < BUDGET_CONSTRAINT_SECS;
    report(
        1,
        "constraint satisfaction",
        pass,
        &format!(
            "1000 instances: worst moment error {:.3} of tolerance, weights positive {}, \
             worst |mean(lambda) - 1| {:.2e} (<= {TOL_NORMALIZATION:.0e}), {elapsed:.1} s \
             (< {BUDGET_CONSTRAINT_SECS} s)",
            worst_moment, all_positive, worst_norm
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_kl_dual_identity() {
    let _serial = serial_guard();
    let instances = random_mean_instances(1000, 11);
    let mut worst = 0.0f64;
    for inst in &instances {
        let w = solve_instance(inst);
        let n = inst.values.len() as f64;
        let primal = kahan_sum(w.lambdas.iter().map(|&l| l * l.ln())) / n;
        worst = worst.max((primal - w.kl).abs());
    }
    let pass = worst <= TOL_KL_IDENTITY;
    report(
        2,
        "KL dual/primal identity",
        pass,
        &format!("worst |primal - dual| = {worst:.2e} (<= {TOL_KL_IDENTITY:.0e})"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_oracle_equivalence() {
    let _serial = serial_guard();
    // k = 1: Newton weights against the 1e-7 grid-search dual oracle.
    let mut rng = TestRng::new(303);
    let mut checked = 0;
    let mut worst = 0.0f64;
    while checked < 100 {
        let n = rng.usize_in(3, 12);
        let offset = rng.range(-5.0, 5.0);
        let scale = rng.range(0.1, 10.0);
        let values: Vec<f64> = (0..n).map(|_| offset + scale * rng.unit()).collect();
        let raw: Vec<f64> = (0..n).map(|_| rng.range(0.05, 1.0)).collect();
        let total: f64 = raw.iter().sum();
        let target: f64 = values
            .iter()
            .zip(&raw)
            .map(|(&v, &w)| v * w / total)
            .sum();
        let spec =
            ConstraintSpec::new(vec![values.clone()], vec![target], vec!["x".into()]).unwrap();
        let lib = match solve_weights(&spec, &SolverOptions::default()) {
            Ok(w) => w,
            Err(_) => continue,
        };
        let (_, oracle_lambdas) = oracle_solve(&values, target);
        for (l, o) in lib.lambdas.iter().zip(&oracle_lambdas) {
            worst = worst.max((l - o).abs());
        }
        checked += 1;
    }
    let k1_pass = worst <= TOL_ORACLE_WEIGHT;

    // k = 3: mean+mean+covariance targets drawn as positive convex
    // combinations, so they are reachable by construction.
    let mut worst_moment = 0.0f64;
    for trial in 0..20 {
        let mut rng = TestRng::new(7000 + trial);
        let n = rng.usize_in(20, 100);
        let x: Vec<f64> = (0..n).map(|_| rng.unit()).collect();
        let y: Vec<f64> = x.iter().map(|&v| 0.5 * v + 0.5 * rng.unit()).collect();
        let preds: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
        let ts = TestSet::new(
            vec![x.clone(), y.clone()],
            vec!["x".into(), "y".into()],
            preds.clone(),
            preds,
            Task::Binary,
        )
        .unwrap();
        let raw: Vec<f64> = (0..n).map(|_| rng.range(0.05, 1.0)).collect();
        let total: f64 = raw.iter().sum();
        let combo = |col: &dyn Fn(usize) -> f64| -> f64 {
            (0..n).map(|i| col(i) * raw[i] / total).sum()
        };
        let tx = combo(&|i| x[i]);
        let ty = combo(&|i| y[i]);
        let txy = combo(&|i| x[i] * y[i]);
        let spec = mean_cov_constraint(&ts, 0, 1, tx, ty, txy - tx * ty).unwrap();
        let w = solve_weights(&spec, &SolverOptions::default())
            .expect("reachable k=3 target must solve");
        for (j, &t) in spec.target().iter().enumerate() {
            let achieved =
                kahan_sum(w.lambdas.iter().zip(&spec.phi()[j]).map(|(&l, &v)| l * v))
                    / n as f64;
            let (lo, hi) = spec.bounds()[j];
            let tol = TOL_ABS + TOL_REL * (hi - lo);
            worst_moment = worst_moment.max(((achieved - t) / tol).abs());
        }
    }
    let k3_pass = worst_moment <= 1.0;

    let pass = k1_pass && k3_pass;
    report(
        3,
        "oracle equivalence",
        pass,
        &format!(
            "k=1: worst weight gap vs grid oracle {worst:.2e} (<= {TOL_ORACLE_WEIGHT:.0e}); \
             k=3: worst moment error {worst_moment:.3} of tolerance"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_closed_form_two_point_tilt() {
    let _serial = serial_guard();
    let spec = ConstraintSpec::new(vec![vec![0.0, 1.0]], vec![0.75], vec!["x".into()]).unwrap();
    let w = solve_weights(&spec, &SolverOptions::default()).unwrap();
    let xi_err = (w.dual.xi[0] - 3f64.ln()).abs();
    let l0_err = (w.lambdas[0] - 0.5).abs();
    let l1_err = (w.lambdas[1] - 1.5).abs();
    let kl_err = (w.kl - (0.75 * 3f64.ln() - 2f64.ln())).abs();
    let pass = xi_err <= TOL_CLOSED_FORM
        && l0_err <= TOL_CLOSED_FORM
        && l1_err <= TOL_CLOSED_FORM
        && kl_err <= TOL_CLOSED_FORM;
    report(
        4,
        "closed-form two-point tilt",
        pass,
        &format!(
            "|xi - ln 3| = {xi_err:.2e}, |lambda - (0.5, 1.5)| = ({l0_err:.2e}, {l1_err:.2e}), \
             |kl - 0.130812...| = {kl_err:.2e} (all <= {TOL_CLOSED_FORM:.0e})"
        ),
    );
    assert!(pass);
}

fn baseline_weights(ts: &TestSet<f64>, j0: usize) -> tiltsweep_core::WeightVector {
    let stats = ts.column_stats(j0).unwrap();
    let spec = mean_constraint(ts, j0, stats.mean).unwrap();
    solve_weights(&spec, &SolverOptions::default()).unwrap()
}

#[test]
fn criterion_5_baseline_identity() {
    let _serial = serial_guard();
    let mut rng = TestRng::new(505);
    let mut worst = 0.0f64;

    // binary
    for _ in 0..50 {
        let n = rng.usize_in(40, 200);
        let col: Vec<f64> = (0..n).map(|_| rng.range(-2.0, 2.0)).collect();
        let preds: Vec<f64> = (0..n).map(|_| (rng.unit() < 0.5) as u8 as f64).collect();
        let truths: Vec<f64> = (0..n).map(|_| (rng.unit() < 0.5) as u8 as f64).collect();
        if !truths.contains(&1.0) || !truths.contains(&0.0) {
            continue;
        }
        let ts = TestSet::new(
            vec![col],
            vec!["x".into()],
            preds.clone(),
            truths.clone(),
            Task::Binary,
        )
        .unwrap();
        let w = baseline_weights(&ts, 0);

        let miss = preds.iter().zip(&truths).filter(|(p, t)| p != t).count() as f64 / n as f64;
        let p1 = preds.iter().filter(|&&p| p == 1.0).count() as f64 / n as f64;
        let pos = truths.iter().filter(|&&t| t == 1.0).count() as f64;
        let neg = n as f64 - pos;
        let tp = preds
            .iter()
            .zip(&truths)
            .filter(|(&p, &t)| p == 1.0 && t == 1.0)
            .count() as f64;
        let fp = preds
            .iter()
            .zip(&truths)
            .filter(|(&p, &t)| p == 1.0 && t == 0.0)
            .count() as f64;

        worst = worst.max((indicators::error_rate(&w, &ts).unwrap() - miss).abs());
        worst = worst.max((indicators::prop_predicted(&w, &ts, 1).unwrap() - p1).abs());
        let (fpr, tpr) = indicators::fpr_tpr(&w, &ts).unwrap();
        worst = worst.max((fpr - fp / neg).abs());
        worst = worst.max((tpr - tp / pos).abs());
    }

    // multiclass
    for _ in 0..50 {
        let n = rng.usize_in(40, 200);
        let k = rng.usize_in(3, 5);
        let col: Vec<f64> = (0..n).map(|_| rng.range(-2.0, 2.0)).collect();
        let preds: Vec<f64> = (0..n).map(|_| rng.usize_in(0, k - 1) as f64).collect();
        let truths: Vec<f64> = (0..n).map(|_| rng.usize_in(0, k - 1) as f64).collect();
        let ts = TestSet::new(
            vec![col],
            vec!["x".into()],
            preds.clone(),
            truths.clone(),
            Task::Multiclass { classes: k },
        )
        .unwrap();
        let w = baseline_weights(&ts, 0);
        let miss = preds.iter().zip(&truths).filter(|(p, t)| p != t).count() as f64 / n as f64;
        worst = worst.max((indicators::error_rate(&w, &ts).unwrap() - miss).abs());
        for class in 0..k {
            let frac = preds.iter().filter(|&&p| p == class as f64).count() as f64 / n as f64;
            worst =
                worst.max((indicators::prop_predicted(&w, &ts, class).unwrap() - frac).abs());
        }
    }

    // regression
    for _ in 0..50 {
        let n = rng.usize_in(40, 200);
        let col: Vec<f64> = (0..n).map(|_| rng.range(-2.0, 2.0)).collect();
        let truths: Vec<f64> = (0..n).map(|_| rng.range(-3.0, 3.0)).collect();
        let preds: Vec<f64> = truths.iter().map(|&t| t + rng.range(-0.5, 0.5)).collect();
        let ts = TestSet::new(
            vec![col],
            vec!["x".into()],
            preds.clone(),
            truths.clone(),
            Task::Regression,
        )
        .unwrap();
        let w = baseline_weights(&ts, 0);
        let mean: f64 = preds.iter().sum::<f64>() / n as f64;
        let var: f64 = preds.iter().map(|&p| (p - mean) * (p - mean)).sum::<f64>() / n as f64;
        let rmse: f64 = (preds
            .iter()
            .zip(&truths)
            .map(|(&p, &t)| (p - t) * (p - t))
            .sum::<f64>()
            / n as f64)
            .sqrt();
        worst = worst.max((indicators::regression_mean(&w, &ts).unwrap() - mean).abs());
        worst = worst.max((indicators::regression_variance(&w, &ts).unwrap() - var).abs());
        worst = worst.max((indicators::regression_rmse(&w, &ts).unwrap() - rmse).abs());
    }

    // ROC baseline crossing: the tau = 0 operating point is identical for
    // every swept variable.
    let n = 120;
    let cols: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..n).map(|_| rng.unit()).collect())
        .collect();
    let preds: Vec<f64> = (0..n).map(|_| (rng.unit() < 0.5) as u8 as f64).collect();
    let truths: Vec<f64> = (0..n).map(|_| (rng.unit() < 0.5) as u8 as f64).collect();
    let ts = TestSet::new(
        cols,
        vec!["a".into(), "b".into(), "c".into()],
        preds,
        truths,
        Task::Binary,
    )
    .unwrap();
    let cfg = SweepConfig {
        tau_grid: vec![-0.5, 0.0, 0.5],
        alpha: 0.05,
        ..SweepConfig::default()
    };
    let mut crossing = true;
    let mut reference = None;
    for j in 0..3 {
        let roc = sweep::roc_sweep(&ts, j, &cfg).unwrap();
        let base = roc.iter().find(|p| p.tau == 0.0).expect("baseline point");
        match reference {
            None => reference = Some((base.fpr, base.tpr)),
            Some(r) => crossing &= r == (base.fpr, base.tpr),
        }
    }

    let pass = worst <= TOL_BASELINE && crossing;
    report(
        5,
        "baseline identity at tau = 0",
        pass,
        &format!(
            "worst indicator deviation {worst:.2e} (<= {TOL_BASELINE:.0e}); \
             ROC tau=0 points coincide across variables: {crossing}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_synthetic_recovery() {
    let _serial = serial_guard();
    let started = Instant::now();
    let spec = tiltsweep_core::SynthSpec {
        n: 100_000,
        beta: vec![-4.0, 2.0, 0.0, 2.0, 4.0],
        seed: 20_240_601,
        law: harness::RegressorLaw::Uniform01,
    };
    let ts = harness::gen_logistic(&spec).unwrap();
    let cfg = SweepConfig {
        tau_grid: sweep::default_tau_grid(21),
        alpha: 0.05,
        ..SweepConfig::default()
    };
    let res = sweep::sweep(&ts, &cfg).unwrap();

    // Least-squares slope of P1 against tau, per variable.
    let mut slopes = Vec::new();
    for var in &res.variables {
        let points: Vec<(f64, f64)> = var
            .cells
            .iter()
            .filter_map(|c| c.value("p1").map(|v| (c.tau(), v)))
            .collect();
        assert!(points.len() >= 15, "variable {} mostly skipped", var.name);
        let m = points.len() as f64;
        let mean_t: f64 = points.iter().map(|p| p.0).sum::<f64>() / m;
        let mean_v: f64 = points.iter().map(|p| p.1).sum::<f64>() / m;
        let cov: f64 = points
            .iter()
            .map(|p| (p.0 - mean_t) * (p.1 - mean_v))
            .sum();
        let var_t: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.0 - mean_t)).sum();
        slopes.push(cov / var_t);
    }
    let elapsed = started.elapsed().as_secs_f64();

    let signs_ok = slopes[0] < 0.0
        && slopes[1] > 0.0
        && slopes[2].abs() <= TOL_NULL_SLOPE
        && slopes[3] > 0.0
        && slopes[4] > 0.0;
    let hierarchy_ok = slopes[0].abs().min(slopes[4].abs())
        > slopes[1].abs().max(slopes[3].abs())
        && slopes[1].abs().min(slopes[3].abs()) > slopes[2].abs();
    let within_budget = elapsed < BUDGET_RECOVERY_SECS;
    let pass = signs_ok && hierarchy_ok && within_budget;
    report(
        6,
        "synthetic coefficient recovery",
        pass,
        &format!(
            "P1 slopes {:?} -> signs (-,+,0,+,+) {signs_ok}, |slope| hierarchy |4| > |2| > |0| \
             {hierarchy_ok}, {elapsed:.1} s (< {BUDGET_RECOVERY_SECS} s)",
            slopes.iter().map(|s| (s * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

fn timed_sweep(n: usize, p: usize) -> f64 {
    let ts = harness::gen_scaling::<f64>(n, p, 99).unwrap();
    let cfg = SweepConfig {
        tau_grid: sweep::default_tau_grid(21),
        alpha: 0.05,
        parallel: false,
        ..SweepConfig::default()
    };
    // median of three runs
    let mut times: Vec<f64> = (0..3)
        .map(|_| {
            let started = Instant::now();
            let res = sweep::sweep(&ts, &cfg).unwrap();
            assert_eq!(res.total_skipped(), 0);
            started.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times[1]
}

#[test]
fn criterion_7_complexity_scaling() {
    let _serial = serial_guard();
    let base = timed_sweep(10_000, 10);
    let wide = timed_sweep(10_000, 100);
    let tall = timed_sweep(100_000, 10);
    let ratio_p = wide / base;
    let ratio_n = tall / base;
    let pass = base < BUDGET_BASE_SWEEP_SECS
        && (SCALING_RATIO_LO..=SCALING_RATIO_HI).contains(&ratio_p)
        && (SCALING_RATIO_LO..=SCALING_RATIO_HI).contains(&ratio_n);
    report(
        7,
        "O(np) complexity scaling",
        pass,
        &format!(
            "base (p=10, n=1e4) {base:.3} s (< {BUDGET_BASE_SWEEP_SECS} s); \
             10x p ratio {ratio_p:.1}, 10x n ratio {ratio_n:.1} \
             (both within [{SCALING_RATIO_LO}, {SCALING_RATIO_HI}])"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_figures_out_of_scope_and_golden_fixture() {
    let _serial = serial_guard();
    // Figures 1-3 and the published score tables depend on externally
    // trained XGBoost / Random Forest / CNN models, which this engine
    // deliberately does not ship; their numbers are not reproducible here.
    // Correctness on arbitrary dumps is covered by criteria 1-5, and the
    // frozen fixture below locks the full pipeline output byte for byte.
    let fixture = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/golden_input.csv"
    );
    let golden = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/golden_sweep.csv"
    );
    let schema = tiltsweep_core::dataset::CsvSchema {
        prediction_column: "pred".into(),
        truth_column: "y".into(),
        task: Task::Binary,
    };
    let ts: TestSet<f64> = TestSet::load_csv(fixture, &schema).unwrap();
    let cfg = SweepConfig {
        tau_grid: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
        alpha: 0.1,
        ..SweepConfig::default()
    };
    let res = sweep::sweep(&ts, &cfg).unwrap();
    let mut buf = Vec::new();
    res.write_long_csv(&mut buf).unwrap();
    let produced = String::from_utf8(buf).unwrap();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(golden, &produced).unwrap();
    }
    let expected = std::fs::read_to_string(golden).unwrap();
    let pass = produced == expected;
    report(
        8,
        "external-model figures out of scope; golden fixture locked",
        pass,
        &format!(
            "golden sweep output matches byte for byte: {pass} \
             ({} cells, {} skipped)",
            res.variables.iter().map(|v| v.cells.len()).sum::<usize>(),
            res.total_skipped()
        ),
    );
    assert!(pass);
}

// Shared-cell sanity for the suite itself: warm starts along the sweep chain
// agree with cold solves (exercised on the synthetic dump of criterion 6 at
// a reduced size, so a warm-start defect cannot silently bias the criteria).
#[test]
fn suite_sanity_warm_start_agreement() {
    let _serial = serial_guard();
    let spec = tiltsweep_core::SynthSpec {
        n: 2_000,
        beta: vec![-4.0, 2.0, 0.0, 2.0, 4.0],
        seed: 5,
        law: harness::RegressorLaw::Uniform01,
    };
    let ts = harness::gen_logistic(&spec).unwrap();
    let cfg = SweepConfig {
        tau_grid: sweep::default_tau_grid(9),
        alpha: 0.05,
        ..SweepConfig::default()
    };
    let res = sweep::sweep(&ts, &cfg).unwrap();
    for var in &res.variables {
        let stats = ts.column_stats(var.index).unwrap();
        for cell in &var.cells {
            if let Cell::Solved { tau, indicators: values, .. } = cell {
                let stress_spec = StressSpec {
                    variable: var.index,
                    tau: *tau,
                    alpha: cfg.alpha,
                };
                let target = stress::target_for_tau(&stats, &stress_spec).unwrap();
                let constraint = mean_constraint(&ts, var.index, target).unwrap();
                let cold = solve_weights(&constraint, &SolverOptions::default()).unwrap();
                let cold_values =
                    indicators::evaluate(&cold, &ts, RateConvention::Standard).unwrap();
                for ((name, warm_v), (_, cold_v)) in
                    values.named().iter().zip(cold_values.named())
                {
                    assert!(
                        (warm_v - cold_v).abs() <= 1e-9,
                        "{}: warm {warm_v} vs cold {cold_v} for {name} at tau {tau}",
                        var.name
                    );
                }
            }
        }
    }
}
