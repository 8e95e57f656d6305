//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails. Positional arguments select
//! criteria by number, e.g. `cargo test --test acceptance -- 2 5`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use levy_ou::estimators::{
    asymptotic_variance_mle, asymptotic_variance_mle_compound_poisson, jump_detection_confusion,
    jump_filtered_mle, least_squares, stationary_second_moment, EstimatorKind, FilterSpec,
};
use levy_ou::levy::{
    jump_variance_rate, sample_compound_poisson_increment, sample_gamma_increment,
    sample_wiener_increment, JumpFamily, LevyModel,
};
use levy_ou::monte_carlo::{ks_normal_check, replicate, run_campaign, McConfig};
use levy_ou::ou::{simulate_path, ObservationGrid, OuModel};
use levy_ou::rng::RngStream;
use levy_ou::stats::{ks_two_sample, ks_two_sample_critical, mean_std};

use common::{chi_square_two_sample, cp_model, gamma_model, HEIGHT_STD};

const BETA: f64 = 0.3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn within_abs(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn within_rel(x: f64, target: f64, tol: f64) -> bool {
    (x / target - 1.0).abs() <= tol
}

fn rmse(xs: &[f64], truth: f64) -> f64 {
    (xs.iter().map(|x| (x - truth).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

struct TableRow {
    label: &'static str,
    model: OuModel,
    grid: ObservationGrid,
    reps: u64,
    mean: f64,
    mean_tol: f64,
    std: f64,
    filtered: f64,
}

fn table_rows(rows: &[TableRow], seed: u64) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        let cfg = McConfig::new(row.model, row.grid, row.reps, seed + k as u64)
            .with_filter(FilterSpec::Exponent(BETA));
        let s = run_campaign(&cfg).expect("campaign");
        let e = &s.estimators[0];
        let ok_mean = within_abs(e.mean, row.mean, row.mean_tol);
        let ok_std = within_rel(e.std_dev, row.std, 0.5);
        let ok_filt = within_rel(e.avg_filtered, row.filtered, 0.35);
        pass &= ok_mean && ok_std && ok_filt;
        parts.push(format!(
            "{}: mean {:.3} (target {}±{}{}) std {:.3} (target {}±50%{}) filtered {:.1} (target {}±35%{})",
            row.label,
            e.mean,
            row.mean,
            row.mean_tol,
            mark(ok_mean),
            e.std_dev,
            row.std,
            mark(ok_std),
            e.avg_filtered,
            row.filtered,
            mark(ok_filt),
        ));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        ""
    } else {
        " MISS"
    }
}

fn criterion_1() -> Outcome {
    let grid = ObservationGrid::from_horizon(20.0, 2000).unwrap();
    let rows = [
        TableRow { label: "lambda=1 a=2", model: cp_model(2.0, 1.0), grid, reps: 100, mean: 2.0, mean_tol: 0.15, std: 0.2, filtered: 13.2 },
        TableRow { label: "lambda=5 a=5", model: cp_model(5.0, 5.0), grid, reps: 100, mean: 4.8, mean_tol: 0.15, std: 0.2, filtered: 60.2 },
    ];
    table_rows(&rows, 1100)
}

fn criterion_2() -> Outcome {
    // The table's c column is the rate of a unit-intensity gamma driver.
    let grid = ObservationGrid::new(6667, 0.0015).unwrap();
    let rows = [
        TableRow { label: "c=0.5 a=2", model: gamma_model(2.0, 1.0, 0.5), grid, reps: 200, mean: 2.0, mean_tol: 0.2, std: 0.3, filtered: 23.7 },
        TableRow { label: "c=1 a=5", model: gamma_model(5.0, 1.0, 1.0), grid, reps: 200, mean: 5.0, mean_tol: 0.2, std: 0.6, filtered: 17.1 },
    ];
    table_rows(&rows, 1200)
}

fn criterion_3() -> Outcome {
    let model = cp_model(2.0, 1.0);
    let target = 4.0 / 3.0;
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, t, dt, seed) in [("T=70 dt=0.001", 70.0, 0.001, 1300), ("smoke T=30 dt=0.005", 30.0, 0.005, 1301)] {
        let grid = ObservationGrid::from_horizon(t, (t / dt).round() as usize).unwrap();
        let s = run_campaign(&McConfig::new(model, grid, 500, seed)).expect("campaign");
        let e = &s.estimators[0];
        let check = ks_normal_check(&e.standardized_errors, target).unwrap();
        pass &= check.pass;
        parts.push(format!(
            "{label}: KS {:.4} vs critical {:.4}{} (mean a_hat {:.3})",
            check.ks_statistic,
            check.critical_value,
            mark(check.pass),
            e.mean
        ));
    }
    Outcome { pass, detail: format!("N(0, 4/3) at 1%: {}", parts.join("; ")) }
}

fn criterion_4() -> Outcome {
    let grid = ObservationGrid::from_horizon(20.0, 4000).unwrap();
    let cfg = McConfig::new(cp_model(2.0, 10.0), grid, 500, 1400)
        .with_estimators(&[EstimatorKind::FilteredMle, EstimatorKind::Lse]);
    let s = run_campaign(&cfg).expect("campaign");
    let mle = s.get(EstimatorKind::FilteredMle).unwrap().std_dev;
    let lse = s.get(EstimatorKind::Lse).unwrap().std_dev;
    let ratio = lse / mle;
    Outcome {
        pass: (3.2..=6.0).contains(&ratio),
        detail: format!("std(LSE)/std(MLE) = {lse:.4}/{mle:.4} = {ratio:.3}, required [3.2, 6.0]"),
    }
}

fn criterion_5() -> Outcome {
    let grid = ObservationGrid::new(2000, 0.01).unwrap();
    let models = [
        cp_model(2.0, 0.0),
        cp_model(2.0, 1.0),
        cp_model(5.0, 10.0),
        gamma_model(2.0, 0.5, 1.0),
        gamma_model(5.0, 1.0, 0.5),
    ];
    let mut paths_checked = 0;
    let mut lse_mismatch = 0;
    let mut worst_decomp = 0.0f64;
    for (k, m) in models.iter().enumerate() {
        let results = replicate(1500 + k as u64, 50, |rng, _| {
            let path = simulate_path(m, &grid, rng);
            let off = jump_filtered_mle(&path, FilterSpec::Off).unwrap();
            let lse = least_squares(&path).unwrap();
            (off == lse && off.a_hat.to_bits() == lse.a_hat.to_bits(), path.max_decomposition_error())
        });
        for (same, err) in results {
            paths_checked += 1;
            lse_mismatch += usize::from(!same);
            worst_decomp = worst_decomp.max(err);
        }
    }
    let mut worst_avar = 0.0f64;
    for a in [0.5, 2.0, 5.0] {
        for sigma in [0.5, 1.0, 2.0] {
            for lambda in [0.5, 1.0, 5.0, 10.0] {
                for var in [0.5f64, 2.0] {
                    let jumps = JumpFamily::CompoundPoisson { intensity: lambda, height_std: var.sqrt() };
                    let m = OuModel::new(a, 0.0, LevyModel::new(sigma, jumps).unwrap()).unwrap();
                    let closed = asymptotic_variance_mle_compound_poisson(a, sigma, lambda, var);
                    let general = sigma * sigma / stationary_second_moment(&m);
                    let via_model = asymptotic_variance_mle(&m).unwrap();
                    worst_avar = worst_avar
                        .max((closed / general - 1.0).abs())
                        .max((via_model / general - 1.0).abs());
                }
            }
        }
    }
    let pass = lse_mismatch == 0 && worst_decomp <= 1e-10 && worst_avar <= 1e-12;
    Outcome {
        pass,
        detail: format!(
            "{paths_checked} paths: filter-off vs LSE mismatches {lse_mismatch}, max decomposition error {worst_decomp:.2e} (<= 1e-10), max AVAR relative gap {worst_avar:.2e} (<= 1e-12)"
        ),
    }
}

fn sample_var(xs: &[f64]) -> f64 {
    let (_, sd) = mean_std(xs);
    sd * sd
}

fn criterion_6() -> Outcome {
    const DRAWS: usize = 100_000;
    let start = Instant::now();
    let mut checks: Vec<(String, bool)> = Vec::new();
    let mut rng = RngStream::new(1600, 0);

    for (sigma, dt) in [(1.0, 0.001), (2.0, 0.25)] {
        let xs: Vec<f64> = (0..DRAWS).map(|_| sample_wiener_increment(&mut rng, sigma, dt).unwrap()).collect();
        let v = sample_var(&xs);
        let target = sigma * sigma * dt;
        checks.push((format!("wiener var {v:.4e}/{target:.4e}"), within_rel(v, target, 0.05)));
    }

    let long = sample_compound_poisson_increment(&mut rng, 1.0, 1.0, 1e4).unwrap().count() as f64;
    checks.push((format!("poisson count {long}"), (long - 1e4).abs() <= 300.0));

    let xs: Vec<f64> = (0..DRAWS)
        .map(|_| sample_compound_poisson_increment(&mut rng, 5.0, HEIGHT_STD, 1.0).unwrap().total)
        .collect();
    let v = sample_var(&xs);
    checks.push((format!("cp var {v:.4}/10"), within_rel(v, 10.0, 0.05)));

    let xs: Vec<f64> = (0..DRAWS).map(|_| sample_gamma_increment(&mut rng, 1.0, 1.0, 0.5).unwrap()).collect();
    let (m, _) = mean_std(&xs);
    checks.push((format!("gamma mean {m:.4}/0.5"), within_rel(m, 0.5, 0.03) && xs.iter().all(|&x| x >= 0.0)));
    let xs: Vec<f64> = (0..DRAWS).map(|_| sample_gamma_increment(&mut rng, 0.5, 2.0, 1.0).unwrap()).collect();
    let v = sample_var(&xs);
    checks.push((format!("gamma var {v:.4}/0.125"), within_rel(v, 0.125, 0.05)));

    let dt = 0.1;
    for jumps in [
        JumpFamily::CompoundPoisson { intensity: 1.0, height_std: HEIGHT_STD },
        JumpFamily::Gamma { c: 1.0, rate: 1.0 },
    ] {
        let model = LevyModel::new(1.0, jumps).unwrap();
        let xs: Vec<f64> = (0..DRAWS)
            .map(|_| match jumps {
                JumpFamily::CompoundPoisson { intensity, height_std } => {
                    sample_compound_poisson_increment(&mut rng, intensity, height_std, dt).unwrap().total
                }
                JumpFamily::Gamma { c, rate } => sample_gamma_increment(&mut rng, c, rate, dt).unwrap(),
                JumpFamily::None => 0.0,
            })
            .collect();
        let rate = sample_var(&xs) / dt;
        let target = jump_variance_rate(&model);
        checks.push((format!("{} variance rate {rate:.4}/{target:.4}", jumps.name()), within_rel(rate, target, 0.05)));
    }

    let n = 10_000;
    let one: Vec<u64> = (0..n)
        .map(|_| sample_compound_poisson_increment(&mut rng, 1.5, 1.0, 2.0).unwrap().count() as u64)
        .collect();
    let two: Vec<u64> = (0..n)
        .map(|_| {
            let a = sample_compound_poisson_increment(&mut rng, 1.5, 1.0, 1.0).unwrap().count();
            let b = sample_compound_poisson_increment(&mut rng, 1.5, 1.0, 1.0).unwrap().count();
            (a + b) as u64
        })
        .collect();
    let (stat, crit) = chi_square_two_sample(&one, &two);
    checks.push((format!("thinning chi2 {stat:.2}<{crit:.2}"), stat < crit));

    let summed: Vec<f64> = (0..n)
        .map(|_| sample_gamma_increment(&mut rng, 0.7, 1.5, 0.3).unwrap() + sample_gamma_increment(&mut rng, 0.7, 1.5, 0.9).unwrap())
        .collect();
    let whole: Vec<f64> = (0..n).map(|_| sample_gamma_increment(&mut rng, 0.7, 1.5, 1.2).unwrap()).collect();
    let d = ks_two_sample(&summed, &whole);
    let crit = ks_two_sample_critical(n, n);
    checks.push((format!("gamma additivity KS {d:.4}<{crit:.4}"), d < crit));

    let elapsed = start.elapsed().as_secs_f64();
    checks.push((format!("runtime {elapsed:.1}s<30s"), elapsed < 30.0));

    let pass = checks.iter().all(|c| c.1);
    let detail = checks
        .iter()
        .map(|(s, ok)| format!("{s}{}", mark(*ok)))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome { pass, detail }
}

fn criterion_7() -> Outcome {
    let model = cp_model(2.0, 1.0);
    let errs: Vec<f64> = [10.0, 40.0, 160.0]
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let grid = ObservationGrid::from_horizon(t, (t / 0.01).round() as usize).unwrap();
            let s = run_campaign(&McConfig::new(model, grid, 100, 1700 + k as u64)).expect("campaign");
            rmse(&s.estimators[0].estimates, 2.0)
        })
        .collect();
    let f1 = errs[0] / errs[1];
    let f2 = errs[1] / errs[2];
    let pass = errs[0] > errs[1] && errs[1] > errs[2] && (1.5..=2.7).contains(&f1) && (1.5..=2.7).contains(&f2);
    Outcome {
        pass,
        detail: format!(
            "RMSE at T=10/40/160: {:.4}/{:.4}/{:.4}, factors {f1:.3}, {f2:.3}, required [1.5, 2.7]",
            errs[0], errs[1], errs[2]
        ),
    }
}

fn criterion_8() -> Outcome {
    let model = cp_model(2.0, 1.0);
    let grid = ObservationGrid::from_horizon(20.0, 2000).unwrap();
    let fractions = replicate(1800, 100, |rng, _| {
        let path = simulate_path(&model, &grid, rng);
        let c = jump_detection_confusion(&path, FilterSpec::Exponent(BETA)).unwrap();
        c.misclassified() as f64 / c.total() as f64
    });
    let (avg, _) = mean_std(&fractions);
    Outcome {
        pass: avg < 0.02,
        detail: format!("misclassified fraction {:.3}% (< 2%)", 100.0 * avg),
    }
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "finite-activity table", criterion_1),
        (2, "infinite-activity table", criterion_2),
        (3, "efficiency CLT", criterion_3),
        (4, "MLE vs LSE spread", criterion_4),
        (5, "exact identities", criterion_5),
        (6, "sampler moments", criterion_6),
        (7, "consistency trend", criterion_7),
        (8, "jump filter correctness", criterion_8),
    ];
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (k, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] criterion {k} ({name}, {:.1}s): {}",
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        failed += usize::from(!outcome.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
