//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process fails if any criterion does.
//!
//! `ACCEPTANCE_ONLY=3,5` restricts the run to the listed criteria.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use faultcurve::collector::{self, TargetDistribution};
use faultcurve::curves::{self, AggregateCurve, Dataset};
use faultcurve::fitting::{self, FitConfig};
use faultcurve::harness::{self, BoundedStack, DynSubject, FilterPolicy, SessionConfig};
use faultcurve::models::{self, ModelId};
use faultcurve::stats::{self, Method};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Outcome;

fn main() {
    let only: Option<BTreeSet<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let criteria: [(&str, Check, Duration); 10] = [
        ("coupon-collector exactness", collector_exactness, Duration::from_secs(60)),
        ("analytic detection curve", detection_curve, Duration::from_secs(60)),
        ("fit recovery", fit_recovery, Duration::from_secs(300)),
        ("gradient correctness", gradient_correctness, Duration::MAX),
        ("regime reproduction", regime_reproduction, Duration::from_secs(600)),
        ("ladder monotonicity", ladder_monotonicity, Duration::MAX),
        ("wilcoxon correctness", wilcoxon_correctness, Duration::MAX),
        ("degenerate-curve semantics", degenerate_curves, Duration::MAX),
        ("end-to-end determinism", end_to_end_determinism, Duration::MAX),
        ("harness ground truth", harness_ground_truth, Duration::from_secs(300)),
    ];

    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let number = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&number)) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = result.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget_note = if in_time { String::new() } else { format!("; over the {budget:?} budget") };
        println!(
            "criterion {number:>2} {name}: {} ({}; {:.1}s{budget_note})",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

/// Draw-by-draw simulation of the draws needed to hit every target.
fn naive_tau(p: &[f64], runs: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let cumulative: Vec<f64> = p
        .iter()
        .scan(0.0, |acc, &q| {
            *acc += q;
            Some(*acc)
        })
        .collect();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..runs {
        let mut seen = vec![false; p.len()];
        let mut missing = p.len();
        let mut draws = 0u64;
        while missing > 0 {
            draws += 1;
            let u: f64 = rng.random();
            if let Some(i) = cumulative.iter().position(|&c| u < c) {
                if !seen[i] {
                    seen[i] = true;
                    missing -= 1;
                }
            }
        }
        let d = draws as f64;
        sum += d;
        sum_sq += d * d;
    }
    let n = runs as f64;
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean) / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn collector_exactness() -> Outcome {
    let two = collector::uniform_distribution(2, 0.5).unwrap();
    let tau2 = collector::expected_tau_exact(&two, 2).unwrap();
    if (tau2 - 3.0).abs() > 1e-12 {
        return outcome(false, format!("uniform two-target tau = {tau2}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.random_range(2..=10);
        let theta = rng.random_range(0.5..=1.0);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.0)).collect();
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| theta * x / total).collect();
        let dist = TargetDistribution::new(p.clone()).unwrap();
        let exact = collector::expected_tau_exact(&dist, n).unwrap();
        let (mean, se) = naive_tau(&p, 1_000_000, &mut rng);
        let z = (exact - mean).abs() / se;
        worst = worst.max(z);
        if z > 3.0 {
            return outcome(false, format!("N = {n}: exact {exact}, Monte Carlo {mean} +- {se}"));
        }
    }
    outcome(true, format!("tau(2) = 3; worst deviation {worst:.2} standard errors over 10 distributions"))
}

fn detection_curve() -> Outcome {
    let cases = [
        ("uniform", collector::uniform_distribution(8, 0.05).unwrap(), 1000),
        ("geometric", collector::geometric_distribution(8, 0.5, 2.0).unwrap(), 1000),
    ];
    let runs = 100_000;
    let mut worst: f64 = 0.0;
    for (name, dist, draws) in cases {
        let sim = collector::simulate_detection_curve(&dist, draws, runs, 42).unwrap();
        for (t, &got) in sim.expected_detected.iter().enumerate() {
            let expected = collector::expected_detected_at(&dist, t as u64);
            let sigma = (collector::detected_variance_bound(&dist, t as u64) / runs as f64).sqrt();
            let diff = (got - expected).abs();
            if diff > 3.0 * sigma + 1e-12 {
                return outcome(false, format!("{name}, t = {t}: simulated {got}, expected {expected}, sigma {sigma}"));
            }
            if sigma > 0.0 {
                worst = worst.max(diff / sigma);
            }
        }
    }
    outcome(true, format!("worst pointwise deviation {worst:.2} sigma"))
}

fn random_params(model: ModelId, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    match model {
        ModelId::Phi1 => vec![u(1.0, 50.0), u(10.0, 5000.0)],
        ModelId::Phi2 => {
            let mut p: Vec<f64> = (0..4).map(|_| u(-2.0, 2.0)).collect();
            p.extend((0..4).map(|_| u(0.1, 2.0)));
            p
        }
        ModelId::Phi3 => vec![u(0.5, 3.0), u(0.2, 2.0), u(-1.0, 1.0), u(0.1, 2.0), u(0.2, 2.0), u(0.5, 3.0)],
        ModelId::Phi4 | ModelId::Lam6 => vec![u(0.5, 5.0), u(0.3, 3.0), u(-1.0, 1.0)],
        ModelId::Phi6 => vec![u(-3.0, 3.0), u(0.2, 3.0), u(1.5, 9.0), u(-2.0, 2.0)],
        ModelId::Phi8 => vec![u(0.1, 5.0), u(0.1, 1.5), u(-1.0, 1.0)],
        ModelId::Lam7 => vec![u(0.5, 5.0), u(0.3, 4.5), u(-1.0, 1.0)],
        other => (0..other.param_count()).map(|_| u(-3.0, 3.0)).collect(),
    }
}

fn fit_recovery() -> Outcome {
    let targets = [
        ModelId::Phi1,
        ModelId::Phi4,
        ModelId::Phi5,
        ModelId::Phi7,
        ModelId::Phi8,
        ModelId::Lam1,
        ModelId::Lam2,
        ModelId::Lam3,
        ModelId::Lam4,
        ModelId::Lam5,
    ];
    let cfg = FitConfig::default();
    let xs: Vec<f64> = fitting::grid_indices(10_000, cfg.grid_points).into_iter().map(|k| k as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut summary = Vec::new();
    let mut pass = true;
    for model in targets {
        let mut good = 0;
        for _ in 0..20 {
            let p = random_params(model, &mut rng);
            let ys: Vec<f64> = xs.iter().map(|&x| models::evaluate(model, &p, x).unwrap()).collect();
            let fit = fitting::fit_points(&xs, &ys, model, &cfg).unwrap();
            if fit.r_squared >= 1.0 - 1e-6 {
                good += 1;
            }
        }
        pass &= good >= 19;
        summary.push(format!("{model} {good}/20"));
    }
    outcome(pass, summary.join(", "))
}

fn gradient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for model in ModelId::ALL {
        for _ in 0..100 {
            let p = random_params(model, &mut rng);
            let x_max: f64 = if model == ModelId::Phi6 { 50.0 } else { 1000.0 };
            let x = (rng.random_range(0.5f64.ln()..x_max.ln())).exp();
            let g = models::gradient(model, &p, x).unwrap();
            for i in 0..p.len() {
                let h = 1e-6 * p[i].abs().max(1.0);
                let mut hi = p.clone();
                let mut lo = p.clone();
                hi[i] += h;
                lo[i] -= h;
                let fd = (models::evaluate(model, &hi, x).unwrap() - models::evaluate(model, &lo, x).unwrap()) / (2.0 * h);
                // Rounding in the two evaluations limits the accuracy of the
                // difference quotient to about eps * |f| / h.
                let f_scale = models::evaluate(model, &p, x).unwrap().abs();
                let noise = 16.0 * f64::EPSILON * f_scale / h;
                let scale = g[i].abs().max(fd.abs());
                let err = ((g[i] - fd).abs() - noise).max(0.0);
                let rel = if scale == 0.0 { 0.0 } else { err / scale };
                worst = worst.max(rel);
                if rel > 1e-4 {
                    return outcome(false, format!("{model} d/dp{i} at x = {x}, p = {p:?}: analytic {}, differences {fd}", g[i]));
                }
            }
        }
    }
    outcome(true, format!("16 models x 100 points; worst relative error {worst:.1e}"))
}

/// Twenty seeded geometric-decay collector curves.
fn regime_corpus() -> &'static [AggregateCurve] {
    static CORPUS: OnceLock<Vec<AggregateCurve>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let dist = collector::geometric_distribution(8, 0.4, 10.0).unwrap();
        (0..20)
            .map(|seed| {
                collector::simulate_detection_curve(&dist, 1_000_000, 30, seed)
                    .unwrap()
                    .into_aggregate()
            })
            .collect()
    })
}

fn regime_reproduction() -> Outcome {
    let cfg = FitConfig::default();
    let ids = [ModelId::Phi4, ModelId::Phi5, ModelId::Phi7, ModelId::Phi8];
    let mut wins = 0;
    let mut scores = BTreeMap::new();
    for (i, curve) in regime_corpus().iter().enumerate() {
        let ranking = fitting::rank_models(curve, &ids, ModelId::Phi5, &cfg).unwrap();
        let pos = |m| ranking.position(m).unwrap();
        let polylog = pos(ModelId::Phi4).min(pos(ModelId::Phi5));
        if polylog < pos(ModelId::Phi7) && polylog < pos(ModelId::Phi8) {
            wins += 1;
        }
        let r2 = |m| ranking.results.iter().find(|r| r.model == m).unwrap().r_squared;
        scores.insert(format!("curve_{i:02}"), (r2(ModelId::Phi5), r2(ModelId::Phi7)));
    }
    let cmp = stats::compare_models_across_subjects(&scores).unwrap();
    let effect = cmp.test.effect_size;
    outcome(
        wins >= 18 && effect >= 0.3,
        format!(
            "polylog above both polynomials in {wins}/20; phi5 vs phi7 on R2: effect {effect:.3}, p = {:.2e}",
            cmp.test.p_value
        ),
    )
}

fn ladder_monotonicity() -> Outcome {
    let cfg = FitConfig::default();
    for (i, curve) in regime_corpus().iter().enumerate() {
        let ladder = fitting::fit_polylog_ladder(curve, &cfg).unwrap();
        let r2: Vec<f64> = ladder.iter().map(|f| f.r_squared).collect();
        if r2.windows(2).any(|w| w[1].partial_cmp(&w[0]).is_none_or(|o| o.is_lt())) {
            return outcome(false, format!("curve {i}: R2 along the ladder {r2:?}"));
        }
    }
    outcome(true, "R2 non-decreasing from lam1 to lam5 on all 20 corpus curves")
}

/// Two-sided exact p by enumerating all sign assignments over average ranks.
fn enumeration_p(d: &[f64]) -> f64 {
    let nonzero: Vec<f64> = d.iter().copied().filter(|&v| v != 0.0).collect();
    let n = nonzero.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| nonzero[a].abs().total_cmp(&nonzero[b].abs()));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && nonzero[order[j + 1]].abs() == nonzero[order[i]].abs() {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    let w_plus: f64 = (0..n).filter(|&k| nonzero[k] > 0.0).map(|k| ranks[k]).sum();
    let total: f64 = ranks.iter().sum();
    let observed = w_plus.min(total - w_plus);
    let mut at_most = 0u64;
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| ranks[k]).sum();
        if w <= observed + 1e-9 {
            at_most += 1;
        }
    }
    (2.0 * at_most as f64 / (1u64 << n) as f64).min(1.0)
}

fn wilcoxon_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let n = rng.random_range(1..=10);
        let integer_valued = case % 2 == 0;
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                if integer_valued {
                    rng.random_range(-4i32..=4) as f64
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
            .collect();
        let ys = vec![0.0; n];
        let r = stats::wilcoxon_signed_rank(&xs, &ys).unwrap();
        let oracle = enumeration_p(&xs);
        if r.method != Method::Exact || (r.p_value - oracle).abs() > 1e-12 {
            return outcome(false, format!("{xs:?}: p = {} ({}), enumeration gives {oracle}", r.p_value, r.method));
        }
    }

    // Hand-computed normal statistics, continuity-corrected and tie-corrected:
    //  a) six differences of +1: ranks all 3.5, W+ = 21, mean 10.5,
    //     var = 6*7*13/24 - (6^3-6)/48 = 18.375, Z = 10/sqrt(18.375), N = 6;
    //  b) 1,-2,3,4,-5,6,7,8: W+ = 29, mean 18, var = 8*9*17/24 = 51,
    //     Z = 10.5/sqrt(51), N = 8;
    //  c) one zero, one NaN pair, differences 2,2,-1,2: ranks 3,3,1,3, W+ = 9,
    //     mean 5, var = 4*5*9/24 - (3^3-3)/48 = 7, Z = 3.5/sqrt(7), N = 5.
    let fixed: [(&[f64], &[f64], f64, f64); 3] = [
        (&[1., 2., 3., 4., 5., 6.], &[0., 1., 2., 3., 4., 5.], 2.332847, 0.673435),
        (&[1., -2., 3., 4., -5., 6., 7., 8.], &[0.; 8], 1.470294, 0.367574),
        (&[0.5, 2., f64::NAN, 3., 1., 4.], &[0.5, 0., 1., 1., 2., 2.], 1.322876, 0.418330),
    ];
    for (xs, ys, z, effect) in fixed {
        let r = stats::wilcoxon_signed_rank(xs, ys).unwrap();
        if (r.z_statistic - z).abs() > 1e-6 || (r.effect_size - effect).abs() > 1e-6 {
            return outcome(false, format!("{xs:?}: Z = {}, effect {}", r.z_statistic, r.effect_size));
        }
    }
    outcome(true, "200 random cases match enumeration; 3 hand-computed Z values match")
}

fn cli(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_faultcurve"))
        .args(args)
        .env_remove("FAULTCURVE_OUT")
        .output()
        .expect("cli runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn degenerate_curves() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let logs = dir.path().join("logs");
    let report = dir.path().join("report");
    cli(&["harness", "--clean", "--subject", "bounded_stack", "-s", "3", "-t", "2000", "--out", path_str(&logs)]);
    cli(&["report", "--input", path_str(&logs), "--out", path_str(&report)]);

    let fits = fs::read_to_string(report.join("fits.csv")).unwrap();
    let r2: Vec<String> = fits.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().to_string()).collect();
    let r2_ok = !r2.is_empty() && r2.iter().all(|v| v == "NaN" || v == "-Inf");
    let summary = fs::read_to_string(report.join("summary.csv")).unwrap();
    let gamma = summary.lines().nth(1).unwrap().split(',').nth(5).unwrap().to_string();

    // The same semantics at library level.
    let zero = Dataset::new("zero", vec![curves::CountingCurve::zeros(50); 3]).unwrap();
    let lib_gamma = curves::summary_stats(&zero).mean_skew;
    let fit = fitting::fit(&curves::aggregate_mean(&zero), ModelId::Phi5, &FitConfig::default()).unwrap();

    let pass = r2_ok && gamma == "NaN" && lib_gamma.is_nan() && fit.r_squared.is_nan() && fit.rmse == 0.0;
    outcome(pass, format!("report R2 values {:?}; E[gamma] = {gamma}", r2.iter().collect::<BTreeSet<_>>()))
}

fn files_under(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn end_to_end_determinism() -> Outcome {
    let run = |root: &Path| {
        let logs = root.join("logs");
        let reports = root.join("reports");
        let (logs, reports) = (path_str(&logs), path_str(&reports));
        cli(&["harness", "--seed", "11", "-s", "4", "-t", "20000", "--out", logs]);
        cli(&["fit", "--seed", "5", "--input", logs, "--out", reports]);
        cli(&["compare", "--input", reports, "--out", reports]);
        files_under(root)
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run(a.path());
    let second = run(b.path());
    let same = first == second;
    let reports = first.keys().filter(|p| p.starts_with("reports")).count();
    outcome(same && reports > 0, format!("{} files compared, {reports} of them reports", first.len()))
}

fn harness_ground_truth() -> Outcome {
    let faulty = BoundedStack::new(true);
    let explored = harness::enumerate_reachable_faults(&faulty, 6, &harness::EXPLORATION_INTS, FilterPolicy::Contract);

    let draws = 100_000;
    let subjects: [&dyn DynSubject; 1] = [&faulty];
    let cfg = SessionConfig {
        draws,
        seed: 2024,
        ..SessionConfig::default()
    };
    let logs = harness::run_sessions(&subjects, 30, &cfg).unwrap();
    let found: BTreeSet<String> = logs.iter().flatten().filter(|e| e.counted).map(|e| e.signature.clone()).collect();
    let sessions: Vec<_> = logs.iter().map(|l| curves::build_curve(l, draws as usize).unwrap()).collect();
    let data = Dataset::new("bounded_stack", sessions).unwrap();
    let f = curves::summary_stats(&data).max_faults as usize;
    let fit = fitting::fit(&curves::aggregate_mean(&data), ModelId::Phi5, &FitConfig::default()).unwrap();

    let pass = f == explored.signatures.len() && found == explored.signatures && fit.r_squared >= 0.9;
    outcome(
        pass,
        format!(
            "enumeration to depth 6 finds {} faults over {} states; F = {f}; phi5 R2 = {:.4}",
            explored.signatures.len(),
            explored.states_visited,
            fit.r_squared
        ),
    )
}
