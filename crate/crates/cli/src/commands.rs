use std::collections::BTreeMap;
use std::path::Path;

use faultcurve::collector::{self, TargetDistribution};
use faultcurve::curves::{self, AggregateCurve, Dataset};
use faultcurve::fitting::{self, FitConfig, FitResult, Ranking};
use faultcurve::harness::{self, SessionConfig};
use faultcurve::models::ModelId;
use faultcurve::stats;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{self, sci, ManifestRow};
use crate::{Aggregate, Cli, Command, Common, Distribution, FitArgs, HarnessArgs, Score, SimulateArgs};

pub fn run(cli: &Cli) -> Result<()> {
    let common = &cli.common;
    match &cli.command {
        Command::Harness(args) => harness(common, args),
        Command::Simulate(args) => simulate(common, args),
        Command::Fit(args) => fit(common, args).map(|_| ()),
        Command::Rank(args) => rank(common, &args.input),
        Command::Compare(args) => compare(common, &args.input.input, args.score),
        Command::Stats(args) => summary(common, &args.input),
        Command::Report(args) => {
            fit(common, &args.fit)?;
            compare(common, &common.out, args.score)?;
            summary(common, &args.fit.input.input)
        }
    }
}

#[derive(Serialize)]
struct RunManifest {
    source: &'static str,
    seed: u64,
    parameters: BTreeMap<&'static str, String>,
    subjects: Vec<ManifestEntry>,
}

#[derive(Serialize)]
struct ManifestEntry {
    subject: String,
    sessions: usize,
    draws_per_session: usize,
    files: Vec<String>,
}

fn write_run_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    output::write_atomic(&dir.join(output::RUN_MANIFEST), |w| writeln!(w, "{json}"))
}

fn harness(common: &Common, args: &HarnessArgs) -> Result<()> {
    let names: Vec<String> = if args.subjects.is_empty() {
        harness::builtin_names().iter().map(|s| s.to_string()).collect()
    } else {
        args.subjects.clone()
    };
    let sessions = args.sessions as usize;
    let cfg = SessionConfig {
        draws: args.draws,
        seed: common.seed,
        policy: common.policy,
        ..SessionConfig::default()
    };

    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for name in &names {
        let subject = harness::builtin(name, !args.clean).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown subject `{name}`; choose from {}",
                harness::builtin_names().join(", ")
            ))
        })?;
        let logs = harness::run_sessions(&[subject.as_ref()], sessions, &cfg)?;
        let mut files = Vec::with_capacity(sessions);
        for (i, log) in logs.iter().enumerate() {
            let path = output::session_file(&common.out, name, i);
            output::write_event_log(&path, log)?;
            files.push(format!("{name}/session_{i:03}.csv"));
        }
        rows.push(ManifestRow {
            subject: name.clone(),
            sessions,
            draws_per_session: args.draws as usize,
        });
        entries.push(ManifestEntry {
            subject: name.clone(),
            sessions,
            draws_per_session: args.draws as usize,
            files,
        });
    }

    output::write_manifest(&common.out, &rows)?;
    let parameters = BTreeMap::from([
        ("policy", common.policy.to_string()),
        ("variant", if args.clean { "clean" } else { "faulty" }.to_string()),
    ]);
    write_run_manifest(
        &common.out,
        &RunManifest {
            source: "harness",
            seed: common.seed,
            parameters,
            subjects: entries,
        },
    )
}

fn simulate(common: &Common, args: &SimulateArgs) -> Result<()> {
    let dist: TargetDistribution = match args.distribution {
        Distribution::Uniform => collector::uniform_distribution(args.targets, args.theta)?,
        Distribution::Geometric => collector::geometric_distribution(args.targets, args.theta, args.base)?,
    };
    let kind = match args.distribution {
        Distribution::Uniform => "uniform",
        Distribution::Geometric => "geometric",
    };
    let draws = args.draws as usize;
    let runs = args.runs as usize;

    if args.tau {
        let mut rows = Vec::with_capacity(dist.targets());
        for n in 1..=dist.targets() {
            rows.push(vec![n.to_string(), sci(collector::expected_tau_exact(&dist, n)?)]);
        }
        output::write_csv(&common.out.join("tau.csv"), &["n", "expected_tau"], &rows, &[])?;
    }

    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for c in 0..args.curves {
        let name = format!("{kind}_{c:03}");
        let curve = collector::simulate_detection_curve(&dist, draws, runs, common.seed.wrapping_add(c))?;
        output::write_dense_curve(&common.out.join(&name).join(output::DENSE_CURVE), &curve.expected_detected)?;
        rows.push(ManifestRow {
            subject: name.clone(),
            sessions: runs,
            draws_per_session: draws,
        });
        entries.push(ManifestEntry {
            files: vec![format!("{name}/{}", output::DENSE_CURVE)],
            subject: name,
            sessions: runs,
            draws_per_session: draws,
        });
    }

    output::write_manifest(&common.out, &rows)?;
    let parameters = BTreeMap::from([
        ("distribution", kind.to_string()),
        ("targets", args.targets.to_string()),
        ("theta", sci(args.theta)),
        ("base", sci(args.base)),
        ("probabilities", dist.probabilities().iter().map(|&p| sci(p)).collect::<Vec<_>>().join(" ")),
    ]);
    write_run_manifest(
        &common.out,
        &RunManifest {
            source: "collector",
            seed: common.seed,
            parameters,
            subjects: entries,
        },
    )
}

enum SubjectData {
    Sessions(Dataset),
    Curve(AggregateCurve),
}

/// Subjects listed in the input manifest, sorted by name.
fn load_subjects(input: &Path) -> Result<Vec<(String, SubjectData)>> {
    let mut manifest = output::read_manifest(input)?;
    manifest.sort_by(|a, b| a.subject.cmp(&b.subject));
    let mut out = Vec::with_capacity(manifest.len());
    for row in manifest {
        let dense = input.join(&row.subject).join(output::DENSE_CURVE);
        let data = if dense.exists() {
            let curve = output::read_dense_curve(&dense)?;
            if curve.draws() != row.draws_per_session {
                return Err(CliError::Data(format!(
                    "{}: {} draws, manifest says {}",
                    dense.display(),
                    curve.draws(),
                    row.draws_per_session
                )));
            }
            SubjectData::Curve(curve)
        } else {
            let mut curves = Vec::with_capacity(row.sessions);
            for i in 0..row.sessions {
                let path = output::session_file(input, &row.subject, i);
                let events = output::read_event_log(&path)?;
                let curve = curves::build_curve(&events, row.draws_per_session)
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                curves.push(curve);
            }
            SubjectData::Sessions(Dataset::new(row.subject.clone(), curves)?)
        };
        out.push((row.subject, data));
    }
    Ok(out)
}

fn parse_models(list: Option<&str>, reference: ModelId) -> Result<Vec<ModelId>> {
    let models: Vec<ModelId> = match list {
        None => ModelId::PHI.to_vec(),
        Some("all") => ModelId::ALL.to_vec(),
        Some(list) => list
            .split(',')
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()?,
    };
    if !models.contains(&reference) {
        return Err(CliError::Usage(format!("reference model {reference} is not among the fitted models")));
    }
    Ok(models)
}

const FIT_HEADER: [&str; 8] = [
    "subject",
    "model",
    "converged",
    "R2",
    "RMSE",
    "iterations",
    "starts_converged",
    "params",
];

fn fit(common: &Common, args: &FitArgs) -> Result<Vec<(String, Ranking)>> {
    let models = parse_models(args.models.as_deref(), common.reference)?;
    let cfg = FitConfig {
        multi_starts: common.starts,
        grid_points: common.grid_points,
        seed: common.seed,
        ..FitConfig::default()
    };
    cfg.validate()?;

    let mut fit_rows = Vec::new();
    let mut rankings = Vec::new();
    for (name, data) in load_subjects(&args.input.input)? {
        let curve = match data {
            SubjectData::Curve(c) => c,
            SubjectData::Sessions(d) => match common.aggregation() {
                Aggregate::Mean => curves::aggregate_mean(&d),
                Aggregate::Median => curves::aggregate_median(&d),
            },
        };
        let ranking = fitting::rank_models(&curve, &models, common.reference, &cfg)?;
        for m in &models {
            let r = ranking.results.iter().find(|r| r.model == *m).expect("every model is ranked");
            fit_rows.push(fit_row(&name, r));
        }
        write_plot(&common.out, &name, &curve, &ranking, &cfg)?;
        rankings.push((name, ranking));
    }

    output::write_csv(&common.out.join("fits.csv"), &FIT_HEADER, &fit_rows, &[])?;
    write_ranking(&common.out, &rankings, common.reference)?;
    Ok(rankings)
}

fn fit_row(subject: &str, r: &FitResult) -> Vec<String> {
    let params = r
        .params
        .as_ref()
        .map(|p| p.values().iter().map(|&v| sci(v)).collect::<Vec<_>>().join(" "))
        .unwrap_or_default();
    vec![
        subject.to_string(),
        r.model.to_string(),
        r.converged.to_string(),
        sci(r.r_squared),
        sci(r.rmse),
        r.iterations.to_string(),
        r.starts_converged.to_string(),
        params,
    ]
}

/// Observed curve on the fitting grid next to the top three models.
fn write_plot(out: &Path, subject: &str, curve: &AggregateCurve, ranking: &Ranking, cfg: &FitConfig) -> Result<()> {
    let top: Vec<&FitResult> = ranking.results.iter().take(3).collect();
    let mut header = vec!["x".to_string(), "y".to_string()];
    header.extend(top.iter().map(|r| r.model.to_string()));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = fitting::grid_indices(curve.draws(), cfg.grid_points)
        .into_iter()
        .map(|k| {
            let x = k as f64;
            let mut row = vec![k.to_string(), sci(curve.values()[k])];
            row.extend(top.iter().map(|r| sci(r.predict(x).unwrap_or(f64::NAN))));
            row
        })
        .collect();
    output::write_csv(&out.join("plot").join(format!("{subject}.csv")), &header, &rows, &[])
}

fn write_ranking(out: &Path, rankings: &[(String, Ranking)], reference: ModelId) -> Result<()> {
    let rows: Vec<Vec<String>> = rankings
        .iter()
        .map(|(name, ranking)| {
            let best = ranking.best();
            let delta = ranking.reference_delta();
            vec![
                name.clone(),
                ranking.order().iter().map(|m| m.token()).collect::<Vec<_>>().join(" "),
                sci(best.r_squared),
                sci(best.rmse),
                sci(delta.map_or(f64::NAN, |d| d.r_squared)),
                sci(delta.map_or(f64::NAN, |d| d.rmse)),
            ]
        })
        .collect();
    let all: Vec<Ranking> = rankings.iter().map(|(_, r)| r.clone()).collect();
    let fractions = stats::reference_rank_fractions(&all, reference);
    let footer = [
        format!("fraction_best,{reference},{}", sci(fractions.best)),
        format!("fraction_top_two,{reference},{}", sci(fractions.top_two)),
    ];
    output::write_csv(
        &out.join("ranking.csv"),
        &["subject", "ranking", "R2_best", "RMSE_best", "deltaR2_ref", "deltaRMSE_ref"],
        &rows,
        &footer,
    )
}

#[derive(Deserialize)]
struct FitRow {
    subject: String,
    model: String,
    converged: bool,
    #[serde(rename = "R2")]
    r_squared: String,
    #[serde(rename = "RMSE")]
    rmse: String,
    iterations: usize,
    starts_converged: usize,
}

/// Fits from `fits.csv`, grouped by subject. Parameters are not reloaded.
fn read_fits(input: &Path) -> Result<BTreeMap<String, Vec<FitResult>>> {
    let path = input.join("fits.csv");
    let mut out: BTreeMap<String, Vec<FitResult>> = BTreeMap::new();
    for row in output::read_rows::<FitRow>(&path)? {
        let number = |s: &str| {
            output::parse_number(s).ok_or_else(|| CliError::Data(format!("{}: bad number `{s}`", path.display())))
        };
        let result = FitResult {
            model: row.model.parse()?,
            params: None,
            r_squared: number(&row.r_squared)?,
            rmse: number(&row.rmse)?,
            converged: row.converged,
            iterations: row.iterations,
            starts_converged: row.starts_converged,
        };
        out.entry(row.subject).or_default().push(result);
    }
    Ok(out)
}

fn rank(common: &Common, input: &Path) -> Result<()> {
    let rankings = read_fits(input)?
        .into_iter()
        .map(|(name, fits)| Ok((name, Ranking::from_results(fits, common.reference)?)))
        .collect::<Result<Vec<_>>>()?;
    write_ranking(&common.out, &rankings, common.reference)
}

fn compare(common: &Common, input: &Path, score: Score) -> Result<()> {
    let fits = read_fits(input)?;
    let pick = |r: &FitResult| match score {
        Score::R2 => r.r_squared,
        Score::Rmse => r.rmse,
    };
    let mut others: Vec<ModelId> = fits.values().flatten().map(|r| r.model).collect();
    others.sort_unstable();
    others.dedup();
    others.retain(|&m| m != common.reference);

    let mut rows = Vec::new();
    for other in others {
        let paired: BTreeMap<String, (f64, f64)> = fits
            .iter()
            .filter_map(|(subject, results)| {
                let a = results.iter().find(|r| r.model == common.reference)?;
                let b = results.iter().find(|r| r.model == other)?;
                Some((subject.clone(), (pick(a), pick(b))))
            })
            .collect();
        let mut row = vec![common.reference.to_string(), other.to_string()];
        match stats::compare_models_across_subjects(&paired) {
            Ok(c) => {
                let t = c.test;
                row.extend([
                    t.n_pairs.to_string(),
                    t.n_effective.to_string(),
                    sci(t.w_statistic),
                    sci(t.z_statistic),
                    sci(t.p_value),
                    sci(t.effect_size),
                    t.method.to_string(),
                ]);
            }
            // No subject has finite scores for both models.
            Err(_) => row.extend([
                "0".to_string(),
                "0".to_string(),
                sci(f64::NAN),
                sci(f64::NAN),
                sci(f64::NAN),
                sci(f64::NAN),
                "none".to_string(),
            ]),
        }
        rows.push(row);
    }
    output::write_csv(
        &common.out.join("comparison.csv"),
        &["model_a", "model_b", "N", "n_effective", "W", "Z", "p", "effect", "method"],
        &rows,
        &[],
    )
}

fn summary(common: &Common, input: &Path) -> Result<()> {
    let mut rows = Vec::new();
    for (name, data) in load_subjects(input)? {
        let SubjectData::Sessions(d) = data else {
            eprintln!("note: {name} has only an aggregate curve; skipped in summary.csv");
            continue;
        };
        let s = curves::summary_stats(&d);
        rows.push(vec![
            name,
            s.sessions.to_string(),
            s.draws.to_string(),
            s.max_faults.to_string(),
            sci(s.mean_sd),
            sci(s.mean_skew),
            sci(s.mean_delta),
            sci(s.sd_delta),
        ]);
    }
    output::write_csv(
        &common.out.join("summary.csv"),
        &["subject", "S", "T", "F", "E_sigma", "E_gamma", "E_delta", "sigma_delta"],
        &rows,
        &[],
    )
}
