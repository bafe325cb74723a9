//! Least-squares fitting of growth models to fault-counting curves.
//!
//! Each fit minimizes the sum of squared residuals over a log-spaced
//! subsample of the curve with a Levenberg-Marquardt iteration:
//! Gauss-Newton steps on the column-normalized Jacobian, damped by a factor
//! that is divided by ten after an accepted step and multiplied by ten after
//! a rejected one. Several seeded starts are run per model and the lowest
//! residual wins.
//!
//! Starts draw the nonlinear parameters (exponents, half-saturation points,
//! bases) at random and solve the parameters the model is linear in by
//! ordinary least squares, so linear models are exact after one step and the
//! nonlinear ones begin near a sensible basin.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curves::AggregateCurve;
use crate::models::{self, ModelId, ModelSpec, ParamVector};
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Stop when the largest cosine between the residual vector and a
    /// Jacobian column falls below this.
    pub gradient_tolerance: f64,
    /// Stop when no parameter moves by more than this relative amount.
    pub step_tolerance: f64,
    pub multi_starts: usize,
    pub seed: u64,
    /// Number of curve points the fit is evaluated on.
    pub grid_points: usize,
    pub initial_damping: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            step_tolerance: 1e-10,
            multi_starts: 16,
            seed: 0,
            grid_points: 512,
            initial_damping: 1e-3,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.max_iterations > 0
            && self.gradient_tolerance > 0.0
            && self.step_tolerance > 0.0
            && self.multi_starts >= 1
            && self.grid_points >= 2
            && self.initial_damping > 0.0;
        if positive {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("fit configuration out of range: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: ModelId,
    /// `None` when every start was aborted.
    pub params: Option<ParamVector>,
    /// May be `-inf` (constant data, imperfect fit) or `NaN` (constant data,
    /// perfect fit, or no surviving start).
    pub r_squared: f64,
    pub rmse: f64,
    pub converged: bool,
    /// Iterations used by the winning start.
    pub iterations: usize,
    pub starts_converged: usize,
}

impl FitResult {
    fn failed(model: ModelId) -> Self {
        Self {
            model,
            params: None,
            r_squared: f64::NAN,
            rmse: f64::NAN,
            converged: false,
            iterations: 0,
            starts_converged: 0,
        }
    }

    /// Model value at `x`, if the fit produced parameters.
    pub fn predict(&self, x: f64) -> Option<f64> {
        let p = self.params.as_ref()?;
        models::evaluate(self.model, p, x).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Goodness {
    pub r_squared: f64,
    pub rmse: f64,
}

/// Coefficient of determination and root mean squared error.
///
/// With constant observations `SS_tot = 0`; then `R^2` is `-inf` when the
/// prediction misses and `NaN` when it is exact.
pub fn goodness(y: &[f64], yhat: &[f64]) -> Result<Goodness> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch(y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(Error::InvalidArgument("goodness of fit needs at least one point".into()));
    }
    let n = y.len() as f64;
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    let constant = y.iter().all(|&v| v == y[0]);
    let ss_tot = if constant {
        0.0
    } else {
        let mean = y.iter().sum::<f64>() / n;
        y.iter().map(|v| (v - mean) * (v - mean)).sum()
    };
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res > 0.0 {
        f64::NEG_INFINITY
    } else if ss_res == 0.0 {
        f64::NAN
    } else {
        // ss_res is NaN
        f64::NAN
    };
    Ok(Goodness {
        r_squared,
        rmse: (ss_res / n).sqrt(),
    })
}

/// Curve indices used for fitting: every index when the curve is short,
/// otherwise `k = 0`, `k = T` and a logarithmically spaced set in between.
pub fn grid_indices(draws: usize, grid_points: usize) -> Vec<usize> {
    if draws < grid_points.max(2) {
        return (0..=draws).collect();
    }
    let inner = grid_points.max(3) - 1;
    let log_t = (draws as f64).ln();
    let mut idx = Vec::with_capacity(grid_points);
    idx.push(0);
    for i in 0..inner {
        let k = (log_t * i as f64 / (inner - 1) as f64).exp().round() as usize;
        idx.push(k.clamp(1, draws));
    }
    idx.push(draws);
    idx.dedup();
    idx
}

/// Fits `model` to an aggregate curve on its log-spaced grid.
pub fn fit(curve: &AggregateCurve, model: ModelId, cfg: &FitConfig) -> Result<FitResult> {
    let (xs, ys) = grid_points(curve, model, cfg);
    fit_points(&xs, &ys, model, cfg)
}

/// Fits `model` to arbitrary points.
pub fn fit_points(xs: &[f64], ys: &[f64], model: ModelId, cfg: &FitConfig) -> Result<FitResult> {
    fit_with_starts(xs, ys, model, cfg, Vec::new())
}

fn grid_points(curve: &AggregateCurve, model: ModelId, cfg: &FitConfig) -> (Vec<f64>, Vec<f64>) {
    let values = curve.values();
    grid_indices(curve.draws(), cfg.grid_points)
        .into_iter()
        .map(|k| (k as f64, values[k]))
        .filter(|&(x, _)| x >= model.min_x())
        .unzip()
}

fn check_problem(xs: &[f64], ys: &[f64], model: ModelId, cfg: &FitConfig) -> Result<()> {
    cfg.validate()?;
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < model.param_count() + 2 {
        return Err(Error::InvalidCurve(format!(
            "{model} needs at least {} points, got {}",
            model.param_count() + 2,
            xs.len()
        )));
    }
    if let Some(i) = xs.iter().chain(ys).position(|v| !v.is_finite()) {
        return Err(Error::InvalidCurve(format!("non-finite value at position {i}")));
    }
    Ok(())
}

fn fit_with_starts(
    xs: &[f64],
    ys: &[f64],
    model: ModelId,
    cfg: &FitConfig,
    warm: Vec<Vec<f64>>,
) -> Result<FitResult> {
    check_problem(xs, ys, model, cfg)?;
    let problem = Problem::new(model, xs, ys);
    let warm_count = warm.len();
    let total = warm_count + cfg.multi_starts;

    let outcomes: Vec<Option<LocalFit>> = par::map_range(total, |i| {
        let start = if i < warm_count {
            Some(warm[i].clone())
        } else {
            let mut rng = start_rng(cfg.seed, model, i - warm_count);
            initial_guess(&problem, i - warm_count, &mut rng)
        };
        start.and_then(|s| problem.levenberg_marquardt(s, cfg))
    });

    let starts_converged = outcomes.iter().flatten().filter(|f| f.converged).count();
    let best = outcomes
        .into_iter()
        .flatten()
        .reduce(|best, next| if next.cost < best.cost { next } else { best });
    let Some(best) = best else {
        return Ok(FitResult::failed(model));
    };

    let yhat = problem.predict(&best.params).expect("winning start evaluates on the grid");
    let g = goodness(ys, &yhat)?;
    Ok(FitResult {
        model,
        params: ParamVector::new(model, best.params).ok(),
        r_squared: g.r_squared,
        rmse: g.rmse,
        converged: starts_converged > 0,
        iterations: best.iterations,
        starts_converged,
    })
}

fn start_rng(seed: u64, model: ModelId, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model_index = ModelId::ALL.iter().position(|&m| m == model).unwrap_or(0) as u64;
    rng.set_stream((model_index << 32) | start as u64);
    rng
}

/// Outcome of one local optimization.
#[derive(Debug, Clone)]
struct LocalFit {
    params: Vec<f64>,
    cost: f64,
    converged: bool,
    iterations: usize,
}

struct Problem<'a> {
    model: ModelId,
    spec: ModelSpec,
    xs: &'a [f64],
    ys: &'a [f64],
}

/// Damping beyond which a start is considered stalled.
const MAX_DAMPING: f64 = 1e16;
/// Residual/Jacobian cosine accepted as stationary when a start stalls.
const STALL_GRADIENT: f64 = 1e-6;

impl<'a> Problem<'a> {
    fn new(model: ModelId, xs: &'a [f64], ys: &'a [f64]) -> Self {
        Self {
            model,
            spec: model.spec(),
            xs,
            ys,
        }
    }

    fn is_rational(&self) -> bool {
        matches!(self.model, ModelId::Phi1 | ModelId::Phi2 | ModelId::Phi3)
    }

    /// Model values on the grid; `None` on a domain error, a pole or a
    /// non-finite value. A rational model whose denominator changes sign
    /// between grid points has a pole in between and is rejected too.
    fn predict(&self, p: &[f64]) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(self.xs.len());
        for &x in self.xs {
            let v = models::value(self.model, p, x).ok()?;
            if !v.is_finite() {
                return None;
            }
            out.push(v);
        }
        if self.is_rational() && !self.denominator_keeps_sign(p) {
            return None;
        }
        Some(out)
    }

    fn denominator_keeps_sign(&self, p: &[f64]) -> bool {
        let den = |x: f64| -> f64 {
            match self.model {
                ModelId::Phi1 => x + p[1],
                ModelId::Phi2 => ((p[4] * x + p[5]) * x + p[6]) * x + p[7],
                ModelId::Phi3 => p[3] * x.powf(p[4]) + p[5],
                _ => 1.0,
            }
        };
        let mut sign = 0.0;
        for &x in self.xs {
            let s = den(x).signum();
            if sign == 0.0 {
                sign = s;
            } else if s != sign {
                return false;
            }
        }
        true
    }

    fn cost(&self, yhat: &[f64]) -> f64 {
        self.ys.iter().zip(yhat).map(|(y, f)| (y - f) * (y - f)).sum()
    }

    /// Residuals `y - f` and the Jacobian of `f`.
    fn linearize(&self, p: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let m = self.xs.len();
        let n = p.len();
        let mut r = DVector::zeros(m);
        let mut jac = DMatrix::zeros(m, n);
        let mut g = vec![0.0; n];
        for (i, &x) in self.xs.iter().enumerate() {
            let v = models::value_and_gradient(self.model, p, x, &mut g).ok()?;
            if !v.is_finite() || g.iter().any(|d| !d.is_finite()) {
                return None;
            }
            r[i] = self.ys[i] - v;
            for (j, d) in g.iter().enumerate() {
                jac[(i, j)] = *d;
            }
        }
        Some((r, jac))
    }

    /// Largest cosine between the residual and a Jacobian column, ignoring
    /// columns whose descent direction points out of the bounds.
    fn projected_gradient(&self, p: &[f64], jtr: &DVector<f64>, r_norm: f64) -> f64 {
        if r_norm == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (j, &g) in jtr.iter().enumerate() {
            let b = &self.spec.bounds[j];
            let blocked = (p[j] <= b.lower && g < 0.0) || (p[j] >= b.upper && g > 0.0);
            if !blocked {
                worst = worst.max(g.abs());
            }
        }
        worst / r_norm
    }

    fn levenberg_marquardt(&self, mut p: Vec<f64>, cfg: &FitConfig) -> Option<LocalFit> {
        self.spec.clamp(&mut p);
        let mut cost = self.cost(&self.predict(&p)?);
        let mut lambda = cfg.initial_damping;
        let mut converged = false;
        let mut iterations = 0;

        'outer: while iterations < cfg.max_iterations {
            iterations += 1;
            let Some((r, mut jac)) = self.linearize(&p) else {
                break;
            };
            // Column normalization makes the damping term scale-free
            // (Marquardt's diagonal scaling).
            let scale: Vec<f64> = jac
                .column_iter()
                .map(|c| {
                    let norm = c.norm();
                    if norm > 0.0 && norm.is_finite() {
                        norm
                    } else {
                        1.0
                    }
                })
                .collect();
            for (j, s) in scale.iter().enumerate() {
                jac.column_mut(j).scale_mut(1.0 / s);
            }
            let jtr = jac.tr_mul(&r);
            if self.projected_gradient(&p, &jtr, r.norm()) <= cfg.gradient_tolerance {
                converged = true;
                break;
            }

            let svd = jac.svd(true, true);
            let (Some(u), Some(v_t)) = (svd.u.as_ref(), svd.v_t.as_ref()) else {
                break;
            };
            let utr = u.tr_mul(&r);
            loop {
                let weights = DVector::from_iterator(
                    utr.len(),
                    svd.singular_values
                        .iter()
                        .zip(utr.iter())
                        .map(|(s, c)| s * c / (s * s + lambda)),
                );
                let step = v_t.tr_mul(&weights);
                let mut trial: Vec<f64> = p
                    .iter()
                    .zip(step.iter().zip(&scale))
                    .map(|(pj, (d, s))| pj + d / s)
                    .collect();
                self.spec.clamp(&mut trial);

                let moved = trial
                    .iter()
                    .zip(&p)
                    .map(|(t, o)| (t - o).abs() / (o.abs() + cfg.step_tolerance))
                    .fold(0.0, f64::max);
                if moved <= cfg.step_tolerance {
                    converged = true;
                    break 'outer;
                }

                match self.predict(&trial).map(|yhat| self.cost(&yhat)) {
                    Some(c) if c < cost => {
                        p = trial;
                        cost = c;
                        lambda = (lambda / 10.0).max(1e-15);
                        break;
                    }
                    _ => {
                        lambda *= 10.0;
                        if lambda > MAX_DAMPING {
                            converged = self.projected_gradient(&p, &jtr, r.norm()) <= STALL_GRADIENT;
                            break 'outer;
                        }
                    }
                }
            }
        }

        Some(LocalFit {
            params: p,
            cost,
            converged,
            iterations,
        })
    }
}

/// Ordinary least squares with column normalization; `None` when the
/// columns are all degenerate.
fn least_squares(columns: &[Vec<f64>], ys: &[f64]) -> Option<Vec<f64>> {
    let m = ys.len();
    let n = columns.len();
    let mut a = DMatrix::zeros(m, n);
    let mut scale = vec![1.0; n];
    for (j, col) in columns.iter().enumerate() {
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return None;
        }
        if norm > 0.0 {
            scale[j] = norm;
        }
        for (i, v) in col.iter().enumerate() {
            a[(i, j)] = v / scale[j];
        }
    }
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max();
    let sol = svd.solve(&b, eps).ok()?;
    let out: Vec<f64> = sol.iter().zip(&scale).map(|(v, s)| v / s).collect();
    out.iter().all(|v| v.is_finite()).then_some(out)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    uniform(rng, lo.ln(), hi.ln()).exp()
}

fn column(xs: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    xs.iter().map(|&x| f(x)).collect()
}

/// Jitters a linear solution so repeated starts are not identical.
fn jitter(rng: &mut ChaCha8Rng, p: &mut [f64]) {
    for v in p.iter_mut() {
        *v *= 1.0 + 0.5 * (rng.random::<f64>() - 0.5);
    }
}

/// Starting point for start `index`; start 0 is data-driven and
/// deterministic, later ones randomize the nonlinear parameters.
fn initial_guess(problem: &Problem<'_>, index: usize, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let xs = problem.xs;
    let ys = problem.ys;
    let first = index == 0;
    let x_max = xs.iter().copied().fold(1.0, f64::max);
    let x_min = xs.iter().copied().filter(|&x| x > 0.0).fold(x_max, f64::min);
    let log1 = |x: f64| (x + 1.0).ln();
    let ones = vec![1.0; xs.len()];

    match problem.model {
        ModelId::Phi1 => {
            let half_b = half_saturation(xs, ys).unwrap_or(x_max / 2.0).max(x_min);
            let b = if first {
                half_b
            } else {
                log_uniform(rng, (x_min * 0.1).max(1e-6), x_max * 10.0)
            };
            let a = least_squares(&[column(xs, |x| x / (x + b))], ys)?;
            Some(vec![a[0], b])
        }
        ModelId::Phi2 => {
            let levi = || -> Option<Vec<f64>> {
                // y D(x) = N(x) with D = 1 + ... is linear in the remaining
                // seven coefficients.
                let cols = vec![
                    column(xs, |x| x * x * x),
                    column(xs, |x| x * x),
                    column(xs, |x| x),
                    ones.clone(),
                    xs.iter().zip(ys).map(|(x, y)| -y * x * x * x).collect(),
                    xs.iter().zip(ys).map(|(x, y)| -y * x * x).collect(),
                    xs.iter().zip(ys).map(|(x, y)| -y * x).collect(),
                ];
                let s = least_squares(&cols, ys)?;
                Some(vec![s[0], s[1], s[2], s[3], s[4], s[5], s[6], 1.0])
            };
            let michaelis = || -> Option<Vec<f64>> {
                let b = half_saturation(xs, ys).unwrap_or(x_max / 2.0).max(x_min);
                let a = least_squares(&[column(xs, |x| x / (x + b))], ys)?;
                Some(vec![0.0, 0.0, a[0], 0.0, 0.0, 0.0, 1.0, b])
            };
            match index {
                0 => levi(),
                1 => michaelis(),
                _ => {
                    let mut p = if index.is_multiple_of(2) { levi()? } else { michaelis()? };
                    jitter(rng, &mut p);
                    Some(p)
                }
            }
        }
        ModelId::Phi3 => {
            let (b, bb) = if first {
                (1.0, 1.0)
            } else {
                (uniform(rng, 0.05, 3.0), uniform(rng, 0.05, 3.0))
            };
            if index % 3 == 2 {
                // Pure power law: denominator fixed at 1.
                let s = least_squares(&[column(xs, |x| x.powf(b)), ones], ys)?;
                return Some(vec![s[0], b, s[1], 0.0, bb, 1.0]);
            }
            // y (A x^B + 1) = a x^b + c
            let cols = vec![
                column(xs, |x| x.powf(b)),
                ones,
                xs.iter().zip(ys).map(|(x, y)| -y * x.powf(bb)).collect(),
            ];
            let s = least_squares(&cols, ys)?;
            Some(vec![s[0], b, s[1], s[2], bb, 1.0])
        }
        ModelId::Phi4 | ModelId::Lam6 | ModelId::Lam7 => {
            let (lo, hi) = if problem.model == ModelId::Lam7 { (0.2, 5.0) } else { (0.05, 6.0) };
            let b = if first { 1.0 } else { uniform(rng, lo, hi) };
            let e = if problem.model == ModelId::Lam7 { 1.0 / b } else { b };
            let s = least_squares(&[column(xs, |x| log1(x).powf(e)), ones], ys)?;
            Some(vec![s[0], b, s[1]])
        }
        ModelId::Phi6 => {
            let c = if first { 2.0 } else { uniform(rng, 1.0, 10.0) };
            let u_max = x_max.powf(1.0 / c);
            let shape = if first { -3.0 } else { uniform(rng, -20.0, 2.0) };
            let b = (shape / u_max).exp().clamp(f64::MIN_POSITIVE, 1e3);
            let s = least_squares(&[column(xs, |x| b.powf(x.powf(1.0 / c))), ones], ys)?;
            Some(vec![s[0], b, c, s[1]])
        }
        ModelId::Phi8 => {
            let b = if first { 0.5 } else { log_uniform(rng, 0.05, 6.0) };
            let s = least_squares(&[column(xs, |x| x.powf(b)), ones], ys)?;
            Some(vec![s[0], b, s[1]])
        }
        linear => {
            let cols: Vec<Vec<f64>> = match linear {
                ModelId::Phi5 => (0..4).map(|j| column(xs, |x| log1(x).powi(3 - j))).collect(),
                ModelId::Phi7 => (0..4).map(|j| column(xs, |x| x.powi(3 - j))).collect(),
                ModelId::Phi9 => (0..4).map(|j| column(xs, |x| x.powi(j - 3))).collect(),
                ladder => {
                    let k = ladder.ladder_degree().expect("ladder model") as i32;
                    (0..=k).map(|j| column(xs, |x| log1(x).powi(j))).collect()
                }
            };
            let mut s = least_squares(&cols, ys)?;
            if !first {
                jitter(rng, &mut s);
            }
            Some(s)
        }
    }
}

/// First `x` at which `y` reaches half of its final value.
fn half_saturation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let top = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top <= 0.0 {
        return None;
    }
    xs.iter().zip(ys).find(|(_, &y)| y >= top / 2.0).map(|(&x, _)| x)
}

/// Per-model distance to the best fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreDelta {
    pub model: ModelId,
    pub r_squared: f64,
    pub rmse: f64,
}

/// Fit results ordered from best to worst.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub results: Vec<FitResult>,
    /// `|score - best score|` for every ranked model, in ranking order.
    pub deltas: Vec<ScoreDelta>,
    pub reference: ModelId,
}

impl Ranking {
    pub fn best(&self) -> &FitResult {
        &self.results[0]
    }

    pub fn order(&self) -> Vec<ModelId> {
        self.results.iter().map(|r| r.model).collect()
    }

    /// 0-based position of `model` in the ranking.
    pub fn position(&self, model: ModelId) -> Option<usize> {
        self.results.iter().position(|r| r.model == model)
    }

    /// Deltas of the reference model, if it was ranked.
    pub fn reference_delta(&self) -> Option<ScoreDelta> {
        self.deltas.iter().copied().find(|d| d.model == self.reference)
    }

    /// Orders already-computed fits.
    pub fn from_results(mut results: Vec<FitResult>, reference: ModelId) -> Result<Self> {
        if results.is_empty() {
            return Err(Error::InvalidArgument("nothing to rank".into()));
        }
        results.sort_by(compare_fits);
        let best = (results[0].r_squared, results[0].rmse);
        let deltas = results
            .iter()
            .map(|r| ScoreDelta {
                model: r.model,
                r_squared: (r.r_squared - best.0).abs(),
                rmse: (r.rmse - best.1).abs(),
            })
            .collect();
        Ok(Self {
            results,
            deltas,
            reference,
        })
    }
}

/// Converged fits first, by descending `R^2` then ascending RMSE; failed
/// fits last by ascending RMSE. `NaN` sorts after every number and model id
/// breaks remaining ties.
pub fn compare_fits(a: &FitResult, b: &FitResult) -> Ordering {
    fn nan_last(x: f64, y: f64) -> Ordering {
        match (x.is_nan(), y.is_nan()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            _ => x.total_cmp(&y),
        }
    }
    b.converged
        .cmp(&a.converged)
        .then_with(|| {
            if a.converged {
                nan_last(-a.r_squared, -b.r_squared)
            } else {
                Ordering::Equal
            }
        })
        .then_with(|| nan_last(a.rmse, b.rmse))
        .then_with(|| a.model.cmp(&b.model))
}

/// Fits every model in `ids` and ranks them.
pub fn rank_models(
    curve: &AggregateCurve,
    ids: &[ModelId],
    reference: ModelId,
    cfg: &FitConfig,
) -> Result<Ranking> {
    if ids.is_empty() {
        return Err(Error::InvalidArgument("no models to rank".into()));
    }
    let fits = par::map_slice(ids, |&m| fit(curve, m, cfg));
    Ranking::from_results(fits.into_iter().collect::<Result<Vec<_>>>()?, reference)
}

/// Fits `lam1..lam5` in order, warm-starting each degree from the previous
/// solution padded with a zero top coefficient.
///
/// The warm start keeps the residual of degree `k + 1` at or below that of
/// degree `k`, so `R^2` never decreases along the ladder.
pub fn fit_polylog_ladder(curve: &AggregateCurve, cfg: &FitConfig) -> Result<Vec<FitResult>> {
    let (xs, ys) = grid_points(curve, ModelId::Lam1, cfg);
    let mut out: Vec<FitResult> = Vec::with_capacity(ModelId::LADDER.len());
    for model in ModelId::LADDER {
        let warm = out
            .last()
            .and_then(|prev| prev.params.as_ref())
            .map(|p| {
                let mut v = p.values().to_vec();
                v.push(0.0);
                vec![v]
            })
            .unwrap_or_default();
        out.push(fit_with_starts(&xs, &ys, model, cfg, warm)?);
    }
    Ok(out)
}
