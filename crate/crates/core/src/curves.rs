//! Testing sessions as fault-counting curves.
//!
//! A session draws `T` test cases against one subject. Its counting curve
//! `phi` maps every draw count `k` in `0..=T` to the number of distinct
//! counted failures observed in the first `k` draws. A [`Dataset`] holds the
//! curves of all sessions run on one subject; it can be collapsed into a
//! pointwise mean or median [`AggregateCurve`] and summarized with
//! [`summary_stats`].

use std::collections::HashMap;

use crate::{par, Error, Result};

/// One failure observed by the harness (or imported from another tool).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FailureEvent {
    pub session_id: u64,
    /// 1-based draw number within the session.
    pub test_index: u64,
    /// Identity of the failure; equal signatures are the same fault.
    pub signature: String,
    /// Whether the fault filter accepted the failure.
    pub counted: bool,
}

impl FailureEvent {
    pub fn new(session_id: u64, test_index: u64, signature: impl Into<String>, counted: bool) -> Self {
        Self {
            session_id,
            test_index,
            signature: signature.into(),
            counted,
        }
    }
}

/// Cumulative number of unique faults after each draw, indexed `0..=T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingCurve {
    counts: Vec<u32>,
}

impl CountingCurve {
    /// Builds a curve from dense counts, checking `counts[0] == 0` and
    /// monotonicity.
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        match counts.first() {
            None => return Err(Error::InvalidCurve("empty curve".into())),
            Some(&c) if c != 0 => {
                return Err(Error::InvalidCurve(format!("curve starts at {c}, expected 0")))
            }
            _ => {}
        }
        if let Some(k) = counts.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidCurve(format!("curve decreases at k = {}", k + 1)));
        }
        Ok(Self { counts })
    }

    /// The all-zero curve of a session with `draws` test cases.
    pub fn zeros(draws: usize) -> Self {
        Self {
            counts: vec![0; draws + 1],
        }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Number of draws `T`.
    pub fn draws(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn final_count(&self) -> u32 {
        *self.counts.last().expect("curves are never empty")
    }
}

/// Builds the counting curve of one session from its event log.
///
/// Uncounted events are ignored; repeated signatures count once, at their
/// first occurrence. The log may be in any order.
pub fn build_curve(events: &[FailureEvent], draws: usize) -> Result<CountingCurve> {
    let session = events.first().map(|e| e.session_id);
    let mut first_seen: HashMap<&str, u64> = HashMap::new();
    for e in events {
        if Some(e.session_id) != session {
            return Err(Error::MalformedLog(format!(
                "events from sessions {} and {} mixed in one log",
                session.unwrap_or_default(),
                e.session_id
            )));
        }
        if e.test_index == 0 || e.test_index > draws as u64 {
            return Err(Error::MalformedLog(format!(
                "test index {} outside 1..={draws}",
                e.test_index
            )));
        }
        if e.signature.is_empty() {
            return Err(Error::MalformedLog(format!(
                "empty signature at test index {}",
                e.test_index
            )));
        }
        if e.counted {
            let slot = first_seen.entry(e.signature.as_str()).or_insert(e.test_index);
            *slot = (*slot).min(e.test_index);
        }
    }

    let mut firsts: Vec<usize> = first_seen.values().map(|&k| k as usize).collect();
    firsts.sort_unstable();
    let mut steps = vec![0u32; draws + 1];
    for k in firsts {
        if steps[k] == 1 {
            return Err(Error::MalformedLog(format!(
                "two new faults at test index {k}; a test case reveals at most one"
            )));
        }
        steps[k] = 1;
    }
    let mut acc = 0u32;
    for s in steps.iter_mut() {
        acc += *s;
        *s = acc;
    }
    Ok(CountingCurve { counts: steps })
}

/// All sessions run against one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    subject: String,
    curves: Vec<CountingCurve>,
}

impl Dataset {
    pub fn new(subject: impl Into<String>, curves: Vec<CountingCurve>) -> Result<Self> {
        let subject = subject.into();
        let Some(first) = curves.first() else {
            return Err(Error::InvalidDataset(format!("{subject}: no sessions")));
        };
        let len = first.counts.len();
        if let Some(bad) = curves.iter().position(|c| c.counts.len() != len) {
            return Err(Error::InvalidDataset(format!(
                "{subject}: session {bad} has {} draws, expected {}",
                curves[bad].draws(),
                len - 1
            )));
        }
        Ok(Self { subject, curves })
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn curves(&self) -> &[CountingCurve] {
        &self.curves
    }

    /// Number of sessions `S`.
    pub fn sessions(&self) -> usize {
        self.curves.len()
    }

    /// Draws per session `T`.
    pub fn draws(&self) -> usize {
        self.curves[0].draws()
    }
}

/// A real-valued curve over `0..=T`, starting at zero and non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    values: Vec<f64>,
}

impl AggregateCurve {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidCurve(format!(
                "aggregate curve needs at least 2 points, got {}",
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve(format!("non-finite value at k = {k}")));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidCurve(format!("curve starts at {}, expected 0", values[0])));
        }
        if let Some(k) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidCurve(format!("curve decreases at k = {}", k + 1)));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn draws(&self) -> usize {
        self.values.len() - 1
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

const ROUND_CHUNK: usize = 8192;

/// Pointwise mean over sessions.
pub fn aggregate_mean(data: &Dataset) -> AggregateCurve {
    let len = data.draws() + 1;
    let s = data.sessions() as f64;
    let parts = par::map_chunks(len, ROUND_CHUNK, |range| {
        range
            .map(|k| {
                let total: u64 = data.curves.iter().map(|c| u64::from(c.counts[k])).sum();
                total as f64 / s
            })
            .collect::<Vec<_>>()
    });
    AggregateCurve {
        values: parts.concat(),
    }
}

/// Pointwise median over sessions; an even session count takes the midpoint
/// of the two central values.
pub fn aggregate_median(data: &Dataset) -> AggregateCurve {
    let len = data.draws() + 1;
    let parts = par::map_chunks(len, ROUND_CHUNK, |range| {
        let mut column = Vec::with_capacity(data.sessions());
        range
            .map(|k| {
                column.clear();
                column.extend(data.curves.iter().map(|c| c.counts[k]));
                median_u32(&mut column)
            })
            .collect::<Vec<_>>()
    });
    AggregateCurve {
        values: parts.concat(),
    }
}

fn median_u32(values: &mut [u32]) -> f64 {
    let n = values.len();
    values.sort_unstable();
    if n % 2 == 1 {
        f64::from(values[n / 2])
    } else {
        (f64::from(values[n / 2 - 1]) + f64::from(values[n / 2])) / 2.0
    }
}

/// Which samples the dispersion statistics `E[sigma]` and `E[gamma]` are
/// taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DispersionAxis {
    /// For each draw count `k`, the spread of `phi_i(k)` across sessions;
    /// averaged over `k = 1..=T`.
    #[default]
    AcrossSessions,
    /// For each session, the spread of `phi_i(0..=T)` over time; averaged
    /// over sessions.
    OverTime,
}

/// Per-subject summary columns: `S, T, F, E[sigma], E[gamma], E[Delta], sigma[Delta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub sessions: usize,
    pub draws: usize,
    pub max_faults: u32,
    pub mean_sd: f64,
    /// `NaN` when skewness is undefined for every sample.
    pub mean_skew: f64,
    /// Mean rate of new faults per drawn test case.
    pub mean_delta: f64,
    pub sd_delta: f64,
}

pub fn summary_stats(data: &Dataset) -> SummaryStats {
    summary_stats_with(data, DispersionAxis::default())
}

pub fn summary_stats_with(data: &Dataset, axis: DispersionAxis) -> SummaryStats {
    let draws = data.draws();
    let finals: Vec<f64> = data
        .curves
        .iter()
        .map(|c| f64::from(c.final_count()))
        .collect();
    let deltas: Vec<f64> = finals.iter().map(|f| f / draws.max(1) as f64).collect();
    let (mean_delta, sd_delta) = mean_and_sd(&deltas);

    let (mean_sd, mean_skew) = match axis {
        DispersionAxis::AcrossSessions => across_sessions(data),
        DispersionAxis::OverTime => over_time(data),
    };

    SummaryStats {
        sessions: data.sessions(),
        draws,
        max_faults: data.curves.iter().map(CountingCurve::final_count).max().unwrap_or(0),
        mean_sd,
        mean_skew,
        mean_delta,
        sd_delta,
    }
}

/// (sum of sd, sum of skew, rounds with defined skew)
type Partial = (f64, f64, usize);

fn across_sessions(data: &Dataset) -> (f64, f64) {
    let draws = data.draws();
    if draws == 0 {
        return (0.0, f64::NAN);
    }
    let parts: Vec<Partial> = par::map_chunks(draws, ROUND_CHUNK, |range| {
        let mut column = Vec::with_capacity(data.sessions());
        let mut acc = (0.0, 0.0, 0);
        for k in range {
            column.clear();
            column.extend(data.curves.iter().map(|c| f64::from(c.counts[k + 1])));
            let m = Moments::of(&column);
            acc.0 += m.sample_sd();
            if let Some(g) = m.adjusted_skewness() {
                acc.1 += g;
                acc.2 += 1;
            }
        }
        acc
    });
    reduce_partials(&parts, draws)
}

fn over_time(data: &Dataset) -> (f64, f64) {
    let parts: Vec<Partial> = par::map_slice(&data.curves, |c| {
        let values: Vec<f64> = c.counts.iter().map(|&v| f64::from(v)).collect();
        let m = Moments::of(&values);
        match m.adjusted_skewness() {
            Some(g) => (m.sample_sd(), g, 1),
            None => (m.sample_sd(), 0.0, 0),
        }
    });
    reduce_partials(&parts, data.sessions())
}

fn reduce_partials(parts: &[Partial], samples: usize) -> (f64, f64) {
    let (sd, skew, defined) = parts
        .iter()
        .fold((0.0, 0.0, 0), |a, p| (a.0 + p.0, a.1 + p.1, a.2 + p.2));
    let mean_skew = if defined == 0 {
        f64::NAN
    } else {
        skew / defined as f64
    };
    (sd / samples as f64, mean_skew)
}

/// Central moments of a small sample.
struct Moments {
    n: usize,
    m2: f64,
    m3: f64,
}

impl Moments {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let (mut m2, mut m3) = (0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            m2 += d * d;
            m3 += d * d * d;
        }
        Self {
            n,
            m2: m2 / n as f64,
            m3: m3 / n as f64,
        }
    }

    /// Standard deviation with Bessel's correction; zero for one sample.
    fn sample_sd(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 * self.n as f64 / (self.n - 1) as f64).sqrt()
    }

    /// Adjusted Fisher-Pearson coefficient `G1`.
    fn adjusted_skewness(&self) -> Option<f64> {
        if self.n < 3 || self.m2 <= 0.0 {
            return None;
        }
        let n = self.n as f64;
        let g1 = self.m3 / self.m2.powf(1.5);
        Some(g1 * (n * (n - 1.0)).sqrt() / (n - 2.0))
    }
}

fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let m = Moments::of(xs);
    (xs.iter().sum::<f64>() / xs.len() as f64, m.sample_sd())
}
