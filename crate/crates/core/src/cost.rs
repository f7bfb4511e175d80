//! Match-call cost model: closed-form expectation, a stochastic workload
//! simulator driven through the real clusterer, and the quadratic fit
//! `M(f) = a*f + b*f^2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::MediaType;
use crate::cluster::{FrameId, TopicClusterer};
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Per-frame outcome probabilities of the clustering probe sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchProbabilities {
    pub p_exact: f64,
    pub p_previous: f64,
    pub p_new_topic: f64,
}

impl MatchProbabilities {
    /// Rates measured on real lectures: 89% exact, 3.6% earlier topic,
    /// 7.4% new topic.
    pub const LECTURE: MatchProbabilities = MatchProbabilities {
        p_exact: 0.89,
        p_previous: 0.036,
        p_new_topic: 0.074,
    };

    pub fn new(p_exact: f64, p_previous: f64, p_new_topic: f64) -> Result<Self> {
        let p = MatchProbabilities {
            p_exact,
            p_previous,
            p_new_topic,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p_exact", self.p_exact),
            ("p_previous", self.p_previous),
            ("p_new_topic", self.p_new_topic),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidProbabilities(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        let sum = self.p_exact + self.p_previous + self.p_new_topic;
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProbabilities(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// Expected cumulative match calls after `f` frames when the topic count
/// grows as `topic_ratio * f`:
/// `p_exact*f + (p_previous/2 + p_new_topic) * topic_ratio * f^2 / 2`.
pub fn closed_form_matches(f: f64, p: &MatchProbabilities, topic_ratio: f64) -> Result<f64> {
    p.validate()?;
    if !(f >= 0.0 && f.is_finite()) {
        return Err(Error::InvalidProbabilities(format!("frame count {f} must be a finite non-negative number")));
    }
    if !(topic_ratio >= 0.0 && topic_ratio.is_finite()) {
        return Err(Error::InvalidProbabilities(format!("topic ratio {topic_ratio} must be non-negative")));
    }
    let (a, b) = closed_form_coefficients(p, topic_ratio);
    Ok(a * f + b * f * f)
}

/// `(a, b)` of the closed form.
pub fn closed_form_coefficients(p: &MatchProbabilities, topic_ratio: f64) -> (f64, f64) {
    (p.p_exact, (p.p_previous / 2.0 + p.p_new_topic) * topic_ratio / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Least-squares fit of `M = a*f + b*f^2` with no constant term.
///
/// Solved by Gram-Schmidt on norm-scaled columns, which keeps exact samples
/// exact to rounding.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateSystem(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(f, m)| !f.is_finite() || !m.is_finite()) {
        return Err(Error::DegenerateSystem("non-finite sample".into()));
    }
    let mut fs: Vec<f64> = points.iter().map(|p| p.0).collect();
    fs.sort_by(f64::total_cmp);
    if fs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateSystem("frame counts are not distinct".into()));
    }

    let x1: Vec<f64> = points.iter().map(|p| p.0).collect();
    let x2: Vec<f64> = points.iter().map(|p| p.0 * p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let norm = |u: &[f64]| dot(u, u).sqrt();

    let s1 = norm(&x1);
    let s2 = norm(&x2);
    if s1 == 0.0 || s2 == 0.0 {
        return Err(Error::DegenerateSystem("all frame counts are zero".into()));
    }
    let u1: Vec<f64> = x1.iter().map(|v| v / s1).collect();
    let u2: Vec<f64> = x2.iter().map(|v| v / s2).collect();

    // QR of [u1 u2]
    let r11 = norm(&u1);
    let q1: Vec<f64> = u1.iter().map(|v| v / r11).collect();
    let r12 = dot(&q1, &u2);
    let w: Vec<f64> = u2.iter().zip(&q1).map(|(v, q)| v - r12 * q).collect();
    let r22 = norm(&w);
    if r22 < 1e-12 {
        return Err(Error::DegenerateSystem("columns f and f^2 are collinear".into()));
    }
    let q2: Vec<f64> = w.iter().map(|v| v / r22).collect();

    let c1 = dot(&q1, &y);
    let c2 = dot(&q2, &y);
    let z2 = c2 / r22;
    let z1 = (c1 - r12 * z2) / r11;
    let (a, b) = (z1 / s1, z2 / s2);

    let sse: f64 = points
        .iter()
        .map(|&(f, m)| {
            let e = m - (a * f + b * f * f);
            e * e
        })
        .sum();
    Ok(QuadraticFit {
        a,
        b,
        residual: (sse / points.len() as f64).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub frames: usize,
    pub topics: usize,
    /// Oracle calls spent on each frame.
    pub per_frame_calls: Vec<u64>,
    /// Calls spent on the first `k+1` frames.
    pub cumulative: Vec<u64>,
    /// Fit over `(k, cumulative[k-1])`; absent below three frames.
    pub fit: Option<QuadraticFit>,
}

impl CostReport {
    pub fn total_calls(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    /// Builds a report from per-frame call counts.
    pub fn from_calls(per_frame_calls: Vec<u64>, topics: usize) -> Self {
        let cumulative: Vec<u64> = per_frame_calls
            .iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        let points: Vec<(f64, f64)> = cumulative
            .iter()
            .enumerate()
            .map(|(i, &m)| ((i + 1) as f64, m as f64))
            .collect();
        CostReport {
            frames: per_frame_calls.len(),
            topics,
            fit: fit_quadratic(&points).ok(),
            per_frame_calls,
            cumulative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Exact,
    Previous,
    New,
}

fn draw(rng: &mut ChaCha8Rng, p: &MatchProbabilities) -> Outcome {
    let u: f64 = rng.random();
    if u < p.p_exact {
        Outcome::Exact
    } else if u < p.p_exact + p.p_previous {
        Outcome::Previous
    } else {
        Outcome::New
    }
}

/// Runs the clusterer on `f` board frames whose match outcomes are drawn
/// from `p`. An "earlier topic" outcome targets a uniformly chosen topic
/// other than the most recent one and falls back to the most recent when
/// only one topic exists.
pub fn simulate_workload(f: usize, p: &MatchProbabilities, seed: u64) -> Result<CostReport> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clusterer = TopicClusterer::new();
    for id in 0..f as FrameId {
        let recent: Vec<FrameId> = clusterer.by_recency().map(|t| t.most_recent_frame()).collect();
        let target = if recent.is_empty() {
            None
        } else {
            match draw(&mut rng, p) {
                Outcome::Exact => Some(recent[0]),
                Outcome::Previous if recent.len() > 1 => Some(recent[rng.random_range(1..recent.len())]),
                Outcome::Previous => Some(recent[0]),
                Outcome::New => None,
            }
        };
        let mut oracle = |older: FrameId, _newer: FrameId| Some(older) == target;
        clusterer.push(id, MediaType::Board, &mut oracle);
    }
    let calls = clusterer.outcomes().iter().map(|o| o.match_calls).collect();
    Ok(CostReport::from_calls(calls, clusterer.topic_count()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub frames: usize,
    pub observed: f64,
    pub closed_form: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub frames: usize,
    pub trials: usize,
    pub seed: u64,
    pub probabilities: MatchProbabilities,
    pub topic_ratio: f64,
    pub mean_topics: f64,
    pub mean_total_calls: f64,
    pub closed_form_total: f64,
    /// Fit over the trial-averaged cumulative curve.
    pub fit: Option<QuadraticFit>,
    pub rows: Vec<BenchRow>,
    pub reports: Vec<CostReport>,
}

fn run_seeds(f: usize, p: &MatchProbabilities, seeds: Vec<u64>) -> Result<Vec<CostReport>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        seeds.into_par_iter().map(|s| simulate_workload(f, p, s)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seeds.into_iter().map(|s| simulate_workload(f, p, s)).collect()
    }
}

/// Simulates `trials` independent workloads with seeds `seed, seed+1, ...`
/// and summarises them against the closed form. Rows are emitted every
/// `row_step` frames and at `f`.
pub fn bench(f: usize, p: &MatchProbabilities, topic_ratio: f64, trials: usize, seed: u64, row_step: usize) -> Result<BenchReport> {
    p.validate()?;
    if trials == 0 {
        return Err(Error::InvalidProbabilities("at least one trial is required".into()));
    }
    let seeds: Vec<u64> = (0..trials as u64).map(|t| seed.wrapping_add(t)).collect();
    let reports = run_seeds(f, p, seeds)?;

    let n = trials as f64;
    let mean_curve: Vec<f64> = (0..f)
        .map(|k| reports.iter().map(|r| r.cumulative[k] as f64).sum::<f64>() / n)
        .collect();
    let points: Vec<(f64, f64)> = mean_curve.iter().enumerate().map(|(k, &m)| ((k + 1) as f64, m)).collect();
    let step = row_step.max(1);
    let mut rows = Vec::new();
    for k in (step..=f).step_by(step).chain((!f.is_multiple_of(step) && f > 0).then_some(f)) {
        rows.push(BenchRow {
            frames: k,
            observed: mean_curve[k - 1],
            closed_form: closed_form_matches(k as f64, p, topic_ratio)?,
        });
    }
    Ok(BenchReport {
        frames: f,
        trials,
        seed,
        probabilities: *p,
        topic_ratio,
        mean_topics: reports.iter().map(|r| r.topics as f64).sum::<f64>() / n,
        mean_total_calls: mean_curve.last().copied().unwrap_or(0.0),
        closed_form_total: closed_form_matches(f as f64, p, topic_ratio)?,
        fit: fit_quadratic(&points).ok(),
        rows,
        reports,
    })
}
