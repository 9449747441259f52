//! Summaries, DKW-based equality and dominance tests, bound checks and
//! second-order fits.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Running mean/variance (Welford) with min and max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Default for SampleSummary {
    fn default() -> Self {
        SampleSummary {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl SampleSummary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    /// Combines two partial summaries (Chan et al.).
    pub fn merge(&self, other: &SampleSummary) -> SampleSummary {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        SampleSummary {
            count,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
            min: self.min.min(other.min),
            max: self.max.max(other.max),
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (NaN for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}

impl FromIterator<f64> for SampleSummary {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = SampleSummary::new();
        for x in iter {
            s.push(x);
        }
        s
    }
}

impl fmt::Display for SampleSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} ± {:.4} (n = {})", self.mean, self.stderr(), self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Equality,
    Dominance,
    BoundCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestVerdict {
    pub kind: VerdictKind,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub details: String,
}

impl fmt::Display for TestVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:?} statistic {:.6} threshold {:.6} ({})",
            if self.pass { "PASS" } else { "FAIL" },
            self.kind,
            self.statistic,
            self.threshold,
            self.details
        )
    }
}

/// Half-width of the DKW band for a sample of size `m` at level `alpha`.
pub fn dkw_epsilon(m: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * m as f64)).sqrt()
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Walks both ECDFs jointly; `f(F_a(x), F_b(x))` is evaluated at every
/// jump point and the maximum returned.
fn ecdf_sweep(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (ma, mb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best = f(0.0, 0.0);
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&xa), Some(&xb)) => {
                if xa.total_cmp(&xb) == Ordering::Less {
                    xa
                } else {
                    xb
                }
            }
            (Some(&xa), None) => xa,
            (None, Some(&xb)) => xb,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i].total_cmp(&x) != Ordering::Greater {
            i += 1;
        }
        while j < b.len() && b[j].total_cmp(&x) != Ordering::Greater {
            j += 1;
        }
        best = best.max(f(i as f64 / ma, j as f64 / mb));
    }
    best
}

fn alpha_ok(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Probability {
            value: alpha,
            range: "(0, 1)",
        })
    }
}

/// Two-sample equality test: passes when the sup-distance between the
/// ECDFs stays inside the union of both DKW bands.
pub fn dkw_equality_test(a: &[f64], b: &[f64], alpha: f64) -> Result<TestVerdict> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    alpha_ok(alpha)?;
    let statistic = ecdf_sweep(a, b, |fa, fb| (fa - fb).abs());
    let threshold = dkw_epsilon(a.len(), alpha) + dkw_epsilon(b.len(), alpha);
    Ok(TestVerdict {
        kind: VerdictKind::Equality,
        statistic,
        threshold,
        pass: statistic <= threshold,
        details: format!("sup|F_a - F_b| over {} vs {} samples, alpha {alpha}", a.len(), b.len()),
    })
}

/// One-sided check of `upper ⪰ lower`: passes when
/// `F_upper(x) <= F_lower(x) + budget` for every `x`.
pub fn dominance_check(upper: &[f64], lower: &[f64], alpha: f64) -> Result<TestVerdict> {
    if upper.is_empty() || lower.is_empty() {
        return Err(Error::EmptySample);
    }
    alpha_ok(alpha)?;
    let statistic = ecdf_sweep(upper, lower, |fu, fl| (fu - fl).max(0.0));
    let threshold = dkw_epsilon(upper.len(), alpha) + dkw_epsilon(lower.len(), alpha);
    Ok(TestVerdict {
        kind: VerdictKind::Dominance,
        statistic,
        threshold,
        pass: statistic <= threshold,
        details: format!(
            "max(F_upper - F_lower) over {} vs {} samples, alpha {alpha}",
            upper.len(),
            lower.len()
        ),
    })
}

pub const DEFAULT_SLACK_SIGMAS: f64 = 3.0;

/// Mean-in-interval check with `slack_sigmas` standard errors of slack on
/// each present side.
pub fn bound_check(
    summary: &SampleSummary,
    lower: Option<f64>,
    upper: Option<f64>,
    slack_sigmas: f64,
) -> TestVerdict {
    let mean = summary.mean();
    if summary.count() < 30 {
        return TestVerdict {
            kind: VerdictKind::BoundCheck,
            statistic: mean,
            threshold: f64::NAN,
            pass: false,
            details: format!("needs at least 30 samples, got {}", summary.count()),
        };
    }
    let slack = slack_sigmas * summary.stderr();
    let lower_ok = lower.is_none_or(|lo| mean + slack >= lo);
    let upper_ok = upper.is_none_or(|hi| mean - slack <= hi);
    let threshold = match (lower_ok, upper_ok, lower, upper) {
        (false, _, Some(lo), _) => lo,
        (true, false, _, Some(hi)) => hi,
        (_, _, Some(lo), _) => lo,
        (_, _, None, Some(hi)) => hi,
        _ => f64::NAN,
    };
    let fmt_bound = |b: Option<f64>| b.map_or("-".to_string(), |v| format!("{v:.4}"));
    TestVerdict {
        kind: VerdictKind::BoundCheck,
        statistic: mean,
        threshold,
        pass: lower_ok && upper_ok,
        details: format!(
            "mean {mean:.4} ± {slack:.4} vs [{}, {}]",
            fmt_bound(lower),
            fmt_bound(upper)
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    SqrtN,
    SqrtNLogN,
    NLogN,
}

impl FitModel {
    pub const ALL: [FitModel; 3] = [FitModel::SqrtN, FitModel::SqrtNLogN, FitModel::NLogN];

    pub fn regressor(self, n: f64) -> f64 {
        match self {
            FitModel::SqrtN => n.sqrt(),
            FitModel::SqrtNLogN => n.sqrt() * n.ln(),
            FitModel::NLogN => n * n.ln(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FitModel::SqrtN => "sqrt_n",
            FitModel::SqrtNLogN => "sqrt_n_log_n",
            FitModel::NLogN => "n_log_n",
        }
    }
}

/// Leading term subtracted before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// `2n` (star graph).
    TwoN,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    pub n: f64,
    pub mean: f64,
    /// Standard error of `mean`; non-positive or NaN values fall back to an
    /// unweighted fit.
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderFit {
    pub model: FitModel,
    pub coefficient: f64,
    /// Weighted `||y - c x|| / ||y||`.
    pub residual_norm: f64,
}

/// One-parameter least squares of `mean - baseline` on the model
/// regressor, weighted by `1/stderr^2` when every point carries a positive
/// standard error.
pub fn fit_second_order(points: &[FitPoint], model: FitModel, baseline: Baseline) -> Result<SecondOrderFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateGrid(format!("{} points, need at least 4", points.len())));
    }
    if points.iter().any(|p| !(p.n > 1.0) || !p.mean.is_finite()) {
        return Err(Error::DegenerateGrid("grid values must exceed 1 and means be finite".into()));
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.n).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    if ns.len() < 2 {
        return Err(Error::DegenerateGrid("need at least two distinct n".into()));
    }
    let weighted = points.iter().all(|p| p.stderr > 0.0 && p.stderr.is_finite());
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    let rows: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| {
            let y = p.mean
                - match baseline {
                    Baseline::TwoN => 2.0 * p.n,
                    Baseline::Zero => 0.0,
                };
            let w = if weighted { 1.0 / (p.stderr * p.stderr) } else { 1.0 };
            (model.regressor(p.n), y, w)
        })
        .collect();
    for &(x, y, w) in &rows {
        sxy += w * x * y;
        sxx += w * x * x;
        syy += w * y * y;
    }
    let coefficient = sxy / sxx;
    let rss: f64 = rows
        .iter()
        .map(|&(x, y, w)| w * (y - coefficient * x).powi(2))
        .sum();
    let residual_norm = if syy > 0.0 { (rss / syy).sqrt() } else { 0.0 };
    Ok(SecondOrderFit {
        model,
        coefficient,
        residual_norm,
    })
}
