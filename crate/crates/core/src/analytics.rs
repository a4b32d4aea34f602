//! Closed-form counts, the probabilistic count heuristic, and runtime-distribution fits.

use std::f64::consts::PI;

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::geometry::gcd;
use crate::portfolio::EmpiricalCdf;

/// Exact number of collinear triples in G_n:
/// `2 Σ_{a,b=1}^{n-1} (n-a)(n-b) gcd(a,b) − n²(n²−1)/6`.
pub fn triple_count_formula(n: usize) -> u128 {
    let n = n as u128;
    if n < 2 {
        return 0;
    }
    let mut sum: u128 = 0;
    for a in 1..n {
        for b in 1..n {
            sum += (n - a) * (n - b) * gcd(a as u64, b as u64) as u128;
        }
    }
    2 * sum - n * n * (n * n - 1) / 6
}

fn binom3(m: u128) -> u128 {
    if m < 3 {
        0
    } else {
        m * (m - 1) * (m - 2) / 6
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeuristicParams {
    pub n: usize,
    pub k: usize,
    pub t_n: u128,
    /// Probability that a uniformly random triple of grid points is collinear.
    pub q_n: f64,
    /// Natural log of the heuristic count `C(n, k)`.
    pub log_c: f64,
}

/// `t_n / C(n², 3)`, formed from exact integers before the final division.
pub fn collinear_probability(n: usize) -> f64 {
    let total = binom3((n * n) as u128);
    if total == 0 {
        return 0.0;
    }
    triple_count_formula(n) as f64 / total as f64
}

/// `log C(n,k) = log binom(n², k) + binom(k, 3) · log(1 − q_n)`.
pub fn heuristic_params(n: usize, k: usize) -> Result<HeuristicParams> {
    if n < 2 {
        return Err(Error::invalid(format!("grid size must be at least 2, got {n}")));
    }
    if k > n * n {
        return Err(Error::invalid(format!("k = {k} exceeds the {} grid points", n * n)));
    }
    let t_n = triple_count_formula(n);
    let q_n = collinear_probability(n);
    let log_c = ln_binomial((n * n) as u64, k as u64) + binom3(k as u128) as f64 * (-q_n).ln_1p();
    Ok(HeuristicParams {
        n,
        k,
        t_n,
        q_n,
        log_c,
    })
}

pub fn heuristic_count_log(n: usize, k: usize) -> Result<f64> {
    heuristic_params(n, k).map(|h| h.log_c)
}

/// Density at which the leading coefficient of `log C(n, λn)` changes sign.
pub const LAMBDA_C: f64 = 1.813_799_364_234_217_8;

/// `λ(π² − 3λ²)/π²`, the coefficient of `n log n` in `log C(n, λn)`.
pub fn leading_coefficient(lambda: f64) -> f64 {
    lambda * (PI * PI - 3.0 * lambda * lambda) / (PI * PI)
}

/// `1 − (1 − p)^M`, evaluated without cancellation for small `p`.
pub fn parallel_probability(p: f64, m: u32) -> f64 {
    if p >= 1.0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    -(m as f64 * (-p).ln_1p()).exp_m1()
}

/// Distribution of the first success among `m` independent copies of a run.
#[derive(Clone, Debug)]
pub struct ParallelCdf<'a> {
    base: &'a EmpiricalCdf,
    m: u32,
}

pub fn cdf_transform(f: &EmpiricalCdf, m: u32) -> Result<ParallelCdf<'_>> {
    if m == 0 {
        return Err(Error::invalid("parallelism must be at least 1"));
    }
    Ok(ParallelCdf { base: f, m })
}

impl ParallelCdf<'_> {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn eval(&self, t: f64) -> f64 {
        parallel_probability(self.base.eval(t), self.m)
    }

    /// `(t, F_M(t))` at every jump of the underlying step function.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.base
            .points()
            .into_iter()
            .map(|(t, p)| (t, parallel_probability(p, self.m)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ShiftedExpFit {
    /// Threshold time in seconds.
    pub t0: f64,
    /// Delay scale in seconds.
    pub t1: f64,
    pub m: u32,
    /// Time span of the points used.
    pub fit_window: (f64, f64),
}

impl ShiftedExpFit {
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.t0 {
            0.0
        } else {
            -(-(self.m as f64) * (t - self.t0) / self.t1).exp_m1()
        }
    }
}

/// Which points of `(t, F_M(t))` enter the fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitWindow {
    pub t_range: Option<(f64, f64)>,
    /// Points with `F_M(t)` above this are dropped.
    pub max_probability: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow {
            t_range: None,
            max_probability: 0.98,
        }
    }
}

/// Least-squares line `y = a·t + b` through `(t, −log(1 − F_M(t)))`, giving
/// `t1 = M/a` and `t0 = −b/a`.
pub fn fit_shifted_exponential(
    samples: &[(f64, f64)],
    m: u32,
    window: FitWindow,
) -> Result<ShiftedExpFit> {
    if m == 0 {
        return Err(Error::invalid("parallelism must be at least 1"));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(t, p)| {
            p > 0.0
                && p < 1.0
                && p <= window.max_probability
                && window.t_range.is_none_or(|(lo, hi)| t >= lo && t <= hi)
        })
        .map(|(t, p)| (t, -(-p).ln_1p()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::FitFailure(format!(
            "need at least 2 points inside the window, found {}",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(t, y) in &pts {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::FitFailure("all points share one time".into()));
    }
    let a = sxy / sxx;
    let b = mean_y - a * mean_t;
    if !(a > 0.0) {
        return Err(Error::FitFailure(format!("non-positive slope {a}")));
    }
    let t0 = -b / a;
    if t0 < 0.0 {
        return Err(Error::FitFailure(format!("negative threshold t0 = {t0}")));
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(ShiftedExpFit {
        t0,
        t1: m as f64 / a,
        m,
        fit_window: (lo, hi),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct FitStatistics {
    pub mean: f64,
    pub quantile: f64,
}

/// Mean `t0 + t1/M` and quantile `t0 + (t1/M)·log(1/(1−p))`.
pub fn fit_statistics(fit: &ShiftedExpFit, p: f64) -> Result<FitStatistics> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("quantile level must lie in (0, 1), got {p}")));
    }
    let scale = fit.t1 / fit.m as f64;
    Ok(FitStatistics {
        mean: fit.t0 + scale,
        quantile: fit.t0 - scale * (-p).ln_1p(),
    })
}

/// Least-squares fit of `log t` against `n`, returned as `(slope, intercept)`.
pub fn log_linear_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(n, t)| (n, t.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::FitFailure("need at least 2 positive times".into()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitFailure("all points share one size".into()));
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Ok((slope, my - slope * mx))
}
