use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fib_arith::{u, zeckendorf};
use crate::mp_dynamics::{derivative_product, log2_abs, log2_derivative, OrbitRecord};

use super::cover::{build_cover_from_orbit, cover_max_index};

/// Ordinary least squares y = slope x + intercept.
#[derive(Debug, Clone, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub max_residual: f64,
    /// Inclusive range of levels used.
    pub window: (u32, u32),
}

impl LinearFit {
    pub fn fit(xs: &[f64], ys: &[f64], window: (u32, u32)) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::Domain(format!("regression needs two or more points, got {}", xs.len())));
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let max_residual = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).abs()).fold(0.0, f64::max);
        let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
        Ok(LinearFit { slope, intercept, r2, max_residual, window })
    }
}

/// Closest-return geometry of the critical orbit.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub depth: u32,
    /// (n, d_n) for n = 1..=depth.
    pub d: Vec<(u32, f64)>,
    /// (n, lambda_n) for n = 2..=depth.
    pub lambda: Vec<(u32, f64)>,
    /// (n, lambda_{n+1}/lambda_n).
    pub ratio: Vec<(u32, f64)>,
    /// (n, lambda_n 2^{n/3}).
    pub a: Vec<(u32, f64)>,
    /// Fit of log2 lambda_n against n over the window.
    pub lambda_fit: LinearFit,
    /// Fit of log2 d_n + n^2/6 against n.
    pub d_fit: LinearFit,
    pub sup_lambda: f64,
    pub sup_lambda_pair: f64,
    /// (n, |M^n|).
    pub cover_measure: Vec<(u32, f64)>,
    /// Fit of log2 |M^n| against n.
    pub cover_fit: LinearFit,
}

impl ScalingReport {
    pub fn last_ratios(&self, k: usize) -> &[(u32, f64)] {
        &self.ratio[self.ratio.len().saturating_sub(k)..]
    }
}

fn default_window(lo: u32, hi: u32) -> (u32, u32) {
    (lo + (hi - lo).div_ceil(2), hi)
}

/// d_n, lambda_n, their fits and the cover measures for n up to `depth`. The orbit must
/// hold u(depth+2) certified points. `window` defaults to the top half of the levels.
pub fn scaling_report(orb: &OrbitRecord, depth: u32, window: Option<(u32, u32)>) -> Result<ScalingReport> {
    if depth < 4 {
        return Err(Error::Domain(format!("scaling needs depth >= 4, got {depth}")));
    }
    let need = cover_max_index(depth) as usize;
    if orb.certified_len() < need {
        return Err(Error::Precision { index: orb.certified_len() + 1, detail: format!("scaling to level {depth} needs {need} points") });
    }
    let log_d: Vec<f64> = (1..=depth).map(|n| log2_abs(orb.x(u(n) as usize))).collect();
    let d: Vec<(u32, f64)> = (1..=depth).zip(&log_d).map(|(n, l)| (n, l.exp2())).collect();
    let log_lambda: Vec<(u32, f64)> = (2..=depth).map(|n| (n, log_d[n as usize - 1] - log_d[n as usize - 2])).collect();
    let lambda: Vec<(u32, f64)> = log_lambda.iter().map(|&(n, l)| (n, l.exp2())).collect();
    let ratio: Vec<(u32, f64)> = lambda.windows(2).map(|w| (w[0].0, w[1].1 / w[0].1)).collect();
    let a: Vec<(u32, f64)> = lambda.iter().map(|&(n, l)| (n, l * (n as f64 / 3.0).exp2())).collect();

    let window = window.unwrap_or_else(|| default_window(2, depth));
    if window.0 < 2 || window.1 > depth || window.1 <= window.0 {
        return Err(Error::Domain(format!("window {:?} outside 2..={depth}", window)));
    }
    let in_window = |n: u32| n >= window.0 && n <= window.1;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        log_lambda.iter().filter(|(n, _)| in_window(*n)).map(|&(n, l)| (n as f64, l)).unzip();
    let lambda_fit = LinearFit::fit(&xs, &ys, window)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (1..=depth)
        .filter(|&n| in_window(n))
        .map(|n| (n as f64, log_d[n as usize - 1] + (n * n) as f64 / 6.0))
        .unzip();
    let d_fit = LinearFit::fit(&xs, &ys, window)?;

    let sup_lambda = lambda.iter().map(|l| l.1).fold(0.0, f64::max);
    let sup_lambda_pair = lambda.windows(2).map(|w| w[0].1 * w[1].1).fold(0.0, f64::max);

    let covers = build_cover_from_orbit(orb, depth)?;
    let cover_measure: Vec<(u32, f64)> = covers.iter().map(|c| (c.level, c.lengths().total)).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = cover_measure.iter().map(|&(n, m)| (n as f64, m.log2())).unzip();
    let cover_fit = LinearFit::fit(&xs, &ys, (1, depth))?;

    Ok(ScalingReport { depth, d, lambda, ratio, a, lambda_fit, d_fit, sup_lambda, sup_lambda_pair, cover_measure, cover_fit })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnDerivativeRow {
    pub n: u32,
    /// |(f^{u(n)-1})'(x_1)| d_{n+1}^2 / d_n.
    pub ratio: f64,
    pub log2_derivative: f64,
    /// The exact chain-rule splitting at u(n-1); `None` where it does not apply.
    pub chain_rule_exact: Option<bool>,
}

/// Derivative ratio table for n in `range`; the orbit must reach u(n+1) for each n.
pub fn return_derivative_check(orb: &OrbitRecord, range: std::ops::RangeInclusive<u32>) -> Result<Vec<ReturnDerivativeRow>> {
    let mut rows = Vec::new();
    for n in range {
        if n < 2 {
            return Err(Error::Domain("derivative ratios start at n = 2".into()));
        }
        if orb.certified_len() < u(n + 1) as usize {
            return Err(Error::Precision { index: orb.certified_len() + 1, detail: format!("ratio at n = {n} needs x_{}", u(n + 1)) });
        }
        let len = u(n) as usize - 1;
        let l = log2_derivative(orb, 1, len);
        let ld_n = log2_abs(orb.x(u(n) as usize));
        let ld_n1 = log2_abs(orb.x(u(n + 1) as usize));
        let ratio = (l + 2.0 * ld_n1 - ld_n).exp2();
        let chain_rule_exact = if n >= 3 {
            let a = u(n - 1) as usize;
            let whole = derivative_product(orb, 1, len)?;
            let left = derivative_product(orb, 1, a - 1)?;
            let mid = derivative_product(orb, a, 1)?;
            let right = derivative_product(orb, a + 1, u(n - 2) as usize - 1)?;
            let prec = left.precision() + mid.precision() + right.precision();
            let mut prod = rug::Float::with_val(prec, left.value() * mid.value());
            prod *= right.value();
            Some(&prod == whole.value())
        } else {
            None
        };
        rows.push(ReturnDerivativeRow { n, ratio, log2_derivative: l, chain_rule_exact });
    }
    Ok(rows)
}

/// Cumulative log2 |(f^n)'(x_1)| for n = 1..=len.
fn cumulative_log_derivative(orb: &OrbitRecord, len: usize) -> Vec<f64> {
    let mut acc = 0.0;
    (1..=len)
        .map(|i| {
            acc += 1.0 + log2_abs(orb.x(i));
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub n_max: usize,
    /// Coefficient of sum m s_m.
    pub m_coeff: f64,
    pub gamma: f64,
    pub delta: f64,
    pub max_residual: f64,
    /// Slope of log2 |(f^{u(m)})'(x_1)| against log2 u(m).
    pub power_slope: f64,
    /// 2 ln 2 / (3 ln golden ratio).
    pub power_reference: f64,
}

/// Regression of log2 |(f^n)'(x_1)| on the Zeckendorf digit sums of n, n <= n_max.
pub fn derivative_growth_fit(orb: &OrbitRecord, n_max: usize) -> Result<GrowthFit> {
    if n_max < 8 {
        return Err(Error::Domain(format!("growth fit needs n_max >= 8, got {n_max}")));
    }
    if orb.certified_len() < n_max {
        return Err(Error::Precision { index: orb.certified_len() + 1, detail: format!("growth fit needs {n_max} points") });
    }
    let logs = cumulative_log_derivative(orb, n_max);
    let mut design = DMatrix::<f64>::zeros(n_max, 3);
    for n in 1..=n_max {
        let z = zeckendorf(n as u64)?;
        let ms: u32 = z.indices().iter().sum();
        design[(n - 1, 0)] = ms as f64;
        design[(n - 1, 1)] = z.indices().len() as f64;
        design[(n - 1, 2)] = 1.0;
    }
    let rhs = DVector::from_vec(logs.clone());
    let svd = design.clone().svd(true, true);
    let beta = svd.solve(&rhs, 1e-12).map_err(|e| Error::Domain(format!("least squares failed: {e}")))?;
    let resid = &design * &beta - &rhs;
    let max_residual = resid.iter().map(|r| r.abs()).fold(0.0, f64::max);

    let (xs, ys): (Vec<f64>, Vec<f64>) = (3..)
        .map_while(|m| (u(m) as usize <= n_max).then_some(m))
        .map(|m| ((u(m) as f64).log2(), logs[u(m) as usize - 1]))
        .unzip();
    let power = LinearFit::fit(&xs, &ys, (3, 3 + xs.len() as u32 - 1))?;
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    Ok(GrowthFit {
        n_max,
        m_coeff: beta[0],
        gamma: beta[1],
        delta: beta[2],
        max_residual,
        power_slope: power.slope,
        power_reference: 2.0 * std::f64::consts::LN_2 / (3.0 * golden.ln()),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SummabilityReport {
    pub alpha: f64,
    pub n_max: usize,
    /// Partial sums S_n at n = 1, 2, 4, ... and n_max.
    pub samples: Vec<(usize, f64)>,
    pub total: f64,
    /// First n whose increment |(f^n)'(x_1)|^{-alpha} is below `threshold`.
    pub first_small_increment: Option<usize>,
    pub threshold: f64,
    /// Increment mass over (n_max/2, n_max].
    pub last_half_increment: f64,
}

/// Partial sums of |(f^n)'(x_1)|^{-alpha} for n <= n_max.
pub fn summability_series(orb: &OrbitRecord, alpha: f64, n_max: usize, threshold: f64) -> Result<SummabilityReport> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if orb.certified_len() < n_max || n_max == 0 {
        return Err(Error::Precision { index: orb.certified_len() + 1, detail: format!("series needs {n_max} points") });
    }
    let logs = cumulative_log_derivative(orb, n_max);
    let mut total = 0.0;
    let mut samples = Vec::new();
    let mut first_small_increment = None;
    let mut last_half_increment = 0.0;
    for (i, l) in logs.iter().enumerate() {
        let n = i + 1;
        let term = (-alpha * l).exp2();
        total += term;
        if first_small_increment.is_none() && term < threshold {
            first_small_increment = Some(n);
        }
        if n > n_max / 2 {
            last_half_increment += term;
        }
        if n.is_power_of_two() || n == n_max {
            samples.push((n, total));
        }
    }
    Ok(SummabilityReport { alpha, n_max, samples, total, first_small_increment, threshold, last_half_increment })
}
