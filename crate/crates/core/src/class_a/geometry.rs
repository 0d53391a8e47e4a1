use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fib_arith::u;
use crate::mp_dynamics::{certified_digits, log2_abs, orbit_piecewise, MPValue, PiecewiseMap};

use super::renorm::{renormalize_numeric, RenormalizedMap};
use super::tune::tune_v;

#[derive(Debug, Clone, Serialize)]
pub struct GeometryParams {
    pub cs: Vec<f64>,
    pub lam: f64,
    /// Fibonacci depth the maps are tuned to.
    pub depth: u32,
    /// Level at which the a-estimate is read off.
    pub level: u32,
    pub precision: u32,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams { cs: vec![10.0, 20.0, 40.0], lam: 0.05, depth: 12, level: 10, precision: 256 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryRow {
    pub c: f64,
    #[serde(skip)]
    pub v: MPValue,
    /// v to the digits its bracket endpoints share.
    pub v_certified: String,
    /// d_2/d_1, which equals 1/c for this family.
    pub lambda_head: f64,
    /// (n, lambda_n) for n = 2..=level.
    pub lambda: Vec<(u32, f64)>,
    /// lambda_n 2^{n/3} at the chosen level.
    pub a: f64,
    /// The same estimate one level lower, on the map and on its renormalization.
    pub a_below: f64,
    pub a_renormalized: f64,
    pub a_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub params: GeometryParams,
    pub rows: Vec<GeometryRow>,
    pub a_decreasing: bool,
    pub ratio_reference: f64,
}

/// log2 d_k = log2 |x_{u(k)} - x0| for k = 1..=level on the critical orbit of `map`.
fn log_closest<M: PiecewiseMap + ?Sized>(map: &M, level: u32) -> Result<Vec<f64>> {
    let len = u(level) as usize;
    let crit = map.critical_point();
    let orb = orbit_piecewise(map, &MPValue::new(crit.clone()), len, map.precision())?;
    if orb.record.len() < len || orb.escape.is_some() {
        return Err(Error::Structural(format!("critical orbit stops before x_{len}")));
    }
    Ok((1..=level)
        .map(|k| {
            let d = Float::with_val(orb.record.precision * 2, orb.record.x(u(k) as usize) - &crit);
            log2_abs(&d)
        })
        .collect())
}

fn a_at(logs: &[f64], n: u32) -> f64 {
    let lam = (logs[n as usize - 1] - logs[n as usize - 2]).exp2();
    lam * (n as f64 / 3.0).exp2()
}

/// Tunes the explicit family for each c, reads off lambda_n and the a-estimate, and
/// compares it with the estimate on the once-renormalized map.
pub fn geometry_experiment(params: &GeometryParams) -> Result<GeometryReport> {
    if params.level < 4 || params.level > params.depth {
        return Err(Error::Domain(format!("level {} outside 4..=depth", params.level)));
    }
    let p = params.precision;
    let mut rows = Vec::new();
    for &c in &params.cs {
        let cf = Float::with_val(64, c);
        let lam = Float::with_val(64, params.lam);
        let bracket = tune_v(&cf, &lam, params.depth, p)?;
        let map = bracket.map(2 * p)?;
        let logs = log_closest(&map, params.level)?;
        let lambda: Vec<(u32, f64)> = (2..=params.level).map(|n| (n, (logs[n as usize - 1] - logs[n as usize - 2]).exp2())).collect();
        let renorm = renormalize_numeric(&RenormalizedMap::from_base(map.clone()), 2 * p)?;
        let logs_r = log_closest(&renorm, params.level - 1)?;
        let a_below = a_at(&logs, params.level - 1);
        let a_renormalized = a_at(&logs_r, params.level - 1);
        rows.push(GeometryRow {
            c,
            v: bracket.midpoint(),
            v_certified: bracket.midpoint().decimal(certified_digits(bracket.lo.value(), bracket.hi.value(), p)),
            lambda_head: lambda[0].1,
            a: a_at(&logs, params.level),
            a_below,
            a_renormalized,
            a_ratio: a_renormalized / a_below,
            lambda,
        });
    }
    let a_decreasing = rows.windows(2).all(|w| w[0].c < w[1].c && w[1].a < w[0].a);
    Ok(GeometryReport { params: params.clone(), rows, a_decreasing, ratio_reference: (-1.0f64 / 3.0).exp2() })
}
