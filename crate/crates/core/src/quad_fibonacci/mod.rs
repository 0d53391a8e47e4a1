//! The quadratic Fibonacci parameter and its measurable geometry.

mod cover;
mod scaling;

pub use cover::{
    build_cover, build_cover_from_orbit, cover_indices, dimension_estimate, gap_partner, model_cover_lengths,
    CoverEntry, CoverIndexEntry, CoverLabel, CoverLengths, CoverM, DimensionRow,
};
pub use scaling::{
    derivative_growth_fit, return_derivative_check, summability_series, scaling_report, GrowthFit, ReturnDerivativeRow, LinearFit, SummabilityReport,
    ScalingReport,
};

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fib_arith::u;
use crate::kneading::fib_signs;
use crate::mp_dynamics::{certified_digits, orbit_quadratic, MPValue, OrbitRecord, MAX_PRECISION};
use crate::search::{kneading_bisect, Probe};
use crate::sign::Sign;

/// The value printed in the literature, to 22 digits.
pub const REFERENCE_C: &str = "-1.8705286321646448888906";

/// Bracket for the Fibonacci parameter.
#[derive(Debug, Clone, Serialize)]
pub struct CBracket {
    pub depth: u32,
    pub bits: u32,
    pub lo: MPValue,
    pub hi: MPValue,
    pub steps: usize,
    /// Longest itinerary prefix compared.
    pub horizon: usize,
    /// Highest working precision used by a comparison.
    pub max_precision: u32,
}

impl CBracket {
    pub fn midpoint(&self) -> MPValue {
        let prec = self.lo.precision().max(self.hi.precision()) + 2;
        let mut m = Float::with_val(prec, self.lo.value() + self.hi.value());
        m /= 2;
        MPValue::new(m)
    }

    pub fn contains(&self, x: &MPValue) -> bool {
        self.lo.value() <= x.value() && x.value() <= self.hi.value()
    }

    pub fn width_log2(&self) -> f64 {
        let w = Float::with_val(self.lo.precision().max(self.hi.precision()) + 2, self.hi.value() - self.lo.value());
        crate::mp_dynamics::log2_abs(&w)
    }

    /// Decimal digits shared by both endpoints.
    pub fn digits(&self) -> u32 {
        let p = self.lo.precision().max(self.hi.precision());
        certified_digits(self.lo.value(), self.hi.value(), p)
    }

    /// Significant digits on which `x` agrees with the bracket midpoint.
    pub fn agreement_with(&self, x: &MPValue) -> u32 {
        let m = self.midpoint();
        certified_digits(x.value(), m.value(), m.precision().max(x.precision()))
    }
}

fn sign_i8(s: Sign) -> i8 {
    s.as_i8()
}

/// Compares the critical itinerary of x^2 + c with the target over `horizon` steps,
/// running p and 2p in lockstep and stopping at the first disagreement.
fn probe_quadratic(c: &Float, target: &[Sign], horizon: usize, p: u32) -> std::result::Result<Probe, usize> {
    let mut lo = Float::with_val(p, 0);
    let mut hi = Float::with_val(2 * p, 0);
    let mut negatives = 0usize;
    for i in 1..=horizon {
        lo.square_mut();
        lo += c;
        hi.square_mut();
        hi += c;
        let s: i8 = if lo.is_zero() && hi.is_zero() {
            0
        } else if hi.is_zero() || certified_digits(&lo, &hi, p) == 0 {
            return Err(i);
        } else if hi.is_sign_negative() {
            -1
        } else {
            1
        };
        let t = sign_i8(target[i - 1]);
        if s != t {
            let raw = (s - t).signum();
            let side = if negatives % 2 == 1 { -raw } else { raw };
            return Ok(Probe { first_diff: Some(i), side });
        }
        if t < 0 {
            negatives += 1;
        }
    }
    Ok(Probe { first_diff: None, side: 0 })
}

/// Like `probe_quadratic` from `start` bits, doubling precision on unresolved signs.
fn probe_escalating(c: &Float, target: &[Sign], horizon: usize, start: u32, max_used: &mut u32) -> Result<Probe> {
    let mut p = start.max(64).max(c.prec());
    loop {
        *max_used = (*max_used).max(p);
        match probe_quadratic(c, target, horizon, p) {
            Ok(probe) => return Ok(probe),
            Err(index) => {
                p *= 2;
                if p > MAX_PRECISION {
                    return Err(Error::Precision { index, detail: format!("sign unresolved at the {MAX_PRECISION}-bit cap") });
                }
            }
        }
    }
}

/// Side of `c` relative to the Fibonacci parameter in the twisted order, with the
/// first disagreement index. Exposed for diagnostics.
pub fn compare_itinerary(c: &MPValue, horizon: usize) -> Result<Probe> {
    let mut used = 0;
    probe_escalating(c.value(), &fib_signs(horizon).0, horizon, 2 * horizon as u32, &mut used)
}

/// Fibonacci index of the longest comparison. Parameters within 2^-B of the target
/// share roughly u(sqrt(6B)) symbols with it, so the cap grows with B.
fn horizon_cap(depth: u32, bits: u32) -> u32 {
    let m = (6.0 * (bits as f64 + 16.0)).sqrt().ceil() as u32 + 3;
    m.max(depth + 6).min(40)
}

/// Bisection on c in [-2, -1] until the itinerary matches the Fibonacci signs through
/// u(depth) at both endpoints and the bracket is narrower than 2^-bits.
pub fn find_c(depth: u32, bits: u32) -> Result<CBracket> {
    if depth < 5 {
        return Err(Error::Domain(format!("depth {depth} below 5")));
    }
    if bits < 64 {
        return Err(Error::Domain(format!("target bits {bits} below 64")));
    }
    let need = u(depth) as usize;
    let horizons: Vec<usize> = (depth..=horizon_cap(depth, bits)).map(|n| u(n) as usize).collect();
    let target = fib_signs(*horizons.last().unwrap()).0;
    let mut max_used = 0u32;
    let bracket = kneading_bisect(
        Float::with_val(64, -2),
        Float::with_val(64, -1),
        need,
        bits,
        &horizons,
        |c, h| probe_escalating(c, &target, h, 2 * need as u32, &mut max_used),
    )?;
    let (lo, hi) = if bracket.lo < bracket.hi { (bracket.lo, bracket.hi) } else { (bracket.hi, bracket.lo) };
    Ok(CBracket {
        depth,
        bits,
        lo: MPValue::new(lo),
        hi: MPValue::new(hi),
        steps: bracket.steps,
        horizon: bracket.horizon,
        max_precision: max_used,
    })
}

/// Orbit of a located parameter through `len` points, checked against the Fibonacci signs.
pub fn fibonacci_orbit(c: &MPValue, len: usize, p: u32) -> Result<OrbitRecord> {
    let orb = orbit_quadratic(c, len, p)?;
    let target = fib_signs(len);
    for i in 1..=len {
        let s = crate::mp_dynamics::certified_sign(&orb, i)?;
        if s != target.at(i) {
            return Err(Error::Structural(format!(
                "itinerary leaves the Fibonacci pattern at index {i}; locate c to a greater depth"
            )));
        }
    }
    Ok(orb)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosestReturns {
    pub depth: u32,
    /// d_n = |x_{u(n)}| for n = 1..=depth.
    pub d: Vec<f64>,
    /// First n with d_n >= d_{n-1}.
    pub decreasing_fails_at: Option<u32>,
    pub x4_negative: bool,
    /// First n <= 8 where an iterate f^i, i <= u(n-1), folds the interval between 0 and x_{u(n)}.
    pub injective_fails_at: Option<u32>,
    pub first_failure: Option<u32>,
    pub holds: bool,
}

/// Closest-return inequalities and the monotone-branch condition at small n.
pub fn verify_closest_returns(c: &MPValue, depth: u32, p: u32) -> Result<ClosestReturns> {
    let inj_top = depth.min(8);
    let len = (u(depth) as usize).max(u(inj_top + 1) as usize);
    let orb = orbit_quadratic(c, len, p)?;
    let abs_at = |i: u64| orb.x(i as usize).clone().abs();
    let d: Vec<f64> = (1..=depth).map(|n| abs_at(u(n)).to_f64()).collect();
    let decreasing_fails_at = (2..=depth).find(|&n| abs_at(u(n)) >= abs_at(u(n - 1)));
    let x4_negative = orb.x(4).is_sign_negative() && !orb.x(4).is_zero();
    let injective_fails_at = (2..=inj_top).find(|&n| {
        // 0 must stay outside the open interval between x_j and x_{u(n)+j}, 1 <= j < u(n-1)
        (1..u(n - 1)).any(|j| {
            let a = orb.x(j as usize);
            let b = orb.x((u(n) + j) as usize);
            (a.is_sign_negative() != b.is_sign_negative()) && !a.is_zero() && !b.is_zero()
        })
    });
    let mut first_failure = [decreasing_fails_at, injective_fails_at].into_iter().flatten().min();
    if !x4_negative && depth >= 3 {
        first_failure = Some(first_failure.map_or(3, |n| n.min(3)));
    }
    Ok(ClosestReturns {
        depth,
        d,
        decreasing_fails_at,
        x4_negative,
        injective_fails_at,
        holds: first_failure.is_none(),
        first_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_minus_two_probe() {
        let p = compare_itinerary(&MPValue::from_i64(-2, 64), 50).unwrap();
        assert_eq!(p.first_diff, Some(4));
        let q = compare_itinerary(&MPValue::from_i64(-1, 64), 50).unwrap();
        assert_eq!(q.first_diff, Some(2));
        assert_ne!(p.side, q.side);
    }

    #[test]
    fn coarse_bracket() {
        let b = find_c(5, 64).unwrap();
        assert!(b.lo_match_ok());
        let reference = MPValue::parse(REFERENCE_C, 128).unwrap();
        assert!(b.agreement_with(&reference) >= 15);
    }

    impl CBracket {
        fn lo_match_ok(&self) -> bool {
            self.lo < self.hi
        }
    }

    #[test]
    fn closest_returns_fail_for_full_map() {
        let r = verify_closest_returns(&MPValue::from_i64(-2, 64), 6, 128).unwrap();
        assert_eq!(r.decreasing_fails_at, Some(2));
        assert_eq!(r.first_failure, Some(2));
        assert!(!r.holds);
    }
}
