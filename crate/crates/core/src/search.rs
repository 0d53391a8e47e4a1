//! Parameter bisection driven by the first itinerary disagreement.

use rug::Float;

use crate::error::{Error, Result};

/// Outcome of comparing one candidate's itinerary with the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probe {
    /// 1-based index of the first disagreement, `None` if none within the horizon.
    pub first_diff: Option<usize>,
    /// Which side of the target the candidate sits on, in the twisted order.
    pub side: i8,
}

#[derive(Debug, Clone)]
pub struct Bracket {
    pub lo: Float,
    pub hi: Float,
    /// Symbols matched by each endpoint (first disagreement minus one).
    pub lo_match: usize,
    pub hi_match: usize,
    pub steps: usize,
    pub horizon: usize,
}

const MAX_STEPS: usize = 4096;

fn midpoint(lo: &Float, hi: &Float) -> Float {
    let exp_gap = match (lo.get_exp(), hi.get_exp()) {
        (Some(a), Some(b)) => (a - b).unsigned_abs(),
        _ => 0,
    };
    let prec = lo.prec().max(hi.prec()) + exp_gap + 2;
    let mut m = Float::with_val(prec, lo + hi);
    m /= 2;
    m
}

fn width_below(lo: &Float, hi: &Float, bits: u32) -> bool {
    let w = Float::with_val(lo.prec().max(hi.prec()) + 2, hi - lo).abs();
    w.is_zero() || w.get_exp().is_some_and(|e| e <= -(bits as i32))
}

/// Bisect until the bracket is narrower than 2^-bits and both endpoints match the
/// target through `need` symbols. `horizons` is the increasing list of comparison
/// lengths tried when a candidate matches everything it was shown.
pub fn kneading_bisect<F>(lo: Float, hi: Float, need: usize, bits: u32, horizons: &[usize], mut probe: F) -> Result<Bracket>
where
    F: FnMut(&Float, usize) -> Result<Probe>,
{
    let mut max_h = horizons[0];
    let mut decide = |x: &Float, max_h: &mut usize| -> Result<(i8, usize)> {
        for &h in horizons {
            *max_h = (*max_h).max(h);
            let p = probe(x, h)?;
            if let Some(k) = p.first_diff {
                return Ok((p.side, k - 1));
            }
        }
        Err(Error::Search(format!(
            "candidate matches the target through the horizon cap {}",
            horizons.last().unwrap()
        )))
    };
    let (s_lo, mut lo_match) = decide(&lo, &mut max_h)?;
    let (s_hi, mut hi_match) = decide(&hi, &mut max_h)?;
    if s_lo == s_hi {
        return Err(Error::Search("bracket endpoints lie on the same side of the target".into()));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut steps = 0;
    while !(width_below(&lo, &hi, bits) && lo_match >= need && hi_match >= need) {
        if steps >= MAX_STEPS {
            return Err(Error::Search(format!("no convergence after {MAX_STEPS} bisection steps")));
        }
        let mid = midpoint(&lo, &hi);
        let (s, m) = decide(&mid, &mut max_h)?;
        if s == s_lo {
            lo = mid;
            lo_match = m;
        } else {
            hi = mid;
            hi_match = m;
        }
        steps += 1;
    }
    Ok(Bracket { lo, hi, lo_match, hi_match, steps, horizon: max_h })
}
