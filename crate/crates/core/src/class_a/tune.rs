use std::cmp::Ordering;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fib_arith::u;
use crate::kneading::{fib_class_a, Symbol};
use crate::mp_dynamics::{certified_digits, MPValue, PiecewiseMap, Place, MAX_PRECISION};
use crate::search::{kneading_bisect, Probe};
use crate::sign::Sign;

use super::{example_map, ClassAMap};

fn place_of(s: Symbol) -> Place {
    match s {
        Symbol::J => Place::J,
        Symbol::TMinus => Place::TMinus,
        Symbol::TPlus => Place::TPlus,
    }
}

/// Compares the critical orbit of `map` with `target`, running p and 2p in lockstep
/// and stopping at the first disagreement. `Err(i)` means the place of x_i is not
/// resolved at this precision.
pub fn probe_piecewise<M: PiecewiseMap + ?Sized>(map: &M, target: &[Symbol], p: u32) -> std::result::Result<Probe, usize> {
    let crit = map.critical_point();
    let mut lo = Float::with_val(p, &crit);
    let mut hi = Float::with_val(2 * p, &crit);
    let mut place = Place::Critical;
    let mut twist = Sign::Plus;
    for (i, &want) in target.iter().enumerate() {
        let i = i + 1;
        lo = map.image(&lo, place, p).map_err(|_| i)?;
        hi = map.image(&hi, place, 2 * p).map_err(|_| i)?;
        let (pl, ph) = (map.place(&lo), map.place(&hi));
        // a hit within tolerance of the critical point counts as the critical point
        if pl != ph || (ph != Place::Critical && certified_digits(&lo, &hi, p) == 0) {
            return Err(i);
        }
        let want = place_of(want);
        if ph != want {
            let raw: i8 = match ph.cmp(&want) {
                Ordering::Less => -1,
                _ => 1,
            };
            return Ok(Probe { first_diff: Some(i), side: raw * twist.as_i8() });
        }
        twist = twist * map.orientation(ph);
        place = ph;
    }
    Ok(Probe { first_diff: None, side: 0 })
}

/// Bracket on v for the explicit family.
#[derive(Debug, Clone, Serialize)]
pub struct VBracket {
    pub c: MPValue,
    pub lam: MPValue,
    pub depth: u32,
    pub lo: MPValue,
    pub hi: MPValue,
    pub steps: usize,
    pub horizon: usize,
    pub max_precision: u32,
}

impl VBracket {
    pub fn midpoint(&self) -> MPValue {
        let prec = self.lo.precision().max(self.hi.precision()) + 2;
        let mut m = Float::with_val(prec, self.lo.value() + self.hi.value());
        m /= 2;
        MPValue::new(m)
    }

    /// The example map at the bracket midpoint, built at `prec` bits.
    pub fn map(&self, prec: u32) -> Result<ClassAMap> {
        let v = self.midpoint();
        example_map(self.c.value(), self.lam.value(), v.value(), prec.max(v.precision()))
    }
}

fn probe_v(c: &Float, lam: &Float, v: &Float, target: &[Symbol], start: u32, max_used: &mut u32) -> Result<Probe> {
    let mut p = start.max(64);
    loop {
        *max_used = (*max_used).max(p);
        let pp = p.max(v.prec());
        let map = example_map(c, lam, v, pp)?;
        match probe_piecewise(&map, target, pp) {
            Ok(probe) => return Ok(probe),
            Err(index) => {
                p *= 2;
                if p > MAX_PRECISION {
                    return Err(Error::Precision { index, detail: format!("place unresolved at the {MAX_PRECISION}-bit cap") });
                }
            }
        }
    }
}

/// Bisection on v in [0, lam] until both ends follow fib^+ through u(depth).
pub fn tune_v(c: &Float, lam: &Float, depth: u32, p: u32) -> Result<VBracket> {
    if depth < 4 {
        return Err(Error::Domain(format!("depth {depth} below 4")));
    }
    let need = u(depth) as usize;
    let horizons: Vec<usize> = (depth..=depth + 10).map(|n| u(n) as usize).collect();
    let target = fib_class_a(Sign::Plus, *horizons.last().unwrap()).symbols;
    let prec = p.max(64);
    let lam = Float::with_val(prec.max(lam.prec()), lam);
    let c = Float::with_val(prec.max(c.prec()), c);
    // x_1 must land in J for every v
    let head = example_map(&c, &lam, &Float::with_val(prec, 0), prec)?;
    if head.place(&Float::with_val(prec, -&c)) != Place::J {
        return Err(Error::Shape("x_1 is not in J".into()));
    }
    let mut max_used = 0;
    let b = kneading_bisect(
        Float::with_val(prec, 0),
        lam.clone(),
        need,
        0,
        &horizons,
        |v, h| probe_v(&c, &lam, v, &target[..h], prec, &mut max_used),
    )?;
    let (lo, hi) = if b.lo <= b.hi { (b.lo, b.hi) } else { (b.hi, b.lo) };
    Ok(VBracket {
        c: MPValue::new(c),
        lam: MPValue::new(lam),
        depth,
        lo: MPValue::new(lo),
        hi: MPValue::new(hi),
        steps: b.steps,
        horizon: b.horizon,
        max_precision: max_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp_dynamics::orbit_piecewise;

    #[test]
    fn tuned_map_follows_fib() {
        let b = tune_v(&Float::with_val(64, 10), &Float::with_val(64, 0.05), 8, 128).unwrap();
        let map = b.map(256).unwrap();
        let o = orbit_piecewise(&map, &MPValue::from_i64(0, 256), 34, 256).unwrap();
        assert_eq!(o.symbols, fib_class_a(Sign::Plus, 34));
    }

    #[test]
    fn shallow_depth_is_a_domain_error() {
        let r = tune_v(&Float::with_val(64, 10), &Float::with_val(64, 0.05), 3, 128);
        assert!(matches!(r, Err(Error::Domain(_))), "{r:?}");
    }
}
