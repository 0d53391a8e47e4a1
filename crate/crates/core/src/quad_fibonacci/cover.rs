use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fib_arith::{u, zeckendorf, zeckendorf_or_empty};
use crate::model_map::{order_compare, y_value, ModelParams};
use crate::mp_dynamics::{orbit_quadratic, MPValue, OrbitRecord};

/// u(n) extended by u(-1) = 0.
fn u_ext(n: i64) -> u64 {
    if n < 0 {
        0
    } else {
        u(n as u32)
    }
}

/// Partner of a gap endpoint index: the other end of the complementary interval.
pub fn gap_partner(m: u64) -> Result<u64> {
    if m < 3 {
        return Err(Error::Domain(format!("index {m} is not an interior gap endpoint")));
    }
    let z = zeckendorf(m)?;
    let idx = z.indices();
    let k = idx.len();
    let prefix: u64 = idx[..k.saturating_sub(1)].iter().map(|&n| u(n)).sum();
    if k == 1 {
        let n = idx[0];
        return Ok(if n % 2 == 1 { u(n - 1) + u(n + 1) } else { u(n - 3) + u(n - 1) });
    }
    let (a, b) = (idx[k - 2], idx[k - 1]);
    if b == a + 2 {
        if k == 2 {
            return Ok(if a % 2 == 0 { u(a + 1) } else { u(a + 3) });
        }
        let before: u64 = idx[..k - 2].iter().map(|&n| u(n)).sum();
        return Ok(before + u(a + 1));
    }
    Ok(prefix + u(b - 1) + u(b + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoverLabel {
    I,
    J,
}

/// One interval of M^n in orbit indices, `p` left of `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverIndexEntry {
    pub label: CoverLabel,
    pub level: u32,
    pub k: u64,
    pub p: u64,
    pub q: u64,
}

fn i_indices(n: u32, k: u64) -> (u64, u64) {
    if k == 0 {
        let other = if n % 2 == 1 { u(n + 1) } else { u(n + 2) };
        (u(n), other)
    } else {
        (k, u(n) + k)
    }
}

fn sym_cmp(a: u64, b: u64) -> Ordering {
    order_compare(&zeckendorf_or_empty(a), &zeckendorf_or_empty(b))
}

/// The u(n) intervals of M^n as orbit-index pairs, left to right, ordered symbolically.
pub fn cover_indices(n: u32) -> Result<Vec<CoverIndexEntry>> {
    if n == 0 || n + 2 > 80 {
        return Err(Error::Domain(format!("cover level {n} outside 1..=78")));
    }
    let mut out = Vec::with_capacity(u(n) as usize);
    let mut push = |label, k, (a, b): (u64, u64)| {
        let (p, q) = if sym_cmp(a, b) == Ordering::Less { (a, b) } else { (b, a) };
        out.push(CoverIndexEntry { label, level: n, k, p, q });
    };
    for k in 0..u_ext(n as i64 - 1) {
        push(CoverLabel::I, k, i_indices(n, k));
    }
    for k in 0..u_ext(n as i64 - 2) {
        push(CoverLabel::J, k, i_indices(n + 1, k + u_ext(n as i64 - 1)));
    }
    out.sort_by(|x, y| sym_cmp(x.p, y.p));
    Ok(out)
}

/// Largest orbit index referenced by M^n.
pub fn cover_max_index(n: u32) -> u64 {
    u(n + 2)
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverEntry {
    #[serde(flatten)]
    pub index: CoverIndexEntry,
    pub lo: MPValue,
    pub hi: MPValue,
}

impl CoverEntry {
    pub fn length(&self) -> Float {
        Float::with_val(self.lo.precision().max(self.hi.precision()), self.hi.value() - self.lo.value())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverM {
    pub level: u32,
    pub entries: Vec<CoverEntry>,
}

impl CoverM {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Complementary gaps between consecutive intervals, as (right end, next left end).
    pub fn gaps(&self) -> Vec<(u64, u64)> {
        self.entries.windows(2).map(|w| (w[0].index.q, w[1].index.p)).collect()
    }

    pub fn lengths(&self) -> CoverLengths {
        let lens: Vec<f64> = self.entries.iter().map(|e| e.length().to_f64()).collect();
        let span = Float::with_val(
            self.entries[0].lo.precision(),
            self.entries.last().unwrap().hi.value() - self.entries[0].lo.value(),
        );
        CoverLengths::from_lengths(self.level, &lens, span.to_f64())
    }
}

/// Numeric validation of the symbolic cover against an orbit.
fn realize(orb: &OrbitRecord, entries: Vec<CoverIndexEntry>) -> Result<Vec<CoverEntry>> {
    let level = entries[0].level;
    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        let (lo, hi) = (orb.x(e.p as usize), orb.x(e.q as usize));
        if lo >= hi {
            return Err(Error::Structural(format!(
                "level {level}: x_{} is not left of x_{} numerically",
                e.p, e.q
            )));
        }
        out.push(CoverEntry { lo: MPValue::new(lo.clone()), hi: MPValue::new(hi.clone()), index: e });
    }
    for w in out.windows(2) {
        if w[0].hi.value() >= w[1].lo.value() {
            return Err(Error::Structural(format!(
                "level {level}: intervals ending x_{} and starting x_{} overlap",
                w[0].index.q, w[1].index.p
            )));
        }
    }
    Ok(out)
}

fn check_nested(inner: &CoverM, outer: &CoverM) -> Result<()> {
    let mut j = 0;
    for e in &inner.entries {
        while j < outer.entries.len() && outer.entries[j].hi.value() < e.hi.value() {
            j += 1;
        }
        let ok = outer.entries.get(j).is_some_and(|o| o.lo.value() <= e.lo.value() && e.hi.value() <= o.hi.value());
        if !ok {
            return Err(Error::Structural(format!(
                "level {}: [x_{}, x_{}] not inside any interval of level {}",
                inner.level, e.index.p, e.index.q, outer.level
            )));
        }
    }
    Ok(())
}

/// Covers M^1..M^n from an orbit holding at least u(n+2) points, each validated
/// for count, disjointness and nesting in its predecessor.
pub fn build_cover_from_orbit(orb: &OrbitRecord, n: u32) -> Result<Vec<CoverM>> {
    let need = cover_max_index(n) as usize;
    if orb.certified_len() < need {
        return Err(Error::Precision {
            index: orb.certified_len() + 1,
            detail: format!("cover level {n} needs {need} certified points"),
        });
    }
    let mut covers: Vec<CoverM> = Vec::with_capacity(n as usize);
    for level in 1..=n {
        let entries = realize(orb, cover_indices(level)?)?;
        if entries.len() as u64 != u(level) {
            return Err(Error::Structural(format!("level {level} has {} intervals", entries.len())));
        }
        let cover = CoverM { level, entries };
        if let Some(prev) = covers.last() {
            check_nested(&cover, prev)?;
        }
        covers.push(cover);
    }
    Ok(covers)
}

/// M^n at parameter c, validated through all lower levels.
pub fn build_cover(c: &MPValue, n: u32, p: u32) -> Result<CoverM> {
    let orb = orbit_quadratic(c, cover_max_index(n) as usize, p)?;
    Ok(build_cover_from_orbit(&orb, n)?.pop().unwrap())
}

/// Interval lengths of one cover level.
#[derive(Debug, Clone, Serialize)]
pub struct CoverLengths {
    pub level: u32,
    pub count: usize,
    pub max_len: f64,
    pub total: f64,
    /// Length of M^1, the normalising scale.
    pub span: f64,
}

impl CoverLengths {
    fn from_lengths(level: u32, lens: &[f64], span: f64) -> Self {
        CoverLengths {
            level,
            count: lens.len(),
            max_len: lens.iter().cloned().fold(0.0, f64::max),
            total: lens.iter().sum(),
            span,
        }
    }
}

/// The same covers for the model map, with exact endpoint values.
pub fn model_cover_lengths(params: &ModelParams, n_max: u32) -> Result<Vec<CoverLengths>> {
    let span = (y_value(2, params) - y_value(1, params)).abs().to_f64().unwrap_or(f64::NAN);
    (1..=n_max)
        .map(|level| {
            let lens: Vec<f64> = cover_indices(level)?
                .iter()
                .map(|e| {
                    let d: BigRational = y_value(e.q, params) - y_value(e.p, params);
                    d.to_f64().unwrap_or(f64::NAN)
                })
                .collect();
            if lens.iter().any(|&l| l <= 0.0) {
                return Err(Error::Structural(format!("model cover level {level} has a degenerate interval")));
            }
            Ok(CoverLengths::from_lengths(level, &lens, span))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionRow {
    pub level: u32,
    pub count: usize,
    pub max_len: f64,
    /// log u(n) / -log(max length / |M^1|).
    pub estimate: f64,
}

/// Count/length dimension proxy per level; level 1 is the scale and is skipped.
pub fn dimension_estimate(covers: &[CoverLengths]) -> Vec<DimensionRow> {
    covers
        .iter()
        .filter(|c| c.level >= 2)
        .map(|c| DimensionRow {
            level: c.level,
            count: c.count,
            max_len: c.max_len,
            estimate: (c.count as f64).ln() / -(c.max_len / c.span).ln(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(n: u32) -> Vec<(u64, u64)> {
        cover_indices(n).unwrap().iter().map(|e| (e.p, e.q)).collect()
    }

    #[test]
    fn displayed_covers() {
        assert_eq!(pairs(1), vec![(1, 2)]);
        assert_eq!(pairs(2), vec![(1, 4), (5, 2)]);
        assert_eq!(pairs(3), vec![(1, 4), (5, 3), (7, 2)]);
        assert_eq!(pairs(4), vec![(1, 6), (12, 4), (5, 13), (11, 3), (7, 2)]);
        assert_eq!(
            pairs(5),
            vec![(1, 9), (19, 6), (12, 4), (5, 18), (8, 13), (11, 3), (7, 20), (10, 2)]
        );
    }

    #[test]
    fn first_gaps_and_partners() {
        let cover = cover_indices(5).unwrap();
        let gaps: Vec<(u64, u64)> = cover.windows(2).map(|w| (w[0].q, w[1].p)).collect();
        assert_eq!(gaps, vec![(9, 19), (6, 12), (4, 5), (18, 8), (13, 11), (3, 7), (20, 10)]);
        for (a, b) in gaps {
            assert!(gap_partner(a).unwrap() == b || gap_partner(b).unwrap() == a);
        }
        assert_eq!(gap_partner(9).unwrap(), 19);
        assert_eq!(gap_partner(4).unwrap(), 5);
        assert_eq!(gap_partner(3).unwrap(), 7);
        assert!(gap_partner(2).is_err());
    }

    #[test]
    fn partner_is_an_involution_on_gaps() {
        for n in 2..=12 {
            let cover = cover_indices(n).unwrap();
            for w in cover.windows(2) {
                let (a, b) = (w[0].q, w[1].p);
                assert_eq!(gap_partner(a).unwrap(), b, "level {n} gap ({a},{b})");
                assert_eq!(gap_partner(b).unwrap(), a, "level {n} gap ({a},{b})");
            }
        }
    }

    #[test]
    fn model_cover_positive() {
        let l = model_cover_lengths(&ModelParams::half(), 10).unwrap();
        assert_eq!(l[9].count, 89);
    }
}
