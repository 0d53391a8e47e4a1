//! The piecewise-linear model map F on [y_1, y_2] and the golden-rotation coordinate phi.

mod surd;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use surd::QuadSurd;

use crate::error::{Error, Result};
use crate::fib_arith::{u, zeckendorf_or_empty, FibIndexSet};

pub const DEFAULT_CELL_DEPTH: u32 = 40;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelParams {
    t: BigRational,
}

impl ModelParams {
    pub fn new(t: BigRational) -> Result<Self> {
        if !t.is_positive() || &t * &t + &t >= BigRational::one() {
            return Err(Error::Domain(format!("model parameter t = {t} needs 0 < t and t^2 + t < 1")));
        }
        Ok(ModelParams { t })
    }

    pub fn half() -> Self {
        ModelParams { t: BigRational::new(1.into(), 2.into()) }
    }

    pub fn t(&self) -> &BigRational {
        &self.t
    }

    fn pow(&self, n: u32) -> BigRational {
        num_traits::pow(self.t.clone(), n as usize)
    }
}

/// Leading sign of y with first index n: negative for n = 0, 1 mod 4.
fn leading_negative(n: u32) -> bool {
    n % 4 <= 1
}

/// y for an index set: +-(t^{n1} - t^{n2} + ...), period-2 tails summed in closed form.
pub fn y_of_set(s: &FibIndexSet, p: &ModelParams) -> BigRational {
    let Some(lead) = s.leading() else {
        return BigRational::zero();
    };
    let mut sum = BigRational::zero();
    let mut positive = true;
    for &n in s.indices() {
        let term = p.pow(n);
        sum = if positive { sum + term } else { sum - term };
        positive = !positive;
    }
    if let Some(st) = s.tail() {
        let tail = p.pow(st) / (BigRational::one() + &p.t * &p.t);
        sum = if positive { sum + tail } else { sum - tail };
    }
    if leading_negative(lead) {
        -sum
    } else {
        sum
    }
}

pub fn y_value(m: u64, p: &ModelParams) -> BigRational {
    y_of_set(&zeckendorf_or_empty(m), p)
}

/// Symbolic order of y values: leading summands first, then the alternating refinement.
pub fn order_compare(m1: &FibIndexSet, m2: &FibIndexSet) -> Ordering {
    if m1 == m2 {
        return Ordering::Equal;
    }
    let bound = [m1, m2]
        .iter()
        .map(|s| s.indices().last().copied().unwrap_or(0).max(s.tail().unwrap_or(0)))
        .max()
        .unwrap()
        + 4;
    let a = m1.indices_upto(bound);
    let b = m2.indices_upto(bound);
    // key of a leading index: sign and magnitude rank
    let lead_key = |n: Option<&u32>| -> (i32, i64) {
        match n {
            None => (0, 0),
            Some(&n) if leading_negative(n) => (-1, n as i64),
            Some(&n) => (1, -(n as i64)),
        }
    };
    if a.first() != b.first() {
        return lead_key(a.first()).cmp(&lead_key(b.first()));
    }
    let sign = if leading_negative(a[0]) { -1 } else { 1 };
    let k = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    // magnitude = common + (-1)^k |rest|, |rest| decreasing in its leading index
    let next = |v: &[u32]| v.get(k).map_or(u64::MAX, |&n| n as u64);
    let rest_order = next(&b).cmp(&next(&a)); // |rest_a| vs |rest_b|
    let mag = if k % 2 == 1 { rest_order.reverse() } else { rest_order };
    if sign < 0 {
        mag.reverse()
    } else {
        mag
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    /// A_n: F has slope +-1.
    Branch(u32),
    /// The gap between A_n and A_{n+4}.
    Gap(u32),
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub kind: CellKind,
    pub lo: BigRational,
    pub hi: BigRational,
    pub f_lo: BigRational,
    pub f_hi: BigRational,
}

impl Cell {
    pub fn slope(&self) -> BigRational {
        (&self.f_hi - &self.f_lo) / (&self.hi - &self.lo)
    }

    fn eval(&self, x: &BigRational) -> BigRational {
        &self.f_lo + self.slope() * (x - &self.lo)
    }
}

/// F with its cells enumerated to a fixed depth.
#[derive(Debug, Clone)]
pub struct ModelMap {
    params: ModelParams,
    cells: Vec<Cell>,
    limits: [BigRational; 2],
}

impl ModelMap {
    pub fn new(params: ModelParams, depth: u32) -> Self {
        let y = |m: u64| y_value(m, &params);
        let mut branches: Vec<Cell> = Vec::new();
        let mk = |kind, p: BigRational, fp: BigRational, q: BigRational, fq: BigRational| {
            if p <= q {
                Cell { kind, lo: p, hi: q, f_lo: fp, f_hi: fq }
            } else {
                Cell { kind, lo: q, hi: p, f_lo: fq, f_hi: fp }
            }
        };
        branches.push(mk(CellKind::Branch(0), y(5), y(6), BigRational::zero(), y(1)));
        branches.push(mk(CellKind::Branch(1), BigRational::zero(), y(1), y(3), y(4)));
        for n in 2..=depth {
            let a = u(n) - 1;
            let b = u(n) + u(n + 2) - 1;
            branches.push(mk(CellKind::Branch(n), y(a), y(a + 1), y(b), y(b + 1)));
        }
        let mut cells = branches.clone();
        for n in 0..=depth.saturating_sub(4) {
            let c1 = &branches[n as usize];
            let c2 = &branches[n as usize + 4];
            let cell = if c1.hi <= c2.lo {
                mk(CellKind::Gap(n), c1.hi.clone(), c1.f_hi.clone(), c2.lo.clone(), c2.f_lo.clone())
            } else {
                mk(CellKind::Gap(n), c2.hi.clone(), c2.f_hi.clone(), c1.lo.clone(), c1.f_lo.clone())
            };
            cells.push(cell);
        }
        let limits = [
            y_of_set(&FibIndexSet::odd_tail(), &params),
            y_of_set(&FibIndexSet::even_tail(), &params),
        ];
        ModelMap { params, cells, limits }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, kind: CellKind) -> Option<&Cell> {
        self.cells.iter().find(|c| c.kind == kind)
    }

    /// The two accumulation points of the cells; both map to 0.
    pub fn limit_points(&self) -> &[BigRational; 2] {
        &self.limits
    }

    pub fn domain(&self) -> (BigRational, BigRational) {
        (y_value(1, &self.params), y_value(2, &self.params))
    }

    pub fn eval(&self, x: &BigRational) -> Result<BigRational> {
        let (lo, hi) = self.domain();
        if x < &lo || x > &hi {
            return Err(Error::Domain(format!("x = {x} outside [y_1, y_2]")));
        }
        if self.limits.contains(x) {
            return Ok(BigRational::zero());
        }
        self.cells
            .iter()
            .find(|c| &c.lo <= x && x <= &c.hi)
            .map(|c| c.eval(x))
            .ok_or_else(|| Error::Depth(format!("x = {x} lies deeper than the enumerated cells")))
    }

    /// The other point with the same image, on the far side of 0.
    pub fn partner(&self, x: &BigRational) -> Result<BigRational> {
        let fx = self.eval(x)?;
        let right = x.is_positive();
        for c in &self.cells {
            let side_ok = if right { c.hi <= BigRational::zero() } else { c.lo >= BigRational::zero() };
            if !side_ok {
                continue;
            }
            let (a, b) = if c.f_lo <= c.f_hi { (&c.f_lo, &c.f_hi) } else { (&c.f_hi, &c.f_lo) };
            if a <= &fx && &fx <= b {
                if c.f_lo == c.f_hi {
                    continue;
                }
                return Ok(&c.lo + (&fx - &c.f_lo) / c.slope());
            }
        }
        let limit = if right { &self.limits[0] } else { &self.limits[1] };
        if fx.is_zero() {
            return Ok(limit.clone());
        }
        Err(Error::Depth(format!("partner of {x} lies deeper than the enumerated cells")))
    }
}

impl Default for ModelMap {
    fn default() -> Self {
        ModelMap::new(ModelParams::half(), DEFAULT_CELL_DEPTH)
    }
}

fn gamma_pow(n: u32) -> QuadSurd {
    QuadSurd::gamma().pow(n)
}

/// gamma (gamma^{n1} + gamma^{n2} + ...) before reduction mod 1.
pub fn phi_unreduced(mu: &FibIndexSet) -> QuadSurd {
    let mut sum = QuadSurd::zero();
    for &n in mu.indices() {
        sum = &sum + &gamma_pow(n + 1);
    }
    if let Some(s) = mu.tail() {
        // gamma * gamma^s / (1 - gamma^2) = -gamma^s
        sum = &sum - &gamma_pow(s);
    }
    sum
}

/// The circle coordinate of x_mu, in [0, 1).
pub fn phi(mu: &FibIndexSet) -> QuadSurd {
    phi_unreduced(mu).fract()
}

/// Renders a rational as "num/den".
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Integer part of a surd known to be an integer.
pub fn surd_integer(s: &QuadSurd) -> Option<BigInt> {
    s.is_integer().then(|| s.a.to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fib_arith::zeckendorf;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn y_examples() {
        let p = ModelParams::half();
        assert_eq!(y_value(1, &p), r(-1, 2));
        assert_eq!(y_value(2, &p), r(1, 4));
        assert_eq!(y_value(4, &p), r(-3, 8));
        assert_eq!(y_value(0, &p), r(0, 1));
        assert!(ModelParams::new(r(7, 10)).is_err());
    }

    #[test]
    fn f_on_orbit() {
        let map = ModelMap::default();
        let p = map.params().clone();
        for m in 1..=2000 {
            assert_eq!(map.eval(&y_value(m, &p)).unwrap(), y_value(m + 1, &p), "m = {m}");
        }
    }

    #[test]
    fn gap_slopes() {
        let map = ModelMap::default();
        assert_eq!(map.cell(CellKind::Gap(0)).unwrap().slope(), r(-6, 5));
        for n in 1..=30 {
            assert_eq!(map.cell(CellKind::Gap(n)).unwrap().slope().abs(), r(11, 2), "n = {n}");
        }
        for n in 0..=30 {
            let s = map.cell(CellKind::Branch(n)).unwrap().slope();
            let expect = if n == 0 { r(-1, 1) } else if n % 2 == 1 { r(1, 1) } else { r(-1, 1) };
            assert_eq!(s, expect, "n = {n}");
        }
    }

    #[test]
    fn limit_points_and_errors() {
        let map = ModelMap::default();
        assert_eq!(map.limit_points()[0], r(-2, 5));
        assert_eq!(map.eval(&r(-2, 5)).unwrap(), r(0, 1));
        assert!(matches!(map.eval(&r(1, 1)), Err(Error::Domain(_))));
        let near = &r(-2, 5) + &BigRational::new(1.into(), BigInt::from(2).pow(200));
        assert!(matches!(map.eval(&near), Err(Error::Depth(_))));
    }

    #[test]
    fn order_examples() {
        let z = |m| zeckendorf(m).unwrap();
        assert_eq!(order_compare(&z(4), &z(1)), Ordering::Greater);
        assert_eq!(order_compare(&z(2), &z(3)), Ordering::Greater);
        assert_eq!(order_compare(&z(7), &z(7)), Ordering::Equal);
    }

    #[test]
    fn phi_examples() {
        let g = QuadSurd::gamma();
        assert_eq!(phi(&FibIndexSet::empty()), QuadSurd::zero());
        let p1 = phi(&zeckendorf(1).unwrap());
        assert_eq!(p1, &g + &QuadSurd::one());
        let p2 = phi(&zeckendorf(2).unwrap());
        assert_eq!(p2, g.pow(3).fract());
        assert_eq!(p2, (&p1 + &g).fract());
        // the two tails are the preimages of 0 under the rotation
        assert_eq!(phi(&FibIndexSet::odd_tail()), (-&g).fract());
        assert_eq!(phi(&FibIndexSet::even_tail()), (-&g).fract());
    }
}
