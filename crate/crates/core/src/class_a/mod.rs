//! Two-interval maps of type (2,1): an affine or quadratic branch on J and a
//! quadratic branch on T.

mod geometry;
mod renorm;
mod tune;

pub use geometry::{geometry_experiment, GeometryParams, GeometryReport, GeometryRow};
pub use renorm::{renormalize_numeric, renormalize_tower, Rescale, RenormalizedMap, TowerCheck};
pub use tune::{probe_piecewise, tune_v, VBracket};

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mp_dynamics::{MPValue, PiecewiseMap, Place};
use crate::sign::Sign;

/// A closed interval lo <= hi.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub lo: MPValue,
    pub hi: MPValue,
}

impl Interval {
    pub fn new(lo: Float, hi: Float) -> Result<Self> {
        if lo > hi {
            return Err(Error::Construction(format!("interval [{}, {}] is reversed", lo.to_f64(), hi.to_f64())));
        }
        Ok(Interval { lo: MPValue::new(lo), hi: MPValue::new(hi) })
    }

    /// The interval spanned by two points in either order.
    pub fn hull(a: &Float, b: &Float) -> Self {
        if a <= b {
            Interval { lo: MPValue::new(a.clone()), hi: MPValue::new(b.clone()) }
        } else {
            Interval { lo: MPValue::new(b.clone()), hi: MPValue::new(a.clone()) }
        }
    }

    pub fn lo(&self) -> &Float {
        self.lo.value()
    }

    pub fn hi(&self) -> &Float {
        self.hi.value()
    }

    fn prec(&self) -> u32 {
        self.lo.precision().max(self.hi.precision())
    }

    pub fn length(&self) -> Float {
        Float::with_val(self.prec(), self.hi() - self.lo())
    }

    pub fn midpoint(&self) -> Float {
        let mut m = Float::with_val(self.prec() + 1, self.lo() + self.hi());
        m /= 2;
        m
    }

    /// Membership with absolute slack `tol`.
    pub fn contains(&self, x: &Float, tol: &Float) -> bool {
        let lo = Float::with_val(self.prec(), self.lo() - tol);
        let hi = Float::with_val(self.prec(), self.hi() + tol);
        lo <= *x && *x <= hi
    }

    /// Whether `other` lies inside, with slack `tol`.
    pub fn contains_interval(&self, other: &Interval, tol: &Float) -> bool {
        self.contains(other.lo(), tol) && self.contains(other.hi(), tol)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.lo().to_f64(), self.hi().to_f64())
    }
}

/// x -> q (x - x0)^2 - c0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticBranch {
    pub q: MPValue,
    pub c0: MPValue,
    pub x0: MPValue,
}

impl QuadraticBranch {
    pub fn eval(&self, x: &Float, prec: u32) -> Float {
        let mut y = Float::with_val(prec, x - self.x0.value());
        y.square_mut();
        y *= self.q.value();
        y -= self.c0.value();
        y
    }
}

/// The diffeomorphic branch on J.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum JBranch {
    /// x -> slope x + intercept.
    Affine { slope: MPValue, intercept: MPValue },
    /// The quadratic formula restricted to J, which must avoid its critical point.
    Quadratic(QuadraticBranch),
}

impl JBranch {
    pub fn eval(&self, x: &Float, prec: u32) -> Float {
        match self {
            JBranch::Affine { slope, intercept } => {
                let mut y = Float::with_val(prec, x * slope.value());
                y += intercept.value();
                y
            }
            JBranch::Quadratic(b) => b.eval(x, prec),
        }
    }
}

/// A map on J u T with J to the left of T.
#[derive(Debug, Clone, Serialize)]
pub struct ClassAMap {
    pub j: Interval,
    pub t: Interval,
    pub t_branch: QuadraticBranch,
    pub j_branch: JBranch,
    pub component: Sign,
    pub precision: u32,
    /// Set for maps obtained by restricting a unimodal map to two intervals.
    pub restricted: bool,
}

impl ClassAMap {
    /// Validates domain layout, the critical point and the J-branch orientation.
    pub fn new(j: Interval, t: Interval, t_branch: QuadraticBranch, j_branch: JBranch, precision: u32, restricted: bool) -> Result<Self> {
        if j.hi() >= t.lo() {
            return Err(Error::Construction("J must lie strictly to the left of T".into()));
        }
        let x0 = t_branch.x0.value();
        if !(t.lo() < x0 && x0 < t.hi()) {
            return Err(Error::Construction("critical point is not interior to T".into()));
        }
        if t_branch.q.value().is_sign_negative() || t_branch.q.value().is_zero() {
            return Err(Error::Construction("T branch must have a minimum".into()));
        }
        let component = match &j_branch {
            JBranch::Affine { slope, .. } => {
                if slope.value().is_zero() {
                    return Err(Error::Construction("J branch is constant".into()));
                }
                if slope.value().is_sign_negative() {
                    Sign::Minus
                } else {
                    Sign::Plus
                }
            }
            JBranch::Quadratic(b) => {
                let c = b.x0.value();
                if j.lo() < c && c < j.hi() {
                    return Err(Error::Construction("J branch folds: its critical point is inside J".into()));
                }
                let increasing = (*c <= *j.lo()) == b.q.value().is_sign_positive();
                if increasing {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            }
        };
        let f_lo = j_branch.eval(j.lo(), precision);
        let f_hi = j_branch.eval(j.hi(), precision);
        if (f_hi > f_lo) != (component == Sign::Plus) {
            return Err(Error::Construction("J branch orientation disagrees with its component".into()));
        }
        Ok(ClassAMap { j, t, t_branch, j_branch, component, precision, restricted })
    }

    pub fn eval(&self, x: &Float, prec: u32) -> Result<Float> {
        let place = self.place(x);
        self.image(x, place, prec)
    }
}

impl PiecewiseMap for ClassAMap {
    fn component(&self) -> Sign {
        self.component
    }

    fn precision(&self) -> u32 {
        self.precision
    }

    fn critical_point(&self) -> Float {
        self.t_branch.x0.value().clone()
    }

    fn place(&self, x: &Float) -> Place {
        let tol = self.tolerance();
        let x0 = self.t_branch.x0.value();
        let below = |a: &Float| *x < Float::with_val(self.precision, a - &tol);
        let above = |a: &Float| *x > Float::with_val(self.precision, a + &tol);
        if below(self.j.lo()) {
            Place::Left
        } else if !above(self.j.hi()) {
            Place::J
        } else if below(self.t.lo()) {
            Place::Gap
        } else if above(self.t.hi()) {
            Place::Right
        } else if !below(x0) && !above(x0) {
            Place::Critical
        } else if *x < *x0 {
            Place::TMinus
        } else {
            Place::TPlus
        }
    }

    fn image(&self, x: &Float, place: Place, prec: u32) -> Result<Float> {
        match place {
            Place::J => Ok(self.j_branch.eval(x, prec)),
            Place::TMinus | Place::TPlus | Place::Critical => Ok(self.t_branch.eval(x, prec)),
            other => Err(Error::Domain(format!("no branch at {other:?}"))),
        }
    }
}

fn to_prec(x: &Float, prec: u32) -> Float {
    Float::with_val(prec, x)
}

/// The explicit family: T = [-1, lam] with x -> q x^2 - c, J = [-c, -c + q lam^2] with
/// an affine branch, arranged so that 0 -> -c -> -1 -> lam -> -c + q lam^2 -> v.
pub fn example_map(c: &Float, lam: &Float, v: &Float, prec: u32) -> Result<ClassAMap> {
    if !(c.is_sign_positive() && lam.is_sign_positive() && !c.is_zero() && !lam.is_zero()) {
        return Err(Error::Construction("c and lam must be positive".into()));
    }
    if v.is_sign_negative() && !v.is_zero() {
        return Err(Error::Construction("v must be non-negative".into()));
    }
    let (c, lam, v) = (to_prec(c, prec), to_prec(lam, prec), to_prec(v, prec));
    let q = Float::with_val(prec, &c + &lam);
    let lam2 = Float::with_val(prec, lam.square_ref());
    let mut slope = Float::with_val(prec, &v + 1u32);
    slope /= Float::with_val(prec, &q * &lam2);
    let intercept = Float::with_val(prec, &slope * &c) - 1u32;
    let j_hi = Float::with_val(prec, &q * &lam2) - &c;
    let j = Interval::new(Float::with_val(prec, -&c), j_hi)?;
    let t = Interval::new(Float::with_val(prec, -1), lam.clone())?;
    let t_branch = QuadraticBranch { q: MPValue::new(q), c0: MPValue::new(c), x0: MPValue::new(Float::with_val(prec, 0)) };
    let j_branch = JBranch::Affine { slope: MPValue::new(slope), intercept: MPValue::new(intercept) };
    let map = ClassAMap::new(j, t, t_branch, j_branch, prec, false)?;
    map.check_forced_head(&v)?;
    Ok(map)
}

impl ClassAMap {
    /// The five forced images of the explicit family, to working tolerance.
    fn check_forced_head(&self, v: &Float) -> Result<()> {
        let p = self.precision;
        let tol = self.tolerance();
        let zero = Float::with_val(p, 0);
        let chain = [
            (zero, Float::with_val(p, -self.t_branch.c0.value())),
            (Float::with_val(p, -self.t_branch.c0.value()), Float::with_val(p, -1)),
            (Float::with_val(p, -1), self.t.hi().clone()),
            (self.t.hi().clone(), self.j.hi().clone()),
            (self.j.hi().clone(), v.clone()),
        ];
        for (i, (x, want)) in chain.iter().enumerate() {
            let place = self.place(x);
            let got = self.image(x, place, p)?;
            let err = Float::with_val(p, &got - want).abs();
            if err > tol {
                return Err(Error::Construction(format!("forced orbit step {} misses by {}", i + 1, err.to_f64())));
            }
        }
        Ok(())
    }
}

/// Restriction of x -> x^2 + c to J = [x1, x4] and a T containing [x5, x2] whose left
/// end lies halfway between x4 and -|x3|, with the quadratic rule kept on both.
pub fn surgery_from_unimodal(c: &MPValue, prec: u32) -> Result<ClassAMap> {
    let prec = prec.max(c.precision());
    let orb = crate::mp_dynamics::orbit_quadratic(c, 5, prec)?;
    let x = |i: usize| orb.x(i).clone();
    if !(x(1) < x(4) && x(4) < x(5) && x(5) < x(2)) {
        return Err(Error::Shape("x1 < x4 < x5 < x2 fails: not a Fibonacci parameter".into()));
    }
    // T extends [x5, x2] to the left past -|x3| while staying clear of J
    let x3_abs = Float::with_val(prec, x(3).abs_ref());
    if x(4) >= -x3_abs.clone() {
        return Err(Error::Shape("x4 < -|x3| fails: no room to extend T".into()));
    }
    let mut left = Float::with_val(prec, x(4) - &x3_abs);
    left /= 2;
    let branch = QuadraticBranch {
        q: MPValue::new(Float::with_val(prec, 1)),
        c0: MPValue::new(Float::with_val(prec, -c.value())),
        x0: MPValue::new(Float::with_val(prec, 0)),
    };
    ClassAMap::new(
        Interval::new(x(1), x(4))?,
        Interval::new(left, x(2))?,
        branch.clone(),
        JBranch::Quadratic(branch),
        prec,
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp_dynamics::orbit_piecewise;

    fn f(x: f64) -> Float {
        Float::with_val(256, x)
    }

    #[test]
    fn example_head() {
        let m = example_map(&f(10.0), &f(0.05), &f(0.02), 256).unwrap();
        assert_eq!(m.component, Sign::Plus);
        let o = orbit_piecewise(&m, &MPValue::new(f(0.0)), 5, 256).unwrap();
        let xs: Vec<f64> = o.record.points.iter().map(|p| p.to_f64()).collect();
        let want = [-10.0, -1.0, 0.05, -10.0 + 10.05 * 0.0025, 0.02];
        for (a, b) in xs.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{xs:?}");
        }
        assert_eq!(o.symbols.to_string(), "JMPJP");
    }

    #[test]
    fn example_escapes_for_large_v() {
        let m = example_map(&f(10.0), &f(0.05), &f(0.2), 256).unwrap();
        let o = orbit_piecewise(&m, &MPValue::new(f(0.0)), 20, 256).unwrap();
        assert_eq!(o.escape.unwrap().index, 5);
    }

    #[test]
    fn example_rejects_bad_input() {
        assert!(example_map(&f(-1.0), &f(0.05), &f(0.0), 128).is_err());
        // J overlaps T when c is small and lam large
        assert!(example_map(&f(0.5), &f(2.0), &f(0.0), 128).is_err());
    }
}
