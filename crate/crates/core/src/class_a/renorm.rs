use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fib_arith::{sigma_pow, u};
use crate::kneading::{renormalize_kneading_with, ClassASeq};
use crate::mp_dynamics::{certified_digits, orbit_piecewise, MPValue, PiecewiseMap, Place};
use crate::sign::Sign;

use super::{ClassAMap, Interval};

/// Affine chart x = center + sign * half * xi taking [-1, 1] onto an interval.
#[derive(Debug, Clone, Serialize)]
pub struct Rescale {
    pub center: MPValue,
    pub half: MPValue,
    pub sign: Sign,
}

impl Rescale {
    fn identity(prec: u32) -> Self {
        Rescale { center: MPValue::new(Float::with_val(prec, 0)), half: MPValue::new(Float::with_val(prec, 1)), sign: Sign::Plus }
    }

    fn onto(i: &Interval, sign: Sign, prec: u32) -> Self {
        let mut half = Float::with_val(prec, i.length());
        half /= 2;
        Rescale { center: MPValue::new(Float::with_val(prec, i.midpoint())), half: MPValue::new(half), sign }
    }

    pub fn to_base(&self, xi: &Float, prec: u32) -> Float {
        let mut x = Float::with_val(prec, xi * self.half.value());
        if self.sign == Sign::Minus {
            x = -x;
        }
        x += self.center.value();
        x
    }

    pub fn from_base(&self, x: &Float, prec: u32) -> Float {
        let mut xi = Float::with_val(prec, x - self.center.value());
        xi /= self.half.value();
        if self.sign == Sign::Minus {
            xi = -xi;
        }
        xi
    }
}

/// f_n = V^n f on T_n u J_n, stored in the coordinates of the base map together with
/// the chart that rescales its range T_{n-1} to [-1, 1].
#[derive(Debug, Clone, Serialize)]
pub struct RenormalizedMap {
    pub base: ClassAMap,
    pub level: u32,
    pub t_base: Interval,
    pub j_base: Interval,
    /// Base iterates applied on T_n and on J_n.
    pub t_iter: u64,
    pub j_iter: u64,
    pub rescale: Rescale,
    /// T_n, J_n and the critical point in the rescaled chart.
    pub t: Interval,
    pub j: Interval,
    pub critical: MPValue,
    pub component: Sign,
    pub precision: u32,
}

/// Membership slack for tower computations, in base coordinates.
fn tower_tol(prec: u32) -> Float {
    let mut t = Float::with_val(64, 1);
    t >>= prec / 2;
    t
}

fn base_iterate(base: &ClassAMap, x: &Float, k: u64, prec: u32) -> Result<Float> {
    let mut x = Float::with_val(prec, x);
    for step in 0..k {
        let place = base.place(&x);
        if place.is_escape() {
            return Err(Error::Structural(format!("base iterate {} leaves J u T", step + 1)));
        }
        x = base.image(&x, place, prec)?;
    }
    Ok(x)
}

impl RenormalizedMap {
    /// Level 0: the base map itself.
    pub fn from_base(base: ClassAMap) -> Self {
        let prec = base.precision;
        RenormalizedMap {
            t_base: base.t.clone(),
            j_base: base.j.clone(),
            t: base.t.clone(),
            j: base.j.clone(),
            critical: base.t_branch.x0.clone(),
            component: base.component,
            level: 0,
            t_iter: 1,
            j_iter: 1,
            rescale: Rescale::identity(prec),
            precision: prec,
            base,
        }
    }

    fn base_crit(&self) -> &Float {
        self.base.t_branch.x0.value()
    }

    fn base_tol(&self) -> Float {
        tower_tol(self.precision)
    }

    /// f_n in base coordinates.
    pub fn eval_base(&self, x: &Float, prec: u32) -> Result<Float> {
        let tol = self.base_tol();
        if self.t_base.contains(x, &tol) {
            base_iterate(&self.base, x, self.t_iter, prec)
        } else if self.j_base.contains(x, &tol) {
            base_iterate(&self.base, x, self.j_iter, prec)
        } else {
            Err(Error::Domain(format!("x = {} outside T_{} u J_{}", x.to_f64(), self.level, self.level)))
        }
    }

    /// Critical orbit of the rescaled map, run at p and 2p.
    pub fn symbols(&self, len: usize, p: u32) -> Result<crate::mp_dynamics::PiecewiseOrbit> {
        orbit_piecewise(self, &self.critical, len, p)
    }
}

impl PiecewiseMap for RenormalizedMap {
    fn component(&self) -> Sign {
        self.component
    }

    fn precision(&self) -> u32 {
        self.precision
    }

    fn critical_point(&self) -> Float {
        self.critical.value().clone()
    }

    fn place(&self, xi: &Float) -> Place {
        let x = self.rescale.to_base(xi, self.precision);
        let tol = self.base_tol();
        if self.t_base.contains(&x, &tol) {
            let d = Float::with_val(self.precision, &x - self.base_crit()).abs();
            if d <= tol {
                Place::Critical
            } else if *xi < *self.critical.value() {
                Place::TMinus
            } else {
                Place::TPlus
            }
        } else if self.j_base.contains(&x, &tol) {
            Place::J
        } else if *xi < *self.j.lo() {
            Place::Left
        } else if *xi > *self.t.hi() {
            Place::Right
        } else {
            Place::Gap
        }
    }

    fn image(&self, xi: &Float, place: Place, prec: u32) -> Result<Float> {
        let k = match place {
            Place::J => self.j_iter,
            Place::TMinus | Place::TPlus | Place::Critical => self.t_iter,
            other => return Err(Error::Domain(format!("no branch at {other:?}"))),
        };
        let x = self.rescale.to_base(xi, prec);
        let y = base_iterate(&self.base, &x, k, prec)?;
        Ok(self.rescale.from_base(&y, prec))
    }

    fn tolerance(&self) -> Float {
        let mut t = self.base_tol();
        t /= self.rescale.half.value();
        t
    }
}

/// Boundary of a predicate between `inside` (true) and `outside` (false), to within `width`.
fn boundary<F: Fn(&Float) -> bool>(pred: F, inside: &Float, outside: &Float, width: &Float, prec: u32) -> Float {
    if pred(outside) {
        return outside.clone();
    }
    let (mut a, mut b) = (Float::with_val(prec, inside), Float::with_val(prec, outside));
    for _ in 0..4 * prec {
        if Float::with_val(prec, &b - &a).abs() <= *width {
            break;
        }
        let mut m = Float::with_val(prec, &a + &b);
        m /= 2;
        if pred(&m) {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

fn same_side(x: &Float, y: &Float, c: &Float) -> bool {
    (x > c && y > c) || (x < c && y < c)
}

/// One renormalization step: T_{n+1}, J_{n+1}, iterate counts, chart and component.
pub fn renormalize_numeric(m: &RenormalizedMap, p: u32) -> Result<RenormalizedMap> {
    let prec = p.max(64);
    let tol = tower_tol(m.precision);
    let x0 = Float::with_val(prec, m.base_crit());
    let g = |x: &Float| m.eval_base(x, prec);
    let y1 = g(&x0)?;
    if !m.j_base.contains(&y1, &tol) {
        return Err(Error::Shape(format!("level {}: x_1 is not in J", m.level)));
    }
    let y2 = g(&y1)?;
    if !m.t_base.contains(&y2, &tol) {
        return Err(Error::Shape(format!("level {}: x_2 is not in T", m.level)));
    }
    let (t_lo, t_hi) = (m.t_base.lo().clone(), m.t_base.hi().clone());
    let in_t = |x: &Float| m.t_base.contains(x, &tol);
    let in_j = |x: &Float| m.j_base.contains(x, &tol);
    let width = Float::with_val(64, &tol / 4u32);

    let q = |x: &Float| in_t(x) && g(x).is_ok_and(|y| in_j(&y) && g(&y).is_ok_and(|z| in_t(&z)));
    let new_t = Interval::new(boundary(q, &x0, &t_lo, &width, prec), boundary(q, &x0, &t_hi, &width, prec))?;

    let side_end = if y2 < x0 { &t_lo } else { &t_hi };
    let pj = |x: &Float| in_t(x) && same_side(x, &y2, &x0) && g(x).is_ok_and(|y| in_t(&y));
    let inner = boundary(pj, &y2, &x0, &width, prec);
    let outer = boundary(pj, &y2, side_end, &width, prec);
    let new_j = Interval::hull(&inner, &outer);
    if new_j.contains(new_t.lo(), &Float::with_val(64, 0)) || new_j.contains(new_t.hi(), &Float::with_val(64, 0)) {
        return Err(Error::Shape(format!("level {}: J and T overlap", m.level + 1)));
    }

    let t_iter = m.t_iter + m.j_iter;
    let j_iter = m.t_iter;
    let f = |x: &Float, k| base_iterate(&m.base, x, k, prec);
    // rescale so the critical point becomes a minimum
    let at_crit = f(&x0, t_iter)?;
    let at_edge = f(new_t.lo(), t_iter)?;
    let sign = if at_crit < at_edge { Sign::Plus } else { Sign::Minus };
    let rescale = Rescale::onto(&m.t_base, sign, prec);
    let j_lo_img = f(new_j.lo(), j_iter)?;
    let j_hi_img = f(new_j.hi(), j_iter)?;
    let component = if j_hi_img > j_lo_img { Sign::Plus } else { Sign::Minus };

    let t = Interval::hull(&rescale.from_base(new_t.lo(), prec), &rescale.from_base(new_t.hi(), prec));
    let j = Interval::hull(&rescale.from_base(new_j.lo(), prec), &rescale.from_base(new_j.hi(), prec));
    if j.hi() >= t.lo() {
        return Err(Error::Shape(format!("level {}: rescaled J is not left of T", m.level + 1)));
    }
    Ok(RenormalizedMap {
        base: m.base.clone(),
        level: m.level + 1,
        t_base: new_t,
        j_base: new_j,
        t_iter,
        j_iter,
        critical: MPValue::new(rescale.from_base(&x0, prec)),
        rescale,
        t,
        j,
        component,
        precision: prec,
    })
}

/// Per-level validation of a tower.
#[derive(Debug, Clone, Serialize)]
pub struct TowerCheck {
    pub level: u32,
    pub t_iter: u64,
    pub j_iter: u64,
    pub iterates_ok: bool,
    pub t_between: bool,
    pub j_contains: bool,
    pub component: Sign,
    pub alternates: bool,
    pub symbols_checked: usize,
    pub symbols_ok: bool,
    pub index_law_checked: usize,
    pub index_law_ok: bool,
}

impl TowerCheck {
    pub fn inclusions_ok(&self) -> bool {
        self.t_between && self.j_contains
    }

    pub fn all_ok(&self) -> bool {
        self.iterates_ok && self.inclusions_ok() && self.alternates && self.symbols_ok && self.index_law_ok
    }
}

/// Levels 0..=levels of the tower over `base` with the checks for levels >= 1. The base
/// orbit is trusted through `horizon` points, which bounds the symbol and index checks.
pub fn renormalize_tower(base: &ClassAMap, levels: u32, horizon: usize, p: u32) -> Result<(Vec<RenormalizedMap>, Vec<TowerCheck>)> {
    let prec = p.max(64);
    let mut tower = vec![RenormalizedMap::from_base(base.clone())];
    for _ in 0..levels {
        let next = renormalize_numeric(tower.last().unwrap(), prec)?;
        tower.push(next);
    }
    let x0 = MPValue::new(Float::with_val(prec, base.t_branch.x0.value()));
    let orbit = orbit_piecewise(base, &x0, horizon, base.precision)?;
    let known = orbit.record.len();
    let x = |i: u64| -> Option<&Float> { (i as usize <= known).then(|| orbit.record.x(i as usize)) };
    let tol = tower_tol(prec);
    let mirror = |y: &Float| Float::with_val(prec, x0.value() * 2u32) - y;
    let big_t = |k: u32| x(u(k)).map(|a| Interval::hull(a, &mirror(a)));
    let big_j = |k: u32| match (x(u(k - 1)), x(u(k - 1) + u(k + 1))) {
        (Some(a), Some(b)) => Some(Interval::hull(a, b)),
        _ => None,
    };

    let mut checks = Vec::new();
    for n in 1..=levels {
        let m = &tower[n as usize];
        let prev = &tower[n as usize - 1];
        let t_between = match (big_t(n + 2), big_t(n + 1)) {
            (Some(inner), Some(outer)) => m.t_base.contains_interval(&inner, &tol) && outer.contains_interval(&m.t_base, &tol),
            _ => false,
        };
        let j_contains = big_j(n + 2).is_some_and(|inner| m.j_base.contains_interval(&inner, &tol));

        // symbolic renormalization of the previous level's itinerary
        let prev_len = (horizon as u64 / prev.t_iter.max(1)).clamp(3, 400) as usize;
        let (symbols_checked, symbols_ok) = match prev.symbols(prev_len + 1, prec) {
            Ok(a) if a.symbols.len() > prev_len => {
                let seq = ClassASeq { symbols: a.symbols.symbols[..prev_len].to_vec(), component: prev.component };
                let expect = renormalize_kneading_with(&seq, a.symbols.symbols[prev_len])?;
                match m.symbols(expect.len(), prec) {
                    Ok(b) if b.symbols.len() == expect.len() => (expect.len(), expect.symbols == b.symbols.symbols),
                    _ => (0, false),
                }
            }
            _ => (0, false),
        };

        // (f_n)^m(0) = x_{sigma^n(m)}
        let mut index_law_checked = 0;
        let mut index_law_ok = true;
        let mut y = x0.value().clone();
        for mm in 1..=30u64 {
            let target = sigma_pow(mm, n);
            let Some(want) = x(target) else { break };
            y = match m.eval_base(&y, prec) {
                Ok(v) => v,
                Err(_) => {
                    index_law_ok = false;
                    break;
                }
            };
            index_law_checked += 1;
            if certified_digits(want, &y, base.precision) < 6 {
                index_law_ok = false;
                break;
            }
        }

        checks.push(TowerCheck {
            level: n,
            t_iter: m.t_iter,
            j_iter: m.j_iter,
            iterates_ok: m.t_iter == u(n + 1) && m.j_iter == u(n),
            t_between,
            j_contains,
            component: m.component,
            alternates: m.component == -prev.component,
            symbols_checked,
            symbols_ok,
            index_law_checked,
            index_law_ok: index_law_ok && index_law_checked > 0,
        });
    }
    Ok((tower, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class_a::{surgery_from_unimodal, tune_v};
    use crate::quad_fibonacci::find_c;

    #[test]
    fn example_tower() {
        let b = tune_v(&Float::with_val(64, 10), &Float::with_val(64, 0.05), 10, 128).unwrap();
        let map = b.map(256).unwrap();
        let (tower, checks) = renormalize_tower(&map, 3, u(10) as usize, 256).unwrap();
        assert_eq!(tower.len(), 4);
        for c in &checks {
            assert!(c.all_ok(), "{c:?}");
        }
    }

    #[test]
    fn surgery_tower() {
        let c = find_c(16, 96).unwrap().midpoint();
        let map = surgery_from_unimodal(&c, 256).unwrap();
        assert_eq!(map.component, Sign::Minus);
        let (_, checks) = renormalize_tower(&map, 5, u(16) as usize, 256).unwrap();
        for c in &checks {
            assert!(c.all_ok(), "{c:?}");
        }
        let comps: Vec<Sign> = checks.iter().map(|c| c.component).collect();
        assert_eq!(comps, vec![Sign::Plus, Sign::Minus, Sign::Plus, Sign::Minus, Sign::Plus]);
    }
}
