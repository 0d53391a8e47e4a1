//! Big-float orbits with two-precision digit certificates.
//!
//! Every orbit is run twice, at `p` and `2p` bits; a point's certificate is the
//! number of leading decimal digits on which the two runs agree.

use std::fmt;

use rug::float::Round;
use rug::Float;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kneading::{ClassASeq, SignSeq, Symbol};
use crate::sign::Sign;

/// Hard ceiling for precision escalation loops.
pub const MAX_PRECISION: u32 = 1 << 20;

const LOG10_2: f64 = std::f64::consts::LOG10_2;

/// An arbitrary-precision real; its precision is the working precision.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub struct MPValue(Float);

impl MPValue {
    pub fn new(value: Float) -> Self {
        MPValue(value)
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        MPValue(Float::with_val(prec, x))
    }

    pub fn from_i64(x: i64, prec: u32) -> Self {
        MPValue(Float::with_val(prec, x))
    }

    /// Parses a decimal string, rounding to `prec` bits.
    pub fn parse(s: &str, prec: u32) -> Result<Self> {
        let parsed = Float::parse(s.trim()).map_err(|e| Error::Domain(format!("bad number {s:?}: {e}")))?;
        Ok(MPValue(Float::with_val(prec, parsed)))
    }

    pub fn value(&self) -> &Float {
        &self.0
    }

    pub fn into_inner(self) -> Float {
        self.0
    }

    pub fn precision(&self) -> u32 {
        self.0.prec()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn log2_abs(&self) -> f64 {
        log2_abs(&self.0)
    }

    /// Scientific notation with `digits` significant digits; "?" when none are known.
    pub fn decimal(&self, digits: u32) -> String {
        render(&self.0, digits)
    }

    /// Every digit the precision carries.
    pub fn full_decimal(&self) -> String {
        render(&self.0, full_digits(self.precision()))
    }
}

impl fmt::Display for MPValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.full_decimal())
    }
}

impl Serialize for MPValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.full_decimal())
    }
}

impl<'de> Deserialize<'de> for MPValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        // decimal digits back to bits, with a little slack
        let digits = s.trim_start_matches('-').chars().take_while(|c| *c != 'e').count() as f64;
        let prec = ((digits / LOG10_2).ceil() as u32 + 8).max(64);
        MPValue::parse(&s, prec).map_err(serde::de::Error::custom)
    }
}

pub fn full_digits(prec: u32) -> u32 {
    (prec as f64 * LOG10_2).floor() as u32
}

pub fn log2_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    Float::with_val(64, x.abs_ref()).log2().to_f64()
}

fn render(x: &Float, digits: u32) -> String {
    if digits == 0 {
        return "?".into();
    }
    if x.is_zero() {
        return "0".into();
    }
    let s = x.to_string_radix_round(10, Some(digits as usize), Round::Nearest);
    // rug prints 1.234e-5 style already; normalise "e0"
    s.strip_suffix("e0").map(str::to_string).unwrap_or(s)
}

/// Agreeing decimal digits between a run at `p` bits and one at `2p` bits.
pub fn certified_digits(low: &Float, high: &Float, p: u32) -> u32 {
    let full = full_digits(p);
    let diff = Float::with_val(high.prec().max(low.prec()), high - low);
    if diff.is_zero() {
        return full;
    }
    if high.is_zero() {
        return 0;
    }
    let d = (log2_abs(high) - log2_abs(&diff)) * LOG10_2;
    if d <= 0.0 {
        0
    } else {
        (d.floor() as u32).min(full)
    }
}

/// The critical orbit x_1..x_N with per-point certificates; points come from the 2p run.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub points: Vec<MPValue>,
    pub certified_digits: Vec<u32>,
    pub precision: u32,
}

impl OrbitRecord {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// x_i, 1-based.
    pub fn x(&self, i: usize) -> &Float {
        self.points[i - 1].value()
    }

    pub fn digits(&self, i: usize) -> u32 {
        self.certified_digits[i - 1]
    }

    /// Length of the prefix where every point has at least one certified digit.
    pub fn certified_len(&self) -> usize {
        self.certified_digits.iter().position(|&d| d == 0).unwrap_or(self.len())
    }

    pub fn truncated(&self, n: usize) -> OrbitRecord {
        OrbitRecord {
            points: self.points[..n.min(self.len())].to_vec(),
            certified_digits: self.certified_digits[..n.min(self.len())].to_vec(),
            precision: self.precision,
        }
    }

    /// Decimal rendering of x_i to its certified digits.
    pub fn render(&self, i: usize) -> String {
        self.points[i - 1].decimal(self.digits(i))
    }
}

fn quadratic_run(c: &Float, n: usize, prec: u32) -> Vec<Float> {
    let mut x = Float::with_val(prec, 0);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        x.square_mut();
        x += c;
        out.push(x.clone());
    }
    out
}

/// The effective precision never rounds the parameter itself.
fn working_precision(c: &MPValue, p: u32) -> u32 {
    p.max(c.precision())
}

/// Certified orbit of x -> x^2 + c, stopping (without error) at the first point
/// whose certificate is exhausted; that point is included with 0 digits.
pub fn orbit_quadratic_partial(c: &MPValue, n: usize, p: u32) -> OrbitRecord {
    let p = working_precision(c, p);
    let low = quadratic_run(c.value(), n, p);
    let high = quadratic_run(c.value(), n, 2 * p);
    let mut points = Vec::with_capacity(n);
    let mut digits = Vec::with_capacity(n);
    for (l, h) in low.iter().zip(high) {
        let d = certified_digits(l, &h, p);
        points.push(MPValue(h));
        digits.push(d);
        if d == 0 {
            break;
        }
    }
    OrbitRecord { points, certified_digits: digits, precision: p }
}

pub fn orbit_quadratic(c: &MPValue, n: usize, p: u32) -> Result<OrbitRecord> {
    if n == 0 {
        return Err(Error::Domain("orbit needs N >= 1".into()));
    }
    if p < 64 {
        return Err(Error::Domain(format!("precision {p} below the 64-bit floor")));
    }
    let orb = orbit_quadratic_partial(c, n, p);
    if orb.certified_len() < n {
        let index = orb.certified_len() + 1;
        return Err(Error::Precision { index, detail: format!("no certified digits left at {} bits", orb.precision) });
    }
    Ok(orb)
}

/// Certified sign of a point: needs a digit and a nonzero value.
pub fn certified_sign(orb: &OrbitRecord, i: usize) -> Result<Sign> {
    let x = orb.x(i);
    if orb.digits(i) == 0 || x.is_zero() {
        return Err(Error::Resolution { index: i, detail: "sign not certified".into() });
    }
    Ok(if x.is_sign_negative() { Sign::Minus } else { Sign::Plus })
}

pub fn itinerary(orb: &OrbitRecord) -> Result<SignSeq> {
    (1..=orb.len()).map(|i| certified_sign(orb, i)).collect::<Result<Vec<_>>>().map(SignSeq)
}

/// Exact product of the factors by pairwise tree multiplication at summed precision.
fn exact_product(mut factors: Vec<Float>) -> Float {
    if factors.is_empty() {
        return Float::with_val(64, 1);
    }
    while factors.len() > 1 {
        let mut next = Vec::with_capacity(factors.len().div_ceil(2));
        let mut it = factors.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => {
                    let prec = (a.prec() + b.prec()).min(rug::float::prec_max());
                    next.push(Float::with_val(prec, &a * &b));
                }
                None => next.push(a),
            }
        }
        factors = next;
    }
    factors.pop().unwrap()
}

/// prod |2 x_i| for i in from..from+count, computed without rounding.
pub fn derivative_product(orb: &OrbitRecord, from: usize, count: usize) -> Result<MPValue> {
    if from == 0 || from + count - 1 > orb.len() {
        return Err(Error::Domain(format!(
            "window {from}..{} outside the orbit of length {}",
            from + count.max(1) - 1,
            orb.len()
        )));
    }
    let factors = (from..from + count)
        .map(|i| {
            if orb.digits(i) == 0 {
                return Err(Error::Precision { index: i, detail: "uncertified factor".into() });
            }
            let mut f = orb.x(i).clone().abs();
            f *= 2;
            Ok(f)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MPValue(exact_product(factors)))
}

/// log2 prod |2 x_i| over the same window, in double precision.
pub fn log2_derivative(orb: &OrbitRecord, from: usize, count: usize) -> f64 {
    (from..from + count).map(|i| 1.0 + log2_abs(orb.x(i))).sum()
}

/// log((d-b)(c-a) / ((d-c)(b-a))) for a < b < c < d.
pub fn poincare_length(a: &MPValue, b: &MPValue, c: &MPValue, d: &MPValue) -> Result<MPValue> {
    let (a, b, c, d) = (a.value(), b.value(), c.value(), d.value());
    if !(a < b && b < c && c < d) {
        return Err(Error::Domain("poincare_length needs a < b < c < d".into()));
    }
    let p = a.prec().max(b.prec()).max(c.prec()).max(d.prec());
    let num = Float::with_val(p, d - b) * Float::with_val(p, c - a);
    let den = Float::with_val(p, d - c) * Float::with_val(p, b - a);
    Ok(MPValue((num / den).ln()))
}

/// Where a point sits relative to a two-interval map, left to right in the map's coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Place {
    Left,
    J,
    Gap,
    TMinus,
    Critical,
    TPlus,
    Right,
}

impl Place {
    pub fn symbol(self) -> Option<Symbol> {
        match self {
            Place::J => Some(Symbol::J),
            Place::TMinus => Some(Symbol::TMinus),
            Place::TPlus => Some(Symbol::TPlus),
            _ => None,
        }
    }

    pub fn is_escape(self) -> bool {
        matches!(self, Place::Left | Place::Gap | Place::Right)
    }
}

/// A map defined on J u T: a diffeomorphic branch on J and a unimodal branch on T
/// with a minimum at the critical point.
pub trait PiecewiseMap {
    fn component(&self) -> Sign;

    /// Working precision the map's data were computed at.
    fn precision(&self) -> u32;

    fn critical_point(&self) -> Float;

    /// Classify `x`; membership is closed up to `tolerance()`.
    fn place(&self, x: &Float) -> Place;

    /// Image of `x` on the branch of `place` (J, T-, critical or T+).
    fn image(&self, x: &Float, place: Place, prec: u32) -> Result<Float>;

    /// Orientation of the branch at a place: + preserves order.
    fn orientation(&self, place: Place) -> Sign {
        match place {
            Place::J => self.component(),
            Place::TMinus => Sign::Minus,
            _ => Sign::Plus,
        }
    }

    /// Absolute slack used for closed-interval membership.
    fn tolerance(&self) -> Float {
        let mut t = Float::with_val(64, 1);
        t >>= self.precision().saturating_sub(32);
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Escape {
    /// Index of the first iterate outside J u T.
    pub index: usize,
    pub place: Place,
}

#[derive(Debug, Clone)]
pub struct PiecewiseOrbit {
    pub record: OrbitRecord,
    pub symbols: ClassASeq,
    pub escape: Option<Escape>,
}

impl PiecewiseOrbit {
    /// Places of x_1.. including the escape place, for ordered comparisons.
    pub fn places(&self) -> Vec<Place> {
        let mut v: Vec<Place> = self
            .symbols
            .symbols
            .iter()
            .map(|s| match s {
                Symbol::J => Place::J,
                Symbol::TMinus => Place::TMinus,
                Symbol::TPlus => Place::TPlus,
            })
            .collect();
        if let Some(e) = &self.escape {
            v.push(e.place);
        }
        v
    }
}

fn step_place<M: PiecewiseMap + ?Sized>(map: &M, x: &Float, index: usize) -> Result<Place> {
    match map.place(x) {
        Place::Critical => Err(Error::Resolution { index, detail: "iterate within tolerance of the critical point".into() }),
        p => Ok(p),
    }
}

/// Orbit of `x0` under a two-interval map, run at p and 2p; stops at the first escape.
pub fn orbit_piecewise<M: PiecewiseMap + ?Sized>(map: &M, x0: &MPValue, n: usize, p: u32) -> Result<PiecewiseOrbit> {
    let start = map.place(x0.value());
    if start.is_escape() {
        return Err(Error::Domain("starting point outside J u T".into()));
    }
    let mut lo = Float::with_val(p, x0.value());
    let mut hi = Float::with_val(2 * p, x0.value());
    let (mut place_lo, mut place_hi) = (start, start);
    let mut points = Vec::with_capacity(n);
    let mut digits = Vec::with_capacity(n);
    let mut symbols = Vec::with_capacity(n);
    let mut escape = None;
    for i in 1..=n {
        lo = map.image(&lo, place_lo, p)?;
        hi = map.image(&hi, place_hi, 2 * p)?;
        let d = certified_digits(&lo, &hi, p);
        place_lo = step_place(map, &lo, i)?;
        place_hi = step_place(map, &hi, i)?;
        if place_lo != place_hi || d == 0 {
            return Err(Error::Resolution { index: i, detail: format!("branch membership not certified ({place_lo:?} vs {place_hi:?})") });
        }
        points.push(MPValue(hi.clone()));
        digits.push(d);
        match place_hi.symbol() {
            Some(s) => symbols.push(s),
            None => {
                escape = Some(Escape { index: i, place: place_hi });
                break;
            }
        }
    }
    Ok(PiecewiseOrbit {
        record: OrbitRecord { points, certified_digits: digits, precision: p },
        symbols: ClassASeq { symbols, component: map.component() },
        escape,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(x: f64) -> MPValue {
        MPValue::from_f64(x, 128)
    }

    #[test]
    fn simple_orbits() {
        let o = orbit_quadratic(&mp(-2.0), 5, 128).unwrap();
        let xs: Vec<f64> = o.points.iter().map(|v| v.to_f64()).collect();
        assert_eq!(xs, vec![-2.0, 2.0, 2.0, 2.0, 2.0]);
        assert_eq!(itinerary(&o).unwrap().to_string(), "-++++");
        let o = orbit_quadratic(&mp(-1.0), 4, 128).unwrap();
        let xs: Vec<f64> = o.points.iter().map(|v| v.to_f64()).collect();
        assert_eq!(xs, vec![-1.0, 0.0, -1.0, 0.0]);
        assert!(matches!(itinerary(&o), Err(Error::Resolution { index: 2, .. })));
        let o = orbit_quadratic(&mp(-1.5), 6, 128).unwrap();
        let mut x = 0.0f64;
        let oracle: String = (0..6)
            .map(|_| {
                x = x * x - 1.5;
                if x < 0.0 { '-' } else { '+' }
            })
            .collect();
        assert_eq!(itinerary(&o).unwrap().to_string(), oracle);
        assert!(orbit_quadratic(&mp(-1.5), 0, 128).is_err());
        assert!(orbit_quadratic(&mp(-1.5), 3, 32).is_err());
    }

    #[test]
    fn exhaustion_names_index() {
        // chaotic parameter at low precision runs out of digits
        let c = MPValue::parse("-1.9", 64).unwrap();
        match orbit_quadratic(&c, 400, 64) {
            Err(Error::Precision { index, .. }) => assert!(index > 10 && index < 400),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn derivative_products() {
        let o = orbit_quadratic(&mp(-2.0), 5, 128).unwrap();
        assert_eq!(derivative_product(&o, 1, 1).unwrap().to_f64(), 4.0);
        assert_eq!(derivative_product(&o, 1, 3).unwrap().to_f64(), 64.0);
        let c = MPValue::parse("-1.7548776662466927600495", 128).unwrap();
        let o = orbit_quadratic(&c, 60, 256).unwrap();
        let whole = derivative_product(&o, 1, 50).unwrap();
        let a = derivative_product(&o, 1, 20).unwrap();
        let b = derivative_product(&o, 21, 30).unwrap();
        let prod = Float::with_val(a.precision() + b.precision(), a.value() * b.value());
        assert_eq!(&prod, whole.value());
    }

    #[test]
    fn poincare() {
        let v = |x: f64| mp(x);
        let l = poincare_length(&v(0.0), &v(1.0), &v(2.0), &v(3.0)).unwrap();
        assert!((l.to_f64() - 4f64.ln()).abs() < 1e-15);
        let l = poincare_length(&v(0.0), &v(0.5), &v(1.5), &v(2.0)).unwrap();
        assert!((l.to_f64() - 9f64.ln()).abs() < 1e-15);
        let moved = poincare_length(&v(7.0), &v(9.0), &v(11.0), &v(13.0)).unwrap();
        assert!((moved.to_f64() - 4f64.ln()).abs() < 1e-15);
        assert!(poincare_length(&v(0.0), &v(1.0), &v(1.0), &v(3.0)).is_err());
    }

    #[test]
    fn certificate_rules() {
        let a = Float::with_val(64, 1.5);
        assert_eq!(certified_digits(&a, &a, 64), 19);
        let b = Float::with_val(128, 1.5000001);
        assert_eq!(certified_digits(&a, &b, 64), 7);
        assert_eq!(certified_digits(&a, &Float::with_val(128, 0), 64), 0);
    }

    #[test]
    fn rendering() {
        let v = MPValue::parse("-1.8705286321646448888906", 128).unwrap();
        assert_eq!(v.decimal(6), "-1.87053");
        assert_eq!(v.decimal(0), "?");
        let w = MPValue::parse("0.000123456", 128).unwrap();
        assert_eq!(w.decimal(3), "1.23e-4");
    }
}
