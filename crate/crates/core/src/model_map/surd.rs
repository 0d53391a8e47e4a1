use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// a + b*sqrt(5) with rational a, b.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    pub a: BigRational,
    pub b: BigRational,
}

impl QuadSurd {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QuadSurd { a, b }
    }

    pub fn from_ints(a: i64, b: i64) -> Self {
        QuadSurd { a: BigRational::from_integer(a.into()), b: BigRational::from_integer(b.into()) }
    }

    pub fn zero() -> Self {
        Self::from_ints(0, 0)
    }

    pub fn one() -> Self {
        Self::from_ints(1, 0)
    }

    pub fn integer(n: BigInt) -> Self {
        QuadSurd { a: BigRational::from_integer(n), b: BigRational::zero() }
    }

    /// gamma = (1 - sqrt 5)/2.
    pub fn gamma() -> Self {
        let half = BigRational::new(1.into(), 2.into());
        QuadSurd { a: half.clone(), b: -half }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.b.is_zero() && self.a.is_integer()
    }

    /// Exact sign: -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sa == 0 || sb == 0 || sa == sb {
            return if sa != 0 { sa } else { sb };
        }
        let a2 = &self.a * &self.a;
        let b2 = &self.b * &self.b * BigRational::from_integer(5.into());
        if a2 > b2 {
            sa
        } else {
            sb
        }
    }

    pub fn conjugate(&self) -> Self {
        QuadSurd { a: self.a.clone(), b: -self.b.clone() }
    }

    /// a^2 - 5 b^2.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(5.into())
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(QuadSurd { a: &self.a / &n, b: -&self.b / &n })
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = QuadSurd::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * 5f64.sqrt()
    }

    /// Exact floor, seeded by a float guess.
    pub fn floor(&self) -> BigInt {
        let guess = self.to_f64().floor();
        let mut g = if guess.is_finite() {
            BigInt::from(guess as i64)
        } else {
            (&self.a + &self.b * BigRational::from_integer(3.into())).floor().to_integer()
        };
        while (self - &QuadSurd::integer(g.clone())).signum() < 0 {
            g -= 1;
        }
        while (self - &QuadSurd::integer(&g + 1)).signum() >= 0 {
            g += 1;
        }
        g
    }

    /// Representative in [0, 1).
    pub fn fract(&self) -> Self {
        self - &QuadSurd::integer(self.floor())
    }
}

fn sign_of(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl Ord for QuadSurd {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl PartialOrd for QuadSurd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &QuadSurd {
    type Output = QuadSurd;
    fn add(self, rhs: &QuadSurd) -> QuadSurd {
        QuadSurd { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

impl Sub for &QuadSurd {
    type Output = QuadSurd;
    fn sub(self, rhs: &QuadSurd) -> QuadSurd {
        QuadSurd { a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }
}

impl Mul for &QuadSurd {
    type Output = QuadSurd;
    fn mul(self, rhs: &QuadSurd) -> QuadSurd {
        let five = BigRational::from_integer(5.into());
        QuadSurd {
            a: &self.a * &rhs.a + &self.b * &rhs.b * five,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl Neg for &QuadSurd {
    type Output = QuadSurd;
    fn neg(self) -> QuadSurd {
        QuadSurd { a: -self.a.clone(), b: -self.b.clone() }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr for QuadSurd {
            type Output = QuadSurd;
            fn $f(self, rhs: QuadSurd) -> QuadSurd {
                (&self).$f(&rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for QuadSurd {
    type Output = QuadSurd;
    fn neg(self) -> QuadSurd {
        -&self
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

impl Default for QuadSurd {
    fn default() -> Self {
        QuadSurd::zero()
    }
}

impl One for QuadSurd {
    fn one() -> Self {
        QuadSurd::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> QuadSurd {
        QuadSurd::from_ints(a, b)
    }

    #[test]
    fn gamma_identity() {
        let g = QuadSurd::gamma();
        assert_eq!(&g * &g, &g + &QuadSurd::one());
        assert_eq!(&QuadSurd::one() - &(&g * &g), -&g);
    }

    #[test]
    fn signs() {
        assert_eq!(q(2, -1).signum(), -1); // 2 - 2.236
        assert_eq!(q(3, -1).signum(), 1);
        assert_eq!(q(-3, 1).signum(), -1);
        assert_eq!(q(0, 0).signum(), 0);
        assert_eq!(q(0, -2).signum(), -1);
    }

    #[test]
    fn floor_and_fract() {
        assert_eq!(q(0, 1).floor(), BigInt::from(2));
        assert_eq!(q(0, -1).floor(), BigInt::from(-3));
        let g2 = QuadSurd::gamma().pow(2);
        assert_eq!(g2.fract(), g2);
        assert_eq!(QuadSurd::gamma().fract(), &QuadSurd::gamma() + &QuadSurd::one());
    }

    #[test]
    fn inverse() {
        let x = q(3, 7);
        assert_eq!(&x * &x.inv().unwrap(), QuadSurd::one());
        assert!(QuadSurd::zero().inv().is_none());
    }
}
