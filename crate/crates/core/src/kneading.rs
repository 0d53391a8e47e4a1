//! Kneading data: unimodal sign sequences, the kneading determinant, and
//! the three-letter class-A alphabet with its renormalization rewrite.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fib_arith::{floor_index, u};
use crate::sign::Sign;

/// sgn(x_i) for the Fibonacci map.
pub fn fib_sign(i: u64) -> Result<Sign> {
    if i == 0 {
        return Err(Error::Domain("fib_sign(i) needs i >= 1".into()));
    }
    let mut i = i;
    loop {
        let n = floor_index(i);
        if u(n) == i {
            let e = (n as u64 + 1) * (n as u64 + 2) / 2;
            return Ok(Sign::from_parity(e % 2 == 1));
        }
        i -= u(n);
    }
}

/// Signs of x_1..x_n for the Fibonacci map.
pub fn fib_signs(n: usize) -> SignSeq {
    SignSeq((1..=n as u64).map(|i| fib_sign(i).unwrap()).collect())
}

/// Signs of x_1, x_2, ... (entry 0 is the sign of x_1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignSeq(pub Vec<Sign>);

impl SignSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sign of x_i, 1-based.
    pub fn at(&self, i: usize) -> Sign {
        self.0[i - 1]
    }

    /// First 1-based index where the two sequences differ.
    pub fn first_difference(&self, other: &SignSeq) -> Option<usize> {
        self.0.iter().zip(&other.0).position(|(a, b)| a != b).map(|p| p + 1)
    }
}

impl fmt::Display for SignSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for SignSeq {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| Sign::from_char(c).ok_or_else(|| Error::Domain(format!("bad sign character {c:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(SignSeq)
    }
}

/// Coefficients eps_0 = +1, eps_1, ..., eps_N of D(t).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KneadingSeries(pub Vec<Sign>);

impl KneadingSeries {
    /// Cumulative products of the signs.
    pub fn from_signs(signs: &SignSeq) -> Self {
        let mut eps = Vec::with_capacity(signs.len() + 1);
        let mut acc = Sign::Plus;
        eps.push(acc);
        for &s in &signs.0 {
            acc = acc * s;
            eps.push(acc);
        }
        KneadingSeries(eps)
    }

    pub fn fibonacci(n: usize) -> Self {
        Self::from_signs(&fib_signs(n))
    }

    /// Truncation length N (highest coefficient index).
    pub fn horizon(&self) -> usize {
        self.0.len() - 1
    }

    pub fn eps(&self, n: usize) -> Sign {
        self.0[n]
    }

    pub fn truncated(&self, n: usize) -> Self {
        KneadingSeries(self.0[..=n.min(self.horizon())].to_vec())
    }

    /// D_N(t) by Horner.
    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, s| acc * t + s.as_i8() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub horizon: usize,
    /// (m, i) of the first violation.
    pub violation: Option<(usize, usize)>,
}

/// For each m, the first i with eps_{m+i} != eps_m eps_i must have eps_i = -1.
/// The verdict only covers the horizon of the series.
pub fn admissible(eps: &KneadingSeries) -> Admissibility {
    let n = eps.horizon();
    for m in 1..n {
        let first = (1..=n - m).find(|&i| eps.eps(m + i) != eps.eps(m) * eps.eps(i));
        if let Some(i) = first {
            if eps.eps(i) != Sign::Minus {
                return Admissibility { admissible: false, horizon: n, violation: Some((m, i)) };
            }
        }
    }
    Admissibility { admissible: true, horizon: n, violation: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Entropy {
    /// Growth rate s = 1/r.
    pub s: f64,
    /// h = log s.
    pub h: f64,
    pub horizon: usize,
    /// Estimate from the doubled horizon.
    pub s_doubled: f64,
}

fn smallest_root(eps: &KneadingSeries) -> Option<f64> {
    const STEPS: usize = 1 << 14;
    let mut prev_t = 0.0;
    let mut prev = eps.eval(0.0);
    for k in 1..STEPS {
        let t = k as f64 / STEPS as f64;
        let v = eps.eval(t);
        if v == 0.0 {
            return Some(t);
        }
        if (v < 0.0) != (prev < 0.0) {
            let (mut lo, mut hi) = (prev_t, t);
            let lo_neg = prev < 0.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if (eps.eval(mid) < 0.0) == lo_neg {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev_t = t;
        prev = v;
    }
    None
}

/// Smallest zero of the truncated kneading determinant in (0,1); s = 1/root.
/// `eps` must reach horizon 2N so the two truncations can be compared.
pub fn entropy_from_kneading(eps: &KneadingSeries, n: usize, tol: f64) -> Result<Entropy> {
    if eps.horizon() < 2 * n {
        return Err(Error::Domain(format!(
            "series horizon {} is shorter than 2N = {}",
            eps.horizon(),
            2 * n
        )));
    }
    let rate = |h: usize| smallest_root(&eps.truncated(h)).map_or(1.0, |r| 1.0 / r);
    let s_n = rate(n);
    let s_2n = rate(2 * n);
    if (s_n - s_2n).abs() >= tol {
        return Err(Error::Unstable { horizon: n, s_n, s_2n });
    }
    Ok(Entropy { s: s_2n, h: s_2n.ln(), horizon: n, s_doubled: s_2n })
}

/// Letters of the class-A alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    J,
    TPlus,
    TMinus,
}

impl Symbol {
    pub fn t(s: Sign) -> Symbol {
        match s {
            Sign::Plus => Symbol::TPlus,
            Sign::Minus => Symbol::TMinus,
        }
    }

    pub fn t_sign(self) -> Option<Sign> {
        match self {
            Symbol::J => None,
            Symbol::TPlus => Some(Sign::Plus),
            Symbol::TMinus => Some(Sign::Minus),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::J => 'J',
            Symbol::TPlus => 'P',
            Symbol::TMinus => 'M',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            'J' => Some(Symbol::J),
            'P' => Some(Symbol::TPlus),
            'M' => Some(Symbol::TMinus),
            _ => None,
        }
    }

    fn flipped(self) -> Symbol {
        match self {
            Symbol::J => Symbol::J,
            Symbol::TPlus => Symbol::TMinus,
            Symbol::TMinus => Symbol::TPlus,
        }
    }
}

/// Symbols of x_1, x_2, ... with the component of the map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassASeq {
    pub symbols: Vec<Symbol>,
    pub component: Sign,
}

impl ClassASeq {
    pub fn parse(s: &str, component: Sign) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| Symbol::from_char(c).ok_or_else(|| Error::Domain(format!("bad symbol {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(ClassASeq { symbols, component })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn prefix(&self, len: usize) -> ClassASeq {
        ClassASeq { symbols: self.symbols[..len.min(self.len())].to_vec(), component: self.component }
    }
}

impl fmt::Display for ClassASeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

/// Prefix of fib^+ or fib^-: the block u(n)+1..u(n+1) repeats the prefix of length
/// u(n-1) with its final T flipped.
pub fn fib_class_a(component: Sign, len: usize) -> ClassASeq {
    let mut s = match component {
        Sign::Plus => vec![Symbol::J, Symbol::TMinus, Symbol::TPlus],
        Sign::Minus => vec![Symbol::J, Symbol::TPlus, Symbol::TPlus],
    };
    let mut n = 3;
    while s.len() < len {
        let mut block = s[..u(n - 1) as usize].to_vec();
        let last = block.len() - 1;
        block[last] = block[last].flipped();
        s.extend(block);
        n += 1;
    }
    s.truncate(len);
    ClassASeq { symbols: s, component }
}

/// Symbolic renormalization. A trailing T is read as if a J followed it, which is
/// what happens at every Fibonacci length u(n).
pub fn renormalize_kneading(seq: &ClassASeq) -> Result<ClassASeq> {
    renormalize_kneading_with(seq, Symbol::J)
}

/// Symbolic renormalization with an explicit symbol standing after the last one.
pub fn renormalize_kneading_with(seq: &ClassASeq, after: Symbol) -> Result<ClassASeq> {
    let s = &seq.symbols;
    if s.len() < 2 || s[0] != Symbol::J || s[1] == Symbol::J {
        return Err(Error::Shape(format!("sequence {seq} does not start with J T")));
    }
    let k = seq.component;
    let mut out = Vec::with_capacity(s.len());
    for (i, &sym) in s.iter().enumerate() {
        let next = s.get(i + 1).copied().unwrap_or(after);
        match (sym.t_sign(), next) {
            (None, _) => {}
            (Some(t), Symbol::J) => out.push(Symbol::t(k * t)),
            (Some(_), _) => out.push(Symbol::J),
        }
    }
    Ok(ClassASeq { symbols: out, component: -k })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fib_sign_examples() {
        assert_eq!(fib_sign(1).unwrap(), Sign::Minus);
        assert_eq!(fib_sign(2).unwrap(), Sign::Plus);
        assert_eq!(fib_sign(4).unwrap(), Sign::Minus);
        assert!(fib_sign(0).is_err());
        assert_eq!(fib_signs(20).to_string(), "-++---+--++-+-++---+");
    }

    #[test]
    fn itinerary_signs_match_the_sign_sequence() {
        for n in 1..40 {
            let expect = if n % 4 == 0 || n % 4 == 1 { Sign::Minus } else { Sign::Plus };
            assert_eq!(fib_sign(u(n)).unwrap(), expect, "n = {n}");
        }
    }

    #[test]
    fn admissibility() {
        assert!(admissible(&KneadingSeries::fibonacci(500)).admissible);
        let full = KneadingSeries(
            std::iter::once(Sign::Plus).chain(std::iter::repeat_n(Sign::Minus, 200)).collect(),
        );
        assert!(admissible(&full).admissible);
        // flipping eps_4 still passes every first-difference test
        let mut flip4 = KneadingSeries::fibonacci(200);
        assert_eq!(flip4.0[4], Sign::Plus);
        flip4.0[4] = Sign::Minus;
        assert!(admissible(&flip4).admissible);
        let mut flip5 = KneadingSeries::fibonacci(200);
        flip5.0[5] = -flip5.0[5];
        let verdict = admissible(&flip5);
        assert!(!verdict.admissible);
        assert_eq!(verdict.violation, Some((3, 4)));
    }

    #[test]
    fn entropy_full_map() {
        let full = KneadingSeries(
            std::iter::once(Sign::Plus).chain(std::iter::repeat_n(Sign::Minus, 400)).collect(),
        );
        let e = entropy_from_kneading(&full, 200, 1e-9).unwrap();
        assert!((e.s - 2.0).abs() < 1e-9);
        assert!((e.h - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn entropy_fibonacci() {
        let e = entropy_from_kneading(&KneadingSeries::fibonacci(1600), 800, 1e-7).unwrap();
        assert!((e.s - 1.7292119317).abs() < 1e-6, "{}", e.s);
    }

    #[test]
    fn entropy_zero_without_root() {
        // itinerary -,+,-,+,...: D(t) = (1-t)/(1+t^2), no zero inside (0,1)
        let per2 = SignSeq((0..400).map(|i| if i % 2 == 0 { Sign::Minus } else { Sign::Plus }).collect());
        let e = entropy_from_kneading(&KneadingSeries::from_signs(&per2), 200, 1e-9).unwrap();
        assert_eq!(e.s, 1.0);
        assert_eq!(e.h, 0.0);
    }

    #[test]
    fn class_a_prefixes() {
        assert_eq!(fib_class_a(Sign::Plus, 8).to_string(), "JMPJPJMM");
        assert_eq!(fib_class_a(Sign::Minus, 8).to_string(), "JPPJMJPM");
        assert_eq!(fib_class_a(Sign::Plus, 13).to_string(), "JMPJPJMMJMPJM");
        assert_eq!(fib_class_a(Sign::Minus, 13).to_string(), "JPPJMJPMJPPJP");
    }

    #[test]
    fn j_positions() {
        use crate::fib_arith::zeckendorf;
        for k in [Sign::Plus, Sign::Minus] {
            let seq = fib_class_a(k, 100);
            let js: Vec<u64> = (1..=100u64).filter(|&m| seq.symbols[m as usize - 1] == Symbol::J).collect();
            // x_m lies in J exactly when m - 1 has no summand u(1) or u(2)
            let expect: Vec<u64> = (1..=100u64)
                .filter(|&m| m == 1 || zeckendorf(m - 1).unwrap().leading().unwrap() >= 3)
                .collect();
            assert_eq!(js, expect);
            for n in 3..=10 {
                assert!(js.contains(&(u(n) + 1)));
            }
            assert!(js.contains(&12));
        }
    }

    #[test]
    fn renormalize_examples() {
        let s = ClassASeq::parse("JM", Sign::Plus).unwrap();
        assert_eq!(renormalize_kneading_with(&s, Symbol::TPlus).unwrap().to_string(), "J");
        let s = ClassASeq::parse("JMP", Sign::Plus).unwrap();
        let r = renormalize_kneading(&s).unwrap();
        assert_eq!(r.to_string(), "JP");
        assert_eq!(r.component, Sign::Minus);
        assert!(renormalize_kneading(&ClassASeq::parse("MJ", Sign::Plus).unwrap()).is_err());
        assert!(renormalize_kneading(&ClassASeq::parse("JJ", Sign::Plus).unwrap()).is_err());
    }

    #[test]
    fn renormalize_fib_prefixes() {
        for k in [Sign::Plus, Sign::Minus] {
            for n in 3..=20 {
                let r = renormalize_kneading(&fib_class_a(k, u(n) as usize)).unwrap();
                assert_eq!(r, fib_class_a(-k, u(n - 1) as usize), "n = {n}");
            }
        }
    }
}
