//! Fibonacci numbers u(1)=1, u(2)=2, u(n+1)=u(n)+u(n-1), Zeckendorf index sets,
//! the adic successor and the index shift.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sign::Sign;

/// Largest index whose value fits in a `u64`.
pub const MAX_U64_INDEX: u32 = 91;

const fn fib_table() -> [u64; MAX_U64_INDEX as usize + 1] {
    let mut t = [0u64; MAX_U64_INDEX as usize + 1];
    t[0] = 1;
    t[1] = 1;
    let mut i = 2;
    while i <= MAX_U64_INDEX as usize {
        t[i] = t[i - 1] + t[i - 2];
        i += 1;
    }
    t
}

static TABLE: [u64; MAX_U64_INDEX as usize + 1] = fib_table();

/// u(n) as a machine integer, with the convention u(0) = 1.
///
/// Panics past `MAX_U64_INDEX`; use [`fib`] for big values.
pub fn u(n: u32) -> u64 {
    assert!(n <= MAX_U64_INDEX, "u({n}) overflows u64");
    TABLE[n as usize]
}

pub fn fib(n: u32) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::Domain("fib(n) needs n >= 1".into()));
    }
    let (mut a, mut b) = (BigUint::one(), BigUint::one());
    for _ in 1..n {
        let next = &a + &b;
        a = b;
        b = next;
    }
    Ok(b)
}

/// Largest n with u(n) <= m, for m >= 1.
pub fn floor_index(m: u64) -> u32 {
    let mut n = 1;
    while n < MAX_U64_INDEX && u(n + 1) <= m {
        n += 1;
    }
    n
}

/// A set of Zeckendorf indices, possibly followed by a period-2 tail s, s+2, s+4, ...
///
/// Kept canonical: the finite part never ends at `s - 2`, so equal sets compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FibIndexSet {
    indices: Vec<u32>,
    tail: Option<u32>,
}

impl FibIndexSet {
    pub fn empty() -> Self {
        FibIndexSet { indices: Vec::new(), tail: None }
    }

    pub fn finite(indices: Vec<u32>) -> Result<Self> {
        check_gaps(&indices)?;
        Ok(FibIndexSet { indices, tail: None })
    }

    /// `prefix` followed by the infinite tail `start, start+2, ...`.
    pub fn with_tail(prefix: Vec<u32>, start: u32) -> Result<Self> {
        if start == 0 {
            return Err(Error::Domain("tail must start at an index >= 1".into()));
        }
        check_gaps(&prefix)?;
        if let Some(&last) = prefix.last() {
            if last + 2 > start {
                return Err(Error::Domain(format!(
                    "prefix index {last} too close to tail start {start}"
                )));
            }
        }
        let mut indices = prefix;
        let mut start = start;
        while indices.last().is_some_and(|&l| l + 2 == start) {
            start = indices.pop().unwrap();
        }
        Ok(FibIndexSet { indices, tail: Some(start) })
    }

    /// The maximal sequence u(1)+u(3)+u(5)+...
    pub fn odd_tail() -> Self {
        FibIndexSet { indices: Vec::new(), tail: Some(1) }
    }

    /// The maximal sequence u(2)+u(4)+u(6)+...
    pub fn even_tail() -> Self {
        FibIndexSet { indices: Vec::new(), tail: Some(2) }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn tail(&self) -> Option<u32> {
        self.tail
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty() && self.tail.is_none()
    }

    /// Number of summands; `None` for infinite sets.
    pub fn count(&self) -> Option<usize> {
        self.tail.map_or(Some(self.indices.len()), |_| None)
    }

    /// Smallest index, if any.
    pub fn leading(&self) -> Option<u32> {
        self.indices.first().copied().or(self.tail)
    }

    /// Digit a_i of the 0/1 word (indexed from 1).
    pub fn digit(&self, i: u32) -> bool {
        if self.indices.binary_search(&i).is_ok() {
            return true;
        }
        matches!(self.tail, Some(s) if i >= s && (i - s).is_multiple_of(2))
    }

    /// The first `k` digits a_1..a_k.
    pub fn prefix_word(&self, k: u32) -> Vec<u8> {
        (1..=k).map(|i| self.digit(i) as u8).collect()
    }

    /// Indices up to and including `limit`, tail expanded.
    pub fn indices_upto(&self, limit: u32) -> Vec<u32> {
        let mut out: Vec<u32> = self.indices.iter().copied().filter(|&i| i <= limit).collect();
        if let Some(s) = self.tail {
            out.extend((s..=limit).step_by(2));
        }
        out
    }

    pub fn decode(&self) -> Option<BigUint> {
        if self.tail.is_some() {
            return None;
        }
        let mut sum = BigUint::zero();
        for &i in &self.indices {
            sum += fib(i).ok()?;
        }
        Some(sum)
    }

    pub fn decode_u64(&self) -> Option<u64> {
        if self.tail.is_some() {
            return None;
        }
        self.indices.iter().try_fold(0u64, |acc, &i| {
            if i > MAX_U64_INDEX {
                None
            } else {
                acc.checked_add(u(i))
            }
        })
    }
}

fn check_gaps(indices: &[u32]) -> Result<()> {
    if indices.first() == Some(&0) {
        return Err(Error::Domain("indices start at 1".into()));
    }
    for w in indices.windows(2) {
        if w[1] < w[0] + 2 {
            return Err(Error::Domain(format!(
                "indices {} and {} violate the gap >= 2 condition",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

impl fmt::Display for FibIndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = self.indices.iter().map(|i| format!("u({i})")).collect();
        if let Some(s) = self.tail {
            parts.push(format!("u({s})+u({})+...", s + 2));
        }
        write!(f, "{}", parts.join("+"))
    }
}

/// Greedy Zeckendorf encoding.
pub fn zeckendorf(m: u64) -> Result<FibIndexSet> {
    if m == 0 {
        return Err(Error::Domain("zeckendorf(m) needs m >= 1".into()));
    }
    Ok(zeckendorf_or_empty(m))
}

/// Like [`zeckendorf`] but maps 0 to the empty set.
pub fn zeckendorf_or_empty(mut m: u64) -> FibIndexSet {
    let mut idx = Vec::new();
    while m > 0 {
        let n = floor_index(m);
        idx.push(n);
        m -= u(n);
    }
    idx.reverse();
    FibIndexSet { indices: idx, tail: None }
}

/// The adic "+1": find the smallest j with a_j = a_{j+1} = 0 whose prefix a_1..a_{j-1}
/// encodes u(j)-1 (it alternates down from j-1), clear the prefix and set a_j.
pub fn successor(s: &FibIndexSet) -> Result<FibIndexSet> {
    let bound = match s.tail {
        Some(t) => t,
        None => s.indices.last().copied().unwrap_or(0) + 3,
    };
    for j in 1..=bound {
        if s.digit(j) || s.digit(j + 1) {
            continue;
        }
        let alternating = (1..j).all(|i| s.digit(i) == ((j - 1 - i) % 2 == 0));
        if alternating {
            let mut idx: Vec<u32> = s.indices.iter().copied().filter(|&i| i > j).collect();
            idx.insert(0, j);
            return Ok(match s.tail {
                Some(t) => FibIndexSet::with_tail(idx, t)?,
                None => FibIndexSet { indices: idx, tail: None },
            });
        }
    }
    match s.tail {
        // only the two maximal alternating sequences carry forever
        Some(_) => Ok(FibIndexSet::empty()),
        None => Err(Error::Unsupported(format!("no successor found for {s}"))),
    }
}

/// sigma: every index shifted up by one.
pub fn sigma_shift(s: &FibIndexSet) -> FibIndexSet {
    FibIndexSet {
        indices: s.indices.iter().map(|i| i + 1).collect(),
        tail: s.tail.map(|t| t + 1),
    }
}

/// sigma applied to an integer, n times.
pub fn sigma_pow(m: u64, n: u32) -> u64 {
    let z = zeckendorf_or_empty(m);
    z.indices.iter().map(|&i| u(i + n)).sum()
}

/// epsilon_m = (-1)^(number of Zeckendorf summands of m).
pub fn epsilon(m: u64) -> Result<Sign> {
    let z = zeckendorf(m)?;
    Ok(Sign::from_parity(z.indices.len() % 2 == 1))
}

/// All 0/1 words of length k with no two consecutive ones, in lexicographic order.
pub fn enumerate_cylinders(k: u32) -> Vec<Vec<u8>> {
    let mut words: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(words.len() * 2);
        for w in &words {
            let mut zero = w.clone();
            zero.push(0);
            next.push(zero);
            if w.last() != Some(&1) {
                let mut one = w.clone();
                one.push(1);
                next.push(one);
            }
        }
        words = next;
    }
    words
}

/// u(n) as f64 through the big-integer path, for indices past the u64 table.
pub fn fib_f64(n: u32) -> f64 {
    fib(n.max(1)).ok().and_then(|b| b.to_f64()).unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(m: u64) -> Vec<u32> {
        // all subsets of indices 1..=8 with gaps >= 2
        for mask in 0u32..256 {
            let idx: Vec<u32> = (1..=8).filter(|i| mask >> (i - 1) & 1 == 1).collect();
            if idx.windows(2).any(|w| w[1] < w[0] + 2) {
                continue;
            }
            if idx.iter().map(|&i| u(i)).sum::<u64>() == m {
                return idx;
            }
        }
        panic!("no representation for {m}");
    }

    #[test]
    fn fib_values() {
        assert_eq!(fib(1).unwrap(), BigUint::from(1u32));
        assert_eq!(fib(2).unwrap(), BigUint::from(2u32));
        assert_eq!(fib(5).unwrap(), BigUint::from(8u32));
        assert_eq!(fib(10).unwrap(), BigUint::from(89u32));
        assert!(fib(0).is_err());
        assert_eq!(fib(91).unwrap(), BigUint::from(u(91)));
    }

    #[test]
    fn zeckendorf_examples() {
        assert_eq!(zeckendorf(12).unwrap().indices(), &[1, 3, 5]);
        assert_eq!(zeckendorf(7).unwrap().indices(), &[2, 4]);
        assert_eq!(zeckendorf(u(6) - 1).unwrap().indices(), &[1, 3, 5]);
        assert!(zeckendorf(0).is_err());
        for m in 1..=32 {
            assert_eq!(zeckendorf(m).unwrap().indices(), brute(m).as_slice());
        }
    }

    #[test]
    fn successor_examples() {
        assert_eq!(successor(&FibIndexSet::empty()).unwrap().indices(), &[1]);
        let s = FibIndexSet::finite(vec![1, 3]).unwrap();
        assert_eq!(successor(&s).unwrap().indices(), &[4]);
        assert!(successor(&FibIndexSet::odd_tail()).unwrap().is_empty());
        assert!(successor(&FibIndexSet::even_tail()).unwrap().is_empty());
        let t = FibIndexSet::with_tail(vec![], 5).unwrap();
        let n = successor(&t).unwrap();
        assert_eq!(n.indices(), &[1]);
        assert_eq!(n.tail(), Some(5));
    }

    #[test]
    fn tails_are_canonical() {
        let a = FibIndexSet::with_tail(vec![1, 3], 5).unwrap();
        assert_eq!(a, FibIndexSet::odd_tail());
        assert!(FibIndexSet::with_tail(vec![4], 5).is_err());
    }

    #[test]
    fn sigma_and_epsilon() {
        assert_eq!(sigma_shift(&zeckendorf(1).unwrap()).decode_u64(), Some(2));
        assert_eq!(sigma_shift(&zeckendorf(4).unwrap()).decode_u64(), Some(7));
        for n in 1..20 {
            assert_eq!(sigma_pow(u(n), 1), u(n + 1));
            assert_eq!(epsilon(u(n)).unwrap(), Sign::Minus);
        }
        assert_eq!(epsilon(4).unwrap(), Sign::Plus);
        assert_eq!(epsilon(12).unwrap(), Sign::Minus);
    }

    #[test]
    fn cylinders() {
        assert_eq!(enumerate_cylinders(1), vec![vec![0], vec![1]]);
        assert_eq!(enumerate_cylinders(2), vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(enumerate_cylinders(5).len(), 13);
        for k in 1..=12 {
            assert_eq!(enumerate_cylinders(k).len() as u64, u(k + 1));
        }
    }

    #[test]
    fn display() {
        assert_eq!(zeckendorf(12).unwrap().to_string(), "u(1)+u(3)+u(5)");
        assert_eq!(FibIndexSet::odd_tail().to_string(), "u(1)+u(3)+...");
    }
}
