//! Property tests against independent oracles written here from first principles.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rug::Float;

use fibmap_core::class_a::example_map;
use fibmap_core::fib_arith::{epsilon, sigma_pow, successor, u, zeckendorf};
use fibmap_core::kneading::{fib_class_a, fib_sign, renormalize_kneading_with, ClassASeq, Symbol};
use fibmap_core::model_map::{order_compare, y_value, ModelParams, QuadSurd};
use fibmap_core::mp_dynamics::{
    certified_digits, derivative_product, orbit_piecewise, orbit_quadratic, orbit_quadratic_partial, MPValue,
};
use fibmap_core::quad_fibonacci::{cover_indices, gap_partner};
use fibmap_core::search::{kneading_bisect, Probe};
use fibmap_core::Sign;

/// 1, 1, 2, 3, 5, ... indexed from 0.
fn fib_oracle(n: usize) -> Vec<u64> {
    let mut v = vec![1u64, 1];
    while v.len() <= n {
        let k = v.len();
        v.push(v[k - 1] + v[k - 2]);
    }
    v
}

/// Greedy decomposition, largest term first, returned ascending.
fn greedy_oracle(mut m: u64) -> Vec<u32> {
    let f = fib_oracle(90);
    let mut out = Vec::new();
    while m > 0 {
        let n = (1..f.len()).rev().find(|&n| f[n] <= m).unwrap();
        out.push(n as u32);
        m -= f[n];
    }
    out.reverse();
    out
}

/// Block rule: the block from u(n)+1 to u(n+1) repeats the first u(n-1) symbols with
/// the last T flipped.
fn class_a_oracle(s: Sign, len: usize) -> Vec<Symbol> {
    let f = fib_oracle(60);
    let mut seq = vec![Symbol::J, Symbol::t(-s), Symbol::TPlus];
    let mut n = 3;
    while seq.len() < len {
        let mut block = seq[..f[n - 1] as usize].to_vec();
        let last = block.iter().rposition(|x| *x != Symbol::J).unwrap();
        block[last] = Symbol::t(-block[last].t_sign().unwrap());
        seq.extend(block);
        n += 1;
    }
    seq.truncate(len);
    seq
}

fn r(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn zeckendorf_matches_greedy(m in 1u64..10_000_000_000) {
        let z = zeckendorf(m).unwrap();
        let want = greedy_oracle(m);
        prop_assert_eq!(z.indices(), want.as_slice());
        prop_assert!(z.indices().windows(2).all(|w| w[1] >= w[0] + 2));
        prop_assert_eq!(z.decode_u64(), Some(m));
    }

    #[test]
    fn successor_adds_one(m in 1u64..1_000_000_000) {
        prop_assert_eq!(successor(&zeckendorf(m).unwrap()).unwrap(), zeckendorf(m + 1).unwrap());
    }

    #[test]
    fn sigma_composes(m in 1u64..100_000, a in 0u32..10, b in 0u32..10) {
        prop_assert_eq!(sigma_pow(sigma_pow(m, a), b), sigma_pow(m, a + b));
        let f = fib_oracle(60);
        let direct: u64 = greedy_oracle(m).iter().map(|&i| f[(i + a) as usize]).sum();
        prop_assert_eq!(sigma_pow(m, a), direct);
    }

    #[test]
    fn epsilon_counts_summands(m in 1u64..1_000_000_000) {
        let want = if greedy_oracle(m).len() % 2 == 1 { Sign::Minus } else { Sign::Plus };
        prop_assert_eq!(epsilon(m).unwrap(), want);
    }

    #[test]
    fn class_a_sequences_follow_block_rule(len in 1usize..3000, plus in any::<bool>()) {
        let s = if plus { Sign::Plus } else { Sign::Minus };
        prop_assert_eq!(fib_class_a(s, len).symbols, class_a_oracle(s, len));
    }

    #[test]
    fn renormalization_of_any_prefix(len in 2usize..2000, plus in any::<bool>()) {
        let s = if plus { Sign::Plus } else { Sign::Minus };
        let full = fib_class_a(s, len + 1);
        let out = renormalize_kneading_with(&full.prefix(len), full.symbols[len]).unwrap();
        let t_count = full.symbols[..len].iter().filter(|x| **x != Symbol::J).count();
        prop_assert_eq!(out, ClassASeq { symbols: class_a_oracle(-s, t_count), component: -s });
    }

    #[test]
    fn order_agrees_with_model_positions(m1 in 1u64..5000, m2 in 1u64..5000) {
        let p = ModelParams::half();
        let want = y_value(m1, &p).cmp(&y_value(m2, &p));
        prop_assert_eq!(order_compare(&zeckendorf(m1).unwrap(), &zeckendorf(m2).unwrap()), want);
    }

    #[test]
    fn surd_field_laws(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in -50i64..50) {
        let x = QuadSurd::from_ints(a, b);
        let y = QuadSurd::from_ints(c, d);
        prop_assert_eq!((&x * &y).conjugate(), &x.conjugate() * &y.conjugate());
        prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
        if let Some(inv) = y.inv() {
            prop_assert_eq!(&(&x * &y) * &inv, x.clone());
        }
        let v = a as f64 + b as f64 * 5f64.sqrt();
        let fl = x.floor();
        prop_assert!(BigInt::from(v.floor() as i64) == fl || (v - v.round()).abs() < 1e-9);
        let w = c as f64 + d as f64 * 5f64.sqrt();
        if (v - w).abs() > 1e-9 {
            prop_assert_eq!(x.cmp(&y), v.partial_cmp(&w).unwrap());
        }
    }

    #[test]
    fn quadratic_orbit_is_consistent(cf in -2.0f64..-0.5, n in 1usize..200) {
        let c = MPValue::from_f64(cf, 64);
        let lo = orbit_quadratic_partial(&c, n, 128);
        let reference = orbit_quadratic_partial(&c, n, 1024);
        prop_assert!(reference.certified_len() >= lo.certified_len());
        // claimed digits hold against a much more precise run
        for i in 1..=lo.certified_len() {
            let d = certified_digits(lo.x(i), reference.x(i), 128);
            prop_assert!(d + 1 >= lo.digits(i), "i = {}", i);
        }
        prop_assert_eq!(orbit_quadratic(&c, n, 128).is_ok(), lo.certified_len() >= n);
        // f64 oracle for the first few points
        let mut x = 0.0f64;
        for i in 1..=n.min(8) {
            x = x * x + cf;
            prop_assert!((lo.x(i).to_f64() - x).abs() < 1e-9);
        }
    }

    #[test]
    fn derivative_chain_rule(cf in -1.95f64..-1.5, a in 0usize..40, b in 0usize..40) {
        let c = MPValue::from_f64(cf, 64);
        let orb = orbit_quadratic(&c, 100, 512).unwrap();
        let whole = derivative_product(&orb, 1, a + b).unwrap();
        let first = derivative_product(&orb, 1, a).unwrap();
        let second = derivative_product(&orb, 1 + a, b).unwrap();
        let prod = Float::with_val(1024, first.value() * second.value());
        let diff = Float::with_val(1024, whole.value() - &prod).abs();
        let scale = Float::with_val(1024, whole.value().abs_ref()) + 1e-300;
        prop_assert!(diff / scale < 1e-100);
    }

    #[test]
    fn example_head_is_forced(c in 2.0f64..60.0, lam in 0.01f64..0.2, vfrac in 0.0f64..1.0) {
        let v = lam * vfrac;
        let f = |x: f64| Float::with_val(256, x);
        let map = example_map(&f(c), &f(lam), &f(v), 256).unwrap();
        let orb = orbit_piecewise(&map, &MPValue::from_i64(0, 256), 5, 256);
        let q = c + lam;
        let want = [-c, -1.0, lam, -c + q * lam * lam, v];
        match orb {
            Ok(o) => {
                for (i, w) in want.iter().enumerate().take(o.record.len()) {
                    prop_assert!((o.record.x(i + 1).to_f64() - w).abs() < 1e-9 * (1.0 + w.abs()));
                }
            }
            // v at the critical point stops the orbit at index 5
            Err(_) => prop_assert!(v.abs() < 1e-12),
        }
    }

    #[test]
    fn bisection_brackets_a_threshold(t in 0.01f64..0.99) {
        let target = Float::with_val(64, t);
        let b = kneading_bisect(Float::with_val(64, 0), Float::with_val(64, 1), 3, 40, &[10], |x, _| {
            let side = if *x < target { -1 } else { 1 };
            Ok(Probe { first_diff: Some(5), side })
        }).unwrap();
        let (lo, hi) = if b.lo <= b.hi { (b.lo.to_f64(), b.hi.to_f64()) } else { (b.hi.to_f64(), b.lo.to_f64()) };
        prop_assert!(lo <= t && t <= hi);
        prop_assert!(hi - lo <= 2f64.powi(-40));
    }

    #[test]
    fn gap_partner_pairs_neighbours(n in 2u32..15, pick in any::<prop::sample::Index>()) {
        let cover = cover_indices(n).unwrap();
        prop_assert_eq!(cover.len() as u64, u(n));
        let gaps: Vec<(u64, u64)> = cover.windows(2).map(|w| (w[0].q, w[1].p)).collect();
        let (a, b) = gaps[pick.index(gaps.len())];
        prop_assert_eq!(gap_partner(a).unwrap(), b);
        prop_assert_eq!(gap_partner(b).unwrap(), a);
    }
}

#[test]
fn fib_signs_match_a_double_precision_orbit() {
    // the first 30 points stay far enough from 0 to be resolved in f64
    let c = -1.8705286321646449;
    let mut x = 0.0f64;
    for i in 1..=30u64 {
        x = x * x + c;
        let s = if x < 0.0 { Sign::Minus } else { Sign::Plus };
        assert_eq!(fib_sign(i).unwrap(), s, "i = {i}");
    }
}

#[test]
fn model_endpoints() {
    let p = ModelParams::half();
    assert_eq!(y_value(1, &p), r(-1, 2));
    assert_eq!(y_value(2, &p), r(1, 4));
}
