//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rug::Float;

use fibmap_core::class_a::{geometry_experiment, renormalize_tower, tune_v, GeometryParams};
use fibmap_core::fib_arith::{epsilon, u, zeckendorf_or_empty};
use fibmap_core::kneading::{entropy_from_kneading, fib_class_a, fib_signs, renormalize_kneading_with, KneadingSeries};
use fibmap_core::model_map::{phi_unreduced, y_value, CellKind, ModelMap, ModelParams, QuadSurd};
use fibmap_core::mp_dynamics::{itinerary, orbit_piecewise, MPValue, OrbitRecord};
use fibmap_core::quad_fibonacci::{
    build_cover_from_orbit, cover_indices, dimension_estimate, fibonacci_orbit, find_c, model_cover_lengths,
    scaling_report, summability_series, CBracket, REFERENCE_C,
};
use fibmap_core::Sign;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Scaling and cover depth.
const DEPTH: u32 = 16;
/// Orbit length for the summability series.
const SERIES_LEN: usize = 10_000;
const ORBIT_PREC: u32 = 1024;

/// c located deep enough that the orbit follows the Fibonacci signs past 10^4.
struct Located {
    bracket: CBracket,
    orbit: OrbitRecord,
}

fn located() -> &'static Located {
    static CELL: OnceLock<Located> = OnceLock::new();
    CELL.get_or_init(|| {
        let bracket = find_c(20, 128).expect("find_c at depth 20");
        let orbit = fibonacci_orbit(&bracket.midpoint(), SERIES_LEN + 1, ORBIT_PREC).expect("orbit at c");
        Located { bracket, orbit }
    })
}

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn c1_parameter() -> Outcome {
    let start = Instant::now();
    let bracket = find_c(DEPTH, 80).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let reference = MPValue::parse(REFERENCE_C, 128).map_err(|e| e.to_string())?;
    let digits = bracket.agreement_with(&reference);
    let msg = format!("{digits} digits in {elapsed:.1?}, midpoint {}", bracket.midpoint().decimal(25));
    check(digits >= 12 && elapsed <= Duration::from_secs(600), msg.clone(), msg)
}

fn c2_entropy() -> Outcome {
    let n = 800;
    let e = entropy_from_kneading(&KneadingSeries::fibonacci(2 * n), n, 1e-7).map_err(|e| e.to_string())?;
    let err = (e.s - 1.7292119317).abs();
    let msg = format!("s = {:.10}, |s - 1.7292119317| = {err:.1e}", e.s);
    check(err < 1e-6, msg.clone(), msg)
}

fn c3_scaling() -> Outcome {
    let r = scaling_report(&located().orbit, DEPTH, None).map_err(|e| e.to_string())?;
    let slope = r.lambda_fit.slope;
    let last = r.last_ratios(4);
    let ratios_ok = last.len() == 4 && last.iter().all(|&(_, q)| (0.72..=0.87).contains(&q));
    let msg = format!("slope {slope:.4} over {:?}, last ratios {:?}", r.lambda_fit.window, last);
    check((slope + 1.0 / 3.0).abs() <= 0.03 && ratios_ok, msg.clone(), msg)
}

fn c4_symbolic() -> Outcome {
    for s in [Sign::Plus, Sign::Minus] {
        let full = fib_class_a(s, u(21) as usize);
        for n in 2..=20 {
            let len = u(n) as usize;
            let got = renormalize_kneading_with(&full.prefix(len), full.symbols[len]).map_err(|e| e.to_string())?;
            if got != fib_class_a(-s, u(n - 1) as usize) {
                return Err(format!("component {s:?}, n = {n}"));
            }
        }
    }
    Ok("fib^s_u(n) -> fib^-s_u(n-1) for 2 <= n <= 20, both components".into())
}

fn c5_semiconjugacy() -> Outcome {
    let gamma = QuadSurd::gamma();
    let mut prev = phi_unreduced(&zeckendorf_or_empty(0));
    for m in 0..=10_000u64 {
        let next = phi_unreduced(&zeckendorf_or_empty(m + 1));
        let d = &(&next - &prev) - &gamma;
        if !d.is_integer() {
            return Err(format!("phi(m+1) - phi(m) - gamma not an integer at m = {m}"));
        }
        prev = next;
    }
    Ok("integer difference for m <= 10^4".into())
}

fn c6_model() -> Outcome {
    let map = ModelMap::default();
    let p = ModelParams::half();
    let mut prev = y_value(1, &p);
    for m in 1..=10_000u64 {
        let next = y_value(m + 1, &p);
        if map.eval(&prev).map_err(|e| e.to_string())? != next {
            return Err(format!("F(y_{m}) != y_{}", m + 1));
        }
        prev = next;
    }
    let r = |a: i64, b: i64| num_rational::BigRational::new(a.into(), b.into());
    if map.cell(CellKind::Gap(0)).map(|c| c.slope()) != Some(r(-6, 5)) {
        return Err("gap 0 slope".into());
    }
    for n in 1..=30 {
        let s = map.cell(CellKind::Gap(n)).map(|c| c.slope()).ok_or("missing gap")?;
        if s != r(11, 2) && s != r(-11, 2) {
            return Err(format!("gap {n} slope {s}"));
        }
    }
    Ok("F(y_m) = y_(m+1) for m <= 10^4; gap slopes -6/5 and +-11/2".into())
}

fn c7_cover() -> Outcome {
    let covers = build_cover_from_orbit(&located().orbit, 14).map_err(|e| e.to_string())?;
    for cm in &covers {
        if cm.len() as u64 != u(cm.level) {
            return Err(format!("level {} has {} intervals", cm.level, cm.len()));
        }
    }
    let pairs = |n: u32| -> Vec<(u64, u64)> { cover_indices(n).unwrap().iter().map(|e| (e.p, e.q)).collect() };
    let displayed: [(u32, Vec<(u64, u64)>); 3] = [
        (2, vec![(1, 4), (5, 2)]),
        (3, vec![(1, 4), (5, 3), (7, 2)]),
        (4, vec![(1, 6), (12, 4), (5, 13), (11, 3), (7, 2)]),
    ];
    for (n, want) in displayed {
        if pairs(n) != want {
            return Err(format!("M^{n} = {:?}", pairs(n)));
        }
    }
    let gaps = covers[4].gaps();
    let want = vec![(9, 19), (6, 12), (4, 5), (18, 8), (13, 11), (3, 7), (20, 10)];
    check(gaps == want, "u(n) disjoint nested intervals for n <= 14; displays and gaps match".into(), format!("gaps {gaps:?}"))
}

fn c8_dimension() -> Outcome {
    let covers = build_cover_from_orbit(&located().orbit, DEPTH).map_err(|e| e.to_string())?;
    let quad = dimension_estimate(&covers.iter().map(|c| c.lengths()).collect::<Vec<_>>());
    let model = dimension_estimate(&model_cover_lengths(&ModelParams::half(), DEPTH).map_err(|e| e.to_string())?);
    let decreasing = quad.windows(2).all(|w| w[1].estimate < w[0].estimate);
    let top = quad.last().unwrap().estimate;
    let tail = &model[model.len() - 4..];
    let model_floor = tail.iter().map(|r| r.estimate).fold(f64::INFINITY, f64::min);
    let msg = format!(
        "quadratic {:.3} -> {top:.3}, model tail min {model_floor:.3}",
        quad.first().unwrap().estimate
    );
    check(decreasing && top < 0.5 && model_floor > 0.3, msg.clone(), msg)
}

fn c9_summability() -> Outcome {
    let r = summability_series(&located().orbit, 0.5, SERIES_LEN, 1e-6).map_err(|e| e.to_string())?;
    match r.first_small_increment {
        Some(n) if n < SERIES_LEN => Ok(format!("increment < 1e-6 first at n = {n}, partial sum {:.6}", r.total)),
        other => Err(format!("first small increment {other:?}")),
    }
}

fn c10_class_a() -> Outcome {
    let b = tune_v(&Float::with_val(64, 10), &Float::with_val(64, 0.05), 10, 128).map_err(|e| e.to_string())?;
    let map = b.map(256).map_err(|e| e.to_string())?;
    let len = u(10) as usize;
    let orb = orbit_piecewise(&map, &MPValue::from_i64(0, 256), len, 256).map_err(|e| e.to_string())?;
    if orb.symbols != fib_class_a(Sign::Plus, len) {
        return Err("tuned kneading differs from fib^+".into());
    }
    let (_, checks) = renormalize_tower(&map, 3, len, 256).map_err(|e| e.to_string())?;
    if let Some(bad) = checks.iter().find(|c| !c.all_ok()) {
        return Err(format!("tower check {bad:?}"));
    }
    let g = geometry_experiment(&GeometryParams::default()).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = g.rows.iter().map(|r| r.a_ratio).collect();
    let ratios_ok = ratios.iter().all(|q| ((q - g.ratio_reference) / g.ratio_reference).abs() <= 0.15);
    let a: Vec<f64> = g.rows.iter().map(|r| r.a).collect();
    let msg = format!("3 tower levels ok; a = {a:.3?}; renormalization ratios {ratios:.3?}");
    check(g.a_decreasing && ratios_ok, msg.clone(), msg)
}

fn c11_cross_oracle() -> Outcome {
    let loc = located();
    let depth = loc.bracket.horizon.min(loc.orbit.certified_len());
    let it = itinerary(&loc.orbit.truncated(depth)).map_err(|e| e.to_string())?;
    let fs = fib_signs(depth);
    if it != fs {
        return Err(format!("itinerary differs at {:?}", it.first_difference(&fs)));
    }
    let eps = KneadingSeries::fibonacci(10_000);
    for m in 1..=10_000u64 {
        if epsilon(m).map_err(|e| e.to_string())? != eps.eps(m as usize) {
            return Err(format!("epsilon({m}) differs from the sign product"));
        }
    }
    Ok(format!("itinerary = fib signs through {depth}; epsilon(m) = sign product for m <= 10^4"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("parameter reproduction", c1_parameter),
        ("entropy reproduction", c2_entropy),
        ("scaling law", c3_scaling),
        ("symbolic renormalization", c4_symbolic),
        ("semi-conjugacy", c5_semiconjugacy),
        ("model map", c6_model),
        ("covering structure", c7_cover),
        ("dimension trend", c8_dimension),
        ("summability", c9_summability),
        ("class-A pipeline", c10_class_a),
        ("cross-oracle", c11_cross_oracle),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
