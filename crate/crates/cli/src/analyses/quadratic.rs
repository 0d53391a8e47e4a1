use serde::Serialize;

use fibmap_core::fib_arith::u;
use fibmap_core::model_map::ModelParams;
use fibmap_core::mp_dynamics::{MPValue, OrbitRecord};
use fibmap_core::quad_fibonacci::{
    build_cover_from_orbit, derivative_growth_fit, dimension_estimate, fibonacci_orbit, find_c, model_cover_lengths,
    return_derivative_check, scaling_report, summability_series, verify_closest_returns, CBracket, REFERENCE_C,
};

use super::model::model_params;
use crate::analysis::{num, Analysis, Opt, Params, Report, Table};
use crate::error::CliError;

const C_HELP: &str = "parameter c as a decimal, or \"search\" to locate it deep enough for the orbit";
const PREC_HELP: &str = "orbit precision in bits, or \"auto\"";

/// Bits used when locating c for an orbit analysis.
const SEARCH_BITS: u32 = 128;

/// Smallest search depth whose itinerary guarantee covers `len` points.
fn search_depth(len: usize) -> u32 {
    (8..).find(|&n| u(n) as usize >= len).unwrap()
}

fn orbit_precision(p: &Params, len: usize) -> Result<u32, CliError> {
    match p.raw("precision-bits") {
        None | Some("auto") => Ok(((len as u32 / 8 + 64).div_ceil(64) * 64).max(256)),
        Some(_) => {
            let bits = p.u32("precision-bits")?;
            if bits < 64 {
                return Err(CliError::Usage("precision-bits must be at least 64".into()));
            }
            Ok(bits)
        }
    }
}

/// The located parameter, with the bracket when it was searched for.
pub struct Located {
    pub c: MPValue,
    pub bracket: Option<CBracket>,
}

pub fn locate(p: &Params, len: usize) -> Result<Located, CliError> {
    match p.string("c")?.as_str() {
        "search" => {
            let bracket = find_c(search_depth(len), SEARCH_BITS)?;
            Ok(Located { c: bracket.midpoint(), bracket: Some(bracket) })
        }
        s => {
            let digits = s.chars().filter(char::is_ascii_digit).count() as u32;
            let c = MPValue::parse(s, (digits * 4 + 16).max(64)).map_err(|_| CliError::Malformed(format!("c = {s:?}")))?;
            Ok(Located { c, bracket: None })
        }
    }
}

fn located_orbit(p: &Params, len: usize) -> Result<(Located, OrbitRecord, u32), CliError> {
    let loc = locate(p, len)?;
    let prec = orbit_precision(p, len)?;
    let orb = fibonacci_orbit(&loc.c, len, prec)?;
    Ok((loc, orb, prec))
}

fn c_text(loc: &Located) -> String {
    match &loc.bracket {
        Some(b) => format!("c = {} (depth {}, {} digits)", b.midpoint().decimal(b.digits()), b.depth, b.digits()),
        None => format!("c = {} (given)", loc.c.full_decimal()),
    }
}

fn c_json(loc: &Located) -> serde_json::Value {
    match &loc.bracket {
        Some(b) => serde_json::json!({ "value": b.midpoint().decimal(b.digits()), "bracket": b }),
        None => serde_json::json!({ "value": loc.c.full_decimal() }),
    }
}

pub struct FindC;

#[derive(Serialize)]
struct FindCOut<'a> {
    bracket: &'a CBracket,
    midpoint: String,
    digits: u32,
    reference: &'static str,
    reference_agreement: u32,
}

impl Analysis for FindC {
    fn name(&self) -> &'static str {
        "find-c"
    }
    fn about(&self) -> &'static str {
        "Bracket the Fibonacci parameter of x^2 + c by kneading bisection"
    }
    fn schema(&self) -> &'static str {
        "CSV: depth,bits,lo,hi,midpoint,digits,steps,horizon,max_precision. \
         JSON: {bracket, midpoint, digits, reference, reference_agreement}; midpoint shows only shared digits."
    }
    fn options(&self) -> Vec<Opt> {
        vec![Opt::flag("depth", "16", "itinerary match through u(N)"), Opt::flag("bits", "80", "bracket width 2^-B")]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let b = find_c(p.u32("depth")?, p.u32("bits")?)?;
        let digits = b.digits();
        let midpoint = b.midpoint().decimal(digits);
        let reference = MPValue::parse(REFERENCE_C, 128)?;
        let out = FindCOut {
            bracket: &b,
            midpoint: midpoint.clone(),
            digits,
            reference: REFERENCE_C,
            reference_agreement: b.agreement_with(&reference),
        };
        let mut table = Table::new(&["depth", "bits", "lo", "hi", "midpoint", "digits", "steps", "horizon", "max_precision"]);
        table.push([
            b.depth.to_string(),
            b.bits.to_string(),
            b.lo.full_decimal(),
            b.hi.full_decimal(),
            midpoint.clone(),
            digits.to_string(),
            b.steps.to_string(),
            b.horizon.to_string(),
            b.max_precision.to_string(),
        ]);
        let text = format!(
            "c in [{}, {}]\nmidpoint {midpoint} ({digits} digits)\nagrees with {REFERENCE_C} to {} digits",
            b.lo.decimal(digits + 3),
            b.hi.decimal(digits + 3),
            out.reference_agreement
        );
        Report::new(text, table, &out)
    }
}

pub struct Verify;

impl Analysis for Verify {
    fn name(&self) -> &'static str {
        "verify"
    }
    fn about(&self) -> &'static str {
        "Check the closest-return inequalities at a parameter"
    }
    fn schema(&self) -> &'static str {
        "CSV: n,d_n. JSON: {c, report: {depth, d, decreasing_fails_at, x4_negative, injective_fails_at, first_failure, holds}}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![
            Opt::flag("depth", "16", "levels n checked"),
            Opt::flag("c", "search", C_HELP),
            Opt::flag("precision-bits", "auto", PREC_HELP),
        ]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let depth = p.u32("depth")?;
        if !(2..=60).contains(&depth) {
            return Err(CliError::Usage("depth must lie in 2..=60".into()));
        }
        let len = u(depth) as usize;
        let loc = locate(p, len)?;
        let r = verify_closest_returns(&loc.c, depth, orbit_precision(p, len)?)?;
        let mut table = Table::new(&["n", "d_n"]);
        for (n, d) in r.d.iter().enumerate() {
            table.push([(n + 1).to_string(), num(*d)]);
        }
        let verdict = match r.first_failure {
            None => "closest returns hold".to_string(),
            Some(n) => format!("closest returns fail first at n = {n}"),
        };
        let text = format!("{}\n{verdict} through depth {depth}", c_text(&loc));
        Report::new(text, table, &serde_json::json!({ "c": c_json(&loc), "report": r }))
    }
}

pub struct Cover;

#[derive(Serialize)]
struct CoverRow {
    label: String,
    k: u64,
    p: u64,
    q: u64,
    lo: String,
    hi: String,
    length: f64,
}

impl Analysis for Cover {
    fn name(&self) -> &'static str {
        "cover"
    }
    fn about(&self) -> &'static str {
        "The u(n) intervals of the cover M^n, left to right"
    }
    fn schema(&self) -> &'static str {
        "CSV: label,k,p,q,lo,hi,length (lo = x_p, hi = x_q at certified digits). JSON: {c, level, intervals, gaps}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![
            Opt::flag("depth", "5", "cover level n"),
            Opt::flag("c", "search", C_HELP),
            Opt::flag("precision-bits", "auto", PREC_HELP),
        ]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let n = p.u32("depth")?;
        if !(1..=24).contains(&n) {
            return Err(CliError::Usage("cover level must lie in 1..=24".into()));
        }
        let (loc, orb, _) = located_orbit(p, u(n + 2) as usize)?;
        let cover = build_cover_from_orbit(&orb, n)?.pop().unwrap();
        let rows: Vec<CoverRow> = cover
            .entries
            .iter()
            .map(|e| CoverRow {
                label: format!("{:?}", e.index.label),
                k: e.index.k,
                p: e.index.p,
                q: e.index.q,
                lo: orb.render(e.index.p as usize),
                hi: orb.render(e.index.q as usize),
                length: e.length().to_f64(),
            })
            .collect();
        let mut table = Table::new(&["label", "k", "p", "q", "lo", "hi", "length"]);
        for r in &rows {
            table.push([r.label.clone(), r.k.to_string(), r.p.to_string(), r.q.to_string(), r.lo.clone(), r.hi.clone(), num(r.length)]);
        }
        let pairs: Vec<String> = rows.iter().map(|r| format!("[x{}, x{}]", r.p, r.q)).collect();
        let text = format!("{}\nM^{n}: {} intervals\n{}", c_text(&loc), rows.len(), pairs.join(" "));
        Report::new(text, table, &serde_json::json!({ "c": c_json(&loc), "level": n, "intervals": rows, "gaps": cover.gaps() }))
    }
}

pub struct Scaling;

impl Analysis for Scaling {
    fn name(&self) -> &'static str {
        "scaling"
    }
    fn about(&self) -> &'static str {
        "Closest-return distances d_n, ratios lambda_n and the fitted decay rate"
    }
    fn schema(&self) -> &'static str {
        "CSV: n,d_n,lambda_n,ratio,a_n (empty where undefined). \
         JSON: {c, report: {d, lambda, ratio, a, lambda_fit, d_fit, sup_lambda, sup_lambda_pair, cover_measure, cover_fit}}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![
            Opt::flag("depth", "14", "top level n"),
            Opt::flag("window", "auto", "fit window a:b, default the top half"),
            Opt::flag("c", "search", C_HELP),
            Opt::flag("precision-bits", "auto", PREC_HELP),
        ]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let depth = p.u32("depth")?;
        if !(4..=24).contains(&depth) {
            return Err(CliError::Usage("depth must lie in 4..=24".into()));
        }
        let window = p.window()?;
        let (loc, orb, _) = located_orbit(p, u(depth + 2) as usize)?;
        let r = scaling_report(&orb, depth, window)?;
        let at = |v: &[(u32, f64)], n: u32| v.iter().find(|x| x.0 == n).map(|x| num(x.1)).unwrap_or_default();
        let mut table = Table::new(&["n", "d_n", "lambda_n", "ratio", "a_n"]);
        for n in 1..=depth {
            table.push([n.to_string(), at(&r.d, n), at(&r.lambda, n), at(&r.ratio, n), at(&r.a, n)]);
        }
        let last: Vec<String> = r.last_ratios(4).iter().map(|x| format!("{:.4}", x.1)).collect();
        let text = format!(
            "{}\nslope of log2 lambda_n over {}..{}: {:.4} (r2 {:.4})\nlast ratios {}\nsup lambda_n {:.4}, sup lambda_n lambda_(n+1) {:.4}",
            c_text(&loc),
            r.lambda_fit.window.0,
            r.lambda_fit.window.1,
            r.lambda_fit.slope,
            r.lambda_fit.r2,
            last.join(" "),
            r.sup_lambda,
            r.sup_lambda_pair
        );
        Report::new(text, table, &serde_json::json!({ "c": c_json(&loc), "report": r }))
    }
}

pub struct Growth;

impl Analysis for Growth {
    fn name(&self) -> &'static str {
        "growth"
    }
    fn about(&self) -> &'static str {
        "Derivative growth along the critical orbit and the return-derivative ratios"
    }
    fn schema(&self) -> &'static str {
        "CSV: n,ratio,log2_derivative,chain_rule_exact. JSON: {c, fit: {n_max, m_coeff, gamma, delta, max_residual, power_slope, power_reference}, returns}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![
            Opt::flag("depth", "2000", "orbit length n_max for the fit"),
            Opt::flag("c", "search", C_HELP),
            Opt::flag("precision-bits", "auto", PREC_HELP),
        ]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let n_max = p.usize("depth")?;
        let (loc, orb, _) = located_orbit(p, n_max.max(8))?;
        let fit = derivative_growth_fit(&orb, n_max)?;
        let top = (3..).take_while(|&n| u(n + 1) as usize <= orb.len()).last().unwrap_or(2);
        let rows = if top >= 3 { return_derivative_check(&orb, 3..=top)? } else { Vec::new() };
        let mut table = Table::new(&["n", "ratio", "log2_derivative", "chain_rule_exact"]);
        for r in &rows {
            let exact = r.chain_rule_exact.map(|b| b.to_string()).unwrap_or_default();
            table.push([r.n.to_string(), num(r.ratio), num(r.log2_derivative), exact]);
        }
        let text = format!(
            "{}\nlog2 |(f^n)'(x_1)| ~ {:.4} sum m_i + {:.4} k + {:.4} (max residual {:.3})\npower slope {:.4} (reference {:.4})",
            c_text(&loc),
            fit.m_coeff,
            fit.gamma,
            fit.delta,
            fit.max_residual,
            fit.power_slope,
            fit.power_reference
        );
        Report::new(text, table, &serde_json::json!({ "c": c_json(&loc), "fit": fit, "returns": rows }))
    }
}

pub struct Series;

impl Analysis for Series {
    fn name(&self) -> &'static str {
        "series"
    }
    fn about(&self) -> &'static str {
        "Partial sums of |(f^n)'(x_1)|^-alpha along the critical orbit"
    }
    fn schema(&self) -> &'static str {
        "CSV: n,partial_sum at n = 1, 2, 4, ... and n_max. \
         JSON: {c, report: {alpha, n_max, samples, total, first_small_increment, threshold, last_half_increment}}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![
            Opt::flag("depth", "10000", "number of terms N"),
            Opt::flag("alpha", "0.5", "exponent alpha > 0"),
            Opt::flag("threshold", "1e-6", "increment threshold"),
            Opt::flag("c", "search", C_HELP),
            Opt::flag("precision-bits", "auto", PREC_HELP),
        ]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let n = p.usize("depth")?;
        let alpha = p.f64("alpha")?;
        let threshold = p.f64("threshold")?;
        let (loc, orb, _) = located_orbit(p, n.max(1))?;
        let r = summability_series(&orb, alpha, n, threshold)?;
        let mut table = Table::new(&["n", "partial_sum"]);
        for &(k, s) in &r.samples {
            table.push([k.to_string(), num(s)]);
        }
        let first = r.first_small_increment.map_or("none".to_string(), |k| k.to_string());
        let text = format!(
            "{}\nS_{n} = {:.8} at alpha = {alpha}\nfirst increment below {threshold}: n = {first}\nmass of the last half: {:.3e}",
            c_text(&loc),
            r.total,
            r.last_half_increment
        );
        Report::new(text, table, &serde_json::json!({ "c": c_json(&loc), "report": r }))
    }
}

pub struct Dimension;

impl Analysis for Dimension {
    fn name(&self) -> &'static str {
        "dimension"
    }
    fn about(&self) -> &'static str {
        "Count/length dimension proxy for the quadratic covers and the model map"
    }
    fn schema(&self) -> &'static str {
        "CSV: level,count,quadratic_max_len,quadratic_estimate,model_max_len,model_estimate. JSON: {c, t, quadratic, model}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![
            Opt::flag("depth", "14", "top cover level"),
            Opt::flag("t", "1/2", "model parameter t"),
            Opt::flag("c", "search", C_HELP),
            Opt::flag("precision-bits", "auto", PREC_HELP),
        ]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let depth = p.u32("depth")?;
        if !(2..=24).contains(&depth) {
            return Err(CliError::Usage("depth must lie in 2..=24".into()));
        }
        let params: ModelParams = model_params(p)?;
        let (loc, orb, _) = located_orbit(p, u(depth + 2) as usize)?;
        let covers = build_cover_from_orbit(&orb, depth)?;
        let quad = dimension_estimate(&covers.iter().map(|c| c.lengths()).collect::<Vec<_>>());
        let model = dimension_estimate(&model_cover_lengths(&params, depth)?);
        let mut table = Table::new(&["level", "count", "quadratic_max_len", "quadratic_estimate", "model_max_len", "model_estimate"]);
        for (q, m) in quad.iter().zip(&model) {
            table.push([q.level.to_string(), q.count.to_string(), num(q.max_len), num(q.estimate), num(m.max_len), num(m.estimate)]);
        }
        let (qf, qt) = (quad.first().unwrap().estimate, quad.last().unwrap().estimate);
        let mt = model.last().unwrap().estimate;
        let text = format!("{}\nquadratic estimate {qf:.4} -> {qt:.4}\nmodel estimate at level {depth}: {mt:.4}", c_text(&loc));
        Report::new(
            text,
            table,
            &serde_json::json!({ "c": c_json(&loc), "t": p.string("t")?, "quadratic": quad, "model": model }),
        )
    }
}
