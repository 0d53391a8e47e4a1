use rug::Float;
use serde::Serialize;

use fibmap_core::class_a::{
    example_map, geometry_experiment, renormalize_tower, surgery_from_unimodal, tune_v, ClassAMap, GeometryParams,
    Interval, Rescale, VBracket,
};
use fibmap_core::fib_arith::u;
use fibmap_core::mp_dynamics::{certified_digits, orbit_piecewise, MPValue};
use fibmap_core::quad_fibonacci::find_c;
use fibmap_core::Sign;

use crate::analysis::{num, Analysis, Opt, Params, Report, Table};
use crate::error::CliError;

fn float(p: &Params, key: &str) -> Result<Float, CliError> {
    Ok(Float::with_val(64, p.f64(key)?))
}

fn precision(p: &Params) -> Result<u32, CliError> {
    let bits = p.u32("precision-bits")?;
    if bits < 64 {
        return Err(CliError::Usage("precision-bits must be at least 64".into()));
    }
    Ok(bits)
}

/// v rendered to the digits its bracket endpoints share.
fn v_text(b: &VBracket) -> String {
    let prec = b.lo.precision().max(b.hi.precision());
    b.midpoint().decimal(certified_digits(b.lo.value(), b.hi.value(), prec))
}

#[derive(Serialize)]
struct OrbitRow {
    i: usize,
    symbol: String,
    x: String,
}

fn orbit_rows(map: &ClassAMap, len: usize) -> Result<(Vec<OrbitRow>, Option<usize>), CliError> {
    let prec = map.precision;
    let orb = orbit_piecewise(map, &MPValue::from_i64(0, prec), len, prec)?;
    let rows = (1..=orb.symbols.len())
        .map(|i| OrbitRow { i, symbol: orb.symbols.symbols[i - 1].as_char().to_string(), x: orb.record.render(i) })
        .collect();
    Ok((rows, orb.escape.map(|e| e.index)))
}

fn orbit_table(rows: &[OrbitRow]) -> Table {
    let mut table = Table::new(&["i", "symbol", "x"]);
    for r in rows {
        table.push([r.i.to_string(), r.symbol.clone(), r.x.clone()]);
    }
    table
}

fn kneading_text(rows: &[OrbitRow], escape: Option<usize>) -> String {
    let word: String = rows.iter().map(|r| r.symbol.as_str()).collect();
    match escape {
        Some(i) => format!("kneading {word}, escapes at x_{i}"),
        None => format!("kneading {word}"),
    }
}

pub struct Example;

impl Analysis for Example {
    fn name(&self) -> &'static str {
        "example"
    }
    fn about(&self) -> &'static str {
        "The explicit two-interval family with its forced orbit head"
    }
    fn schema(&self) -> &'static str {
        "CSV: i,symbol,x (certified digits). JSON: {map: {j, t, t_branch, j_branch, component, precision}, orbit, escape}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![
            Opt::flag("c", "10", "c > 0"),
            Opt::flag("lam", "0.05", "right end of T"),
            Opt::flag("v", "0.02", "fifth image v"),
            Opt::flag("depth", "13", "orbit length"),
            Opt::flag("precision-bits", "256", "working precision"),
        ]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let prec = precision(p)?;
        let map = example_map(&float(p, "c")?, &float(p, "lam")?, &float(p, "v")?, prec)?;
        let (rows, escape) = orbit_rows(&map, p.usize("depth")?)?;
        let text = format!("component {}\n{}", map.component, kneading_text(&rows, escape));
        let table = orbit_table(&rows);
        Report::new(text, table, &serde_json::json!({ "map": map, "orbit": rows, "escape": escape }))
    }
}

pub struct Tune;

impl Analysis for Tune {
    fn name(&self) -> &'static str {
        "tune"
    }
    fn about(&self) -> &'static str {
        "Tune v so the explicit family follows the Fibonacci class-A kneading"
    }
    fn schema(&self) -> &'static str {
        "CSV: c,lam,depth,v,v_lo,v_hi,steps,horizon,max_precision. JSON: {bracket, v, map, kneading}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![
            Opt::flag("c", "10", "c > 0"),
            Opt::flag("lam", "0.05", "right end of T"),
            Opt::flag("depth", "10", "match through u(N)"),
            Opt::flag("precision-bits", "128", "starting precision"),
        ]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let depth = p.u32("depth")?;
        let prec = precision(p)?;
        let b = tune_v(&float(p, "c")?, &float(p, "lam")?, depth, prec)?;
        let map = b.map(2 * prec)?;
        let (rows, escape) = orbit_rows(&map, u(depth) as usize)?;
        let v = v_text(&b);
        let mut table = Table::new(&["c", "lam", "depth", "v", "v_lo", "v_hi", "steps", "horizon", "max_precision"]);
        table.push([
            p.string("c")?,
            p.string("lam")?,
            depth.to_string(),
            v.clone(),
            b.lo.full_decimal(),
            b.hi.full_decimal(),
            b.steps.to_string(),
            b.horizon.to_string(),
            b.max_precision.to_string(),
        ]);
        let word: String = rows.iter().map(|r| r.symbol.as_str()).collect();
        let text = format!("v = {v}\n{}", kneading_text(&rows, escape));
        Report::new(text, table, &serde_json::json!({ "bracket": b, "v": v, "map": map, "kneading": word }))
    }
}

pub struct Renorm;

#[derive(Serialize)]
struct LevelOut {
    level: u32,
    t_iter: u64,
    j_iter: u64,
    t_base: Interval,
    j_base: Interval,
    rescale: Rescale,
    component: Sign,
}

impl Analysis for Renorm {
    fn name(&self) -> &'static str {
        "renorm"
    }
    fn about(&self) -> &'static str {
        "Numeric renormalization tower with inclusion, iterate-count and kneading checks"
    }
    fn schema(&self) -> &'static str {
        "CSV: level,t_iter,j_iter,iterates_ok,t_between,j_contains,component,alternates,symbols_checked,symbols_ok,\
         index_law_checked,index_law_ok. JSON: {source, checks, tower: [{level, t_iter, j_iter, t_base, j_base, rescale, component}]}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![
            Opt::flag("source", "example", "example (tuned family) or surgery (restricted quadratic map)"),
            Opt::flag("c", "10", "family c for the example source"),
            Opt::flag("lam", "0.05", "family lam for the example source"),
            Opt::flag("depth", "10", "tuning depth; the orbit horizon is u(N)"),
            Opt::flag("levels", "3", "renormalization levels"),
            Opt::flag("precision-bits", "256", "working precision"),
        ]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let depth = p.u32("depth")?;
        let levels = p.u32("levels")?;
        let prec = precision(p)?;
        let source = p.string("source")?;
        let map = match source.as_str() {
            "example" => tune_v(&float(p, "c")?, &float(p, "lam")?, depth, prec / 2)?.map(prec)?,
            "surgery" => surgery_from_unimodal(&find_c(depth, 96)?.midpoint(), prec)?,
            other => return Err(CliError::Usage(format!("source must be example or surgery, got {other:?}"))),
        };
        let (tower, checks) = renormalize_tower(&map, levels, u(depth) as usize, prec)?;
        let mut table = Table::new(&[
            "level",
            "t_iter",
            "j_iter",
            "iterates_ok",
            "t_between",
            "j_contains",
            "component",
            "alternates",
            "symbols_checked",
            "symbols_ok",
            "index_law_checked",
            "index_law_ok",
        ]);
        for c in &checks {
            table.push([
                c.level.to_string(),
                c.t_iter.to_string(),
                c.j_iter.to_string(),
                c.iterates_ok.to_string(),
                c.t_between.to_string(),
                c.j_contains.to_string(),
                c.component.to_string(),
                c.alternates.to_string(),
                c.symbols_checked.to_string(),
                c.symbols_ok.to_string(),
                c.index_law_checked.to_string(),
                c.index_law_ok.to_string(),
            ]);
        }
        let tower_out: Vec<LevelOut> = tower
            .iter()
            .map(|m| LevelOut {
                level: m.level,
                t_iter: m.t_iter,
                j_iter: m.j_iter,
                t_base: m.t_base.clone(),
                j_base: m.j_base.clone(),
                rescale: m.rescale.clone(),
                component: m.component,
            })
            .collect();
        let ok = checks.iter().all(|c| c.all_ok());
        let lines: Vec<String> = checks
            .iter()
            .map(|c| format!("level {}: iterates {}/{}, component {}, checks {}", c.level, c.t_iter, c.j_iter, c.component, if c.all_ok() { "ok" } else { "FAILED" }))
            .collect();
        let text = format!("{source} map, {levels} levels\n{}\nall checks pass: {ok}", lines.join("\n"));
        Report::new(text, table, &serde_json::json!({ "source": source, "checks": checks, "tower": tower_out }))
    }
}

pub struct Geometry;

impl Analysis for Geometry {
    fn name(&self) -> &'static str {
        "geometry"
    }
    fn about(&self) -> &'static str {
        "Scaling constant a across tuned maps and across one renormalization"
    }
    fn schema(&self) -> &'static str {
        "CSV: c,v,lambda_head,a,a_below,a_renormalized,a_ratio. JSON: {params, rows, a_decreasing, ratio_reference}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![
            Opt::flag("cs", "10,20,40", "comma-separated c values"),
            Opt::flag("lam", "0.05", "right end of T"),
            Opt::flag("depth", "12", "tuning depth"),
            Opt::flag("level", "10", "level where a is read off"),
            Opt::flag("precision-bits", "256", "working precision"),
        ]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let params = GeometryParams {
            cs: p.f64_list("cs")?,
            lam: p.f64("lam")?,
            depth: p.u32("depth")?,
            level: p.u32("level")?,
            precision: precision(p)?,
        };
        let g = geometry_experiment(&params)?;
        let mut table = Table::new(&["c", "v", "lambda_head", "a", "a_below", "a_renormalized", "a_ratio"]);
        for r in &g.rows {
            table.push([num(r.c), r.v_certified.clone(), num(r.lambda_head), num(r.a), num(r.a_below), num(r.a_renormalized), num(r.a_ratio)]);
        }
        let lines: Vec<String> = g.rows.iter().map(|r| format!("c = {}: a = {:.4}, ratio {:.4}", r.c, r.a, r.a_ratio)).collect();
        let text = format!(
            "{}\na decreasing in c: {}\nreference ratio {:.4}",
            lines.join("\n"),
            g.a_decreasing,
            g.ratio_reference
        );
        Report::new(text, table, &g)
    }
}
