use num_rational::BigRational;
use serde::Serialize;

use fibmap_core::fib_arith::zeckendorf;
use fibmap_core::model_map::{
    phi, rational_string, y_value, CellKind, ModelMap, ModelParams, DEFAULT_CELL_DEPTH,
};

use crate::analysis::{Analysis, Opt, Params, Report, Table};
use crate::error::CliError;

pub fn model_params(p: &Params) -> Result<ModelParams, CliError> {
    let s = p.string("t")?;
    let t: BigRational = s.parse().map_err(|_| CliError::Malformed(format!("t = {s:?} is not a fraction a/b")))?;
    Ok(ModelParams::new(t)?)
}

pub struct Model;

#[derive(Serialize)]
struct Point {
    m: u64,
    expansion: String,
    y: String,
    image_ok: bool,
    phi: String,
}

#[derive(Serialize)]
struct CellOut {
    kind: String,
    lo: String,
    hi: String,
    slope: String,
}

impl Analysis for Model {
    fn name(&self) -> &'static str {
        "model"
    }
    fn about(&self) -> &'static str {
        "The piecewise-linear model map: orbit points, images and cell slopes"
    }
    fn schema(&self) -> &'static str {
        "CSV: m,expansion,y,image_ok,phi (exact rationals a/b; phi as a + b sqrt5). \
         JSON: {t, points, cells: [{kind, lo, hi, slope}]}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![Opt::flag("depth", "21", "orbit points m = 1..M"), Opt::flag("t", "1/2", "scale t in (0, 1/2]")]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let terms: u64 = p.parse("depth")?;
        let params = model_params(p)?;
        let map = ModelMap::new(params.clone(), DEFAULT_CELL_DEPTH);
        let mut points = Vec::new();
        let mut next = y_value(1, &params);
        for m in 1..=terms {
            let y = next;
            next = y_value(m + 1, &params);
            let z = zeckendorf(m)?;
            points.push(Point {
                m,
                expansion: z.to_string(),
                y: rational_string(&y),
                image_ok: map.eval(&y)? == next,
                phi: phi(&z).to_string(),
            });
        }
        let cells: Vec<CellOut> = map
            .cells()
            .iter()
            .filter(|c| matches!(c.kind, CellKind::Branch(n) | CellKind::Gap(n) if n <= 8))
            .map(|c| CellOut {
                kind: match c.kind {
                    CellKind::Branch(n) => format!("A_{n}"),
                    CellKind::Gap(n) => format!("gap_{n}"),
                },
                lo: rational_string(&c.lo),
                hi: rational_string(&c.hi),
                slope: rational_string(&c.slope()),
            })
            .collect();
        let mut table = Table::new(&["m", "expansion", "y", "image_ok", "phi"]);
        for pt in &points {
            table.push([pt.m.to_string(), pt.expansion.clone(), pt.y.clone(), pt.image_ok.to_string(), pt.phi.clone()]);
        }
        let all_ok = points.iter().all(|pt| pt.image_ok);
        let slopes: Vec<String> = cells.iter().filter(|c| c.kind.starts_with("gap")).map(|c| format!("{} {}", c.kind, c.slope)).collect();
        let text = format!(
            "t = {}\nF(y_m) = y_(m+1) for m = 1..{terms}: {all_ok}\ngap slopes: {}",
            p.string("t")?,
            slopes.join(", ")
        );
        Report::new(text, table, &serde_json::json!({ "t": p.string("t")?, "points": points, "cells": cells }))
    }
}
