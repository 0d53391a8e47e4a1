use serde::Serialize;

use fibmap_core::fib_arith::{epsilon, sigma_pow, zeckendorf};
use fibmap_core::kneading::{
    admissible, entropy_from_kneading, fib_class_a, fib_signs, renormalize_kneading, KneadingSeries,
};
use fibmap_core::Sign;

use crate::analysis::{num, Analysis, Opt, Params, Report, Table};
use crate::error::CliError;

pub struct Zeck;

#[derive(Serialize)]
struct ZeckOut {
    m: u64,
    indices: Vec<u32>,
    expansion: String,
    epsilon: Sign,
    sigma: u64,
}

impl Analysis for Zeck {
    fn name(&self) -> &'static str {
        "zeck"
    }
    fn about(&self) -> &'static str {
        "Zeckendorf expansion of M in Fibonacci numbers u(0) = u(1) = 1"
    }
    fn schema(&self) -> &'static str {
        "CSV: m,indices,epsilon,sigma (indices space-separated). JSON: {m, indices, expansion, epsilon, sigma}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![Opt::positional("m", "positive integer to expand")]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let m: u64 = p.parse("m")?;
        let z = zeckendorf(m)?;
        let out = ZeckOut {
            m,
            indices: z.indices().to_vec(),
            expansion: z.to_string(),
            epsilon: epsilon(m)?,
            sigma: sigma_pow(m, 1),
        };
        let mut table = Table::new(&["m", "indices", "epsilon", "sigma"]);
        let idx: Vec<String> = out.indices.iter().map(|i| i.to_string()).collect();
        table.push([m.to_string(), idx.join(" "), out.epsilon.to_string(), out.sigma.to_string()]);
        Report::new(format!("{m} = {}", out.expansion), table, &out)
    }
}

pub struct Knead;

impl Analysis for Knead {
    fn name(&self) -> &'static str {
        "knead"
    }
    fn about(&self) -> &'static str {
        "Fibonacci kneading data: unimodal signs and series, or a class-A sequence"
    }
    fn schema(&self) -> &'static str {
        "Unimodal: CSV i,sign,eps; JSON {signs, eps, admissibility}. \
         Class A (--class-a plus|minus): CSV i,symbol; JSON {sequence, renormalized}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![
            Opt::flag("depth", "34", "sequence length N"),
            Opt::flag("class-a", "none", "none, plus or minus"),
        ]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let n = p.usize("depth")?;
        if n == 0 {
            return Err(CliError::Usage("depth must be positive".into()));
        }
        match p.string("class-a")?.as_str() {
            "none" => {
                let signs = fib_signs(n);
                let eps = KneadingSeries::from_signs(&signs);
                let adm = admissible(&eps);
                let mut table = Table::new(&["i", "sign", "eps"]);
                for i in 1..=n {
                    table.push([i.to_string(), signs.at(i).to_string(), eps.eps(i).to_string()]);
                }
                let text = format!("signs {signs}\nadmissible through {}: {}", adm.horizon, adm.admissible);
                Report::new(text, table, &serde_json::json!({ "signs": signs, "eps": eps, "admissibility": adm }))
            }
            comp @ ("plus" | "minus") => {
                let s = if comp == "plus" { Sign::Plus } else { Sign::Minus };
                let seq = fib_class_a(s, n);
                let renormalized = if n >= 2 { Some(renormalize_kneading(&seq)?) } else { None };
                let mut table = Table::new(&["i", "symbol"]);
                for (i, sym) in seq.symbols.iter().enumerate() {
                    table.push([(i + 1).to_string(), sym.as_char().to_string()]);
                }
                let text = match &renormalized {
                    Some(r) => format!("{seq}\nrenormalized {r}"),
                    None => seq.to_string(),
                };
                Report::new(text, table, &serde_json::json!({ "sequence": seq, "renormalized": renormalized }))
            }
            other => Err(CliError::Usage(format!("class-a must be none, plus or minus, got {other:?}"))),
        }
    }
}

pub struct Entropy;

impl Analysis for Entropy {
    fn name(&self) -> &'static str {
        "entropy"
    }
    fn about(&self) -> &'static str {
        "Growth rate s and entropy h = ln s from the kneading determinant"
    }
    fn schema(&self) -> &'static str {
        "CSV: horizon,s,h,s_doubled. JSON: {s, h, horizon, s_doubled}."
    }
    fn options(&self) -> Vec<Opt> {
        vec![Opt::flag("depth", "800", "truncation N; 2N is used as the check"), Opt::flag("tol", "1e-7", "N vs 2N tolerance")]
    }
    fn run(&self, p: &Params) -> Result<Report, CliError> {
        let n = p.usize("depth")?;
        let tol = p.f64("tol")?;
        let e = entropy_from_kneading(&KneadingSeries::fibonacci(2 * n), n, tol)?;
        let mut table = Table::new(&["horizon", "s", "h", "s_doubled"]);
        table.push([n.to_string(), num(e.s), num(e.h), num(e.s_doubled)]);
        Report::new(format!("s = {:.10}\nh = {:.10}", e.s, e.h), table, &e)
    }
}
