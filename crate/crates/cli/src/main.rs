mod analyses;
mod analysis;
mod error;
mod manifest;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use analysis::{Analysis, Params, Report, GLOBAL_KEYS};
use error::CliError;

const ABOUT: &str = "Kneading, renormalization and scaling analyses of the Fibonacci unimodal map";

fn global_help(key: &str) -> &'static str {
    match key {
        "depth" => "Main depth or length parameter of the subcommand",
        "precision-bits" => "Working precision in bits",
        _ => "Fit window a:b",
    }
}

fn command(registry: &[Box<dyn Analysis>]) -> Command {
    let mut cmd = Command::new("fibmap")
        .about(ABOUT)
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(Arg::new("out").long("out").global(true).value_name("DIR").help("Write CSV, JSON and manifest.json into DIR"))
        .arg(Arg::new("json").long("json").global(true).action(ArgAction::SetTrue).conflicts_with("csv").help("Print JSON"))
        .arg(Arg::new("csv").long("csv").global(true).action(ArgAction::SetTrue).help("Print CSV"))
        .arg(
            Arg::new("seedless")
                .long("seedless")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("Reserved; rejected because no analysis uses randomness"),
        );
    for key in GLOBAL_KEYS {
        cmd = cmd.arg(Arg::new(key).long(key).global(true).value_name("VALUE").help(global_help(key)));
    }
    for a in registry {
        let mut sub = Command::new(a.name()).about(a.about()).after_help(format!("Output schema. {}", a.schema()));
        for o in a.options() {
            if o.is_global() {
                continue;
            }
            let mut arg = Arg::new(o.name).help(o.help);
            if o.positional {
                arg = arg.required(true);
            } else {
                arg = arg.long(o.name).value_name("VALUE");
            }
            if let Some(d) = o.default {
                arg = arg.default_value(d);
            }
            sub = sub.arg(arg);
        }
        cmd = cmd.subcommand(sub);
    }
    cmd.subcommand(
        Command::new("replay")
            .about("Rerun a manifest and check that every output digest matches")
            .after_help("Writes the rerun outputs into --out (required) and compares sha256 digests.")
            .arg(Arg::new("manifest").required(true).help("manifest.json or the directory holding it")),
    )
}

/// Subcommand defaults overlaid with the values given on the command line.
fn resolve(a: &dyn Analysis, m: &ArgMatches) -> Result<Params, CliError> {
    let mut map = BTreeMap::new();
    let opts = a.options();
    for o in &opts {
        if let Some(d) = o.default {
            map.insert(o.name.to_string(), d.to_string());
        }
        if let Some(v) = m.get_one::<String>(o.name) {
            map.insert(o.name.to_string(), v.clone());
        }
    }
    for key in GLOBAL_KEYS {
        let given = m.value_source(key) == Some(clap::parser::ValueSource::CommandLine);
        if given && !opts.iter().any(|o| o.name == key) {
            return Err(CliError::Usage(format!("{} does not take --{key}", a.name())));
        }
    }
    Ok(Params(map))
}

struct Output {
    dir: Option<PathBuf>,
    json: bool,
    csv: bool,
}

fn emit(name: &str, params: &Params, report: &Report, out: &Output) -> Result<(), CliError> {
    if let Some(dir) = &out.dir {
        manifest::write_outputs(dir, name, params, report)?;
    }
    let body = if out.json {
        manifest::json_bytes(report)?
    } else if out.csv {
        manifest::csv_bytes(report)?
    } else {
        format!("{}\n", report.text).into_bytes()
    };
    std::io::stdout().write_all(&body).map_err(|e| CliError::Io(format!("stdout: {e}")))
}

fn find<'a>(registry: &'a [Box<dyn Analysis>], name: &str) -> Result<&'a dyn Analysis, CliError> {
    registry
        .iter()
        .find(|a| a.name() == name)
        .map(|a| a.as_ref())
        .ok_or_else(|| CliError::Usage(format!("unknown subcommand {name:?}")))
}

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let registry = analyses::registry();
    let matches = command(&registry).try_get_matches_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp
        | clap::error::ErrorKind::DisplayVersion
        | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            std::process::exit(if e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 });
        }
        _ => CliError::Usage(e.render().to_string().trim_start_matches("error: ").trim().to_string()),
    })?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    if sub.get_flag("seedless") {
        return Err(CliError::Usage("--seedless is reserved: no analysis uses randomness, so there is no seed to drop".into()));
    }
    let out = Output { dir: sub.get_one::<String>("out").map(PathBuf::from), json: sub.get_flag("json"), csv: sub.get_flag("csv") };
    if name == "replay" {
        let dir = out.dir.as_ref().ok_or_else(|| CliError::Usage("replay needs --out DIR for the rerun outputs".into()))?;
        let recorded = manifest::read_manifest(&PathBuf::from(sub.get_one::<String>("manifest").unwrap()))?;
        let a = find(&registry, &recorded.subcommand)?;
        let report = a.run(&recorded.params)?;
        let replayed = manifest::write_outputs(dir, a.name(), &recorded.params, &report)?;
        let bad = manifest::mismatches(&recorded, &replayed);
        if !bad.is_empty() {
            return Err(CliError::Replay(format!("digests differ for {}", bad.join(", "))));
        }
        println!("replay of {} reproduced {} outputs", recorded.subcommand, replayed.outputs.len());
        return Ok(());
    }
    let a = find(&registry, name)?;
    let params = resolve(a, sub)?;
    let report = a.run(&params)?;
    emit(a.name(), &params, &report, &out)?;
    Ok(())
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fibmap: [{}] {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
