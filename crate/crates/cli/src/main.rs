//! `sievelab` command-line front end.
//!
//! Exit codes: 0 success, 1 mathematical violation found, 2 usage or
//! configuration error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches};

use commands::{dispatch, Failure};
use config::{
    build_config, canonical_key, parse_config_file, Command, ConfigError, BOOL_KEYS, KEYS,
};
use sievelab::report::emit;

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn cli() -> clap::Command {
    let commands: Vec<&str> = Command::ALL.iter().map(|(n, _)| *n).collect();
    let mut cmd = clap::Command::new("sievelab")
        .about("Primes p with ||alpha p + beta|| < p^-theta and p+2 an almost-prime")
        .after_help(format!(
            "Commands: {}\nSplit forms such as `feas check` are accepted. Settings may also be given \
             as key=value tokens or in a --config file; flags take precedence.\n\
             SIEVELAB_WORKERS sets the default worker count.",
            commands.join(", ")
        ))
        .arg(Arg::new("args").num_args(0..).value_name("COMMAND [key=value]..."))
        .arg(Arg::new("config").long("config").value_name("FILE").help("key=value configuration file"));
    for &(key, help) in KEYS {
        let mut arg = Arg::new(key).long(key).help(help).action(ArgAction::Set);
        if BOOL_KEYS.contains(&key) {
            arg = arg.num_args(0..=1).default_missing_value("true");
        }
        cmd = cmd.arg(arg);
    }
    cmd
}

fn default_workers() -> Result<usize, String> {
    match std::env::var("SIEVELAB_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!(
                "SIEVELAB_WORKERS: expected a positive integer, got {v:?}"
            )),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn settings(m: &ArgMatches) -> Result<(Command, BTreeMap<String, String>), ConfigError> {
    let mut merged = match m.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(vec![format!("config: {path}: {e}")]))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    let mut words = Vec::new();
    let mut errors = Vec::new();
    for token in m.get_many::<String>("args").into_iter().flatten() {
        match token.split_once('=') {
            Some((k, v)) => match canonical_key(k) {
                Some(key) => {
                    merged.insert(key.to_string(), v.to_string());
                }
                None => errors.push(format!("unknown key {k:?}")),
            },
            None => words.push(token.clone()),
        }
    }
    for &(key, _) in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            merged.insert(key.to_string(), v.clone());
        }
    }
    let command = Command::parse(&words).map_err(|e| {
        errors.push(e);
        ConfigError(errors.clone())
    })?;
    if !errors.is_empty() {
        return Err(ConfigError(errors));
    }
    Ok((command, merged))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let mut app = cli();
    if argv.len() <= 1 {
        eprintln!("{}", app.render_help());
        return ExitCode::from(EXIT_USAGE);
    }
    let matches = match app.try_get_matches_from_mut(&argv) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let workers = match default_workers() {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cfg = match settings(&matches).and_then(|(c, s)| build_config(c, &s, workers)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match dispatch(&cfg) {
        Ok(outcome) => {
            if let Err(e) = emit(&outcome.text, cfg.out.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::from(if outcome.violation { EXIT_VIOLATION } else { 0 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
