//! `dressed`: sweeps, trajectories, spectra, steady states and the
//! validation report for the dressed-state master equation.

mod commands;
mod config;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use commands::{run, validation_table, Output};
use config::{Args, Command, Format, RunConfig};
use table::Table;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_FAILURE: u8 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn failure(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: message.into(),
        }
    }
}

impl From<dressed_core::Error> for CliError {
    fn from(e: dressed_core::Error) -> Self {
        use dressed_core::Error::*;
        match e {
            Usage(_) | Domain(_) | InvalidState(_) => CliError::usage(e.to_string()),
            _ => CliError::failure(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::failure(format!("i/o error: {e}"))
    }
}

fn open_output(cfg: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cfg.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_table(cfg: &RunConfig, table: &Table) -> Result<(), CliError> {
    let mut out = open_output(cfg)?;
    match cfg.format {
        Format::Csv => table.write_csv(&mut out)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &table.to_json()).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    if let (Some(script), Some(data)) = (&cfg.gnuplot, &cfg.output) {
        let log_x = cfg.command == Command::RatesSweep || table.rows.len() > 2 && {
            // log grids start 0, t_min, ... with t_min far below the spacing
            let t: Vec<f64> = table.rows.iter().take(3).filter_map(|r| match r[0] {
                table::Cell::Num(x) => Some(x),
                _ => None,
            }).collect();
            t.len() == 3 && t[2] - t[1] > 1.5 * (t[1] - t[0])
        };
        std::fs::write(script, table.gnuplot_script(&data.display().to_string(), log_x))?;
    }
    Ok(())
}

fn execute(args: Args) -> Result<bool, CliError> {
    let cfg = RunConfig::from_args(args)?;
    match run(&cfg)? {
        Output::Table(table) => {
            for w in &table.warnings {
                eprintln!("warning: {w}");
            }
            write_table(&cfg, &table)?;
            Ok(true)
        }
        Output::Validation(results) => {
            for r in &results {
                eprintln!("{}", r.summary());
            }
            match cfg.format {
                Format::Json => {
                    let mut out = open_output(&cfg)?;
                    serde_json::to_writer_pretty(&mut out, &json!({ "criteria": results })).map_err(io::Error::from)?;
                    writeln!(out)?;
                    out.flush()?;
                }
                Format::Csv => write_table(&cfg, &validation_table(&results))?,
            }
            Ok(results.iter().all(|r| r.pass))
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILURE),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
