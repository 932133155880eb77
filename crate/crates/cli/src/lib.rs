//! The `shardmatch` command line. Each subcommand reads its inputs, writes
//! JSON and CSV reports under `--out` and returns a one-line summary.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

pub mod args;
pub mod common;
pub mod db_cmds;
pub mod gap_cmds;
pub mod scene_cmds;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
pub use common::{CliError, CliResult, RunParams, EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, REPORT_FORMAT_VERSION};

pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Gen(a) => scene_cmds::gen(a),
        Command::Reconstruct(a) => scene_cmds::reconstruct_cmd(a),
        Command::Match(a) => scene_cmds::match_cmd(a),
        Command::Assemble(a) => scene_cmds::assemble_cmd(a),
        Command::AlignGap(a) => gap_cmds::align_gap_cmd(a),
        Command::GenNotch(a) => gap_cmds::gen_notch(a),
        Command::DbBuild(a) => db_cmds::db_build(a),
        Command::GenMixed(a) => db_cmds::gen_mixed(a),
        Command::Eval(a) => db_cmds::eval_cmd(a),
    }
}

/// Parses `args`, runs the command and reports on stdout/stderr.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
