use std::process::ExitCode;

fn main() -> ExitCode {
    shardmatch_cli::main_with(std::env::args_os())
}
