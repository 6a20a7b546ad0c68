use std::process::ExitCode;

fn main() -> ExitCode {
    otto_core::cli::main_with(std::env::args_os())
}
