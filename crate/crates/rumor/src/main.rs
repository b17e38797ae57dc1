use std::process::ExitCode;

fn main() -> ExitCode {
    rumor::cli::run(std::env::args_os())
}
