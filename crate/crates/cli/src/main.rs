use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(isochrone_cli::run(std::env::args_os()))
}
