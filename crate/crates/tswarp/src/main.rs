use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(tswarp::cli::cli_dispatch(std::env::args()) as u8)
}
