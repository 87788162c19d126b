use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ergolin_driver::cli::run(std::env::args_os()) as u8)
}
