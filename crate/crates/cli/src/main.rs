use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(reductio::run(std::env::args_os()) as u8)
}
