use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(roughhj_lab::cli::cli_main(std::env::args_os()))
}
