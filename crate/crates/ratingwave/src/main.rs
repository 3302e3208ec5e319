use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ratingwave::dispatch(std::env::args_os()))
}
