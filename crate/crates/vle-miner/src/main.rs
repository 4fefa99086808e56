use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(vle_miner::cli::run(std::env::args()) as u8)
}
