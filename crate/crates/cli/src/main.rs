use std::process::ExitCode;

use aoi_cli::{parse_job, run_job, CliError};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match parse_job(std::env::args_os()).and_then(|spec| run_job(&spec)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Info(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("aoi-wait: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
