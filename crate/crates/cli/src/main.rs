mod args;
mod commands;
mod error;
mod report;

use std::io::Write;
use std::process::ExitCode;

use error::CliError;

const THREADS_ENV: &str = "COCYCLE_LAB_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Usage(format!("{THREADS_ENV}=`{v}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match configure_threads().and_then(|_| commands::run(&argv)) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not an error worth reporting
            let _ = stdout.write_all(out.text.as_bytes());
            out.code
        }
        Err(e) => {
            let msg = e.to_string();
            let msg = msg.trim_end();
            // clap renders its own `error:` prefix and usage
            if msg.starts_with("error:") {
                eprintln!("{msg}");
            } else {
                eprintln!("error: {msg}");
            }
            e.exit_code()
        }
    }
}
