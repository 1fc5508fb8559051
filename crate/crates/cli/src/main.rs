use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let e = exitbounds_cli::execute(std::env::args_os());
    let _ = std::io::stdout().write_all(e.stdout.as_bytes());
    let _ = std::io::stderr().write_all(e.stderr.as_bytes());
    ExitCode::from(e.code)
}
