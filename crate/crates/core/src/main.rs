use std::io::{self, Write};

fn main() {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut err = stderr.lock();
    let code = purify::cli::run_cli(std::env::args_os(), &mut out, &mut err);
    if out.flush().is_err() && code == purify::cli::exit::SUCCESS {
        std::process::exit(purify::cli::exit::IO);
    }
    drop(out);
    std::process::exit(code);
}
