use std::io::{BufWriter, Write};

fn main() {
    let seed = std::env::var(nclaurent_cli::SEED_ENV).ok();
    let mut stdout = BufWriter::new(std::io::stdout().lock());
    let mut stderr = std::io::stderr().lock();
    let mut code = nclaurent_cli::run_to(std::env::args_os(), seed.as_deref(), &mut stdout, &mut stderr);
    if let Err(e) = stdout.flush() {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        code = nclaurent_cli::EXIT_USAGE;
    }
    std::process::exit(code);
}
