use std::io::Write;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let outcome = qkmirror::cli::run(&args);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(outcome.stdout.as_bytes());
    std::process::exit(outcome.exit);
}
