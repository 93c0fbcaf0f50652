use std::io::Write;
use std::time::Instant;

fn main() {
    let start = Instant::now();
    let out = invmod::cli::run(std::env::args_os());
    print!("{}", out.stdout);
    let _ = std::io::stdout().flush();
    eprint!("{}", out.stderr);
    // Timing stays off stdout so reports are byte-identical across runs.
    if out.code != 1 {
        eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    }
    std::process::exit(out.code);
}
