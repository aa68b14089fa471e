use std::io::Write;

fn main() {
    let threads = std::env::var(groupfx::cli::THREADS_ENV).ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = groupfx::run_main(std::env::args_os(), threads.as_deref(), &mut out, &mut err);
    let _ = out.flush();
    std::process::exit(code);
}
