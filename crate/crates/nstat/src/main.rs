use std::process::ExitCode;

fn main() -> ExitCode {
    // die quietly when the read end of a pipe closes (e.g. `nstat ... | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match std::panic::catch_unwind(nstat::cli::run) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("internal error");
            ExitCode::from(1)
        }
    }
}
