use crop_ensemble::cli::{dispatch, LOG_ENV};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = dispatch(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
