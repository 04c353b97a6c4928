use env_logger::Env;

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or("DYSKIT_LOG", "warn")).init();
    std::process::exit(dyskit::cli::run_from_args(std::env::args_os()));
}
