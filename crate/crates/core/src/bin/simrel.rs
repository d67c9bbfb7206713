fn main() {
    std::process::exit(simrel::cli::run_cli(std::env::args_os()));
}
