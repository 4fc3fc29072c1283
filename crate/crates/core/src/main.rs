fn main() {
    std::process::exit(petal::cli::run_cli(std::env::args_os()));
}
