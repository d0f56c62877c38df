fn main() {
    std::process::exit(egoflow::cli::run_cli(std::env::args_os()));
}
