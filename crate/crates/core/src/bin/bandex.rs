fn main() {
    std::process::exit(bandex::cli::run_cli(std::env::args_os()));
}
