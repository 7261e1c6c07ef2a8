fn main() {
    std::process::exit(renydiv::cli::run_cli(std::env::args_os()));
}
