fn main() {
    std::process::exit(tavis_cpa::cli::run_cli(std::env::args_os()));
}
