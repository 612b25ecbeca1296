fn main() {
    std::process::exit(riskplan::cli::run(std::env::args_os()));
}
