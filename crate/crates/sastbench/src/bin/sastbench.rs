fn main() {
    std::process::exit(sastbench::cli::run_from_args());
}
