fn main() {
    std::process::exit(covergrid::cli::cli(std::env::args_os()));
}
