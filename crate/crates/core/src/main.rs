fn main() {
    std::process::exit(volswap::cli::run(std::env::args_os()));
}
