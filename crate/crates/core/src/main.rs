fn main() {
    std::process::exit(polyroute::cli::run(std::env::args_os()));
}
