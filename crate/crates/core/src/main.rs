fn main() {
    std::process::exit(embgep::cli::run(std::env::args_os()));
}
