fn main() {
    std::process::exit(photomo::cli::run(std::env::args_os()));
}
