fn main() {
    std::process::exit(sisparse::cli::run(std::env::args_os()));
}
