fn main() {
    std::process::exit(maslda::cli::run(std::env::args_os()));
}
