fn main() {
    std::process::exit(kreinlab::cli::run(std::env::args_os()));
}
