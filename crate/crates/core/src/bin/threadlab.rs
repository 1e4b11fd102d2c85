fn main() {
    std::process::exit(threadlab::cli::run(std::env::args_os()));
}
