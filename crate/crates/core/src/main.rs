fn main() {
    std::process::exit(twisted_mukai::cli::run(std::env::args_os()));
}
