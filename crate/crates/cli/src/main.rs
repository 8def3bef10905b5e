fn main() {
    std::process::exit(cayley_cli::run(std::env::args_os()));
}
