fn main() {
    std::process::exit(phi4_lambert::cli::main_with_args(std::env::args_os()));
}
