fn main() {
    std::process::exit(alphaflow::cli::main_with_args(std::env::args_os()));
}
