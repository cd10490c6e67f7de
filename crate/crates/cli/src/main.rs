fn main() {
    std::process::exit(agler_cli::main_with_args(std::env::args_os()));
}
