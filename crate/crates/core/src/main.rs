fn main() {
    std::process::exit(slsgd::cli::main_with_args(std::env::args_os()));
}
