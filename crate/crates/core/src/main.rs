fn main() {
    std::process::exit(szwalk::cli::main_with_args(std::env::args_os()));
}
