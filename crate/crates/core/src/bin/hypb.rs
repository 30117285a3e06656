fn main() {
    std::process::exit(hypbessel::cli::main_with_args(std::env::args_os()));
}
