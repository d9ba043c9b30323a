fn main() {
    std::process::exit(schelling::cli::main_with_args(std::env::args_os()));
}
