fn main() {
    std::process::exit(flipforge_cli::main_with_args(std::env::args_os()));
}
