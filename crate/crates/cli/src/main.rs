fn main() {
    std::process::exit(protoscribe_cli::main_with_args(std::env::args_os()));
}
