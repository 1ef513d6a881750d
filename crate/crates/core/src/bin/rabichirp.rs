fn main() {
    std::process::exit(rabichirp::cli::main_with_args(std::env::args_os()));
}
