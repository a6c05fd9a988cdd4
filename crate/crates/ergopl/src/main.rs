fn main() {
    std::process::exit(ergopl::cli::main_with_args(std::env::args_os()));
}
