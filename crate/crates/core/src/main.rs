fn main() {
    std::process::exit(bmom::cli::main_with_args(std::env::args_os()));
}
