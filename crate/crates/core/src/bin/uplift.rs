fn main() {
    std::process::exit(uplift_core::cli::main_with_args(std::env::args_os()));
}
