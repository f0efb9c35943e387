fn main() {
    std::process::exit(cmcl_core::cli::main_with_args(std::env::args_os()));
}
