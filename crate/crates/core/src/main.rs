fn main() {
    std::process::exit(hcmrh::cli::main_with_args(std::env::args_os()));
}
