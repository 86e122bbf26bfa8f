fn main() {
    std::process::exit(multindep::cli::main_with_args(std::env::args_os()));
}
